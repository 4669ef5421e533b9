// Command-line front end: scenario ingestion and CSV emission for the
// staged-DAE transient stability toolkit.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "cctsens/cct.hpp"
#include "cctsens/csv.hpp"
#include "cctsens/errors.hpp"
#include "cctsens/geometry.hpp"
#include "cctsens/roots.hpp"
#include "cctsens/smib.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace cctsens;

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;
constexpr int kInternal = 4;

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct AppConfig {
    StagedScenario scenario;
    std::string sweep_param;
    std::vector<double> sweep_grid;
    std::string sens_param;
    std::vector<std::vector<double>> classify_seeds;
};

void reject_unknown_keys(const json& obj, const char* where,
                         const std::vector<std::string>& allowed) {
    for (const auto& [key, _] : obj.items()) {
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            throw ConfigError(std::string("unknown key \"") + key + "\" in " + where);
    }
}

double positive(const json& v, const char* name) {
    const double d = v.get<double>();
    if (!(d > 0.0)) throw ConfigError(std::string(name) + " must be positive");
    return d;
}

AppConfig load_config(const std::string& path) {
    AppConfig cfg;
    json doc = json::object();
    if (!path.empty()) {
        std::ifstream in(path);
        if (!in) throw ConfigError("cannot open config file: " + path);
        try {
            in >> doc;
        } catch (const json::parse_error& e) {
            throw ConfigError(std::string("config is not valid JSON: ") + e.what());
        }
    }
    if (!doc.is_object()) throw ConfigError("config root must be a JSON object");
    reject_unknown_keys(doc, "config",
                        {"model", "params", "solver", "sep_guess", "sweep",
                         "sensitivity", "classify"});

    const std::string model_name = doc.value("model", std::string("smib"));
    if (model_name != "smib") throw ConfigError("unknown model: " + model_name);

    ParameterSet p;
    if (doc.contains("params")) {
        const json& jp = doc["params"];
        reject_unknown_keys(jp, "params",
                            {ParameterSet::names().begin(), ParameterSet::names().end()});
        for (const auto& [key, val] : jp.items()) p[ParameterSet::index_of(key)] = val.get<double>();
    }

    SolverSettings s;
    if (doc.contains("solver")) {
        const json& js = doc["solver"];
        reject_unknown_keys(js, "solver",
                            {"h", "t_max", "t_settle", "algebraic_tol", "singularity_rtol",
                             "fold_time_tol", "fold_probe_eps", "diverge_bound",
                             "equilibrium_tol", "equilibrium_hold"});
        if (js.contains("h")) s.h = positive(js["h"], "solver.h");
        if (js.contains("t_max")) s.t_max = positive(js["t_max"], "solver.t_max");
        if (js.contains("t_settle")) s.t_settle = positive(js["t_settle"], "solver.t_settle");
        if (js.contains("algebraic_tol"))
            s.algebraic_tol = positive(js["algebraic_tol"], "solver.algebraic_tol");
        if (js.contains("singularity_rtol"))
            s.singularity_rtol = positive(js["singularity_rtol"], "solver.singularity_rtol");
        if (js.contains("fold_time_tol"))
            s.fold_time_tol = positive(js["fold_time_tol"], "solver.fold_time_tol");
        if (js.contains("fold_probe_eps"))
            s.fold_probe_eps = positive(js["fold_probe_eps"], "solver.fold_probe_eps");
        if (js.contains("diverge_bound"))
            s.diverge_bound = positive(js["diverge_bound"], "solver.diverge_bound");
        if (js.contains("equilibrium_tol"))
            s.equilibrium_tol = positive(js["equilibrium_tol"], "solver.equilibrium_tol");
        if (js.contains("equilibrium_hold"))
            s.equilibrium_hold = positive(js["equilibrium_hold"], "solver.equilibrium_hold");
    }

    try {
        cfg.scenario.model = smib_model(p);
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("invalid parameters: ") + e.what());
    }
    cfg.scenario.params = p;
    cfg.scenario.settings = s;

    if (doc.contains("sep_guess")) {
        const json& jg = doc["sep_guess"];
        reject_unknown_keys(jg, "sep_guess", {"x", "y"});
        State g;
        g.x = jg.at("x").get<Vec>();
        g.y = jg.at("y").get<Vec>();
        if ((int)g.x.size() != cfg.scenario.model->n() ||
            (int)g.y.size() != cfg.scenario.model->m())
            throw ConfigError("sep_guess dimensions do not match the model");
        cfg.scenario.sep_guess_override = g;
    }

    if (doc.contains("sweep")) {
        const json& js = doc["sweep"];
        reject_unknown_keys(js, "sweep", {"param", "grid"});
        cfg.sweep_param = js.at("param").get<std::string>();
        cfg.sweep_grid = js.at("grid").get<std::vector<double>>();
    }
    if (doc.contains("sensitivity")) {
        const json& js = doc["sensitivity"];
        reject_unknown_keys(js, "sensitivity", {"param"});
        cfg.sens_param = js.at("param").get<std::string>();
    }
    if (doc.contains("classify")) {
        const json& js = doc["classify"];
        reject_unknown_keys(js, "classify", {"seeds"});
        cfg.classify_seeds = js.at("seeds").get<std::vector<std::vector<double>>>();
    }
    return cfg;
}

std::ofstream open_out(const fs::path& dir, const std::string& name) {
    fs::create_directories(dir);
    std::ofstream out(dir / name);
    if (!out) throw std::runtime_error("cannot write " + (dir / name).string());
    return out;
}

int param_index_or_throw(const std::string& name) {
    const int idx = ParameterSet::index_of(name);
    if (idx < 0) throw ConfigError("unknown parameter name: " + name);
    return idx;
}

json fold_event_json(const FoldEvent& ev) {
    return {{"t_fold", ev.t_fold},
            {"x_cl", ev.x_cl},
            {"y_post_cl", ev.y_post_cl},
            {"delta_residual", ev.delta_residual},
            {"sigma_min", ev.sigma_min}};
}

void print_report(bool as_json, const json& obj) {
    if (as_json) {
        std::cout << obj.dump(2) << '\n';
        return;
    }
    for (const auto& [key, val] : obj.items()) {
        std::cout << key << ": ";
        if (val.is_number_float())
            std::cout << format_number(val.get<double>());
        else if (val.is_string())
            std::cout << val.get<std::string>();
        else
            std::cout << val.dump();
        std::cout << '\n';
    }
}

int cmd_simulate(const AppConfig& cfg, const fs::path& out_dir, bool as_json,
                 const std::string& stage_name, double t_end) {
    const StagedScenario& sc = cfg.scenario;
    Trajectory traj;
    json report;
    if (stage_name == "fault") {
        const FaultShadowResult res =
            integrate_fault_with_shadow(sc, sc.params, t_end, sc.settings.h);
        traj = res.trajectory;
        report["fold_detected"] = res.fold.has_value();
        if (res.fold) report["fold"] = fold_event_json(*res.fold);
    } else {
        const Stage stage = stage_name == "pre" ? Stage::PreFault : Stage::PostFault;
        const SepSolution sep = find_sep(*sc.model, Stage::PreFault, sc.params, sc.sep_guess());
        traj = integrate_stage(*sc.model, stage, sep.x_s, sep.y_s, sc.params, t_end,
                               sc.settings.h, sc.settings);
    }
    {
        auto out = open_out(out_dir, "trajectory.csv");
        write_trajectory_csv(out, traj);
    }
    std::vector<std::string> files{"trajectory.csv"};
    if (sc.model->n() == 2 && sc.model->m() == 1) {
        auto out = open_out(out_dir, "surface_mesh.csv");
        write_surface_mesh_csv(out, *sc.model, Stage::PostFault, sc.params, -0.2, 1.8,
                               0.0, 1.2, 81, 61);
        files.push_back("surface_mesh.csv");
    }
    report["stage"] = stage_name;
    report["samples"] = traj.samples.size();
    report["t_final"] = traj.samples.empty() ? 0.0 : traj.samples.back().t;
    report["files"] = files;
    print_report(as_json, report);
    return kOk;
}

int cmd_cct(const AppConfig& cfg, bool as_json, const std::string& method, double t_lo,
            double t_hi, double tol) {
    const StagedScenario& sc = cfg.scenario;
    CctResult res;
    if (method == "event")
        res = find_cct_event(sc, sc.params);
    else
        res = find_cct_bisection(sc, sc.params, t_lo, t_hi, tol);
    json report{{"t_cct", res.t_cct},
                {"method", to_string(res.method)},
                {"mechanism", to_string(res.mechanism)},
                {"mechanism_mismatch", res.mechanism_mismatch},
                {"fold", fold_event_json(res.fold_event)}};
    print_report(as_json, report);
    return kOk;
}

int cmd_sensitivity(const AppConfig& cfg, const fs::path& out_dir, bool as_json,
                    const std::string& param_flag, bool validate_fd) {
    const StagedScenario& sc = cfg.scenario;
    const std::string pname = !param_flag.empty() ? param_flag : cfg.sens_param;
    if (pname.empty())
        throw ConfigError("sensitivity needs a parameter (--param or config)");
    const int idx = param_index_or_throw(pname);

    const CctResult cct = find_cct_event(sc, sc.params);
    const SensitivityBundle b = cct_sensitivity(sc, sc.params, idx, cct);

    json report{{"param_name", pname},
                {"param_value", sc.params[idx]},
                {"t_cct", cct.t_cct},
                {"dcct_dp", b.dcct_dp},
                {"delta_row_residual", b.delta_row_residual},
                {"A1", b.A1},
                {"B2", b.B2},
                {"B3", b.B3},
                {"C2", b.C2},
                {"v_star", b.v_star}};

    std::optional<double> fd;
    if (validate_fd) {
        const double hp = 1e-3 * std::max(1.0, std::abs(sc.params[idx]));
        ParameterSet pp = sc.params, pm = sc.params;
        pp[idx] += hp;
        pm[idx] -= hp;
        const double tp = find_cct_event(sc, pp).t_cct;
        const double tm = find_cct_event(sc, pm).t_cct;
        fd = (tp - tm) / (2.0 * hp);
        report["fd_dcct_dp"] = *fd;
        report["fd_rel_error"] = std::abs(*fd - b.dcct_dp) / std::abs(*fd);
    }

    {
        auto out = open_out(out_dir, "sensitivity.csv");
        out << "param_name,param_value,t_cct,dcct_dp,delta_row_residual,fd_dcct_dp\n"
            << pname << ',' << format_number(sc.params[idx]) << ','
            << format_number(cct.t_cct) << ',' << format_number(b.dcct_dp) << ','
            << format_number(b.delta_row_residual) << ','
            << (fd ? format_number(*fd) : "") << '\n';
    }
    print_report(as_json, report);
    return kOk;
}

int cmd_sweep(const AppConfig& cfg, const fs::path& out_dir, bool as_json, int jobs) {
    if (cfg.sweep_param.empty() || cfg.sweep_grid.empty())
        throw ConfigError("sweep needs a nonempty grid in the config");
    const int idx = param_index_or_throw(cfg.sweep_param);
    const auto rows = sweep(cfg.scenario, idx, cfg.sweep_grid, jobs);
    {
        auto out = open_out(out_dir, "sweep.csv");
        write_sweep_csv(out, rows);
    }
    if (as_json) {
        json arr = json::array();
        for (const auto& r : rows) {
            json o{{"param_name", r.param_name}, {"param_value", r.value}};
            if (r.ok) {
                o["t_cct"] = r.t_cct;
                o["dcct_dp"] = r.dcct_dp;
                o["method"] = to_string(r.method);
                o["mechanism"] = r.mechanism;
            } else {
                o["error"] = r.error;
            }
            if (r.pred_prev) o["pred_prev"] = *r.pred_prev;
            if (r.pred_next) o["pred_next"] = *r.pred_next;
            arr.push_back(o);
        }
        std::cout << arr.dump(2) << '\n';
    } else {
        std::ostringstream os;
        write_sweep_csv(os, rows);
        std::cout << os.str();
    }
    return kOk;
}

int cmd_classify(const AppConfig& cfg, const fs::path& out_dir, bool as_json, bool auto_seed,
                 double arc_step, int count) {
    const StagedScenario& sc = cfg.scenario;
    const DaeModel& model = *sc.model;
    std::vector<SingularPointClass> report;

    auto classify_state = [&](const Vec& x, const Vec& y) {
        report.push_back(classify_singular_point(model, Stage::PostFault, x, y, sc.params));
    };

    if (auto_seed) {
        if (model.n() != 2 || model.m() != 1)
            throw ConfigError("--auto needs the smib model");
        const FoldPoint fp = smib_singular_locus(sc.params);
        State seed{{fp.x1_s, 0.0}, {fp.y_s}, Stage::PostFault};

        // Trace the singular line both ways, then pin down the point
        // where the rescaled algebraic flow kappa changes sign.
        auto half = trace_singular_set(model, Stage::PostFault, sc.params, seed, arc_step,
                                       count / 2 + 1);
        auto other = trace_singular_set(model, Stage::PostFault, sc.params, seed, -arc_step,
                                        count - count / 2);
        std::vector<State> pts(other.rbegin(), other.rend() - 1);
        pts.insert(pts.end(), half.begin(), half.end());

        auto kappa_at = [&](const Vec& x, const Vec& y) {
            const Matrix gy = model.dg_dy(Stage::PostFault, x, y, sc.params);
            const Vec k = adjugate(gy) *
                          (model.dg_dx(Stage::PostFault, x, y, sc.params) *
                           model.f(Stage::PostFault, x, y, sc.params));
            return k[0];
        };
        for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
            const double k0 = kappa_at(pts[i].x, pts[i].y);
            const double k1 = kappa_at(pts[i + 1].x, pts[i + 1].y);
            if (k0 == 0.0 || k0 * k1 >= 0.0) continue;
            auto lerp = [&](double s) {
                Vec x(pts[i].x.size()), y(pts[i].y.size());
                for (std::size_t j = 0; j < x.size(); ++j)
                    x[j] = (1 - s) * pts[i].x[j] + s * pts[i + 1].x[j];
                for (std::size_t j = 0; j < y.size(); ++j)
                    y[j] = (1 - s) * pts[i].y[j] + s * pts[i + 1].y[j];
                return State{x, y, Stage::PostFault};
            };
            const double s = bracketed_root(
                [&](double ss) {
                    const State st = lerp(ss);
                    return kappa_at(st.x, st.y);
                },
                0.0, 1.0, 1e-13);
            const State st = lerp(s);
            classify_state(st.x, st.y);
        }
        for (const auto& st : pts) classify_state(st.x, st.y);
    } else {
        if (cfg.classify_seeds.empty())
            throw ConfigError("classify needs seeds in the config or --auto");
        const std::size_t dim = model.n() + model.m();
        for (const auto& z : cfg.classify_seeds) {
            if (z.size() != dim)
                throw ConfigError("seed vector must have " + std::to_string(dim) +
                                  " entries");
            classify_state(Vec(z.begin(), z.begin() + model.n()),
                           Vec(z.begin() + model.n(), z.end()));
        }
    }

    {
        auto out = open_out(out_dir, "classification.csv");
        write_classification_csv(out, report);
    }
    if (as_json) {
        json arr = json::array();
        for (const auto& r : report) {
            json o{{"x", r.x},
                   {"y", r.y},
                   {"delta", r.delta},
                   {"kappa_norm", norm2(r.kappa)},
                   {"graze", r.graze},
                   {"category", to_string(r.category)}};
            if (r.pseudo_type) o["pseudo_type"] = to_string(*r.pseudo_type);
            arr.push_back(o);
        }
        std::cout << arr.dump(2) << '\n';
    } else {
        std::ostringstream os;
        write_classification_csv(os, report);
        std::cout << os.str();
    }
    return kOk;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Staged DAE transient stability toolkit: critical clearing time and "
                 "its parameter sensitivity at singularity-induced instability"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_dir = ".";
    int jobs = (int)std::max(1u, std::thread::hardware_concurrency());
    bool as_json = false;
    app.add_option("--config", config_path, "Scenario config (JSON)");
    app.add_option("--out", out_dir, "Output directory for data files");
    app.add_option("--jobs", jobs, "Worker pool size for sweeps");
    app.add_flag("--json", as_json, "Machine-readable report on stdout");

    auto* sim = app.add_subcommand("simulate", "Integrate one stage, with the post-fault "
                                               "shadow branch during the fault");
    std::string stage_name = "fault";
    double t_end = -1.0;
    sim->add_option("--stage", stage_name, "pre|fault|post")
        ->check(CLI::IsMember({"pre", "fault", "post"}));
    sim->add_option("--t-end", t_end, "Integration horizon (s)");

    auto* cct_cmd = app.add_subcommand("cct", "Critical clearing time");
    std::string method = "event";
    double t_lo = 0.0, t_hi = 5.0, bisect_tol = 1e-6;
    cct_cmd->add_option("--method", method, "event|bisection")
        ->check(CLI::IsMember({"event", "bisection"}));
    cct_cmd->add_option("--t-lo", t_lo, "Bisection lower clearing time (s)");
    cct_cmd->add_option("--t-hi", t_hi, "Bisection upper clearing time (s)");
    cct_cmd->add_option("--tol", bisect_tol, "Bisection interval tolerance (s)");

    auto* sens = app.add_subcommand("sensitivity", "CCT parameter sensitivity");
    std::string param_flag;
    bool validate_fd = false;
    sens->add_option("--param", param_flag, "Parameter name (overrides config)");
    sens->add_flag("--validate-fd", validate_fd,
                   "Cross-check against a central finite difference of the CCT");

    auto* swp = app.add_subcommand("sweep", "CCT and sensitivity over a parameter grid");
    (void)swp;

    auto* cls = app.add_subcommand("classify", "Classify points on the singular surface");
    bool auto_seed = false;
    double arc_step = 0.1;
    int count = 25;
    cls->add_flag("--auto", auto_seed, "Seed from the model's closed-form fold point");
    cls->add_option("--arc-step", arc_step, "Continuation arclength step");
    cls->add_option("--count", count, "Points per trace");

    for (auto* sub : app.get_subcommands({})) sub->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        const AppConfig cfg = load_config(config_path);
        if (t_end <= 0.0) t_end = cfg.scenario.settings.t_max;
        const fs::path out{out_dir};
        if (sim->parsed()) return cmd_simulate(cfg, out, as_json, stage_name, t_end);
        if (cct_cmd->parsed()) return cmd_cct(cfg, as_json, method, t_lo, t_hi, bisect_tol);
        if (sens->parsed()) return cmd_sensitivity(cfg, out, as_json, param_flag, validate_fd);
        if (swp->parsed()) return cmd_sweep(cfg, out, as_json, jobs);
        if (cls->parsed()) return cmd_classify(cfg, out, as_json, auto_seed, arc_step, count);
        return kUsage;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kUsage;
    } catch (const NumericError& e) {
        std::cerr << "numerical error: " << e.what() << '\n';
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return kInternal;
    }
}
