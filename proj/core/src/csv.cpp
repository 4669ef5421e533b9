#include "cctsens/csv.hpp"

#include <cstdio>

namespace cctsens {

std::string format_number(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

namespace {

void put_row(std::ostream& os, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << '\n';
}

} // namespace

void write_trajectory_csv(std::ostream& os, const Trajectory& trajectory) {
    const bool with_shadow = !trajectory.shadow.empty();
    std::size_t n = 0, m = 0;
    if (!trajectory.samples.empty()) {
        n = trajectory.samples.front().x.size();
        m = trajectory.samples.front().y.size();
    }
    std::vector<std::string> head{"t"};
    for (std::size_t j = 0; j < n; ++j) head.push_back("x" + std::to_string(j + 1));
    for (std::size_t j = 0; j < m; ++j) head.push_back("y" + std::to_string(j + 1));
    if (with_shadow) {
        for (std::size_t j = 0; j < m; ++j)
            head.push_back("y_post" + std::to_string(j + 1));
        head.push_back("delta_post");
    }
    put_row(os, head);

    for (std::size_t i = 0; i < trajectory.samples.size(); ++i) {
        const auto& s = trajectory.samples[i];
        std::vector<std::string> row{format_number(s.t)};
        for (double v : s.x) row.push_back(format_number(v));
        for (double v : s.y) row.push_back(format_number(v));
        if (with_shadow) {
            const auto& sh = trajectory.shadow[i];
            for (double v : sh.y_post) row.push_back(format_number(v));
            row.push_back(format_number(sh.delta_post));
        }
        put_row(os, row);
    }
}

void write_variational_csv(std::ostream& os, const VariationalHistory& history) {
    std::size_t n = 0, m = 0;
    if (!history.samples.empty()) {
        n = history.samples.front().dx_dx0.rows();
        m = history.samples.front().dyfault_dx0.rows();
    }
    std::vector<std::string> head{"t"};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j)
            head.push_back("dx" + std::to_string(i + 1) + "_dx0" + std::to_string(j + 1));
    for (std::size_t i = 0; i < n; ++i)
        head.push_back("dx" + std::to_string(i + 1) + "_dp");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            head.push_back("dyf" + std::to_string(i + 1) + "_dx0" + std::to_string(j + 1));
    for (std::size_t i = 0; i < m; ++i)
        head.push_back("dyf" + std::to_string(i + 1) + "_dp");
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < n; ++j)
            head.push_back("dyp" + std::to_string(i + 1) + "_dx0" + std::to_string(j + 1));
    for (std::size_t i = 0; i < m; ++i)
        head.push_back("dyp" + std::to_string(i + 1) + "_dp");
    put_row(os, head);

    for (const auto& s : history.samples) {
        std::vector<std::string> row{format_number(s.t)};
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row.push_back(format_number(s.dx_dx0(i, j)));
        for (std::size_t i = 0; i < n; ++i) row.push_back(format_number(s.dx_dp[i]));
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row.push_back(format_number(s.dyfault_dx0(i, j)));
        for (std::size_t i = 0; i < m; ++i)
            row.push_back(format_number(s.dyfault_dp[i]));
        // Inside the fold-exclusion window the post-fault columns are
        // written empty, not as stale numbers.
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j)
                row.push_back(s.dypost_dx0 ? format_number((*s.dypost_dx0)(i, j)) : "");
        for (std::size_t i = 0; i < m; ++i)
            row.push_back(s.dypost_dp ? format_number((*s.dypost_dp)[i]) : "");
        put_row(os, row);
    }
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows) {
    put_row(os, {"param_name", "param_value", "t_cct", "dcct_dp", "method", "mechanism",
                 "error", "pred_prev", "pred_next"});
    for (const auto& r : rows) {
        std::vector<std::string> row{r.param_name, format_number(r.value)};
        if (r.ok) {
            row.push_back(format_number(r.t_cct));
            row.push_back(format_number(r.dcct_dp));
            row.push_back(to_string(r.method));
            row.push_back(r.mechanism);
            row.push_back("");
        } else {
            row.insert(row.end(), {"", "", "", ""});
            std::string err = r.error;
            for (char& c : err)
                if (c == ',' || c == '\n') c = ';';
            row.push_back(err);
        }
        row.push_back(r.pred_prev ? format_number(*r.pred_prev) : "");
        row.push_back(r.pred_next ? format_number(*r.pred_next) : "");
        put_row(os, row);
    }
}

void write_classification_csv(std::ostream& os,
                              const std::vector<SingularPointClass>& points) {
    std::size_t n = 0, m = 0;
    if (!points.empty()) {
        n = points.front().x.size();
        m = points.front().y.size();
    }
    std::vector<std::string> head;
    for (std::size_t j = 0; j < n; ++j) head.push_back("x" + std::to_string(j + 1));
    for (std::size_t j = 0; j < m; ++j) head.push_back("y" + std::to_string(j + 1));
    head.insert(head.end(), {"delta", "kappa_norm", "graze", "category", "pseudo_type",
                             "eig1_re", "eig1_im", "eig2_re", "eig2_im"});
    put_row(os, head);

    for (const auto& pt : points) {
        std::vector<std::string> row;
        for (double v : pt.x) row.push_back(format_number(v));
        for (double v : pt.y) row.push_back(format_number(v));
        row.push_back(format_number(pt.delta));
        row.push_back(format_number(norm2(pt.kappa)));
        row.push_back(format_number(pt.graze));
        row.push_back(to_string(pt.category));
        row.push_back(pt.pseudo_type ? to_string(*pt.pseudo_type) : "");
        for (int k = 0; k < 2; ++k) {
            if ((std::size_t)k < pt.nonzero_eigs.size()) {
                row.push_back(format_number(pt.nonzero_eigs[k].real()));
                row.push_back(format_number(pt.nonzero_eigs[k].imag()));
            } else {
                row.push_back("");
                row.push_back("");
            }
        }
        put_row(os, row);
    }
}

void write_surface_mesh_csv(std::ostream& os, const DaeModel& model, Stage stage,
                            const ParameterSet& p, double x1_lo, double x1_hi,
                            double y_lo, double y_hi, int nx, int ny) {
    put_row(os, {"x1", "y", "g", "delta"});
    Vec x(model.n(), 0.0), y(model.m(), 0.0);
    for (int i = 0; i < nx; ++i) {
        x[0] = nx == 1 ? x1_lo : x1_lo + i * (x1_hi - x1_lo) / (nx - 1);
        for (int j = 0; j < ny; ++j) {
            y[0] = ny == 1 ? y_lo : y_lo + j * (y_hi - y_lo) / (ny - 1);
            const Vec gv = model.g(stage, x, y, p);
            put_row(os, {format_number(x[0]), format_number(y[0]),
                         format_number(gv[0]),
                         format_number(model.delta(stage, x, y, p))});
        }
    }
}

} // namespace cctsens
