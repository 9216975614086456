#include "amto/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "amto/errors.hpp"

namespace amto {

namespace {

constexpr const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                    "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};
constexpr int kPaletteSize = 8;

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

struct Scale {
    double lo, hi, px0, px1;
    double operator()(double v) const {
        if (hi == lo) return (px0 + px1) / 2.0;
        return px0 + (v - lo) / (hi - lo) * (px1 - px0);
    }
};

void axes(std::ostringstream& os, double x0, double y0, double x1, double y1,
          const Scale& sx, const Scale& sy, const std::string& xlabel,
          const std::string& ylabel) {
    os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x1)
       << "\" y2=\"" << fmt(y0) << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << fmt(x0) << "\" y1=\"" << fmt(y0) << "\" x2=\"" << fmt(x0)
       << "\" y2=\"" << fmt(y1) << "\" stroke=\"black\"/>\n";
    os << "<text x=\"" << fmt((x0 + x1) / 2) << "\" y=\"" << fmt(y0 + 28)
       << "\" font-size=\"11\" text-anchor=\"middle\">" << xlabel << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 34) << "\" y=\"" << fmt((y0 + y1) / 2)
       << "\" font-size=\"11\" text-anchor=\"middle\" transform=\"rotate(-90 "
       << fmt(x0 - 34) << ' ' << fmt((y0 + y1) / 2) << ")\">" << ylabel << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 4) << "\" y=\"" << fmt(y0 + 12)
       << "\" font-size=\"9\" text-anchor=\"end\">" << format_double(sx.lo)
       << "</text>\n";
    os << "<text x=\"" << fmt(x1) << "\" y=\"" << fmt(y0 + 12)
       << "\" font-size=\"9\" text-anchor=\"end\">" << format_double(sx.hi)
       << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y0)
       << "\" font-size=\"9\" text-anchor=\"end\">" << format_double(sy.lo)
       << "</text>\n";
    os << "<text x=\"" << fmt(x0 - 6) << "\" y=\"" << fmt(y1 + 8)
       << "\" font-size=\"9\" text-anchor=\"end\">" << format_double(sy.hi)
       << "</text>\n";
}

}  // namespace

std::string render_loss_curves(const std::string& run_id,
                               const std::vector<MetricsRow>& rows) {
    if (rows.empty()) throw data_error("no metrics rows to plot");

    const bool has_val = std::any_of(rows.begin(), rows.end(), [](const MetricsRow& r) {
        return std::isfinite(r.master_val_loss);
    });
    auto value = [&](const MetricsRow& r) {
        return has_val ? r.master_val_loss : r.train_loss;
    };

    std::map<int, std::vector<const MetricsRow*>> per_task;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const auto& r : rows) {
        per_task[r.task_id].push_back(&r);
        const double v = value(r);
        if (!std::isfinite(v)) continue;
        xmin = std::min(xmin, static_cast<double>(r.global_iteration));
        xmax = std::max(xmax, static_cast<double>(r.global_iteration));
        ymin = std::min(ymin, v);
        ymax = std::max(ymax, v);
    }
    if (ymin > ymax) throw data_error("no finite loss values to plot");

    const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
    const Scale sx{xmin, xmax, L, W - R};
    const Scale sy{ymin, ymax, H - B, T};

    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
       << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << fmt(W / 2) << "\" y=\"20\" font-size=\"13\" "
          "text-anchor=\"middle\">"
       << run_id << (has_val ? ": validation loss" : ": training loss")
       << " (dots mark accepted transfers)</text>\n";
    axes(os, L, H - B, W - R, T, sx, sy, "iteration",
         has_val ? "validation loss" : "training loss");

    for (const auto& [task_id, task_rows] : per_task) {
        const char* color = kPalette[task_id % kPaletteSize];
        os << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
        for (const auto* r : task_rows) {
            const double v = value(*r);
            if (!std::isfinite(v)) continue;
            os << fmt(sx(static_cast<double>(r->global_iteration))) << ',' << fmt(sy(v))
               << ' ';
        }
        os << "\"/>\n";
        for (const auto* r : task_rows) {
            const double v = value(*r);
            if (r->transfer_accepted && std::isfinite(v))
                os << "<circle cx=\"" << fmt(sx(static_cast<double>(r->global_iteration)))
                   << "\" cy=\"" << fmt(sy(v)) << "\" r=\"3\" fill=\"" << color
                   << "\"/>\n";
        }
        os << "<text x=\"" << fmt(W - R - 4) << "\" y=\"" << fmt(T + 14 + 14 * task_id)
           << "\" font-size=\"10\" text-anchor=\"end\" fill=\"" << color << "\">task "
           << task_id << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

std::string render_sweep_panels(const std::vector<int>& task_counts,
                                const std::vector<double>& mean_val_losses,
                                const std::vector<double>& mean_test_accuracies) {
    if (task_counts.empty() || task_counts.size() != mean_val_losses.size() ||
        task_counts.size() != mean_test_accuracies.size())
        throw data_error("sweep series lengths do not match");

    const double W = 760, H = 320, PW = 330, L = 66, T = 40, B = 50;
    std::ostringstream os;
    os << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
       << H << "\" viewBox=\"0 0 " << W << ' ' << H << "\">\n";
    os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";

    auto panel = [&](const char* id, double x_off, const std::vector<double>& ys,
                     const char* ylabel, const char* color) {
        double ymin = *std::min_element(ys.begin(), ys.end());
        double ymax = *std::max_element(ys.begin(), ys.end());
        if (ymin == ymax) {
            ymin -= 0.5;
            ymax += 0.5;
        }
        const double xmin = task_counts.front(), xmax = task_counts.back();
        const Scale sx{xmin, xmax, x_off + L, x_off + PW};
        const Scale sy{ymin, ymax, H - B, T};
        os << "<g id=\"" << id << "\">\n";
        axes(os, x_off + L, H - B, x_off + PW, T, sx, sy, "formulated tasks", ylabel);
        os << "<polyline fill=\"none\" stroke=\"" << color
           << "\" stroke-width=\"1.5\" points=\"";
        for (std::size_t i = 0; i < ys.size(); ++i)
            os << fmt(sx(task_counts[i])) << ',' << fmt(sy(ys[i])) << ' ';
        os << "\"/>\n";
        for (std::size_t i = 0; i < ys.size(); ++i)
            os << "<circle cx=\"" << fmt(sx(task_counts[i])) << "\" cy=\""
               << fmt(sy(ys[i])) << "\" r=\"3\" fill=\"" << color << "\"/>\n";
        os << "</g>\n";
    };

    panel("loss-panel", 0.0, mean_val_losses, "winner validation loss", "#1f77b4");
    panel("accuracy-panel", 380.0, mean_test_accuracies, "test accuracy (%)", "#d62728");
    os << "</svg>\n";
    return os.str();
}

}  // namespace amto
