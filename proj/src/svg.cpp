#include "swarmneat/svg.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

namespace swarmneat {

namespace {

const char* kPalette[] = {"#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd",
                          "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf"};

// Maps world coordinates onto a canvas with y pointing up.
struct Viewport {
  double x0, x1, y0, y1;
  double width, height, margin;

  double px(double x) const { return margin + (x - x0) / (x1 - x0) * (width - 2 * margin); }
  double py(double y) const { return height - margin - (y - y0) / (y1 - y0) * (height - 2 * margin); }
};

std::string num(double v) {
  std::ostringstream os;
  os.precision(2);
  os << std::fixed << v;
  return os.str();
}

std::string short_number(double v) {
  std::ostringstream os;
  os.precision(4);
  os << v;
  return os.str();
}

}  // namespace

std::string render_trajectory_svg(const TrajectoryLog& log) {
  const Rect& b = log.arena.bounds;
  const double aspect = (b.y_max - b.y_min) / (b.x_max - b.x_min);
  const double width = 640.0;
  const double margin = 20.0;
  const double height = std::max(120.0, (width - 2 * margin) * aspect + 2 * margin);
  const Viewport vp{b.x_min, b.x_max, b.y_min, b.y_max, width, height, margin};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" fill=\"white\"/>\n";
  os << "<rect class=\"arena\" x=\"" << num(vp.px(b.x_min)) << "\" y=\"" << num(vp.py(b.y_max))
     << "\" width=\"" << num(vp.px(b.x_max) - vp.px(b.x_min)) << "\" height=\""
     << num(vp.py(b.y_min) - vp.py(b.y_max)) << "\" fill=\"none\" stroke=\"black\" stroke-width=\"2\"/>\n";
  if (log.arena.wall) {
    const double half = 0.5 * log.arena.wall->thickness;
    os << "<rect class=\"wall\" x=\"" << num(vp.px(-half)) << "\" y=\"" << num(vp.py(b.y_max))
       << "\" width=\"" << num(std::max(2.0, vp.px(half) - vp.px(-half))) << "\" height=\""
       << num(vp.py(b.y_min) - vp.py(b.y_max)) << "\" fill=\"#555555\"/>\n";
  }

  std::map<int, std::vector<const TrajectoryRow*>> paths;
  for (const auto& r : log.rows) paths[r.agent].push_back(&r);
  for (auto& [agent, rows] : paths) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const TrajectoryRow* a, const TrajectoryRow* c) { return a->time < c->time; });
    const char* colour = kPalette[static_cast<std::size_t>(agent) % std::size(kPalette)];
    os << "<polyline class=\"path\" data-agent=\"" << agent << "\" fill=\"none\" stroke=\"" << colour
       << "\" stroke-width=\"1.5\" points=\"";
    for (const auto* r : rows) os << num(vp.px(r->x)) << ',' << num(vp.py(r->y)) << ' ';
    os << "\"/>\n";
    const auto* end = rows.back();
    os << "<circle class=\"terminal\" data-agent=\"" << agent << "\" cx=\"" << num(vp.px(end->x))
       << "\" cy=\"" << num(vp.py(end->y)) << "\" r=\"4\" fill=\"" << colour << "\"/>\n";
  }
  if (log.fitness)
    os << "<text x=\"" << num(margin) << "\" y=\"14\" font-size=\"12\" font-family=\"sans-serif\">fitness "
       << short_number(*log.fitness) << "</text>\n";
  os << "</svg>\n";
  return os.str();
}

std::string plot_evolution_svg(const EvolutionReport& report) {
  const double width = 640.0, height = 400.0, margin = 50.0;
  double g0 = 0.0, g1 = 1.0, f0 = 0.0, f1 = 1.0;
  if (!report.records.empty()) {
    g0 = report.records.front().generation;
    g1 = report.records.back().generation;
    if (g1 <= g0) g1 = g0 + 1.0;
    f0 = f1 = report.records.front().best;
    for (const auto& r : report.records) {
      f0 = std::min({f0, r.mean - r.stdev, r.best});
      f1 = std::max({f1, r.mean + r.stdev, r.best});
    }
    if (f1 - f0 < 1e-9) {
      f0 -= 0.5;
      f1 += 0.5;
    }
  }
  const Viewport vp{g0, g1, f0, f1, width, height, margin};

  std::ostringstream os;
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << num(width) << "\" height=\""
     << num(height) << "\" viewBox=\"0 0 " << num(width) << ' ' << num(height) << "\">\n";
  os << "<rect x=\"0\" y=\"0\" width=\"" << num(width) << "\" height=\"" << num(height)
     << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << num(margin) << "\" y1=\"" << num(height - margin) << "\" x2=\""
     << num(width - margin) << "\" y2=\"" << num(height - margin) << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << num(margin) << "\" y1=\"" << num(margin) << "\" x2=\"" << num(margin)
     << "\" y2=\"" << num(height - margin) << "\" stroke=\"black\"/>\n";
  os << "<text x=\"" << num(width / 2) << "\" y=\"" << num(height - 12)
     << "\" font-size=\"12\" font-family=\"sans-serif\" text-anchor=\"middle\">generation</text>\n";
  os << "<text x=\"4\" y=\"" << num(margin - 8) << "\" font-size=\"11\" font-family=\"sans-serif\">"
     << short_number(f1) << "</text>\n";
  os << "<text x=\"4\" y=\"" << num(height - margin) << "\" font-size=\"11\" font-family=\"sans-serif\">"
     << short_number(f0) << "</text>\n";

  if (!report.records.empty()) {
    os << "<polygon class=\"stdev-band\" fill=\"#1f77b4\" fill-opacity=\"0.2\" stroke=\"none\" points=\"";
    for (const auto& r : report.records) os << num(vp.px(r.generation)) << ',' << num(vp.py(r.mean + r.stdev)) << ' ';
    for (auto it = report.records.rbegin(); it != report.records.rend(); ++it)
      os << num(vp.px(it->generation)) << ',' << num(vp.py(it->mean - it->stdev)) << ' ';
    os << "\"/>\n";

    auto series = [&](const char* cls, const char* colour, auto value) {
      os << "<polyline class=\"" << cls << "\" fill=\"none\" stroke=\"" << colour
         << "\" stroke-width=\"2\" points=\"";
      for (const auto& r : report.records) os << num(vp.px(r.generation)) << ',' << num(vp.py(value(r))) << ' ';
      os << "\"/>\n";
      for (const auto& r : report.records)
        os << "<circle class=\"" << cls << "-point\" cx=\"" << num(vp.px(r.generation)) << "\" cy=\""
           << num(vp.py(value(r))) << "\" r=\"2\" fill=\"" << colour << "\"/>\n";
    };
    series("best", "#d62728", [](const GenerationRecord& r) { return r.best; });
    series("mean", "#1f77b4", [](const GenerationRecord& r) { return r.mean; });
  }
  os << "</svg>\n";
  return os.str();
}

}  // namespace swarmneat
