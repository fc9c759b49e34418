#include "skidsim/plot.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "skidsim/trace_io.hpp"

namespace skidsim {

namespace {

constexpr double kWidth = 800.0;
constexpr double kHeight = 480.0;
constexpr double kLeft = 80.0, kRight = 170.0, kTop = 40.0, kBottom = 60.0;
constexpr std::size_t kMaxPoints = 4000;

constexpr const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e",
                                   "#9467bd", "#8c564b", "#e377c2", "#17becf"};

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = 0.0;
  double hi = 1.0;
};

double nice_step(double span, int target) {
  const double raw = span / target;
  const double mag = std::pow(10.0, std::floor(std::log10(raw)));
  const double f = raw / mag;
  const double nice = f < 1.5 ? 1.0 : f < 3.0 ? 2.0 : f < 7.0 ? 5.0 : 10.0;
  return nice * mag;
}

Range padded(double lo, double hi) {
  if (hi - lo < 1e-12) {
    const double pad = std::max(std::abs(lo) * 0.1, 1e-3);
    return {lo - pad, hi + pad};
  }
  const double pad = 0.05 * (hi - lo);
  return {lo - pad, hi + pad};
}

std::vector<double> ticks(const Range& r) {
  const double step = nice_step(r.hi - r.lo, 6);
  std::vector<double> out;
  for (double v = std::ceil(r.lo / step) * step; v <= r.hi + 1e-9 * step; v += step) {
    out.push_back(std::abs(v) < 1e-12 * step ? 0.0 : v);
  }
  return out;
}

}  // namespace

std::string render_svg(const Chart& chart) {
  if (chart.series.empty()) throw std::invalid_argument("chart '" + chart.title + "' has no series");
  double xmin = INFINITY, xmax = -INFINITY, ymin = INFINITY, ymax = -INFINITY;
  for (const auto& s : chart.series) {
    if (s.x.size() != s.y.size()) throw std::invalid_argument("series '" + s.label + "': x/y length mismatch");
    if (s.x.empty()) throw std::invalid_argument("series '" + s.label + "' is empty");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        throw std::invalid_argument("series '" + s.label + "' has non-finite values");
      }
      xmin = std::min(xmin, s.x[i]);
      xmax = std::max(xmax, s.x[i]);
      ymin = std::min(ymin, s.y[i]);
      ymax = std::max(ymax, s.y[i]);
    }
  }
  Range xr = padded(xmin, xmax);
  Range yr = padded(ymin, ymax);
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  if (chart.equal_aspect) {
    const double scale = std::max((xr.hi - xr.lo) / pw, (yr.hi - yr.lo) / ph);
    const double xc = 0.5 * (xr.lo + xr.hi), yc = 0.5 * (yr.lo + yr.hi);
    xr = {xc - 0.5 * scale * pw, xc + 0.5 * scale * pw};
    yr = {yc - 0.5 * scale * ph, yc + 0.5 * scale * ph};
  }
  const auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * pw; };
  const auto py = [&](double y) { return kTop + (yr.hi - y) / (yr.hi - yr.lo) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" viewBox=\"0 0 {0} {1}\" "
      "font-family=\"sans-serif\" font-size=\"12\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">{3}</text>\n",
      kWidth, kHeight, kLeft + pw / 2, escape(chart.title));

  for (double t : ticks(xr)) {
    svg += fmt::format(
        "<line x1=\"{0:.2f}\" y1=\"{1}\" x2=\"{0:.2f}\" y2=\"{2}\" stroke=\"#e0e0e0\"/>"
        "<text x=\"{0:.2f}\" y=\"{3}\" text-anchor=\"middle\">{4:g}</text>\n",
        px(t), kTop, kTop + ph, kTop + ph + 16, t);
  }
  for (double t : ticks(yr)) {
    svg += fmt::format(
        "<line x1=\"{1}\" y1=\"{0:.2f}\" x2=\"{2}\" y2=\"{0:.2f}\" stroke=\"#e0e0e0\"/>"
        "<text x=\"{3}\" y=\"{4:.2f}\" text-anchor=\"end\">{5:g}</text>\n",
        py(t), kLeft, kLeft + pw, kLeft - 6, py(t) + 4, t);
  }
  svg += fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n",
                     kLeft, kTop, pw, ph);
  svg += fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", kLeft + pw / 2,
                     kHeight - 18, escape(chart.x_label));
  svg += fmt::format(
      "<text x=\"18\" y=\"{0}\" text-anchor=\"middle\" transform=\"rotate(-90 18 {0})\">{1}</text>\n",
      kTop + ph / 2, escape(chart.y_label));

  for (std::size_t k = 0; k < chart.series.size(); ++k) {
    const auto& s = chart.series[k];
    const char* color = kColors[k % std::size(kColors)];
    const std::size_t stride = std::max<std::size_t>(1, s.x.size() / kMaxPoints);
    std::string points;
    for (std::size_t i = 0; i < s.x.size(); i += stride) {
      points += fmt::format("{:.2f},{:.2f} ", px(s.x[i]), py(s.y[i]));
    }
    if ((s.x.size() - 1) % stride != 0) {
      points += fmt::format("{:.2f},{:.2f}", px(s.x.back()), py(s.y.back()));
    }
    svg += fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.4\" points=\"{}\"/>\n",
                       color, points);
    const double ly = kTop + 10 + 18 * static_cast<double>(k);
    svg += fmt::format(
        "<line x1=\"{0}\" y1=\"{1}\" x2=\"{2}\" y2=\"{1}\" stroke=\"{3}\" stroke-width=\"2\"/>"
        "<text x=\"{4}\" y=\"{5}\">{6}</text>\n",
        kLeft + pw + 10, ly, kLeft + pw + 30, color, kLeft + pw + 36, ly + 4, escape(s.label));
  }
  svg += "</svg>\n";
  return svg;
}

std::vector<RenderedFile> render_trace_charts(const SimTrace& trace, const std::string& stem) {
  if (trace.records.empty()) throw std::invalid_argument("cannot plot an empty trace");
  const auto column = [&](double TraceRecord::*field) {
    std::vector<double> v;
    v.reserve(trace.records.size());
    for (const auto& r : trace.records) v.push_back(r.*field);
    return v;
  };
  const auto t = column(&TraceRecord::t);
  const std::string suffix =
      trace.meta.terrain.empty() ? "" : fmt::format(" ({})", trace.meta.terrain);

  std::vector<std::pair<std::string, Chart>> charts;
  charts.push_back({"velocity",
                    Chart{"Reference vs measured velocity" + suffix, "t [s]", "V [m/s]",
                          {{"V_R ref", t, column(&TraceRecord::v_rd)},
                           {"V_R", t, column(&TraceRecord::v_r)},
                           {"V_L ref", t, column(&TraceRecord::v_ld)},
                           {"V_L", t, column(&TraceRecord::v_l)}}}});
  charts.push_back({"error", Chart{"Tracking error" + suffix, "t [s]", "e [m/s]",
                                   {{"e_R", t, column(&TraceRecord::e_r)},
                                    {"e_L", t, column(&TraceRecord::e_l)}}}});
  charts.push_back({"control", Chart{"Control signal" + suffix, "t [s]", "U",
                                     {{"U_R", t, column(&TraceRecord::u_r)},
                                      {"U_L", t, column(&TraceRecord::u_l)}}}});
  charts.push_back({"phi_norm", Chart{"Basis norm and adaptive estimate" + suffix, "t [s]", "",
                                      {{"|Phi_R|", t, column(&TraceRecord::phi_norm_r)},
                                       {"|Phi_L|", t, column(&TraceRecord::phi_norm_l)},
                                       {"phi_hat_R", t, column(&TraceRecord::phi_hat_r)},
                                       {"phi_hat_L", t, column(&TraceRecord::phi_hat_l)}}}});
  charts.push_back({"path", Chart{"XY path" + suffix, "x [m]", "y [m]",
                                  {{"path", column(&TraceRecord::x), column(&TraceRecord::y)}},
                                  true}});

  std::vector<RenderedFile> files;
  for (const auto& [kind, chart] : charts) {
    files.push_back({fmt::format("{}_{}.svg", stem, kind), render_svg(chart)});
  }
  return files;
}

std::vector<std::filesystem::path> plot_trace(const SimTrace& trace,
                                              const std::filesystem::path& out,
                                              const std::string& stem) {
  const auto files = render_trace_charts(trace, stem);
  std::filesystem::create_directories(out);
  std::vector<std::filesystem::path> written;
  for (const auto& f : files) {
    write_file_atomic(out / f.name, f.svg);
    written.push_back(out / f.name);
  }
  return written;
}

RenderedFile render_terrain_errors(const std::vector<SimTrace>& traces, const std::string& name) {
  if (traces.empty()) throw std::invalid_argument("no traces to plot");
  std::vector<std::string> order;
  std::map<std::string, std::vector<const SimTrace*>> by_terrain;
  for (const auto& tr : traces) {
    if (tr.records.empty()) throw std::invalid_argument("cannot plot an empty trace");
    const std::string key = tr.meta.terrain.empty() ? tr.meta.scenario_id : tr.meta.terrain;
    if (!by_terrain.contains(key)) order.push_back(key);
    by_terrain[key].push_back(&tr);
  }
  Chart chart{"Velocity tracking error by terrain", "t [s]", "|e| [m/s]", {}};
  for (const auto& key : order) {
    const auto& group = by_terrain[key];
    std::size_t n = group.front()->records.size();
    for (const auto* tr : group) n = std::min(n, tr->records.size());
    Series s{fmt::format("{} (n={})", key, group.size()), {}, {}};
    for (std::size_t i = 0; i < n; ++i) {
      double sum = 0.0;
      for (const auto* tr : group) sum += std::hypot(tr->records[i].e_r, tr->records[i].e_l);
      s.x.push_back(group.front()->records[i].t);
      s.y.push_back(sum / static_cast<double>(group.size()));
    }
    chart.series.push_back(std::move(s));
  }
  return {name, render_svg(chart)};
}

std::filesystem::path plot_terrain_errors(const std::vector<SimTrace>& traces,
                                          const std::filesystem::path& out,
                                          const std::string& name) {
  const RenderedFile file = render_terrain_errors(traces, name);
  std::filesystem::create_directories(out);
  write_file_atomic(out / file.name, file.svg);
  return out / file.name;
}

}  // namespace skidsim
