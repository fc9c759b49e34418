#pragma once

// Static SVG line charts of recorded traces.

#include <filesystem>
#include <string>
#include <vector>

#include "skidsim/engine.hpp"

namespace skidsim {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct Chart {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<Series> series;
  bool equal_aspect = false;  // same scale on both axes (XY path)
};

// Throws std::invalid_argument for an empty chart or non-finite data.
std::string render_svg(const Chart& chart);

struct RenderedFile {
  std::string name;
  std::string svg;
};

// The five per-trace charts, rendered but not written: <stem>_velocity.svg,
// _error, _control, _phi_norm, _path.
std::vector<RenderedFile> render_trace_charts(const SimTrace& trace, const std::string& stem);

// Five charts per trace: velocity, error, control, phi_norm, path. Written to
// <out>/<stem>_<kind>.svg. Everything is rendered before the first file is
// written, so a bad trace leaves no files behind. Returns the paths written.
std::vector<std::filesystem::path> plot_trace(const SimTrace& trace,
                                              const std::filesystem::path& out,
                                              const std::string& stem = "trace");

// Overlaid |e| per terrain; seeds of the same terrain are averaged on their
// common time grid. Returns the path written.
RenderedFile render_terrain_errors(const std::vector<SimTrace>& traces,
                                   const std::string& name = "error_by_terrain.svg");

std::filesystem::path plot_terrain_errors(const std::vector<SimTrace>& traces,
                                          const std::filesystem::path& out,
                                          const std::string& name = "error_by_terrain.svg");

}  // namespace skidsim
