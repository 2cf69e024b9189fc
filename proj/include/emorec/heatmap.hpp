#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "emorec/emotion.hpp"
#include "emorec/evaluation.hpp"

namespace emorec {

struct Rgb {
  std::uint8_t r, g, b;
  bool operator==(const Rgb&) const = default;
};

// Piecewise-linear color lookup over fixed control points. Input is clamped
// to [0, 1]; 0 maps to the first control color, 1 to the last.
struct Colormap {
  std::string name;
  std::vector<std::array<double, 3>> stops;  // components in [0, 1]

  Rgb at(double value) const;
};

// Built-ins: "viridis" (default), "heat", "gray". Unknown name -> ConfigError.
Colormap colormap_by_name(const std::string& name);

enum class Pooling { Mean, Max };

struct RasterSpec {
  int max_width = 1024;
  int max_height = 1024;
  Colormap colormap = colormap_by_name("viridis");
  Pooling pooling = Pooling::Mean;
  // Remap observed values into [0.05, 1] so the observed minimum separates
  // from missing cells. Off by default.
  bool separate_observed = false;
  bool sort_users_by_count = false;
};

struct HeatCell {
  std::int32_t row;
  std::int32_t col;
  double value;  // in [0, 1]
};

// Sparse value grid; absent cells are 0. Cells must be sorted by (row, col).
struct HeatGrid {
  int rows = 0;
  int cols = 0;
  std::vector<HeatCell> cells;
};

HeatGrid grid_from_matrix(const EmotionMatrix& matrix, const RasterSpec& spec);

// Binary P6 pixmap, one pixel per cell bucket. Rows are users, columns are
// items; oversized grids are pooled down to the raster bounds.
void render_heatmap(const HeatGrid& grid, const RasterSpec& spec,
                    const std::string& path);
void render_heatmap(const EmotionMatrix& matrix, const RasterSpec& spec,
                    const std::string& path);

// Bar chart (one bar per algorithm per metric, numeric labels) plus the
// matching comparison CSV. Byte-deterministic for identical reports.
void emit_comparison_plot_data(std::span<const EvalReport> reports,
                               const std::string& svg_path,
                               const std::string& csv_path);

void write_comparison_svg(std::span<const EvalReport> reports,
                          const std::string& path);

}  // namespace emorec
