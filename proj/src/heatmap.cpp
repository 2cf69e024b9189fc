#include "emorec/heatmap.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "emorec/csv.hpp"
#include "emorec/errors.hpp"

namespace emorec {

Rgb Colormap::at(double value) const {
  if (stops.empty()) throw ConfigError("colormap '" + name + "' has no stops");
  double v = std::clamp(value, 0.0, 1.0);
  double pos = v * static_cast<double>(stops.size() - 1);
  auto lo = static_cast<std::size_t>(pos);
  if (lo >= stops.size() - 1) {
    const auto& s = stops.back();
    return {static_cast<std::uint8_t>(std::lround(s[0] * 255.0)),
            static_cast<std::uint8_t>(std::lround(s[1] * 255.0)),
            static_cast<std::uint8_t>(std::lround(s[2] * 255.0))};
  }
  double frac = pos - static_cast<double>(lo);
  const auto& a = stops[lo];
  const auto& b = stops[lo + 1];
  auto mix = [&](int c) {
    return static_cast<std::uint8_t>(
        std::lround((a[c] + (b[c] - a[c]) * frac) * 255.0));
  };
  return {mix(0), mix(1), mix(2)};
}

Colormap colormap_by_name(const std::string& name) {
  if (name == "viridis") {
    return {name,
            {{0.267004, 0.004874, 0.329415},
             {0.282623, 0.140926, 0.457517},
             {0.253935, 0.265254, 0.529983},
             {0.206756, 0.371758, 0.553117},
             {0.163625, 0.471133, 0.558148},
             {0.127568, 0.566949, 0.550556},
             {0.134692, 0.658636, 0.517649},
             {0.266941, 0.748751, 0.440573},
             {0.477504, 0.821444, 0.318195},
             {0.741388, 0.873449, 0.149561},
             {0.993248, 0.906157, 0.143936}}};
  }
  if (name == "heat") {
    return {name,
            {{0.0, 0.0, 0.0}, {1.0, 0.0, 0.0}, {1.0, 1.0, 0.0},
             {1.0, 1.0, 1.0}}};
  }
  if (name == "gray") {
    return {name, {{0.0, 0.0, 0.0}, {1.0, 1.0, 1.0}}};
  }
  throw ConfigError("unknown colormap: " + name);
}

HeatGrid grid_from_matrix(const EmotionMatrix& matrix, const RasterSpec& spec) {
  if (spec.max_width < 1 || spec.max_height < 1) {
    throw ConfigError("raster bounds must be >= 1");
  }
  int users = matrix.user_count();
  int items = matrix.item_count();
  HeatGrid grid;
  grid.rows = std::min(users, spec.max_height);
  grid.cols = std::min(items, spec.max_width);
  if (users == 0 || items == 0 || grid.rows == 0 || grid.cols == 0) {
    grid.rows = std::max(grid.rows, 0);
    grid.cols = std::max(grid.cols, 0);
    return grid;
  }

  // Optional reorder: busiest users first, ties by original index.
  std::vector<int> row_of(users);
  if (spec.sort_users_by_count) {
    std::vector<std::int64_t> counts(users, 0);
    for (const EmotionEntry& e : matrix.entries()) ++counts[e.user];
    std::vector<int> order(users);
    for (int u = 0; u < users; ++u) order[u] = u;
    std::sort(order.begin(), order.end(), [&](int a, int b) {
      return counts[a] != counts[b] ? counts[a] > counts[b] : a < b;
    });
    for (int pos = 0; pos < users; ++pos) row_of[order[pos]] = pos;
  } else {
    for (int u = 0; u < users; ++u) row_of[u] = u;
  }

  auto bucket_row = [&](int u) {
    return static_cast<int>(static_cast<std::int64_t>(u) * grid.rows / users);
  };
  auto bucket_col = [&](int j) {
    return static_cast<int>(static_cast<std::int64_t>(j) * grid.cols / items);
  };

  // Full block sizes; the mean counts missing cells as zeros.
  std::vector<std::int64_t> rows_in(grid.rows, 0);
  std::vector<std::int64_t> cols_in(grid.cols, 0);
  for (int u = 0; u < users; ++u) ++rows_in[bucket_row(u)];
  for (int j = 0; j < items; ++j) ++cols_in[bucket_col(j)];

  std::size_t n = static_cast<std::size_t>(grid.rows) * grid.cols;
  std::vector<double> acc(n, 0.0);
  std::vector<char> touched(n, 0);
  for (const EmotionEntry& e : matrix.entries()) {
    double v = e.normalized;
    if (spec.separate_observed) v = 0.05 + 0.95 * v;
    std::size_t cell =
        static_cast<std::size_t>(bucket_row(row_of[e.user])) * grid.cols +
        bucket_col(e.item);
    if (spec.pooling == Pooling::Max) {
      acc[cell] = touched[cell] ? std::max(acc[cell], v) : v;
    } else {
      acc[cell] += v;
    }
    touched[cell] = 1;
  }

  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      std::size_t cell = static_cast<std::size_t>(r) * grid.cols + c;
      if (!touched[cell]) continue;
      double v = acc[cell];
      if (spec.pooling == Pooling::Mean) {
        v /= static_cast<double>(rows_in[r] * cols_in[c]);
      }
      grid.cells.push_back({r, c, v});
    }
  }
  return grid;
}

void render_heatmap(const HeatGrid& grid, const RasterSpec& spec,
                    const std::string& path) {
  if (grid.rows < 1 || grid.cols < 1) {
    throw ValidationError("cannot render an empty grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << "P6\n" << grid.cols << ' ' << grid.rows << "\n255\n";

  std::vector<unsigned char> row_bytes(static_cast<std::size_t>(grid.cols) * 3);
  Rgb zero = spec.colormap.at(0.0);
  auto cell = grid.cells.begin();
  for (int r = 0; r < grid.rows; ++r) {
    for (int c = 0; c < grid.cols; ++c) {
      Rgb px = zero;
      if (cell != grid.cells.end() && cell->row == r && cell->col == c) {
        px = spec.colormap.at(cell->value);
        ++cell;
      }
      std::size_t off = static_cast<std::size_t>(c) * 3;
      row_bytes[off] = px.r;
      row_bytes[off + 1] = px.g;
      row_bytes[off + 2] = px.b;
    }
    out.write(reinterpret_cast<const char*>(row_bytes.data()),
              static_cast<std::streamsize>(row_bytes.size()));
  }
  if (cell != grid.cells.end()) {
    throw ValidationError("grid cells out of order or out of bounds");
  }
  if (!out) throw IoError("short write to " + path);
}

void render_heatmap(const EmotionMatrix& matrix, const RasterSpec& spec,
                    const std::string& path) {
  render_heatmap(grid_from_matrix(matrix, spec), spec, path);
}

void write_comparison_svg(std::span<const EvalReport> reports,
                          const std::string& path) {
  const char* palette[] = {"#4c78a8", "#f58518", "#54a24b",
                           "#e45756", "#72b7b2", "#b279a2"};
  constexpr int kPalette = 6;
  constexpr double bar_w = 56.0;
  constexpr double gap = 18.0;
  constexpr double group_gap = 60.0;
  constexpr double chart_h = 220.0;
  constexpr double top = 40.0;
  constexpr double bottom = 58.0;
  constexpr double left = 32.0;

  auto n = static_cast<double>(reports.size());
  double group_w = n > 0 ? n * bar_w + (n - 1) * gap : bar_w;
  double width = left * 2 + group_w * 2 + group_gap;
  double height = top + chart_h + bottom;

  double max_mae = 0.0, max_dme = 0.0;
  for (const EvalReport& r : reports) {
    max_mae = std::max(max_mae, r.mae);
    max_dme = std::max(max_dme, r.dme);
  }
  if (max_mae <= 0.0) max_mae = 1.0;
  if (max_dme <= 0.0) max_dme = 1.0;

  std::string svg;
  auto num = [](double v) { return format_fixed(v, 1); };
  svg += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + num(width) +
         "\" height=\"" + num(height) + "\" viewBox=\"0 0 " + num(width) + " " +
         num(height) + "\">\n";
  svg += "<rect width=\"" + num(width) + "\" height=\"" + num(height) +
         "\" fill=\"#ffffff\"/>\n";

  auto group = [&](const std::string& label, double origin_x, double max_value,
                   auto metric) {
    svg += "<text x=\"" + num(origin_x + group_w / 2) + "\" y=\"24\" "
           "text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"15\" "
           "fill=\"#222222\">" + label + "</text>\n";
    double baseline = top + chart_h;
    svg += "<line x1=\"" + num(origin_x - 6) + "\" y1=\"" + num(baseline) +
           "\" x2=\"" + num(origin_x + group_w + 6) + "\" y2=\"" +
           num(baseline) + "\" stroke=\"#888888\"/>\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
      const EvalReport& r = reports[i];
      double value = metric(r);
      double h = std::clamp(value / max_value, 0.0, 1.0) * chart_h;
      double x = origin_x + static_cast<double>(i) * (bar_w + gap);
      double y = baseline - h;
      svg += "<rect x=\"" + num(x) + "\" y=\"" + num(y) + "\" width=\"" +
             num(bar_w) + "\" height=\"" + num(h) + "\" fill=\"" +
             palette[i % kPalette] + "\"/>\n";
      svg += "<text x=\"" + num(x + bar_w / 2) + "\" y=\"" + num(y - 6) +
             "\" text-anchor=\"middle\" font-family=\"sans-serif\" "
             "font-size=\"12\" fill=\"#222222\">" + format_fixed(value, 3) +
             "</text>\n";
      std::string tag = r.algorithm;
      if (r.algorithm == "emf") tag += " λ=" + format_double(r.lambda);
      svg += "<text x=\"" + num(x + bar_w / 2) + "\" y=\"" +
             num(baseline + 18) + "\" text-anchor=\"middle\" "
             "font-family=\"sans-serif\" font-size=\"12\" fill=\"#222222\">" +
             tag + "</text>\n";
    }
  };
  group("MAE", left, max_mae, [](const EvalReport& r) { return r.mae; });
  group("Matthew effect", left + group_w + group_gap, max_dme,
        [](const EvalReport& r) { return r.dme; });
  svg += "</svg>\n";

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path);
  out << svg;
  if (!out) throw IoError("short write to " + path);
}

void emit_comparison_plot_data(std::span<const EvalReport> reports,
                               const std::string& svg_path,
                               const std::string& csv_path) {
  write_comparison_svg(reports, svg_path);
  write_reports_csv(reports, csv_path);
}

}  // namespace emorec
