#include "emorec/heatmap.hpp"

#include <cmath>
#include <map>

#include "doctest.h"
#include "emorec/errors.hpp"
#include "testutil.hpp"

using namespace emorec;
using testutil::TempDir;

TEST_CASE("colormap endpoints, midpoint, and clamping") {
  auto gray = colormap_by_name("gray");
  CHECK(gray.at(0.0) == Rgb{0, 0, 0});
  CHECK(gray.at(1.0) == Rgb{255, 255, 255});
  CHECK(gray.at(0.5) == Rgb{128, 128, 128});
  CHECK(gray.at(-0.5) == gray.at(0.0));
  CHECK(gray.at(1.5) == gray.at(1.0));

  auto viridis = colormap_by_name("viridis");
  CHECK(viridis.at(0.0) == Rgb{68, 1, 84});    // lround of the first stop
  CHECK(viridis.at(1.0) == Rgb{253, 231, 37});  // and the last

  int prev = -1;
  for (double v = 0.0; v <= 1.0; v += 0.05) {
    int r = gray.at(v).r;
    CHECK(r >= prev);
    prev = r;
  }

  CHECK_THROWS_AS(colormap_by_name("plasma"), ConfigError);
  CHECK_NOTHROW(colormap_by_name("heat"));
}

TEST_CASE("checkerboard grid renders pixel for pixel") {
  HeatGrid grid;
  grid.rows = 2;
  grid.cols = 2;
  grid.cells = {{0, 0, 0.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 0.0}};
  RasterSpec spec;
  spec.colormap = colormap_by_name("gray");
  TempDir tmp("ppm");
  render_heatmap(grid, spec, tmp.file("c.ppm"));
  std::string expect = "P6\n2 2\n255\n";
  const char px[] = {0, 0, 0, '\xff', '\xff', '\xff',
                     '\xff', '\xff', '\xff', 0, 0, 0};
  expect.append(px, sizeof px);
  CHECK(testutil::read_file(tmp.file("c.ppm")) == expect);
}

TEST_CASE("missing cells paint as the zero color") {
  HeatGrid grid;
  grid.rows = 2;
  grid.cols = 3;
  RasterSpec spec;
  spec.colormap = colormap_by_name("gray");
  TempDir tmp("ppm0");
  render_heatmap(grid, spec, tmp.file("z.ppm"));
  auto bytes = testutil::read_file(tmp.file("z.ppm"));
  CHECK(bytes.size() == std::string("P6\n3 2\n255\n").size() + 18);
  for (std::size_t i = bytes.size() - 18; i < bytes.size(); ++i) {
    CHECK(bytes[i] == 0);
  }
}

TEST_CASE("empty grids and disordered cells are rejected") {
  RasterSpec spec;
  TempDir tmp("ppmbad");
  HeatGrid empty;
  CHECK_THROWS_AS(render_heatmap(empty, spec, tmp.file("x.ppm")),
                  ValidationError);

  HeatGrid disordered;
  disordered.rows = 2;
  disordered.cols = 2;
  disordered.cells = {{1, 0, 0.5}, {0, 0, 0.5}};
  CHECK_THROWS_AS(render_heatmap(disordered, spec, tmp.file("y.ppm")),
                  ValidationError);

  HeatGrid outside;
  outside.rows = 2;
  outside.cols = 2;
  outside.cells = {{5, 0, 0.5}};
  CHECK_THROWS_AS(render_heatmap(outside, spec, tmp.file("z.ppm")),
                  ValidationError);
}

TEST_CASE("the hottest cell maps to the last color unpooled") {
  auto ds = testutil::dense_random_dataset(3, 4, 0.8, 201);
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  const EmotionEntry* hottest = nullptr;
  for (const auto& e : m.entries()) {
    if (!hottest || e.normalized > hottest->normalized) hottest = &e;
  }
  REQUIRE(hottest != nullptr);
  REQUIRE(hottest->normalized == 1.0);

  RasterSpec spec;
  spec.colormap = colormap_by_name("gray");
  TempDir tmp("ppmmax");
  render_heatmap(m, spec, tmp.file("h.ppm"));
  auto bytes = testutil::read_file(tmp.file("h.ppm"));
  std::string header = "P6\n" + std::to_string(m.item_count()) + " " +
                       std::to_string(m.user_count()) + "\n255\n";
  CHECK(bytes.substr(0, header.size()) == header);
  std::size_t off = header.size() +
                    (static_cast<std::size_t>(hottest->user) * m.item_count() +
                     hottest->item) *
                        3;
  CHECK(static_cast<unsigned char>(bytes[off]) == 255);
  CHECK(static_cast<unsigned char>(bytes[off + 1]) == 255);
  CHECK(static_cast<unsigned char>(bytes[off + 2]) == 255);
}

TEST_CASE("mean pooling averages whole blocks, zeros included") {
  // diagonal first so every row and column is occupied and internal indices
  // match the construction order
  RatingDataset ds;
  emorec::Rng rng(203);
  for (int k = 0; k < 4; ++k) ds.add(k + 1, k + 1, 1.0 + rng.index(5));
  for (int u = 0; u < 4; ++u) {
    for (int j = 0; j < 4; ++j) {
      if (u != j && rng.unit() < 0.6) ds.add(u + 1, j + 1, 1.0 + rng.index(5));
    }
  }
  REQUIRE(ds.user_count() == 4);
  REQUIRE(ds.item_count() == 4);
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.max_width = 2;
  spec.max_height = 2;
  auto grid = grid_from_matrix(m, spec);
  CHECK(grid.rows == 2);
  CHECK(grid.cols == 2);

  auto dense = m.dense_normalized();
  for (const HeatCell& cell : grid.cells) {
    double sum = 0.0;
    for (int du = 0; du < 2; ++du) {
      for (int dj = 0; dj < 2; ++dj) {
        sum += dense[static_cast<std::size_t>(cell.row * 2 + du) * 4 +
                     (cell.col * 2 + dj)];
      }
    }
    CHECK(std::fabs(cell.value - sum / 4.0) <= 1e-9);
  }
}

TEST_CASE("max pooling takes the observed peak and skips empty blocks") {
  RatingDataset ds;
  ds.add(1, 10, 0.5);  // the emotional outlier
  ds.add(1, 20, 5.0);
  ds.add(2, 10, 5.0);
  ds.add(2, 20, 4.0);
  ds.add(3, 30, 3.0);
  ds.add(4, 30, 3.0);
  // items 10,20,30 -> cols {0,1},{2}; users 1..4 -> rows {0,1},{2,3}
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.max_width = 2;
  spec.max_height = 2;
  spec.pooling = Pooling::Max;
  auto grid = grid_from_matrix(m, spec);

  std::map<std::pair<int, int>, double> expect;
  for (const auto& e : m.entries()) {
    auto key = std::make_pair(e.user / 2, e.item / 2);
    auto it = expect.find(key);
    if (it == expect.end()) {
      expect[key] = e.normalized;
    } else {
      it->second = std::max(it->second, e.normalized);
    }
  }
  REQUIRE(grid.cells.size() == expect.size());
  for (const HeatCell& cell : grid.cells) {
    auto it = expect.find({cell.row, cell.col});
    REQUIRE(it != expect.end());
    CHECK(cell.value == it->second);
  }
  // users 3,4 never touched items 10,20, so block (1,0) must be absent
  CHECK(expect.count({1, 0}) == 0);
}

TEST_CASE("rendering is byte deterministic") {
  auto ds = testutil::synthetic_dataset(15, 12, 6, 207);
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.max_width = 8;
  spec.max_height = 8;
  TempDir tmp("ppmdet");
  render_heatmap(m, spec, tmp.file("a.ppm"));
  render_heatmap(m, spec, tmp.file("b.ppm"));
  CHECK(testutil::read_file(tmp.file("a.ppm")) ==
        testutil::read_file(tmp.file("b.ppm")));
}

TEST_CASE("separating observed cells lifts them off the floor") {
  RatingDataset ds;
  ds.add(1, 7, 0.5);
  ds.add(2, 7, 5.0);  // normalized 0 -> would vanish without separation
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.separate_observed = true;
  auto grid = grid_from_matrix(m, spec);
  REQUIRE(grid.cells.size() == 2);
  for (const HeatCell& cell : grid.cells) {
    CHECK(cell.value >= 0.05);
  }
  RasterSpec plain;
  auto flat = grid_from_matrix(m, plain);
  bool saw_zero = false;
  for (const HeatCell& cell : flat.cells) saw_zero |= cell.value == 0.0;
  CHECK(saw_zero);
}

TEST_CASE("user sort puts the busiest raters on top") {
  RatingDataset ds;
  ds.add(1, 50, 3.0);                       // user index 0: 1 rating
  ds.add(2, 50, 3.0);                       // user index 1: 3 ratings
  ds.add(2, 60, 4.0);
  ds.add(2, 70, 2.0);
  ds.add(3, 50, 3.0);                       // user index 2: 2 ratings
  ds.add(3, 60, 5.0);
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.sort_users_by_count = true;
  auto grid = grid_from_matrix(m, spec);
  // item 70 (col 2) belongs to user 2 alone, who sorts into row 0
  bool found = false;
  for (const HeatCell& cell : grid.cells) {
    if (cell.col == 2) {
      CHECK(cell.row == 0);
      found = true;
    }
  }
  CHECK(found);

  auto unsorted = grid_from_matrix(m, RasterSpec{});
  for (const HeatCell& cell : unsorted.cells) {
    if (cell.col == 2) CHECK(cell.row == 1);
  }
}

TEST_CASE("raster bounds must be positive") {
  auto ds = testutil::synthetic_dataset(4, 4, 2, 209);
  auto m = build_emotion_matrix(ds, classify(compute_item_stats(ds)));
  RasterSpec spec;
  spec.max_width = 0;
  CHECK_THROWS_AS(grid_from_matrix(m, spec), ConfigError);
}
