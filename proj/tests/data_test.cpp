#include "sgan/data.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

namespace sgan {
namespace {

namespace fs = std::filesystem;

void put_be32(std::ofstream& out, std::uint32_t v) {
  const unsigned char b[4] = {static_cast<unsigned char>(v >> 24), static_cast<unsigned char>(v >> 16),
                              static_cast<unsigned char>(v >> 8), static_cast<unsigned char>(v)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void write_idx_images(const fs::path& path, std::uint32_t magic, std::uint32_t n, std::uint32_t rows,
                      std::uint32_t cols, const std::vector<unsigned char>& pixels) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, magic);
  put_be32(out, n);
  put_be32(out, rows);
  put_be32(out, cols);
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

void write_idx_labels(const fs::path& path, std::uint32_t n, const std::vector<unsigned char>& labels) {
  std::ofstream out(path, std::ios::binary);
  put_be32(out, 0x00000801);
  put_be32(out, n);
  out.write(reinterpret_cast<const char*>(labels.data()), static_cast<std::streamsize>(labels.size()));
}

fs::path temp_dir(const std::string& name) {
  const fs::path dir = fs::path(::testing::TempDir()) / ("sgan_data_" + name);
  fs::create_directories(dir);
  return dir;
}

TEST(Rings, ConstructionExamples) {
  const RowVector a = rings_point(0, 0.0, 4);
  EXPECT_NEAR(a(0), 0.5, 1e-15);
  EXPECT_NEAR(a(1), 0.0, 1e-15);
  const RowVector b = rings_point(1, 1.0, 4);
  EXPECT_NEAR(b(0), 0.0, 1e-15);
  EXPECT_NEAR(b(1), 1.5, 1e-15);
}

TEST(Rings, NoiseFreePointsLieOnTheirRay) {
  RingsConfig cfg;
  cfg.noise = 0.0;
  cfg.train_samples = 400;
  cfg.test_samples = 200;
  const RingsSamples s = sample_rings_sets(cfg);
  for (Index r = 0; r < s.test.size(); ++r) {
    const int k = s.test.y[static_cast<std::size_t>(r)];
    const Scalar theta = 2 * std::numbers::pi * k / 4;
    const RowVector x = s.test.x.row(r);
    // Oracle: polar form of the row.
    EXPECT_NEAR(x.norm(), 0.5 + s.test.style[static_cast<std::size_t>(r)], 1e-12);
    EXPECT_NEAR(x(0) * std::sin(theta) - x(1) * std::cos(theta), 0.0, 1e-12);
    EXPECT_GE(x(0) * std::cos(theta) + x(1) * std::sin(theta), 0.0);
    EXPECT_NEAR(rings_style(x, k, 4), s.test.style[static_cast<std::size_t>(r)], 1e-12);
  }
}

TEST(Rings, ClassCountsBalancedAcrossSplits) {
  RingsConfig cfg;
  cfg.train_samples = 4016;
  cfg.test_samples = 1000;
  const DatasetSplit d = make_rings_dataset(cfg);
  std::vector<int> train(4, 0), test(4, 0);
  for (int y : d.unlabeled_hidden_y) ++train[static_cast<std::size_t>(y)];
  for (int y : d.test_y) ++test[static_cast<std::size_t>(y)];
  for (int k = 0; k < 4; ++k) {
    EXPECT_EQ(train[static_cast<std::size_t>(k)], 1004);
    EXPECT_EQ(test[static_cast<std::size_t>(k)], 250);
  }
  EXPECT_EQ(d.x_dim, 2);
  EXPECT_EQ(d.classes, 4);
  EXPECT_TRUE(d.unlabeled_x.allFinite());
}

TEST(Rings, DeterministicInSeed) {
  RingsConfig cfg;
  cfg.train_samples = 100;
  cfg.test_samples = 20;
  EXPECT_EQ(make_rings_dataset(cfg).unlabeled_x, make_rings_dataset(cfg).unlabeled_x);
  RingsConfig other = cfg;
  other.seed = 2;
  EXPECT_NE(make_rings_dataset(cfg).unlabeled_x, make_rings_dataset(other).unlabeled_x);
}

TEST(Rings, RejectsInvalidConfig) {
  RingsConfig cfg;
  cfg.classes = 1;
  EXPECT_THROW(make_rings_dataset(cfg), std::invalid_argument);
  cfg.classes = 4;
  cfg.noise = -0.1;
  EXPECT_THROW(make_rings_dataset(cfg), std::invalid_argument);
}

TEST(Rings, CsvExportHeader) {
  std::ostringstream out;
  Matrix x(1, 2);
  x << 0.5, 0.0;
  write_rings_csv(out, x, {0}, {0.0});
  EXPECT_EQ(out.str().substr(0, 11), "x0,x1,y,s\n0");
}

DatasetSplit ten_class_rings() {
  RingsConfig cfg;
  cfg.classes = 10;
  cfg.train_samples = 200;
  cfg.test_samples = 10;
  return make_rings_dataset(cfg);
}

TEST(SplitLabels, PerClassCounts) {
  const DatasetSplit base = ten_class_rings();
  for (auto [n, per_class] : {std::pair<Index, int>{20, 2}, {50, 5}}) {
    const DatasetSplit d = split_labels(base, n, 7);
    EXPECT_EQ(static_cast<Index>(d.labeled_y.size()), n);
    std::vector<int> counts(10, 0);
    for (int y : d.labeled_y) ++counts[static_cast<std::size_t>(y)];
    for (int c : counts) EXPECT_EQ(c, per_class);
    EXPECT_EQ(d.unlabeled_x.rows(), 200 - n);
  }
}

TEST(SplitLabels, RejectsIndivisibleAndInsufficient) {
  const DatasetSplit base = ten_class_rings();
  EXPECT_THROW(split_labels(base, 15, 1), std::invalid_argument);
  EXPECT_THROW(split_labels(base, 250, 1), std::invalid_argument);
}

TEST(SplitLabels, PreservesMultisetUnion) {
  const DatasetSplit base = ten_class_rings();
  const DatasetSplit d = split_labels(base, 30, 3);
  auto rows_of = [](const Matrix& x, const std::vector<int>& y) {
    std::vector<std::tuple<Scalar, Scalar, int>> rows;
    for (Index r = 0; r < x.rows(); ++r) rows.emplace_back(x(r, 0), x(r, 1), y[static_cast<std::size_t>(r)]);
    std::sort(rows.begin(), rows.end());
    return rows;
  };
  const LabeledSet all = d.full_training_set();
  EXPECT_EQ(rows_of(all.x, all.y), rows_of(base.unlabeled_x, base.unlabeled_hidden_y));
  EXPECT_EQ(d.test_x, base.test_x);
}

TEST(SplitLabels, DeterministicInSeed) {
  const DatasetSplit base = ten_class_rings();
  EXPECT_EQ(split_labels(base, 20, 5).labeled_x, split_labels(base, 20, 5).labeled_x);
  EXPECT_NE(split_labels(base, 20, 5).labeled_x, split_labels(base, 20, 6).labeled_x);
}

TEST(Idx, CraftedImageScaling) {
  const fs::path dir = temp_dir("crafted");
  write_idx_images(dir / "img", 0x00000803, 1, 2, 2, {0, 128, 255, 64});
  write_idx_labels(dir / "lbl", 1, {3});
  const LabeledSet s = load_idx(dir / "img", dir / "lbl");
  ASSERT_EQ(s.x.rows(), 1);
  ASSERT_EQ(s.x.cols(), 4);
  EXPECT_DOUBLE_EQ(s.x(0, 0), 0.0);
  EXPECT_NEAR(s.x(0, 1), 0.50196, 1e-5);
  EXPECT_DOUBLE_EQ(s.x(0, 2), 1.0);
  EXPECT_NEAR(s.x(0, 3), 0.25098, 1e-5);
  EXPECT_EQ(s.y[0], 3);
  EXPECT_EQ(s.image_rows, 2);
  EXPECT_EQ(s.image_cols, 2);
}

TEST(Idx, WrongMagicNamesBothValues) {
  const fs::path dir = temp_dir("magic");
  write_idx_images(dir / "img", 0x00000802, 1, 2, 2, {0, 0, 0, 0});
  write_idx_labels(dir / "lbl", 1, {0});
  try {
    load_idx(dir / "img", dir / "lbl");
    FAIL() << "expected an error";
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    EXPECT_NE(msg.find("0x00000803"), std::string::npos) << msg;
    EXPECT_NE(msg.find("0x00000802"), std::string::npos) << msg;
  }
}

TEST(Idx, CountMismatchIsAnError) {
  const fs::path dir = temp_dir("count");
  write_idx_images(dir / "img", 0x00000803, 2, 1, 1, {1, 2});
  write_idx_labels(dir / "lbl", 3, {0, 1, 2});
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), std::runtime_error);
}

TEST(Idx, TruncatedPixelsAreAnError) {
  const fs::path dir = temp_dir("trunc");
  write_idx_images(dir / "img", 0x00000803, 2, 2, 2, {1, 2, 3});
  write_idx_labels(dir / "lbl", 2, {0, 1});
  EXPECT_THROW(load_idx(dir / "img", dir / "lbl"), std::runtime_error);
}

TEST(Idx, MaxRowsLimitsTheLoad) {
  const fs::path dir = temp_dir("max");
  write_idx_images(dir / "img", 0x00000803, 3, 1, 2, {0, 255, 255, 0, 51, 102});
  write_idx_labels(dir / "lbl", 3, {0, 1, 0});
  const LabeledSet s = load_idx(dir / "img", dir / "lbl", 2);
  EXPECT_EQ(s.size(), 2);
  EXPECT_EQ(s.y, (std::vector<int>{0, 1}));
}

}  // namespace
}  // namespace sgan
