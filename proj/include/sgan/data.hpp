#pragma once

#include "sgan/tensor.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

namespace sgan {

/// Rows of features with integer labels; `style` holds the ground-truth style
/// factor for synthetic data and is empty otherwise.
struct LabeledSet {
  Matrix x;
  std::vector<int> y;
  std::vector<Scalar> style;
  Index image_rows = 0;
  Index image_cols = 0;

  Index size() const { return x.rows(); }
};

/// Semi-supervised split. Labels of the unlabeled pool are retained separately
/// so the golden classifier can be trained on the full training set; the
/// trainer never reads them.
struct DatasetSplit {
  Matrix unlabeled_x;
  std::vector<int> unlabeled_hidden_y;
  Matrix labeled_x;
  std::vector<int> labeled_y;
  Matrix test_x;
  std::vector<int> test_y;
  std::vector<Scalar> test_style;
  Index x_dim = 0;
  Index classes = 0;
  Index image_rows = 0;
  Index image_cols = 0;

  // Labeled rows followed by unlabeled rows with their hidden labels.
  LabeledSet full_training_set() const;
};

struct RingsConfig {
  int classes = 4;
  Index train_samples = 4016;
  Index test_samples = 1000;
  Scalar noise = 0.02;
  std::uint64_t seed = 1;
};

struct RingsSamples {
  LabeledSet train;
  LabeledSet test;
};

/// Raw stratified rings samples with their style factors.
RingsSamples sample_rings_sets(const RingsConfig& config);

/// Class k lies on the ray at angle 2*pi*k/C; radius 0.5 + s with s ~ U(0, 1);
/// isotropic Gaussian noise of std `noise` per coordinate. Both splits are
/// stratified; the whole training set lands in the unlabeled pool.
DatasetSplit make_rings_dataset(const RingsConfig& config);

/// Noise-free point of class k at style s.
RowVector rings_point(int k, Scalar s, int classes);
/// Inverse of rings_point for a noise-free x on ray k.
Scalar rings_style(const RowVector& x, int k, int classes);

/// Picks n / C labeled rows per class uniformly without replacement from the
/// unlabeled pool; the rest stays unlabeled. Throws std::invalid_argument when
/// n is not divisible by C or a class has too few rows.
DatasetSplit split_labels(const DatasetSplit& dataset, Index n, std::uint64_t seed);

/// Parses an IDX image file (magic 0x00000803, u8 [n, rows, cols]) and an IDX
/// label file (magic 0x00000801, u8 [n]). Pixels are scaled by 1/255.
LabeledSet load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    std::optional<Index> max_rows = std::nullopt);

/// Train and test fragments assembled into a split with everything unlabeled.
DatasetSplit make_idx_dataset(const LabeledSet& train, const LabeledSet& test, Index classes);

/// CSV with header x0,x1,y,s.
void write_rings_csv(std::ostream& out, const Matrix& x, const std::vector<int>& y, const std::vector<Scalar>& s);

}  // namespace sgan
