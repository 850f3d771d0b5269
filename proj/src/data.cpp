#include "sgan/data.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace sgan {

LabeledSet DatasetSplit::full_training_set() const {
  LabeledSet out;
  out.x.resize(labeled_x.rows() + unlabeled_x.rows(), x_dim);
  out.x << labeled_x, unlabeled_x;
  out.y = labeled_y;
  out.y.insert(out.y.end(), unlabeled_hidden_y.begin(), unlabeled_hidden_y.end());
  out.image_rows = image_rows;
  out.image_cols = image_cols;
  return out;
}

RowVector rings_point(int k, Scalar s, int classes) {
  const Scalar theta = 2.0 * std::numbers::pi * k / classes;
  RowVector x(2);
  x << (0.5 + s) * std::cos(theta), (0.5 + s) * std::sin(theta);
  return x;
}

Scalar rings_style(const RowVector& x, int k, int classes) {
  const Scalar theta = 2.0 * std::numbers::pi * k / classes;
  return x(0) * std::cos(theta) + x(1) * std::sin(theta) - 0.5;
}

namespace {

LabeledSet sample_rings(const RingsConfig& config, Index count, std::mt19937_64& rng) {
  const int c = config.classes;
  std::uniform_real_distribution<Scalar> style(0.0, 1.0);
  std::normal_distribution<Scalar> noise(0.0, 1.0);
  LabeledSet out;
  out.x.resize(count, 2);
  out.y.resize(static_cast<std::size_t>(count));
  out.style.resize(static_cast<std::size_t>(count));
  Index row = 0;
  for (int k = 0; k < c; ++k) {
    const Index per_class = count / c + (k < count % c ? 1 : 0);
    for (Index i = 0; i < per_class; ++i, ++row) {
      const Scalar s = style(rng);
      RowVector x = rings_point(k, s, c);
      for (Index d = 0; d < 2; ++d) x(d) += config.noise * noise(rng);
      out.x.row(row) = x;
      out.y[static_cast<std::size_t>(row)] = k;
      out.style[static_cast<std::size_t>(row)] = s;
    }
  }
  std::vector<Index> order(static_cast<std::size_t>(count));
  for (Index i = 0; i < count; ++i) order[static_cast<std::size_t>(i)] = i;
  std::shuffle(order.begin(), order.end(), rng);
  LabeledSet shuffled;
  shuffled.x.resize(count, 2);
  for (Index i = 0; i < count; ++i) {
    const auto src = order[static_cast<std::size_t>(i)];
    shuffled.x.row(i) = out.x.row(src);
    shuffled.y.push_back(out.y[static_cast<std::size_t>(src)]);
    shuffled.style.push_back(out.style[static_cast<std::size_t>(src)]);
  }
  return shuffled;
}

}  // namespace

RingsSamples sample_rings_sets(const RingsConfig& config) {
  if (config.classes < 2) throw std::invalid_argument("rings: need at least 2 classes");
  if (!(config.noise >= 0)) throw std::invalid_argument("rings: noise must be >= 0");
  std::mt19937_64 rng(config.seed);
  RingsSamples out;
  out.train = sample_rings(config, config.train_samples, rng);
  out.test = sample_rings(config, config.test_samples, rng);
  return out;
}

DatasetSplit make_rings_dataset(const RingsConfig& config) {
  auto [train, test] = sample_rings_sets(config);
  DatasetSplit split;
  split.unlabeled_x = std::move(train.x);
  split.unlabeled_hidden_y = std::move(train.y);
  split.labeled_x.resize(0, 2);
  split.test_x = std::move(test.x);
  split.test_y = std::move(test.y);
  split.test_style = std::move(test.style);
  split.x_dim = 2;
  split.classes = config.classes;
  return split;
}

DatasetSplit split_labels(const DatasetSplit& dataset, Index n, std::uint64_t seed) {
  const Index c = dataset.classes;
  if (n < 0 || c <= 0 || n % c != 0) {
    throw std::invalid_argument("split_labels: n=" + std::to_string(n) + " is not divisible by " + std::to_string(c) +
                                " classes");
  }
  const Index per_class = n / c;
  std::vector<std::vector<Index>> by_class(static_cast<std::size_t>(c));
  for (Index r = 0; r < dataset.unlabeled_x.rows(); ++r) {
    by_class[static_cast<std::size_t>(dataset.unlabeled_hidden_y[static_cast<std::size_t>(r)])].push_back(r);
  }
  std::mt19937_64 rng(seed);
  std::vector<bool> take(static_cast<std::size_t>(dataset.unlabeled_x.rows()), false);
  for (Index k = 0; k < c; ++k) {
    auto& rows = by_class[static_cast<std::size_t>(k)];
    if (static_cast<Index>(rows.size()) < per_class) {
      throw std::invalid_argument("split_labels: class " + std::to_string(k) + " has " + std::to_string(rows.size()) +
                                  " rows, " + std::to_string(per_class) + " needed");
    }
    // Partial Fisher-Yates: the first per_class entries are a uniform sample.
    for (Index i = 0; i < per_class; ++i) {
      std::uniform_int_distribution<std::size_t> pick(static_cast<std::size_t>(i), rows.size() - 1);
      std::swap(rows[static_cast<std::size_t>(i)], rows[pick(rng)]);
      take[static_cast<std::size_t>(rows[static_cast<std::size_t>(i)])] = true;
    }
  }

  DatasetSplit out = dataset;
  const Index existing = dataset.labeled_x.rows();
  out.labeled_x.resize(existing + n, dataset.x_dim);
  out.labeled_x.topRows(existing) = dataset.labeled_x;
  out.unlabeled_x.resize(dataset.unlabeled_x.rows() - n, dataset.x_dim);
  out.unlabeled_hidden_y.clear();
  Index li = existing, ui = 0;
  // Labeled rows grouped by class in sampled order.
  for (Index k = 0; k < c; ++k) {
    for (Index i = 0; i < per_class; ++i) {
      const Index r = by_class[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
      out.labeled_x.row(li++) = dataset.unlabeled_x.row(r);
      out.labeled_y.push_back(static_cast<int>(k));
    }
  }
  for (Index r = 0; r < dataset.unlabeled_x.rows(); ++r) {
    if (take[static_cast<std::size_t>(r)]) continue;
    out.unlabeled_x.row(ui++) = dataset.unlabeled_x.row(r);
    out.unlabeled_hidden_y.push_back(dataset.unlabeled_hidden_y[static_cast<std::size_t>(r)]);
  }
  return out;
}

namespace {

std::uint32_t read_be32(std::istream& in, const std::filesystem::path& path) {
  std::array<unsigned char, 4> b{};
  if (!in.read(reinterpret_cast<char*>(b.data()), 4)) {
    throw std::runtime_error("idx: truncated header in " + path.string());
  }
  return (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) | (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
}

std::ifstream open_idx(const std::filesystem::path& path, std::uint32_t expected_magic) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("idx: cannot open " + path.string());
  const std::uint32_t magic = read_be32(in, path);
  if (magic != expected_magic) {
    std::ostringstream msg;
    msg << "idx: " << path.string() << ": expected magic 0x" << std::hex << std::setw(8) << std::setfill('0')
        << expected_magic << ", got 0x" << std::setw(8) << magic;
    throw std::runtime_error(msg.str());
  }
  return in;
}

}  // namespace

LabeledSet load_idx(const std::filesystem::path& images_path, const std::filesystem::path& labels_path,
                    std::optional<Index> max_rows) {
  std::ifstream images = open_idx(images_path, 0x00000803);
  const std::uint32_t n_images = read_be32(images, images_path);
  const std::uint32_t rows = read_be32(images, images_path);
  const std::uint32_t cols = read_be32(images, images_path);
  std::ifstream labels = open_idx(labels_path, 0x00000801);
  const std::uint32_t n_labels = read_be32(labels, labels_path);
  if (n_images != n_labels) {
    throw std::runtime_error("idx: " + std::to_string(n_images) + " images but " + std::to_string(n_labels) +
                             " labels");
  }
  Index n = static_cast<Index>(n_images);
  if (max_rows) n = std::min(n, *max_rows);
  const Index dim = static_cast<Index>(rows) * static_cast<Index>(cols);

  LabeledSet out;
  out.image_rows = rows;
  out.image_cols = cols;
  out.x.resize(n, dim);
  std::vector<unsigned char> buffer(static_cast<std::size_t>(dim));
  for (Index i = 0; i < n; ++i) {
    if (!images.read(reinterpret_cast<char*>(buffer.data()), dim)) {
      throw std::runtime_error("idx: truncated pixel data in " + images_path.string());
    }
    for (Index j = 0; j < dim; ++j) out.x(i, j) = buffer[static_cast<std::size_t>(j)] / 255.0;
  }
  buffer.resize(static_cast<std::size_t>(n));
  if (n > 0 && !labels.read(reinterpret_cast<char*>(buffer.data()), n)) {
    throw std::runtime_error("idx: truncated label data in " + labels_path.string());
  }
  out.y.assign(buffer.begin(), buffer.begin() + n);
  return out;
}

DatasetSplit make_idx_dataset(const LabeledSet& train, const LabeledSet& test, Index classes) {
  if (train.x.cols() != test.x.cols()) throw std::invalid_argument("idx: train and test feature widths differ");
  for (const auto* set : {&train, &test}) {
    for (int label : set->y) {
      if (label < 0 || label >= classes) {
        throw std::invalid_argument("idx: label " + std::to_string(label) + " outside [0, " +
                                    std::to_string(classes) + ")");
      }
    }
  }
  DatasetSplit split;
  split.unlabeled_x = train.x;
  split.unlabeled_hidden_y = train.y;
  split.labeled_x.resize(0, train.x.cols());
  split.test_x = test.x;
  split.test_y = test.y;
  split.x_dim = train.x.cols();
  split.classes = classes;
  split.image_rows = train.image_rows;
  split.image_cols = train.image_cols;
  return split;
}

void write_rings_csv(std::ostream& out, const Matrix& x, const std::vector<int>& y, const std::vector<Scalar>& s) {
  out << "x0,x1,y,s\n";
  out << std::setprecision(17);
  for (Index r = 0; r < x.rows(); ++r) {
    const auto i = static_cast<std::size_t>(r);
    out << x(r, 0) << ',' << x(r, 1) << ',' << y.at(i) << ',' << s.at(i) << '\n';
  }
}

}  // namespace sgan
