#pragma once

// Entry points behind the `sgan` executable. Each returns the process exit code:
//   0 success, 1 gradient check failure, 2 invalid input, 3 training diverged.

#include "sgan/checkpoint.hpp"
#include "sgan/config.hpp"
#include "sgan/eval.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace sgan {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitDiverged = 3;

inline constexpr const char* kMetricsHeader =
    "epoch,l_xz_critic,l_xz_geninf,l_xy_critic,l_xy_gen,r_y,r_z,test_error,mp,cond_acc,golden_score";

std::string metrics_csv_row(const MetricsRecord& record);
std::string metrics_json(const MetricsRecord& record, Scalar golden_accuracy);

struct TrainOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::optional<std::filesystem::path> out_dir;
};

struct CheckpointOptions {
  std::filesystem::path checkpoint;
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  bool force = false;
};

struct GenerateOptions {
  CheckpointOptions source;
  std::optional<int> class_index;  // unset: all classes
  Index num = 8;
  std::filesystem::path out;
  std::uint64_t sample_seed = 0;
};

struct TransferOptions {
  CheckpointOptions source;
  std::vector<std::vector<Scalar>> inputs;  // one source row each
  std::vector<int> classes;
  std::filesystem::path out;
};

struct InterpolateOptions {
  CheckpointOptions source;
  int class_index = 0;
  int steps = 8;
  std::filesystem::path out;
  std::uint64_t sample_seed = 0;
};

struct GradcheckOptions {
  bool inject_fault = false;
  int seeds = 100;
};

struct ExportOptions {
  std::filesystem::path config;
  std::optional<std::uint64_t> seed;
  std::string split = "train";
  std::filesystem::path out;
};

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err);
int cmd_eval(const CheckpointOptions& options, std::ostream& out, std::ostream& err);
int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err);
int cmd_transfer(const TransferOptions& options, std::ostream& out, std::ostream& err);
int cmd_interpolate(const InterpolateOptions& options, std::ostream& out, std::ostream& err);
int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err);
int cmd_export_data(const ExportOptions& options, std::ostream& out, std::ostream& err);

/// Reads comma-separated rows of numbers; lines that fail to parse as numbers
/// (a header) are skipped only when they are the first line.
std::vector<std::vector<Scalar>> read_csv_rows(const std::filesystem::path& path);

/// Binary PGM (P5, maxval 255) of a grid of square-ish images: `rows` grid
/// rows, each holding `per_row` consecutive samples of (h x w) pixels in [0, 1].
void write_pgm_grid(std::ostream& out, const Matrix& samples, Index image_h, Index image_w, Index rows,
                    Index per_row);

}  // namespace sgan
