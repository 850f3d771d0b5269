#include "sgan/commands.hpp"

#include "sgan/gradcheck.hpp"
#include "sgan/trainer.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <ostream>
#include <sstream>

namespace sgan {

namespace {

constexpr Scalar kNaN = std::numeric_limits<Scalar>::quiet_NaN();

std::string format_number(Scalar v) {
  if (std::isnan(v)) return "nan";
  std::ostringstream s;
  s << std::setprecision(17) << v;
  return s.str();
}

// Distinguishes bad user input (exit 2) from everything else.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct LoadedRun {
  RunConfig config;
  DatasetSplit data;
  RunState state;
};

RunConfig load_config(const std::filesystem::path& path, std::optional<std::uint64_t> seed) {
  if (!std::filesystem::exists(path)) throw ConfigError("config file not found: " + path.string());
  RunConfig cfg = load_run_config(path);
  if (seed) apply_seed(cfg, *seed);
  return cfg;
}

RunState fresh_state(const RunConfig& cfg, const DatasetSplit& data) {
  RunState state;
  state.nets = build_sgan(resolved_model(cfg, data), cfg.init_seed());
  LatentDims dims;
  dims.x_dim = data.x_dim;
  dims.y_dim = data.classes;
  state.golden.network = build_network(default_spec(Role::kClassifier, dims, cfg.eval.golden.hidden), cfg.eval_seed());
  return state;
}

LoadedRun load_run(const CheckpointOptions& options) {
  LoadedRun run;
  run.config = load_config(options.config, options.seed);
  const Checkpoint ckpt = load_checkpoint(options.checkpoint);
  if (ckpt.config_hash != config_hash(run.config) && !options.force) {
    throw UsageError("checkpoint was written under a different configuration (use --force to override)");
  }
  run.data = build_dataset(run.config);
  run.state = fresh_state(run.config, run.data);
  restore_checkpoint(ckpt, run.state);
  return run;
}

EvalOptions eval_options(const RunConfig& cfg) {
  EvalOptions o;
  o.num_samples = cfg.eval.num_samples;
  o.seed = cfg.eval_seed();
  o.probe = cfg.eval.probe;
  return o;
}

template <typename Fn>
int guarded(std::ostream& err, Fn&& fn) {
  try {
    return fn();
  } catch (const TrainingDiverged& e) {
    err << "error: training diverged: " << e.what() << "\n";
    return kExitDiverged;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
}

bool is_image_data(const DatasetSplit& data) { return data.image_rows > 0 && data.image_cols > 0; }

// Samples as CSV (x0..x{d-1},condition) or, for image data, a PGM grid.
void write_samples(const std::filesystem::path& path, const DatasetSplit& data, const Matrix& x,
                   const std::vector<int>& conditions, Index grid_rows, Index per_row) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  if (is_image_data(data)) {
    write_pgm_grid(out, x, data.image_rows, data.image_cols, grid_rows, per_row);
    return;
  }
  for (Index j = 0; j < x.cols(); ++j) out << 'x' << j << ',';
  out << "condition\n";
  for (Index r = 0; r < x.rows(); ++r) {
    for (Index j = 0; j < x.cols(); ++j) out << format_number(x(r, j)) << ',';
    out << conditions[static_cast<std::size_t>(r)] << '\n';
  }
}

void require_class(int k, Index classes) {
  if (k < 0 || k >= classes) {
    throw UsageError("class " + std::to_string(k) + " is outside [0, " + std::to_string(classes) + ")");
  }
}

}  // namespace

std::string metrics_csv_row(const MetricsRecord& r) {
  const GameLossReport& l = r.losses;
  std::ostringstream row;
  row << r.epoch;
  for (Scalar v : {l.l_xz_critic, l.l_xz_geninf, l.l_xy_critic, l.l_xy_gen, l.r_y, l.r_z, r.test_error, r.mp,
                   r.conditional_accuracy, r.golden_score}) {
    row << ',' << format_number(v);
  }
  return row.str();
}

std::string metrics_json(const MetricsRecord& r, Scalar golden_accuracy) {
  nlohmann::ordered_json j;
  j["epoch"] = r.epoch;
  j["l_xz_critic"] = r.losses.l_xz_critic;
  j["l_xz_geninf"] = r.losses.l_xz_geninf;
  j["l_xy_critic"] = r.losses.l_xy_critic;
  j["l_xy_gen"] = r.losses.l_xy_gen;
  j["r_y"] = r.losses.r_y;
  j["r_z"] = r.losses.r_z;
  j["test_error"] = r.test_error;
  j["mp"] = r.mp;
  j["cond_acc"] = r.conditional_accuracy;
  j["golden_score"] = r.golden_score;
  j["golden_accuracy"] = golden_accuracy;
  return j.dump();
}

int cmd_train(const TrainOptions& options, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config(options.config, options.seed);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  }
  return guarded(err, [&] {
    const std::filesystem::path out_dir = options.out_dir.value_or(cfg.output_dir);
    std::filesystem::create_directories(out_dir);
    const std::uint64_t hash = config_hash(cfg);

    const DatasetSplit data = build_dataset(cfg);
    RunState state = fresh_state(cfg, data);
    state.golden = train_golden_classifier(data.full_training_set(), data.test_x, data.test_y, data.classes,
                                           cfg.eval_seed(), cfg.eval.golden);
    out << "golden classifier test accuracy: " << format_number(state.golden.test_accuracy) << "\n";

    std::ofstream metrics(out_dir / "metrics.csv", std::ios::trunc);
    if (!metrics) throw std::runtime_error("cannot write " + (out_dir / "metrics.csv").string());
    metrics << kMetricsHeader << "\n";

    const PriorSpec priors = cfg.priors();
    const EvalOptions eval = eval_options(cfg);
    TrainHooks hooks;
    hooks.evaluate = [&](int epoch, const SganNetworks& nets) {
      if (epoch % cfg.eval.eval_every == 0 || epoch == cfg.train.epochs) {
        return evaluate(nets, state.golden.network, data, priors, eval);
      }
      MetricsRecord skipped;
      skipped.test_error = skipped.mp = skipped.conditional_accuracy = skipped.golden_score = kNaN;
      return skipped;
    };
    hooks.on_epoch_end = [&](const MetricsRecord& record, const SganNetworks&) {
      metrics << metrics_csv_row(record) << "\n" << std::flush;
      state.last = record;
      if (cfg.checkpoint_every > 0 && record.epoch % cfg.checkpoint_every == 0) {
        std::ostringstream name;
        name << "checkpoint_epoch_" << std::setw(4) << std::setfill('0') << record.epoch << ".ckpt";
        save_checkpoint(out_dir / name.str(), make_checkpoint(state, hash));
      }
    };

    const auto started = std::chrono::steady_clock::now();
    const TrainResult result = train(state.nets, data, cfg.train, hooks);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    save_checkpoint(out_dir / "final.ckpt", make_checkpoint(state, hash));

    out << "pretrain loss: " << format_number(result.pretrain_loss) << "\n";
    out << "trained " << cfg.train.epochs << " epochs in " << std::fixed << std::setprecision(1) << seconds << " s\n";
    if (!result.history.empty()) out << metrics_json(result.history.back(), state.golden.test_accuracy) << "\n";
    out << "wrote " << (out_dir / "metrics.csv").string() << " and " << (out_dir / "final.ckpt").string() << "\n";
    return kExitOk;
  });
}

int cmd_eval(const CheckpointOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedRun run = load_run(options);
    MetricsRecord record =
        evaluate(run.state.nets, run.state.golden.network, run.data, run.config.priors(), eval_options(run.config));
    record.epoch = run.state.last.epoch;
    record.losses = run.state.last.losses;
    out << metrics_json(record, run.state.golden.test_accuracy) << "\n";
    return kExitOk;
  });
}

int cmd_generate(const GenerateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedRun run = load_run(options.source);
    const PriorSpec priors = run.config.priors();
    std::vector<int> classes;
    if (options.class_index) {
      require_class(*options.class_index, priors.classes);
      classes.push_back(*options.class_index);
    } else {
      for (int k = 0; k < priors.classes; ++k) classes.push_back(k);
    }
    if (options.num <= 0) throw UsageError("--num must be positive");
    std::vector<int> conditions;
    for (int k : classes) conditions.insert(conditions.end(), static_cast<std::size_t>(options.num), k);
    std::mt19937_64 rng(options.sample_seed);
    const Matrix z = sample_z(priors, static_cast<Index>(conditions.size()), rng);
    const Matrix x = generator_forward(run.state.nets.generator.frozen(), Tensor(one_hot(conditions, priors.classes)),
                                       Tensor(z))
                         .value();
    write_samples(options.out, run.data, x, conditions, static_cast<Index>(classes.size()), options.num);
    out << "wrote " << x.rows() << " samples to " << options.out.string() << "\n";
    return kExitOk;
  });
}

int cmd_transfer(const TransferOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    LoadedRun run = load_run(options.source);
    const Index classes = run.config.classes();
    if (options.classes.empty()) throw UsageError("--classes must list at least one class");
    for (int k : options.classes) require_class(k, classes);
    if (options.inputs.empty()) throw UsageError("no input rows given");
    const Index x_dim = run.data.x_dim;
    const Index per_source = static_cast<Index>(options.classes.size());
    Matrix x(static_cast<Index>(options.inputs.size()) * per_source, x_dim);
    std::vector<int> conditions;
    for (std::size_t i = 0; i < options.inputs.size(); ++i) {
      const auto& row = options.inputs[i];
      if (static_cast<Index>(row.size()) != x_dim) {
        throw UsageError("input row " + std::to_string(i) + " has " + std::to_string(row.size()) + " values, " +
                         std::to_string(x_dim) + " expected");
      }
      Matrix source(1, x_dim);
      for (Index j = 0; j < x_dim; ++j) source(0, j) = row[static_cast<std::size_t>(j)];
      x.middleRows(static_cast<Index>(i) * per_source, per_source) =
          style_transfer(run.state.nets.generator, run.state.nets.inference, source, options.classes);
      conditions.insert(conditions.end(), options.classes.begin(), options.classes.end());
    }
    write_samples(options.out, run.data, x, conditions, static_cast<Index>(options.inputs.size()), per_source);
    out << "wrote " << x.rows() << " samples to " << options.out.string() << "\n";
    return kExitOk;
  });
}

int cmd_interpolate(const InterpolateOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    if (options.steps < 2) throw UsageError("--steps must be >= 2");
    LoadedRun run = load_run(options.source);
    const PriorSpec priors = run.config.priors();
    require_class(options.class_index, priors.classes);
    std::mt19937_64 rng(options.sample_seed);
    const Matrix ends = sample_z(priors, 2, rng);
    const Matrix x = interpolate(run.state.nets.generator, options.class_index, ends.row(0), ends.row(1), options.steps);
    const std::vector<int> conditions(static_cast<std::size_t>(options.steps), options.class_index);
    write_samples(options.out, run.data, x, conditions, 1, options.steps);
    out << "wrote " << x.rows() << " samples to " << options.out.string() << "\n";
    return kExitOk;
  });
}

int cmd_gradcheck(const GradcheckOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    GradCheckSuiteOptions suite;
    suite.inject_fault = options.inject_fault;
    suite.seeds = options.seeds;
    const auto started = std::chrono::steady_clock::now();
    const auto results = run_gradcheck_suite(suite);
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
    bool all_pass = true;
    for (const auto& c : results) {
      out << std::left << std::setw(28) << c.name << " max_rel_err=" << std::scientific << std::setprecision(3)
          << c.report.max_rel_err << std::defaultfloat << " coords=" << c.report.coordinates_checked << "  "
          << (c.report.pass ? "PASS" : "FAIL") << "\n";
      all_pass = all_pass && c.report.pass;
    }
    out << (all_pass ? "all gradient checks passed" : "gradient check FAILED") << " (" << std::fixed
        << std::setprecision(2) << seconds << " s, h=" << std::defaultfloat << suite.h << ", tol=" << suite.tol << ")\n";
    return all_pass ? kExitOk : kExitCheckFailed;
  });
}

int cmd_export_data(const ExportOptions& options, std::ostream& out, std::ostream& err) {
  return guarded(err, [&] {
    const RunConfig cfg = load_config(options.config, options.seed);
    if (cfg.dataset.kind != DatasetKind::kRings) throw UsageError("export-data supports the rings dataset only");
    if (options.split != "train" && options.split != "test") throw UsageError("--split must be train or test");
    RingsConfig rings = cfg.dataset.rings;
    rings.seed = cfg.data_seed();
    const RingsSamples samples = sample_rings_sets(rings);
    const LabeledSet& set = options.split == "train" ? samples.train : samples.test;
    if (options.out.has_parent_path()) std::filesystem::create_directories(options.out.parent_path());
    std::ofstream file(options.out, std::ios::trunc);
    if (!file) throw std::runtime_error("cannot open " + options.out.string() + " for writing");
    write_rings_csv(file, set.x, set.y, set.style);
    out << "wrote " << set.size() << " rows to " << options.out.string() << "\n";
    return kExitOk;
  });
}

std::vector<std::vector<Scalar>> read_csv_rows(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::vector<std::vector<Scalar>> rows;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::vector<Scalar> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size() && cell.find_first_not_of(" \t\r", used) != std::string::npos) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (first) {
        first = false;
        continue;
      }
      throw std::runtime_error(path.string() + ": non-numeric row '" + line + "'");
    }
    first = false;
    rows.push_back(std::move(row));
  }
  return rows;
}

void write_pgm_grid(std::ostream& out, const Matrix& samples, Index image_h, Index image_w, Index rows,
                    Index per_row) {
  if (samples.cols() != image_h * image_w) throw ShapeError("pgm: sample width does not match image size");
  if (samples.rows() > rows * per_row) throw ShapeError("pgm: more samples than grid cells");
  const Index width = per_row * image_w;
  const Index height = rows * image_h;
  out << "P5\n" << width << " " << height << "\n255\n";
  std::vector<unsigned char> pixels(static_cast<std::size_t>(width * height), 0);
  for (Index s = 0; s < samples.rows(); ++s) {
    const Index gr = s / per_row, gc = s % per_row;
    for (Index i = 0; i < image_h; ++i) {
      for (Index j = 0; j < image_w; ++j) {
        const Scalar v = std::clamp(samples(s, i * image_w + j), 0.0, 1.0);
        pixels[static_cast<std::size_t>((gr * image_h + i) * width + gc * image_w + j)] =
            static_cast<unsigned char>(std::lround(v * 255.0));
      }
    }
  }
  out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
}

}  // namespace sgan
