#include "sgan/commands.hpp"

#include <CLI11.hpp>
#include <Eigen/Core>

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>

namespace {

void add_checkpoint_options(CLI::App* cmd, sgan::CheckpointOptions& o) {
  cmd->add_option("checkpoint", o.checkpoint, "Checkpoint file")->required();
  cmd->add_option("--config", o.config, "Run configuration the checkpoint was trained with")->required();
  cmd->add_option("--seed", o.seed, "Master seed override used at training time");
  cmd->add_flag("--force", o.force, "Accept a checkpoint whose config hash does not match");
}

// "--input" is either a comma-separated row of numbers or a CSV file.
std::vector<std::vector<double>> parse_inputs(const std::vector<std::string>& inputs) {
  std::vector<std::vector<double>> rows;
  for (const auto& in : inputs) {
    if (std::filesystem::exists(in)) {
      auto file_rows = sgan::read_csv_rows(in);
      rows.insert(rows.end(), file_rows.begin(), file_rows.end());
      continue;
    }
    std::vector<double> row;
    std::stringstream ss(in);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        row.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw std::invalid_argument("--input '" + in + "' is neither a file nor a row of numbers");
      }
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace

int main(int argc, char** argv) {
  if (const char* threads = std::getenv("SGAN_THREADS")) {
    Eigen::setNbThreads(std::max(1, std::atoi(threads)));
  } else {
    Eigen::setNbThreads(1);
  }

  CLI::App app{"Structured GAN training and evaluation"};
  app.require_subcommand(1);

  sgan::TrainOptions train;
  auto* train_cmd = app.add_subcommand("train", "Train a model from a run configuration");
  train_cmd->add_option("config", train.config, "Run configuration (JSON)")->required();
  train_cmd->add_option("--seed", train.seed, "Master seed override");
  train_cmd->add_option("--out", train.out_dir, "Output directory (default: output_dir from the config)");

  sgan::CheckpointOptions eval;
  auto* eval_cmd = app.add_subcommand("eval", "Recompute evaluation metrics for a checkpoint");
  add_checkpoint_options(eval_cmd, eval);

  sgan::GenerateOptions generate;
  bool all_classes = false;
  auto* gen_cmd = app.add_subcommand("generate", "Sample class-conditional outputs");
  add_checkpoint_options(gen_cmd, generate.source);
  auto* class_opt = gen_cmd->add_option("--class", generate.class_index, "Condition class");
  gen_cmd->add_flag("--all", all_classes, "One row of samples per class")->excludes(class_opt);
  gen_cmd->add_option("--num", generate.num, "Samples per class");
  gen_cmd->add_option("--out", generate.out, "Output CSV or PGM file")->required();
  gen_cmd->add_option("--sample-seed", generate.sample_seed, "Seed for z sampling");

  sgan::TransferOptions transfer;
  std::vector<std::string> transfer_inputs;
  auto* transfer_cmd = app.add_subcommand("transfer", "Re-render inputs under other classes keeping their style");
  add_checkpoint_options(transfer_cmd, transfer.source);
  transfer_cmd->add_option("--input", transfer_inputs, "Comma-separated row or CSV file")->required();
  transfer_cmd->add_option("--classes", transfer.classes, "Target classes")->required()->delimiter(',');
  transfer_cmd->add_option("--out", transfer.out, "Output CSV or PGM file")->required();

  sgan::InterpolateOptions interp;
  auto* interp_cmd = app.add_subcommand("interpolate", "Interpolate z between two prior samples");
  add_checkpoint_options(interp_cmd, interp.source);
  interp_cmd->add_option("--class", interp.class_index, "Condition class")->required();
  interp_cmd->add_option("--steps", interp.steps, "Number of points including endpoints");
  interp_cmd->add_option("--out", interp.out, "Output CSV or PGM file")->required();
  interp_cmd->add_option("--sample-seed", interp.sample_seed, "Seed for the endpoints");

  sgan::GradcheckOptions gradcheck;
  auto* grad_cmd = app.add_subcommand("gradcheck", "Compare analytic and numeric gradients");
  grad_cmd->add_flag("--inject-fault", gradcheck.inject_fault, "Add an op with a wrong derivative");
  grad_cmd->add_option("--seeds", gradcheck.seeds, "Random cases per op");

  sgan::ExportOptions export_opts;
  auto* export_cmd = app.add_subcommand("export-data", "Write the synthetic rings dataset as CSV");
  export_cmd->add_option("config", export_opts.config, "Run configuration (JSON)")->required();
  export_cmd->add_option("--seed", export_opts.seed, "Master seed override");
  export_cmd->add_option("--split", export_opts.split, "train or test");
  export_cmd->add_option("--out", export_opts.out, "Output CSV")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : sgan::kExitInvalid;
  }

  try {
    if (*train_cmd) return sgan::cmd_train(train, std::cout, std::cerr);
    if (*eval_cmd) return sgan::cmd_eval(eval, std::cout, std::cerr);
    if (*gen_cmd) {
      if (!all_classes && !generate.class_index) {
        std::cerr << "error: pass --class k or --all\n";
        return sgan::kExitInvalid;
      }
      return sgan::cmd_generate(generate, std::cout, std::cerr);
    }
    if (*transfer_cmd) {
      transfer.inputs = parse_inputs(transfer_inputs);
      return sgan::cmd_transfer(transfer, std::cout, std::cerr);
    }
    if (*interp_cmd) return sgan::cmd_interpolate(interp, std::cout, std::cerr);
    if (*grad_cmd) return sgan::cmd_gradcheck(gradcheck, std::cout, std::cerr);
    if (*export_cmd) return sgan::cmd_export_data(export_opts, std::cout, std::cerr);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return sgan::kExitInvalid;
  }
  return sgan::kExitInvalid;
}
