#include "sgan/config.hpp"

#include <json.hpp>

#include <fstream>
#include <set>
#include <sstream>

namespace sgan {

using nlohmann::json;

Index RunConfig::classes() const {
  return dataset.kind == DatasetKind::kRings ? dataset.rings.classes : dataset.classes;
}

PriorSpec RunConfig::priors() const { return train.priors; }

namespace {

class ObjectReader {
 public:
  ObjectReader(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw ConfigError(path_ + ": expected an object");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(where(key) + ": " + e.what());
    }
  }

  const json* child(const std::string& key) {
    seen_.insert(key);
    auto it = j_.find(key);
    return it == j_.end() ? nullptr : &*it;
  }

  std::string where(const std::string& key) const { return path_.empty() ? key : path_ + "." + key; }

  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!seen_.count(key)) throw ConfigError("unknown key '" + where(key) + "'");
    }
  }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

std::vector<Index> widths(const json& j, const std::string& where) {
  if (!j.is_array()) throw ConfigError(where + ": expected an array of layer widths");
  std::vector<Index> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<Index>() <= 0) throw ConfigError(where + ": widths must be positive integers");
    out.push_back(v.get<Index>());
  }
  return out;
}

void read_dataset(const json& j, DatasetConfig& d, const std::filesystem::path& base_dir) {
  ObjectReader r(j, "dataset");
  std::string type = "rings";
  r.get("type", type);
  r.get("labels", d.labels);
  if (type == "rings") {
    d.kind = DatasetKind::kRings;
    if (const json* rj = r.child("rings")) {
      ObjectReader rr(*rj, "dataset.rings");
      rr.get("classes", d.rings.classes);
      rr.get("train_samples", d.rings.train_samples);
      rr.get("test_samples", d.rings.test_samples);
      rr.get("noise", d.rings.noise);
      rr.finish();
    }
    if (d.rings.classes < 2) throw ConfigError("dataset.rings.classes must be >= 2");
    if (!(d.rings.noise >= 0)) throw ConfigError("dataset.rings.noise must be >= 0");
    if (d.rings.train_samples <= 0 || d.rings.test_samples <= 0) {
      throw ConfigError("dataset.rings sample counts must be positive");
    }
    d.classes = d.rings.classes;
  } else if (type == "idx") {
    d.kind = DatasetKind::kIdx;
    const json* ij = r.child("idx");
    if (!ij) throw ConfigError("dataset.idx is required for type 'idx'");
    ObjectReader ir(*ij, "dataset.idx");
    std::string train_images, train_labels, test_images, test_labels;
    ir.get("train_images", train_images);
    ir.get("train_labels", train_labels);
    ir.get("test_images", test_images);
    ir.get("test_labels", test_labels);
    Index max_train = -1, max_test = -1;
    ir.get("max_train", max_train);
    ir.get("max_test", max_test);
    ir.get("classes", d.classes);
    ir.finish();
    if (train_images.empty() || train_labels.empty() || test_images.empty() || test_labels.empty()) {
      throw ConfigError("dataset.idx needs train_images, train_labels, test_images and test_labels");
    }
    auto resolve = [&](const std::string& p) {
      std::filesystem::path path(p);
      return path.is_absolute() ? path : base_dir / path;
    };
    d.idx.train_images = resolve(train_images);
    d.idx.train_labels = resolve(train_labels);
    d.idx.test_images = resolve(test_images);
    d.idx.test_labels = resolve(test_labels);
    if (max_train > 0) d.idx.max_train = max_train;
    if (max_test > 0) d.idx.max_test = max_test;
    if (d.classes < 2) throw ConfigError("dataset.idx.classes must be >= 2");
  } else {
    throw ConfigError("dataset.type must be 'rings' or 'idx', got '" + type + "'");
  }
  r.finish();
  if (d.labels <= 0 || d.labels % d.classes != 0) {
    throw ConfigError("dataset.labels must be a positive multiple of the class count");
  }
}

void read_model(const json& j, ModelConfig& m, ZPrior& prior, std::string& head) {
  ObjectReader r(j, "model");
  r.get("z_dim", m.dims.z_dim);
  std::string prior_name(z_prior_name(prior));
  r.get("z_prior", prior_name);
  try {
    prior = parse_z_prior(prior_name);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("model.z_prior: ") + e.what());
  }
  for (auto [key, target] : {std::pair{"generator_hidden", &m.generator_hidden},
                             std::pair{"inference_hidden", &m.inference_hidden},
                             std::pair{"classifier_hidden", &m.classifier_hidden},
                             std::pair{"critic_hidden", &m.critic_hidden}}) {
    if (const json* w = r.child(key)) *target = widths(*w, r.where(key));
  }
  r.get("generator_head", head);
  if (head != "auto" && head != "linear" && head != "sigmoid") {
    throw ConfigError("model.generator_head must be auto, linear or sigmoid");
  }
  r.finish();
  if (m.dims.z_dim <= 0) throw ConfigError("model.z_dim must be positive");
}

void read_train(const json& j, TrainConfig& t, int& checkpoint_every) {
  ObjectReader r(j, "train");
  r.get("epochs", t.epochs);
  r.get("batch_size", t.batch_size);
  r.get("critic_steps", t.critic_steps);
  if (const json* lj = r.child("learning_rates")) {
    ObjectReader lr(*lj, "train.learning_rates");
    lr.get("generator", t.learning_rates.generator);
    lr.get("inference", t.learning_rates.inference);
    lr.get("classifier", t.learning_rates.classifier);
    lr.get("critic_xy", t.learning_rates.critic_xy);
    lr.get("critic_xz", t.learning_rates.critic_xz);
    lr.finish();
  }
  r.get("beta1", t.beta1);
  r.get("beta2", t.beta2);
  r.get("pretrain_epochs", t.pretrain_epochs);
  r.get("pretrain_learning_rate", t.pretrain_learning_rate);
  r.get("c_join_epoch", t.c_join_epoch);
  r.get("ramp_start", t.ramp_start);
  r.get("ramp_end", t.ramp_end);
  r.get("p_gen", t.p_gen);
  r.get("p_pseudo", t.p_pseudo);
  r.get("saturating_gen_loss", t.saturating_gen_loss);
  r.get("pseudo_in_ry", t.pseudo_in_ry);
  r.get("use_ry", t.use_ry);
  r.get("use_rz", t.use_rz);
  r.get("checkpoint_every", checkpoint_every);
  r.finish();
}

void read_eval(const json& j, EvalConfig& e) {
  ObjectReader r(j, "eval");
  r.get("num_samples", e.num_samples);
  r.get("eval_every", e.eval_every);
  r.get("golden_epochs", e.golden.epochs);
  r.get("golden_learning_rate", e.golden.learning_rate);
  if (const json* w = r.child("golden_hidden")) e.golden.hidden = widths(*w, "eval.golden_hidden");
  r.get("probe_iterations", e.probe.iterations);
  r.get("probe_learning_rate", e.probe.learning_rate);
  r.finish();
  if (e.num_samples <= 0) throw ConfigError("eval.num_samples must be positive");
  if (e.eval_every <= 0) throw ConfigError("eval.eval_every must be positive");
  if (e.golden.epochs < 0 || e.probe.iterations < 0) throw ConfigError("eval iteration counts must be >= 0");
}

}  // namespace

void apply_seed(RunConfig& config, std::uint64_t seed) {
  config.seed = seed;
  config.train.seed = config.train_seed();
  config.dataset.rings.seed = config.data_seed();
}

RunConfig parse_run_config(const std::string& json_text, const std::filesystem::path& base_dir) {
  json root;
  try {
    root = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  RunConfig cfg;
  ObjectReader r(root, "");
  r.get("seed", cfg.seed);
  std::string out_dir = cfg.output_dir.string();
  r.get("output_dir", out_dir);
  cfg.output_dir = out_dir;
  if (const json* d = r.child("dataset")) read_dataset(*d, cfg.dataset, base_dir);
  ZPrior prior = ZPrior::kUniform;
  std::string head = "auto";
  if (const json* m = r.child("model")) read_model(*m, cfg.model, prior, head);
  // Match the output head to the data support: raw coordinates vs [0, 1] pixels.
  if (head == "auto") head = cfg.dataset.kind == DatasetKind::kIdx ? "sigmoid" : "linear";
  cfg.model.generator_head = head == "sigmoid" ? Head::kSigmoid : Head::kLinear;
  if (const json* t = r.child("train")) read_train(*t, cfg.train, cfg.checkpoint_every);
  if (const json* e = r.child("eval")) read_eval(*e, cfg.eval);
  r.finish();

  cfg.model.dims.y_dim = cfg.classes();
  if (cfg.dataset.kind == DatasetKind::kRings) cfg.model.dims.x_dim = 2;
  cfg.train.priors = PriorSpec{cfg.classes(), cfg.model.dims.z_dim, prior};
  apply_seed(cfg, cfg.seed);
  try {
    cfg.train.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  if (cfg.checkpoint_every < 0) throw ConfigError("train.checkpoint_every must be >= 0");
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str(), path.parent_path());
}

std::string canonical_config(const RunConfig& c) {
  json j;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  const DatasetConfig& d = c.dataset;
  j["dataset"] = {{"kind", d.kind == DatasetKind::kRings ? "rings" : "idx"},
                  {"labels", d.labels},
                  {"classes", d.classes}};
  if (d.kind == DatasetKind::kRings) {
    j["dataset"]["rings"] = {{"classes", d.rings.classes},
                             {"train_samples", d.rings.train_samples},
                             {"test_samples", d.rings.test_samples},
                             {"noise", d.rings.noise},
                             {"seed", d.rings.seed}};
  } else {
    j["dataset"]["idx"] = {{"train_images", d.idx.train_images.string()},
                           {"train_labels", d.idx.train_labels.string()},
                           {"test_images", d.idx.test_images.string()},
                           {"test_labels", d.idx.test_labels.string()},
                           {"max_train", d.idx.max_train.value_or(-1)},
                           {"max_test", d.idx.max_test.value_or(-1)}};
  }
  const ModelConfig& m = c.model;
  j["model"] = {{"z_dim", m.dims.z_dim},
                {"z_prior", z_prior_name(c.train.priors.z_prior)},
                {"generator_hidden", m.generator_hidden},
                {"inference_hidden", m.inference_hidden},
                {"classifier_hidden", m.classifier_hidden},
                {"critic_hidden", m.critic_hidden},
                {"generator_head", head_name(m.generator_head)}};
  const TrainConfig& t = c.train;
  j["train"] = {{"epochs", t.epochs},
                {"batch_size", t.batch_size},
                {"critic_steps", t.critic_steps},
                {"learning_rates",
                 {{"generator", t.learning_rates.generator},
                  {"inference", t.learning_rates.inference},
                  {"classifier", t.learning_rates.classifier},
                  {"critic_xy", t.learning_rates.critic_xy},
                  {"critic_xz", t.learning_rates.critic_xz}}},
                {"beta1", t.beta1},
                {"beta2", t.beta2},
                {"pretrain_epochs", t.pretrain_epochs},
                {"pretrain_learning_rate", t.pretrain_learning_rate},
                {"c_join_epoch", t.c_join_epoch},
                {"ramp_start", t.ramp_start},
                {"ramp_end", t.ramp_end},
                {"p_gen", t.p_gen},
                {"p_pseudo", t.p_pseudo},
                {"saturating_gen_loss", t.saturating_gen_loss},
                {"pseudo_in_ry", t.pseudo_in_ry},
                {"use_ry", t.use_ry},
                {"use_rz", t.use_rz},
                {"seed", t.seed}};
  const EvalConfig& e = c.eval;
  j["eval"] = {{"num_samples", e.num_samples},
               {"eval_every", e.eval_every},
               {"golden_epochs", e.golden.epochs},
               {"golden_learning_rate", e.golden.learning_rate},
               {"golden_hidden", e.golden.hidden},
               {"probe_iterations", e.probe.iterations},
               {"probe_learning_rate", e.probe.learning_rate}};
  return j.dump();
}

std::uint64_t config_hash(const RunConfig& config) {
  const std::string text = canonical_config(config);
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char ch : text) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return h;
}

DatasetSplit build_dataset(const RunConfig& config) {
  const DatasetConfig& d = config.dataset;
  DatasetSplit full;
  if (d.kind == DatasetKind::kRings) {
    RingsConfig rings = d.rings;
    rings.seed = config.data_seed();
    full = make_rings_dataset(rings);
  } else {
    const LabeledSet train = load_idx(d.idx.train_images, d.idx.train_labels, d.idx.max_train);
    const LabeledSet test = load_idx(d.idx.test_images, d.idx.test_labels, d.idx.max_test);
    full = make_idx_dataset(train, test, d.classes);
  }
  return split_labels(full, d.labels, config.data_seed());
}

ModelConfig resolved_model(const RunConfig& config, const DatasetSplit& data) {
  ModelConfig m = config.model;
  m.dims.x_dim = data.x_dim;
  m.dims.y_dim = data.classes;
  return m;
}

}  // namespace sgan
