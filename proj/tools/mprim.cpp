// mprim: generate synthetic demonstrations, train context-to-trajectory models,
// evaluate them and emit plot-ready artifacts.
//
// Exit codes: 0 success, 2 usage error, 1 runtime failure.

#include "sha256.hpp"

#include "mprim/checkpoint.hpp"
#include "mprim/dataset.hpp"
#include "mprim/dataset_io.hpp"
#include "mprim/kinematics.hpp"
#include "mprim/plot.hpp"
#include "mprim/training.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kToolVersion = "1.0.0";

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

json read_config(const std::string& path) {
  if (path.empty()) return json::object();
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file " + path + ": " + e.what());
  }
  if (!j.is_object()) throw UsageError("config file " + path + ": expected a JSON object");
  return j;
}

// Precedence: command-line flag, then config file, then built-in default.
template <typename T>
T resolve(const std::optional<T>& flag, const json& config, const char* key, T fallback) {
  if (flag) return *flag;
  if (config.contains(key)) {
    try {
      return config.at(key).get<T>();
    } catch (const json::exception& e) {
      throw UsageError(std::string("config key '") + key + "': " + e.what());
    }
  }
  return fallback;
}

// Seed: flag, config file, MPRIM_SEED, then 0.
std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, const json& config) {
  std::uint64_t fallback = 0;
  if (const char* env = std::getenv("MPRIM_SEED"); env != nullptr && *env != '\0') {
    try {
      std::size_t used = 0;
      fallback = std::stoull(env, &used);
      if (used != std::string(env).size()) throw std::invalid_argument("trailing characters");
    } catch (const std::exception&) {
      throw UsageError(std::string("MPRIM_SEED is not an unsigned integer: '") + env + "'");
    }
  }
  return resolve<std::uint64_t>(flag, config, "seed", fallback);
}

json file_entry(const fs::path& p) {
  return {{"path", p.string()}, {"bytes", fs::file_size(p)}, {"sha256", mprim::tools::sha256_file(p.string())}};
}

void write_manifest(const fs::path& path, const std::string& command,
                    const std::vector<std::string>& argv, const json& config,
                    const std::vector<fs::path>& inputs, const std::vector<fs::path>& outputs,
                    const json& summary = json::object()) {
  json m = {{"tool", "mprim"},
            {"version", kToolVersion},
            {"command", command},
            {"argv", argv},
            {"config", config},
            {"inputs", json::array()},
            {"outputs", json::array()}};
  for (const auto& p : inputs) m["inputs"].push_back(file_entry(p));
  for (const auto& p : outputs) m["outputs"].push_back(file_entry(p));
  if (!summary.empty()) m["summary"] = summary;
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write manifest " + path.string());
  out << m.dump(2) << '\n';
}

void ensure_directory(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw std::runtime_error("cannot create directory " + dir.string() + ": " + ec.message());
}

template <typename Fn>
void write_file(const fs::path& path, Fn&& body) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

// ---- generate ---------------------------------------------------------------

struct GenerateFlags {
  std::string kind;
  std::optional<std::uint64_t> seed;
  std::string out;
  std::optional<double> noise;
  std::string config;
};

int run_generate(const GenerateFlags& f, const std::vector<std::string>& argv) {
  const json config = read_config(f.config);
  const std::string kind = f.kind.empty() ? config.value("kind", std::string()) : f.kind;
  if (kind.empty()) throw UsageError("--kind is required (rtp or wpp)");
  const auto dataset_kind = mprim::dataset_kind_from_string(kind);
  const std::uint64_t seed = resolve_seed(f.seed, config);
  const double noise = resolve<double>(f.noise, config, "noise", 0.0);
  if (!(noise >= 0.0)) throw UsageError("--noise must be >= 0");

  mprim::DemoDataset ds;
  if (dataset_kind == mprim::DatasetKind::Rtp) {
    mprim::RtpConfig cfg;
    cfg.noise = noise;
    ds = mprim::generate_rtp(seed, cfg);
  } else {
    mprim::WppConfig cfg;
    cfg.noise = noise;
    ds = mprim::generate_wpp(seed, cfg);
  }
  const fs::path out(f.out);
  if (out.has_parent_path()) ensure_directory(out.parent_path());
  mprim::save_jsonl(ds, out.string());

  const json resolved = {{"kind", kind}, {"seed", seed}, {"noise", noise}};
  write_manifest(out.string() + ".manifest.json", "generate", argv, resolved, {}, {out});
  std::cout << "wrote " << ds.size() << " " << kind << " samples to " << out.string() << '\n';
  return 0;
}

// ---- train ------------------------------------------------------------------

struct TrainFlags {
  std::string data;
  std::string out;
  std::string method;
  std::string task;
  std::string split;
  std::optional<int> epochs;
  std::optional<int> batch_size;
  std::optional<double> learning_rate;
  std::optional<int> n_basis;
  std::vector<int> hidden;
  std::optional<std::uint64_t> seed;
  std::string config;
};

int run_train(const TrainFlags& f, const std::vector<std::string>& argv) {
  const json config = read_config(f.config);
  mprim::DemoDataset ds = mprim::load_jsonl(f.data);
  const bool rtp = ds.kind == mprim::DatasetKind::Rtp;

  const std::string method_name =
      f.method.empty() ? config.value("method", std::string("deep-mp")) : f.method;
  mprim::Method method;
  try {
    method = mprim::method_from_string(method_name);
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }
  const std::string task = f.task.empty() ? config.value("task", mprim::to_string(ds.kind)) : f.task;
  if (task != mprim::to_string(ds.kind)) {
    throw UsageError("--task " + task + " does not match the dataset kind " + mprim::to_string(ds.kind));
  }

  mprim::TrainConfig cfg;
  cfg.epochs = resolve<int>(f.epochs, config, "epochs", rtp ? 150 : 200);
  cfg.batch_size = resolve<int>(f.batch_size, config, "batch_size", cfg.batch_size);
  cfg.learning_rate = resolve<double>(f.learning_rate, config, "learning_rate", cfg.learning_rate);
  cfg.train_fraction = resolve<double>(std::nullopt, config, "train_fraction", cfg.train_fraction);
  cfg.val_fraction_of_train =
      resolve<double>(std::nullopt, config, "val_fraction_of_train", cfg.val_fraction_of_train);
  cfg.early_stop_patience =
      resolve<int>(std::nullopt, config, "early_stop_patience", cfg.early_stop_patience);
  cfg.seed = resolve_seed(f.seed, config);
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    throw UsageError(e.what());
  }

  mprim::NetConfig net;
  net.hidden = !f.hidden.empty() ? f.hidden : config.value("hidden", net.hidden);
  for (int h : net.hidden) {
    if (h < 1) throw UsageError("--hidden sizes must be positive");
  }
  mprim::PrompSetup promp;
  promp.n_basis = resolve<int>(f.n_basis, config, "n_basis", rtp ? 8 : 10);
  promp.lambda = resolve<double>(std::nullopt, config, "lambda", promp.lambda);
  if (promp.n_basis < 1) throw UsageError("--n-basis must be >= 1");
  mprim::DmpSetup dmp;
  dmp.n_basis = resolve<int>(std::nullopt, config, "dmp_basis", dmp.n_basis);
  dmp.tau = resolve<double>(std::nullopt, config, "dmp_tau", dmp.tau);
  dmp.alpha = resolve<double>(std::nullopt, config, "ddmp_alpha", dmp.alpha);

  const std::string split_name = f.split.empty() ? config.value("split", std::string()) : f.split;
  mprim::SplitIndices split;
  if (split_name.empty()) {
    split = mprim::default_split(ds.size(), cfg);
  } else {
    if (rtp) throw UsageError("--split selects a palpation experiment; the dataset is rtp");
    mprim::SplitSpec spec;
    try {
      spec = mprim::wpp_split(split_name);
    } catch (const std::exception& e) {
      throw UsageError(e.what());
    }
    split = mprim::apply_split(ds, spec, cfg.seed);
    mprim::carve_validation(split, cfg.val_fraction_of_train, cfg.seed);
  }

  mprim::TrainResult result;
  switch (method) {
    case mprim::Method::DeepMp:
      result = mprim::train_deep_mp(ds, split, promp, net, cfg);
      break;
    case mprim::Method::ResidualDeepMp:
      result = mprim::train_residual_deep_mp(ds, split, promp, net, cfg);
      break;
    case mprim::Method::Ddmp:
      result = mprim::train_ddmp(ds, split, dmp, promp, net, cfg);
      break;
  }

  const fs::path dir(f.out);
  ensure_directory(dir);
  const json resolved = {{"method", method_name},
                         {"task", task},
                         {"split", split_name.empty() ? "random" : split_name},
                         {"epochs", cfg.epochs},
                         {"batch_size", cfg.batch_size},
                         {"learning_rate", cfg.learning_rate},
                         {"train_fraction", cfg.train_fraction},
                         {"val_fraction_of_train", cfg.val_fraction_of_train},
                         {"early_stop_patience", cfg.early_stop_patience},
                         {"seed", cfg.seed},
                         {"hidden", net.hidden},
                         {"n_basis", promp.n_basis},
                         {"lambda", promp.lambda},
                         {"dmp_basis", dmp.n_basis},
                         {"dmp_tau", dmp.tau},
                         {"ddmp_alpha", dmp.alpha}};
  const fs::path checkpoint = dir / "checkpoint.json";
  const fs::path curve = dir / "loss_curve.csv";
  mprim::save_checkpoint(result.model, checkpoint.string(),
                         {{"training", {{"config", resolved},
                                        {"report", mprim::report_to_json(result.report)}}}});
  write_file(curve, [&](std::ostream& out) { mprim::write_report_csv(out, result.report); });
  write_manifest(dir / "manifest.json", "train", argv, resolved, {fs::path(f.data)},
                 {checkpoint, curve},
                 {{"epochs_run", result.report.epochs_run},
                  {"best_epoch", result.report.best_epoch + 1},
                  {"stop_reason", result.report.stop_reason}});

  std::cout << method_name << ": " << result.report.epochs_run << " epochs ("
            << result.report.stop_reason << ")";
  if (result.report.best_epoch >= 0) {
    std::cout << ", best validation loss "
              << result.report.val_loss[static_cast<std::size_t>(result.report.best_epoch)]
              << " at epoch " << result.report.best_epoch + 1;
  }
  std::cout << "\nwrote " << checkpoint.string() << '\n';
  return 0;
}

// ---- eval -------------------------------------------------------------------

struct EvalFlags {
  std::string checkpoint;
  std::string data;
  std::string out;
  std::string chain;
  std::string set = "test";
  int plots = 3;
  std::vector<std::size_t> plot_index;
  std::string config;
};

void check_compatible(const mprim::TrainedModel& model, const mprim::DemoDataset& ds) {
  if (ds.kind != model.task) {
    throw std::runtime_error("dataset kind " + mprim::to_string(ds.kind) +
                             " does not match the checkpoint task " + mprim::to_string(model.task));
  }
  const auto& s = ds.samples.front();
  if (s.context.size() != model.net.input_size()) {
    throw std::runtime_error("dataset contexts have " + std::to_string(s.context.size()) +
                             " features, the checkpoint expects " +
                             std::to_string(model.net.input_size()));
  }
  if (s.trajectory.phase != model.phase || s.trajectory.joints() != model.n_joint) {
    throw std::runtime_error("dataset trajectories do not match the checkpoint phase or joints");
  }
}

int run_eval(const EvalFlags& f, const std::vector<std::string>& argv) {
  const json config = read_config(f.config);
  const mprim::TrainedModel model = mprim::load_checkpoint(f.checkpoint);
  const mprim::DemoDataset ds = mprim::load_jsonl(f.data);
  if (ds.empty()) throw std::runtime_error("dataset " + f.data + " is empty");
  check_compatible(model, ds);

  const std::string chain_path = f.chain.empty() ? config.value("chain", std::string()) : f.chain;
  const mprim::KinematicChain chain =
      chain_path.empty() ? mprim::KinematicChain::default_seven_dof() : mprim::load_chain(chain_path);
  if (chain.n_joint() != model.n_joint) {
    throw std::runtime_error("chain has " + std::to_string(chain.n_joint()) + " joints, model has " +
                             std::to_string(model.n_joint));
  }

  std::vector<std::size_t> indices;
  if (f.set == "test") {
    indices = model.split.test;
  } else if (f.set == "validation") {
    indices = model.split.validation;
  } else if (f.set == "train") {
    indices = model.split.train;
  } else {
    indices.resize(ds.size());
    for (std::size_t i = 0; i < ds.size(); ++i) indices[i] = i;
  }
  for (auto i : indices) {
    if (i >= ds.size()) throw std::runtime_error("checkpoint split refers to sample " +
                                                 std::to_string(i) + " beyond the dataset");
  }
  if (indices.empty()) throw std::runtime_error("the " + f.set + " split is empty");

  const mprim::Evaluation ev = mprim::evaluate(model, ds, indices, chain);
  for (const auto& g : ev.missing_groups) {
    std::cerr << "warning: group " << g << " has no " << f.set << " samples; row omitted\n";
  }

  const fs::path dir(f.out);
  ensure_directory(dir / "plots");
  std::vector<fs::path> outputs;
  const fs::path metrics = dir / "metrics.csv";
  write_file(metrics, [&](std::ostream& out) { mprim::write_eval_csv(out, ev.groups); });
  outputs.push_back(metrics);

  std::vector<std::size_t> to_plot = f.plot_index;
  if (to_plot.empty()) {
    for (std::size_t k = 0; k < ev.samples.size() && k < static_cast<std::size_t>(f.plots); ++k) {
      to_plot.push_back(ev.samples[k].index);
    }
  }
  for (auto idx : to_plot) {
    const auto it = std::find_if(ev.samples.begin(), ev.samples.end(),
                                 [&](const auto& s) { return s.index == idx; });
    if (it == ev.samples.end()) {
      throw UsageError("--plot-index " + std::to_string(idx) + " is not in the " + f.set + " split");
    }
    const std::string stem = "sample_" + std::to_string(idx);
    const fs::path joints = dir / "plots" / (stem + "_joints.csv");
    const fs::path path = dir / "plots" / (stem + "_ee_path.csv");
    const fs::path svg = dir / "plots" / (stem + ".svg");
    write_file(joints, [&](std::ostream& o) { mprim::write_joint_csv(o, it->predicted, it->ground_truth); });
    write_file(path, [&](std::ostream& o) {
      mprim::write_ee_path_csv(o, it->predicted, it->ground_truth, chain);
    });
    write_file(svg, [&](std::ostream& o) {
      mprim::write_svg_overlay(o, it->predicted, it->ground_truth,
                               mprim::to_string(model.method) + " sample " + std::to_string(idx) +
                                   " (group " + it->group + ")");
    });
    outputs.insert(outputs.end(), {joints, path, svg});
  }

  const json resolved = {{"set", f.set},
                         {"chain", chain_path.empty() ? json("builtin-7dof") : json(chain_path)},
                         {"plot_index", to_plot}};
  json summary = {{"ave_mse_rad2", ev.overall.ave_mse},
                  {"ave_ed_mm", ev.overall.ave_ed},
                  {"count", ev.overall.count},
                  {"missing_groups", ev.missing_groups}};
  write_manifest(dir / "manifest.json", "eval", argv, resolved,
                 {fs::path(f.checkpoint), fs::path(f.data)}, outputs, summary);

  std::cout << "group  AveMSE [rad^2]  AveED [mm]  n\n";
  for (const auto& r : ev.groups) {
    std::cout << r.group << "  " << r.ave_mse << "  " << r.ave_ed << "  " << r.count << '\n';
  }
  std::cout << "all  " << ev.overall.ave_mse << "  " << ev.overall.ave_ed << "  " << ev.overall.count
            << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Context-conditioned movement primitives: data generation, training, evaluation"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);
  std::vector<std::string> args(argv, argv + argc);

  GenerateFlags gen;
  auto* generate = app.add_subcommand("generate", "Write a synthetic demonstration dataset (JSONL)");
  generate->add_option("--kind", gen.kind, "Dataset kind")->check(CLI::IsMember({"rtp", "wpp"}));
  generate->add_option("--seed", gen.seed, "Random seed (default: $MPRIM_SEED or 0)");
  generate->add_option("--out", gen.out, "Output JSONL file")->required();
  generate->add_option("--noise", gen.noise, "Std. dev. of smooth path noise [rad]");
  generate->add_option("--config", gen.config, "JSON file with option overrides");

  TrainFlags tr;
  auto* train = app.add_subcommand("train", "Train a model and write a checkpoint");
  train->add_option("--data", tr.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  train->add_option("--out", tr.out, "Output directory")->required();
  train->add_option("--method", tr.method, "Model variant")
      ->check(CLI::IsMember({"deep-mp", "residual", "ddmp"}));
  train->add_option("--task", tr.task, "Task kind (must match the dataset)")
      ->check(CLI::IsMember({"rtp", "wpp"}));
  train->add_option("--split", tr.split, "Palpation experiment WPP1..WPP10 (default: random 85/15)");
  train->add_option("--epochs", tr.epochs, "Epochs (default 150 rtp, 200 wpp)")
      ->check(CLI::NonNegativeNumber);
  train->add_option("--batch-size", tr.batch_size, "Minibatch size")->check(CLI::PositiveNumber);
  train->add_option("--lr", tr.learning_rate, "Adam learning rate")->check(CLI::PositiveNumber);
  train->add_option("--n-basis", tr.n_basis, "ProMP basis functions (default 8 rtp, 10 wpp)");
  train->add_option("--hidden", tr.hidden, "Hidden layer sizes")->delimiter(',');
  train->add_option("--seed", tr.seed, "Random seed (default: $MPRIM_SEED or 0)");
  train->add_option("--config", tr.config, "JSON file with option overrides");

  EvalFlags ev;
  auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint and write metrics and plots");
  eval->add_option("--checkpoint", ev.checkpoint, "Checkpoint JSON")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", ev.data, "Dataset JSONL")->required()->check(CLI::ExistingFile);
  eval->add_option("--out", ev.out, "Output directory")->required();
  eval->add_option("--chain", ev.chain, "DH chain JSON (default: built-in 7-DOF)");
  eval->add_option("--set", ev.set, "Which split to evaluate")
      ->check(CLI::IsMember({"test", "validation", "train", "all"}));
  eval->add_option("--plots", ev.plots, "Number of samples to plot")->check(CLI::NonNegativeNumber);
  eval->add_option("--plot-index", ev.plot_index, "Dataset indices to plot")->delimiter(',');
  eval->add_option("--config", ev.config, "JSON file with option overrides");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*generate) return run_generate(gen, args);
    if (*train) return run_train(tr, args);
    if (*eval) return run_eval(ev, args);
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 2;
}
