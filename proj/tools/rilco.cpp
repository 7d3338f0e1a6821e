// rilco: command-line front end.
//
// Exit codes: 0 success, 1 check or experiment failure, 2 usage, 3 invariant violation.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "rilco/demo.hpp"
#include "rilco/errors.hpp"
#include "rilco/harness.hpp"
#include "rilco/io.hpp"
#include "rilco/trainer.hpp"
#include "rilco/verify.hpp"

namespace fs = std::filesystem;
using namespace rilco;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;
constexpr int kInvariant = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Trainer flags, stored as raw strings and applied over the config file.
struct TrainerFlags {
  std::string config_path;
  std::string profile = "desk";
  std::map<std::string, std::string> values;
  std::map<std::string, CLI::Option*> options;
  CLI::Option* profile_opt = nullptr;

  void add(CLI::App* app, bool with_method) {
    app->add_option("--config", config_path, "key=value config file")->check(CLI::ExistingFile);
    profile_opt = app->add_option("--profile", profile, "desk or paper_faithful")
        ->check(CLI::IsMember({"desk", "paper_faithful", "paper-faithful"}));
    auto opt = [&](const std::string& key, const std::string& help) {
      std::string flag = "--" + key;
      std::replace(flag.begin(), flag.end(), '_', '-');
      options[key] = app->add_option(flag, values[key], help);
    };
    if (with_method) opt("method", "ril-co, ril-p, gail-logistic, gail-unhinged, gail-ap, bc");
    opt("loss", "logistic, hinge, sigmoid, unhinged, nlogistic, nhinge, ap");
    opt("lambda", "pseudo-label weight in [0, 1]");
    opt("batch_b", "policy batch size");
    opt("batch_u", "U minibatch size");
    opt("batch_v", "V minibatch size");
    opt("k", "pseudo-labels per iteration");
    opt("classifier_step", "classifier gradient step");
    opt("weight_decay", "L2 weight decay on scores");
    opt("classifier_steps", "classifier steps per iteration");
    opt("rl_mode", "exact or reinforce");
    opt("rl_step", "policy step");
    opt("policy_temperature", "softmax temperature of the exact policy step");
    opt("rl_trajectories", "rollouts per iteration in reinforce mode");
    opt("iterations", "training iterations");
    opt("seed", "training seed");
    opt("lambda_anneal_start", "anneal start lambda");
    opt("lambda_anneal_end", "anneal end lambda");
    opt("lambda_anneal_iterations", "anneal ramp length");
    options["allow_nonsymmetric"] =
        app->add_flag("--allow-nonsymmetric", "permit a non-symmetric loss for ril-co / ril-p");
    options["relaxed_selection"] =
        app->add_flag("--relaxed-selection", "pseudo-label candidates with score >= 0 too");
  }

  // Profile, then config file, then flags.
  TrainerConfig resolve(KeyValues* leftovers = nullptr) const {
    TrainerConfig cfg = profile_config(parse_profile(profile));
    KeyValues kv;
    if (!config_path.empty()) kv = load_key_values(config_path);
    if (auto it = kv.find("profile"); it != kv.end()) {
      if (profile_opt->count() == 0) cfg = profile_config(parse_profile(it->second));
      kv.erase(it);
    }
    KeyValues trainer_kv;
    for (const auto& [k, v] : kv) {
      if (is_trainer_key(k)) {
        trainer_kv[k] = v;
      } else if (leftovers != nullptr) {
        (*leftovers)[k] = v;
      } else {
        throw ConfigError("config key is known", k);
      }
    }
    for (const auto& [k, o] : options) {
      if (o == nullptr || o->count() == 0) continue;
      if (k == "allow_nonsymmetric" || k == "relaxed_selection") {
        trainer_kv[k] = "true";
      } else {
        trainer_kv[k] = values.at(k);
      }
    }
    apply_trainer_keys(cfg, trainer_kv);
    return cfg;
  }
};

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream in(s);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

MdpSpec load_env(const std::string& path) {
  if (!fs::exists(path)) throw UsageError("environment file not found: " + path);
  return load_mdp(path);
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw UsageError("cannot write " + path.string());
  out << text;
}

// gen-env ---------------------------------------------------------------

struct GenEnvArgs {
  std::string family;
  int size = 5;
  double slip = 0.1;
  double gamma = 0.95;
  int states = 20;
  int actions = 4;
  int branching = 3;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_env(const GenEnvArgs& a) {
  std::ostringstream comment;
  MdpSpec mdp = [&] {
    if (a.family == "gridworld") {
      comment << "gridworld size=" << a.size << " slip=" << format_double(a.slip)
              << " gamma=" << format_double(a.gamma);
      return make_gridworld(a.size, a.slip, a.gamma);
    }
    comment << "random states=" << a.states << " actions=" << a.actions
            << " branching=" << a.branching << " gamma=" << format_double(a.gamma)
            << " seed=" << a.seed;
    return make_random_mdp(a.states, a.actions, a.branching, a.gamma, a.seed);
  }();
  save_mdp(a.out, mdp, comment.str());
  write_snapshot_table(std::cout, mdp, default_temperatures());
  return kOk;
}

// gen-demos -------------------------------------------------------------

struct GenDemosArgs {
  std::string env;
  double delta = 0.0;
  std::size_t n_expert = 2000;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_gen_demos(const GenDemosArgs& a) {
  const MdpSpec mdp = load_env(a.env);
  const auto snaps = snapshot_policies(mdp, default_temperatures());
  const GeneratedDemos g = generate_noisy_dataset(mdp, snaps, a.n_expert, a.delta, a.seed);
  save_dataset(a.out, g.dataset);
  save_provenance(provenance_path(a.out), g.provenance);
  std::cout << "samples=" << g.dataset.size() << " nonexpert="
            << g.dataset.size() - a.n_expert << " true_alpha=" << format_double(g.provenance.true_alpha())
            << '\n';
  return kOk;
}

// train -----------------------------------------------------------------

struct TrainArgs {
  std::string env;
  std::string data;
  std::string out;
  TrainerFlags flags;
};

int cmd_train(const TrainArgs& a) {
  const TrainerConfig cfg = a.flags.resolve();
  validate(cfg);
  const MdpSpec mdp = load_env(a.env);
  if (!fs::exists(a.data)) throw UsageError("dataset file not found: " + a.data);
  const DemoDataset data = load_dataset(a.data);

  // Evaluation columns only; training never sees the sidecar.
  const auto snaps = snapshot_policies(mdp, default_temperatures());
  std::optional<Provenance> prov;
  if (fs::exists(provenance_path(a.data))) prov = load_provenance(provenance_path(a.data));
  const EvaluationProbe probe(mdp, snaps, prov ? &*prov : nullptr);

  const TrainResult r = train(mdp, data, cfg, &probe);
  fs::create_directories(a.out);
  {
    std::ofstream f(fs::path(a.out) / "record.csv");
    write_record_csv(f, r.record);
  }
  {
    std::ofstream f(fs::path(a.out) / "policy.txt");
    write_policy(f, r.policy);
  }
  {
    std::ofstream f(fs::path(a.out) / "config.txt");
    write_config(f, cfg);
  }
  for (const auto& w : r.record.warnings) std::cerr << "warning: " << w << '\n';
  std::cout << "final_mean_return=" << format_double(r.record.final_mean_return())
            << " expert_return=" << format_double(expected_return(mdp, snaps.front())) << '\n';
  return kOk;
}

// sweep -----------------------------------------------------------------

struct SweepArgs {
  std::string env;
  std::string out;
  std::string methods = "ril-co,gail-logistic";
  std::string deltas;
  std::string seeds;
  std::size_t n_expert = 0;
  std::uint64_t master_seed = 0;
  unsigned threads = 0;
  TrainerFlags flags;
  CLI::Option* methods_opt = nullptr;
  CLI::Option* deltas_opt = nullptr;
  CLI::Option* seeds_opt = nullptr;
  CLI::Option* n_expert_opt = nullptr;
  CLI::Option* master_seed_opt = nullptr;
};

int cmd_sweep(const SweepArgs& a) {
  KeyValues extra;
  SweepSpec spec;
  spec.base = a.flags.resolve(&extra);
  std::string methods = a.methods;
  std::string deltas, seeds;
  for (const auto& [k, v] : extra) {
    if (k == "methods") {
      methods = v;
    } else if (k == "noise_rates") {
      deltas = v;
    } else if (k == "seeds") {
      seeds = v;
    } else if (k == "n_expert") {
      spec.n_expert = static_cast<std::size_t>(parse_int(v));
    } else if (k == "master_seed") {
      spec.master_seed = static_cast<std::uint64_t>(parse_int(v));
    } else {
      throw ConfigError("config key is known", k);
    }
  }
  if (a.methods_opt->count() > 0) methods = a.methods;
  if (a.deltas_opt->count() > 0) deltas = a.deltas;
  if (a.seeds_opt->count() > 0) seeds = a.seeds;
  if (a.n_expert_opt->count() > 0) spec.n_expert = a.n_expert;
  if (a.master_seed_opt->count() > 0) spec.master_seed = a.master_seed;
  spec.threads = a.threads;

  spec.methods.clear();
  for (const auto& m : split_list(methods)) spec.methods.push_back(parse_method_variant(m));
  if (!deltas.empty()) {
    spec.noise_rates.clear();
    for (const auto& d : split_list(deltas)) spec.noise_rates.push_back(parse_double(d));
  }
  if (!seeds.empty()) {
    spec.seeds.clear();
    for (const auto& s : split_list(seeds)) {
      spec.seeds.push_back(static_cast<std::uint64_t>(parse_int(s)));
    }
  }
  validate(spec);
  const MdpSpec mdp = load_env(a.env);
  const SweepResult result = run_sweep(mdp, spec);
  write_sweep(a.out, spec, result);
  write_aggregate_csv(std::cout, result.aggregates);
  for (const auto& c : result.cells) {
    if (!c.ok) {
      std::cerr << "failed: " << c.method << " delta=" << format_double(c.delta)
                << " seed=" << c.seed << ": " << c.error << '\n';
    }
  }
  return result.failures() == 0 ? kOk : kFailure;
}

// verify ----------------------------------------------------------------

struct VerifyArgs {
  std::string env;
  std::string checks;
  std::uint64_t seed = 1;
};

int cmd_verify(const VerifyArgs& a) {
  const MdpSpec mdp = load_env(a.env);
  const auto wanted = split_list(a.checks);
  const auto& all = verification_checks();
  for (const auto& w : wanted) {
    if (std::none_of(all.begin(), all.end(), [&](const RegisteredCheck& c) { return c.name == w; })) {
      throw UsageError("unknown check '" + w + "'");
    }
  }
  std::vector<VerificationReport> reports;
  for (const auto& c : all) {
    if (!wanted.empty() && std::find(wanted.begin(), wanted.end(), c.name) == wanted.end()) {
      continue;
    }
    reports.push_back(c.run({&mdp, a.seed}));
    const auto& r = reports.back();
    std::cout << (r.pass ? "PASS " : "FAIL ") << r.check_name << ": observed "
              << format_double(r.observed) << " threshold " << format_double(r.threshold) << " ("
              << r.details << ")\n"
              << std::flush;
  }
  std::cout << "\ncheck_name,pass,observed,threshold,details\n";
  bool ok = true;
  for (const auto& r : reports) {
    ok = ok && r.pass;
    std::string details = r.details;
    std::replace(details.begin(), details.end(), ',', ';');
    std::cout << r.check_name << ',' << (r.pass ? "true" : "false") << ','
              << format_double(r.observed) << ',' << format_double(r.threshold) << ',' << details
              << '\n';
  }
  return ok ? kOk : kFailure;
}

// report ----------------------------------------------------------------

struct ReportArgs {
  std::string dir;
};

int cmd_report(const ReportArgs& a) {
  const fs::path dir(a.dir);
  const auto aggs = recompute_aggregates(dir);
  std::ostringstream text;
  write_aggregate_csv(text, aggs);
  std::cout << text.str();
  write_file(dir / "report.csv", text.str());

  double expert = 0.0;
  if (fs::exists(dir / "sweep.svg")) {
    std::ifstream svg(dir / "sweep.svg");
    std::string line;
    while (std::getline(svg, line)) {
      if (line.rfind("expert_return,", 0) == 0) expert = parse_double(line.substr(14));
    }
  }
  std::ostringstream svg;
  write_svg(svg, aggs, expert);
  write_file(dir / "report.svg", svg.str());

  if (fs::exists(dir / "aggregate.csv")) {
    std::ifstream in(dir / "aggregate.csv");
    std::stringstream stored;
    stored << in.rdbuf();
    if (stored.str() != text.str()) {
      std::cerr << "aggregate.csv does not match the per-run CSVs\n";
      return kFailure;
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"rilco: robust imitation learning from noisy demonstrations on tabular MDPs"};
  app.require_subcommand(1);

  GenEnvArgs env_args;
  auto* gen_env = app.add_subcommand("gen-env", "write an environment file");
  gen_env->add_option("family", env_args.family, "gridworld or random")
      ->required()
      ->check(CLI::IsMember({"gridworld", "random"}));
  gen_env->add_option("--size", env_args.size, "grid side")->check(CLI::Range(2, 64));
  gen_env->add_option("--slip", env_args.slip, "slip probability")->check(CLI::Range(0.0, 1.0));
  gen_env->add_option("--gamma", env_args.gamma, "discount")->check(CLI::Range(0.0, 0.9999));
  gen_env->add_option("--states", env_args.states, "random family")->check(CLI::Range(1, 10000));
  gen_env->add_option("--actions", env_args.actions, "random family")->check(CLI::Range(1, 1000));
  gen_env->add_option("--branching", env_args.branching, "random family")->check(CLI::PositiveNumber);
  gen_env->add_option("--seed", env_args.seed, "random family seed");
  gen_env->add_option("--out,-o", env_args.out, "output file")->required();

  GenDemosArgs demo_args;
  auto* gen_demos = app.add_subcommand("gen-demos", "sample a noisy demonstration dataset");
  gen_demos->add_option("--env", demo_args.env, "environment file")->required();
  gen_demos->add_option("--delta", demo_args.delta, "noise rate")->check(CLI::Range(0.0, 0.4999999));
  gen_demos->add_option("--n-expert", demo_args.n_expert, "expert samples")->check(CLI::PositiveNumber);
  gen_demos->add_option("--seed", demo_args.seed, "sampling seed");
  gen_demos->add_option("--out,-o", demo_args.out, "dataset file")->required();

  TrainArgs train_args;
  auto* train_cmd = app.add_subcommand("train", "train one method on one dataset");
  train_cmd->add_option("--env", train_args.env, "environment file")->required();
  train_cmd->add_option("--data", train_args.data, "dataset file")->required();
  train_cmd->add_option("--out,-o", train_args.out, "run directory")->required();
  train_args.flags.add(train_cmd, true);

  SweepArgs sweep_args;
  auto* sweep = app.add_subcommand("sweep", "method x noise rate x seed grid");
  sweep->add_option("--env", sweep_args.env, "environment file")->required();
  sweep->add_option("--out,-o", sweep_args.out, "output directory")->required();
  sweep_args.methods_opt =
      sweep->add_option("--methods", sweep_args.methods, "comma list, e.g. ril-co,ril-co:logistic");
  sweep_args.deltas_opt = sweep->add_option("--deltas", sweep_args.deltas, "comma list of noise rates");
  sweep_args.seeds_opt = sweep->add_option("--seeds", sweep_args.seeds, "comma list of seeds");
  sweep_args.n_expert_opt = sweep->add_option("--n-expert", sweep_args.n_expert, "expert samples")
                                ->check(CLI::PositiveNumber);
  sweep_args.master_seed_opt = sweep->add_option("--master-seed", sweep_args.master_seed, "master seed");
  sweep->add_option("--threads", sweep_args.threads, "worker threads (RIL_THREADS caps)");
  sweep_args.flags.add(sweep, false);

  VerifyArgs verify_args;
  auto* verify = app.add_subcommand("verify", "run the verification checks");
  verify->add_option("--env", verify_args.env, "environment file")->required();
  verify->add_option("--checks", verify_args.checks, "comma list; default all");
  verify->add_option("--seed", verify_args.seed, "seed");

  ReportArgs report_args;
  auto* report = app.add_subcommand("report", "recompute aggregates from a sweep directory");
  report->add_option("dir", report_args.dir, "sweep directory")->required()->check(CLI::ExistingDirectory);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (*gen_env) return cmd_gen_env(env_args);
    if (*gen_demos) return cmd_gen_demos(demo_args);
    if (*train_cmd) return cmd_train(train_args);
    if (*sweep) return cmd_sweep(sweep_args);
    if (*verify) return cmd_verify(verify_args);
    if (*report) return cmd_report(report_args);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const InvariantError& e) {
    std::cerr << "error: invariant violated: " << e.what() << '\n';
    return kInvariant;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kInvariant;
  }
  return kUsage;
}
