#include "rilco/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <thread>

#include "rilco/demo.hpp"
#include "rilco/errors.hpp"
#include "rilco/io.hpp"
#include "rilco/rng.hpp"

namespace rilco {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(std::string(s.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
  if (v == "true" || v == "1") return true;
  if (v == "false" || v == "0") return false;
  throw ConfigError("boolean value", key + "=" + v);
}

std::size_t parse_size(const std::string& key, const std::string& v) {
  const long long x = parse_int(v);
  if (x < 0) throw ConfigError(key + " >= 0", v);
  return static_cast<std::size_t>(x);
}

int parse_small_int(const std::string& v) { return static_cast<int>(parse_int(v)); }

const char* const kTrainerKeys[] = {
    "method", "loss", "lambda", "batch_b", "batch_u", "batch_v", "k", "classifier_step",
    "weight_decay", "classifier_steps", "rl_mode", "rl_step", "policy_temperature",
    "rl_trajectories", "iterations", "seed", "allow_nonsymmetric", "relaxed_selection",
    "lambda_anneal", "lambda_anneal_start", "lambda_anneal_end", "lambda_anneal_iterations",
};

std::string csv_double(double x) { return std::isnan(x) ? "nan" : format_double(x); }

}  // namespace

KeyValues parse_key_values(std::istream& in) {
  KeyValues kv;
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config lines are key=value", "line " + std::to_string(number) + ": " + t);
    }
    kv[trim(std::string_view(t).substr(0, eq))] = trim(std::string_view(t).substr(eq + 1));
  }
  return kv;
}

KeyValues load_key_values(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config file is readable", path.string());
  return parse_key_values(in);
}

bool is_trainer_key(const std::string& key) {
  return std::find(std::begin(kTrainerKeys), std::end(kTrainerKeys), key) != std::end(kTrainerKeys);
}

void apply_trainer_keys(TrainerConfig& cfg, const KeyValues& kv) {
  try {
    for (const auto& [key, v] : kv) {
      if (key == "method") {
        cfg.method = parse_method(v);
      } else if (key == "loss") {
        cfg.loss = parse_loss(v);
      } else if (key == "lambda") {
        cfg.lambda = parse_double(v);
      } else if (key == "batch_b") {
        cfg.batch_b = parse_size(key, v);
      } else if (key == "batch_u") {
        cfg.batch_u = parse_size(key, v);
      } else if (key == "batch_v") {
        cfg.batch_v = parse_size(key, v);
      } else if (key == "k") {
        cfg.k = parse_size(key, v);
      } else if (key == "classifier_step") {
        cfg.classifier_step = parse_double(v);
      } else if (key == "weight_decay") {
        cfg.weight_decay = parse_double(v);
      } else if (key == "classifier_steps") {
        cfg.classifier_steps = parse_small_int(v);
      } else if (key == "rl_mode") {
        cfg.rl_mode = parse_rl_mode(v);
      } else if (key == "rl_step") {
        cfg.rl_step = parse_double(v);
      } else if (key == "policy_temperature") {
        cfg.policy_temperature = parse_double(v);
      } else if (key == "rl_trajectories") {
        cfg.rl_trajectories = parse_small_int(v);
      } else if (key == "iterations") {
        cfg.iterations = parse_small_int(v);
      } else if (key == "seed") {
        cfg.seed = static_cast<std::uint64_t>(parse_size(key, v));
      } else if (key == "allow_nonsymmetric") {
        cfg.allow_nonsymmetric = parse_bool(key, v);
      } else if (key == "relaxed_selection") {
        cfg.relaxed_selection = parse_bool(key, v);
      } else if (key == "lambda_anneal") {
        if (v != "none") throw ConfigError("lambda_anneal=none", v);
        cfg.lambda_anneal.reset();
      } else if (key == "lambda_anneal_start") {
        cfg.lambda_anneal.emplace(cfg.lambda_anneal.value_or(LambdaAnneal{})).start = parse_double(v);
      } else if (key == "lambda_anneal_end") {
        cfg.lambda_anneal.emplace(cfg.lambda_anneal.value_or(LambdaAnneal{})).end = parse_double(v);
      } else if (key == "lambda_anneal_iterations") {
        cfg.lambda_anneal.emplace(cfg.lambda_anneal.value_or(LambdaAnneal{})).iterations =
            parse_small_int(v);
      } else {
        throw ConfigError("config key is known", key);
      }
    }
  } catch (const DomainError& e) {
    throw ConfigError("config value is valid", e.what());
  } catch (const ConfigError&) {
    throw;
  } catch (const InvariantError& e) {
    throw ConfigError("config value is valid", e.what());
  }
}

Profile parse_profile(std::string_view token) {
  if (token == "desk") return Profile::desk;
  if (token == "paper_faithful" || token == "paper-faithful") {
    return Profile::paper_faithful;
  }
  throw ConfigError("profile is desk or paper_faithful", std::string(token));
}

TrainerConfig profile_config(Profile p) {
  return p == Profile::desk ? TrainerConfig::desk() : TrainerConfig::paper_faithful();
}

TrainerConfig MethodVariant::apply(TrainerConfig cfg) const {
  cfg.method = method;
  if (loss) {
    cfg.loss = *loss;
    if (!loss->is_symmetric()) cfg.allow_nonsymmetric = true;
  }
  return cfg;
}

MethodVariant parse_method_variant(std::string_view token) {
  MethodVariant v;
  const auto colon = token.find(':');
  v.method = parse_method(token.substr(0, colon));
  if (colon != std::string_view::npos) {
    if (v.method != Method::ril_co && v.method != Method::ril_p) {
      throw ConfigError("loss override only on ril-co or ril-p", std::string(token));
    }
    try {
      v.loss = parse_loss(token.substr(colon + 1));
    } catch (const DomainError& e) {
      throw ConfigError("loss is known", e.what());
    }
  }
  v.label = method_token(v.method) + (v.loss ? ":" + v.loss->token() : "");
  return v;
}

void validate(const SweepSpec& spec) {
  if (spec.noise_rates.empty()) throw ConfigError("noise rates non-empty", "none given");
  for (double d : spec.noise_rates) {
    if (!(d >= 0.0 && d < 0.5)) throw ConfigError("noise rates in [0, 0.5)", format_double(d));
  }
  if (spec.methods.empty()) throw ConfigError("methods non-empty", "none given");
  if (spec.seeds.empty()) throw ConfigError("seeds non-empty", "none given");
  if (spec.n_expert < 1) throw ConfigError("n_expert >= 1", "0");
  for (const auto& m : spec.methods) validate(m.apply(spec.base));
}

std::size_t SweepResult::failures() const {
  return static_cast<std::size_t>(
      std::count_if(cells.begin(), cells.end(), [](const SweepCell& c) { return !c.ok; }));
}

unsigned worker_count(unsigned requested) {
  unsigned n = requested != 0 ? requested : std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("RIL_THREADS"); env != nullptr && *env != '\0') {
    try {
      const long long cap = parse_int(env);
      if (cap >= 1) n = std::min<unsigned>(n, static_cast<unsigned>(cap));
    } catch (const InvariantError&) {
      // ignore a malformed cap
    }
  }
  return n;
}

SweepResult run_sweep(const MdpSpec& mdp, const SweepSpec& spec) {
  validate(spec);
  const std::vector<double> temps =
      spec.temperatures.empty()
          ? std::vector<double>(default_temperatures().begin(), default_temperatures().end())
          : spec.temperatures;
  const std::vector<TabularPolicy> snaps = snapshot_policies(mdp, temps);

  // One dataset per (delta, seed), shared by every method.
  const std::size_t nd = spec.noise_rates.size();
  const std::size_t ns = spec.seeds.size();
  std::vector<GeneratedDemos> data(nd * ns);
  std::vector<std::uint64_t> train_seeds(nd * ns);
  for (std::size_t i = 0; i < nd; ++i) {
    for (std::size_t j = 0; j < ns; ++j) {
      // Keyed by the noise rate itself (in millionths), so a (delta, seed) cell is the
      // same in every sweep that contains it.
      const auto delta_key = static_cast<std::uint64_t>(std::llround(spec.noise_rates[i] * 1e6));
      Rng cell = Rng::stream(Rng::stream(spec.master_seed, spec.seeds[j]).next(), delta_key);
      const std::uint64_t data_seed = cell.next();
      train_seeds[i * ns + j] = cell.next();
      data[i * ns + j] =
          generate_noisy_dataset(mdp, snaps, spec.n_expert, spec.noise_rates[i], data_seed);
    }
  }

  SweepResult result;
  result.expert_return = expected_return(mdp, snaps.front());
  for (const auto& m : spec.methods) {
    for (double d : spec.noise_rates) {
      for (std::uint64_t s : spec.seeds) {
        SweepCell cell;
        cell.method = m.label;
        cell.delta = d;
        cell.seed = s;
        result.cells.push_back(std::move(cell));
      }
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t c = next++; c < result.cells.size(); c = next++) {
      SweepCell& cell = result.cells[c];
      const std::size_t slot = c % (nd * ns);
      const MethodVariant& m = spec.methods[c / (nd * ns)];
      try {
        TrainerConfig cfg = m.apply(spec.base);
        cfg.seed = train_seeds[slot];
        EvaluationProbe probe(mdp, snaps, &data[slot].provenance);
        TrainResult r = train(mdp, data[slot].dataset, cfg, &probe);
        cell.final_return = r.record.final_mean_return();
        cell.record = std::move(r.record);
        cell.ok = std::isfinite(cell.final_return);
        if (!cell.ok) cell.error = "non-finite final return";
      } catch (const std::exception& e) {
        cell.ok = false;
        cell.final_return = std::numeric_limits<double>::quiet_NaN();
        cell.error = e.what();
      }
    }
  };
  const unsigned workers =
      std::min<unsigned>(worker_count(spec.threads), static_cast<unsigned>(result.cells.size()));
  {
    std::vector<std::jthread> pool;
    for (unsigned t = 1; t < workers; ++t) pool.emplace_back(worker);
    worker();
  }
  result.aggregates = aggregate(result.cells);
  return result;
}

std::vector<SweepAggregate> aggregate(const std::vector<SweepCell>& cells) {
  std::vector<SweepAggregate> out;
  for (const auto& c : cells) {
    const bool seen = std::any_of(out.begin(), out.end(), [&](const SweepAggregate& a) {
      return a.method == c.method && a.delta == c.delta;
    });
    if (!seen) out.push_back({c.method, c.delta});
  }
  for (auto& a : out) {
    std::vector<double> v;
    for (const auto& c : cells) {
      if (c.ok && c.method == a.method && c.delta == a.delta) v.push_back(c.final_return);
    }
    a.n_seeds = v.size();
    if (v.empty()) {
      a.mean_return = a.stderr_return = std::numeric_limits<double>::quiet_NaN();
      continue;
    }
    double sum = 0.0;
    for (double x : v) sum += x;
    a.mean_return = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - a.mean_return) * (x - a.mean_return);
      a.stderr_return = std::sqrt(ss / static_cast<double>(v.size() - 1)) /
                        std::sqrt(static_cast<double>(v.size()));
    }
  }
  return out;
}

std::string run_file_name(const std::string& method, double delta, std::uint64_t seed) {
  std::string m = method;
  std::replace(m.begin(), m.end(), ':', '_');
  return m + "_d" + format_double(delta) + "_s" + std::to_string(seed) + ".csv";
}

void write_aggregate_csv(std::ostream& out, const std::vector<SweepAggregate>& aggs) {
  out << "method,delta,mean_return,stderr,n_seeds\n";
  for (const auto& a : aggs) {
    out << a.method << ',' << format_double(a.delta) << ',' << csv_double(a.mean_return) << ','
        << csv_double(a.stderr_return) << ',' << a.n_seeds << '\n';
  }
}

void write_sweep_csv(std::ostream& out, const SweepResult& result) {
  out << "kind,method,delta,seed,final_return,stderr,n_seeds,status,file\n";
  for (const auto& c : result.cells) {
    out << "run," << c.method << ',' << format_double(c.delta) << ',' << c.seed << ','
        << csv_double(c.final_return) << ",,1," << (c.ok ? "ok" : "failed") << ','
        << "runs/" << run_file_name(c.method, c.delta, c.seed) << '\n';
  }
  for (const auto& a : result.aggregates) {
    out << "aggregate," << a.method << ',' << format_double(a.delta) << ",,"
        << csv_double(a.mean_return) << ',' << csv_double(a.stderr_return) << ',' << a.n_seeds
        << ",,\n";
  }
}

void write_svg(std::ostream& out, const std::vector<SweepAggregate>& aggs, double expert_return) {
  std::vector<std::string> methods;
  std::vector<double> deltas;
  for (const auto& a : aggs) {
    if (std::find(methods.begin(), methods.end(), a.method) == methods.end()) {
      methods.push_back(a.method);
    }
    if (std::find(deltas.begin(), deltas.end(), a.delta) == deltas.end()) deltas.push_back(a.delta);
  }
  std::sort(deltas.begin(), deltas.end());
  double top = expert_return;
  for (const auto& a : aggs) {
    if (std::isfinite(a.mean_return)) top = std::max(top, a.mean_return + a.stderr_return);
  }
  if (!(top > 0.0)) top = 1.0;
  top *= 1.1;

  static const char* const palette[] = {"#1b9e77", "#d95f02", "#7570b3", "#e7298a",
                                        "#66a61e", "#e6ab02", "#a6761d", "#666666"};
  const double width = 760.0, height = 400.0;
  const double left = 60.0, right = 180.0, top_margin = 30.0, bottom = 50.0;
  const double plot_w = width - left - right, plot_h = height - top_margin - bottom;
  const double group_w = plot_w / static_cast<double>(std::max<std::size_t>(1, deltas.size()));
  const double bar_w = group_w * 0.8 / static_cast<double>(std::max<std::size_t>(1, methods.size()));
  auto y = [&](double v) { return top_margin + plot_h * (1.0 - v / top); };

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
      << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<!-- data\n";
  write_aggregate_csv(out, aggs);
  out << "expert_return," << format_double(expert_return) << "\n-->\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << y(0) << "\" x2=\"" << left + plot_w << "\" y2=\""
      << y(0) << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << left << "\" y1=\"" << top_margin << "\" x2=\"" << left << "\" y2=\""
      << y(0) << "\" stroke=\"black\"/>\n";
  for (int t = 0; t <= 4; ++t) {
    const double v = top * t / 4.0;
    out << "<text x=\"" << left - 6 << "\" y=\"" << y(v) + 4 << "\" text-anchor=\"end\">"
        << std::round(v * 100.0) / 100.0 << "</text>\n";
  }
  out << "<line x1=\"" << left << "\" y1=\"" << y(expert_return) << "\" x2=\"" << left + plot_w
      << "\" y2=\"" << y(expert_return) << "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  for (std::size_t di = 0; di < deltas.size(); ++di) {
    const double gx = left + group_w * static_cast<double>(di) + group_w * 0.1;
    out << "<text x=\"" << gx + group_w * 0.4 << "\" y=\"" << y(0) + 18
        << "\" text-anchor=\"middle\">delta=" << format_double(deltas[di]) << "</text>\n";
    for (std::size_t mi = 0; mi < methods.size(); ++mi) {
      auto it = std::find_if(aggs.begin(), aggs.end(), [&](const SweepAggregate& a) {
        return a.method == methods[mi] && a.delta == deltas[di];
      });
      if (it == aggs.end() || !std::isfinite(it->mean_return)) continue;
      const double x = gx + bar_w * static_cast<double>(mi);
      const double v = std::max(0.0, it->mean_return);
      out << "<rect x=\"" << x << "\" y=\"" << y(v) << "\" width=\"" << bar_w * 0.9
          << "\" height=\"" << y(0) - y(v) << "\" fill=\"" << palette[mi % 8] << "\"/>\n";
      const double cx = x + bar_w * 0.45;
      out << "<line x1=\"" << cx << "\" y1=\"" << y(v + it->stderr_return) << "\" x2=\"" << cx
          << "\" y2=\"" << y(std::max(0.0, v - it->stderr_return)) << "\" stroke=\"black\"/>\n";
    }
  }
  for (std::size_t mi = 0; mi < methods.size(); ++mi) {
    const double ly = top_margin + 18.0 * static_cast<double>(mi);
    out << "<rect x=\"" << left + plot_w + 15 << "\" y=\"" << ly << "\" width=\"12\" height=\"12\""
        << " fill=\"" << palette[mi % 8] << "\"/>\n";
    out << "<text x=\"" << left + plot_w + 32 << "\" y=\"" << ly + 10 << "\">" << methods[mi]
        << "</text>\n";
  }
  out << "<text x=\"" << left << "\" y=\"16\">final mean return (dashed: expert)</text>\n";
  out << "</svg>\n";
}

void write_sweep(const std::filesystem::path& dir, const SweepSpec& spec,
                 const SweepResult& result) {
  std::filesystem::create_directories(dir / "runs");
  for (const auto& c : result.cells) {
    std::ofstream f(dir / "runs" / run_file_name(c.method, c.delta, c.seed));
    if (c.ok) {
      write_record_csv(f, c.record);
    } else {
      f << "error," << c.error << '\n';
    }
  }
  {
    std::ofstream f(dir / "sweep.csv");
    write_sweep_csv(f, result);
  }
  {
    std::ofstream f(dir / "aggregate.csv");
    write_aggregate_csv(f, result.aggregates);
  }
  {
    std::ofstream f(dir / "sweep.svg");
    write_svg(f, result.aggregates, result.expert_return);
  }
  std::ofstream f(dir / "config.txt");
  write_config(f, spec.base);
  f << "methods=";
  for (std::size_t i = 0; i < spec.methods.size(); ++i) {
    f << (i ? "," : "") << spec.methods[i].label;
  }
  f << "\nnoise_rates=";
  for (std::size_t i = 0; i < spec.noise_rates.size(); ++i) {
    f << (i ? "," : "") << format_double(spec.noise_rates[i]);
  }
  f << "\nseeds=";
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) f << (i ? "," : "") << spec.seeds[i];
  f << "\nn_expert=" << spec.n_expert << "\nmaster_seed=" << spec.master_seed << '\n';
}

std::vector<SweepAggregate> recompute_aggregates(const std::filesystem::path& dir) {
  std::ifstream in(dir / "sweep.csv");
  if (!in) throw ConfigError("sweep.csv exists", (dir / "sweep.csv").string());
  std::string line;
  std::getline(in, line);
  std::vector<SweepCell> cells;
  while (std::getline(in, line)) {
    const auto f = split(line, ',');
    if (f.size() < 9 || f[0] != "run") continue;
    SweepCell c;
    c.method = f[1];
    c.delta = parse_double(f[2]);
    c.seed = static_cast<std::uint64_t>(parse_int(f[3]));
    c.ok = f[7] == "ok";
    if (c.ok) {
      std::ifstream run(dir / f[8]);
      if (!run) throw ConfigError("run csv exists", (dir / f[8]).string());
      std::string row;
      c.ok = false;
      while (std::getline(run, row)) {
        if (row.rfind("summary,", 0) == 0) {
          c.final_return = parse_double(split(row, ',')[1]);
          c.ok = true;
        }
      }
    }
    cells.push_back(std::move(c));
  }
  return aggregate(cells);
}

std::vector<SweepAggregate> read_aggregate_csv(std::istream& in) {
  std::vector<SweepAggregate> out;
  std::string line;
  std::getline(in, line);
  auto num = [](const std::string& s) {
    return s == "nan" ? std::numeric_limits<double>::quiet_NaN() : parse_double(s);
  };
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    const auto f = split(line, ',');
    if (f.size() != 5) throw InvariantError("aggregate rows have 5 fields", line);
    out.push_back({f[0], parse_double(f[1]), num(f[2]), num(f[3]),
                   static_cast<std::size_t>(parse_int(f[4]))});
  }
  return out;
}

void write_snapshot_table(std::ostream& out, const MdpSpec& mdp,
                          std::span<const double> temperatures) {
  const auto snaps = snapshot_policies(mdp, temperatures);
  for (std::size_t i = 0; i < snaps.size(); ++i) {
    out << (i == 0 ? "expert" : "snapshot" + std::to_string(i))
        << " temperature=" << format_double(temperatures[i])
        << " return=" << format_double(expected_return(mdp, snaps[i])) << '\n';
  }
}

}  // namespace rilco
