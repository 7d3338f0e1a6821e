#include "rilco/demo.hpp"

#include <array>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <string>

#include "rilco/errors.hpp"
#include "rilco/io.hpp"
#include "rilco/rng.hpp"

namespace rilco {

double Provenance::true_alpha() const {
  if (tags.empty()) return 0.0;
  std::size_t expert = 0;
  for (int t : tags) expert += (t == 0) ? 1 : 0;
  return static_cast<double>(expert) / static_cast<double>(tags.size());
}

std::size_t nonexpert_count(std::size_t n_expert, double delta) {
  if (!(delta >= 0.0 && delta < 0.5)) throw DomainError("noise rate must lie in [0, 0.5)");
  static constexpr std::array<double, 6> knots{0.0, 0.1, 0.25, 0.5, 0.75, 1.0};
  const double pos = delta / 0.1;
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const double frac = pos - static_cast<double>(lo);
  const double f = lo + 1 < knots.size() ? knots[lo] + frac * (knots[lo + 1] - knots[lo])
                                         : knots.back();
  return static_cast<std::size_t>(std::llround(f * static_cast<double>(n_expert)));
}

GeneratedDemos generate_noisy_dataset(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                                      std::size_t n_expert, double delta,
                                      std::uint64_t rng_seed) {
  if (n_expert < 1) throw DomainError("n_expert must be >= 1");
  const std::size_t n_non = nonexpert_count(n_expert, delta);
  if (n_non >= n_expert) {
    throw DomainError("expert fraction must exceed 1/2 (alpha > 0.5)");
  }
  if (n_non > 0 && snapshots.size() < 2) {
    throw DomainError("noisy datasets need at least one non-expert snapshot");
  }
  if (snapshots.empty()) throw DomainError("need the expert snapshot");

  Rng rng(rng_seed);
  GeneratedDemos out;
  out.dataset.declared_noise_rate = delta;
  out.dataset.seed = rng_seed;
  const std::size_t n = n_expert + n_non;
  out.dataset.samples.reserve(n);
  out.provenance.tags.reserve(n);
  for (std::size_t i = 0; i < n_expert; ++i) {
    out.dataset.samples.push_back(sample_occupancy_pair(mdp, snapshots[0], rng));
    out.provenance.tags.push_back(0);
  }
  const std::size_t n_snap = snapshots.size() - 1;
  for (std::size_t i = 0; i < n_non; ++i) {
    const auto k = 1 + static_cast<int>(rng.below(n_snap));
    out.dataset.samples.push_back(sample_occupancy_pair(mdp, snapshots[k], rng));
    out.provenance.tags.push_back(k);
  }

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order.begin(), order.end());
  GeneratedDemos shuffled;
  shuffled.dataset.declared_noise_rate = delta;
  shuffled.dataset.seed = rng_seed;
  shuffled.dataset.samples.reserve(n);
  shuffled.provenance.tags.reserve(n);
  for (std::size_t i : order) {
    shuffled.dataset.samples.push_back(out.dataset.samples[i]);
    shuffled.provenance.tags.push_back(out.provenance.tags[i]);
  }
  return shuffled;
}

StateActionDensity generating_density(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                                      double alpha) {
  const auto mode = NormalizationMode::finite_horizon;
  StateActionDensity rho = occupancy_exact(mdp, snapshots[0], mode);
  for (double& x : rho.density.flat()) x *= alpha;
  if (snapshots.size() > 1) {
    const double w = (1.0 - alpha) / static_cast<double>(snapshots.size() - 1);
    for (std::size_t k = 1; k < snapshots.size(); ++k) {
      const StateActionDensity rk = occupancy_exact(mdp, snapshots[k], mode);
      for (std::size_t i = 0; i < rho.density.size(); ++i) {
        rho.density.flat()[i] += w * rk.density.flat()[i];
      }
    }
  }
  return rho;
}

SplitDataset split_dataset(const DemoDataset& d, std::uint64_t rng_seed) {
  if (d.size() < 2) throw DomainError("split needs at least two samples");
  std::vector<std::size_t> order(d.size());
  std::iota(order.begin(), order.end(), 0);
  Rng rng(rng_seed);
  rng.shuffle(order.begin(), order.end());
  const std::size_t half = d.size() / 2;

  SplitDataset out;
  out.d1.declared_noise_rate = out.d2.declared_noise_rate = d.declared_noise_rate;
  out.d1.seed = out.d2.seed = d.seed;
  out.parent1.assign(order.begin(), order.begin() + half);
  out.parent2.assign(order.begin() + half, order.end());
  for (std::size_t i : out.parent1) out.d1.samples.push_back(d.samples[i]);
  for (std::size_t i : out.parent2) out.d2.samples.push_back(d.samples[i]);
  return out;
}

Minibatch sample_minibatch(const DemoDataset& d, std::size_t size, std::uint64_t rng_seed,
                           std::uint64_t counter) {
  if (d.samples.empty()) throw DomainError("cannot sample from an empty dataset");
  if (size < 1) throw DomainError("minibatch size must be >= 1");
  Rng rng = Rng::stream(rng_seed, counter);
  Minibatch b;
  b.samples.reserve(size);
  b.indices.reserve(size);
  for (std::size_t i = 0; i < size; ++i) {
    const auto j = static_cast<std::size_t>(rng.below(d.size()));
    b.indices.push_back(j);
    b.samples.push_back(d.samples[j]);
  }
  return b;
}

Table histogram(std::span<const StateAction> samples, int n_states, int n_actions) {
  Table h(n_states, n_actions);
  if (samples.empty()) return h;
  const double w = 1.0 / static_cast<double>(samples.size());
  for (const auto& x : samples) h(x.state, x.action) += w;
  return h;
}

void save_dataset(const std::filesystem::path& path, const DemoDataset& d) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ril-demo v1 n=" << d.size() << " delta=" << format_double(d.declared_noise_rate)
      << " seed=" << d.seed << '\n';
  for (const auto& x : d.samples) out << x.state << ',' << x.action << '\n';
}

namespace {

std::string header_field(const std::string& tok, const std::string& key) {
  if (tok.rfind(key + "=", 0) != 0) {
    throw InvariantError("document layout", "expected '" + key + "=' in header, got '" + tok + "'");
  }
  return tok.substr(key.size() + 1);
}

}  // namespace

DemoDataset load_dataset(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string header;
  std::getline(in, header);
  std::istringstream hs(header);
  std::string magic, version, n_tok, delta_tok, seed_tok;
  hs >> magic >> version >> n_tok >> delta_tok >> seed_tok;
  if (magic != "ril-demo" || version != "v1") {
    throw InvariantError("document layout", "not a ril-demo v1 file");
  }
  DemoDataset d;
  const long long n = parse_int(header_field(n_tok, "n"));
  d.declared_noise_rate = parse_double(header_field(delta_tok, "delta"));
  d.seed = static_cast<std::uint64_t>(parse_int(header_field(seed_tok, "seed")));
  if (n < 0) throw InvariantError("sample count is non-negative", n_tok);
  d.samples.reserve(static_cast<std::size_t>(n));
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvariantError("sample line is state,action", line);
    const auto s = parse_int(std::string_view(line).substr(0, comma));
    const auto a = parse_int(std::string_view(line).substr(comma + 1));
    d.samples.push_back({static_cast<int>(s), static_cast<int>(a)});
  }
  if (d.samples.size() != static_cast<std::size_t>(n)) {
    throw InvariantError("sample count matches header",
                         std::to_string(d.samples.size()) + " != " + std::to_string(n));
  }
  return d;
}

std::filesystem::path provenance_path(const std::filesystem::path& dataset_path) {
  std::filesystem::path p = dataset_path;
  p += ".provenance";
  return p;
}

void save_provenance(const std::filesystem::path& path, const Provenance& p) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "ril-provenance v1 n=" << p.tags.size() << '\n';
  for (int t : p.tags) {
    if (t == 0) {
      out << "expert\n";
    } else {
      out << "nonexpert:" << t << '\n';
    }
  }
}

Provenance load_provenance(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path.string());
  std::string magic, version, n_tok;
  in >> magic >> version >> n_tok;
  if (magic != "ril-provenance" || version != "v1") {
    throw InvariantError("document layout", "not a ril-provenance v1 file");
  }
  const long long n = parse_int(header_field(n_tok, "n"));
  Provenance p;
  std::string tok;
  while (in >> tok) {
    if (tok == "expert") {
      p.tags.push_back(0);
    } else if (tok.rfind("nonexpert:", 0) == 0) {
      p.tags.push_back(static_cast<int>(parse_int(std::string_view(tok).substr(10))));
    } else {
      throw InvariantError("provenance tag is expert or nonexpert:<k>", tok);
    }
  }
  if (p.tags.size() != static_cast<std::size_t>(n)) {
    throw InvariantError("tag count matches header", std::to_string(p.tags.size()));
  }
  return p;
}

}  // namespace rilco
