#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "rilco/mdp.hpp"
#include "rilco/table.hpp"

namespace rilco {

/// Unlabeled demonstrations, the only view of the data training code gets.
struct DemoDataset {
  std::vector<StateAction> samples;
  double declared_noise_rate = 0.0;
  std::uint64_t seed = 0;

  std::size_t size() const noexcept { return samples.size(); }
};

/// Hidden per-sample origin of a generated dataset, kept apart from
/// DemoDataset so that no training signature can accept it. tag 0 is the
/// expert, tag k >= 1 is non-expert snapshot k.
struct Provenance {
  std::vector<int> tags;

  bool is_expert(std::size_t i) const { return tags[i] == 0; }
  // #expert / #total
  double true_alpha() const;
};

struct GeneratedDemos {
  DemoDataset dataset;
  Provenance provenance;
};

/// Non-expert count for a given expert count: n_expert * f(delta) with f
/// through (0, 0), (.1, .1), (.2, .25), (.3, .5), (.4, .75), (.5, 1),
/// linear in between, rounded to nearest.
std::size_t nonexpert_count(std::size_t n_expert, double delta);

// snapshots[0] is the expert; the rest are drawn uniformly per sample.
// delta must lie in [0, 0.5) and the resulting expert fraction must exceed 1/2.
GeneratedDemos generate_noisy_dataset(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                                      std::size_t n_expert, double delta, std::uint64_t rng_seed);

// Exact density of the generating process, alpha * rho_E + (1 - alpha) *
// mean_k rho_k, in finite-horizon normalization.
StateActionDensity generating_density(const MdpSpec& mdp, std::span<const TabularPolicy> snapshots,
                                      double alpha);

struct SplitDataset {
  DemoDataset d1;
  DemoDataset d2;
  // parent1[i] is the index in the parent dataset of d1.samples[i].
  std::vector<std::size_t> parent1;
  std::vector<std::size_t> parent2;
};

// Uniformly random disjoint halves, |d1| = floor(n/2). Needs n >= 2.
SplitDataset split_dataset(const DemoDataset& d, std::uint64_t rng_seed);

/// Minibatch drawn with replacement. `indices` point into the dataset the
/// batch was drawn from.
struct Minibatch {
  std::vector<StateAction> samples;
  std::vector<std::size_t> indices;
};

Minibatch sample_minibatch(const DemoDataset& d, std::size_t size, std::uint64_t rng_seed,
                           std::uint64_t counter);

// Empirical (s, a) frequency table.
Table histogram(std::span<const StateAction> samples, int n_states, int n_actions);

/// Dataset file: `ril-demo v1 n=<N> delta=<d> seed=<seed>` then one
/// `state,action` line per sample. Provenance goes to a sidecar
/// (`<file>.provenance`) with header `ril-provenance v1 n=<N>` and one tag per
/// line (`expert` or `nonexpert:<k>`).
void save_dataset(const std::filesystem::path& path, const DemoDataset& d);
DemoDataset load_dataset(const std::filesystem::path& path);
std::filesystem::path provenance_path(const std::filesystem::path& dataset_path);
void save_provenance(const std::filesystem::path& path, const Provenance& p);
Provenance load_provenance(const std::filesystem::path& path);

}  // namespace rilco
