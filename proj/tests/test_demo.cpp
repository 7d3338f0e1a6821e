#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "rilco/demo.hpp"
#include "rilco/errors.hpp"
#include "rilco/kernels.hpp"
#include "rilco/verify.hpp"

using namespace rilco;

namespace {

struct Bench {
  MdpSpec mdp = make_gridworld(5, 0.1, 0.95);
  std::vector<TabularPolicy> snaps = snapshot_policies(mdp, default_temperatures());
};

const Bench& bench() {
  static const Bench b;
  return b;
}

DemoDataset numbered(std::size_t n) {
  DemoDataset d;
  for (std::size_t i = 0; i < n; ++i) d.samples.push_back({static_cast<int>(i), 0});
  return d;
}

}  // namespace

TEST(Demo, NonexpertCounts) {
  EXPECT_EQ(nonexpert_count(10000, 0.0), 0u);
  EXPECT_EQ(nonexpert_count(10000, 0.1), 1000u);
  EXPECT_EQ(nonexpert_count(10000, 0.2), 2500u);
  EXPECT_EQ(nonexpert_count(10000, 0.3), 5000u);
  EXPECT_EQ(nonexpert_count(10000, 0.4), 7500u);
  EXPECT_EQ(nonexpert_count(10000, 0.15), 1750u);
  EXPECT_THROW(nonexpert_count(10, 0.5), DomainError);
  EXPECT_THROW(nonexpert_count(10, -0.1), DomainError);
}

TEST(Demo, FullScaleCountsAndAlpha) {
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 10000, 0.4, 1);
  EXPECT_EQ(g.dataset.size(), 17500u);
  EXPECT_EQ(std::count(g.provenance.tags.begin(), g.provenance.tags.end(), 0), 10000);
  EXPECT_NEAR(1.0 - g.provenance.true_alpha(), 7500.0 / 17500.0, 1e-15);

  const double alphas[] = {1.0, 10.0 / 11.0, 0.8, 2.0 / 3.0, 4.0 / 7.0};
  const double deltas[] = {0.0, 0.1, 0.2, 0.3, 0.4};
  for (int i = 0; i < 5; ++i) {
    const auto h = generate_noisy_dataset(bench().mdp, bench().snaps, 1000, deltas[i], 2);
    EXPECT_NEAR(h.provenance.true_alpha(), alphas[i], 1e-12) << deltas[i];
  }
}

TEST(Demo, CleanDatasetIsAllExpert) {
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 10000, 0.0, 3);
  EXPECT_EQ(g.dataset.size(), 10000u);
  for (int t : g.provenance.tags) EXPECT_EQ(t, 0);
}

TEST(Demo, NonexpertSnapshotsUsedUniformly) {
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 20000, 0.4, 4);
  std::vector<int> counts(6, 0);
  for (int t : g.provenance.tags) ++counts[t];
  const double expected = 15000.0 / 5.0;
  const double sd = std::sqrt(15000.0 * 0.2 * 0.8);
  for (int k = 1; k <= 5; ++k) EXPECT_LT(std::fabs(counts[k] - expected), 4.0 * sd) << k;
}

TEST(Demo, HistogramMatchesMixtureDensity) {
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 80000, 0.2, 5);
  ASSERT_EQ(g.dataset.size(), 100000u);
  const Table h = histogram(g.dataset.samples, 25, 4);
  const auto rho = generating_density(bench().mdp, bench().snaps, g.provenance.true_alpha());
  EXPECT_LT(total_variation(h, rho.density), 0.02);
}

TEST(Demo, GeneratingDensityIsTheMixture) {
  const auto& b = bench();
  const auto rho = generating_density(b.mdp, b.snaps, 0.8);
  const auto e = occupancy_exact(b.mdp, b.snaps[0], NormalizationMode::finite_horizon);
  for (int s = 0; s < 25; ++s) {
    for (int a = 0; a < 4; ++a) {
      double n = 0.0;
      for (int k = 1; k <= 5; ++k) {
        n += occupancy_exact(b.mdp, b.snaps[k], NormalizationMode::finite_horizon).density(s, a);
      }
      EXPECT_NEAR(rho.density(s, a), 0.8 * e.density(s, a) + 0.2 * n / 5.0, 1e-15);
    }
  }
}

TEST(Demo, Deterministic) {
  const auto a = generate_noisy_dataset(bench().mdp, bench().snaps, 500, 0.3, 9);
  const auto b = generate_noisy_dataset(bench().mdp, bench().snaps, 500, 0.3, 9);
  EXPECT_EQ(a.dataset.samples, b.dataset.samples);
  EXPECT_EQ(a.provenance.tags, b.provenance.tags);
  const auto c = generate_noisy_dataset(bench().mdp, bench().snaps, 500, 0.3, 10);
  EXPECT_NE(a.dataset.samples, c.dataset.samples);
}

TEST(Demo, TwoSeedsSameMarginals) {
  const auto a = generate_noisy_dataset(bench().mdp, bench().snaps, 40000, 0.2, 11);
  const auto b = generate_noisy_dataset(bench().mdp, bench().snaps, 40000, 0.2, 12);
  EXPECT_NE(a.dataset.samples, b.dataset.samples);
  EXPECT_LT(total_variation(histogram(a.dataset.samples, 25, 4), histogram(b.dataset.samples, 25, 4)),
            0.03);
}

TEST(Demo, RejectsBadParameters) {
  EXPECT_THROW(generate_noisy_dataset(bench().mdp, bench().snaps, 100, 0.5, 1), DomainError);
  EXPECT_THROW(generate_noisy_dataset(bench().mdp, bench().snaps, 0, 0.1, 1), DomainError);
  const std::vector<TabularPolicy> only_expert{bench().snaps[0]};
  EXPECT_THROW(generate_noisy_dataset(bench().mdp, only_expert, 100, 0.2, 1), DomainError);
  EXPECT_NO_THROW(generate_noisy_dataset(bench().mdp, only_expert, 100, 0.0, 1));
}

TEST(Split, SizesDisjointUnion) {
  for (std::size_t n : {10u, 11u, 2u, 1001u}) {
    const DemoDataset d = numbered(n);
    const SplitDataset s = split_dataset(d, 7);
    EXPECT_EQ(s.d1.size(), n / 2);
    EXPECT_EQ(s.d2.size(), n - n / 2);
    std::set<std::size_t> all(s.parent1.begin(), s.parent1.end());
    for (std::size_t i : s.parent2) EXPECT_TRUE(all.insert(i).second) << "overlap at " << i;
    EXPECT_EQ(all.size(), n);
    for (std::size_t i = 0; i < s.d1.size(); ++i) EXPECT_EQ(s.d1.samples[i], d.samples[s.parent1[i]]);
    for (std::size_t i = 0; i < s.d2.size(); ++i) EXPECT_EQ(s.d2.samples[i], d.samples[s.parent2[i]]);
  }
  EXPECT_THROW(split_dataset(numbered(1), 1), DomainError);
}

TEST(Split, HalvesKeepExpertFraction) {
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 6000, 0.4, 13);
  ASSERT_EQ(g.dataset.size(), 10500u);
  const SplitDataset s = split_dataset(g.dataset, 14);
  for (const auto* parent : {&s.parent1, &s.parent2}) {
    double expert = 0.0;
    for (std::size_t i : *parent) expert += g.provenance.is_expert(i) ? 1.0 : 0.0;
    EXPECT_LT(std::fabs(expert / parent->size() - g.provenance.true_alpha()), 0.02);
  }
}

TEST(Minibatch, SizesAndDeterminism) {
  const DemoDataset d = numbered(5000);
  const Minibatch m = sample_minibatch(d, 640, 1, 0);
  EXPECT_EQ(m.samples.size(), 640u);
  for (std::size_t i = 0; i < m.samples.size(); ++i) EXPECT_EQ(m.samples[i], d.samples[m.indices[i]]);
  EXPECT_EQ(sample_minibatch(d, 640, 1, 0).indices, m.indices);
  EXPECT_NE(sample_minibatch(d, 640, 1, 1).indices, m.indices);

  const DemoDataset one = numbered(1);
  const Minibatch single = sample_minibatch(one, 1, 3, 3);
  ASSERT_EQ(single.samples.size(), 1u);
  EXPECT_EQ(single.samples[0], one.samples[0]);
  EXPECT_THROW(sample_minibatch(DemoDataset{}, 1, 1, 1), DomainError);
}

TEST(Minibatch, UniformWithReplacement) {
  const DemoDataset d = numbered(10);
  std::vector<double> counts(10, 0.0);
  constexpr int draws = 1000000;
  for (int c = 0; c < 100; ++c) {
    for (std::size_t i : sample_minibatch(d, draws / 100, 42, c).indices) counts[i] += 1.0;
  }
  const double mean = draws / 10.0;
  const double sd = std::sqrt(draws * 0.1 * 0.9);
  for (double c : counts) EXPECT_LT(std::fabs(c - mean), 3.0 * sd);
}

TEST(DemoFiles, RoundTrip) {
  const auto dir = std::filesystem::temp_directory_path() / "rilco_demo_files";
  std::filesystem::create_directories(dir);
  const auto g = generate_noisy_dataset(bench().mdp, bench().snaps, 300, 0.2, 21);
  const auto path = dir / "demo.txt";
  save_dataset(path, g.dataset);
  save_provenance(provenance_path(path), g.provenance);
  const DemoDataset back = load_dataset(path);
  EXPECT_EQ(back.samples, g.dataset.samples);
  EXPECT_EQ(back.declared_noise_rate, 0.2);
  EXPECT_EQ(back.seed, 21u);
  EXPECT_EQ(load_provenance(provenance_path(path)).tags, g.provenance.tags);

  std::ifstream in(path);
  std::string header;
  std::getline(in, header);
  EXPECT_EQ(header, "ril-demo v1 n=375 delta=0.2 seed=21");
  std::filesystem::remove_all(dir);
}
