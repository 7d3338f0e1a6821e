#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "rilco/mdp.hpp"
#include "rilco/trainer.hpp"

namespace rilco {

// Flat key=value text; '#' starts a comment line. Later keys overwrite earlier ones.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(std::istream& in);
KeyValues load_key_values(const std::filesystem::path& path);

// Keys are the ones write_config emits. Unknown keys throw ConfigError.
void apply_trainer_keys(TrainerConfig& cfg, const KeyValues& kv);
bool is_trainer_key(const std::string& key);

enum class Profile { desk, paper_faithful };
Profile parse_profile(std::string_view token);
TrainerConfig profile_config(Profile p);

/// A method plus an optional loss override, written "ril-co" or
/// "ril-co:logistic". A loss override on ril-co / ril-p implies
/// allow_nonsymmetric.
struct MethodVariant {
  std::string label;
  Method method = Method::ril_co;
  std::optional<LossSpec> loss;

  TrainerConfig apply(TrainerConfig cfg) const;
};
MethodVariant parse_method_variant(std::string_view token);

struct SweepSpec {
  std::vector<double> noise_rates{0.0, 0.1, 0.2, 0.3, 0.4};
  std::vector<MethodVariant> methods;
  std::vector<std::uint64_t> seeds{1, 2, 3, 4, 5};
  std::size_t n_expert = 2000;
  std::uint64_t master_seed = 1;
  TrainerConfig base;
  std::vector<double> temperatures;  // empty: default ladder
  unsigned threads = 0;              // 0: available parallelism
};

// Throws ConfigError for an invalid spec.
void validate(const SweepSpec& spec);

struct SweepCell {
  std::string method;
  double delta = 0.0;
  std::uint64_t seed = 0;
  double final_return = 0.0;
  bool ok = false;
  std::string error;
  TrainRecord record;
};

struct SweepAggregate {
  std::string method;
  double delta = 0.0;
  double mean_return = 0.0;
  double stderr_return = 0.0;  // sample sd / sqrt(n), over seeds only; 0 for n = 1
  std::size_t n_seeds = 0;
};

struct SweepResult {
  std::vector<SweepCell> cells;  // method-major, then delta, then seed
  std::vector<SweepAggregate> aggregates;
  double expert_return = 0.0;
  std::size_t failures() const;
};

// Worker count: requested (0 = hardware concurrency), capped by RIL_THREADS.
unsigned worker_count(unsigned requested);

// Runs the whole grid. Cells sharing (delta, seed) share one dataset.
SweepResult run_sweep(const MdpSpec& mdp, const SweepSpec& spec);

std::vector<SweepAggregate> aggregate(const std::vector<SweepCell>& cells);

std::string run_file_name(const std::string& method, double delta, std::uint64_t seed);

// sweep.csv, aggregate.csv, sweep.svg and runs/<run>.csv under dir.
void write_sweep(const std::filesystem::path& dir, const SweepSpec& spec,
                 const SweepResult& result);
void write_aggregate_csv(std::ostream& out, const std::vector<SweepAggregate>& aggs);
void write_sweep_csv(std::ostream& out, const SweepResult& result);
void write_svg(std::ostream& out, const std::vector<SweepAggregate>& aggs, double expert_return);

// Rebuilds the aggregates from the run CSVs listed in dir/sweep.csv.
std::vector<SweepAggregate> recompute_aggregates(const std::filesystem::path& dir);
std::vector<SweepAggregate> read_aggregate_csv(std::istream& in);

// Expert and snapshot returns, one line each.
void write_snapshot_table(std::ostream& out, const MdpSpec& mdp,
                          std::span<const double> temperatures);

}  // namespace rilco
