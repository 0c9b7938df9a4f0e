#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "mecalloc/exact.hpp"
#include "mecalloc/policies.hpp"
#include "mecalloc/scenario.hpp"

namespace mecalloc {

enum class SweepAxis { kServiceCount, kAlpha, kCpuCapacity, kStorageCapacity, kFronthaul, kBackhaul };

std::string_view to_string(SweepAxis a);
SweepAxis parse_axis(std::string_view name);

// Canonical policy names: LR, G-FF, G-BF, DSP, EXACT. Lowercase and
// punctuation-free spellings (lr, gff, g-ff, exact, ...) are accepted.
std::string canonical_policy(std::string_view name);

struct ExperimentConfig {
  std::string name = "experiment";
  std::string preset = "paper-desk";        // paper, paper-desk or tiny
  std::optional<std::string> scenario_file;  // replaces the generated scenario
  SliceCapacities slice = scen_a_slice();    // ignored by the tiny preset
  std::vector<ServiceTemplate> templates = {vr_template(), ac_template()};
  int service_count = 20;
  double alpha = 0.0;
  SweepAxis axis = SweepAxis::kServiceCount;
  std::vector<double> values = {20};  // canonical units for capacities
  std::vector<std::string> policies = {"LR", "G-FF", "G-BF", "DSP"};
  int replications = 10;
  std::uint64_t base_seed = 1;
  double mu = kDefaultMu;
  double exact_time_budget_s = 30.0;
  std::int64_t exact_node_limit = -1;  // set for reproducible exact rows
};

// Throws ConfigError on a violated invariant.
void validate(const ExperimentConfig& cfg);

// JSON with the ExperimentConfig field names. `slice` may be "A", "B" or an
// object with cpu, storage, uplink, backhaul, fronthaul; `templates` entries
// may be "VR", "AC" or full template objects. Throws ConfigError.
ExperimentConfig parse_config(const std::string& json_text);
std::string config_json(const ExperimentConfig& cfg);

// Scenario parameters of a preset with the given slice.
GridParams preset_params(std::string_view preset, const SliceCapacities& slice);

// Seed of replication r; the instance is regenerated from derived sub-seeds
// when terminal placement fails.
std::uint64_t replication_seed(const ExperimentConfig& cfg, int replication);

// The instance of one (axis value, replication) cell of the sweep. The same
// replication shares its scenario and request seeds across axis values.
Instance make_instance(const ExperimentConfig& cfg, double axis_value, int replication,
                       std::ostream* log = nullptr);

struct ExactRun {
  PolicyReport report;
  BnbReport bnb;
};

// Branch-and-bound warm-started from the best of LR, G-BF and DSP, with LR
// rounding of node relaxations as primal heuristic. Runtime includes the
// warm start.
ExactRun run_exact(const Scenario& s, Requests req, double mu, std::uint64_t seed,
                   double time_budget_s, std::int64_t node_limit = -1);

// Runs one policy by canonical name.
PolicyReport run_policy(const std::string& policy, const Scenario& s, Requests req,
                        const ExperimentConfig& cfg, std::uint64_t seed);

struct ResultRow {
  std::string policy;
  std::string axis_name;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  int requests = 0;
  int deployed = 0;
  double deployed_frac = 1.0;  // 1 when nothing was requested
  double deployed_frac_vr = 1.0;
  double deployed_frac_ac = 1.0;
  int rej_cpu = 0;
  int rej_storage = 0;
  int rej_fronthaul = 0;
  int rej_backhaul = 0;
  ObjectiveTerms objective;
  double runtime_s = 0.0;
  std::vector<double> util_uplink;   // per SBS
  std::vector<double> util_cpu;      // per host
  std::vector<double> util_storage;  // per host
  std::vector<double> util_in;       // per host: fronthaul plus backhaul received
  std::vector<double> util_out;      // per host: backhaul sent
  SliceCapacities slice;             // capacities the instance was built with
  std::string exact_status;          // EXACT rows only

  int rejected() const { return rej_cpu + rej_storage + rej_fronthaul + rej_backhaul; }
};

// Throws ContractError if the report's allocation is infeasible.
ResultRow make_row(const Scenario& s, Requests req, const PolicyReport& report);

// Worker count: MEC_ALLOC_THREADS when set and positive, else the hardware
// concurrency.
int thread_count();

// Rows ordered by axis value, replication, then the configured policy order.
std::vector<ResultRow> run_suite(const ExperimentConfig& cfg, std::ostream* log = nullptr);

// One CSV record: identifying columns plus the metric columns in order.
struct Record {
  std::string policy;
  std::string axis_name;
  double axis_value = 0.0;
  std::uint64_t seed = 0;
  std::vector<std::pair<std::string, double>> metrics;
};

Record to_record(const ResultRow& row);

std::string csv_header(int num_sbs, int num_hosts);
std::string rows_csv(const std::vector<ResultRow>& rows);

// Reads a CSV written by rows_csv. Throws ParseError.
std::vector<Record> parse_rows_csv(const std::string& text);

// Shortest text that reads back to the same double.
std::string format_number(double v);

// Nearest-rank percentile, p in (0, 100]. Requires a non-empty sample.
double nearest_rank(std::vector<double> sample, double p);

struct Aggregate {
  std::string policy;
  std::string axis_name;
  double axis_value = 0.0;
  std::string metric;
  int n = 0;
  double mean = 0.0;
  double p5 = 0.0;
  double p95 = 0.0;
};

// Per (policy, axis value) and metric, groups in order of first appearance.
std::vector<Aggregate> summarize(const std::vector<Record>& records);
std::string summary_csv(const std::vector<Aggregate>& aggregates);

}  // namespace mecalloc
