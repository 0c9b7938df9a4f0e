#include <exception>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mecalloc/errors.hpp"
#include "mecalloc/harness.hpp"
#include "mecalloc/milp.hpp"
#include "mecalloc/scenario_io.hpp"

namespace {

using namespace mecalloc;
using json = nlohmann::json;

constexpr int kUsageError = 1;
constexpr int kRuntimeError = 2;

// Usage problems detected after CLI11 parsing.
struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

std::vector<ServiceTemplate> parse_templates(const std::string& list) {
  std::vector<ServiceTemplate> out;
  for (const std::string& n : split_list(list)) {
    if (n == "VR") out.push_back(vr_template());
    else if (n == "AC") out.push_back(ac_template());
    else throw UsageError("unknown template '" + n + "' (expected VR or AC)");
  }
  return out;
}

SliceCapacities parse_slice(const std::string& name) {
  if (name == "A") return scen_a_slice();
  if (name == "B") return scen_b_slice();
  throw UsageError("unknown slice '" + name + "' (expected A or B)");
}

void emit(const std::string& text, const std::string& path) {
  if (path.empty() || path == "-") {
    std::cout << text;
  } else {
    write_text_file(path, text);
  }
}

Instance load_instance(const std::vector<std::string>& files) {
  if (files.empty() || files.size() > 2) {
    throw UsageError("expected a scenario file and an optional requests file");
  }
  InstanceFile first = read_instance(files[0]);
  if (!first.scenario) throw ParseError(files[0] + ": no scenario");
  Instance in{std::move(*first.scenario), {}};
  if (files.size() == 2) {
    InstanceFile second = read_instance(files[1], &in.scenario);
    if (!second.requests) throw ParseError(files[1] + ": no requests");
    in.requests = std::move(*second.requests);
  } else if (first.requests) {
    in.requests = std::move(*first.requests);
  } else {
    throw ParseError(files[0] + ": no requests and no requests file given");
  }
  return in;
}

json report_json(const Scenario& s, Requests req, const PolicyReport& r,
                 const std::optional<BnbReport>& bnb) {
  json j;
  j["policy"] = r.policy;
  j["requests"] = req.size();
  j["deployed"] = r.deployed();
  j["J_r"] = r.objective.j_r;
  j["J_edge"] = r.objective.j_edge;
  j["J"] = r.objective.j;
  j["runtime_s"] = r.runtime_s;
  j["feasible"] = check_feasibility(s, req, r.allocation).empty();
  json services = json::array();
  for (std::size_t k = 0; k < req.size(); ++k) {
    const int jj = static_cast<int>(k);
    json sv{{"id", req[k].id}, {"class", req[k].class_tag},
            {"deployed", r.outcomes[k].deployed}};
    if (r.outcomes[k].deployed) {
      sv["host"] = r.allocation.host_of(jj);
      sv["resources"] = r.allocation.resources_of(jj);
    } else {
      sv["cause"] = std::string(to_string(r.outcomes[k].cause));
    }
    services.push_back(std::move(sv));
  }
  j["services"] = std::move(services);
  if (bnb) {
    j["exact"] = {{"status", std::string(to_string(bnb->status))},
                  {"best_bound", bnb->best_bound},
                  {"root_bound", bnb->root_bound},
                  {"gap", bnb->gap},
                  {"nodes", bnb->nodes_explored},
                  {"lp_iterations", bnb->lp_iterations}};
  }
  return j;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Joint service placement and sensing-resource allocation for MEC-assisted IoT"};
  app.require_subcommand(1);

  // generate
  auto* gen = app.add_subcommand("generate", "Generate a scenario and service requests");
  std::string preset = "paper-desk";
  std::uint64_t seed = 1;
  std::string out_path;
  std::string requests_path;
  std::string slice_name = "A";
  int services = 20;
  double alpha = 0.0;
  std::string templates = "VR,AC";
  gen->add_option("--preset", preset, "paper, paper-desk or tiny")
      ->check(CLI::IsMember({"paper", "paper-desk", "tiny"}));
  gen->add_option("--seed", seed, "Base seed");
  gen->add_option("-o,--output", out_path, "Output file (scenario, and requests unless -r)")
      ->required();
  gen->add_option("-r,--requests-output", requests_path, "Separate requests file");
  gen->add_option("--slice", slice_name, "Capacity slice A or B");
  gen->add_option("-n,--services", services, "Number of service requests")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--alpha", alpha, "Zipf exponent of scope popularity")
      ->check(CLI::NonNegativeNumber);
  gen->add_option("--templates", templates, "Request catalog, comma-separated (VR, AC)");

  // solve
  auto* solve = app.add_subcommand("solve", "Run one policy on an instance");
  std::string policy = "LR";
  double mu = kDefaultMu;
  double budget = 60.0;
  std::int64_t node_limit = -1;
  std::string lp_path;
  std::vector<std::string> files;
  solve->add_option("--policy", policy, "lr, gff, gbf, dsp or exact");
  solve->add_option("--mu", mu, "Rounding threshold")->check(CLI::Range(0.0, 1.0));
  solve->add_option("--seed", seed, "Seed of randomized visiting orders");
  solve->add_option("--budget", budget, "Exact solver time budget in seconds");
  solve->add_option("--node-limit", node_limit, "Exact solver node limit");
  solve->add_option("--export-lp", lp_path, "Also write the MILP in LP format");
  solve->add_option("-o,--output", out_path, "Report file (default stdout)");
  solve->add_option("files", files, "Scenario file [requests file]")->required()->expected(1, 2);

  // compare
  auto* compare = app.add_subcommand("compare", "Run several policies on one instance");
  std::string policies = "LR,G-FF,G-BF,DSP";
  compare->add_option("--policies", policies, "Policies to run, comma-separated");
  compare->add_option("--mu", mu, "Rounding threshold")->check(CLI::Range(0.0, 1.0));
  compare->add_option("--seed", seed, "Seed of randomized visiting orders");
  compare->add_option("--budget", budget, "Exact solver time budget in seconds");
  compare->add_option("--node-limit", node_limit, "Exact solver node limit");
  compare->add_option("-o,--output", out_path, "CSV file (default stdout)");
  compare->add_option("files", files, "Scenario file [requests file]")->required()->expected(1, 2);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run an experiment sweep from a JSON config");
  std::string config_path;
  std::string summary_path;
  sweep->add_option("-c,--config", config_path, "Experiment config (JSON)")->required();
  sweep->add_option("-o,--output", out_path, "Row CSV (default stdout)");
  sweep->add_option("-s,--summary", summary_path, "Also write the summary CSV here");

  // report
  auto* report = app.add_subcommand("report", "Summarize a sweep CSV: mean, p5, p95");
  std::string csv_path;
  report->add_option("csv", csv_path, "Row CSV written by sweep")->required();
  report->add_option("-o,--output", out_path, "Summary CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }

  try {
    if (*gen) {
      ExperimentConfig cfg;
      cfg.preset = preset;
      cfg.slice = parse_slice(slice_name);
      cfg.templates = parse_templates(templates);
      cfg.service_count = services;
      cfg.alpha = alpha;
      cfg.base_seed = seed;
      cfg.values = {static_cast<double>(services)};
      const Instance in = make_instance(cfg, cfg.values[0], 0, &std::cerr);
      if (requests_path.empty()) {
        write_instance(out_path, &in.scenario, &in.requests);
      } else {
        write_instance(out_path, &in.scenario, nullptr);
        write_instance(requests_path, nullptr, &in.requests);
      }
      std::cerr << "cells=" << in.scenario.num_cells() << " sbs=" << in.scenario.num_sbs()
                << " hosts=" << in.scenario.num_hosts()
                << " terminals=" << in.scenario.num_terminals()
                << " services=" << in.requests.size() << "\n";
      return 0;
    }

    if (*solve || *compare) {
      std::vector<std::string> names;
      try {
        if (*solve) names = {canonical_policy(policy)};
        else for (const std::string& p : split_list(policies)) names.push_back(canonical_policy(p));
      } catch (const ConfigError& e) {
        throw UsageError(e.what());
      }
      const Instance in = load_instance(files);
      ExperimentConfig cfg;
      cfg.mu = mu;
      cfg.exact_time_budget_s = budget;
      cfg.exact_node_limit = node_limit;
      if (*solve) {
        if (!lp_path.empty()) export_lp(build_milp(in.scenario, in.requests), lp_path);
        std::optional<BnbReport> bnb;
        PolicyReport r;
        if (names[0] == "EXACT") {
          ExactRun e = run_exact(in.scenario, in.requests, mu, seed, budget, node_limit);
          r = std::move(e.report);
          bnb = e.bnb;
        } else {
          r = run_policy(names[0], in.scenario, in.requests, cfg, seed);
        }
        emit(report_json(in.scenario, in.requests, r, bnb).dump(2) + "\n", out_path);
        return 0;
      }
      std::vector<ResultRow> rows;
      for (const std::string& p : names) {
        ResultRow row = make_row(in.scenario, in.requests,
                                 run_policy(p, in.scenario, in.requests, cfg, seed));
        row.axis_name = "instance";
        row.seed = seed;
        rows.push_back(std::move(row));
      }
      emit(rows_csv(rows), out_path);
      return 0;
    }

    if (*sweep) {
      const ExperimentConfig cfg = parse_config(read_text_file(config_path));
      const std::vector<ResultRow> rows = run_suite(cfg, &std::cerr);
      const std::string csv = rows_csv(rows);
      emit(csv, out_path);
      if (!summary_path.empty()) {
        write_text_file(summary_path, summary_csv(summarize(parse_rows_csv(csv))));
      }
      return 0;
    }

    if (*report) {
      emit(summary_csv(summarize(parse_rows_csv(read_text_file(csv_path)))), out_path);
      return 0;
    }
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n" << app.help();
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kUsageError;
}
