#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "mecalloc/model.hpp"

namespace mecalloc {

enum class VarKind { kBinary, kContinuous };

// Role of a variable in the placement model; drives branching order.
enum class VarRole { kY, kX, kTheta, kF, kOther };

struct Variable {
  std::string name;
  VarKind kind = VarKind::kContinuous;
  VarRole role = VarRole::kOther;
  double lower = 0.0;
  double upper = 0.0;
};

enum class Sense { kLe, kGe, kEq };

// Constraint family, one per equation group of the model.
enum class RowFamily {
  kCpu,
  kStorage,
  kSingleHost,
  kCoverage,
  kFreqLower,
  kFreqUpper,
  kUplink,
  kFronthaul,
  kThetaX,
  kThetaY,
  kThetaXY,
  kBackhaul,
  kOther,
};

struct Row {
  std::string name;
  RowFamily family = RowFamily::kOther;
  std::vector<int> index;
  std::vector<double> coef;
  Sense sense = Sense::kLe;
  double rhs = 0.0;
};

struct XVar {
  int resource = 0;
  int service = 0;
  int var = 0;
};

// Linear model with maximisation objective. Generic enough for the LP core
// and the LP writer; the index tables are filled by build_milp() only.
struct MilpModel {
  std::vector<Variable> variables;
  std::vector<Row> rows;
  std::vector<double> objective;  // dense, one entry per variable
  double objective_offset = 0.0;

  int num_resources = 0;
  int num_services = 0;
  int num_hosts = 0;
  std::vector<int> y_var;       // [m * S + j]
  std::vector<XVar> x_vars;     // service-major, resource ascending
  std::vector<int> theta_var;   // [x_vars position * H + m]
  std::vector<int> f_var;       // [i]

  int num_variables() const { return static_cast<int>(variables.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_binaries() const;

  int add_variable(std::string name, VarKind kind, VarRole role, double lower, double upper,
                   double obj = 0.0);
  void add_row(Row row);

  // -1 when (i, j) is not an eligible pair.
  int x_var(int i, int j) const;

  // Row activity a_r . values.
  double activity(const Row& r, std::span<const double> values) const;
  double objective_value(std::span<const double> values) const;
  // Largest scaled violation of rows and bounds at `values`.
  double max_violation(std::span<const double> values) const;

 private:
  std::vector<std::vector<std::pair<int, int>>> x_lookup_;  // per service: (resource, var)
  friend MilpModel build_milp(const Scenario& s, Requests req);
};

// Placement model with the product linearisation:
//   x_ij (eligible pairs only), y_mj, theta_mij (eligible pairs x hosts),
//   f_i in [0, max_j lambda_j];
//   rows: CPU, storage, single host, per-cell coverage, both frequency
//   bounds, uplink, fronthaul, the three theta rows and the linear backhaul.
MilpModel build_milp(const Scenario& s, Requests req);

// MILP point for an allocation, theta_mij := x_ij * y_mj.
std::vector<double> milp_point(const MilpModel& m, const Allocation& a);

// Rounds the binary part of a MILP point; f is copied from the point.
Allocation allocation_from_point(const MilpModel& m, std::span<const double> values);

// CPLEX LP text format. One line per constraint in the Subject To section.
std::string lp_text(const MilpModel& m);
void export_lp(const MilpModel& m, const std::filesystem::path& path);

}  // namespace mecalloc
