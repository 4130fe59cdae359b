#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

namespace emod {

/// N: one row per case, one column per operation (dictionary order).
struct CountsMatrix {
  std::vector<int> case_ids;
  std::vector<std::string> op_ids;
  Eigen::MatrixXd n;

  int rows() const { return static_cast<int>(n.rows()); }
  int cols() const { return static_cast<int>(n.cols()); }
};

struct CaseCounts {
  int case_id = 0;
  std::vector<double> counts;
};

struct CaseEnergy {
  int case_id = 0;
  double e_joules = 0.0;
};

struct Assembled {
  CountsMatrix matrix;
  Eigen::VectorXd e;
};

/// Aligns counts and energies by case id (ascending). Throws DimensionError on a missing case,
/// a duplicated case, a wrong row length, or an empty case set.
Assembled assemble(const std::vector<std::string>& op_ids, const std::vector<CaseCounts>& counts,
                   const std::vector<CaseEnergy>& energies);

/// J = (1/2m)·Σ_i (n_i·cost − e_i)².
double loss(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost, const Eigen::VectorXd& e);
/// ∂J/∂cost = (1/m)·Nᵀ(N·cost − e).
Eigen::VectorXd gradient(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost, const Eigen::VectorXd& e);

struct FitConfig {
  double alpha = 0.1;
  long max_iters = 200000;
  double epsilon = 1e-9;  // stop when the relative decrease of J falls below this
  int restarts = 5;
  /// Initial standardized costs are uniform in [init_lo, init_hi] times the cost that would
  /// spread the mean energy evenly over the mean row.
  double init_lo = 0.0;
  double init_hi = 2.0;
  bool nonneg = false;
  bool standardize = true;  // scale each column to unit max before descending
  bool backoff = true;      // halve alpha when a step would raise J
  bool accelerate = true;   // Nesterov look-ahead, reset whenever a step would raise J
  std::uint64_t seed = 42;
  int jobs = 0;  // restart threads; 0 uses hardware concurrency
};

struct CostModel {
  std::vector<std::string> op_ids;
  std::vector<double> cost_j;
  std::uint64_t seed = 0;
  long iterations = 0;
  double final_j = 0.0;
  int restart = 0;                 // index of the winning restart
  std::vector<double> j_history;  // J every 100 accepted steps plus the final value

  Eigen::VectorXd vector() const { return Eigen::Map<const Eigen::VectorXd>(cost_j.data(), static_cast<Eigen::Index>(cost_j.size())); }
};

/// Gradient descent with restarts; the restart with the lowest final J wins (ties: lowest index).
/// Throws FitError on divergence or empty input.
CostModel fit(const Eigen::MatrixXd& n, const Eigen::VectorXd& e, const FitConfig& config);
CostModel fit(const CountsMatrix& n, const Eigen::VectorXd& e, const FitConfig& config);

Eigen::VectorXd predict(const Eigen::MatrixXd& n, const Eigen::VectorXd& cost);

/// Mean of |(est − meas)/meas| over cases with meas ≠ 0. `dropped` receives the skipped count.
double nmae(const Eigen::VectorXd& est, const Eigen::VectorXd& meas, int* dropped = nullptr);

/// Pearson correlation. Throws FitError if either vector has zero variance.
double correlation(const Eigen::VectorXd& a, const Eigen::VectorXd& b);

struct RoundMetrics {
  int round = 0;
  double train_r = 0.0;
  double val_r = 0.0;
  double train_nmae = 0.0;
  double val_nmae = 0.0;
  int train_cases = 0;
  int val_cases = 0;
  double final_j = 0.0;
};

struct FitReport {
  std::vector<RoundMetrics> rounds;
  std::vector<std::vector<int>> folds;  // row indices per fold
  std::vector<CostModel> models;        // one per round
  int chosen = 0;                       // round with the lowest validation NMAE
};

/// Seeded partition into `rounds` folds; each round trains on the others and validates on one.
FitReport cross_validate(const Eigen::MatrixXd& n, const Eigen::VectorXd& e, const FitConfig& config,
                         int rounds = 4);

/// Numerical column rank after scaling columns to unit max.
int column_rank(const Eigen::MatrixXd& n, double rel_tol = 1e-9);

std::string model_to_json(const CostModel& model, const std::string& config_hash, int indent = 2);
CostModel model_from_json(const std::string& text);
std::string metrics_to_csv(const FitReport& report);

}  // namespace emod
