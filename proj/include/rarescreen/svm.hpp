#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rarescreen/matrix.hpp"

namespace rarescreen::svm {

enum class KernelKind : std::uint8_t { Linear, Rbf };

const char* to_string(KernelKind k);
KernelKind parse_kernel_kind(const std::string& text);

struct KernelSpec {
  KernelKind kind = KernelKind::Linear;
  double gamma = 1e-3;  // used by Rbf only

  void check() const;  // gamma > 0 when kind == Rbf
};

// Linear -> dot product (intersection size for binary vectors);
// Rbf -> exp(-gamma * |x XOR z|).
double kernel_eval(const SparseVector& x, const SparseVector& z, const KernelSpec& spec);

struct SvmModel {
  std::uint32_t dimension = 0;
  std::vector<SparseVector> support_rows;
  std::vector<double> support_y;  // +1 / -1, aligned with support_rows
  std::vector<double> alphas;     // > 0, aligned with support_rows
  double bias = 0.0;
  KernelSpec kernel;
  double c = 1.0;
  bool converged = true;
  std::size_t iterations = 0;  // pair updates performed
};

// Dual coefficients over the full training set (zeros included), before
// they are compacted into the support list. Kept for KKT verification.
struct FitReport {
  std::vector<double> alphas;
  std::vector<double> y;
  double bias = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

struct SmoResult {
  std::vector<double> alphas;
  double bias = 0.0;
  bool converged = true;
  std::size_t iterations = 0;
};

// Core SMO loop over a precomputed Gram matrix so desk instances that are
// not binary vectors can be solved too. Maximizes the soft-margin dual with
// the max-violating-pair working-set rule; stops when the largest KKT
// violation falls below `tolerance` or after `max_iterations` pair updates
// (result flagged not converged).
SmoResult smo_solve(const std::vector<std::vector<double>>& gram,
                    const std::vector<double>& y, double c, double tolerance,
                    std::size_t max_iterations);

// max_passes is in units of full passes: the pair-update budget is
// max_passes * n_rows.
SvmModel smo_fit(const DesignMatrix& m, double c, const KernelSpec& spec,
                 double tolerance = 1e-3, std::size_t max_passes = 100,
                 FitReport* report = nullptr);

struct Decision {
  Label label = Label::Negative;
  double margin = 0.0;
};

// margin = sum alpha_i y_i K(x_i, x) + b; margin > 0 -> Positive.
Decision svm_decision(const SvmModel& model, const SparseVector& x);

// Largest violation of the stationarity conditions over the training rows
// for the given dual solution.
double kkt_residual(const DesignMatrix& m, const std::vector<double>& alphas,
                    const std::vector<double>& y, double bias,
                    const KernelSpec& spec, double c);

// sum alpha - 1/2 sum_ij alpha_i alpha_j y_i y_j K_ij
double dual_objective(const std::vector<std::vector<double>>& gram,
                      const std::vector<double>& y,
                      const std::vector<double>& alphas);

}  // namespace rarescreen::svm
