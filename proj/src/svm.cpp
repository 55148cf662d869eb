#include "rarescreen/svm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace rarescreen::svm {

const char* to_string(KernelKind k) {
  return k == KernelKind::Linear ? "linear" : "rbf";
}

KernelKind parse_kernel_kind(const std::string& text) {
  if (text == "linear") return KernelKind::Linear;
  if (text == "rbf") return KernelKind::Rbf;
  throw Error("unknown kernel: " + text);
}

void KernelSpec::check() const {
  if (kind == KernelKind::Rbf && !(gamma > 0.0)) {
    throw Error("rbf kernel needs gamma > 0");
  }
}

double kernel_eval(const SparseVector& x, const SparseVector& z, const KernelSpec& spec) {
  if (spec.kind == KernelKind::Linear) {
    return static_cast<double>(intersection_size(x, z));
  }
  spec.check();
  return std::exp(-spec.gamma * static_cast<double>(symmetric_difference_size(x, z)));
}

namespace {

constexpr double kEtaFloor = 1e-12;

// The absorbing half of a pair update can leave an alpha a rounding error
// away from 0 or C. Treating such an alpha as interior would select working
// pairs with no usable room and stall the solver on a phantom KKT gap, so
// set membership uses a small bound tolerance instead of exact comparisons.
double bound_slack(double c) { return 1e-10 * (1.0 + c); }

bool in_up_set(double y, double alpha, double c) {
  const double slack = bound_slack(c);
  return (y > 0.0 && alpha < c - slack) || (y < 0.0 && alpha > slack);
}

bool in_low_set(double y, double alpha, double c) {
  const double slack = bound_slack(c);
  return (y > 0.0 && alpha > slack) || (y < 0.0 && alpha < c - slack);
}

}  // namespace

SmoResult smo_solve(const std::vector<std::vector<double>>& gram,
                    const std::vector<double>& y, double c, double tolerance,
                    std::size_t max_iterations) {
  const std::size_t n = y.size();
  if (n == 0) throw EmptyMatrix();
  if (gram.size() != n) throw Error("gram matrix size disagrees with labels");
  for (const auto& row : gram) {
    if (row.size() != n) throw Error("gram matrix is not square");
  }
  for (double yi : y) {
    if (yi != 1.0 && yi != -1.0) throw Error("labels for the dual must be +1 or -1");
  }
  if (!(c > 0.0)) throw Error("box constraint C must be positive");
  if (!(tolerance > 0.0)) throw Error("tolerance must be positive");

  std::vector<double> alpha(n, 0.0);
  std::vector<double> f(n, 0.0);  // sum_j alpha_j y_j K_tj, bias excluded

  SmoResult result;
  result.converged = false;
  std::size_t updates = 0;
  double lower_bound = 0.0;  // tightest bias lower bound (over the up set)
  double upper_bound = 0.0;  // tightest bias upper bound (over the low set)

  while (true) {
    // Bias feasibility: every t in the up set requires b >= y_t - f_t and
    // every t in the low set requires b <= y_t - f_t. The gap between the
    // extremes is the largest KKT violation.
    std::size_t i = n;
    std::size_t j = n;
    lower_bound = -std::numeric_limits<double>::infinity();
    upper_bound = std::numeric_limits<double>::infinity();
    for (std::size_t t = 0; t < n; ++t) {
      const double score = y[t] - f[t];
      if (in_up_set(y[t], alpha[t], c) && score > lower_bound) {
        lower_bound = score;
        i = t;
      }
      if (in_low_set(y[t], alpha[t], c) && score < upper_bound) {
        upper_bound = score;
        j = t;
      }
    }
    if (i == n || j == n || lower_bound - upper_bound <= tolerance) {
      result.converged = true;
      break;
    }
    if (updates >= max_iterations) break;

    double eta = gram[i][i] + gram[j][j] - 2.0 * gram[i][j];
    if (eta < kEtaFloor) eta = kEtaFloor;

    // Analytic two-variable step: move alpha_j toward the constrained
    // optimum, then restore the equality constraint through alpha_i.
    const double e_i = f[i] - y[i];
    const double e_j = f[j] - y[j];
    double lo;
    double hi;
    if (y[i] != y[j]) {
      lo = std::max(0.0, alpha[j] - alpha[i]);
      hi = std::min(c, c + alpha[j] - alpha[i]);
    } else {
      lo = std::max(0.0, alpha[i] + alpha[j] - c);
      hi = std::min(c, alpha[i] + alpha[j]);
    }
    double a_j = alpha[j] + y[j] * (e_i - e_j) / eta;
    a_j = std::clamp(a_j, lo, hi);
    const double delta_j = a_j - alpha[j];
    if (std::abs(delta_j) < 1e-14 * (1.0 + std::abs(alpha[j]))) {
      break;  // numerically stuck; report not converged
    }
    const double delta_i = -y[i] * y[j] * delta_j;
    alpha[j] = a_j;
    alpha[i] += delta_i;
    if (alpha[i] < 0.0) alpha[i] = 0.0;
    if (alpha[i] > c) alpha[i] = c;

    const double step_i = delta_i * y[i];
    const double step_j = delta_j * y[j];
    const auto& row_i = gram[i];
    const auto& row_j = gram[j];
    for (std::size_t t = 0; t < n; ++t) {
      f[t] += step_i * row_i[t] + step_j * row_j[t];
    }
    ++updates;
  }

  for (double& a : alpha) a = std::clamp(a, 0.0, c);
  result.alphas = std::move(alpha);
  result.iterations = updates;
  if (std::isinf(lower_bound) || std::isinf(upper_bound)) {
    // One of the index sets was empty; any feasible bias works, pick the
    // finite bound or zero.
    if (std::isfinite(lower_bound)) {
      result.bias = lower_bound;
    } else if (std::isfinite(upper_bound)) {
      result.bias = upper_bound;
    } else {
      result.bias = 0.0;
    }
  } else {
    result.bias = 0.5 * (lower_bound + upper_bound);
  }
  return result;
}

SvmModel smo_fit(const DesignMatrix& m, double c, const KernelSpec& spec,
                 double tolerance, std::size_t max_passes, FitReport* report) {
  if (m.n_rows() == 0) throw EmptyMatrix();
  check_design_matrix(m);
  if (!m.has_both_classes()) throw SingleClass();
  spec.check();

  const std::size_t n = m.n_rows();
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = m.labels[i] == Label::Positive ? 1.0 : -1.0;
  }
  std::vector<std::vector<double>> gram(n, std::vector<double>(n));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i; j < n; ++j) {
      const double k = kernel_eval(m.rows[i], m.rows[j], spec);
      gram[i][j] = k;
      gram[j][i] = k;
    }
  }

  const SmoResult solved =
      smo_solve(gram, y, c, tolerance, std::max<std::size_t>(1, max_passes) * n);

  if (report != nullptr) {
    report->alphas = solved.alphas;
    report->y = y;
    report->bias = solved.bias;
    report->converged = solved.converged;
    report->iterations = solved.iterations;
  }

  SvmModel model;
  model.dimension = m.n_columns;
  model.bias = solved.bias;
  model.kernel = spec;
  model.c = c;
  model.converged = solved.converged;
  model.iterations = solved.iterations;
  for (std::size_t i = 0; i < n; ++i) {
    if (solved.alphas[i] > 0.0) {
      model.support_rows.push_back(m.rows[i]);
      model.support_y.push_back(y[i]);
      model.alphas.push_back(solved.alphas[i]);
    }
  }
  return model;
}

Decision svm_decision(const SvmModel& model, const SparseVector& x) {
  if (x.dimension != model.dimension) {
    throw DimensionMismatch(model.dimension, x.dimension);
  }
  double margin = model.bias;
  for (std::size_t i = 0; i < model.support_rows.size(); ++i) {
    margin += model.alphas[i] * model.support_y[i] *
              kernel_eval(model.support_rows[i], x, model.kernel);
  }
  return Decision{margin > 0.0 ? Label::Positive : Label::Negative, margin};
}

double kkt_residual(const DesignMatrix& m, const std::vector<double>& alphas,
                    const std::vector<double>& y, double bias,
                    const KernelSpec& spec, double c) {
  const std::size_t n = m.n_rows();
  if (alphas.size() != n || y.size() != n) {
    throw Error("dual solution size disagrees with matrix");
  }
  const double at_bound = 1e-9 * (1.0 + c);
  double residual = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double f = bias;
    for (std::size_t j = 0; j < n; ++j) {
      if (alphas[j] == 0.0) continue;
      f += alphas[j] * y[j] * kernel_eval(m.rows[j], m.rows[i], spec);
    }
    const double mu = y[i] * f;
    double violation;
    if (alphas[i] <= at_bound) {
      violation = std::max(0.0, 1.0 - mu);
    } else if (alphas[i] >= c - at_bound) {
      violation = std::max(0.0, mu - 1.0);
    } else {
      violation = std::abs(mu - 1.0);
    }
    residual = std::max(residual, violation);
  }
  return residual;
}

double dual_objective(const std::vector<std::vector<double>>& gram,
                      const std::vector<double>& y,
                      const std::vector<double>& alphas) {
  const std::size_t n = y.size();
  double linear = 0.0;
  double quadratic = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    linear += alphas[i];
    for (std::size_t j = 0; j < n; ++j) {
      quadratic += alphas[i] * alphas[j] * y[i] * y[j] * gram[i][j];
    }
  }
  return linear - 0.5 * quadratic;
}

}  // namespace rarescreen::svm
