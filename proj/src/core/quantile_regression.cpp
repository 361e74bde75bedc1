#include "core/quantile_regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "core/error.hpp"

namespace qrlof {

void require_tau(double tau) {
  if (!(tau > 0.0 && tau < 1.0)) {
    std::ostringstream msg;
    msg << "tau must lie in (0, 1), got " << tau;
    fail(ErrorCode::domain, msg.str());
  }
}

double check_loss(double r, double tau) {
  require_tau(tau);
  if (r > 0.0) return tau * r;
  if (r < 0.0) return (tau - 1.0) * r;
  return 0.0;
}

double psi(double r, double tau) {
  require_tau(tau);
  if (r > 0.0) return tau;
  if (r < 0.0) return tau - 1.0;
  return 0.0;
}

double total_check_loss(const Vector& residuals, double tau) {
  double sum = 0.0;
  for (double r : residuals) sum += check_loss(r, tau);
  return sum;
}

void DataSample::validate() const {
  if (covariates.rows() < 1 || covariates.cols() < 1)
    fail(ErrorCode::invalid_argument, "sample needs n >= 1 and d >= 1");
  if (covariates.rows() != response.size())
    fail(ErrorCode::invalid_argument,
         "covariate rows and response length differ");
  if (!covariates.allFinite() || !response.allFinite())
    fail(ErrorCode::invalid_argument, "sample contains non-finite values");
}

Vector model_gradient(std::span<const double> x, std::span<const double> theta,
                      bool with_intercept) {
  const auto d = static_cast<Eigen::Index>(x.size());
  const Eigen::Index q = d + (with_intercept ? 1 : 0);
  if (!theta.empty() && static_cast<Eigen::Index>(theta.size()) != q)
    fail(ErrorCode::invalid_argument, "theta length does not match regressors");
  Vector g(q);
  Eigen::Index k = 0;
  if (with_intercept) g(k++) = 1.0;
  for (double v : x) g(k++) = v;
  return g;
}

Matrix design_matrix(const Matrix& covariates, bool with_intercept) {
  if (!with_intercept) return covariates;
  Matrix design(covariates.rows(), covariates.cols() + 1);
  design.col(0).setOnes();
  design.rightCols(covariates.cols()) = covariates;
  return design;
}

namespace {

// Greedy choice of the first q linearly independent rows, in index order.
std::vector<Eigen::Index> initial_basis(const Matrix& design) {
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  std::vector<Eigen::Index> basis;
  Matrix ortho(q, q);
  for (Eigen::Index i = 0; i < n && static_cast<Eigen::Index>(basis.size()) < q;
       ++i) {
    Vector v = design.row(i).transpose();
    const double norm = v.norm();
    if (norm == 0.0) continue;
    const auto k = static_cast<Eigen::Index>(basis.size());
    for (int pass = 0; pass < 2; ++pass)
      for (Eigen::Index j = 0; j < k; ++j)
        v -= ortho.col(j).dot(v) * ortho.col(j);
    const double rest = v.norm();
    if (rest <= 1e-9 * norm) continue;
    ortho.col(k) = v / rest;
    basis.push_back(i);
  }
  if (static_cast<Eigen::Index>(basis.size()) < q)
    fail(ErrorCode::singular_design, "design matrix does not have full column rank");
  return basis;
}

class Solver {
 public:
  Solver(const Matrix& design, const Vector& response, double tau)
      : x_(design), y_(response), tau_(tau), n_(design.rows()), q_(design.cols()) {
    row_norm_sum_ = design.rowwise().norm().sum();
  }

  QuantileFit run(std::vector<Eigen::Index> basis, bool design_has_intercept) {
    const int max_iterations = static_cast<int>(100 * n_ + 1000);
    int iteration = 0;
    for (;; ++iteration) {
      if (iteration > max_iterations)
        fail(ErrorCode::internal, "quantile regression did not converge");
      if (!evaluate(basis)) {
        if (iteration == 0) {
          basis = initial_basis(x_);
          if (evaluate(basis)) continue;
        }
        fail(ErrorCode::singular_design, "basis matrix became singular");
      }
      if (descend_from_basis(basis)) continue;
      if (descend_from_degenerate_vertex(basis)) continue;
      break;
    }

    QuantileFit fit;
    fit.tau = tau_;
    fit.theta = theta_;
    fit.residuals = residuals_;
    fit.objective = total_check_loss(residuals_, tau_);
    fit.design_has_intercept = design_has_intercept;
    fit.basis = std::move(basis);
    fit.iterations = iteration;
    return fit;
  }

 private:
  // Solves for the vertex interpolating the basis; false if singular.
  bool evaluate(const std::vector<Eigen::Index>& basis) {
    const Matrix basis_rows = x_(basis, Eigen::all);
    Eigen::FullPivLU<Matrix> lu(basis_rows);
    if (!lu.isInvertible()) return false;
    theta_ = lu.solve(Vector(y_(basis)));
    basis_inverse_ = lu.inverse();

    residuals_.resize(n_);
    in_basis_.assign(static_cast<std::size_t>(n_), false);
    for (Eigen::Index i : basis) in_basis_[static_cast<std::size_t>(i)] = true;
    constexpr double kEps = std::numeric_limits<double>::epsilon();
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (in_basis_[static_cast<std::size_t>(i)]) {
        residuals_(i) = 0.0;
        continue;
      }
      double fitted = 0.0;
      double magnitude = std::abs(y_(i));
      for (Eigen::Index k = 0; k < q_; ++k) {
        const double term = x_(i, k) * theta_(k);
        fitted += term;
        magnitude += std::abs(term);
      }
      const double r = y_(i) - fitted;
      residuals_(i) = std::abs(r) <= 64.0 * kEps * magnitude ? 0.0 : r;
    }
    return true;
  }

  double psi_of(Eigen::Index i) const {
    const double r = residuals_(i);
    return r > 0.0 ? tau_ : (r < 0.0 ? tau_ - 1.0 : 0.0);
  }

  // One-sided slope of rho_tau(-t a) at t = 0+.
  double zero_residual_slope(double a) const {
    return a > 0.0 ? (1.0 - tau_) * a : -tau_ * a;
  }

  double tolerance(const Vector& direction) const {
    return 1e-11 * (1.0 + direction.norm() * row_norm_sum_);
  }

  // Directional derivative of the objective at the current vertex.
  double directional_derivative(const Vector& direction) const {
    double slope = 0.0;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double a = x_.row(i).dot(direction);
      slope += residuals_(i) != 0.0 ? -psi_of(i) * a : zero_residual_slope(a);
    }
    return slope;
  }

  // Minimises the objective along theta + t * direction, t > 0. Returns the
  // observation whose residual vanishes at the minimiser.
  Eigen::Index line_search(const Vector& direction, double slope) const {
    const Vector a = x_ * direction;
    std::vector<std::pair<double, Eigen::Index>> breakpoints;
    for (Eigen::Index i = 0; i < n_; ++i) {
      const double r = residuals_(i);
      if (r == 0.0 || a(i) == 0.0) continue;
      if ((r > 0.0) != (a(i) > 0.0)) continue;
      breakpoints.emplace_back(r / a(i), i);
    }
    std::sort(breakpoints.begin(), breakpoints.end());
    for (const auto& [t, i] : breakpoints) {
      slope += std::abs(a(i));
      if (slope >= 0.0) return i;
    }
    fail(ErrorCode::internal, "line search found no minimiser");
  }

  // Edge directions of the current basis, examined in increasing observation
  // index (Bland's rule). Returns true after a pivot.
  bool descend_from_basis(std::vector<Eigen::Index>& basis) {
    Vector gradient = Vector::Zero(q_);
    std::vector<Eigen::Index> zero_nonbasic;
    for (Eigen::Index i = 0; i < n_; ++i) {
      if (residuals_(i) != 0.0) {
        gradient += psi_of(i) * x_.row(i).transpose();
      } else if (!in_basis_[static_cast<std::size_t>(i)]) {
        zero_nonbasic.push_back(i);
      }
    }
    const Vector projected = basis_inverse_.transpose() * gradient;

    std::vector<std::size_t> order(basis.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return basis[a] < basis[b]; });

    for (std::size_t pos : order) {
      const auto k = static_cast<Eigen::Index>(pos);
      const Vector delta = basis_inverse_.col(k);
      double plus = -projected(k) + (1.0 - tau_);
      double minus = projected(k) + tau_;
      for (Eigen::Index i : zero_nonbasic) {
        const double a = x_.row(i).dot(delta);
        plus += zero_residual_slope(a);
        minus += zero_residual_slope(-a);
      }
      const double tol = tolerance(delta);
      if (plus < -tol) {
        basis[pos] = line_search(delta, plus);
        return true;
      }
      if (minus < -tol) {
        basis[pos] = line_search(-delta, minus);
        return true;
      }
    }
    return false;
  }

  // At a vertex with more than q zero residuals the basis edges do not cover
  // every descent ray. The extreme rays of the local fan are the null
  // directions of (q-1)-subsets of the zero set; check them all.
  bool descend_from_degenerate_vertex(std::vector<Eigen::Index>& basis) {
    std::vector<Eigen::Index> zero_set;
    for (Eigen::Index i = 0; i < n_; ++i)
      if (residuals_(i) == 0.0) zero_set.push_back(i);
    if (static_cast<Eigen::Index>(zero_set.size()) <= q_) return false;

    const auto m = zero_set.size();
    const auto choose = static_cast<std::size_t>(q_ - 1);
    std::vector<std::size_t> pick(choose);
    std::iota(pick.begin(), pick.end(), 0);
    constexpr std::size_t kMaxSubsets = 200000;
    for (std::size_t visited = 0; visited < kMaxSubsets; ++visited) {
      std::vector<Eigen::Index> subset;
      for (std::size_t p : pick) subset.push_back(zero_set[p]);

      Vector ray;
      if (choose == 0) {
        ray = Vector::Ones(1);
      } else {
        Eigen::FullPivLU<Matrix> lu(x_(subset, Eigen::all));
        if (lu.rank() == static_cast<Eigen::Index>(choose)) {
          ray = lu.kernel().col(0);
          ray.normalize();
        }
      }
      if (ray.size() == q_) {
        for (double sign : {1.0, -1.0}) {
          const Vector direction = sign * ray;
          const double slope = directional_derivative(direction);
          if (slope < -tolerance(direction)) {
            subset.push_back(line_search(direction, slope));
            basis = std::move(subset);
            return true;
          }
        }
      }
      if (!next_combination(pick, m)) break;
    }
    return false;
  }

  static bool next_combination(std::vector<std::size_t>& pick, std::size_t m) {
    const std::size_t k = pick.size();
    for (std::size_t j = k; j-- > 0;) {
      if (pick[j] < m - k + j) {
        ++pick[j];
        for (std::size_t l = j + 1; l < k; ++l) pick[l] = pick[l - 1] + 1;
        return true;
      }
    }
    return false;
  }

  const Matrix& x_;
  const Vector& y_;
  double tau_;
  Eigen::Index n_;
  Eigen::Index q_;
  double row_norm_sum_ = 0.0;

  Vector theta_;
  Matrix basis_inverse_;
  Vector residuals_;
  std::vector<bool> in_basis_;
};

}  // namespace

QuantileFit fit_design(const Matrix& design, const Vector& response, double tau,
                       bool design_has_intercept,
                       std::span<const Eigen::Index> warm_basis) {
  require_tau(tau);
  const Eigen::Index n = design.rows();
  const Eigen::Index q = design.cols();
  if (q < 1) fail(ErrorCode::invalid_argument, "design has no columns");
  if (response.size() != n)
    fail(ErrorCode::invalid_argument, "design rows and response length differ");
  if (n < q) {
    std::ostringstream msg;
    msg << "under-determined fit: " << n << " observations for " << q
        << " parameters";
    fail(ErrorCode::underdetermined, msg.str());
  }
  if (!design.allFinite() || !response.allFinite())
    fail(ErrorCode::invalid_argument, "design or response contains non-finite values");

  std::vector<Eigen::Index> basis;
  const bool warm_ok =
      static_cast<Eigen::Index>(warm_basis.size()) == q &&
      std::all_of(warm_basis.begin(), warm_basis.end(),
                  [n](Eigen::Index i) { return i >= 0 && i < n; });
  if (warm_ok) {
    basis.assign(warm_basis.begin(), warm_basis.end());
  } else {
    basis = initial_basis(design);
  }
  return Solver(design, response, tau).run(std::move(basis), design_has_intercept);
}

QuantileFit fit_linear_quantile(const DataSample& sample, double tau,
                                bool with_intercept) {
  require_tau(tau);
  sample.validate();
  return fit_design(design_matrix(sample.covariates, with_intercept),
                    sample.response, tau, with_intercept);
}

}  // namespace qrlof
