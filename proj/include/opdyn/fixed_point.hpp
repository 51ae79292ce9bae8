#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "opdyn/error.hpp"
#include "opdyn/graph.hpp"
#include "opdyn/numeric.hpp"

namespace opdyn {

enum class SolveMethod { GaussSeidel, Direct };

struct SolverOptions {
  double tol = 1e-12;
  std::size_t max_iter = 1'000'000;
  SolveMethod method = SolveMethod::GaussSeidel;
};

struct SolveStats {
  std::size_t iterations = 0;
  double residual = 0.0;  // max-norm of x - (c + A x)
};

/// Linear system in fixed-point form x = c + A x, A nonnegative with row sums < 1 on
/// every recurrent class. Stored row-compressed.
class FixedPointSystem {
 public:
  explicit FixedPointSystem(std::size_t n) : constant_(n, 0.0) { row_start_.reserve(n + 1); row_start_.push_back(0); }

  std::size_t size() const { return constant_.size(); }

  /// Rows must be appended in order 0, 1, ...; each row is closed by finish_row.
  void add(std::size_t col, double coeff) {
    if (!cols_.empty() && row_start_.back() < cols_.size() && cols_.back() == col) {
      coeffs_.back() += coeff;
      return;
    }
    cols_.push_back(col);
    coeffs_.push_back(coeff);
  }
  void finish_row(double c) {
    constant_[row_start_.size() - 1] = c;
    row_start_.push_back(cols_.size());
  }

  double apply_row(std::size_t r, std::span<const double> x) const {
    const std::size_t b = row_start_[r], e = row_start_[r + 1];
    if (e - b >= kCompensatedRowLength) {
      CompensatedSum s;
      s.add(constant_[r]);
      for (std::size_t k = b; k < e; ++k) s.add(coeffs_[k] * x[cols_[k]]);
      return s.value();
    }
    double s = constant_[r];
    for (std::size_t k = b; k < e; ++k) s += coeffs_[k] * x[cols_[k]];
    return s;
  }

  double residual(std::span<const double> x) const {
    double r = 0.0;
    for (std::size_t i = 0; i < size(); ++i) r = std::max(r, std::abs(x[i] - apply_row(i, x)));
    return r;
  }

  /// Converged when the error estimate residual / (1 - rate) is at most tol * max(1, max|x|),
  /// where rate is the observed per-sweep contraction over the last few sweeps. Slowly mixing
  /// systems therefore iterate past the point where the residual alone looks small. If the
  /// residual stops improving below the target (rounding floor) the iterate is accepted.
  SolveStats solve(std::vector<double>& x, const SolverOptions& opt) const {
    x.resize(size(), 0.0);
    if (opt.method == SolveMethod::Direct) return solve_direct(x, opt);
    constexpr std::size_t kWindow = 5;
    constexpr std::size_t kStallLimit = 25;
    std::vector<double> history;
    double best = std::numeric_limits<double>::infinity();
    std::size_t stalled = 0;
    SolveStats st;
    for (st.iterations = 1; st.iterations <= opt.max_iter; ++st.iterations) {
      for (std::size_t i = 0; i < size(); ++i) x[i] = apply_row(i, x);
      st.residual = residual(x);
      if (!std::isfinite(st.residual)) break;
      history.push_back(st.residual);
      if (st.residual == 0.0) return st;
      const double target = opt.tol * scale(x);
      if (st.residual > target) continue;
      double rate = 0.0;
      if (history.size() > kWindow) {
        const double past = history[history.size() - 1 - kWindow];
        rate = past > 0.0 ? std::pow(st.residual / past, 1.0 / kWindow) : 0.0;
      }
      if (rate < 1.0 && st.residual <= target * (1.0 - rate)) return st;
      if (st.residual < 0.9 * best) {
        best = st.residual;
        stalled = 0;
      } else if (++stalled >= kStallLimit) {
        return st;
      }
    }
    st.iterations = std::min(st.iterations, opt.max_iter);
    throw Error(ErrorKind::NotConverged, "no convergence after " + std::to_string(opt.max_iter) +
                                             " sweeps, residual " + format_double(st.residual));
  }

 private:
  static double scale(std::span<const double> x) {
    double m = 1.0;
    for (double v : x) m = std::max(m, std::abs(v));
    return m;
  }

  SolveStats solve_direct(std::vector<double>& x, const SolverOptions& opt) const {
    const auto n = static_cast<Eigen::Index>(size());
    std::vector<Eigen::Triplet<double>> trips;
    trips.reserve(cols_.size() + size());
    for (std::size_t r = 0; r < size(); ++r) {
      trips.emplace_back(r, r, 1.0);
      for (std::size_t k = row_start_[r]; k < row_start_[r + 1]; ++k)
        trips.emplace_back(r, cols_[k], -coeffs_[k]);
    }
    Eigen::SparseMatrix<double> m(n, n);
    m.setFromTriplets(trips.begin(), trips.end());
    m.makeCompressed();
    Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
    lu.compute(m);
    if (lu.info() != Eigen::Success) throw Error(ErrorKind::NotConverged, "sparse factorization failed");
    Eigen::Map<const Eigen::VectorXd> c(constant_.data(), n);
    Eigen::VectorXd sol = lu.solve(c);
    x.assign(sol.data(), sol.data() + n);
    SolveStats st;
    st.iterations = 1;
    st.residual = residual(x);
    if (!(st.residual <= opt.tol * scale(x)))
      throw Error(ErrorKind::NotConverged, "direct solve residual " + format_double(st.residual));
    return st;
  }

  std::vector<double> constant_;
  std::vector<std::size_t> row_start_;
  std::vector<std::size_t> cols_;
  std::vector<double> coeffs_;
};

}  // namespace opdyn
