#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>
#include <Eigen/SparseCore>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <string>
#include <string_view>

#include "sis/bounds.hpp"
#include "sis/errors.hpp"

namespace sis {

enum class SpectralMethod { PowerNonneg, Gelfand, DenseQr };

constexpr std::string_view to_string(SpectralMethod m) {
  switch (m) {
    case SpectralMethod::PowerNonneg: return "power";
    case SpectralMethod::Gelfand: return "gelfand";
    case SpectralMethod::DenseQr: return "dense_qr";
  }
  return "?";
}

struct SpectralOptions {
  double power_tol = 1e-10;       // relative residual for power iteration
  double gelfand_tol = 1e-8;      // relative gap between successive estimates
  int max_squarings = 64;
  std::size_t max_power_iter = 200'000;
  std::size_t dense_limit = 512;  // largest dimension for Hessenberg QR
  std::size_t gelfand_dense_limit = 512;
};

struct SpectralResult {
  double rho = 0.0;
  SpectralMethod method = SpectralMethod::PowerNonneg;
  std::size_t iterations = 0;
  double residual = 0.0;
  bool converged = false;
  // Collatz-Wielandt upper bound max_i (Mx)_i / x_i for the final positive
  // iterate (power iteration only).
  std::optional<double> upper_bound;
};

namespace detail {

inline double matrix_one_norm(const Eigen::MatrixXd& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

// Shift that makes power iteration primitive when the diagonal has zeros.
inline double nonneg_shift(const SparseMatrix& m) {
  double min_diag = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < m.rows(); ++i) min_diag = std::min(min_diag, m.coeff(i, i));
  if (min_diag > 0.0) return 0.0;
  Eigen::VectorXd row_sums = Eigen::VectorXd::Zero(m.rows());
  Eigen::VectorXd col_sums = Eigen::VectorXd::Zero(m.cols());
  for (Eigen::Index k = 0; k < m.outerSize(); ++k)
    for (SparseMatrix::InnerIterator it(m, k); it; ++it) {
      row_sums[it.row()] += std::abs(it.value());
      col_sums[it.col()] += std::abs(it.value());
    }
  const double bound = std::min(row_sums.maxCoeff(), col_sums.maxCoeff());
  return bound > 0.0 ? 0.5 * bound : 0.0;
}

// Deterministic positive start vector with no special symmetry.
inline Eigen::VectorXd generic_start(Eigen::Index dim) {
  Eigen::VectorXd x(dim);
  constexpr double phi = 0.6180339887498949;
  for (Eigen::Index k = 0; k < dim; ++k) {
    const double frac = std::fmod(double(k + 1) * phi, 1.0);
    x[k] = 1.0 + 0.25 * frac;
  }
  return x.normalized();
}

}  // namespace detail

/// Spectral radius from all eigenvalues (Hessenberg reduction + shifted QR).
inline SpectralResult dense_spectral_radius(const Eigen::MatrixXd& a) {
  if (a.rows() != a.cols()) throw ParameterError("spectral radius of a non-square matrix");
  SpectralResult r;
  r.method = SpectralMethod::DenseQr;
  if (a.rows() == 0) {
    r.converged = true;
    return r;
  }
  Eigen::EigenSolver<Eigen::MatrixXd> es(a, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success) throw ConsistencyError("dense eigensolver failed to converge");
  r.rho = es.eigenvalues().cwiseAbs().maxCoeff();
  r.converged = true;
  return r;
}

/// Gelfand estimate rho ~ ||A^(2^k)||_1^(1/2^k) by repeated squaring. Each
/// square is renormalized to unit norm and the logarithm of the norm carried
/// separately, so neither overflow nor underflow occurs.
inline SpectralResult gelfand_radius(const Eigen::MatrixXd& a, double tol = 1e-8,
                                     int max_squarings = 64) {
  if (a.rows() != a.cols()) throw ParameterError("spectral radius of a non-square matrix");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  SpectralResult r;
  r.method = SpectralMethod::Gelfand;
  double s = a.rows() ? detail::matrix_one_norm(a) : 0.0;
  if (s == 0.0) {
    r.converged = true;
    return r;
  }
  Eigen::MatrixXd b = a / s;
  double log_norm = std::log(s);  // log ||A^(2^k)||_1
  double prev = s;
  double scale = 1.0;              // 2^k
  for (int k = 1; k <= max_squarings; ++k) {
    b = (b * b).eval();
    s = detail::matrix_one_norm(b);
    r.iterations = std::size_t(k);
    if (s == 0.0) {  // nilpotent
      r.rho = 0.0;
      r.converged = true;
      return r;
    }
    b /= s;
    log_norm = 2.0 * log_norm + std::log(s);
    scale *= 2.0;
    const double est = std::exp(log_norm / scale);
    r.rho = est;
    r.residual = std::abs(est - prev) / est;
    if (r.residual < tol) {
      r.converged = true;
      return r;
    }
    prev = est;
  }
  return r;
}

/// Power iteration for a nonnegative matrix from a strictly positive start.
/// Convergence is declared when the relative residual ||y - lambda x|| /
/// lambda drops below tol, or when the Collatz-Wielandt bracket
/// [min (Mx)_i/x_i, max (Mx)_i/x_i] closes to the same relative width.
inline SpectralResult power_radius_nonneg(const SparseMatrix& m, double tol = 1e-10,
                                          std::size_t max_iter = 200'000) {
  if (m.rows() != m.cols()) throw ParameterError("spectral radius of a non-square matrix");
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  SpectralResult r;
  r.method = SpectralMethod::PowerNonneg;
  const Eigen::Index dim = m.rows();
  if (dim == 0) {
    r.converged = true;
    return r;
  }
  const double shift = detail::nonneg_shift(m);
  Eigen::VectorXd x = Eigen::VectorXd::Ones(dim).normalized();
  Eigen::VectorXd y(dim);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    y.noalias() = m * x;
    y += shift * x;
    r.iterations = it;
    const double ynorm = y.norm();
    if (ynorm == 0.0) {
      r.rho = 0.0;
      r.residual = 0.0;
      r.converged = true;
      return r;
    }
    const double lambda = x.dot(y);
    r.residual = (y - lambda * x).norm() / std::abs(lambda);
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    bool positive = true;
    for (Eigen::Index i = 0; i < dim; ++i) {
      if (x[i] <= 0.0) {
        positive = false;
        continue;
      }
      const double q = y[i] / x[i];
      lo = std::min(lo, q);
      hi = std::max(hi, q);
    }
    r.rho = std::max(0.0, lambda - shift);
    if (positive) r.upper_bound = std::max(0.0, hi - shift);
    const bool bracket_closed = positive && (hi - lo) <= tol * hi;
    if (r.residual <= tol || bracket_closed) {
      if (bracket_closed) r.rho = std::max(0.0, 0.5 * (lo + hi) - shift);
      r.converged = true;
      return r;
    }
    x = y / ynorm;
  }
  return r;
}

/// Vector form of the Gelfand estimate for large signed matrices: iterates
/// x <- Mx / ||Mx|| from a generic start and accepts the Rayleigh quotient
/// once its residual is below tol (real dominant eigenvalue). Without
/// convergence it returns the windowed growth rate
/// exp((log||M^k x|| - log||M^(k/2) x||) / (k/2)) and converged = false.
inline SpectralResult vector_gelfand_radius(const SparseMatrix& m, double tol = 1e-10,
                                            std::size_t max_iter = 200'000) {
  if (m.rows() != m.cols()) throw ParameterError("spectral radius of a non-square matrix");
  SpectralResult r;
  r.method = SpectralMethod::Gelfand;
  const Eigen::Index dim = m.rows();
  if (dim == 0) {
    r.converged = true;
    return r;
  }
  Eigen::VectorXd x = detail::generic_start(dim);
  Eigen::VectorXd y(dim);
  std::vector<double> log_growth;
  log_growth.reserve(std::min<std::size_t>(max_iter, 1 << 16) + 1);
  log_growth.push_back(0.0);
  for (std::size_t it = 1; it <= max_iter; ++it) {
    y.noalias() = m * x;
    r.iterations = it;
    const double ynorm = y.norm();
    if (ynorm == 0.0) {
      r.rho = 0.0;
      r.converged = true;
      return r;
    }
    const double lambda = x.dot(y);
    r.residual = lambda != 0.0 ? (y - lambda * x).norm() / std::abs(lambda)
                               : std::numeric_limits<double>::infinity();
    if (r.residual <= tol) {
      r.rho = std::abs(lambda);
      r.converged = true;
      return r;
    }
    log_growth.push_back(log_growth.back() + std::log(ynorm));
    x = y / ynorm;
  }
  const std::size_t k = log_growth.size() - 1;
  const std::size_t h = k / 2;
  r.rho = std::exp((log_growth[k] - log_growth[h]) / double(k - h));
  return r;
}

/// Spectral radius of a bound operator. Nonnegative matrices use power
/// iteration (Perron-Frobenius), falling back to the Gelfand estimate on
/// stagnation. Signed matrices use the Gelfand estimate: dense repeated
/// squaring up to `gelfand_dense_limit`, with Hessenberg QR as fallback up to
/// `dense_limit`, and the vector form beyond.
inline SpectralResult spectral_radius(const BoundMatrix& m, const SpectralOptions& opt = {}) {
  if (!(opt.power_tol > 0.0) || !(opt.gelfand_tol > 0.0)) {
    throw ParameterError("spectral tolerances must be positive");
  }
  const std::size_t dim = m.dim();
  if (m.nonnegative()) {
    auto r = power_radius_nonneg(m.values(), opt.power_tol, opt.max_power_iter);
    if (r.converged) return r;
    if (dim <= opt.gelfand_dense_limit) {
      auto g = gelfand_radius(m.dense(), opt.gelfand_tol, opt.max_squarings);
      if (g.converged) return g;
    }
    if (dim <= opt.dense_limit) return dense_spectral_radius(m.dense());
    return r;
  }
  if (dim <= opt.gelfand_dense_limit) {
    auto g = gelfand_radius(m.dense(), opt.gelfand_tol, opt.max_squarings);
    if (g.converged) return g;
    if (dim <= opt.dense_limit) return dense_spectral_radius(m.dense());
    return g;
  }
  return vector_gelfand_radius(m.values(), opt.power_tol, opt.max_power_iter);
}

/// Convenience overload taking only the tolerance of the primary method.
inline SpectralResult spectral_radius(const BoundMatrix& m, double tol) {
  if (!(tol > 0.0)) throw ParameterError("tolerance must be positive");
  SpectralOptions opt;
  opt.power_tol = tol;
  opt.gelfand_tol = std::max(tol, 1e-12);
  return spectral_radius(m, opt);
}

// ---------------------------------------------------------------------------
// Lyapunov contraction certificate
// ---------------------------------------------------------------------------

inline constexpr std::size_t kLyapunovMaxDim = 512;

/// Solves A^T P A - P = -Q for stable A by Smith's doubling iteration
/// P = sum_k (A^T)^k Q A^k, accumulated as P <- P + A_k^T P A_k, A_k <- A_k^2.
inline Eigen::MatrixXd solve_discrete_lyapunov(const Eigen::MatrixXd& a, const Eigen::MatrixXd& q,
                                               int max_doublings = 80) {
  if (a.rows() != a.cols() || q.rows() != q.cols() || a.rows() != q.rows()) {
    throw ParameterError("Lyapunov: A and Q must be square and of equal size");
  }
  Eigen::MatrixXd p = q;
  Eigen::MatrixXd ak = a;
  for (int k = 0; k < max_doublings; ++k) {
    const Eigen::MatrixXd term = ak.transpose() * p * ak;
    p += term;
    if (!p.allFinite()) break;
    if (term.cwiseAbs().maxCoeff() <= 1e-17 * p.cwiseAbs().maxCoeff()) return 0.5 * (p + p.transpose());
    ak = (ak * ak).eval();
    if (!ak.allFinite()) break;
  }
  throw NoCertificate("Lyapunov doubling did not converge (matrix not stable)");
}

struct LyapunovCertificate {
  Eigen::MatrixXd p;           // solves M^T P M - P = -I
  Eigen::MatrixXd p_sqrt;      // P^(1/2)
  Eigen::MatrixXd p_inv_sqrt;  // P^(-1/2)
  double rho = 0.0;            // spectral radius of M
  double eta = 0.0;            // ||P^(1/2) M P^(-1/2)||_2 < 1
  double bound_constant = 0.0; // ||P^(1/2) 1|| ||P^(-1/2) 1||

  /// Constant C with u^T M^t v <= C eta^t for all t >= 0.
  double constant_for(const Eigen::VectorXd& u, const Eigen::VectorXd& v) const {
    return (p_inv_sqrt * u).norm() * (p_sqrt * v).norm();
  }

  /// Certified upper bound on 1^T M^t 1.
  double decay_bound(double t) const { return std::pow(eta, t) * bound_constant; }
};

inline LyapunovCertificate lyapunov_certificate(const Eigen::MatrixXd& m,
                                                std::size_t max_dim = kLyapunovMaxDim) {
  if (m.rows() != m.cols()) throw ParameterError("Lyapunov certificate of a non-square matrix");
  if (std::size_t(m.rows()) > max_dim) {
    throw SizeError("Lyapunov certificate limited to dimension " + std::to_string(max_dim));
  }
  const Eigen::Index d = m.rows();
  LyapunovCertificate c;
  c.rho = dense_spectral_radius(m).rho;
  if (!(c.rho < 1.0)) {
    throw NoCertificate("spectral radius " + std::to_string(c.rho) + " is not below 1");
  }
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(d, d);
  c.p = solve_discrete_lyapunov(m, id);

  const Eigen::MatrixXd gap = c.p - m.transpose() * c.p * m;
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (gap + gap.transpose()));
  if (llt.info() != Eigen::Success) throw NoCertificate("P - M^T P M is not positive definite");

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c.p);
  if (es.info() != Eigen::Success || es.eigenvalues().minCoeff() <= 0.0) {
    throw NoCertificate("Lyapunov solution is not positive definite");
  }
  const Eigen::VectorXd lam = es.eigenvalues();
  const Eigen::MatrixXd& v = es.eigenvectors();
  c.p_sqrt = v * lam.cwiseSqrt().asDiagonal() * v.transpose();
  c.p_inv_sqrt = v * lam.cwiseSqrt().cwiseInverse().asDiagonal() * v.transpose();

  // ||N||^2 = 1 - 1/lambda_max(P) in exact arithmetic; take the larger of
  // that and the computed singular value.
  const Eigen::MatrixXd n = c.p_sqrt * m * c.p_inv_sqrt;
  const double svd_norm = d ? Eigen::JacobiSVD<Eigen::MatrixXd>(n).singularValues()(0) : 0.0;
  const double identity_norm = std::sqrt(std::max(0.0, 1.0 - 1.0 / lam.maxCoeff()));
  c.eta = std::max(svd_norm, identity_norm);
  if (!(c.eta < 1.0)) throw NoCertificate("contraction factor is not below 1");

  const Eigen::VectorXd ones = Eigen::VectorXd::Ones(d);
  c.bound_constant = c.constant_for(ones, ones);
  return c;
}

inline LyapunovCertificate lyapunov_certificate(const BoundMatrix& m,
                                                std::size_t max_dim = kLyapunovMaxDim) {
  if (m.dim() > max_dim) {
    throw SizeError("Lyapunov certificate limited to dimension " + std::to_string(max_dim));
  }
  return lyapunov_certificate(m.dense(), max_dim);
}

// ---------------------------------------------------------------------------
// Star graph row-sum certificate for rho(M'') < rho(M)
// ---------------------------------------------------------------------------

/// Scaled row-sum bound for M'' on star(n) with the scaling vector
/// x = (1, eps 1, alpha/sqrt(n-1) 1, c 1) over (hub p, leaf p, q_out, q_in).
struct StarCertificate {
  std::size_t n = 0;
  EpidemicParams params;
  double alpha = 0.0;
  double c = 0.0;
  double eps = 0.0;
  std::array<double, 4> row_bounds{};  // hub, leaves, q_out, q_in
  double max_rho = 0.0;

  /// rho(M) = 1 - delta + beta sqrt(n - 1) for the same star.
  double rho_m() const { return 1.0 - params.delta + params.beta * std::sqrt(double(n - 1)); }
  bool improves() const { return max_rho < rho_m(); }

  /// Positive scaling vector in the canonical (p, q_E) layout of star(n).
  Eigen::VectorXd scaling() const {
    const Eigen::Index k = Eigen::Index(n - 1);
    Eigen::VectorXd x(1 + 3 * k);
    x[0] = 1.0;
    x.segment(1, k).setConstant(eps);
    x.segment(1 + k, k).setConstant(alpha / std::sqrt(double(k)));
    x.segment(1 + 2 * k, k).setConstant(c);
    return x;
  }
};

/// Requires 1 - delta - beta >= 0 and delta (1 + delta) < 1. Picks the
/// midpoints alpha in (delta, 1), c in (max(alpha(1+delta), 1), alpha/delta)
/// and eps in (0, beta(alpha - delta c) / (delta (1 - delta))), then evaluates
/// the scaled row sums (M'' x)_i / x_i of each index class in closed form.
inline StarCertificate star_rowsum_certificate(std::size_t n, const EpidemicParams& prm) {
  const double b = prm.beta, d = prm.delta;
  if (n < 2) throw InvalidSize("star certificate needs n >= 2");
  if (!(1.0 - d - b >= 0.0) || !(d * (1.0 + d) < 1.0)) {
    throw Inapplicable("star certificate needs 1 - delta - beta >= 0 and delta (1 + delta) < 1");
  }
  if (!(d > 0.0)) throw DegenerateWindow("delta = 0 leaves the c and eps windows unbounded");
  StarCertificate cert;
  cert.n = n;
  cert.params = prm;
  cert.alpha = 0.5 * (d + 1.0);
  const double c_lo = std::max(cert.alpha * (1.0 + d), 1.0);
  const double c_hi = cert.alpha / d;
  if (!(c_lo < c_hi)) throw DegenerateWindow("empty window for c");
  cert.c = 0.5 * (c_lo + c_hi);
  const double eps_hi = b * (cert.alpha - d * cert.c) / (d * (1.0 - d));
  if (!(eps_hi > 0.0)) throw DegenerateWindow("empty window for eps");
  cert.eps = 0.5 * eps_hi;

  const double a = cert.alpha, c = cert.c, e = cert.eps;
  const double r = std::sqrt(double(n - 1));
  cert.row_bounds[0] = 1.0 - d + a * b * r;
  cert.row_bounds[1] = 1.0 - d + b * c / e;
  cert.row_bounds[2] = (1.0 - d) * (1.0 - d - b) + (e * d * (1.0 - d) + b * d * c) * r / a;
  cert.row_bounds[3] = (1.0 - d) * (1.0 + d / c - d - b) - a * b / (c * r) + (a / c) * b * (1.0 + d) * r;
  cert.max_rho = *std::max_element(cert.row_bounds.begin(), cert.row_bounds.end());
  return cert;
}

}  // namespace sis
