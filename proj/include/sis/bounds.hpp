#pragma once

#include <Eigen/Dense>
#include <Eigen/SparseCore>

#include <cmath>
#include <cstddef>
#include <iomanip>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "sis/errors.hpp"
#include "sis/graph.hpp"
#include "sis/params.hpp"

namespace sis {

enum class BoundKind { M, MPrime, MDoublePrime };

constexpr std::string_view to_string(BoundKind k) {
  switch (k) {
    case BoundKind::M: return "M";
    case BoundKind::MPrime: return "M'";
    case BoundKind::MDoublePrime: return "M''";
  }
  return "?";
}

struct MatrixEntry {
  Eigen::Index row;
  Eigen::Index col;
  double value;
};

/// One of the linear bound operators, stored sparse and row-major. The first
/// `node_count` coordinates of the state are the marginals p; the remaining
/// ones are -p_E (M') or q_E (M'').
class BoundMatrix {
 public:
  BoundMatrix(BoundKind kind, SparseMatrix values, std::size_t node_count)
      : kind_(kind), values_(std::move(values)), node_count_(node_count) {
    if (values_.rows() != values_.cols()) throw ParameterError("bound matrix must be square");
    if (node_count_ > std::size_t(values_.rows())) {
      throw ParameterError("node block larger than the matrix");
    }
    values_.prune([](Eigen::Index, Eigen::Index, double v) { return v != 0.0; });
    values_.makeCompressed();
    nonnegative_ = true;
    for (Eigen::Index k = 0; k < values_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(values_, k); it; ++it)
        if (it.value() < 0.0) nonnegative_ = false;
  }

  BoundKind kind() const noexcept { return kind_; }
  std::size_t dim() const noexcept { return std::size_t(values_.rows()); }
  std::size_t node_count() const noexcept { return node_count_; }
  std::size_t nnz() const noexcept { return std::size_t(values_.nonZeros()); }
  bool nonnegative() const noexcept { return nonnegative_; }
  const SparseMatrix& values() const noexcept { return values_; }

  double coeff(Eigen::Index r, Eigen::Index c) const { return values_.coeff(r, c); }

  Eigen::MatrixXd dense() const { return Eigen::MatrixXd(values_); }

  /// Nonzeros in row-major order, columns increasing within a row.
  std::vector<MatrixEntry> triplets() const {
    std::vector<MatrixEntry> out;
    out.reserve(nnz());
    for (Eigen::Index k = 0; k < values_.outerSize(); ++k)
      for (SparseMatrix::InnerIterator it(values_, k); it; ++it)
        out.push_back({it.row(), it.col(), it.value()});
    return out;
  }

 private:
  BoundKind kind_;
  SparseMatrix values_;
  std::size_t node_count_;
  bool nonnegative_ = true;
};

/// M = (1 - delta) I + beta A.
inline BoundMatrix build_m(const Graph& g, const EpidemicParams& prm) {
  const auto n = Eigen::Index(g.node_count());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(n) + 2 * g.edge_count());
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0 - prm.delta);
  for (const auto& e : g.edges()) {
    t.emplace_back(e.u, e.v, prm.beta);
    t.emplace_back(e.v, e.u, prm.beta);
  }
  SparseMatrix m(n, n);
  m.setFromTriplets(t.begin(), t.end());
  return BoundMatrix(BoundKind::M, std::move(m), g.node_count());
}

/// M' = [[(1-d)I + bA, bB], [-(1-d)b B^T, (1-d)(1-d-2b) I]] acting on the
/// stacked state (p, -p_E), with B the incidence matrix in canonical edge
/// order.
inline BoundMatrix build_m_prime(const Graph& g, const EpidemicParams& prm) {
  const double b = prm.beta, d = prm.delta;
  const auto n = Eigen::Index(g.node_count());
  const auto m = Eigen::Index(g.edge_count());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(n + 7 * m));
  for (Eigen::Index i = 0; i < n; ++i) t.emplace_back(i, i, 1.0 - d);
  for (Eigen::Index k = 0; k < m; ++k) {
    const auto& e = g.edges()[std::size_t(k)];
    t.emplace_back(e.u, e.v, b);
    t.emplace_back(e.v, e.u, b);
    t.emplace_back(e.u, n + k, b);
    t.emplace_back(e.v, n + k, b);
    t.emplace_back(n + k, e.u, -(1.0 - d) * b);
    t.emplace_back(n + k, e.v, -(1.0 - d) * b);
    t.emplace_back(n + k, n + k, (1.0 - d) * (1.0 - d - 2.0 * b));
  }
  SparseMatrix mp(n + m, n + m);
  mp.setFromTriplets(t.begin(), t.end());
  return BoundMatrix(BoundKind::MPrime, std::move(mp), g.node_count());
}

/// Number of stored coefficients of M'' before pruning zeros.
inline std::size_t m_double_prime_fill(const Graph& g) {
  std::size_t fill = g.node_count() + 2 * g.edge_count() + 3 * g.arc_count();
  for (std::size_t j = 0; j < g.node_count(); ++j) {
    const std::size_t dj = g.degree(Node(j));
    fill += dj * (dj > 0 ? dj - 1 : 0);
  }
  return fill;
}

inline constexpr std::size_t kDefaultMaxFill = 50'000'000;

/// M'' on the stacked state (p, q_E), q_E in canonical arc order.
///   row p_i:  (1-d) on p_i, b on q_il for each l in N_i
///   row q_ij: d(1-d) on p_j, (1-d)(1-d-b) on q_ij, b*d on q_ji,
///             b(1+d) on q_jl for each l in N_j \ {i}
/// The q rows for a hub of degree k carry k-1 couplings each, so the fill is
/// quadratic in the maximum degree; builds above `max_fill` raise SizeError.
inline BoundMatrix build_m_double_prime(const Graph& g, const EpidemicParams& prm,
                                        std::size_t max_fill = kDefaultMaxFill) {
  const double b = prm.beta, d = prm.delta;
  const std::size_t fill = m_double_prime_fill(g);
  if (fill > max_fill) {
    throw SizeError("M'' would hold " + std::to_string(fill) +
                    " coefficients, above the cap of " + std::to_string(max_fill));
  }
  const auto n = Eigen::Index(g.node_count());
  const auto arcs = Eigen::Index(g.arc_count());
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(fill);
  for (Eigen::Index i = 0; i < n; ++i) {
    t.emplace_back(i, i, 1.0 - d);
    for (std::size_t a : g.out_arcs(Node(i))) t.emplace_back(i, n + Eigen::Index(a), b);
  }
  const std::size_t m = g.edge_count();
  for (Eigen::Index k = 0; k < arcs; ++k) {
    const Arc arc = g.arc(std::size_t(k));
    const Eigen::Index row = n + k;
    const Eigen::Index reverse = n + Eigen::Index(std::size_t(k) < m ? std::size_t(k) + m : std::size_t(k) - m);
    t.emplace_back(row, arc.to, d * (1.0 - d));
    t.emplace_back(row, row, (1.0 - d) * (1.0 - d - b));
    t.emplace_back(row, reverse, b * d);
    const auto nbrs = g.neighbors(arc.to);
    const auto outs = g.out_arcs(arc.to);
    for (std::size_t s = 0; s < nbrs.size(); ++s) {
      if (nbrs[s] == arc.from) continue;
      t.emplace_back(row, n + Eigen::Index(outs[s]), b * (1.0 + d));
    }
  }
  SparseMatrix mpp(n + arcs, n + arcs);
  mpp.setFromTriplets(t.begin(), t.end());
  return BoundMatrix(BoundKind::MDoublePrime, std::move(mpp), g.node_count());
}

inline BoundMatrix build_bound(BoundKind kind, const Graph& g, const EpidemicParams& prm) {
  switch (kind) {
    case BoundKind::M: return build_m(g, prm);
    case BoundKind::MPrime: return build_m_prime(g, prm);
    case BoundKind::MDoublePrime: return build_m_double_prime(g, prm);
  }
  throw ParameterError("unknown bound kind");
}

// ---------------------------------------------------------------------------
// Propagation condition for M'
// ---------------------------------------------------------------------------

struct SignConditionReport {
  std::size_t horizon = 0;
  double tolerance = 0.0;
  std::vector<bool> holds;          // holds[t-1] for t = 1..horizon
  std::vector<double> min_entry;    // smallest entry of the row iterate at t
  std::optional<std::size_t> first_failure;

  bool holds_to_horizon() const { return !first_failure.has_value(); }
};

inline constexpr std::size_t kDefaultSignHorizon = 1000;
inline constexpr double kDefaultSignTolerance = 1e-12;

/// Iterates the row vector v(t)^T = v(t-1)^T M' from v(0) = (1_n, 0_|E|) and
/// records whether min_k v_k(t) >= -tol at every t <= horizon. This certifies
/// failure exactly but success only up to the horizon.
inline SignConditionReport check_sign_condition(const BoundMatrix& mp,
                                                std::size_t horizon = kDefaultSignHorizon,
                                                double tol = kDefaultSignTolerance) {
  if (horizon < 1) throw ParameterError("sign condition horizon must be >= 1");
  if (!(tol >= 0.0)) throw ParameterError("sign condition tolerance must be >= 0");
  if (mp.kind() != BoundKind::MPrime) {
    throw ParameterError("sign condition applies to M' only");
  }
  SignConditionReport rep;
  rep.horizon = horizon;
  rep.tolerance = tol;
  rep.holds.reserve(horizon);
  rep.min_entry.reserve(horizon);
  Eigen::VectorXd v = Eigen::VectorXd::Zero(Eigen::Index(mp.dim()));
  v.head(Eigen::Index(mp.node_count())).setOnes();
  const SparseMatrix mt = mp.values().transpose();
  Eigen::VectorXd next(v.size());
  for (std::size_t t = 1; t <= horizon; ++t) {
    next.noalias() = mt * v;
    v.swap(next);
    const double lo = v.size() > 0 ? v.minCoeff() : 0.0;
    const bool ok = lo >= -tol;
    rep.holds.push_back(ok);
    rep.min_entry.push_back(lo);
    if (!ok && !rep.first_failure) rep.first_failure = t;
    // Keep the iterate bounded; the sign pattern is scale-invariant.
    const double scale = v.cwiseAbs().maxCoeff();
    if (scale > 0.0 && (scale > 1e100 || scale < 1e-100)) {
      v /= scale;
    }
  }
  return rep;
}

// ---------------------------------------------------------------------------
// Triplet text format: header "dim nnz", then "row col value" per nonzero.
// ---------------------------------------------------------------------------

inline void write_triplets(std::ostream& out, const BoundMatrix& m) {
  out << m.dim() << ' ' << m.nnz() << '\n';
  const auto old_prec = out.precision(std::numeric_limits<double>::max_digits10);
  for (const auto& e : m.triplets()) out << e.row << ' ' << e.col << ' ' << e.value << '\n';
  out.precision(old_prec);
}

inline BoundMatrix read_triplets(std::istream& in, BoundKind kind, std::size_t node_count) {
  long long dim = -1, nnz = -1;
  if (!(in >> dim >> nnz) || dim < 0 || nnz < 0) throw IoError("triplets: expected header 'dim nnz'");
  std::vector<Eigen::Triplet<double>> t;
  t.reserve(std::size_t(nnz));
  for (long long k = 0; k < nnz; ++k) {
    long long r, c;
    double v;
    if (!(in >> r >> c >> v)) throw IoError("triplets: truncated entry list");
    if (r < 0 || c < 0 || r >= dim || c >= dim) throw IoError("triplets: index out of range");
    t.emplace_back(Eigen::Index(r), Eigen::Index(c), v);
  }
  const auto d = static_cast<Eigen::Index>(dim);
  SparseMatrix m(d, d);
  m.setFromTriplets(t.begin(), t.end());
  return BoundMatrix(kind, std::move(m), node_count);
}

}  // namespace sis
