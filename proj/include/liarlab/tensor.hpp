#pragma once

// Exact dense complex linear algebra over ordered tensor products of small
// finite-dimensional factors. Factor order is fixed as
// (system, apparatus [, apparatus2] [, environment]); flattening is row-major.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "liarlab/errors.hpp"

namespace liarlab {

using cplx = std::complex<double>;

inline constexpr double kUnitaryTol = 1e-10;
inline constexpr double kEqualityTol = 1e-12;
inline constexpr std::size_t kDimensionCap = 1'000'000;

/// Ordered list of factor dimensions.
class FactorDims {
 public:
  explicit FactorDims(std::vector<std::size_t> dims) : dims_(std::move(dims)) {
    if (dims_.empty()) throw ArgumentError("FactorDims: no factors");
    std::size_t total = 1;
    for (std::size_t d : dims_) {
      if (d < 1) throw ArgumentError("FactorDims: dimension < 1");
      if (d > kDimensionCap / total)
        throw CapacityError("FactorDims: product of dims exceeds cap");
      total *= d;
    }
    total_ = total;
  }
  FactorDims(std::initializer_list<std::size_t> dims)
      : FactorDims(std::vector<std::size_t>(dims)) {}

  std::size_t factors() const { return dims_.size(); }
  std::size_t dim(std::size_t f) const { return dims_[f]; }
  std::size_t total() const { return total_; }
  const std::vector<std::size_t>& dims() const { return dims_; }

  /// Row-major stride of factor f (product of dimensions after f).
  std::size_t stride(std::size_t f) const {
    std::size_t s = 1;
    for (std::size_t i = f + 1; i < dims_.size(); ++i) s *= dims_[i];
    return s;
  }

  bool operator==(const FactorDims& o) const { return dims_ == o.dims_; }

 private:
  std::vector<std::size_t> dims_;
  std::size_t total_;
};

/// Row-major flat index of a per-factor label tuple.
inline std::size_t basis_index(std::span<const std::size_t> labels,
                               const FactorDims& dims) {
  if (labels.size() != dims.factors())
    throw IndexError("basis_index: label count != factor count");
  std::size_t idx = 0;
  for (std::size_t f = 0; f < labels.size(); ++f) {
    if (labels[f] >= dims.dim(f))
      throw IndexError("basis_index: label out of range for factor " +
                       std::to_string(f));
    idx = idx * dims.dim(f) + labels[f];
  }
  return idx;
}

inline std::size_t basis_index(std::initializer_list<std::size_t> labels,
                               const FactorDims& dims) {
  return basis_index(std::span<const std::size_t>(labels.begin(), labels.size()),
                     dims);
}

/// Complex amplitudes over an ordered tensor product of labeled factors.
class StateVector {
 public:
  StateVector(FactorDims dims, std::vector<cplx> amplitudes)
      : dims_(std::move(dims)), amps_(std::move(amplitudes)) {
    if (amps_.size() != dims_.total())
      throw DimensionError("StateVector: amplitude count != product of dims");
  }

  /// Computational basis ket with the given per-factor labels.
  static StateVector basis(FactorDims dims,
                           std::initializer_list<std::size_t> labels) {
    std::vector<cplx> amps(dims.total(), cplx{0, 0});
    amps[basis_index(labels, dims)] = cplx{1, 0};
    return StateVector(std::move(dims), std::move(amps));
  }

  const FactorDims& dims() const { return dims_; }
  std::size_t size() const { return amps_.size(); }
  const std::vector<cplx>& amplitudes() const { return amps_; }
  const cplx& operator[](std::size_t i) const { return amps_[i]; }

  double norm_sq() const {
    double s = 0;
    for (const cplx& a : amps_) s += std::norm(a);
    return s;
  }
  double norm() const { return std::sqrt(norm_sq()); }
  bool is_normalized(double tol = kUnitaryTol) const {
    return std::abs(norm() - 1.0) <= tol;
  }

 private:
  FactorDims dims_;
  std::vector<cplx> amps_;
};

inline cplx inner(const StateVector& a, const StateVector& b) {
  if (a.size() != b.size()) throw DimensionError("inner: size mismatch");
  cplx s{0, 0};
  for (std::size_t i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// Dense square operator, row-major.
class LinearOperator {
 public:
  explicit LinearOperator(std::size_t dim)
      : dim_(dim), entries_(dim * dim, cplx{0, 0}) {
    if (dim < 1) throw ArgumentError("LinearOperator: dim < 1");
    if (dim > kDimensionCap) throw CapacityError("LinearOperator: dim exceeds cap");
  }
  LinearOperator(std::size_t dim, std::vector<cplx> entries)
      : dim_(dim), entries_(std::move(entries)) {
    if (entries_.size() != dim * dim)
      throw DimensionError("LinearOperator: entry count != dim^2");
    for (const cplx& e : entries_)
      if (!std::isfinite(e.real()) || !std::isfinite(e.imag()))
        throw ArgumentError("LinearOperator: non-finite entry");
  }

  static LinearOperator identity(std::size_t dim) {
    LinearOperator op(dim);
    for (std::size_t i = 0; i < dim; ++i) op.at(i, i) = cplx{1, 0};
    return op;
  }

  std::size_t dim() const { return dim_; }
  const std::vector<cplx>& entries() const { return entries_; }
  cplx& at(std::size_t r, std::size_t c) { return entries_[r * dim_ + c]; }
  const cplx& at(std::size_t r, std::size_t c) const {
    return entries_[r * dim_ + c];
  }

  LinearOperator adjoint() const {
    LinearOperator out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t c = 0; c < dim_; ++c)
        out.at(r, c) = std::conj(at(c, r));
    return out;
  }

  LinearOperator operator*(const LinearOperator& o) const {
    if (dim_ != o.dim_) throw DimensionError("operator*: dim mismatch");
    LinearOperator out(dim_);
    for (std::size_t r = 0; r < dim_; ++r)
      for (std::size_t k = 0; k < dim_; ++k) {
        const cplx a = at(r, k);
        if (a == cplx{0, 0}) continue;
        for (std::size_t c = 0; c < dim_; ++c) out.at(r, c) += a * o.at(k, c);
      }
    return out;
  }

 private:
  std::size_t dim_;
  std::vector<cplx> entries_;
};

/// Max-norm of U†U − I.
inline double unitarity_defect(const LinearOperator& u) {
  const std::size_t d = u.dim();
  double worst = 0;
  for (std::size_t r = 0; r < d; ++r)
    for (std::size_t c = 0; c < d; ++c) {
      cplx s{0, 0};
      for (std::size_t k = 0; k < d; ++k)
        s += std::conj(u.at(k, r)) * u.at(k, c);
      if (r == c) s -= cplx{1, 0};
      worst = std::max(worst, std::abs(s));
    }
  return worst;
}

inline double hermiticity_defect(const LinearOperator& a) {
  double worst = 0;
  for (std::size_t r = 0; r < a.dim(); ++r)
    for (std::size_t c = 0; c < a.dim(); ++c)
      worst = std::max(worst, std::abs(a.at(r, c) - std::conj(a.at(c, r))));
  return worst;
}

/// LinearOperator with U†U = I enforced at construction.
class UnitaryOperator {
 public:
  explicit UnitaryOperator(LinearOperator op, double tol = kUnitaryTol)
      : op_(std::move(op)) {
    if (unitarity_defect(op_) > tol)
      throw ArgumentError("UnitaryOperator: not unitary within tolerance");
  }

  std::size_t dim() const { return op_.dim(); }
  const LinearOperator& op() const { return op_; }
  const cplx& at(std::size_t r, std::size_t c) const { return op_.at(r, c); }

 private:
  LinearOperator op_;
};

/// Hermitian idempotent operator.
class Projector {
 public:
  explicit Projector(LinearOperator op, double tol = kUnitaryTol)
      : op_(std::move(op)) {
    if (hermiticity_defect(op_) > tol)
      throw ArgumentError("Projector: not Hermitian within tolerance");
    LinearOperator sq = op_ * op_;
    double worst = 0;
    for (std::size_t i = 0; i < op_.dim() * op_.dim(); ++i)
      worst = std::max(worst, std::abs(sq.entries()[i] - op_.entries()[i]));
    if (worst > tol) throw ArgumentError("Projector: P^2 != P within tolerance");
  }

  /// Diagonal 0/1 projector onto the given flat basis indices.
  static Projector onto_basis_span(std::size_t dim,
                                   const std::vector<std::size_t>& indices) {
    LinearOperator op(dim);
    for (std::size_t i : indices) {
      if (i >= dim) throw IndexError("Projector: index out of range");
      op.at(i, i) = cplx{1, 0};
    }
    return Projector(std::move(op));
  }

  std::size_t dim() const { return op_.dim(); }
  const LinearOperator& op() const { return op_; }

 private:
  LinearOperator op_;
};

/// Hermitian, unit-trace, positive-semidefinite (to round-off) operator.
class DensityOperator {
 public:
  explicit DensityOperator(LinearOperator op, double tol = kUnitaryTol)
      : op_(std::move(op)) {
    if (hermiticity_defect(op_) > tol)
      throw ArgumentError("DensityOperator: not Hermitian");
    cplx tr{0, 0};
    for (std::size_t i = 0; i < op_.dim(); ++i) tr += op_.at(i, i);
    if (std::abs(tr - cplx{1, 0}) > tol)
      throw ArgumentError("DensityOperator: trace != 1");
    if (min_eigenvalue() < -1e-8)
      throw ArgumentError("DensityOperator: negative eigenvalue");
  }

  std::size_t dim() const { return op_.dim(); }
  const LinearOperator& op() const { return op_; }
  const cplx& at(std::size_t r, std::size_t c) const { return op_.at(r, c); }

  std::vector<double> eigenvalues() const {
    const std::size_t d = op_.dim();
    Eigen::MatrixXcd m(d, d);
    for (std::size_t r = 0; r < d; ++r)
      for (std::size_t c = 0; c < d; ++c) m(r, c) = op_.at(r, c);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(m);
    std::vector<double> ev(solver.eigenvalues().data(),
                           solver.eigenvalues().data() + d);
    return ev;
  }
  double min_eigenvalue() const {
    auto ev = eigenvalues();
    return *std::min_element(ev.begin(), ev.end());
  }
  double purity() const {
    double s = 0;
    for (std::size_t r = 0; r < op_.dim(); ++r)
      for (std::size_t c = 0; c < op_.dim(); ++c)
        s += std::norm(op_.at(r, c));
    return s;
  }

 private:
  LinearOperator op_;
};

/// Kronecker product of states; dims are concatenated.
inline StateVector tensor_state(const StateVector& a, const StateVector& b) {
  std::vector<std::size_t> dims = a.dims().dims();
  dims.insert(dims.end(), b.dims().dims().begin(), b.dims().dims().end());
  FactorDims fd(std::move(dims));  // throws CapacityError past the cap
  std::vector<cplx> amps(fd.total());
  const std::size_t nb = b.size();
  for (std::size_t i = 0; i < a.size(); ++i)
    for (std::size_t j = 0; j < nb; ++j) amps[i * nb + j] = a[i] * b[j];
  return StateVector(std::move(fd), std::move(amps));
}

/// Kronecker product of operators.
inline LinearOperator tensor_op(const LinearOperator& a,
                                const LinearOperator& b) {
  const std::size_t da = a.dim(), db = b.dim();
  if (da > kDimensionCap / db)
    throw CapacityError("tensor_op: combined dimension exceeds cap");
  LinearOperator out(da * db);
  for (std::size_t ra = 0; ra < da; ++ra)
    for (std::size_t ca = 0; ca < da; ++ca) {
      const cplx v = a.at(ra, ca);
      if (v == cplx{0, 0}) continue;
      for (std::size_t rb = 0; rb < db; ++rb)
        for (std::size_t cb = 0; cb < db; ++cb)
          out.at(ra * db + rb, ca * db + cb) = v * b.at(rb, cb);
    }
  return out;
}

/// Matrix-vector action; preserves the factor structure of psi.
inline StateVector apply(const LinearOperator& u, const StateVector& psi) {
  if (u.dim() != psi.size())
    throw DimensionError("apply: operator dim != state dim");
  std::vector<cplx> out(psi.size(), cplx{0, 0});
  for (std::size_t r = 0; r < u.dim(); ++r) {
    cplx s{0, 0};
    for (std::size_t c = 0; c < u.dim(); ++c) s += u.at(r, c) * psi[c];
    out[r] = s;
  }
  return StateVector(psi.dims(), std::move(out));
}

inline StateVector apply(const UnitaryOperator& u, const StateVector& psi) {
  return apply(u.op(), psi);
}

/// ||P psi||^2, clamped to [0,1].
inline double project_weight(const Projector& p, const StateVector& psi) {
  if (p.dim() != psi.size())
    throw DimensionError("project_weight: dim mismatch");
  // <psi|P|psi> is real for Hermitian idempotent P.
  cplx s{0, 0};
  for (std::size_t r = 0; r < p.dim(); ++r) {
    cplx row{0, 0};
    for (std::size_t c = 0; c < p.dim(); ++c) row += p.op().at(r, c) * psi[c];
    s += std::conj(psi[r]) * row;
  }
  return std::clamp(s.real(), 0.0, 1.0);
}

/// Reduced density operator over the kept factor positions (ascending order).
inline DensityOperator partial_trace(const StateVector& psi,
                                     std::vector<std::size_t> keep) {
  if (keep.empty()) throw ArgumentError("partial_trace: empty keep set");
  std::sort(keep.begin(), keep.end());
  keep.erase(std::unique(keep.begin(), keep.end()), keep.end());
  const FactorDims& fd = psi.dims();
  for (std::size_t f : keep)
    if (f >= fd.factors()) throw ArgumentError("partial_trace: bad factor position");

  std::vector<std::size_t> traced;
  for (std::size_t f = 0; f < fd.factors(); ++f)
    if (!std::binary_search(keep.begin(), keep.end(), f)) traced.push_back(f);

  std::size_t dkeep = 1, dtrace = 1;
  for (std::size_t f : keep) dkeep *= fd.dim(f);
  for (std::size_t f : traced) dtrace *= fd.dim(f);

  // flat index of (kept multi-index k, traced multi-index t)
  auto flat = [&](std::size_t k, std::size_t t) {
    std::size_t idx = 0;
    std::vector<std::size_t> labels(fd.factors());
    for (auto it = keep.rbegin(); it != keep.rend(); ++it) {
      labels[*it] = k % fd.dim(*it);
      k /= fd.dim(*it);
    }
    for (auto it = traced.rbegin(); it != traced.rend(); ++it) {
      labels[*it] = t % fd.dim(*it);
      t /= fd.dim(*it);
    }
    for (std::size_t f = 0; f < fd.factors(); ++f)
      idx = idx * fd.dim(f) + labels[f];
    return idx;
  };

  LinearOperator rho(dkeep);
  for (std::size_t r = 0; r < dkeep; ++r)
    for (std::size_t c = 0; c < dkeep; ++c) {
      cplx s{0, 0};
      for (std::size_t t = 0; t < dtrace; ++t)
        s += psi[flat(r, t)] * std::conj(psi[flat(c, t)]);
      rho.at(r, c) = s;
    }
  return DensityOperator(std::move(rho));
}

}  // namespace liarlab
