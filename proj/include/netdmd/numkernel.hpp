#ifndef NETDMD_NUMKERNEL_HPP
#define NETDMD_NUMKERNEL_HPP

/// \file numkernel.hpp
/// Dense linear-algebra primitives with explicit truncation semantics:
/// truncated SVD, Moore-Penrose pseudoinverse, ordered eigendecomposition.
/// Eigen's JacobiSVD and EigenSolver do the factorizations; this layer fixes
/// the truncation, tolerance and ordering contracts on top of them.

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "netdmd/error.hpp"

namespace netdmd {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using ComplexMatrix = Eigen::MatrixXcd;
using Complex = std::complex<double>;

/// Default relative cutoff for pseudoinverse singular values.
inline constexpr double kDefaultRcond = 1e-12;
/// sigma_min / sigma_max below this marks a data matrix as ill-conditioned.
inline constexpr double kConditioningWarnRatio = 1e-10;

template <typename Derived>
bool all_finite(const Eigen::MatrixBase<Derived>& m) {
  return m.allFinite();
}

template <typename Derived>
void require_finite(const Eigen::MatrixBase<Derived>& m, const char* what) {
  if (!m.allFinite()) throw Error(ErrorCode::NonFiniteEntry, what);
}

template <typename Derived>
double frobenius_norm(const Eigen::MatrixBase<Derived>& m) {
  require_finite(m, "frobenius_norm input");
  return m.norm();
}

/// How many singular values a truncated SVD keeps.
class TruncationRule {
 public:
  enum class Kind { FixedRank, RelativeThreshold, MachineDefault };

  static TruncationRule fixed_rank(std::size_t r) {
    if (r < 1) throw Error(ErrorCode::BadConfig, "fixed rank must be >= 1");
    return TruncationRule(Kind::FixedRank, r, 0.0);
  }
  static TruncationRule relative(double tau) {
    if (!(tau > 0.0 && tau < 1.0))
      throw Error(ErrorCode::BadConfig, "relative threshold must lie in (0, 1)");
    return TruncationRule(Kind::RelativeThreshold, 0, tau);
  }
  static TruncationRule machine_default() { return TruncationRule(Kind::MachineDefault, 0, 0.0); }

  /// Parses the textual form produced by describe():
  /// "machine_default", "fixed_rank:<r>", "relative:<tau>".
  static TruncationRule parse(const std::string& text) {
    if (text == "machine_default") return machine_default();
    const auto colon = text.find(':');
    if (colon != std::string::npos) {
      const std::string head = text.substr(0, colon);
      const std::string tail = text.substr(colon + 1);
      try {
        std::size_t used = 0;
        if (head == "fixed_rank") {
          const long long r = std::stoll(tail, &used);
          if (used == tail.size() && r >= 1) return fixed_rank(static_cast<std::size_t>(r));
        } else if (head == "relative") {
          const double tau = std::stod(tail, &used);
          if (used == tail.size()) return relative(tau);
        }
      } catch (const std::logic_error&) {
      }
    }
    throw Error(ErrorCode::BadConfig, "unrecognized truncation rule '" + text + "'");
  }

  Kind kind() const noexcept { return kind_; }
  std::size_t rank() const noexcept { return rank_; }
  double tau() const noexcept { return tau_; }

  std::string describe() const {
    switch (kind_) {
      case Kind::FixedRank: return "fixed_rank:" + std::to_string(rank_);
      case Kind::RelativeThreshold: {
        std::ostringstream os;
        os.precision(17);
        os << "relative:" << tau_;
        return os.str();
      }
      case Kind::MachineDefault: break;
    }
    return "machine_default";
  }

  friend bool operator==(const TruncationRule&, const TruncationRule&) = default;

 private:
  TruncationRule(Kind kind, std::size_t rank, double tau) : kind_(kind), rank_(rank), tau_(tau) {}

  Kind kind_;
  std::size_t rank_;
  double tau_;
};

struct SvdResult {
  Matrix u;      ///< rows x p, orthonormal columns
  Vector sigma;  ///< p values, descending
  Matrix v;      ///< cols x p, orthonormal columns
  std::size_t truncation_rank = 0;
  /// Fraction of squared singular-value mass that was dropped.
  double discarded_energy = 0.0;
};

/// Singular-value statistics of a data matrix, attached to identified models.
struct Conditioning {
  double sigma_max = 0.0;
  double sigma_min = 0.0;
  double rcond_used = kDefaultRcond;
  bool warning = false;

  double ratio() const { return sigma_max > 0.0 ? sigma_min / sigma_max : 0.0; }
};

namespace detail {

inline Eigen::JacobiSVD<Matrix> thin_svd(const Matrix& m) {
  return Eigen::JacobiSVD<Matrix>(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
}

inline Conditioning conditioning_of(const Vector& sigma, double rcond) {
  Conditioning c;
  c.rcond_used = rcond;
  if (sigma.size() > 0) {
    c.sigma_max = sigma(0);
    c.sigma_min = sigma(sigma.size() - 1);
  }
  c.warning = !(c.ratio() >= kConditioningWarnRatio);
  return c;
}

}  // namespace detail

inline SvdResult truncated_svd(const Matrix& m, const TruncationRule& rule) {
  require_finite(m, "truncated_svd input");
  const bool relative = rule.kind() != TruncationRule::Kind::FixedRank;
  if (relative && (m.size() == 0 || m.isZero(0.0)))
    throw Error(ErrorCode::AllZeroMatrix, "relative truncation of an all-zero matrix is undefined");

  const auto svd = detail::thin_svd(m);
  const Vector& s = svd.singularValues();
  const auto k = static_cast<std::size_t>(s.size());

  std::size_t keep = 0;
  switch (rule.kind()) {
    case TruncationRule::Kind::FixedRank: {
      // Exact zeros are never kept; their inverse is undefined downstream.
      std::size_t nonzero = 0;
      while (nonzero < k && s(static_cast<Eigen::Index>(nonzero)) > 0.0) ++nonzero;
      keep = std::min(rule.rank(), nonzero);
      break;
    }
    case TruncationRule::Kind::RelativeThreshold:
    case TruncationRule::Kind::MachineDefault: {
      const double tau = rule.kind() == TruncationRule::Kind::RelativeThreshold
                             ? rule.tau()
                             : static_cast<double>(std::max(m.rows(), m.cols())) *
                                   std::numeric_limits<double>::epsilon();
      const double cutoff = tau * s(0);
      while (keep < k && s(static_cast<Eigen::Index>(keep)) >= cutoff) ++keep;
      break;
    }
  }

  const auto p = static_cast<Eigen::Index>(keep);
  SvdResult out;
  out.u = svd.matrixU().leftCols(p);
  out.sigma = s.head(p);
  out.v = svd.matrixV().leftCols(p);
  out.truncation_rank = keep;
  const double total = s.squaredNorm();
  out.discarded_energy = total > 0.0 ? s.tail(s.size() - p).squaredNorm() / total : 0.0;
  return out;
}

struct PseudoinverseResult {
  Matrix pinv;
  Conditioning conditioning;
};

/// Pseudoinverse plus the singular-value statistics of the input.
inline PseudoinverseResult pseudoinverse_with_conditioning(const Matrix& m, double rcond = kDefaultRcond) {
  require_finite(m, "pseudoinverse input");
  if (!(rcond >= 0.0)) throw Error(ErrorCode::BadConfig, "rcond must be non-negative");

  PseudoinverseResult out;
  out.pinv = Matrix::Zero(m.cols(), m.rows());
  if (m.size() == 0) {
    out.conditioning = detail::conditioning_of(Vector(), rcond);
    return out;
  }
  const auto svd = detail::thin_svd(m);
  const Vector& s = svd.singularValues();
  out.conditioning = detail::conditioning_of(s, rcond);
  const double cutoff = rcond * s(0);
  Eigen::Index keep = 0;
  while (keep < s.size() && s(keep) > 0.0 && s(keep) >= cutoff) ++keep;
  if (keep > 0) {
    const Vector inv = s.head(keep).cwiseInverse();
    out.pinv = svd.matrixV().leftCols(keep) * inv.asDiagonal() * svd.matrixU().leftCols(keep).transpose();
  }
  return out;
}

/// Moore-Penrose pseudoinverse; singular values below rcond * sigma_max are zeroed.
inline Matrix pseudoinverse(const Matrix& m, double rcond = kDefaultRcond) {
  return pseudoinverse_with_conditioning(m, rcond).pinv;
}

struct EigResult {
  std::vector<Complex> values;
  ComplexMatrix vectors;  ///< unit 2-norm columns, aligned with values
};

namespace detail {

inline bool eig_order(const Complex& a, const Complex& b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() > b.imag();
}

// Unit norm, first significant component rotated onto the positive real axis.
inline void canonicalize(Eigen::Ref<Eigen::VectorXcd> w) {
  const double norm = w.norm();
  if (norm == 0.0) return;
  w /= norm;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    const double mag = std::abs(w(i));
    if (mag > 1e-12) {
      w *= std::conj(w(i)) / mag;
      w(i) = Complex(w(i).real(), 0.0);
      return;
    }
  }
}

}  // namespace detail

/// Eigendecomposition with a deterministic order: descending modulus, then
/// descending real part, then descending imaginary part.
inline EigResult eig(const Matrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::NotSquare, "eig requires a square matrix");
  require_finite(m, "eig input");
  EigResult out;
  if (m.size() == 0) return out;

  Eigen::EigenSolver<Matrix> solver(m, true);
  if (solver.info() != Eigen::Success)
    throw Error(ErrorCode::ConvergenceFailure, "eigenvalue iteration did not converge");

  const Eigen::VectorXcd values = solver.eigenvalues();
  const ComplexMatrix vectors = solver.eigenvectors();
  std::vector<Eigen::Index> order(static_cast<std::size_t>(values.size()));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return detail::eig_order(values(a), values(b)); });

  out.values.reserve(order.size());
  out.vectors.resize(m.rows(), m.cols());
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto col = static_cast<Eigen::Index>(k);
    out.values.push_back(values(order[k]));
    out.vectors.col(col) = vectors.col(order[k]);
    detail::canonicalize(out.vectors.col(col));
  }
  return out;
}

}  // namespace netdmd

#endif  // NETDMD_NUMKERNEL_HPP
