#ifndef NETDMD_DMDCORE_HPP
#define NETDMD_DMDCORE_HPP

/// \file dmdcore.hpp
/// Dynamic mode decomposition, with and without control, in the exact
/// (pseudoinverse) form and the reduced-order form built from truncated SVDs.
///
/// Data matrices hold observables column by column: z_k and its successor
/// y_k, plus input observables gamma_k for the controlled variants. Any
/// lifting of raw states into observables happens before these calls.

#include <complex>
#include <cstddef>
#include <optional>
#include <utility>
#include <vector>

#include "netdmd/numkernel.hpp"

namespace netdmd {

/// Eigenvalues with |lambda| below this fraction of the largest modulus get
/// no dynamic mode.
inline constexpr double kModeZeroRelTol = 1e-12;

/// G = [A B] = Y * pinv([Z; Gamma]); B is absent for plain DMD.
struct ExactLinearModel {
  Matrix a;
  std::optional<Matrix> b;
  Conditioning conditioning;
};

/// Reduced coordinates z~ = U_hat^T z.
struct ReducedLinearModel {
  Matrix a_tilde;                ///< r x r
  std::optional<Matrix> b_tilde;  ///< r x l
  Matrix u_hat;                  ///< n x r, orthonormal columns
  std::size_t p = 0;             ///< truncation rank of the input-side SVD
  std::size_t r = 0;             ///< truncation rank of the output-side SVD
};

enum class ModeSource { Exact, Reduced };

struct DynamicModes {
  std::vector<Complex> eigenvalues;
  ComplexMatrix modes;  ///< one column per kept eigenvalue
  ModeSource source = ModeSource::Exact;
  std::size_t excluded_near_zero = 0;
};

struct ReducedIdentification {
  ReducedLinearModel model;
  DynamicModes modes;
};

namespace detail {

inline void require_same_columns(const Matrix& a, const Matrix& b, const char* what) {
  if (a.cols() != b.cols()) throw Error(ErrorCode::DimensionMismatch, what);
}

inline Matrix vstack(const Matrix& top, const Matrix& bottom) {
  Matrix out(top.rows() + bottom.rows(), top.cols());
  out.topRows(top.rows()) = top;
  out.bottomRows(bottom.rows()) = bottom;
  return out;
}

inline double near_zero_cutoff(const std::vector<Complex>& values) {
  double largest = 0.0;
  for (const auto& v : values) largest = std::max(largest, std::abs(v));
  return kModeZeroRelTol * largest;
}

// Keeps (lambda, column) pairs with |lambda| above the cutoff; `make_mode`
// maps a reduced eigenvector to its full-space mode.
template <typename MakeMode>
DynamicModes collect_modes(const EigResult& e, Eigen::Index full_rows, ModeSource source, MakeMode&& make_mode) {
  DynamicModes out;
  out.source = source;
  const double cutoff = near_zero_cutoff(e.values);
  std::vector<Eigen::Index> kept;
  for (std::size_t i = 0; i < e.values.size(); ++i) {
    if (std::abs(e.values[i]) < cutoff || e.values[i] == Complex(0.0, 0.0)) {
      ++out.excluded_near_zero;
      continue;
    }
    kept.push_back(static_cast<Eigen::Index>(i));
  }
  out.modes.resize(full_rows, static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const auto i = kept[c];
    const Complex lambda = e.values[static_cast<std::size_t>(i)];
    out.eigenvalues.push_back(lambda);
    out.modes.col(static_cast<Eigen::Index>(c)) = make_mode(e.vectors.col(i), lambda);
  }
  return out;
}

}  // namespace detail

/// A = Y * pinv(Z): the minimizer of ||A Z - Y||_F with least ||A||_F.
inline ExactLinearModel dmd_exact(const Matrix& z, const Matrix& y, double rcond = kDefaultRcond) {
  detail::require_same_columns(z, y, "dmd_exact: Z and Y column counts differ");
  if (z.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "dmd_exact: Z and Y row counts differ");
  require_finite(y, "dmd_exact Y");
  auto pinv = pseudoinverse_with_conditioning(z, rcond);
  return ExactLinearModel{y * pinv.pinv, std::nullopt, pinv.conditioning};
}

/// [A B] = Y * pinv([Z; Gamma]), split after the first n columns.
inline ExactLinearModel dmdc_exact(const Matrix& z, const Matrix& y, const Matrix& gamma,
                                   double rcond = kDefaultRcond) {
  detail::require_same_columns(z, y, "dmdc_exact: Z and Y column counts differ");
  detail::require_same_columns(z, gamma, "dmdc_exact: Z and Gamma column counts differ");
  if (z.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "dmdc_exact: Z and Y row counts differ");
  require_finite(y, "dmdc_exact Y");
  const Matrix omega = detail::vstack(z, gamma);
  auto pinv = pseudoinverse_with_conditioning(omega, rcond);
  const Matrix g = y * pinv.pinv;
  return ExactLinearModel{g.leftCols(z.rows()), Matrix(g.rightCols(gamma.rows())), pinv.conditioning};
}

/// Eigenpairs of an identified A, taken directly.
inline DynamicModes dmd_modes(const ExactLinearModel& model) {
  const auto e = eig(model.a);
  return detail::collect_modes(e, model.a.rows(), ModeSource::Exact,
                               [](const auto& w, Complex) { return Eigen::VectorXcd(w); });
}

/// Reduced DMD: Z ~ U S V^T, A~ = U^T Y V S^-1, modes phi = lambda^-1 Y V S^-1 w.
inline ReducedIdentification dmd_reduced(const Matrix& z, const Matrix& y,
                                         const TruncationRule& rule = TruncationRule::machine_default()) {
  detail::require_same_columns(z, y, "dmd_reduced: Z and Y column counts differ");
  if (z.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "dmd_reduced: Z and Y row counts differ");
  require_finite(y, "dmd_reduced Y");
  if (y.size() == 0 || y.isZero(0.0)) throw Error(ErrorCode::AllZeroMatrix, "dmd_reduced: Y is all zero");

  const auto svd = truncated_svd(z, rule);
  const Matrix yvs = y * svd.v * svd.sigma.cwiseInverse().asDiagonal();

  ReducedIdentification out;
  out.model.a_tilde = svd.u.transpose() * yvs;
  out.model.u_hat = svd.u;
  out.model.p = svd.truncation_rank;
  out.model.r = svd.truncation_rank;

  const auto e = eig(out.model.a_tilde);
  const ComplexMatrix yvs_c = yvs.cast<Complex>();
  out.modes = detail::collect_modes(e, z.rows(), ModeSource::Reduced, [&](const auto& w, Complex lambda) {
    return Eigen::VectorXcd((yvs_c * w) / lambda);
  });
  return out;
}

/// Reduced DMDc. Omega = [Z; Gamma] ~ U S V^T with U^T = [U1^T U2^T];
/// Y ~ U_hat S_hat V_hat^T;
/// A~ = U_hat^T Y V S^-1 U1^T U_hat, B~ = U_hat^T Y V S^-1 U2^T;
/// modes Phi = Y V S^-1 U1^T U_hat W.
inline ReducedIdentification dmdc_reduced(const Matrix& z, const Matrix& y, const Matrix& gamma,
                                          const TruncationRule& input_rule = TruncationRule::machine_default(),
                                          const TruncationRule& output_rule = TruncationRule::machine_default()) {
  detail::require_same_columns(z, y, "dmdc_reduced: Z and Y column counts differ");
  detail::require_same_columns(z, gamma, "dmdc_reduced: Z and Gamma column counts differ");
  if (z.rows() != y.rows()) throw Error(ErrorCode::DimensionMismatch, "dmdc_reduced: Z and Y row counts differ");

  const Eigen::Index n = z.rows();
  const Eigen::Index l = gamma.rows();
  const auto omega_svd = truncated_svd(detail::vstack(z, gamma), input_rule);
  const auto y_svd = truncated_svd(y, output_rule);

  const Matrix yvs = y * omega_svd.v * omega_svd.sigma.cwiseInverse().asDiagonal();  // n x p
  const auto u1 = omega_svd.u.topRows(n);
  const auto u2 = omega_svd.u.bottomRows(l);
  const Matrix& u_hat = y_svd.u;
  const Matrix lifted_a = yvs * u1.transpose() * u_hat;  // n x r

  ReducedIdentification out;
  out.model.a_tilde = u_hat.transpose() * lifted_a;
  out.model.b_tilde = u_hat.transpose() * yvs * u2.transpose();
  out.model.u_hat = u_hat;
  out.model.p = omega_svd.truncation_rank;
  out.model.r = y_svd.truncation_rank;

  const auto e = eig(out.model.a_tilde);
  const ComplexMatrix lifted_c = lifted_a.cast<Complex>();
  out.modes = detail::collect_modes(e, n, ModeSource::Reduced,
                                    [&](const auto& w, Complex) { return Eigen::VectorXcd(lifted_c * w); });
  return out;
}

namespace detail {

inline Matrix rollout(const Matrix& a, const std::optional<Matrix>& b, const Vector& x0, const Matrix& inputs,
                      Eigen::Index m) {
  if (a.rows() != a.cols() || x0.size() != a.rows())
    throw Error(ErrorCode::DimensionMismatch, "predict: state dimension");
  if (m < 0) throw Error(ErrorCode::DimensionMismatch, "predict: negative horizon");
  if (b && b->cols() > 0) {
    if (inputs.rows() != b->cols() || inputs.cols() < m)
      throw Error(ErrorCode::DimensionMismatch, "predict: input matrix shape");
  }
  Matrix out(a.rows(), m + 1);
  out.col(0) = x0;
  for (Eigen::Index k = 0; k < m; ++k) {
    Vector next = a * out.col(k);
    if (b && b->cols() > 0) next += (*b) * inputs.col(k);
    out.col(k + 1) = next;
  }
  return out;
}

}  // namespace detail

/// Rollout x_{k+1} = A x_k + B u_k for m steps. Column 0 is x0.
inline Matrix predict(const ExactLinearModel& model, const Vector& x0, const Matrix& inputs, Eigen::Index m) {
  return detail::rollout(model.a, model.b, x0, inputs, m);
}

/// Reduced rollout on z~ = U_hat^T x0, reported in full space as U_hat z~.
inline Matrix predict(const ReducedLinearModel& model, const Vector& x0, const Matrix& inputs, Eigen::Index m) {
  if (x0.size() != model.u_hat.rows()) throw Error(ErrorCode::DimensionMismatch, "predict: x0 length");
  const Vector reduced0 = model.u_hat.transpose() * x0;
  return model.u_hat * detail::rollout(model.a_tilde, model.b_tilde, reduced0, inputs, m);
}

/// Frobenius distance between [A B] and [A_true B_true]. The B part is
/// skipped when the model has none and the truth has no input columns.
inline double model_error(const Matrix& a, const std::optional<Matrix>& b, const Matrix& truth_a,
                          const Matrix& truth_b) {
  if (a.rows() != truth_a.rows() || a.cols() != truth_a.cols())
    throw Error(ErrorCode::DimensionMismatch, "model_error: A shape");
  double sq = (a - truth_a).squaredNorm();
  if (b) {
    if (b->rows() != truth_b.rows() || b->cols() != truth_b.cols())
      throw Error(ErrorCode::DimensionMismatch, "model_error: B shape");
    sq += (*b - truth_b).squaredNorm();
  } else if (truth_b.size() > 0) {
    throw Error(ErrorCode::DimensionMismatch, "model_error: model has no B but the truth does");
  }
  if (!std::isfinite(sq)) throw Error(ErrorCode::NonFiniteEntry, "model_error: non-finite difference");
  return std::sqrt(sq);
}

inline double model_error(const ExactLinearModel& model, const Matrix& truth_a, const Matrix& truth_b) {
  return model_error(model.a, model.b, truth_a, truth_b);
}

}  // namespace netdmd

#endif  // NETDMD_DMDCORE_HPP
