#pragma once

#include <span>
#include <string>
#include <vector>

#include "papm/chart.hpp"

namespace papm {

/// Absolute tolerance for parameter equalities (lambda = 0, Delta = 0, ...).
inline constexpr double kParameterTolerance = 1e-12;

struct ClosednessEvidence {
  bool theta_closed = false;
  bool theta_P_closed = false;
  double residual_theta = 0.0;
  double residual_theta_P = 0.0;
  double tolerance = 0.0;
};

ClosednessEvidence evidence_from(const NablaTheta& nt);
/// Rebuilds the flags from residuals and a tolerance.
ClosednessEvidence make_evidence(double residual_theta, double residual_theta_P, double tol);
/// A form counts as closed only if it is closed at every sampled point;
/// the aggregated residuals are the maxima.
ClosednessEvidence aggregate(std::span<const ClosednessEvidence> per_point);

enum class CaseId { I_a, I_b, I_c, II };
enum class Expectation { yes, no, conditional };
enum class Clause { i, ii, iii, iv };

std::string to_string(CaseId c);
std::string to_string(Expectation e);
std::string to_string(Clause c);

struct ClassificationVerdict {
  CaseId case_id = CaseId::II;
  Expectation p_tensor_expected = Expectation::no;
  Clause theorem43_clause = Clause::iii;
  double delta = 0.0;
  std::string notes;
};

/// Partition of the parameter plane by Delta and the special points D, D~.
CaseId case_of(const ConnectionParams& cp, int n);

/// Decides whether R' of the connection (lambda, mu) should be a Riemannian
/// P-tensor given closedness of theta and theta o P.
ClassificationVerdict classify_connection(const ConnectionParams& cp, int n, const ClosednessEvidence& ev);

enum class Agreement { agree, mismatch, not_judged };
std::string to_string(Agreement a);

/// Compares a verdict with the numerical P-tensor test of R'. A conditional
/// verdict is judged only when R' is numerically a P-tensor: then both forms
/// must be non-closed and theta must have mixed parity.
Agreement judge(const ClassificationVerdict& v, bool numeric_p_tensor, const ClosednessEvidence& ev,
                bool pure_parity);

struct ResidualPair {
  double first = 0.0;
  double second = 0.0;
  double max() const { return std::max(first, second); }
};

/// Residuals of
///   U(y,z) - U(z,y) + l/2n {th(Py)th(z) - th(y)th(Pz)} = 0,
///   V(y,z) - V(z,y) + m/2n {th(Py)th(z) - th(y)th(Pz)} = 0;
/// both vanish iff R' is a Riemannian P-tensor.
ResidualPair prop41_residuals(const Bilinear& U, const Bilinear& V, const StructuredPoint& pt,
                              const ConnectionParams& cp);

/// Residuals of the same criterion written in the Levi-Civita derivative of theta:
///   l x1 + (m + 1/2n) x2 = 0,  m x1 + l x2 = 0,
/// x1 = (nabla_y th)z - (nabla_z th)y,  x2 = (nabla_y th)Pz - (nabla_z th)Py.
ResidualPair prop42_residuals(const Bilinear& nabla_theta, const StructuredPoint& pt,
                              const ConnectionParams& cp);

/// Constraints on a manifold admitting a natural connection with parallel torsion.
std::vector<Violation> cor52_check(const ClosednessEvidence& ev, const ClassFlags& flags, bool torsion_parallel);

enum class TorsionCase { i, ii, iii, iv, inconsistent };
std::string to_string(TorsionCase c);

struct TorsionVerdict {
  TorsionCase case_id = TorsionCase::inconsistent;
  std::string requires_text;
  /// Whether W and the class flags meet what the case requires.
  bool requirements_met = true;
};

/// Case analysis for a natural connection with parallel torsion and
/// Riemannian P-tensor of curvature (the caller asserts both).
TorsionVerdict classify_parallel_torsion(const ConnectionParams& cp, const Bilinear& W, const ClassFlags& flags,
                                         double tol);

}  // namespace papm
