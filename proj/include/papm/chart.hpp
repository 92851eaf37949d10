#pragma once

#include <functional>

#include "papm/connection.hpp"

namespace papm {

using Coordinates = Eigen::VectorXd;
using MetricField = std::function<Bilinear(const Coordinates&)>;
using StructureField = std::function<Endomorphism(const Coordinates&)>;

/// A single coordinate chart carrying a metric and an almost product
/// structure as evaluable fields. All derivatives are second-order central
/// differences: `fd_step` for derivatives of g and P, `curvature_step` for
/// derivatives of derived fields (Christoffel symbols, theta, Q, T).
struct ChartManifold {
  int n = 1;
  MetricField metric_field;
  StructureField P_field;
  double fd_step = 1e-5;
  double curvature_step = 1e-4;

  int dim() const noexcept { return 2 * n; }
};

inline constexpr double kMinFdStep = 1e-7;
inline constexpr double kMaxFdStep = 1e-1;

/// Throws GeometryError if the chart is malformed (missing fields, step out of range).
void check_chart(const ChartManifold& M);

/// Connection coefficients at a point: gamma(l, i, k) = Gamma^l_{ik},
/// i.e. nabla_{e_i} e_k = Gamma^l_{ik} e_l.
struct ConnectionCoefficients {
  Tensor3 gamma;
};
using CoefficientField = std::function<ConnectionCoefficients(const Coordinates&)>;

/// Levi-Civita coefficients from central differences of the metric.
/// Throws GeometryError if g is not SPD at a stencil point.
ConnectionCoefficients christoffels(const ChartManifold& M, const Coordinates& u);

/// F(x,y,z) = g((nabla_x P) y, z) from the Levi-Civita connection.
Tensor3 f_tensor(const ChartManifold& M, const Coordinates& u);

/// theta(z) = g^{ij} F(e_i, e_j, z), without any validation.
Covector theta_at(const ChartManifold& M, const Coordinates& u);

struct ChartPoint {
  StructuredPoint point;
  /// max |F - F_W1(theta)| where F is computed from the chart.
  double w1_residual = 0.0;
};

/// Assembles (n, g(u), P(u), theta(u)). Throws GeometryError when the
/// structure is invalid at u ("validate") or when the W1 residual exceeds
/// `w1_tol` ("w1").
ChartPoint point_of(const ChartManifold& M, const Coordinates& u, double w1_tol = 1e-6,
                    double structure_tol = kStructureTolerance);

CoefficientField levi_civita_field(const ChartManifold& M);
/// Coefficients of the natural connection (lambda, mu): Gamma + Q(e_i, e_k).
CoefficientField natural_field(const ChartManifold& M, const ConnectionParams& cp);

ConnectionCoefficients prime_coefficients(const ChartManifold& M, const Coordinates& u,
                                          const ConnectionParams& cp);

struct CurvaturePack {
  Tensor4 R;        // R(x,y,z,w) = g(R(x,y)z, w)
  Bilinear ricci;   // rho(y,z) = g^{ij} R(e_i, y, z, e_j)
  double tau = 0.0; // g^{ij} rho_ij
};

/// R(x,y)z = nabla_x nabla_y z - nabla_y nabla_x z - nabla_[x,y] z for the
/// connection given by `coeffs`, differentiated on a stencil of `curvature_step`.
CurvaturePack curvature(const ChartManifold& M, const Coordinates& u, const CoefficientField& coeffs);

/// Levi-Civita curvature straight from first and second central differences
/// of the metric (step `curvature_step`). Independent of the Christoffel
/// field used by `curvature`, so the two discretizations cross-check.
CurvaturePack metric_curvature(const ChartManifold& M, const Coordinates& u);

/// Matrix N(x,y) = (nabla_x theta) y together with the closedness evidence
/// of theta and theta o P (symmetry of N and of N(x, Py)).
struct NablaTheta {
  Bilinear matrix;
  double residual_theta = 0.0;
  double residual_theta_P = 0.0;
  bool theta_closed = false;
  bool theta_P_closed = false;
  double tolerance = 0.0;
};
NablaTheta nabla_theta(const ChartManifold& M, const Coordinates& u, const CoefficientField& coeffs,
                       double tol = 1e-6);

/// max |nabla' g| and max |nabla' P| for the natural connection (lambda, mu).
struct ParallelResiduals {
  double metric = 0.0;
  double structure = 0.0;
};
ParallelResiduals natural_parallel_residuals(const ChartManifold& M, const Coordinates& u,
                                             const ConnectionParams& cp);

struct UVTensors {
  Bilinear U;  // l (nabla'_x th) w + (m + 1/2n) (nabla'_x th) Pw
  Bilinear V;  // l (nabla'_x th) Pw + m (nabla'_x th) w
};
UVTensors uv_tensors(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);
/// Algebraic form from a given nabla' theta matrix.
UVTensors uv_from_nabla_theta(const Bilinear& nabla_prime_theta, const Endomorphism& P,
                              const ConnectionParams& cp, int n);

struct STensors {
  Bilinear S1;  // S'(y,z) = U(y,z) - 1/2n {l th(y) th(Pz) + m th(y) th(z)}
  Bilinear S2;  // S''(y,z) = V(y,Pz) + 1/2n {m th(Py) th(Pz) + l th(Py) th(z)}
};
STensors s_tensors(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);
STensors s_from_uv(const UVTensors& uv, const StructuredPoint& pt, const ConnectionParams& cp);

/// R - R' expressed through p, q, S', S'':
///   -g(p,p) pi1 - g(q,q) pi2 - g(p,q) pi3 - psi1(S') - psi2(S'').
Tensor4 curvature_correction(const StructuredPoint& pt, const ConnectionParams& cp, const STensors& s);

/// Max residual of
///   R(x,y,z,w) = R'(x,y,z,w) - Q(T(x,y),z,w) - (nabla'_x Q)(y,z,w) + (nabla'_y Q)(x,z,w)
///              + g(Q(x,z), Q(y,w)) - g(Q(y,z), Q(x,w)).
double verify_identity12(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

/// Max residual of (nabla'_x Q)(y,z,w) = g(y,z)U(x,w) - g(y,w)U(x,z) + g(y,Pz)V(x,w) - g(y,Pw)V(x,z).
double verify_identity19(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

/// Max residual of R = R' + curvature_correction.
double verify_theorem31(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

struct Cor32Residuals {
  double ricci_residual = 0.0;  // rho - rho' vs the contraction of curvature_correction
  double tau_residual = 0.0;    // tau - tau' vs the closed scalar formula
  double delta_tau = 0.0;       // tau - tau'
  double g_pp = 0.0, g_qq = 0.0, trace_S1 = 0.0, trace_S2 = 0.0;
};

/// Closed scalar formula for tau - tau':
///   -2n(2n-1) g(p,p) + 2n g(q,q) - 2(2n-1) tr S' + 2 tr S''.
double scalar_curvature_shift(int n, double g_pp, double g_qq, double trace_S1, double trace_S2);

Cor32Residuals verify_cor32(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

/// Max residual of the two relations between the antisymmetrized
/// nabla' theta and nabla theta (plain and P-composed).
double verify_26prime(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

struct TorsionParallel {
  double nabla_T = 0.0;
  double nabla_theta_prime = 0.0;
};
TorsionParallel torsion_parallel_residual(const ChartManifold& M, const Coordinates& u,
                                          const ConnectionParams& cp);

/// R' of the natural connection (lambda, mu).
CurvaturePack natural_curvature(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp);

}  // namespace papm
