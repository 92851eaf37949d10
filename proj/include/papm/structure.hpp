#pragma once

#include <string>
#include <vector>

#include "papm/tensor.hpp"

namespace papm {

/// Componentwise tolerance for exact (catalog) structure data.
inline constexpr double kStructureTolerance = 1e-10;
/// Tolerance of the curvature-identity predicates on algebraic data.
inline constexpr double kIdentityTolerance = 1e-8;

/// Pointwise data of a Riemannian almost product manifold with tr P = 0.
/// theta is the Lee-type form of the W1 class; F is derived from it.
struct StructuredPoint {
  int n = 1;  // half dimension
  Bilinear g;
  Endomorphism P;
  Covector theta;

  int dim() const noexcept { return 2 * n; }
};

struct Violation {
  std::string check;
  double residual = 0.0;
  std::string message;
};

/// Checks P^2 = I, P^T g P = g, tr P = 0 and g SPD. Empty result means valid.
std::vector<Violation> validate(const StructuredPoint& pt, double tol = kStructureTolerance);

/// Throws GeometryError listing the violations, if any.
void require_valid(const StructuredPoint& pt, double tol = kStructureTolerance);

/// theta o P, i.e. the covector x -> theta(P x).
Covector compose(const Covector& theta, const Endomorphism& P);

/// g~(x, y) = g(x, P y).
Bilinear associated_metric(const StructuredPoint& pt);

/// Fundamental tensor of a W1 point:
/// F(x,y,z) = 1/2n {g(x,y)th(z) - g(x,Py)th(Pz) + g(x,z)th(y) - g(x,Pz)th(Py)}.
Tensor3 build_F(const StructuredPoint& pt);

/// Checks F(x,y,z) = F(x,z,y) = -F(x,Py,Pz) and F(x,y,Pz) = -F(x,Py,z).
std::vector<Violation> check_F_properties(const Tensor3& F, const Endomorphism& P,
                                          double tol = kStructureTolerance);

struct ThetaParts {
  Covector vertical;    // 1/2 (theta - theta o P)
  Covector horizontal;  // 1/2 (theta + theta o P)
};
ThetaParts theta_parts(const StructuredPoint& pt);

enum class Parity { odd, even, mixed };
std::string to_string(Parity p);

struct ClassFlags {
  bool is_W0 = false;
  bool in_W3bar = false;  // theta o P = -theta, theta != 0
  bool in_W6bar = false;  // theta o P = theta, theta != 0
  Parity theta_parity = Parity::mixed;
  /// Max deviation of F from the subclass closed form, when a subclass flag is set.
  double shape_residual = 0.0;
};

/// Classifies the point by the parity of theta. Parity is judged on
/// max|theta o P -+ theta| relative to max|theta|; a point with
/// max|theta| < tol is W0. Throws GeometryError on an invalid point.
ClassFlags class_flags(const StructuredPoint& pt, double tol = kStructureTolerance);

/// psi1(S)(x,y,z,w) = g(y,z)S(x,w) - g(x,z)S(y,w) + S(y,z)g(x,w) - S(x,z)g(y,w).
Tensor4 psi1(const Bilinear& S, const Bilinear& g);
/// psi2(S)(x,y,z,w) = psi1(S)(x,y,Pz,Pw).
Tensor4 psi2(const Bilinear& S, const Bilinear& g, const Endomorphism& P);

struct PiTensors {
  Tensor4 pi1;  // 1/2 psi1(g)
  Tensor4 pi2;  // 1/2 psi2(g)
  Tensor4 pi3;  // psi1(g~)
};
PiTensors pi_tensors(const Bilinear& g, const Endomorphism& P);

/// Max-norm residuals of the identities defining curvature-like and
/// Riemannian P-tensors.
struct CurvatureIdentityResiduals {
  double antisym_first = 0.0;   // L(x,y,z,w) + L(y,x,z,w)
  double antisym_second = 0.0;  // L(x,y,z,w) + L(x,y,w,z)
  double bianchi = 0.0;         // cyclic sum over (x,y,z)
  double p_invariance = 0.0;    // L(x,y,Pz,Pw) - L(x,y,z,w)

  double curvature_like() const { return std::max({antisym_first, antisym_second, bianchi}); }
  double p_tensor() const { return std::max(curvature_like(), p_invariance); }
};

CurvatureIdentityResiduals curvature_identity_residuals(const Tensor4& L, const Endomorphism& P);
CurvatureIdentityResiduals curvature_identity_residuals(const Tensor4& L);

bool is_curvature_like(const Tensor4& L, double tol = kIdentityTolerance);
bool is_P_tensor(const Tensor4& L, const Endomorphism& P, double tol = kIdentityTolerance);

/// L(x,y,Pz,Pw) for every basis tuple.
Tensor4 apply_P_last_two(const Tensor4& L, const Endomorphism& P);

}  // namespace papm
