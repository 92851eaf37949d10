#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "papm/structure.hpp"

namespace papm {

/// Selects one natural connection of the 2-parameter family on a W1-manifold.
/// Every real pair is admissible.
struct ConnectionParams {
  double lambda = 0.0;
  double mu = 0.0;

  friend bool operator==(const ConnectionParams&, const ConnectionParams&) = default;
};

enum class NamedConnection { D, D_tilde, canonical };

/// D = (0, 0), D~ = (0, -1/2n), canonical = (0, -1/4n).
ConnectionParams params_of(NamedConnection c, int n);
std::string to_string(NamedConnection c);
/// Accepts "D", "Dtilde" (or "D_tilde") and "canonical".
std::optional<NamedConnection> parse_named_connection(std::string_view name);

/// Torsion T(x,y,z) = g(T(x,y), z) of the connection (lambda, mu):
///   1/2n {g(y,z)th(Px) - g(x,z)th(Py)}
///   + lambda {g(y,z)th(x) - g(x,z)th(y) + g(y,Pz)th(Px) - g(x,Pz)th(Py)}
///   + mu     {g(y,Pz)th(x) - g(x,Pz)th(y) + g(y,z)th(Px) - g(x,z)th(Py)}.
Tensor3 torsion(const StructuredPoint& pt, const ConnectionParams& cp);

/// Q(x,y,z) = g(Q(x,y), z) for nabla' = nabla + Q, obtained from the torsion
/// as Q(x,y,z) = T(z,y,x).
Tensor3 q_tensor(const StructuredPoint& pt, const ConnectionParams& cp);

/// The same tensor written out directly in theta:
///   Q(y,z,w) = g(y,z){l th(w) + (m + 1/2n) th(Pw)} - g(y,w){l th(z) + (m + 1/2n) th(Pz)}
///            + g(y,Pz){l th(Pw) + m th(w)} - g(y,Pw){l th(Pz) + m th(z)}.
/// Kept separate from q_tensor so the two routes can be compared.
Tensor3 q_tensor_expanded(const StructuredPoint& pt, const ConnectionParams& cp);

/// The vector Q(x,y) with nabla'_x y = nabla_x y + Q(x,y).
Vector connection_increment(const StructuredPoint& pt, const ConnectionParams& cp, const Vector& x,
                            const Vector& y);

/// Q(e_i, e_k)^l for all basis pairs, indexed (l, i, k) like Christoffel symbols.
Tensor3 increment_coefficients(const StructuredPoint& pt, const ConnectionParams& cp);

struct PQVectors {
  Vector p;  // lambda Omega + (mu + 1/2n) P Omega
  Vector q;  // lambda P Omega + mu Omega
};
PQVectors p_q_vectors(const StructuredPoint& pt, const ConnectionParams& cp);

/// Delta = lambda^2 - mu^2 - mu / 2n.
double discriminant(const ConnectionParams& cp, int n);

/// W(y,z) = th(Py) th(z) - th(y) th(Pz).
Bilinear w_bilinear(const StructuredPoint& pt);

/// Componentwise midpoint of the parameters. All family quantities are
/// affine in (lambda, mu), so this is also the midpoint connection.
ConnectionParams average_connection(const ConnectionParams& a, const ConnectionParams& b);

/// Max-norm residuals of the naturality conditions
///   F(x,y,z) = Q(x,y,Pz) - Q(x,Py,z)   and   Q(x,y,z) = -Q(x,z,y).
struct NaturalityResiduals {
  double F_relation = 0.0;
  double q_skew = 0.0;
};
NaturalityResiduals naturality_residuals(const Tensor3& F, const Tensor3& Q, const Endomorphism& P);

/// Raises the last index of a (0,3) tensor: A(x,y)^l = g^{lm} A(x,y,m), stored (x,y,l).
Tensor3 raise_last(const Tensor3& A, const Bilinear& g_inv);

}  // namespace papm
