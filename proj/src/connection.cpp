#include "papm/connection.hpp"

namespace papm {

ConnectionParams params_of(NamedConnection c, int n) {
  const double h = 1.0 / (2.0 * n);
  switch (c) {
    case NamedConnection::D: return {0.0, 0.0};
    case NamedConnection::D_tilde: return {0.0, -h};
    case NamedConnection::canonical: return {0.0, -0.5 * h};
  }
  return {};
}

std::string to_string(NamedConnection c) {
  switch (c) {
    case NamedConnection::D: return "D";
    case NamedConnection::D_tilde: return "Dtilde";
    case NamedConnection::canonical: return "canonical";
  }
  return "";
}

std::optional<NamedConnection> parse_named_connection(std::string_view name) {
  if (name == "D") return NamedConnection::D;
  if (name == "Dtilde" || name == "D_tilde") return NamedConnection::D_tilde;
  if (name == "canonical") return NamedConnection::canonical;
  return std::nullopt;
}

Tensor3 torsion(const StructuredPoint& pt, const ConnectionParams& cp) {
  const Bilinear& g = pt.g;
  const Bilinear gt = associated_metric(pt);
  const Covector& th = pt.theta;
  const Covector thP = compose(th, pt.P);
  const double c = 1.0 / (2.0 * pt.n);
  const double l = cp.lambda, m = cp.mu;
  return Tensor3::generate(pt.dim(), [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2];
    return c * (g(y, z) * thP(x) - g(x, z) * thP(y)) +
           l * (g(y, z) * th(x) - g(x, z) * th(y) + gt(y, z) * thP(x) - gt(x, z) * thP(y)) +
           m * (gt(y, z) * th(x) - gt(x, z) * th(y) + g(y, z) * thP(x) - g(x, z) * thP(y));
  });
}

Tensor3 q_tensor(const StructuredPoint& pt, const ConnectionParams& cp) {
  const Tensor3 T = torsion(pt, cp);
  return Tensor3::generate(pt.dim(), [&](const auto& i) { return T(i[2], i[1], i[0]); });
}

Tensor3 q_tensor_expanded(const StructuredPoint& pt, const ConnectionParams& cp) {
  const Bilinear& g = pt.g;
  const Bilinear gt = associated_metric(pt);
  const Covector& th = pt.theta;
  const Covector thP = compose(th, pt.P);
  const double l = cp.lambda, m = cp.mu, mc = cp.mu + 1.0 / (2.0 * pt.n);
  return Tensor3::generate(pt.dim(), [&](const auto& i) {
    const int y = i[0], z = i[1], w = i[2];
    return g(y, z) * (l * th(w) + mc * thP(w)) - g(y, w) * (l * th(z) + mc * thP(z)) +
           gt(y, z) * (l * thP(w) + m * th(w)) - gt(y, w) * (l * thP(z) + m * th(z));
  });
}

Vector connection_increment(const StructuredPoint& pt, const ConnectionParams& cp, const Vector& x,
                            const Vector& y) {
  const Vector omega = sharp(pt.g, pt.theta);
  const Vector P_omega = pt.P * omega;
  const Vector Px = pt.P * x;
  const Vector Py = pt.P * y;
  const double l = cp.lambda, m = cp.mu, mc = cp.mu + 1.0 / (2.0 * pt.n);
  const double g_xPy = x.dot(pt.g * Py);
  const double g_xy = x.dot(pt.g * y);
  const double th_y = pt.theta.dot(y);
  const double th_Py = pt.theta.dot(Py);
  return g_xPy * (l * P_omega + m * omega) - (l * th_Py + m * th_y) * Px +
         g_xy * (l * omega + mc * P_omega) - (l * th_y + mc * th_Py) * x;
}

Tensor3 increment_coefficients(const StructuredPoint& pt, const ConnectionParams& cp) {
  const int d = pt.dim();
  Tensor3 out(d);
  const auto I = Eigen::MatrixXd::Identity(d, d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k) {
      const Vector v = connection_increment(pt, cp, I.col(i), I.col(k));
      for (int l = 0; l < d; ++l) out(l, i, k) = v(l);
    }
  return out;
}

PQVectors p_q_vectors(const StructuredPoint& pt, const ConnectionParams& cp) {
  const Vector omega = sharp(pt.g, pt.theta);
  const Vector P_omega = pt.P * omega;
  const double mc = cp.mu + 1.0 / (2.0 * pt.n);
  return {cp.lambda * omega + mc * P_omega, cp.lambda * P_omega + cp.mu * omega};
}

double discriminant(const ConnectionParams& cp, int n) {
  return cp.lambda * cp.lambda - cp.mu * cp.mu - cp.mu / (2.0 * n);
}

Bilinear w_bilinear(const StructuredPoint& pt) {
  const Covector thP = compose(pt.theta, pt.P);
  return thP * pt.theta.transpose() - pt.theta * thP.transpose();
}

ConnectionParams average_connection(const ConnectionParams& a, const ConnectionParams& b) {
  return {0.5 * (a.lambda + b.lambda), 0.5 * (a.mu + b.mu)};
}

NaturalityResiduals naturality_residuals(const Tensor3& F, const Tensor3& Q, const Endomorphism& P) {
  const int d = F.dim();
  NaturalityResiduals r;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z) {
        double q_y_Pz = 0.0, q_Py_z = 0.0;
        for (int a = 0; a < d; ++a) {
          q_y_Pz += P(a, z) * Q(x, y, a);
          q_Py_z += P(a, y) * Q(x, a, z);
        }
        r.F_relation = std::max(r.F_relation, std::abs(F(x, y, z) - (q_y_Pz - q_Py_z)));
        r.q_skew = std::max(r.q_skew, std::abs(Q(x, y, z) + Q(x, z, y)));
      }
  return r;
}

Tensor3 raise_last(const Tensor3& A, const Bilinear& g_inv) {
  const int d = A.dim();
  Tensor3 out(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int l = 0; l < d; ++l) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += g_inv(l, m) * A(x, y, m);
        out(x, y, l) = s;
      }
  return out;
}

}  // namespace papm
