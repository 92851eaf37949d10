#include "papm/chart.hpp"

#include <sstream>

namespace papm {

namespace {

Coordinates shifted(const Coordinates& u, int i, double h) {
  Coordinates v = u;
  v(i) += h;
  return v;
}

/// (f(u + h e_i) - f(u - h e_i)) / 2h for any field whose values support - and *.
template <class F>
auto central_diff(const F& f, const Coordinates& u, int i, double h) {
  using Value = std::decay_t<decltype(f(u))>;
  const Value plus = f(shifted(u, i, h));
  const Value minus = f(shifted(u, i, -h));
  Value out = (plus - minus) * (1.0 / (2.0 * h));
  return out;
}

void require_spd_at(const Bilinear& g, const Coordinates& u) {
  Eigen::LLT<Eigen::MatrixXd> llt(g);
  if (g.rows() != g.cols() || llt.info() != Eigen::Success || max_abs(g - g.transpose()) > 1e-10 * std::max(1.0, max_abs(g))) {
    std::ostringstream os;
    os << "metric is not symmetric positive definite at u = (" << u.transpose() << ")";
    throw GeometryError("positive_definite", os.str());
  }
}

Tensor<1> as_tensor(const Covector& v) {
  Tensor<1> t(static_cast<int>(v.size()));
  for (int i = 0; i < v.size(); ++i) t(i) = v(i);
  return t;
}

/// (nabla_i A)(a_1..a_R) = d_i A(a) - sum_slots Gamma^m_{i a_s} A(.., m, ..),
/// derivative slot first. `field` maps coordinates to Tensor<R>.
template <std::size_t R, class Field>
Tensor<R + 1> covariant_derivative(const Field& field, const Tensor3& gamma, const Coordinates& u, double h) {
  const int d = gamma.dim();
  const Tensor<R> A = field(u);
  std::vector<Tensor<R>> dA;
  dA.reserve(d);
  for (int i = 0; i < d; ++i) dA.push_back(central_diff(field, u, i, h));
  return Tensor<R + 1>::generate(d, [&](const std::array<int, R + 1>& idx) {
    const int i = idx[0];
    std::array<int, R> a{};
    for (std::size_t s = 0; s < R; ++s) a[s] = idx[s + 1];
    double v = dA[i].at(a);
    for (std::size_t s = 0; s < R; ++s) {
      std::array<int, R> b = a;
      for (int m = 0; m < d; ++m) {
        b[s] = m;
        v -= gamma(m, i, a[s]) * A.at(b);
      }
    }
    return v;
  });
}

/// g, P, theta at u with no W1 or structure checks, for stencil evaluations.
StructuredPoint raw_point(const ChartManifold& M, const Coordinates& u) {
  return {M.n, M.metric_field(u), M.P_field(u), theta_at(M, u)};
}

Bilinear nabla_theta_matrix(const ChartManifold& M, const Coordinates& u, const Tensor3& gamma) {
  const auto field = [&](const Coordinates& v) { return as_tensor(theta_at(M, v)); };
  const Tensor<2> n = covariant_derivative<1>(field, gamma, u, M.curvature_step);
  const int d = M.dim();
  Bilinear out(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) out(i, j) = n(i, j);
  return out;
}

Tensor4 lowered_riemann(const Tensor3& G, const std::vector<Tensor3>& dG, const Bilinear& g) {
  const int d = G.dim();
  Tensor4 Rv(d);  // Rv(i,j,k,l) = (R(e_i,e_j) e_k)^l
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k)
        for (int l = 0; l < d; ++l) {
          double v = dG[i](l, j, k) - dG[j](l, i, k);
          for (int m = 0; m < d; ++m) v += G(l, i, m) * G(m, j, k) - G(l, j, m) * G(m, i, k);
          Rv(i, j, k, l) = v;
        }
  return Tensor4::generate(d, [&](const auto& a) {
    double s = 0.0;
    for (int l = 0; l < d; ++l) s += g(l, a[3]) * Rv(a[0], a[1], a[2], l);
    return s;
  });
}

}  // namespace

void check_chart(const ChartManifold& M) {
  if (M.n < 1) throw GeometryError("dimension", "chart half-dimension n must be positive");
  if (!M.metric_field || !M.P_field) throw GeometryError("fields", "chart needs metric and structure fields");
  for (double h : {M.fd_step, M.curvature_step}) {
    if (!(h >= kMinFdStep && h <= kMaxFdStep)) {
      std::ostringstream os;
      os << "finite-difference step " << h << " outside [" << kMinFdStep << ", " << kMaxFdStep << "]";
      throw GeometryError("fd_step", os.str());
    }
  }
}

ConnectionCoefficients christoffels(const ChartManifold& M, const Coordinates& u) {
  const int d = M.dim();
  if (u.size() != d) throw GeometryError("shape", "coordinate dimension does not match the chart");
  const Bilinear g = M.metric_field(u);
  require_spd_at(g, u);
  const Bilinear g_inv = metric_inverse(g);
  std::vector<Bilinear> dg(d);
  for (int i = 0; i < d; ++i) {
    const Bilinear gp = M.metric_field(shifted(u, i, M.fd_step));
    const Bilinear gm = M.metric_field(shifted(u, i, -M.fd_step));
    require_spd_at(gp, shifted(u, i, M.fd_step));
    require_spd_at(gm, shifted(u, i, -M.fd_step));
    dg[i] = (gp - gm) / (2.0 * M.fd_step);
  }
  // Gamma_{ikm} first kind, then raise m.
  Tensor3 first(d);
  for (int i = 0; i < d; ++i)
    for (int k = 0; k < d; ++k)
      for (int m = 0; m < d; ++m) first(i, k, m) = 0.5 * (dg[i](k, m) + dg[k](i, m) - dg[m](i, k));
  ConnectionCoefficients c{Tensor3(d)};
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += g_inv(l, m) * first(i, k, m);
        c.gamma(l, i, k) = s;
      }
  return c;
}

Tensor3 f_tensor(const ChartManifold& M, const Coordinates& u) {
  const int d = M.dim();
  const auto G = christoffels(M, u).gamma;
  const Bilinear g = M.metric_field(u);
  const Endomorphism P = M.P_field(u);
  std::vector<Endomorphism> dP(d);
  for (int i = 0; i < d; ++i) dP[i] = central_diff(M.P_field, u, i, M.fd_step);
  // (nabla_i P)^a_j = d_i P^a_j + Gamma^a_{im} P^m_j - P^a_m Gamma^m_{ij}
  Tensor3 nP(d);  // (i, a, j)
  for (int i = 0; i < d; ++i)
    for (int a = 0; a < d; ++a)
      for (int j = 0; j < d; ++j) {
        double v = dP[i](a, j);
        for (int m = 0; m < d; ++m) v += G(a, i, m) * P(m, j) - P(a, m) * G(m, i, j);
        nP(i, a, j) = v;
      }
  return Tensor3::generate(d, [&](const auto& idx) {
    double s = 0.0;
    for (int a = 0; a < d; ++a) s += g(a, idx[2]) * nP(idx[0], a, idx[1]);
    return s;
  });
}

Covector theta_at(const ChartManifold& M, const Coordinates& u) {
  return trace_contract(f_tensor(M, u), metric_inverse(M.metric_field(u)));
}

ChartPoint point_of(const ChartManifold& M, const Coordinates& u, double w1_tol, double structure_tol) {
  check_chart(M);
  if (u.size() != M.dim()) throw GeometryError("shape", "coordinate dimension does not match the chart");
  StructuredPoint pt{M.n, M.metric_field(u), M.P_field(u), Covector::Zero(M.dim())};
  require_valid(pt, structure_tol);
  const Tensor3 F = f_tensor(M, u);
  pt.theta = trace_contract(F, metric_inverse(pt.g));
  ChartPoint cp{pt, max_abs_diff(F, build_F(pt))};
  if (cp.w1_residual > w1_tol) {
    std::ostringstream os;
    os << "not a W1 point at u = (" << u.transpose() << "): residual " << cp.w1_residual;
    throw GeometryError("w1", os.str());
  }
  return cp;
}

CurvaturePack metric_curvature(const ChartManifold& M, const Coordinates& u) {
  const int d = M.dim();
  const double h = M.curvature_step;
  const Bilinear g = M.metric_field(u);
  require_spd_at(g, u);
  const Bilinear g_inv = metric_inverse(g);
  std::vector<Bilinear> dg(d);
  for (int i = 0; i < d; ++i) dg[i] = central_diff(M.metric_field, u, i, h);
  // hess[i][j] = d_i d_j g
  std::vector<std::vector<Bilinear>> hess(d, std::vector<Bilinear>(d));
  for (int i = 0; i < d; ++i) {
    hess[i][i] = (M.metric_field(shifted(u, i, h)) - 2.0 * g + M.metric_field(shifted(u, i, -h))) / (h * h);
    for (int j = 0; j < i; ++j) {
      const Coordinates pp = shifted(shifted(u, i, h), j, h), pm = shifted(shifted(u, i, h), j, -h);
      const Coordinates mp = shifted(shifted(u, i, -h), j, h), mm = shifted(shifted(u, i, -h), j, -h);
      hess[i][j] = (M.metric_field(pp) - M.metric_field(pm) - M.metric_field(mp) + M.metric_field(mm)) / (4.0 * h * h);
      hess[j][i] = hess[i][j];
    }
  }
  Tensor3 G(d);
  for (int l = 0; l < d; ++l)
    for (int i = 0; i < d; ++i)
      for (int k = 0; k < d; ++k) {
        double s = 0.0;
        for (int m = 0; m < d; ++m) s += g_inv(l, m) * 0.5 * (dg[i](k, m) + dg[k](i, m) - dg[m](i, k));
        G(l, i, k) = s;
      }
  // d_i Gamma^l_{jk} = g^{lm} (d_i Gamma_{m,jk} - d_i g_{mb} Gamma^b_{jk})
  std::vector<Tensor3> dG(d, Tensor3(d));
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j)
      for (int k = 0; k < d; ++k) {
        Vector lowered(d);
        for (int m = 0; m < d; ++m) {
          double v = 0.5 * (hess[i][j](k, m) + hess[i][k](j, m) - hess[i][m](j, k));
          for (int b = 0; b < d; ++b) v -= dg[i](m, b) * G(b, j, k);
          lowered(m) = v;
        }
        const Vector raised = g_inv * lowered;
        for (int l = 0; l < d; ++l) dG[i](l, j, k) = raised(l);
      }
  CurvaturePack pack{lowered_riemann(G, dG, g), Bilinear::Zero(d, d), 0.0};
  for (int y = 0; y < d; ++y)
    for (int z = 0; z < d; ++z) {
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += g_inv(i, j) * pack.R(i, y, z, j);
      pack.ricci(y, z) = s;
    }
  pack.tau = metric_trace(pack.ricci, g_inv);
  return pack;
}

CoefficientField levi_civita_field(const ChartManifold& M) {
  return [&M](const Coordinates& u) { return christoffels(M, u); };
}

CoefficientField natural_field(const ChartManifold& M, const ConnectionParams& cp) {
  return [&M, cp](const Coordinates& u) { return prime_coefficients(M, u, cp); };
}

ConnectionCoefficients prime_coefficients(const ChartManifold& M, const Coordinates& u,
                                          const ConnectionParams& cp) {
  auto c = christoffels(M, u);
  c.gamma += increment_coefficients(raw_point(M, u), cp);
  return c;
}

CurvaturePack curvature(const ChartManifold& M, const Coordinates& u, const CoefficientField& coeffs) {
  const int d = M.dim();
  const Tensor3 G = coeffs(u).gamma;
  std::vector<Tensor3> dG;
  dG.reserve(d);
  const auto gamma_field = [&](const Coordinates& v) { return coeffs(v).gamma; };
  for (int i = 0; i < d; ++i) dG.push_back(central_diff(gamma_field, u, i, M.curvature_step));
  const Bilinear g = M.metric_field(u);
  const Bilinear g_inv = metric_inverse(g);
  CurvaturePack pack{lowered_riemann(G, dG, g), Bilinear::Zero(d, d), 0.0};
  for (int y = 0; y < d; ++y)
    for (int z = 0; z < d; ++z) {
      double s = 0.0;
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) s += g_inv(i, j) * pack.R(i, y, z, j);
      pack.ricci(y, z) = s;
    }
  pack.tau = metric_trace(pack.ricci, g_inv);
  return pack;
}

CurvaturePack natural_curvature(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  return curvature(M, u, natural_field(M, cp));
}

NablaTheta nabla_theta(const ChartManifold& M, const Coordinates& u, const CoefficientField& coeffs,
                       double tol) {
  NablaTheta out;
  out.matrix = nabla_theta_matrix(M, u, coeffs(u).gamma);
  const Bilinear NP = out.matrix * M.P_field(u);
  out.residual_theta = max_abs(out.matrix - out.matrix.transpose());
  out.residual_theta_P = max_abs(NP - NP.transpose());
  out.tolerance = tol;
  out.theta_closed = out.residual_theta <= tol;
  out.theta_P_closed = out.residual_theta_P <= tol;
  return out;
}

ParallelResiduals natural_parallel_residuals(const ChartManifold& M, const Coordinates& u,
                                             const ConnectionParams& cp) {
  const int d = M.dim();
  const Tensor3 G = prime_coefficients(M, u, cp).gamma;
  const Bilinear g = M.metric_field(u);
  const Endomorphism P = M.P_field(u);
  ParallelResiduals r;
  for (int i = 0; i < d; ++i) {
    const Bilinear dg = central_diff(M.metric_field, u, i, M.fd_step);
    const Endomorphism dP = central_diff(M.P_field, u, i, M.fd_step);
    for (int a = 0; a < d; ++a)
      for (int b = 0; b < d; ++b) {
        double vg = dg(a, b), vp = dP(a, b);
        for (int m = 0; m < d; ++m) {
          vg -= G(m, i, a) * g(m, b) + G(m, i, b) * g(a, m);
          vp += G(a, i, m) * P(m, b) - P(a, m) * G(m, i, b);
        }
        r.metric = std::max(r.metric, std::abs(vg));
        r.structure = std::max(r.structure, std::abs(vp));
      }
  }
  return r;
}

UVTensors uv_from_nabla_theta(const Bilinear& Np, const Endomorphism& P, const ConnectionParams& cp, int n) {
  const Bilinear NpP = Np * P;
  const double mc = cp.mu + 1.0 / (2.0 * n);
  return {cp.lambda * Np + mc * NpP, cp.lambda * NpP + cp.mu * Np};
}

UVTensors uv_tensors(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const Bilinear Np = nabla_theta_matrix(M, u, prime_coefficients(M, u, cp).gamma);
  return uv_from_nabla_theta(Np, M.P_field(u), cp, M.n);
}

STensors s_from_uv(const UVTensors& uv, const StructuredPoint& pt, const ConnectionParams& cp) {
  const Covector& th = pt.theta;
  const Covector thP = compose(th, pt.P);
  const double c = 1.0 / (2.0 * pt.n);
  const double l = cp.lambda, m = cp.mu;
  return {uv.U - c * (l * th * thP.transpose() + m * th * th.transpose()),
          uv.V * pt.P + c * (m * thP * thP.transpose() + l * thP * th.transpose())};
}

STensors s_tensors(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  return s_from_uv(uv_tensors(M, u, cp), raw_point(M, u), cp);
}

Tensor4 curvature_correction(const StructuredPoint& pt, const ConnectionParams& cp, const STensors& s) {
  const auto pq = p_q_vectors(pt, cp);
  const auto pis = pi_tensors(pt.g, pt.P);
  const double g_pp = pq.p.dot(pt.g * pq.p);
  const double g_qq = pq.q.dot(pt.g * pq.q);
  const double g_pq = pq.p.dot(pt.g * pq.q);
  return -g_pp * pis.pi1 - g_qq * pis.pi2 - g_pq * pis.pi3 - psi1(s.S1, pt.g) - psi2(s.S2, pt.g, pt.P);
}

double verify_identity12(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const int d = M.dim();
  const StructuredPoint pt = point_of(M, u).point;
  const Bilinear g_inv = metric_inverse(pt.g);
  const Tensor4 R = metric_curvature(M, u).R;
  const Tensor4 Rp = natural_curvature(M, u, cp).R;
  const Tensor3 Q = q_tensor(pt, cp);
  const Tensor3 Qv = raise_last(Q, g_inv);
  const Tensor3 Tv = raise_last(torsion(pt, cp), g_inv);
  const auto q_field = [&](const Coordinates& v) { return q_tensor(raw_point(M, v), cp); };
  const Tensor4 nQ = covariant_derivative<3>(q_field, prime_coefficients(M, u, cp).gamma, u, M.curvature_step);

  const Tensor4 rhs = Tensor4::generate(d, [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2], w = i[3];
    double q_txy = 0.0, qq = 0.0;
    for (int l = 0; l < d; ++l) {
      q_txy += Tv(x, y, l) * Q(l, z, w);
      qq += Qv(x, z, l) * Q(y, w, l) - Qv(y, z, l) * Q(x, w, l);
    }
    return Rp(x, y, z, w) - q_txy - nQ(x, y, z, w) + nQ(y, x, z, w) + qq;
  });
  return max_abs_diff(R, rhs);
}

double verify_identity19(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const int d = M.dim();
  const StructuredPoint pt = point_of(M, u).point;
  const Tensor3 Gp = prime_coefficients(M, u, cp).gamma;
  const auto q_field = [&](const Coordinates& v) { return q_tensor(raw_point(M, v), cp); };
  const Tensor4 nQ = covariant_derivative<3>(q_field, Gp, u, M.curvature_step);
  const UVTensors uv = uv_from_nabla_theta(nabla_theta_matrix(M, u, Gp), pt.P, cp, M.n);
  const Bilinear gt = associated_metric(pt);
  const Tensor4 rhs = Tensor4::generate(d, [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2], w = i[3];
    return pt.g(y, z) * uv.U(x, w) - pt.g(y, w) * uv.U(x, z) + gt(y, z) * uv.V(x, w) - gt(y, w) * uv.V(x, z);
  });
  return max_abs_diff(nQ, rhs);
}

double verify_theorem31(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const StructuredPoint pt = point_of(M, u).point;
  const Tensor4 R = metric_curvature(M, u).R;
  const Tensor4 Rp = natural_curvature(M, u, cp).R;
  const STensors s = s_tensors(M, u, cp);
  return max_abs_diff(R, Rp + curvature_correction(pt, cp, s));
}

double scalar_curvature_shift(int n, double g_pp, double g_qq, double trace_S1, double trace_S2) {
  const double m = 2.0 * n;
  return -m * (m - 1.0) * g_pp + m * g_qq - 2.0 * (m - 1.0) * trace_S1 + 2.0 * trace_S2;
}

Cor32Residuals verify_cor32(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const int d = M.dim();
  const StructuredPoint pt = point_of(M, u).point;
  const Bilinear g_inv = metric_inverse(pt.g);
  const CurvaturePack lc = metric_curvature(M, u);
  const CurvaturePack nat = natural_curvature(M, u, cp);
  const STensors s = s_tensors(M, u, cp);
  const Tensor4 C = curvature_correction(pt, cp, s);
  Bilinear rho_c = Bilinear::Zero(d, d);
  for (int y = 0; y < d; ++y)
    for (int z = 0; z < d; ++z)
      for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) rho_c(y, z) += g_inv(i, j) * C(i, y, z, j);

  const auto pq = p_q_vectors(pt, cp);
  Cor32Residuals r;
  r.ricci_residual = max_abs((lc.ricci - nat.ricci) - rho_c);
  r.delta_tau = lc.tau - nat.tau;
  r.g_pp = pq.p.dot(pt.g * pq.p);
  r.g_qq = pq.q.dot(pt.g * pq.q);
  r.trace_S1 = metric_trace(s.S1, g_inv);
  r.trace_S2 = metric_trace(s.S2, g_inv);
  r.tau_residual = std::abs(r.delta_tau - scalar_curvature_shift(M.n, r.g_pp, r.g_qq, r.trace_S1, r.trace_S2));
  return r;
}

double verify_26prime(const ChartManifold& M, const Coordinates& u, const ConnectionParams& cp) {
  const StructuredPoint pt = point_of(M, u).point;
  const Bilinear N = nabla_theta_matrix(M, u, christoffels(M, u).gamma);
  const Bilinear Np = nabla_theta_matrix(M, u, prime_coefficients(M, u, cp).gamma);
  const Bilinear W = w_bilinear(pt);
  const double c = 1.0 / (2.0 * M.n);
  const Bilinear NP = N * pt.P, NpP = Np * pt.P;
  const double plain = max_abs((Np - Np.transpose()) - (N - N.transpose()) + c * W);
  const double composed = max_abs((NpP - NpP.transpose()) - (NP - NP.transpose()));
  return std::max(plain, composed);
}

TorsionParallel torsion_parallel_residual(const ChartManifold& M, const Coordinates& u,
                                          const ConnectionParams& cp) {
  const Tensor3 Gp = prime_coefficients(M, u, cp).gamma;
  const auto t_field = [&](const Coordinates& v) { return torsion(raw_point(M, v), cp); };
  TorsionParallel r;
  r.nabla_T = covariant_derivative<3>(t_field, Gp, u, M.curvature_step).max_abs();
  r.nabla_theta_prime = max_abs(nabla_theta_matrix(M, u, Gp));
  return r;
}

}  // namespace papm
