#include "papm/structure.hpp"

#include <algorithm>
#include <sstream>

namespace papm {

namespace {

std::string fmt_residual(const char* what, double r) {
  std::ostringstream os;
  os << what << " (residual " << r << ")";
  return os.str();
}

}  // namespace

std::vector<Violation> validate(const StructuredPoint& pt, double tol) {
  std::vector<Violation> out;
  const int d = pt.dim();
  if (pt.n < 1) {
    out.push_back({"dimension", 0.0, "half-dimension n must be positive"});
    return out;
  }
  if (pt.g.rows() != d || pt.g.cols() != d || pt.P.rows() != d || pt.P.cols() != d ||
      pt.theta.size() != d) {
    out.push_back({"shape", 0.0, "g, P and theta must all have dimension 2n"});
    return out;
  }
  const auto I = Eigen::MatrixXd::Identity(d, d);
  const double gscale = std::max(1.0, max_abs(pt.g));

  if (double r = max_abs(pt.P * pt.P - I); r > tol) {
    out.push_back({"involution", r, "P^2 != I"});
  }
  if (double r = max_abs(pt.P.transpose() * pt.g * pt.P - pt.g); r > tol * gscale) {
    out.push_back({"compatibility", r, "g(Px, Py) != g(x, y)"});
  }
  if (double r = std::abs(pt.P.trace()); r > tol) {
    out.push_back({"trace", r, "trace(P) != 0"});
  }
  if (double r = max_abs(pt.g - pt.g.transpose()); r > tol * gscale) {
    out.push_back({"symmetric", r, "g is not symmetric"});
  } else {
    Eigen::LLT<Eigen::MatrixXd> llt(pt.g);
    if (llt.info() != Eigen::Success) {
      out.push_back({"positive_definite", 0.0, "g is not positive definite"});
    }
  }
  return out;
}

void require_valid(const StructuredPoint& pt, double tol) {
  auto v = validate(pt, tol);
  if (v.empty()) return;
  std::ostringstream os;
  os << "invalid structured point:";
  for (const auto& e : v) os << " [" << e.message << ", residual " << e.residual << "]";
  throw GeometryError(v.front().check, os.str());
}

Covector compose(const Covector& theta, const Endomorphism& P) { return P.transpose() * theta; }

Bilinear associated_metric(const StructuredPoint& pt) { return pt.g * pt.P; }

Tensor3 build_F(const StructuredPoint& pt) {
  const Bilinear gt = associated_metric(pt);
  const Covector th = pt.theta;
  const Covector thP = compose(th, pt.P);
  const double c = 1.0 / (2.0 * pt.n);
  return Tensor3::generate(pt.dim(), [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2];
    return c * (pt.g(x, y) * th(z) - gt(x, y) * thP(z) + pt.g(x, z) * th(y) - gt(x, z) * thP(y));
  });
}

std::vector<Violation> check_F_properties(const Tensor3& F, const Endomorphism& P, double tol) {
  const int d = F.dim();
  double sym = 0.0, pp = 0.0, mixed = 0.0;
  for (int x = 0; x < d; ++x) {
    for (int y = 0; y < d; ++y) {
      for (int z = 0; z < d; ++z) {
        double fPyPz = 0.0, fyPz = 0.0, fPyz = 0.0;
        for (int a = 0; a < d; ++a) {
          fyPz += P(a, z) * F(x, y, a);
          fPyz += P(a, y) * F(x, a, z);
          for (int b = 0; b < d; ++b) fPyPz += P(a, y) * P(b, z) * F(x, a, b);
        }
        sym = std::max(sym, std::abs(F(x, y, z) - F(x, z, y)));
        pp = std::max(pp, std::abs(F(x, y, z) + fPyPz));
        mixed = std::max(mixed, std::abs(fyPz + fPyz));
      }
    }
  }
  std::vector<Violation> out;
  if (sym > tol) out.push_back({"F_symmetry", sym, fmt_residual("F(x,y,z) != F(x,z,y)", sym)});
  if (pp > tol) out.push_back({"F_P_antiinvariance", pp, fmt_residual("F(x,y,z) != -F(x,Py,Pz)", pp)});
  if (mixed > tol) out.push_back({"F_P_swap", mixed, fmt_residual("F(x,y,Pz) != -F(x,Py,z)", mixed)});
  return out;
}

ThetaParts theta_parts(const StructuredPoint& pt) {
  const Covector thP = compose(pt.theta, pt.P);
  return {0.5 * (pt.theta - thP), 0.5 * (pt.theta + thP)};
}

std::string to_string(Parity p) {
  switch (p) {
    case Parity::odd: return "odd";
    case Parity::even: return "even";
    case Parity::mixed: return "mixed";
  }
  return "mixed";
}

ClassFlags class_flags(const StructuredPoint& pt, double tol) {
  require_valid(pt);
  ClassFlags f;
  const double norm = max_abs(pt.theta);
  const Covector thP = compose(pt.theta, pt.P);
  const double odd_dev = max_abs(thP + pt.theta);
  const double even_dev = max_abs(thP - pt.theta);
  if (norm < tol) {
    f.is_W0 = true;
    f.theta_parity = odd_dev <= even_dev ? Parity::odd : Parity::even;
    return f;
  }
  if (odd_dev <= tol * norm) {
    f.in_W3bar = true;
    f.theta_parity = Parity::odd;
  } else if (even_dev <= tol * norm) {
    f.in_W6bar = true;
    f.theta_parity = Parity::even;
  } else {
    f.theta_parity = Parity::mixed;
    return f;
  }

  // Subclass closed form: F = 1/2n {[g(x,y) + s g(x,Py)] th(z) + [g(x,z) + s g(x,Pz)] th(y)},
  // s = +1 for odd theta, -1 for even theta.
  const double s = f.in_W3bar ? 1.0 : -1.0;
  const Bilinear gt = associated_metric(pt);
  const double c = 1.0 / (2.0 * pt.n);
  const Tensor3 F = build_F(pt);
  const Tensor3 shape = Tensor3::generate(pt.dim(), [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2];
    return c * ((pt.g(x, y) + s * gt(x, y)) * pt.theta(z) + (pt.g(x, z) + s * gt(x, z)) * pt.theta(y));
  });
  f.shape_residual = max_abs_diff(F, shape);
  return f;
}

Tensor4 psi1(const Bilinear& S, const Bilinear& g) {
  if (S.rows() != g.rows() || S.cols() != g.cols()) throw Error("psi1: shape mismatch");
  return Tensor4::generate(static_cast<int>(g.rows()), [&](const auto& i) {
    const int x = i[0], y = i[1], z = i[2], w = i[3];
    return g(y, z) * S(x, w) - g(x, z) * S(y, w) + S(y, z) * g(x, w) - S(x, z) * g(y, w);
  });
}

Tensor4 apply_P_last_two(const Tensor4& L, const Endomorphism& P) {
  const int d = L.dim();
  Tensor4 half(d);  // L(x,y,z,Pw)
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int w = 0; w < d; ++w) {
          double s = 0.0;
          for (int b = 0; b < d; ++b) s += L(x, y, z, b) * P(b, w);
          half(x, y, z, w) = s;
        }
  Tensor4 out(d);
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int w = 0; w < d; ++w) {
          double s = 0.0;
          for (int a = 0; a < d; ++a) s += half(x, y, a, w) * P(a, z);
          out(x, y, z, w) = s;
        }
  return out;
}

Tensor4 psi2(const Bilinear& S, const Bilinear& g, const Endomorphism& P) {
  return apply_P_last_two(psi1(S, g), P);
}

PiTensors pi_tensors(const Bilinear& g, const Endomorphism& P) {
  return {0.5 * psi1(g, g), 0.5 * psi2(g, g, P), psi1(g * P, g)};
}

CurvatureIdentityResiduals curvature_identity_residuals(const Tensor4& L) {
  const int d = L.dim();
  CurvatureIdentityResiduals r;
  for (int x = 0; x < d; ++x)
    for (int y = 0; y < d; ++y)
      for (int z = 0; z < d; ++z)
        for (int w = 0; w < d; ++w) {
          const double v = L(x, y, z, w);
          r.antisym_first = std::max(r.antisym_first, std::abs(v + L(y, x, z, w)));
          r.antisym_second = std::max(r.antisym_second, std::abs(v + L(x, y, w, z)));
          r.bianchi = std::max(r.bianchi, std::abs(v + L(y, z, x, w) + L(z, x, y, w)));
        }
  return r;
}

CurvatureIdentityResiduals curvature_identity_residuals(const Tensor4& L, const Endomorphism& P) {
  auto r = curvature_identity_residuals(L);
  r.p_invariance = max_abs_diff(apply_P_last_two(L, P), L);
  return r;
}

bool is_curvature_like(const Tensor4& L, double tol) {
  return curvature_identity_residuals(L).curvature_like() <= tol;
}

bool is_P_tensor(const Tensor4& L, const Endomorphism& P, double tol) {
  return curvature_identity_residuals(L, P).p_tensor() <= tol;
}

}  // namespace papm
