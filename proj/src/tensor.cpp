#include "papm/tensor.hpp"

#include <sstream>

namespace papm {

namespace {

void require_square(const Bilinear& g) {
  if (g.rows() != g.cols() || g.rows() == 0) {
    throw GeometryError("shape", "metric must be a non-empty square matrix");
  }
}

Eigen::LLT<Eigen::MatrixXd> factor_spd(const Bilinear& g) {
  require_square(g);
  const double scale = std::max(1.0, max_abs(g));
  const double asym = max_abs(g - g.transpose());
  if (asym > kSolverTolerance * scale) {
    std::ostringstream os;
    os << "metric is not symmetric (max |g - g^T| = " << asym << ")";
    throw GeometryError("symmetric", os.str());
  }
  Eigen::LLT<Eigen::MatrixXd> llt(0.5 * (g + g.transpose()));
  if (llt.info() != Eigen::Success) {
    throw GeometryError("positive_definite", "metric is not positive definite");
  }
  return llt;
}

}  // namespace

Bilinear metric_inverse(const Bilinear& g) {
  auto llt = factor_spd(g);
  const auto n = g.rows();
  Bilinear inv = llt.solve(Eigen::MatrixXd::Identity(n, n));
  inv = 0.5 * (inv + inv.transpose());
  const double err = max_abs(g * inv - Eigen::MatrixXd::Identity(n, n));
  if (!std::isfinite(err) || err > kSolverTolerance * std::max(1.0, max_abs(g) * max_abs(inv))) {
    std::ostringstream os;
    os << "metric is too ill-conditioned to invert (residual " << err << ")";
    throw GeometryError("positive_definite", os.str());
  }
  return inv;
}

Vector sharp(const Bilinear& g, const Covector& theta) {
  if (theta.size() != g.rows()) throw Error("sharp: dimension mismatch");
  return factor_spd(g).solve(theta);
}

Covector flat(const Bilinear& g, const Vector& x) {
  if (x.size() != g.rows()) throw Error("flat: dimension mismatch");
  return g * x;
}

Covector trace_contract(const Tensor3& F, const Bilinear& g_inv) {
  const int d = F.dim();
  if (g_inv.rows() != d || g_inv.cols() != d) throw Error("trace_contract: shape mismatch");
  Covector theta = Covector::Zero(d);
  for (int z = 0; z < d; ++z) {
    double s = 0.0;
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) s += g_inv(i, j) * F(i, j, z);
    theta(z) = s;
  }
  return theta;
}

double metric_trace(const Bilinear& S, const Bilinear& g_inv) {
  return (g_inv.array() * S.array()).sum();
}

}  // namespace papm
