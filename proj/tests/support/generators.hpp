#pragma once

#include <cstdint>
#include <random>
#include <string>

#include "papm/classifier.hpp"
#include "papm/field_spec.hpp"

namespace papm::testing {

/// Small deterministic generator for property tests.
class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double a, double b) { return a + (b - a) * unit(); }
  int integer(int lo, int hi) { return lo + static_cast<int>(rng_() % static_cast<std::uint64_t>(hi - lo + 1)); }
  bool coin() { return (rng_() & 1u) != 0; }

  Eigen::VectorXd vector(int d, double scale = 1.0) {
    Eigen::VectorXd v(d);
    for (int i = 0; i < d; ++i) v(i) = uniform(-scale, scale);
    return v;
  }

  Eigen::MatrixXd matrix(int r, int c, double scale = 1.0) {
    Eigen::MatrixXd m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = uniform(-scale, scale);
    return m;
  }

  Eigen::MatrixXd spd(int d) {
    const Eigen::MatrixXd B = matrix(d, d, 0.5);
    return B * B.transpose() + Eigen::MatrixXd::Identity(d, d);
  }

  Eigen::MatrixXd symmetric(int d) {
    const Eigen::MatrixXd B = matrix(d, d);
    return 0.5 * (B + B.transpose());
  }

  /// A valid almost product point: P = A S A^-1, g = A^-T D A^-1 with
  /// S = diag(I_n, -I_n) and D block diagonal SPD, so P^T g P = g.
  StructuredPoint point(int n) {
    const int d = 2 * n;
    const Eigen::MatrixXd A = Eigen::MatrixXd::Identity(d, d) + matrix(d, d, 0.3);
    const Eigen::MatrixXd Ai = A.inverse();
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(d, d);
    S.bottomRightCorner(n, n) *= -1.0;
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(d, d);
    D.topLeftCorner(n, n) = spd(n);
    D.bottomRightCorner(n, n) = spd(n);
    StructuredPoint pt;
    pt.n = n;
    pt.P = A * S * Ai;
    pt.g = Ai.transpose() * D * Ai;
    pt.g = 0.5 * (pt.g + pt.g.transpose());
    pt.theta = vector(d);
    return pt;
  }

  ConnectionParams params() { return {uniform(-1.0, 1.0), uniform(-1.0, 1.0)}; }

 private:
  double unit() { return static_cast<double>(rng_() >> 11) * 0x1.0p-53; }
  std::mt19937_64 rng_;
};

inline ChartManifold conformal(int n, const std::string& u) { return make_manifold(conformal_spec(n, u)); }

/// Catalog fixtures. theta is closed iff u is separable in the horizontal
/// and vertical coordinates; theta o P is always closed.
inline ChartManifold product_fixture() { return conformal(2, "x1*x3"); }
inline ChartManifold separable_fixture() { return conformal(2, "x1 + x3^2"); }
inline ChartManifold flat_fixture() { return conformal(2, "0"); }

inline std::vector<ConnectionParams> nine_connections(int n) {
  const double h = 1.0 / (2.0 * n);
  return {params_of(NamedConnection::D, n),
          params_of(NamedConnection::D_tilde, n),
          params_of(NamedConnection::canonical, n),
          {0.5, 0.0},
          {-0.3, 0.2},
          {0.7, -0.4},
          {0.0, 0.6},
          {1.0, 1.0},
          {0.25, -h}};
}

}  // namespace papm::testing
