#pragma once

#include <Eigen/Dense>

#include <array>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace papm {

/// Contravariant components x^i of a tangent vector.
using Vector = Eigen::VectorXd;
/// Components theta_i = theta(e_i) of a 1-form.
using Covector = Eigen::VectorXd;
/// Components B_ij = B(e_i, e_j) of a (0,2) tensor.
using Bilinear = Eigen::MatrixXd;
/// Components P^i_j of a (1,1) tensor; (P x)^i = P^i_j x^j.
using Endomorphism = Eigen::MatrixXd;

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when geometric input fails a required check (not SPD, not a W1 point, ...).
class GeometryError : public Error {
 public:
  GeometryError(std::string check, const std::string& what)
      : Error(what), check_(std::move(check)) {}
  const std::string& check() const noexcept { return check_; }

 private:
  std::string check_;
};

/// Dense covariant tensor of fixed rank over a `dim`-dimensional space,
/// stored row-major with the first slot outermost.
template <std::size_t Rank>
class Tensor {
 public:
  static constexpr std::size_t rank = Rank;

  Tensor() = default;
  explicit Tensor(int dim) : dim_(dim), data_(size_for(dim), 0.0) {}

  int dim() const noexcept { return dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  template <class... I>
    requires(sizeof...(I) == Rank)
  double& operator()(I... idx) {
    return data_[flat(static_cast<int>(idx)...)];
  }
  template <class... I>
    requires(sizeof...(I) == Rank)
  double operator()(I... idx) const {
    return data_[flat(static_cast<int>(idx)...)];
  }

  double& at(const std::array<int, Rank>& idx) { return data_[flat_array(idx)]; }
  double at(const std::array<int, Rank>& idx) const { return data_[flat_array(idx)]; }

  std::span<double> flat_data() noexcept { return data_; }
  std::span<const double> flat_data() const noexcept { return data_; }

  /// Multi-index of a flat position.
  std::array<int, Rank> unflatten(std::size_t pos) const {
    std::array<int, Rank> idx{};
    for (std::size_t s = Rank; s-- > 0;) {
      idx[s] = static_cast<int>(pos % dim_);
      pos /= dim_;
    }
    return idx;
  }

  double max_abs() const noexcept {
    double m = 0.0;
    for (double v : data_) m = std::max(m, std::abs(v));
    return m;
  }

  /// Fills every component from f(multi-index).
  template <class F>
  static Tensor generate(int dim, F&& f) {
    Tensor t(dim);
    for (std::size_t pos = 0; pos < t.size(); ++pos) t.data_[pos] = f(t.unflatten(pos));
    return t;
  }

  Tensor& operator+=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
    return *this;
  }
  Tensor& operator-=(const Tensor& o) {
    check_same(o);
    for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= o.data_[k];
    return *this;
  }
  Tensor& operator*=(double s) {
    for (double& v : data_) v *= s;
    return *this;
  }
  friend Tensor operator+(Tensor a, const Tensor& b) { return a += b; }
  friend Tensor operator-(Tensor a, const Tensor& b) { return a -= b; }
  friend Tensor operator*(Tensor a, double s) { return a *= s; }
  friend Tensor operator*(double s, Tensor a) { return a *= s; }
  friend Tensor operator-(Tensor a) { return a *= -1.0; }

 private:
  static std::size_t size_for(int dim) {
    std::size_t s = 1;
    for (std::size_t r = 0; r < Rank; ++r) s *= static_cast<std::size_t>(dim);
    return s;
  }
  template <class... I>
  std::size_t flat(I... idx) const {
    std::size_t pos = 0;
    ((pos = pos * dim_ + static_cast<std::size_t>(idx)), ...);
    return pos;
  }
  std::size_t flat_array(const std::array<int, Rank>& idx) const {
    std::size_t pos = 0;
    for (int i : idx) pos = pos * dim_ + static_cast<std::size_t>(i);
    return pos;
  }
  void check_same(const Tensor& o) const {
    if (o.dim_ != dim_) throw Error("tensor dimension mismatch");
  }

  int dim_ = 0;
  std::vector<double> data_;
};

using Tensor3 = Tensor<3>;
using Tensor4 = Tensor<4>;

template <std::size_t Rank>
double max_abs_diff(const Tensor<Rank>& a, const Tensor<Rank>& b) {
  if (a.dim() != b.dim()) throw Error("tensor dimension mismatch");
  double m = 0.0;
  auto da = a.flat_data();
  auto db = b.flat_data();
  for (std::size_t k = 0; k < da.size(); ++k) m = std::max(m, std::abs(da[k] - db[k]));
  return m;
}

inline double max_abs(const Eigen::MatrixXd& m) {
  return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff();
}

/// Absolute tolerance for post-conditions of the linear solves.
inline constexpr double kSolverTolerance = 1e-10;

/// Inverse of a symmetric positive definite metric.
/// Throws GeometryError with check "symmetric" or "positive_definite".
Bilinear metric_inverse(const Bilinear& g);

/// Metric dual: the vector Omega with g(Omega, x) = theta(x).
Vector sharp(const Bilinear& g, const Covector& theta);

/// Lowering with g: x -> g(x, .).
Covector flat(const Bilinear& g, const Vector& x);

/// z -> g^{ij} F(e_i, e_j, z).
Covector trace_contract(const Tensor3& F, const Bilinear& g_inv);

/// Metric trace g^{ij} S_ij of a bilinear form.
double metric_trace(const Bilinear& S, const Bilinear& g_inv);

}  // namespace papm
