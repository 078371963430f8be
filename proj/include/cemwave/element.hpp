#pragma once

// Bilinear quadrilateral on an axis-aligned hx-by-hy cell. Local nodes run
// counter-clockwise from the lower-left corner; local DOF = 2 * node + component.

#include "cemwave/common.hpp"

#include <array>
#include <cmath>

namespace cemwave {

using Mat8 = Eigen::Matrix<double, 8, 8>;
using Strain38 = Eigen::Matrix<double, 3, 8>;
using Value28 = Eigen::Matrix<double, 2, 8>;

struct GaussRule {
  std::array<double, 3> points{};
  std::array<double, 3> weights{};
  int size = 0;
};

/// Gauss-Legendre on [-1, 1] with 1 to 3 points.
inline GaussRule gauss_legendre(int n) {
  switch (n) {
    case 1:
      return {{0.0}, {2.0}, 1};
    case 2: {
      const double p = 1.0 / std::sqrt(3.0);
      return {{-p, p}, {1.0, 1.0}, 2};
    }
    case 3: {
      const double p = std::sqrt(0.6);
      return {{-p, 0.0, p}, {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}, 3};
    }
    default:
      throw InputError("unsupported Gauss rule size");
  }
}

class BilinearQuad {
public:
  BilinearQuad(double hx, double hy) : hx_(hx), hy_(hy) {}

  double jacobian() const { return 0.25 * hx_ * hy_; }

  static Eigen::Vector4d shape(double xi, double eta) {
    return {0.25 * (1 - xi) * (1 - eta), 0.25 * (1 + xi) * (1 - eta), 0.25 * (1 + xi) * (1 + eta),
            0.25 * (1 - xi) * (1 + eta)};
  }

  /// Physical gradients: row 0 is d/dx, row 1 is d/dy.
  Eigen::Matrix<double, 2, 4> gradients(double xi, double eta) const {
    Eigen::Matrix<double, 2, 4> g;
    g << -(1 - eta), (1 - eta), (1 + eta), -(1 + eta), -(1 - xi), -(1 + xi), (1 + xi), (1 - xi);
    g.row(0) *= 0.5 / hx_;
    g.row(1) *= 0.5 / hy_;
    return g;
  }

  /// Engineering strain (e_xx, e_yy, 2 e_xy) from the 8 cell DOFs.
  Strain38 strain_matrix(double xi, double eta) const {
    const auto g = gradients(xi, eta);
    Strain38 b = Strain38::Zero();
    for (int k = 0; k < 4; ++k) {
      b(0, 2 * k) = g(0, k);
      b(1, 2 * k + 1) = g(1, k);
      b(2, 2 * k) = g(1, k);
      b(2, 2 * k + 1) = g(0, k);
    }
    return b;
  }

  static Value28 value_matrix(double xi, double eta) {
    const auto n = shape(xi, eta);
    Value28 v = Value28::Zero();
    for (int k = 0; k < 4; ++k) {
      v(0, 2 * k) = n(k);
      v(1, 2 * k + 1) = n(k);
    }
    return v;
  }

  Mat8 stiffness(const Mat3& c) const {
    const auto rule = gauss_legendre(2);
    Mat8 k = Mat8::Zero();
    for (int i = 0; i < rule.size; ++i)
      for (int j = 0; j < rule.size; ++j) {
        const auto b = strain_matrix(rule.points[i], rule.points[j]);
        k.noalias() += (rule.weights[i] * rule.weights[j] * jacobian()) * b.transpose() * c * b;
      }
    return k;
  }

  Mat8 mass(double rho) const {
    const auto rule = gauss_legendre(2);
    Mat8 m = Mat8::Zero();
    for (int i = 0; i < rule.size; ++i)
      for (int j = 0; j < rule.size; ++j) {
        const auto v = value_matrix(rule.points[i], rule.points[j]);
        m.noalias() += (rho * rule.weights[i] * rule.weights[j] * jacobian()) * v.transpose() * v;
      }
    return m;
  }

  /// Integral of grad(u) : grad(v) over the cell.
  Mat8 gradient_gram() const {
    const auto rule = gauss_legendre(2);
    Mat8 k = Mat8::Zero();
    for (int i = 0; i < rule.size; ++i)
      for (int j = 0; j < rule.size; ++j) {
        const auto g = gradients(rule.points[i], rule.points[j]);
        const double w = rule.weights[i] * rule.weights[j] * jacobian();
        for (int a = 0; a < 4; ++a)
          for (int b = 0; b < 4; ++b) {
            const double gg = w * g.col(a).dot(g.col(b));
            k(2 * a, 2 * b) += gg;
            k(2 * a + 1, 2 * b + 1) += gg;
          }
      }
    return k;
  }

  double hx() const { return hx_; }
  double hy() const { return hy_; }

private:
  double hx_;
  double hy_;
};

/// Voigt (engineering) form of sym(v (x) n) as a 3x2 map applied to v.
inline Eigen::Matrix<double, 3, 2> normal_voigt(const Vec2& n) {
  Eigen::Matrix<double, 3, 2> t;
  t << n.x(), 0.0, 0.0, n.y(), n.y(), n.x();
  return t;
}

}  // namespace cemwave
