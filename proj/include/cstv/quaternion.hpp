#pragma once

#include <Eigen/Dense>
#include <array>
#include <cmath>
#include <string>

#include "cstv/error.hpp"
#include "cstv/planar.hpp"

namespace cstv {

/// Real quaternion a0 + a1 i + a2 j + a3 k.
struct Quaternion {
  double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;

  static constexpr Quaternion one() { return {1.0, 0.0, 0.0, 0.0}; }
  static constexpr Quaternion i() { return {0.0, 1.0, 0.0, 0.0}; }
  static constexpr Quaternion j() { return {0.0, 0.0, 1.0, 0.0}; }
  static constexpr Quaternion k() { return {0.0, 0.0, 0.0, 1.0}; }

  constexpr Quaternion conj() const { return {a0, -a1, -a2, -a3}; }
  constexpr double norm2() const { return a0 * a0 + a1 * a1 + a2 * a2 + a3 * a3; }
  double abs() const { return std::sqrt(norm2()); }

  Quaternion inverse() const {
    const double n = norm2();
    if (n == 0.0) throw NumericalError("inverse of the zero quaternion");
    return {a0 / n, -a1 / n, -a2 / n, -a3 / n};
  }

  friend constexpr Quaternion operator+(Quaternion p, Quaternion q) {
    return {p.a0 + q.a0, p.a1 + q.a1, p.a2 + q.a2, p.a3 + q.a3};
  }
  friend constexpr Quaternion operator-(Quaternion p, Quaternion q) {
    return {p.a0 - q.a0, p.a1 - q.a1, p.a2 - q.a2, p.a3 - q.a3};
  }
  friend constexpr Quaternion operator-(Quaternion p) { return {-p.a0, -p.a1, -p.a2, -p.a3}; }
  friend constexpr Quaternion operator*(double s, Quaternion q) { return {s * q.a0, s * q.a1, s * q.a2, s * q.a3}; }
  friend constexpr bool operator==(const Quaternion&, const Quaternion&) = default;
};

/// Hamilton product.
constexpr Quaternion qmul(Quaternion p, Quaternion q) {
  return {p.a0 * q.a0 - p.a1 * q.a1 - p.a2 * q.a2 - p.a3 * q.a3,
          p.a0 * q.a1 + p.a1 * q.a0 + p.a2 * q.a3 - p.a3 * q.a2,
          p.a0 * q.a2 - p.a1 * q.a3 + p.a2 * q.a0 + p.a3 * q.a1,
          p.a0 * q.a3 + p.a1 * q.a2 - p.a2 * q.a1 + p.a3 * q.a0};
}

constexpr Quaternion operator*(Quaternion p, Quaternion q) { return qmul(p, q); }

/// One quaternion per pixel, stored as four planes (real, i, j, k).
using QuaternionField = PlanarImage<4>;

inline Quaternion pixel(const QuaternionField& f, std::size_t row, std::size_t col) {
  return {f.at(0, row, col), f.at(1, row, col), f.at(2, row, col), f.at(3, row, col)};
}

inline void set_pixel(QuaternionField& f, std::size_t row, std::size_t col, Quaternion q) {
  f.at(0, row, col) = q.a0;
  f.at(1, row, col) = q.a1;
  f.at(2, row, col) = q.a2;
  f.at(3, row, col) = q.a3;
}

/// Dense quaternion matrix A = A0 + A1 i + A2 j + A3 k.
struct QMatrix {
  std::array<Eigen::MatrixXd, 4> part;

  QMatrix() = default;
  QMatrix(Eigen::Index rows, Eigen::Index cols) {
    for (auto& p : part) p = Eigen::MatrixXd::Zero(rows, cols);
  }

  Eigen::Index rows() const { return part[0].rows(); }
  Eigen::Index cols() const { return part[0].cols(); }

  static QMatrix identity(Eigen::Index n) {
    QMatrix m(n, n);
    m.part[0].setIdentity();
    return m;
  }

  static QMatrix random(Eigen::Index rows, Eigen::Index cols) {
    QMatrix m;
    for (auto& p : m.part) p = Eigen::MatrixXd::Random(rows, cols);
    return m;
  }

  /// Conjugate transpose: A0^T - A1^T i - A2^T j - A3^T k.
  QMatrix adjoint() const {
    QMatrix m;
    m.part[0] = part[0].transpose();
    for (int c = 1; c < 4; ++c) m.part[c] = -part[c].transpose();
    return m;
  }

  Quaternion operator()(Eigen::Index r, Eigen::Index c) const {
    return {part[0](r, c), part[1](r, c), part[2](r, c), part[3](r, c)};
  }
};

inline QMatrix operator*(const QMatrix& a, const QMatrix& b) {
  if (a.cols() != b.rows()) throw ConfigError("quaternion matrix product: inner dimensions differ");
  const auto& A = a.part;
  const auto& B = b.part;
  QMatrix c;
  c.part[0] = A[0] * B[0] - A[1] * B[1] - A[2] * B[2] - A[3] * B[3];
  c.part[1] = A[0] * B[1] + A[1] * B[0] + A[2] * B[3] - A[3] * B[2];
  c.part[2] = A[0] * B[2] - A[1] * B[3] + A[2] * B[0] + A[3] * B[1];
  c.part[3] = A[0] * B[3] + A[1] * B[2] - A[2] * B[1] + A[3] * B[0];
  return c;
}

inline QMatrix operator+(const QMatrix& a, const QMatrix& b) {
  QMatrix c;
  for (int k = 0; k < 4; ++k) c.part[k] = a.part[k] + b.part[k];
  return c;
}

// Sign and source component of block (r, c) of the real counterpart:
//   [A0 -A1 -A2 -A3; A1 A0 -A3 A2; A2 A3 A0 -A1; A3 -A2 A1 A0]
struct RealCounterpartBlock {
  int component;
  double sign;
};

inline constexpr std::array<std::array<RealCounterpartBlock, 4>, 4> kRealCounterpartPattern{{
    {{{0, 1.0}, {1, -1.0}, {2, -1.0}, {3, -1.0}}},
    {{{1, 1.0}, {0, 1.0}, {3, -1.0}, {2, 1.0}}},
    {{{2, 1.0}, {3, 1.0}, {0, 1.0}, {1, -1.0}}},
    {{{3, 1.0}, {2, -1.0}, {1, 1.0}, {0, 1.0}}},
}};

/// Real counterpart of A: the 4m x 4n block matrix above.
inline Eigen::MatrixXd realify(const QMatrix& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Eigen::MatrixXd out(4 * m, 4 * n);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const auto [comp, sign] = kRealCounterpartPattern[r][c];
      out.block(r * m, c * n, m, n) = sign * a.part[comp];
    }
  return out;
}

/// First block column of the real counterpart: [A0; A1; A2; A3].
inline Eigen::MatrixXd realify_column(const QMatrix& a) {
  const Eigen::Index m = a.rows(), n = a.cols();
  Eigen::MatrixXd out(4 * m, n);
  for (int r = 0; r < 4; ++r) out.block(r * m, 0, m, n) = a.part[r];
  return out;
}

inline QMatrix unrealify_column(const Eigen::MatrixXd& col) {
  if (col.rows() % 4 != 0) throw ConfigError("column form must have 4m rows");
  const Eigen::Index m = col.rows() / 4;
  QMatrix q;
  for (int r = 0; r < 4; ++r) q.part[r] = col.block(r * m, 0, m, col.cols());
  return q;
}

/// Inverse of realify. Rejects matrices whose block pattern deviates from the
/// real-counterpart structure by more than `tolerance` (absolute, per entry).
inline QMatrix unrealify(const Eigen::MatrixXd& m, double tolerance = 1e-12) {
  if (m.rows() % 4 != 0 || m.cols() % 4 != 0) throw ConfigError("real counterpart must be 4m x 4n");
  const Eigen::Index r4 = m.rows() / 4, c4 = m.cols() / 4;
  QMatrix q;
  for (int k = 0; k < 4; ++k) q.part[k] = m.block(k * r4, 0, r4, c4);
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      const auto [comp, sign] = kRealCounterpartPattern[r][c];
      const double dev = (m.block(r * r4, c * c4, r4, c4) - sign * q.part[comp]).cwiseAbs().maxCoeff();
      if (dev > tolerance)
        throw NumericalError("matrix is not a quaternion real counterpart (block " + std::to_string(r) + "," +
                             std::to_string(c) + " deviates by " + std::to_string(dev) + ")");
    }
  return q;
}

/// Quaternion field viewed as an (h*w) x 1 quaternion vector.
inline QMatrix to_qvector(const QuaternionField& f) {
  const auto n = static_cast<Eigen::Index>(f.pixels());
  QMatrix v(n, 1);
  for (int c = 0; c < 4; ++c) v.part[c] = Eigen::Map<const Eigen::VectorXd>(f.plane(c).data(), n);
  return v;
}

inline QuaternionField from_qvector(const QMatrix& v, std::size_t width, std::size_t height) {
  if (v.cols() != 1 || static_cast<std::size_t>(v.rows()) != width * height)
    throw ConfigError("quaternion vector length does not match field size");
  QuaternionField f(width, height);
  for (int c = 0; c < 4; ++c)
    Eigen::Map<Eigen::VectorXd>(f.plane(c).data(), v.rows()) = v.part[c].col(0);
  return f;
}

enum class NormKind { one, two, frobenius };

/// Vector p-norm of a quaternion field over its pixel moduli. For vectors the
/// Frobenius and 2-norm coincide.
inline double qnorm(const QuaternionField& v, NormKind kind = NormKind::two) {
  double s = 0.0;
  for (std::size_t i = 0; i < v.pixels(); ++i) {
    const double m2 = v.plane(0)[i] * v.plane(0)[i] + v.plane(1)[i] * v.plane(1)[i] +
                      v.plane(2)[i] * v.plane(2)[i] + v.plane(3)[i] * v.plane(3)[i];
    s += kind == NormKind::one ? std::sqrt(m2) : m2;
  }
  return kind == NormKind::one ? s : std::sqrt(s);
}

inline double qnorm_frobenius(const QMatrix& a) {
  double s = 0.0;
  for (const auto& p : a.part) s += p.squaredNorm();
  return std::sqrt(s);
}

/// Re(x^H y): the real inner product used by the conjugate-gradient solver.
inline double qdot(const QuaternionField& x, const QuaternionField& y) {
  if (!x.same_shape(y)) throw ConfigError("qdot: length mismatch");
  return dot(x, y);
}

}  // namespace cstv
