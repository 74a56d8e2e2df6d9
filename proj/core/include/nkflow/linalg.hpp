#pragma once

#include <vector>

#include "nkflow/jet.hpp"

namespace nkflow {

/// Small dense matrix of jets. Everything in this engine is at most 6x6,
/// so no attempt at sparsity or expression templates is made.
class JetMatrix {
 public:
  JetMatrix() = default;
  JetMatrix(int rows, int cols) : rows_(rows), cols_(cols), a_(static_cast<size_t>(rows * cols)) {}

  static JetMatrix identity(int n);

  int rows() const { return rows_; }
  int cols() const { return cols_; }

  Jet& at(int i, int j) { return a_[static_cast<size_t>(i * cols_ + j)]; }
  const Jet& at(int i, int j) const { return a_[static_cast<size_t>(i * cols_ + j)]; }

  JetMatrix operator*(const JetMatrix& o) const;
  JetMatrix operator+(const JetMatrix& o) const;
  JetMatrix operator-(const JetMatrix& o) const;
  JetMatrix transpose() const;

  /// Determinant by cofactor expansion (no divisions, exact product rule).
  Jet det() const;

  /// Gauss-Jordan inverse with partial pivoting on |val|.
  /// Throws singular_error when no usable pivot exists.
  JetMatrix inverse() const;

  double max_abs_val() const;

 private:
  int rows_ = 0, cols_ = 0;
  std::vector<Jet> a_;
};

/// Symmetric dim x dim Gram matrix of jets; the metric in the coframe basis.
struct MetricTensor {
  JetMatrix gram;

  MetricTensor() = default;
  explicit MetricTensor(int dim) : gram(dim, dim) {}
  static MetricTensor identity(int dim) { return MetricTensor{JetMatrix::identity(dim)}; }
  explicit MetricTensor(JetMatrix g) : gram(std::move(g)) {}

  int dim() const { return gram.rows(); }
  Jet& at(int i, int j) { return gram.at(i, j); }
  const Jet& at(int i, int j) const { return gram.at(i, j); }

  /// All leading principal minors have positive value channel.
  bool is_positive_definite() const;
};

/// Tangent vector expressed in the frame dual to the coframe labels.
struct Vector {
  std::vector<Jet> comp;

  Vector() = default;
  explicit Vector(int dim) : comp(static_cast<size_t>(dim)) {}
  Vector(std::initializer_list<Jet> c) : comp(c) {}

  int dim() const { return static_cast<int>(comp.size()); }
  Jet& operator[](int i) { return comp[static_cast<size_t>(i)]; }
  const Jet& operator[](int i) const { return comp[static_cast<size_t>(i)]; }

  /// i-th frame vector E_i of a dim-dimensional frame.
  static Vector basis(int dim, int i) {
    Vector v(dim);
    v[i] = Jet{1.0};
    return v;
  }
};

}  // namespace nkflow
