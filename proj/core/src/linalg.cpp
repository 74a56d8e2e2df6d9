#include "nkflow/linalg.hpp"

#include <algorithm>
#include <cmath>

namespace nkflow {

JetMatrix JetMatrix::identity(int n) {
  JetMatrix m(n, n);
  for (int i = 0; i < n; ++i) m.at(i, i) = Jet{1.0};
  return m;
}

JetMatrix JetMatrix::operator*(const JetMatrix& o) const {
  JetMatrix r(rows_, o.cols_);
  for (int i = 0; i < rows_; ++i)
    for (int k = 0; k < cols_; ++k) {
      const Jet aik = at(i, k);
      for (int j = 0; j < o.cols_; ++j) r.at(i, j) += aik * o.at(k, j);
    }
  return r;
}

JetMatrix JetMatrix::operator+(const JetMatrix& o) const {
  JetMatrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j) + o.at(i, j);
  return r;
}

JetMatrix JetMatrix::operator-(const JetMatrix& o) const {
  JetMatrix r(rows_, cols_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(i, j) = at(i, j) - o.at(i, j);
  return r;
}

JetMatrix JetMatrix::transpose() const {
  JetMatrix r(cols_, rows_);
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) r.at(j, i) = at(i, j);
  return r;
}

namespace {

Jet det_rec(const JetMatrix& m, std::vector<int>& cols, int row) {
  const int n = m.rows();
  if (row == n) return Jet{1.0};
  Jet sum{0.0};
  int sign = 1;
  for (size_t k = 0; k < cols.size(); ++k) {
    const int c = cols[k];
    cols.erase(cols.begin() + static_cast<long>(k));
    const Jet sub = det_rec(m, cols, row + 1);
    cols.insert(cols.begin() + static_cast<long>(k), c);
    const Jet term = m.at(row, c) * sub;
    sum += sign > 0 ? term : -term;
    sign = -sign;
  }
  return sum;
}

}  // namespace

Jet JetMatrix::det() const {
  std::vector<int> cols(static_cast<size_t>(cols_));
  for (int j = 0; j < cols_; ++j) cols[static_cast<size_t>(j)] = j;
  return det_rec(*this, cols, 0);
}

JetMatrix JetMatrix::inverse() const {
  const int n = rows_;
  JetMatrix a = *this;
  JetMatrix inv = identity(n);
  for (int col = 0; col < n; ++col) {
    int piv = col;
    for (int r = col + 1; r < n; ++r)
      if (std::abs(a.at(r, col).val) > std::abs(a.at(piv, col).val)) piv = r;
    if (a.at(piv, col).val == 0.0) throw singular_error("singular matrix in inverse");
    if (piv != col)
      for (int j = 0; j < n; ++j) {
        std::swap(a.at(piv, j), a.at(col, j));
        std::swap(inv.at(piv, j), inv.at(col, j));
      }
    const Jet p = a.at(col, col);
    for (int j = 0; j < n; ++j) {
      a.at(col, j) /= p;
      inv.at(col, j) /= p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      const Jet factor = a.at(r, col);
      if (factor.val == 0.0 && factor.dds == 0.0) continue;
      for (int j = 0; j < n; ++j) {
        a.at(r, j) -= factor * a.at(col, j);
        inv.at(r, j) -= factor * inv.at(col, j);
      }
    }
  }
  return inv;
}

double JetMatrix::max_abs_val() const {
  double m = 0.0;
  for (const Jet& j : a_) m = std::max(m, std::abs(j.val));
  return m;
}

bool MetricTensor::is_positive_definite() const {
  const int n = dim();
  for (int k = 1; k <= n; ++k) {
    JetMatrix sub(k, k);
    for (int i = 0; i < k; ++i)
      for (int j = 0; j < k; ++j) sub.at(i, j) = gram.at(i, j);
    if (sub.det().val <= 0.0) return false;
  }
  return true;
}

}  // namespace nkflow
