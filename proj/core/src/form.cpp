#include "nkflow/form.hpp"

#include <algorithm>
#include <bit>
#include <cmath>

#include "nkflow/coframe.hpp"
#include "nkflow/errors.hpp"

namespace nkflow {

int popcount(Mask m) { return std::popcount(m); }

std::vector<int> mask_indices(Mask m) {
  std::vector<int> idx;
  for (int i = 0; m != 0; ++i, m >>= 1)
    if (m & 1u) idx.push_back(i);
  return idx;
}

Mask mask_of(const std::vector<int>& indices) {
  Mask m = 0;
  for (int i : indices) m |= Mask{1} << i;
  return m;
}

int merge_sign(Mask a, Mask b) {
  if ((a & b) != 0) return 0;
  int inversions = 0;
  for (Mask t = a; t != 0; t &= t - 1) {
    const int i = std::countr_zero(t);
    inversions += std::popcount(b & ((Mask{1} << i) - 1));
  }
  return (inversions & 1) ? -1 : 1;
}

Form::Form(int dim, int grade) : dim_(dim), grade_(grade) {
  if (grade < 0 || grade > dim) throw grade_error("form grade outside 0..dim");
}

Form Form::scalar(int dim, Jet v) {
  Form f(dim, 0);
  f.set(0, v);
  return f;
}

Form Form::basis_monomial(int dim, Mask m, Jet coeff) {
  Form f(dim, popcount(m));
  f.set(m, coeff);
  return f;
}

Jet Form::coeff(Mask m) const {
  const auto it = c_.find(m);
  return it == c_.end() ? Jet{} : it->second;
}

void Form::set(Mask m, Jet v) {
  if (popcount(m) != grade_) throw grade_error("coefficient tuple length != grade");
  if (v.val == 0.0 && v.dds == 0.0)
    c_.erase(m);
  else
    c_[m] = v;
}

void Form::add_to(Mask m, Jet v) {
  if (popcount(m) != grade_) throw grade_error("coefficient tuple length != grade");
  auto [it, inserted] = c_.try_emplace(m, v);
  if (!inserted) it->second += v;
  if (it->second.val == 0.0 && it->second.dds == 0.0) c_.erase(it);
}

double Form::max_abs() const {
  double m = 0.0;
  for (const auto& [mask, v] : c_) m = std::max(m, std::abs(v.val));
  return m;
}

Form& Form::operator+=(const Form& o) {
  if (o.grade_ != grade_ || o.dim_ != dim_) throw grade_error("form sum grade/dim mismatch");
  for (const auto& [m, v] : o.c_) add_to(m, v);
  return *this;
}

Form& Form::operator-=(const Form& o) {
  if (o.grade_ != grade_ || o.dim_ != dim_) throw grade_error("form difference grade/dim mismatch");
  for (const auto& [m, v] : o.c_) add_to(m, -v);
  return *this;
}

Form& Form::operator*=(const Jet& k) {
  for (auto& [m, v] : c_) v *= k;
  prune();
  return *this;
}

Form Form::operator-() const {
  Form r(dim_, grade_);
  for (const auto& [m, v] : c_) r.c_[m] = -v;
  return r;
}

void Form::prune() {
  for (auto it = c_.begin(); it != c_.end();)
    if (it->second.val == 0.0 && it->second.dds == 0.0)
      it = c_.erase(it);
    else
      ++it;
}

Form operator+(Form a, const Form& b) { return a += b; }
Form operator-(Form a, const Form& b) { return a -= b; }
Form operator*(const Jet& k, Form a) { return a *= k; }

Form wedge(const Form& a, const Form& b) {
  if (a.dim() != b.dim()) throw grade_error("wedge of forms over different frames");
  if (a.grade() + b.grade() > a.dim()) throw grade_error("wedge grade overflow");
  Form r(a.dim(), a.grade() + b.grade());
  for (const auto& [ma, ca] : a.coeffs())
    for (const auto& [mb, cb] : b.coeffs()) {
      const int sg = merge_sign(ma, mb);
      if (sg == 0) continue;
      Jet term = ca * cb;
      r.add_to(ma | mb, sg > 0 ? term : -term);
    }
  r.prune();
  return r;
}

Form contract(const Vector& x, const Form& w) {
  if (w.grade() == 0) throw grade_error("contraction of a grade-0 form");
  Form r(w.dim(), w.grade() - 1);
  for (const auto& [m, c] : w.coeffs()) {
    const auto idx = mask_indices(m);
    int sign = 1;
    for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
      const Jet xi = x[idx[static_cast<size_t>(j)]];
      if (xi.val != 0.0 || xi.dds != 0.0) {
        Jet term = xi * c;
        r.add_to(m & ~(Mask{1} << idx[static_cast<size_t>(j)]), sign > 0 ? term : -term);
      }
      sign = -sign;
    }
  }
  r.prune();
  return r;
}

namespace {

Form ext_d_impl(const Form& w, const Coframe& frame, bool with_s_channel) {
  if (w.dim() != frame.dim) throw grade_error("ext_d: form/frame dimension mismatch");
  if (w.grade() == frame.dim) {
    // d of a top form vanishes; represented as an empty top form
    return Form(frame.dim, frame.dim);
  }
  Form r(frame.dim, w.grade() + 1);
  const bool use_s = with_s_channel && frame.s_index.has_value();
  const Mask ds_mask = use_s ? (Mask{1} << *frame.s_index) : 0;
  for (const auto& [m, c] : w.coeffs()) {
    // d_s channel: coeff' ds ∧ e^I
    if (use_s && c.dds != 0.0) {
      const int sg = merge_sign(ds_mask, m);
      if (sg != 0) r.add_to(ds_mask | m, sg > 0 ? Jet{c.dds} : Jet{-c.dds});
    }
    // structure channel: Leibniz over the basis factors
    const auto idx = mask_indices(m);
    int sign = 1;
    for (int j = 0; j < static_cast<int>(idx.size()); ++j) {
      const int bj = idx[static_cast<size_t>(j)];
      const Form& de = frame.d_basis(bj);
      if (!de.empty()) {
        const Mask rest = m & ~(Mask{1} << bj);
        for (const auto& [ms, cs] : de.coeffs()) {
          const int sg = merge_sign(rest, ms);
          if (sg == 0) continue;
          Jet term = c * cs;
          r.add_to(rest | ms, (sign * sg) > 0 ? term : -term);
        }
      }
      sign = -sign;
    }
  }
  r.prune();
  return r;
}

}  // namespace

Form ext_d(const Form& w, const Coframe& frame) { return ext_d_impl(w, frame, true); }

Form ext_d_structure(const Form& w, const Coframe& frame) { return ext_d_impl(w, frame, false); }

namespace {

/// det of the k x k pairing submatrix ginv[I x J].
Jet minor_det(const JetMatrix& ginv, const std::vector<int>& I, const std::vector<int>& J) {
  const int k = static_cast<int>(I.size());
  if (k == 0) return Jet{1.0};
  JetMatrix m(k, k);
  for (int a = 0; a < k; ++a)
    for (int b = 0; b < k; ++b)
      m.at(a, b) = ginv.at(I[static_cast<size_t>(a)], J[static_cast<size_t>(b)]);
  return m.det();
}

void enumerate_masks(int dim, int grade, std::vector<Mask>& out) {
  out.clear();
  for (Mask m = 0; m < (Mask{1} << dim); ++m)
    if (popcount(m) == grade) out.push_back(m);
}

}  // namespace

Jet form_inner(const Form& a, const Form& b, const MetricTensor& g) {
  if (a.grade() != b.grade()) throw grade_error("form_inner grade mismatch");
  const JetMatrix ginv = g.gram.inverse();
  Jet total{0.0};
  for (const auto& [ma, ca] : a.coeffs()) {
    const auto ia = mask_indices(ma);
    for (const auto& [mb, cb] : b.coeffs()) {
      total += ca * cb * minor_det(ginv, ia, mask_indices(mb));
    }
  }
  return total;
}

Form hodge(const Form& w, const MetricTensor& g, const Form& vol) {
  const int n = g.dim();
  if (w.dim() != n || vol.dim() != n) throw grade_error("hodge dimension mismatch");
  if (vol.grade() != n) throw domain_error("hodge: vol is not a top form");
  const Mask full = (Mask{1} << n) - 1;
  const Jet v = vol.coeff(full);
  if (v.val == 0.0) throw domain_error("hodge: vol has zero top coefficient");
  const JetMatrix ginv = g.gram.inverse();

  const int k = w.grade();
  Form r(n, n - k);
  std::vector<Mask> kmasks;
  enumerate_masks(n, k, kmasks);
  for (const Mask mI : kmasks) {
    const auto I = mask_indices(mI);
    Jet pairing{0.0};
    for (const auto& [mJ, cJ] : w.coeffs())
      pairing += cJ * minor_det(ginv, I, mask_indices(mJ));
    if (pairing.val == 0.0 && pairing.dds == 0.0) continue;
    const Mask mc = full & ~mI;
    const int sg = merge_sign(mI, mc);
    Jet co = pairing * v;
    r.add_to(mc, sg > 0 ? co : -co);
  }
  r.prune();
  return r;
}

Form flat(const Vector& x, const MetricTensor& g) {
  const int n = g.dim();
  Form r(n, 1);
  for (int i = 0; i < n; ++i) {
    Jet c{0.0};
    for (int j = 0; j < n; ++j) c += g.at(i, j) * x[j];
    if (c.val != 0.0 || c.dds != 0.0) r.set(Mask{1} << i, c);
  }
  return r;
}

Vector sharp(const Form& w, const MetricTensor& g) {
  if (w.grade() != 1) throw grade_error("sharp expects a one-form");
  const int n = g.dim();
  const JetMatrix ginv = g.gram.inverse();
  Vector x(n);
  for (int i = 0; i < n; ++i) {
    Jet c{0.0};
    for (int j = 0; j < n; ++j) c += ginv.at(i, j) * w.coeff(Mask{1} << j);
    x[i] = c;
  }
  return x;
}

}  // namespace nkflow
