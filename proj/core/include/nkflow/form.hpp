#pragma once

#include <cstdint>
#include <map>
#include <vector>

#include "nkflow/jet.hpp"
#include "nkflow/linalg.hpp"

namespace nkflow {

struct Coframe;

/// Index subsets are bitmasks over the coframe; a set bit i means the basis
/// one-form e^i is a factor. The canonical monomial is the strictly
/// increasing product of its factors.
using Mask = std::uint32_t;

int popcount(Mask m);
std::vector<int> mask_indices(Mask m);
Mask mask_of(const std::vector<int>& indices);

/// Sign of e^a ∧ e^b written in increasing order; 0 when a and b share a factor.
int merge_sign(Mask a, Mask b);

/// A graded antisymmetric multilinear object over a fixed coframe: grade k
/// plus a map from increasing index tuples (as masks) to jet coefficients.
/// Absent tuples are zero. Grade-0 forms hold a single jet at mask 0.
class Form {
 public:
  Form() = default;
  Form(int dim, int grade);

  static Form scalar(int dim, Jet v);
  static Form basis_monomial(int dim, Mask m, Jet coeff = Jet{1.0});

  int dim() const { return dim_; }
  int grade() const { return grade_; }

  Jet coeff(Mask m) const;
  void set(Mask m, Jet v);        // throws grade_error when popcount(m) != grade
  void add_to(Mask m, Jet v);

  const std::map<Mask, Jet>& coeffs() const { return c_; }

  bool empty() const { return c_.empty(); }
  double max_abs() const;         // max |val| over stored coefficients

  Form& operator+=(const Form& o);
  Form& operator-=(const Form& o);
  Form& operator*=(const Jet& k);
  Form operator-() const;

  /// Drop coefficients that are exactly zero in both channels.
  void prune();

 private:
  int dim_ = 0;
  int grade_ = 0;
  std::map<Mask, Jet> c_;
};

Form operator+(Form a, const Form& b);
Form operator-(Form a, const Form& b);
Form operator*(const Jet& k, Form a);

/// Exterior product. Antisymmetric, bilinear, associative;
/// throws grade_error when the grades overflow the frame dimension.
Form wedge(const Form& a, const Form& b);

/// Interior product X ⨼ w. Degree -1 antiderivation; throws on grade 0.
Form contract(const Vector& x, const Form& w);

/// Exterior derivative: structure part (each basis factor replaced by its
/// structure two-form, Leibniz signs) plus, when the frame has an s_index,
/// the exact d_s channel sum_I coeff'_I ds ∧ e^I.
Form ext_d(const Form& w, const Coframe& frame);

/// Structure part only, regardless of s_index.
Form ext_d_structure(const Form& w, const Coframe& frame);

/// Metric pairing of two equal-grade forms, extended from the inverse Gram
/// matrix by determinants.
Jet form_inner(const Form& a, const Form& b, const MetricTensor& g);

/// Hodge star defined by a ∧ ⋆w = g(a, w) vol for all a of equal grade.
/// vol must be a nonzero top-degree form; throws singular_error on a
/// singular Gram matrix.
Form hodge(const Form& w, const MetricTensor& g, const Form& vol);

/// Musical isomorphisms: X♭ = g(X, ·) and the inverse.
Form flat(const Vector& x, const MetricTensor& g);
Vector sharp(const Form& w, const MetricTensor& g);

}  // namespace nkflow
