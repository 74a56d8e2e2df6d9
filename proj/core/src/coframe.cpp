#include "nkflow/coframe.hpp"

#include "nkflow/errors.hpp"

namespace nkflow {

Coframe::Coframe(std::vector<std::string> lab, std::optional<int> s_idx)
    : dim(static_cast<int>(lab.size())), labels(std::move(lab)), s_index(s_idx) {
  structure.assign(static_cast<size_t>(dim), Form(dim, 2));
}

int Coframe::index_of(std::string_view label) const {
  for (int i = 0; i < dim; ++i)
    if (labels[static_cast<size_t>(i)] == label) return i;
  throw domain_error("coframe has no label '" + std::string(label) + "'");
}

void Coframe::set_d_basis(int k, Form f) {
  if (f.grade() != 2 || f.dim() != dim) throw grade_error("structure form must be a 2-form on the frame");
  structure[static_cast<size_t>(k)] = std::move(f);
}

bool check_d_squared(const Coframe& frame, double tol) {
  for (int k = 0; k < frame.dim; ++k) {
    const Form dd = ext_d_structure(frame.d_basis(k), frame);
    if (dd.max_abs() > tol) return false;
  }
  return true;
}

Coframe change_of_basis(const Coframe& frame, const JetMatrix& m) {
  const int n = frame.dim;
  const JetMatrix minv = m.inverse();
  Coframe out(frame.labels, frame.s_index);
  for (int i = 0; i < n; ++i) {
    // d e'_i = sum_j m[i][j] d e_j, rewritten in the primed basis:
    // e_p = sum_q minv[p][q] e'_q, so e_p ∧ e_r picks up minv twice.
    Form de(n, 2);
    for (int j = 0; j < n; ++j) {
      const Jet mij = m.at(i, j);
      if (mij.val == 0.0 && mij.dds == 0.0) continue;
      for (const auto& [mask, c] : frame.d_basis(j).coeffs()) {
        const auto idx = mask_indices(mask);
        const int p = idx[0], r = idx[1];
        for (int q1 = 0; q1 < n; ++q1)
          for (int q2 = 0; q2 < n; ++q2) {
            if (q1 == q2) continue;
            const Jet w = mij * c * minv.at(p, q1) * minv.at(r, q2);
            if (w.val == 0.0 && w.dds == 0.0) continue;
            const Mask mm = (Mask{1} << q1) | (Mask{1} << q2);
            de.add_to(mm, q1 < q2 ? w : -w);
          }
      }
    }
    de.prune();
    out.set_d_basis(i, std::move(de));
  }
  return out;
}

}  // namespace nkflow
