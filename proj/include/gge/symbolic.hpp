#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gge/common.hpp"

namespace gge::sym {

// Exponents are stored in half-units (hp = 2*power) so that square-root
// entries (antisymmetric Lax matrices built from sqrt(a_j)) stay exact;
// traces always come out with integer powers.
struct VarPow {
  std::int32_t site;
  std::uint8_t var;
  std::uint16_t hp;

  friend bool operator<(const VarPow& l, const VarPow& r) {
    if (l.site != r.site) return l.site < r.site;
    return l.var < r.var;
  }
  friend bool operator==(const VarPow& l, const VarPow& r) {
    return l.site == r.site && l.var == r.var && l.hp == r.hp;
  }
};

struct Monomial {
  cplx coeff;
  std::vector<VarPow> f;  // sorted by (site, var), hp > 0
};

// Flat multivariate polynomial over per-site variables.
struct Poly {
  std::vector<Monomial> t;

  bool empty() const { return t.empty(); }
  Poly& operator+=(const Poly& o);
  Poly& operator*=(double s);
};

Poly make_const(cplx c);
Poly make_term(cplx coeff, std::vector<VarPow> factors);
Poly add(const Poly& a, const Poly& b);
Poly mul(const Poly& a, const Poly& b, int n, bool wrap);
Poly scale(const Poly& a, cplx s);
Poly conjugate(const Poly& a);                 // conj coeffs, swap var pairs via map
Poly conjugate(const Poly& a, const std::vector<std::uint8_t>& var_conj_map);
Poly real_part(const Poly& a, const std::vector<std::uint8_t>& var_conj_map);
Poly shift_sites(const Poly& a, int delta, int n, bool wrap);
void normalize(Poly& a);  // sort factors, merge equal monomials, drop zeros

// Evaluation against a per-(site,var) value table.
template <typename Vals>
cplx eval(const Poly& p, Vals&& vals) {
  cplx acc(0.0, 0.0);
  for (const auto& m : p.t) {
    cplx prod = m.coeff;
    for (const auto& vp : m.f) {
      cplx v = vals(vp.site, vp.var);
      if (vp.hp & 1u) {
        prod *= std::pow(v, 0.5 * vp.hp);
      } else {
        int k = vp.hp >> 1;
        cplx acc2(1.0, 0.0);
        cplx base = v;
        while (k) {
          if (k & 1) acc2 *= base;
          base *= base;
          k >>= 1;
        }
        prod *= acc2;
      }
    }
    acc += prod;
  }
  return acc;
}

// Banded matrix with Poly entries. Offsets: wrap => canonical in [0, n),
// entry (i, (i+o) mod n); no wrap => signed offsets, entry (i, i+o).
struct BandPoly {
  int n = 0;
  bool wrap = true;
  std::map<int, std::vector<Poly>> diags;

  Poly& at(int offset, int i);
  void add_entry(int row, int col, Poly p);
};

BandPoly band_mul(const BandPoly& A, const BandPoly& B);
Poly band_trace(const BandPoly& A);
Poly band_diag_entry(const BandPoly& A, int i);  // (i, i)
Poly band_entry(const BandPoly& A, int i, int j);

std::string to_string(const Poly& p, const std::vector<std::string>& var_names);

}  // namespace gge::sym
