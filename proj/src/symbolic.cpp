#include "gge/symbolic.hpp"

#include <algorithm>

namespace gge::sym {

void normalize(Poly& a) {
  for (auto& m : a.t) std::sort(m.f.begin(), m.f.end());
  std::sort(a.t.begin(), a.t.end(), [](const Monomial& l, const Monomial& r) {
    if (l.f.size() != r.f.size()) return l.f.size() < r.f.size();
    for (size_t i = 0; i < l.f.size(); ++i) {
      const auto& a_ = l.f[i];
      const auto& b_ = r.f[i];
      if (!(a_ == b_)) {
        if (a_.site != b_.site) return a_.site < b_.site;
        if (a_.var != b_.var) return a_.var < b_.var;
        return a_.hp < b_.hp;
      }
    }
    return false;
  });
  std::vector<Monomial> out;
  out.reserve(a.t.size());
  for (auto& m : a.t) {
    if (!out.empty() && out.back().f == m.f)
      out.back().coeff += m.coeff;
    else
      out.push_back(std::move(m));
  }
  out.erase(std::remove_if(out.begin(), out.end(),
                           [](const Monomial& m) { return m.coeff == cplx(0.0, 0.0); }),
            out.end());
  a.t = std::move(out);
}

Poly make_const(cplx c) {
  Poly p;
  if (c != cplx(0.0, 0.0)) p.t.push_back({c, {}});
  return p;
}

Poly make_term(cplx coeff, std::vector<VarPow> factors) {
  Poly p;
  Monomial m{coeff, std::move(factors)};
  p.t.push_back(std::move(m));
  normalize(p);
  return p;
}

Poly& Poly::operator+=(const Poly& o) {
  t.insert(t.end(), o.t.begin(), o.t.end());
  normalize(*this);
  return *this;
}

Poly& Poly::operator*=(double s) {
  if (s == 0.0) {
    t.clear();
    return *this;
  }
  for (auto& m : t) m.coeff *= s;
  return *this;
}

Poly add(const Poly& a, const Poly& b) {
  Poly r = a;
  r += b;
  return r;
}

Poly scale(const Poly& a, cplx s) {
  Poly r;
  if (s == cplx(0.0, 0.0)) return r;
  r = a;
  for (auto& m : r.t) m.coeff *= s;
  return r;
}

static std::vector<VarPow> merge_factors(const std::vector<VarPow>& a, const std::vector<VarPow>& b) {
  std::vector<VarPow> out;
  out.reserve(a.size() + b.size());
  size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      out.push_back(a[i++]);
    else if (b[j] < a[i])
      out.push_back(b[j++]);
    else {
      VarPow v = a[i];
      v.hp = static_cast<std::uint16_t>(v.hp + b[j].hp);
      out.push_back(v);
      ++i;
      ++j;
    }
  }
  for (; i < a.size(); ++i) out.push_back(a[i]);
  for (; j < b.size(); ++j) out.push_back(b[j]);
  return out;
}

Poly mul(const Poly& a, const Poly& b, int n, bool wrap) {
  (void)n;
  (void)wrap;
  Poly r;
  r.t.reserve(a.t.size() * b.t.size());
  for (const auto& ma : a.t)
    for (const auto& mb : b.t) r.t.push_back({ma.coeff * mb.coeff, merge_factors(ma.f, mb.f)});
  normalize(r);
  return r;
}

Poly conjugate(const Poly& a, const std::vector<std::uint8_t>& var_conj_map) {
  Poly r = a;
  for (auto& m : r.t) {
    m.coeff = std::conj(m.coeff);
    for (auto& vp : m.f)
      if (vp.var < var_conj_map.size()) vp.var = var_conj_map[vp.var];
  }
  normalize(r);
  return r;
}

Poly conjugate(const Poly& a) {
  std::vector<std::uint8_t> id;
  for (int v = 0; v < 16; ++v) id.push_back(static_cast<std::uint8_t>(v));
  return conjugate(a, id);
}

Poly real_part(const Poly& a, const std::vector<std::uint8_t>& var_conj_map) {
  Poly r = add(a, conjugate(a, var_conj_map));
  r *= 0.5;
  return r;
}

Poly shift_sites(const Poly& a, int delta, int n, bool wrap) {
  Poly r = a;
  for (auto& m : r.t)
    for (auto& vp : m.f) {
      int s = vp.site + delta;
      if (wrap) s = ((s % n) + n) % n;
      vp.site = s;
    }
  normalize(r);
  return r;
}

Poly& BandPoly::at(int offset, int i) {
  if (wrap) offset = ((offset % n) + n) % n;
  auto& d = diags[offset];
  if (d.empty()) d.resize(n);
  return d[i];
}

void BandPoly::add_entry(int row, int col, Poly p) {
  int o = col - row;
  if (wrap) o = ((o % n) + n) % n;
  Poly& e = at(o, row);
  e += p;
}

BandPoly band_mul(const BandPoly& A, const BandPoly& B) {
  require(A.n == B.n && A.wrap == B.wrap, ErrorCode::DomainError, "band shape mismatch");
  BandPoly C;
  C.n = A.n;
  C.wrap = A.wrap;
  const int n = A.n;
  for (const auto& [oa, da] : A.diags) {
    for (const auto& [ob, db] : B.diags) {
      if (A.wrap) {
        int oc = (oa + ob) % n;
        auto& dc = C.diags[oc];
        if (dc.empty()) dc.resize(n);
        for (int i = 0; i < n; ++i) {
          const Poly& pa = da[i];
          if (pa.empty()) continue;
          const Poly& pb = db[(i + oa) % n];
          if (pb.empty()) continue;
          dc[i] += mul(pa, pb, n, true);
        }
      } else {
        int oc = oa + ob;
        if (oc <= -n || oc >= n) continue;
        auto& dc = C.diags[oc];
        if (dc.empty()) dc.resize(n);
        int ilo = std::max({0, -oa, -oc});
        int ihi = std::min({n - 1, n - 1 - oa, n - 1 - oa - ob});
        for (int i = ilo; i <= ihi; ++i) {
          const Poly& pa = da[i];
          if (pa.empty()) continue;
          const Poly& pb = db[i + oa];
          if (pb.empty()) continue;
          dc[i] += mul(pa, pb, n, false);
        }
      }
    }
  }
  // prune empty diagonals
  for (auto it = C.diags.begin(); it != C.diags.end();) {
    bool all_empty = true;
    for (const auto& p : it->second)
      if (!p.empty()) {
        all_empty = false;
        break;
      }
    it = all_empty ? C.diags.erase(it) : std::next(it);
  }
  return C;
}

Poly band_trace(const BandPoly& A) {
  Poly tr;
  auto it = A.diags.find(0);
  if (it == A.diags.end()) return tr;
  for (const auto& p : it->second) tr += p;
  return tr;
}

Poly band_diag_entry(const BandPoly& A, int i) {
  auto it = A.diags.find(0);
  if (it == A.diags.end() || it->second.empty()) return Poly{};
  return it->second[i];
}

Poly band_entry(const BandPoly& A, int i, int j) {
  int o = j - i;
  if (A.wrap) o = ((o % A.n) + A.n) % A.n;
  auto it = A.diags.find(o);
  if (it == A.diags.end() || it->second.empty()) return Poly{};
  return it->second[i];
}

std::string to_string(const Poly& p, const std::vector<std::string>& var_names) {
  std::string out;
  for (const auto& m : p.t) {
    if (!out.empty()) out += " + ";
    if (m.coeff.imag() == 0.0)
      out += fmt17(m.coeff.real());
    else
      out += "(" + fmt17(m.coeff.real()) + "," + fmt17(m.coeff.imag()) + ")";
    for (const auto& vp : m.f) {
      out += " " + (vp.var < var_names.size() ? var_names[vp.var] : "v" + std::to_string(vp.var)) +
             "[" + std::to_string(vp.site) + "]";
      if (vp.hp != 2) {
        out += "^";
        if (vp.hp % 2 == 0)
          out += std::to_string(vp.hp / 2);
        else
          out += std::to_string(vp.hp) + "/2";
      }
    }
  }
  return out.empty() ? "0" : out;
}

}  // namespace gge::sym
