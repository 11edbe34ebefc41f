#pragma once

#include <Eigen/Dense>
#include <cmath>

#include "gge/common.hpp"

namespace gge {

struct QuadRule {
  VecD x, w;
  int size() const { return static_cast<int>(x.size()); }
};

namespace detail {

// Golub–Welsch: nodes/weights from the symmetric Jacobi matrix of the
// three-term recurrence (diag a_k, squared off-diagonal b_k, total mass mu0).
inline QuadRule golub_welsch(const VecD& a, const VecD& b2, double mu0) {
  int n = static_cast<int>(a.size());
  MatD J = MatD::Zero(n, n);
  for (int k = 0; k < n; ++k) {
    J(k, k) = a[k];
    if (k + 1 < n) {
      double ob = std::sqrt(b2[k + 1]);
      J(k, k + 1) = ob;
      J(k + 1, k) = ob;
    }
  }
  Eigen::SelfAdjointEigenSolver<MatD> es(J);
  require(es.info() == Eigen::Success, ErrorCode::QuadratureFailure, "Jacobi matrix eigensolve failed");
  QuadRule r;
  r.x = es.eigenvalues();
  r.w.resize(n);
  for (int k = 0; k < n; ++k) {
    double v = es.eigenvectors()(0, k);
    r.w[k] = mu0 * v * v;
  }
  return r;
}

}  // namespace detail

// Weight (1-x)^a (1+x)^b on [-1,1]; a,b > -1.
inline QuadRule gauss_jacobi(int n, double a, double b) {
  require(n >= 1, ErrorCode::QuadratureFailure, "need at least one node");
  require(a > -1.0 && b > -1.0, ErrorCode::NonNormalizable, "Jacobi exponents must exceed -1");
  VecD diag(n), off2(n);
  off2[0] = 0.0;
  for (int k = 0; k < n; ++k) {
    double s = 2.0 * k + a + b;
    if (k == 0)
      diag[k] = (b - a) / (a + b + 2.0);
    else
      diag[k] = (b * b - a * a) / (s * (s + 2.0));
    if (k >= 1) {
      double num = 4.0 * k * (k + a) * (k + b) * (k + a + b);
      double den = s * s * (s + 1.0) * (s - 1.0);
      off2[k] = num / den;
    }
  }
  double mu0 = std::exp((a + b + 1.0) * std::log(2.0) + std::lgamma(a + 1.0) + std::lgamma(b + 1.0) -
                        std::lgamma(a + b + 2.0));
  return detail::golub_welsch(diag, off2, mu0);
}

inline QuadRule gauss_legendre(int n) { return gauss_jacobi(n, 0.0, 0.0); }

// Affine map of a rule on [-1,1] to [lo,hi] with plain Lebesgue jacobian
// (valid for Gauss–Legendre; singular-weight rules need the power-law
// jacobian handled by the caller).
inline QuadRule map_to_interval(QuadRule r, double lo, double hi) {
  double h = 0.5 * (hi - lo), m = 0.5 * (hi + lo);
  for (int i = 0; i < r.size(); ++i) {
    r.x[i] = m + h * r.x[i];
    r.w[i] *= h;
  }
  return r;
}

// Nodes/weights integrating  x^p * f(x) dx  on (0, hi]  (p > -1): Gauss-Jacobi
// in the mapped variable; the singular factor x^p is absorbed in the weights.
inline QuadRule gauss_power_halfline(int n, double p, double hi) {
  QuadRule gj = gauss_jacobi(n, 0.0, p);
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  double h = 0.5 * hi;
  double scale = std::pow(h, p + 1.0);
  for (int i = 0; i < n; ++i) {
    r.x[i] = h * (1.0 + gj.x[i]);
    // w_gj integrates (1+u)^p; substitute x = h(1+u): x^p dx = h^{p+1}(1+u)^p du
    r.w[i] = scale * gj.w[i];
  }
  return r;
}

// Periodic trapezoid on [0, 2pi): spectrally accurate for smooth periodic f.
inline QuadRule periodic_trapezoid(int n) {
  QuadRule r;
  r.x.resize(n);
  r.w.resize(n);
  for (int i = 0; i < n; ++i) {
    r.x[i] = 2.0 * kPi * i / n;
    r.w[i] = 2.0 * kPi / n;
  }
  return r;
}

// Composite Gauss–Legendre over consecutive panels.
inline QuadRule composite_legendre(int per_panel, const std::vector<double>& breaks) {
  require(breaks.size() >= 2, ErrorCode::QuadratureFailure, "need at least one panel");
  QuadRule base = gauss_legendre(per_panel);
  int panels = static_cast<int>(breaks.size()) - 1;
  QuadRule r;
  r.x.resize(per_panel * panels);
  r.w.resize(per_panel * panels);
  int k = 0;
  for (int p = 0; p < panels; ++p) {
    QuadRule m = map_to_interval(base, breaks[p], breaks[p + 1]);
    for (int i = 0; i < per_panel; ++i, ++k) {
      r.x[k] = m.x[i];
      r.w[k] = m.w[i];
    }
  }
  return r;
}

}  // namespace gge
