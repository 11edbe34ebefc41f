#pragma once

#include <vector>

#include "gge/common.hpp"
#include "gge/models.hpp"
#include "gge/polynomial.hpp"
#include "gge/seeds.hpp"
#include "gge/stats.hpp"

namespace gge {

// Which part of a complex trace the phase observable multiplies. Families
// with real traces only admit Re.
enum class ObsPart { Re, Im };

struct OperatorSettings {
  int nodes_per_dim = 64;   // quadrature nodes per continuous axis
  double delta_t = 1e-2;    // outer phase-stencil width; Richardson pairs with delta_t/2
  double alpha_rel_step = 2e-2;  // relative step for d/dalpha consistency helpers
  double tail_mass = 1e-12;      // truncation target: dropped tail vs retained mass
  int max_points = 20000;        // hard cap on grid points per block
  double eig_rel_tol = 1e-6;     // grid-refinement convergence criterion
  int type2_panels = 10;         // dyadic panels for the endpoint-graded alpha integral
  int type2_panel_nodes = 6;     // Gauss-Legendre nodes per panel
  int deriv_x_nodes = 20;        // plain GL nodes for scaled-parameter derivative integrals
  int current_s_nodes = 10;      // GL nodes for the current's coupling-integral form
  bool refine_check = true;      // solve the half grid too and set `converged`
  bool with_type2 = true;        // compute the finite-size (tilde) block in clt_mean_and_variance
  int subspace_block = 4;        // Ritz block size for the iterative eigensolver
  std::uint64_t scan_seed = 101;  // RNG stream for the boundedness scan
};

namespace opdetail {

// One monomial of a window polynomial, compiled against flat variable slots
// (slot = window_site * vars_per_site + var).
struct Factor {
  std::int16_t slot = 0;
  std::int16_t pow = 0;
};
struct Term {
  cplx coeff;
  std::vector<Factor> f;
};
// Terms split by which half of the (x, y) window they touch.
struct TermSplit {
  std::vector<Term> x, y, xy;
};

}  // namespace opdetail

// Integral kernel k(x,y) = prod_q sqrt(F(x_q) F(y_q)) * exp(-W(x,y) + i t h(x,y)
// [+ i t2 h2(x,y)]) over one window of 2k coordinate sites. The per-site weight
// F carries the model's power-law factor plus, for Toda-type models, a quadratic
// reweighting e^{-(c/2)(a^2+2b^2)} moved out of the potential; the move is
// pointwise value-neutral, so no free-energy correction is owed.
struct TransferKernel {
  ModelKind kind;
  PolyZ P;  // original potential (degree 0/absent allowed only on compact domains)
  int s = 0;               // phase observable Tr L^s power, 0 = none
  int s2 = 0;              // second phase observable (susceptibility kernels)
  ObsPart part = ObsPart::Re;
  ObsPart part2 = ObsPart::Re;
  double alpha = 1.0;
  double t = 0.0;
  double t2 = 0.0;
  int k = 1;               // common circular index across all seeds
  int vars_per_site = 0;   // symbolic variable count per coordinate site
  int axes_per_site = 0;   // continuous quadrature axes per coordinate site
  double reweight_c = 0.0;  // quadratic reweighting coefficient (Toda-type)
  bool has_W = false;
  Seed seed_W;             // window seed of Tr Re P_eff(L)
  opdetail::TermSplit W, h, h2;
  std::vector<double> cutoffs;  // per-axis truncation bounds (recorded metadata)
  // Site-dependent variant marker: the j-th operator of an M-site finite
  // lattice is the homogeneous kernel at parameter alpha * j / M.
  bool site_dependent = false;
  int site_j = 0;
  int site_M = 0;
};

// Assembles a kernel for potential P and phase observable Tr (Re|Im) L^s at
// strength t. Seeds are re-extracted on the lcm circular index; the |h|^a e^-W
// boundedness hypothesis (a <= 3) is checked by a random scan over the
// truncated domain plus a boundary shell.
// Errors: IncompatibleSeeds (no common k <= 8, or grid dimension out of scope),
// UnboundedWeight (scan fails by more than a factor 10), UnsupportedPotential,
// DomainError (family outside operator scope, Im part of a real trace).
TransferKernel build_kernel(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                            double alpha, double t, const OperatorSettings& st = {});

// Two-observable kernel e^{-W + i t1 h_m + i t2 h_n} for susceptibility stencils.
TransferKernel build_kernel2(const ModelKind& kind, const PolyZ& P, int m, int n, double alpha,
                             double t1, double t2, const OperatorSettings& st = {});

// Site-dependent variant ℒ^{(j)} of a finite M-site lattice: homogeneous kernel
// at scaled parameter alpha*j/M, tagged with (j, M).
TransferKernel build_kernel_site(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                                 double alpha, int j, int M, double t,
                                 const OperatorSettings& st = {});

// Symmetrized Nystrom discretization D_ij = sqrt(w_i w_j) k(x_i, x_j). Power-law
// site factors are absorbed into Gauss-Jacobi weights on their axes; free axes
// use truncated Gauss-Legendre; disk sites use a (radius^2, angle) product rule.
// Errors: GridTooLarge if the block grid exceeds st.max_points.
MatZ discretize(const TransferKernel& kernel, int nodes_per_dim,
                const OperatorSettings& st = {});

struct SpectralResult {
  cplx lambda_dom;
  cplx lambda_second;
  VecZ eigenfunction;  // unit norm, phase-normalized so the largest entry is real > 0
  double gap = 0.0;    // |lambda_dom| - |lambda_second|
  std::vector<int> grid_size;
  bool converged = false;
  int iterations = 0;
};

// Top two eigenvalues by modulus: dense solve for dims <= 2000, block subspace
// iteration with Ritz extraction above. `converged` here reflects the
// eigensolver; grid-level refinement is judged by kernel_spectrum.
// Errors: GapCollapse if gap < 1e-8 |lambda_dom|.
SpectralResult dominant_spectrum(const MatZ& D);

// Discretizes at st.nodes_per_dim (and, when st.refine_check, at half that)
// and solves; `converged` = the two grids agree to st.eig_rel_tol. `warm`
// optionally seeds the iteration with a previous eigenfunction of equal size.
SpectralResult kernel_spectrum(const TransferKernel& kernel, const OperatorSettings& st = {},
                               const VecZ* warm = nullptr);

// F1(alpha) = -(1/k) ln lambda(alpha, 0) for the model's homogeneous kernel.
double free_energy_type1(const ModelKind& kind, const PolyZ& P, double alpha,
                         const OperatorSettings& st = {});

// F2(alpha) = -(1/k) int_0^1 ln lambda(alpha x, 0) dx, dyadically graded toward
// x = 0 with an analytic p + q ln x stub for the last interval. M_quad > 0
// overrides st.type2_panels. Errors: QuadratureFailure if grading cannot
// stabilize the endpoint fit.
double free_energy_type2(const ModelKind& kind, const PolyZ& P, double alpha, int M_quad = 0,
                         const OperatorSettings& st = {});

// Central-difference derivative of alpha * F2 at alpha (consistency partner of
// free_energy_type1).
double type2_alpha_derivative(const ModelKind& kind, const PolyZ& P, double alpha,
                              const OperatorSettings& st = {});

// Phase-stencil derivatives of both free energies: A = i d/dt F1, sigma2 =
// d^2/dt^2 F1 at t=0, and the scaled-parameter (tilde) analogues from F2.
// Richardson over widths {delta_t, delta_t/2}; imaginary residuals must stay
// below 1e-6. Errors: DerivativeUnstable if the two widths disagree by more
// than 1e-3 relative, ZeroVariance never raised here (sigma2 may be 0 for a
// constant observable).
CLTQuantities clt_mean_and_variance(const ModelKind& kind, const PolyZ& P, int s, ObsPart part,
                                    double alpha, const OperatorSettings& st = {});

// C_{m,n} = d^2/dt1 dt2 F1 with both phase observables, mixed central
// difference on the (t1, t2) stencil. Real and (m, n)-symmetric within 1e-6.
double susceptibility(const ModelKind& kind, const PolyZ& P, int m, int n, double alpha,
                      const OperatorSettings& st = {});

struct CurrentMean {
  double integral_form = 0.0;    // int_0^alpha C_{1,n}(s) ds
  double derivative_form = 0.0;  // alpha * d^2/dt1 dt2 F2(alpha)
  bool within_tol = false;       // forms agree within 1e-3
};

// Mean current of the n-th Toda flow per site, computed both ways.
CurrentMean toda_current_mean_detail(const PolyZ& P, int n, double alpha,
                                     const OperatorSettings& st = {});

// Integral-form value; throws DerivativeUnstable if the two forms disagree.
double toda_current_mean(const PolyZ& P, int n, double alpha, const OperatorSettings& st = {});

}  // namespace gge
