#pragma once
// Monte Carlo sampling of generalized Gibbs ensembles: direct (factorizable)
// samplers, Metropolis-within-Gibbs with seed-local energy updates, observable
// extraction, and sample serialization.

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "gge/common.hpp"
#include "gge/models.hpp"
#include "gge/polynomial.hpp"
#include "gge/seeds.hpp"

namespace gge {

enum class MeasureType { Type1, Type2 };

const char* measure_type_name(MeasureType t);
MeasureType measure_type_from_name(const std::string& s);

struct GGEConfig {
  ModelKind kind;
  MeasureType type = MeasureType::Type1;
  double alpha = 1.0;
  PolyZ potential;          // P in exp(-Tr Re P(L))
  int N = 32;               // site count (CMV kinds: 2N coordinates)
  bool real_verblunsky = false;   // Schur flow / Jacobi: restrict CMV coords to (-1,1)
  double jacobi_ta = 0.0;   // extra (1-a)^{ta+1-alpha/n} weight (Jacobi preset)
  double jacobi_tb = 0.0;   // extra (1+(-1)^j a)^{tb+1-alpha/n} weight
  bool jacobi = false;
};

// Per-coordinate reference law (everything except the exp(-Tr Re P) factor).
enum class CoordLaw {
  Free,       // Lebesgue on R
  Positive,   // kappa: density x^{kappa-1} dx on (0,inf)
  Disk,       // kappa: (1-|a|^2)^{kappa-1} d^2a on unit disk
  Interval,   // kappa: (1-a^2)^{kappa-1} da on (-1,1), real
  Circle      // uniform phase, |a| = 1
};

struct CoordWeight {
  CoordLaw law = CoordLaw::Free;
  double kappa = 1.0;
  double ta = 0.0, tb = 0.0;  // Jacobi extras; used only when law == Interval
};

// weight_table(cfg)[v][i] describes coordinate (var v, site i).
std::vector<std::vector<CoordWeight>> weight_table(const GGEConfig& cfg);

// log density (up to a constant): sum of coordinate log-weights - Tr Re P(L).
// Used by tests to pin exponent conventions and by the sampler for resyncs.
double log_density(const GGEConfig& cfg, const Coordinates& c);

struct SamplerSettings {
  std::int64_t count = 10000;   // retained draws (post burn-in, post thinning)
  std::int64_t burn_in = -1;    // sweeps; -1 = auto
  std::int64_t thin = -1;       // sweeps between retained draws; -1 = auto from tau
  int chains = 1;
  std::uint64_t rng_seed = 1;
  double step_init = 0.5;
};

struct ChainDiagnostics {
  double acceptance_rate = 1.0;     // post burn-in average (direct: 1)
  std::int64_t chain_length = 0;    // retained draws
  std::int64_t burn_in = 0;
  std::int64_t thin = 1;
  int chains = 1;
  double tau_int = 0.0;             // integrated autocorrelation of the energy series
  double ess = 0.0;                 // effective sample size of the energy series
  bool mixing_warning = false;
  std::string note;
};

struct SampleBatch {
  GGEConfig config;
  std::vector<Coordinates> draws;
  ChainDiagnostics diag;
};

// Exact samplers for the product-form cases: Toda with real quadratic potential
// (Type1 and Type2) and CMV kinds with constant potential (Type1 and Type2).
// Everything else: NotFactorizable.
SampleBatch sample_direct(const GGEConfig& cfg, std::int64_t count, std::uint64_t seed);

// Site-local Metropolis-within-Gibbs. Energy differences are evaluated through
// the seed decomposition of Tr Re P(L): interior moves touch at most two seed
// blocks, moves inside the boundary window fall back to a full trace difference.
// Step sizes adapt toward 0.44 acceptance during burn-in only (Robbins-Monro).
SampleBatch sample_mcmc(const GGEConfig& cfg, const SamplerSettings& st);

struct Observable {
  enum Kind { TracePower, ReTracePower, ImTracePower, LocalField, Current } kind =
      ReTracePower;
  int s = 2;  // trace power
  int m = 2;  // local field power
  int j = 0;  // site index (LocalField, Current), 0-based
  int n = 1;  // current power: J^[n]_j = [L^n L_down]_jj (n = 0: a_j)
  std::string name() const;
};

// One value per retained draw.
VecD observable_series(const SampleBatch& batch, const Observable& obs);

// Columnar binary format: magic, little-endian f64 columns, JSON header with
// config echo and column names. CSV mirror for small batches.
void write_samples_binary(const std::string& path, const SampleBatch& batch,
                          const std::vector<std::pair<std::string, VecD>>& columns);
struct SampleTable {
  std::string header_json;
  std::vector<std::string> names;
  std::vector<VecD> columns;
};
SampleTable read_samples_binary(const std::string& path);
void write_samples_csv(const std::string& path,
                       const std::vector<std::pair<std::string, VecD>>& columns);

}  // namespace gge
