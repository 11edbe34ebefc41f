#pragma once

#include <Eigen/Core>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace gge {

using cplx = std::complex<double>;
using VecD = Eigen::VectorXd;
using VecZ = Eigen::VectorXcd;
using MatD = Eigen::MatrixXd;
using MatZ = Eigen::MatrixXcd;

constexpr double kPi = 3.14159265358979323846;

// ---------------------------------------------------------------- errors

enum class ErrorCode {
  DomainError,
  ConvergenceError,
  UnsupportedPotential,
  NotFactorizable,
  NonNormalizable,
  MixingWarning,
  InsufficientESS,
  GridTooLarge,
  GapCollapse,
  DerivativeUnstable,
  IncompatibleSeeds,
  UnboundedWeight,
  QuadratureFailure,
  NoDecayDetected,
  ZeroVariance,
  IndexError,
};

inline const char* error_name(ErrorCode c) {
  switch (c) {
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::ConvergenceError: return "ConvergenceError";
    case ErrorCode::UnsupportedPotential: return "UnsupportedPotential";
    case ErrorCode::NotFactorizable: return "NotFactorizable";
    case ErrorCode::NonNormalizable: return "NonNormalizable";
    case ErrorCode::MixingWarning: return "MixingWarning";
    case ErrorCode::InsufficientESS: return "InsufficientESS";
    case ErrorCode::GridTooLarge: return "GridTooLarge";
    case ErrorCode::GapCollapse: return "GapCollapse";
    case ErrorCode::DerivativeUnstable: return "DerivativeUnstable";
    case ErrorCode::IncompatibleSeeds: return "IncompatibleSeeds";
    case ErrorCode::UnboundedWeight: return "UnboundedWeight";
    case ErrorCode::QuadratureFailure: return "QuadratureFailure";
    case ErrorCode::NoDecayDetected: return "NoDecayDetected";
    case ErrorCode::ZeroVariance: return "ZeroVariance";
    case ErrorCode::IndexError: return "IndexError";
  }
  return "UnknownError";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(error_name(code)) + ": " + what), code_(code) {}
  ErrorCode code() const { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode c, const std::string& msg) { throw Error(c, msg); }

inline void require(bool ok, ErrorCode c, const std::string& msg) {
  if (!ok) fail(c, msg);
}

// ---------------------------------------------------------------- formatting

// 17 significant digits: round-trips IEEE-754 doubles and is byte-stable.
inline std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------- threads

inline int default_threads() {
  if (const char* env = std::getenv("GGE_SPECTRA_THREADS")) {
    int n = std::atoi(env);
    if (n > 0) return n;
  }
  unsigned hc = std::thread::hardware_concurrency();
  return hc ? static_cast<int>(hc) : 1;
}

// Global worker count used by long loops; settable from the CLI.
int& thread_count();

// Simple blocked parallel map over [0, n).
void parallel_for(std::int64_t n, const std::function<void(std::int64_t)>& body);

}  // namespace gge
