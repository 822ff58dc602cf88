#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>

namespace levyfun {

using cplx = std::complex<double>;

inline constexpr double pi = 3.14159265358979323846264338327950288;

// Which side of the truncation point E[I 1{I > y}] / E[I 1{I < y}] refers to.
enum class Side { above, below };

// ---------------------------------------------------------------------------
// Error taxonomy.  Every throwing site tags the module and operation so the
// CLI can report "module/op" with exit code 3.
// ---------------------------------------------------------------------------

class numerical_error : public std::runtime_error {
 public:
  numerical_error(std::string where, std::string what_arg)
      : std::runtime_error(where + ": " + what_arg), where_(std::move(where)) {}
  const std::string& where() const noexcept { return where_; }

 private:
  std::string where_;
};

// Argument outside the documented domain (pole of gamma, y <= 0, bad shape...).
class domain_error : public numerical_error {
  using numerical_error::numerical_error;
};

// Series/iteration failed to converge within its budget.
class convergence_error : public numerical_error {
  using numerical_error::numerical_error;
};

// Catastrophic cancellation detected beyond the escalation ladder.
class cancellation_error : public numerical_error {
  using numerical_error::numerical_error;
};

// Parameter configuration violating a representation assumption
// (integer-spaced exponents, coincident roots, ...).  Callers holding a knob
// (the rate q) may perturb and retry once.
class assumption_error : public numerical_error {
  using numerical_error::numerical_error;
};

// Structured input (config file, CLI value) violating the schema.
class schema_error : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// Warning hook.  Library code never writes to stderr directly; the default
// handler de-duplicates by message so inner loops cannot flood the console.
// ---------------------------------------------------------------------------

using warn_handler = std::function<void(const std::string&)>;

inline warn_handler& warn_sink() {
  static warn_handler h;  // empty => default behaviour below
  return h;
}

void default_warn(const std::string& msg);

inline void warn(const std::string& msg) {
  if (warn_sink())
    warn_sink()(msg);
  else
    default_warn(msg);
}

// ---------------------------------------------------------------------------
// Small numeric helpers shared by every module.
// ---------------------------------------------------------------------------

inline bool near_nonpositive_integer(cplx z, double tol = 1e-12) {
  if (std::abs(z.imag()) > tol) return false;
  double r = std::round(z.real());
  return r <= 0.0 && std::abs(z.real() - r) <= tol;
}

// Distance from z to the nearest integer (complex: includes the Im part).
inline double integer_distance(cplx z) {
  double r = std::round(z.real());
  return std::hypot(z.real() - r, z.imag());
}

// Extract the real part of a quantity that is real by symmetry, asserting the
// imaginary contamination stays below 1e-10 * (1 + |value|).
inline double to_real(cplx z, const char* where) {
  if (!(std::abs(z.imag()) <= 1e-10 * (1.0 + std::abs(z)))) {
    throw cancellation_error(where,
        "imaginary residual " + std::to_string(std::abs(z.imag())) +
        " exceeds tolerance for a real-by-symmetry quantity");
  }
  return z.real();
}

inline bool finite(cplx z) {
  return std::isfinite(z.real()) && std::isfinite(z.imag());
}

}  // namespace levyfun

// Out-of-line so the de-dup set lives in one TU-local static per binary.
#include <mutex>
#include <set>
#include <cstdio>

namespace levyfun {

inline void default_warn(const std::string& msg) {
  static std::mutex mu;
  static std::set<std::string> seen;
  std::lock_guard<std::mutex> lock(mu);
  if (seen.insert(msg).second) std::fprintf(stderr, "warning: %s\n", msg.c_str());
}

}  // namespace levyfun
