#pragma once

#include <cmath>
#include <string>

#include "netinf/error.hpp"
#include "netinf/graph.hpp"
#include "netinf/rng.hpp"

namespace netinf {

enum class Family { exponential, rayleigh, power_law };

// Pairwise transmission family shared by every edge. All three families are
// linear in the rate: y(tau; a) = a * y'(tau) and H(tau; a) = a * H'(tau), so
// the second rate-derivatives vanish.
struct TransmissionModel {
  Family kind = Family::exponential;
  double delta = 1.0;  // power-law cutoff

  static TransmissionModel exponential() { return {Family::exponential, 1.0}; }
  static TransmissionModel rayleigh() { return {Family::rayleigh, 1.0}; }
  static TransmissionModel power_law(double delta = 1.0) {
    require(delta > 0.0 && std::isfinite(delta), ErrorKind::invalid_parameter, "power-law cutoff must be positive");
    return {Family::power_law, delta};
  }

  // CLI tokens: exp, ray, pow:<delta>
  static TransmissionModel parse(const std::string& token) {
    if (token == "exp") return exponential();
    if (token == "ray") return rayleigh();
    if (token.rfind("pow:", 0) == 0) return power_law(parse_real(token.substr(4), "model token"));
    if (token == "pow") return power_law(1.0);
    fail(ErrorKind::invalid_parameter, "unknown transmission model '" + token + "'");
  }

  std::string token() const {
    switch (kind) {
      case Family::exponential: return "exp";
      case Family::rayleigh: return "ray";
      case Family::power_law: return "pow:" + format_real(delta);
    }
    return "?";
  }
};

namespace detail {

inline double elapsed(double t_i, double t_k) {
  require(t_i > t_k, ErrorKind::ordering, "transmission requires t_i > t_k");
  return t_i - t_k;
}

inline void check_rate(double alpha) {
  require(alpha >= 0.0 && std::isfinite(alpha), ErrorKind::domain, "rate must be finite and nonnegative");
}

}  // namespace detail

// Elapsed-time forms; tau > 0 is the caller's responsibility.

inline double d_log_survival_elapsed(const TransmissionModel& m, double tau) {
  switch (m.kind) {
    case Family::exponential: return -tau;
    case Family::rayleigh: return -0.5 * tau * tau;
    case Family::power_law: return tau > m.delta ? -std::log(tau / m.delta) : 0.0;
  }
  return 0.0;
}

inline double d_hazard_elapsed(const TransmissionModel& m, double tau) {
  switch (m.kind) {
    case Family::exponential: return 1.0;
    case Family::rayleigh: return tau;
    case Family::power_law: return tau > m.delta ? 1.0 / tau : 0.0;
  }
  return 0.0;
}

inline double log_survival_elapsed(const TransmissionModel& m, double tau, double alpha) {
  return alpha * d_log_survival_elapsed(m, tau);
}

inline double hazard_elapsed(const TransmissionModel& m, double tau, double alpha) {
  return alpha * d_hazard_elapsed(m, tau);
}

/// y(t_i | t_k; alpha) = log S, always <= 0.
inline double log_survival(const TransmissionModel& m, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  return log_survival_elapsed(m, detail::elapsed(t_i, t_k), alpha);
}

/// H(t_i | t_k; alpha) = f / S.
inline double hazard(const TransmissionModel& m, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  return hazard_elapsed(m, detail::elapsed(t_i, t_k), alpha);
}

/// dy/dalpha. Independent of alpha for the supported families.
inline double d_log_survival(const TransmissionModel& m, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  return d_log_survival_elapsed(m, detail::elapsed(t_i, t_k));
}

/// dH/dalpha.
inline double d_hazard(const TransmissionModel& m, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  return d_hazard_elapsed(m, detail::elapsed(t_i, t_k));
}

// Second rate-derivatives; identically zero for exp/ray/pow.
inline double d2_log_survival(const TransmissionModel&, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  detail::elapsed(t_i, t_k);
  return 0.0;
}

inline double d2_hazard(const TransmissionModel&, double t_i, double t_k, double alpha) {
  detail::check_rate(alpha);
  detail::elapsed(t_i, t_k);
  return 0.0;
}

/// Draws a delay from the family's density by inverting the survival function.
inline double sample_delay(const TransmissionModel& m, double alpha, Rng& rng) {
  require(alpha > 0.0 && std::isfinite(alpha), ErrorKind::invalid_parameter, "delay sampling needs a positive rate");
  const double u = uniform01_open(rng);  // plays the role of S(tau)
  switch (m.kind) {
    case Family::exponential: return -std::log(u) / alpha;
    case Family::rayleigh: return std::sqrt(-2.0 * std::log(u) / alpha);
    case Family::power_law: return m.delta * std::pow(u, -1.0 / alpha);
  }
  return 0.0;
}

}  // namespace netinf
