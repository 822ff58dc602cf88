#pragma once

// Monte Carlo baseline for the GMDB net liability: draw a Gompertz-Makeham
// death time, simulate the Kou log-equity path on a fixed grid, and set the
// discounted guarantee shortfall against the accumulated rider fees.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "common.hpp"
#include "kou.hpp"
#include "mortality.hpp"
#include "risk.hpp"
#include "rng.hpp"

namespace levyfun::mc {

struct SimConfig {
  long long paths = 100000;      // N per experiment
  double step = 0.01;            // grid spacing in years
  int experiments = 20;
  uint64_t seed = 1;
  double max_age_horizon = 0.0;  // 0 = smallest power of two with survival < 1e-12

  void validate() const {
    const char* where = "mc.config";
    if (!(step > 0.0)) throw domain_error(where, "step must be positive");
    if (paths < 1) throw domain_error(where, "need at least one path");
    if (experiments < 1) throw domain_error(where, "need at least one experiment");
  }
};

// Acceptance-rejection sampler for the remaining-lifetime density f = hazard
// times survival.  Envelope: piecewise constant on 64 equal panels of
// [0, horizon] at 1.05x the exact panel maximum.  With y = c^t the critical
// points of f solve the quadratic b^2 y^2 + (2Ab - b ln c) y + A^2 = 0 where
// b = B c^age, so panel maxima need only endpoint and root evaluations.
class LifetimeSampler {
 public:
  explicit LifetimeSampler(const mortality::GompertzMakeham& gm, double horizon = 0.0)
      : gm_(gm) {
    gm.validate();
    horizon_ = horizon > 0.0 ? horizon : default_horizon(gm);
    width_ = horizon_ / kPanels;

    std::vector<double> crit;
    const double lnc = std::log(gm.c);
    const double b = gm.B * std::pow(gm.c, gm.age);
    const double disc = lnc * (lnc - 4.0 * gm.A);
    if (disc >= 0.0) {
      const double s = std::sqrt(disc);
      for (double y : {lnc - 2.0 * gm.A + s, lnc - 2.0 * gm.A - s}) {
        if (y > 0.0) {
          const double t = std::log(y / (2.0 * b)) / lnc;
          if (t > 0.0 && t < horizon_) crit.push_back(t);
        }
      }
    }

    env_.resize(kPanels);
    cum_.assign(kPanels + 1, 0.0);
    for (int i = 0; i < kPanels; ++i) {
      const double a = i * width_;
      double m = std::max(mortality::density(gm, a), mortality::density(gm, a + width_));
      for (double t : crit)
        if (t > a && t < a + width_) m = std::max(m, mortality::density(gm, t));
      env_[i] = 1.05 * m;
      cum_[i + 1] = cum_[i] + env_[i] * width_;
    }
  }

  double horizon() const { return horizon_; }

  double draw(Stream& rng) const {
    for (;;) {
      // One uniform picks the panel and the offset inside it: the envelope is
      // flat per panel, so position = mass offset / height.
      const double u = rng.next_unit() * cum_.back();
      int i = int(std::upper_bound(cum_.begin() + 1, cum_.end(), u) - cum_.begin()) - 1;
      i = std::min(i, kPanels - 1);
      const double t = i * width_ + (u - cum_[i]) / env_[i];
      if (rng.next_unit() * env_[i] <= mortality::density(gm_, t)) return t;
    }
  }

 private:
  static constexpr int kPanels = 64;

  static double default_horizon(const mortality::GompertzMakeham& gm) {
    double h = 1.0;
    while (mortality::survival(gm, h) >= 1e-12) {
      h *= 2.0;
      if (h > 1e7)
        throw convergence_error("mc.sample_lifetime", "survival never drops below 1e-12");
    }
    return h;
  }

  mortality::GompertzMakeham gm_;
  double horizon_ = 0.0;
  double width_ = 0.0;
  std::vector<double> env_;
  std::vector<double> cum_;
};

inline double sample_lifetime(const mortality::GompertzMakeham& gm, Stream& rng) {
  return LifetimeSampler(gm).draw(rng);
}

// Net liability of one policyholder dying at time t, on the grid
// {0, step, 2 step, ...} with the GMDB payable at the end of the death step
// t+ = step * ceil(t/step):
//
//   L = e^{-r t+} (F0 e^{r t+} - F_{t+})_+  -  sum_{s < t+} e^{-r s} m_d F_s step.
//
// Both e^{-r s} F_s / F0 factors collapse to e^{X*_s} where X* carries the
// drift mu - r - m, so only one exponential per step is needed.  Jumps are
// aggregated per step: a Poisson count at intensity lambda*step, each mark
// double-exponential (Exp(rho) up with probability p, Exp(rho_hat) down).
inline double net_liability_path(const risk::Contract& c, double t, Stream& rng,
                                 double step = 0.01) {
  const char* where = "mc.net_liability_path";
  if (!(t > 0.0)) throw domain_error(where, "death time must be positive");
  if (!(step > 0.0)) throw domain_error(where, "step must be positive");
  const kou::KouParams& k = c.equity;

  const long long nsteps = (long long)std::ceil(t / step);
  const double drift = (k.mu - c.r - c.m) * step;
  const double vol = k.sigma * std::sqrt(step);
  const bool jumps = k.lambda > 0.0;
  // Knuth product threshold for the per-step Poisson count.
  const double jump_limit = jumps ? std::exp(-k.lambda * step) : 0.0;

  double xs = 0.0;    // X* at the current grid point
  double fees = 1.0;  // sum of e^{X*} over left endpoints (s = 0 included)
  for (long long i = 1; i <= nsteps; ++i) {
    double dx = drift + vol * rng.next_normal();
    double prod = jumps ? rng.next_unit() : 0.0;
    while (prod > jump_limit) {
      dx += rng.next_unit() < k.p ? rng.next_exponential() / k.rho
                                  : -rng.next_exponential() / k.rho_hat;
      prod *= rng.next_unit();
    }
    xs += dx;
    if (i < nsteps) fees += std::exp(xs);
  }
  const double shortfall = std::max(0.0, 1.0 - std::exp(xs));
  return c.F0 * (shortfall - c.m_d * step * fees);
}

struct TailEstimate {
  double V = 0.0;
  double mean = 0.0;  // across experiments
  double std = 0.0;   // sample standard deviation across experiments
};

// Tail probabilities P(L > V) for each requested level: per experiment the
// fraction of N paths whose liability exceeds V, then mean and sample std
// across experiments.  Streams are assigned by (experiment, path) index, so
// estimates are bit-reproducible for a given seed regardless of order.
inline std::vector<TailEstimate> estimate_tail_prob(const risk::Contract& c,
                                                    const mortality::GompertzMakeham& gm,
                                                    const std::vector<double>& levels,
                                                    const SimConfig& cfg) {
  c.validate();
  cfg.validate();
  if (levels.empty()) throw domain_error("mc.estimate_tail_prob", "no levels requested");
  const LifetimeSampler sampler(gm, cfg.max_age_horizon);

  std::vector<std::vector<double>> fractions(levels.size());
  for (auto& f : fractions) f.reserve(cfg.experiments);
  for (int e = 0; e < cfg.experiments; ++e) {
    std::vector<long long> hits(levels.size(), 0);
    for (long long i = 0; i < cfg.paths; ++i) {
      Stream rng = make_stream(cfg.seed, (uint64_t)e, (uint64_t)i);
      const double t = sampler.draw(rng);
      const double loss = net_liability_path(c, t, rng, cfg.step);
      for (size_t v = 0; v < levels.size(); ++v)
        if (loss > levels[v]) ++hits[v];
    }
    for (size_t v = 0; v < levels.size(); ++v)
      fractions[v].push_back(double(hits[v]) / double(cfg.paths));
  }

  std::vector<TailEstimate> out(levels.size());
  for (size_t v = 0; v < levels.size(); ++v) {
    TailEstimate& te = out[v];
    te.V = levels[v];
    for (double f : fractions[v]) te.mean += f;
    te.mean /= cfg.experiments;
    if (cfg.experiments > 1) {
      double ss = 0.0;
      for (double f : fractions[v]) ss += (f - te.mean) * (f - te.mean);
      te.std = std::sqrt(ss / (cfg.experiments - 1));
    }
    out[v] = te;
  }
  return out;
}

}  // namespace levyfun::mc
