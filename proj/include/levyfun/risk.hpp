#pragma once

// GMDB risk pipeline.  The net liability at death time T is
//   L = e^{-rT}(F0 e^{rT} - F_T)_+ - int_0^T e^{-rs} m_d F_s ds,
// and P(L > V) = E[P(I_{x,T} < K)] with x = 1/m_d, K = (F0-V)/(m_d F0) and
// the equity drift replaced by mu* = mu - r - m.  Averaging over the lifetime
// density via its exponential-sum fit turns the time integral into a weighted
// sum of Laplace transforms at the (complex) nodes s_i:
//   P(L > V)  ~ sum_i w_i (1/s_i) P(I_{x,s_i} < K)
//   CTE_p(L)  ~ F0 - m_d F0/(1-p) sum_i w_i (1/s_i) E[I_{x,s_i} 1{I < K}].
// Contracts with lambda = 0 route to the Whittaker closed forms.

#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "common.hpp"
#include "expfun.hpp"
#include "gbm.hpp"
#include "kou.hpp"
#include "mortality.hpp"

namespace levyfun::risk {

struct Contract {
  double F0 = 1.0;   // initial purchase payment
  double G0 = 1.0;   // guarantee base (rolls up at r in the L-form above)
  double r = 0.02;   // yield rate on backing assets
  double m = 0.01;   // total M&E fee rate
  double m_d = 0.0035;  // rider fee rate
  kou::KouParams equity;  // market parameters, before the drift adjustment

  void validate() const {
    const char* where = "risk.contract";
    if (!(F0 > 0.0)) throw domain_error(where, "F0 must be positive");
    if (!(G0 > 0.0)) throw domain_error(where, "G0 must be positive");
    if (!(m_d > 0.0)) throw domain_error(where, "m_d must be positive");
    if (!(m >= 0.0) || !(r >= 0.0)) throw domain_error(where, "r and m must be nonnegative");
    equity.validate();
  }

  double x() const { return 1.0 / m_d; }

  kou::KouParams adjusted() const {
    kou::KouParams k = equity;
    k.mu = equity.mu - r - m;
    return k;
  }
};

struct RiskReport {
  double level = 0.0;  // V for tail probabilities, p for VaR/CTE
  double value = 0.0;
  double imag_residual = 0.0;  // largest |Im| discarded when taking real parts
  int terms_used = 0;
};

inline double strike_from_loss(const Contract& c, double V) {
  if (!(V < c.F0))
    throw domain_error("risk.strike_from_loss", "V must be below F0 (K would not be positive)");
  return (c.F0 - V) / (c.m_d * c.F0);
}

// Holds the per-node query state so repeated evaluations (bisection!) reuse
// the root systems and contour plans.  Nodes are evaluated in index order and
// summed sequentially, which keeps results bit-stable.
class Inverter {
 public:
  Inverter(const Contract& c, const mortality::ExpSum& es) : contract_(c) {
    c.validate();
    if (es.terms.empty()) throw domain_error("risk.inverter", "exponential sum has no terms");
    const kou::KouParams adj = c.adjusted();
    sigma_ = adj.sigma;
    gbm_route_ = (adj.lambda == 0.0);
    const double x = c.x();
    for (std::size_t i = 0; i < es.terms.size(); ++i) {
      const auto& t = es.terms[i];
      s_.push_back(t.s);
      w_.push_back(t.w);
      try {
        if (gbm_route_)
          gq_.push_back(gbm::derive(t.s, adj.mu, adj.sigma));
        else
          kq_.push_back(ef::make_query(adj, t.s, x));
      } catch (const numerical_error& e) {
        throw numerical_error(e.where(), "node " + std::to_string(i) + ": " + e.what());
      }
    }
  }

  int terms() const { return static_cast<int>(s_.size()); }
  const Contract& contract() const { return contract_; }

  RiskReport tail_probability(double V) const {
    if (V >= contract_.F0) {
      // L <= F0 almost surely, so the tail beyond F0 is empty
      warn("risk.tail_probability: V >= F0, returning 0 (K would not be positive)");
      return {V, 0.0, 0.0, 0};
    }
    const double K = strike_from_loss(contract_, V);
    cplx sum = cdf_sum(K);
    return finish("risk.tail_probability", V, sum);
  }

  RiskReport value_at_risk(double p) const {
    const char* where = "risk.value_at_risk";
    if (!(p > 0.0 && p < 1.0)) throw domain_error(where, "p must lie in (0,1)");
    // Upper bracket end: keep the per-node left-branch argument 1/(A K)
    // inside the supported window (<= 45) — beyond V_top the tail is far
    // below any p the contract admits anyway.
    const double V_top =
        contract_.F0 * (1.0 - contract_.m_d * 2.0 / (45.0 * sigma_ * sigma_));
    double lo = 0.0, hi = V_top;
    double resid = 0.0;
    auto excess = [&](double V) {
      RiskReport rep = tail_probability(V);
      resid = std::max(resid, rep.imag_residual);
      return rep.value - (1.0 - p);
    };
    if (!(excess(lo) > 0.0))
      throw domain_error(where, "p does not exceed the probability of a nonpositive loss");
    if (!(excess(hi) < 0.0))
      throw domain_error(where, "no sign change on the bracket [0, V_top]");
    while (hi - lo >= 1e-7) {
      const double mid = 0.5 * (lo + hi);
      (excess(mid) > 0.0 ? lo : hi) = mid;
    }
    return {p, 0.5 * (lo + hi), resid, terms()};
  }

  RiskReport cte(double p, double var_p) const {
    const char* where = "risk.cte";
    if (!(p > 0.0 && p < 1.0)) throw domain_error(where, "p must lie in (0,1)");
    const double K = strike_from_loss(contract_, var_p);
    cplx sum = texp_sum(K);
    cplx val = contract_.F0 - contract_.m_d * contract_.F0 / (1.0 - p) * sum;
    return finish(where, p, val);
  }

  // sum_i w_i (1/s_i) P(I_{x,s_i} < K)
  cplx cdf_sum(double K) const {
    return node_sum(K, [&](std::size_t i, double y) {
      return gbm_route_ ? gbm::cdf_c(gq_[i], contract_.x(), y) : ef::cdf_c(kq_[i], y);
    });
  }

  // sum_i w_i (1/s_i) E[I_{x,s_i} 1{I < K}]
  cplx texp_sum(double K) const {
    return node_sum(K, [&](std::size_t i, double y) {
      return gbm_route_ ? gbm::tail_expectation_c(gq_[i], contract_.x(), y, Side::below)
                        : ef::tail_expectation_c(kq_[i], y, Side::below);
    });
  }

 private:
  template <class PerNode>
  cplx node_sum(double K, PerNode&& eval) const {
    cplx acc = 0.0;
    for (std::size_t i = 0; i < s_.size(); ++i) {
      try {
        acc += w_[i] / s_[i] * eval(i, K);
      } catch (const numerical_error& e) {
        throw numerical_error(e.where(), "node " + std::to_string(i) + ": " + e.what());
      }
    }
    return acc;
  }

  RiskReport finish(const char* where, double level, cplx sum) const {
    const double resid = std::fabs(sum.imag());
    if (!(resid <= 1e-8))
      throw cancellation_error(where, "imaginary residual above 1e-8; conjugate pairing broken");
    return {level, sum.real(), resid, terms()};
  }

  Contract contract_;
  double sigma_ = 0.0;
  bool gbm_route_ = false;
  std::vector<cplx> s_, w_;
  std::vector<ef::ExpFunctionalQuery> kq_;
  std::vector<gbm::GbmDerived> gq_;
};

inline RiskReport tail_probability(const Contract& c, const mortality::ExpSum& es, double V) {
  return Inverter(c, es).tail_probability(V);
}

inline RiskReport value_at_risk(const Contract& c, const mortality::ExpSum& es, double p) {
  return Inverter(c, es).value_at_risk(p);
}

inline RiskReport cte(const Contract& c, const mortality::ExpSum& es, double p, double var_p) {
  return Inverter(c, es).cte(p, var_p);
}

}  // namespace levyfun::risk
