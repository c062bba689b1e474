#pragma once

#include <cmath>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace latticeq {

/// Symmetric Gauss-Kronrod rule on [-1, 1] with the embedded Gauss weights (zero on Kronrod-only nodes).
struct GaussKronrodRule {
  std::vector<double> nodes;
  std::vector<double> kronrod_weights;
  std::vector<double> gauss_weights;

  template <unsigned N>
  static GaussKronrodRule make() {
    using gk = boost::math::quadrature::gauss_kronrod<double, N>;
    using g = boost::math::quadrature::gauss<double, (N - 1) / 2>;
    const auto& xs = gk::abscissa();
    const auto& wk = gk::weights();
    const auto& xg = g::abscissa();
    const auto& wg = g::weights();
    auto gauss_weight = [&](double x) {
      for (std::size_t i = 0; i < xg.size(); ++i)
        if (std::abs(xg[i] - x) < 1e-14) return wg[i];
      return 0.0;
    };
    GaussKronrodRule r;
    for (std::size_t i = xs.size(); i-- > 0;) {
      if (xs[i] == 0.0) continue;
      r.nodes.push_back(-xs[i]);
      r.kronrod_weights.push_back(wk[i]);
      r.gauss_weights.push_back(gauss_weight(xs[i]));
    }
    for (std::size_t i = 0; i < xs.size(); ++i) {
      r.nodes.push_back(xs[i]);
      r.kronrod_weights.push_back(wk[i]);
      r.gauss_weights.push_back(gauss_weight(xs[i]));
    }
    return r;
  }

  std::size_t size() const { return nodes.size(); }
};

inline const GaussKronrodRule& gk31() {
  static const GaussKronrodRule rule = GaussKronrodRule::make<31>();
  return rule;
}

inline const GaussKronrodRule& gk21() {
  static const GaussKronrodRule rule = GaussKronrodRule::make<21>();
  return rule;
}

}  // namespace latticeq
