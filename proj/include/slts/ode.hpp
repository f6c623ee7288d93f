#pragma once

#include "slts/potential.hpp"

namespace slts {

/// (y, y') at a point, with a real log-magnitude factored out:
/// true value = (y, yp) * exp(log_scale).
struct SolutionState {
    Complex y = 0.0;
    Complex yp = 0.0;
    double log_scale = 0.0;

    Complex value() const { return y * std::exp(log_scale); }
    Complex derivative() const { return yp * std::exp(log_scale); }
    /// Rescales so max(|y|, |yp|) = 1 (no-op for the zero state).
    void normalize();
};

/// W(u, v) = u v' - u' v, reconstructed from both scales.
Complex wronskian(const SolutionState& u, const SolutionState& v);

struct IntegratorOptions {
    double rtol = 1e-14;
    std::size_t max_steps = 1'000'000;
};

/// Integrates -y'' + q(x) y = lambda y from x_from to x_to (either direction)
/// with an adaptive 8th-order Dormand-Prince scheme. The step is bounded by
/// 0.5 / (1 + |rho|) so oscillations stay resolved for every lambda.
SolutionState integrate(const ChebSeries& q, Complex lambda, SolutionState state, double x_from,
                        double x_to, const IntegratorOptions& opts = {});

}  // namespace slts
