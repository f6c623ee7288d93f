#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "slts/ode.hpp"

namespace slts {

/// lambda = rho^2 with Im rho >= 0.
struct SpectralPoint {
    Complex lambda;
    Complex rho;

    static SpectralPoint from_lambda(Complex lambda);
    static SpectralPoint from_rho(Complex rho);
    /// arg rho in [delta, pi - delta].
    bool in_sector(double delta) const;
};

struct ForwardOptions {
    IntegratorOptions integrator;
    /// |Delta_1| < pole_threshold * max(1, |Delta_0|) declares a Weyl pole.
    double pole_threshold = 1e-12;
};

/// Gap transfer for (y, y'): [[1, d], [d (q_b - lambda), 1 + d^2 (q_b - lambda)]].
Eigen::Matrix2cd jump_matrix(double d, Complex qb, Complex lambda);

enum class Direction { kForward, kBackward };

/// Carries `state` from one end of segment k to the other.
SolutionState propagate_segment(const Potential& q, std::size_t k, const SpectralPoint& sp,
                                SolutionState state, Direction dir, const ForwardOptions& opts = {});

/// Values of a solution at every segment endpoint.
struct EndpointStates {
    std::vector<SolutionState> at_a;
    std::vector<SolutionState> at_b;
};

struct EndpointTrace {
    EndpointStates S;
    EndpointStates C;
    Complex delta0;
    Complex delta1;
};

/// Shoots S and C from a_1 across all segments and gaps.
EndpointTrace solve_sc(const TimeScale& ts, const Potential& q, Complex lambda,
                       const ForwardOptions& opts = {});

/// Delta_j(lambda), j = 0 (S(b_N)) or 1 (C(b_N)).
Complex char_delta(const TimeScale& ts, const Potential& q, Complex lambda, int j,
                   const ForwardOptions& opts = {});

struct PhiTrace {
    EndpointStates phi;
    Complex M;
};

/// Weyl solution by backward shooting from (0, 1) at b_N, rescaled so that
/// Phi'(a_1) = 1. Throws Errc::kPole when lambda is an L_1 eigenvalue.
PhiTrace solve_phi(const TimeScale& ts, const Potential& q, Complex lambda,
                   const ForwardOptions& opts = {});

Complex weyl(const TimeScale& ts, const Potential& q, Complex lambda, const ForwardOptions& opts = {});

/// Forward-propagated solution with the given state at a_1, evaluated at a
/// normalized point x in T.
SolutionState shoot_forward_to(const TimeScale& ts, const Potential& q, Complex lambda,
                               SolutionState at_a1, double x, const ForwardOptions& opts = {});
/// Backward-propagated solution with the given state at b_N, evaluated at x.
SolutionState shoot_backward_to(const TimeScale& ts, const Potential& q, Complex lambda,
                                SolutionState at_bN, double x, const ForwardOptions& opts = {});

/// C(x, lambda) and Phi(x, lambda) at a normalized point x in T.
SolutionState c_at(const TimeScale& ts, const Potential& q, Complex lambda, double x,
                   const ForwardOptions& opts = {});
SolutionState phi_at(const TimeScale& ts, const Potential& q, Complex lambda, double x,
                     const ForwardOptions& opts = {});

struct WeylSample {
    Complex lambda;
    std::optional<Complex> M;  // empty when skipped
    std::string note;
};

/// M(lambda) on a grid; poles and numeric failures are flagged per point.
std::vector<WeylSample> weyl_sweep(const TimeScale& ts, const Potential& q,
                                   const std::vector<Complex>& grid, const ForwardOptions& opts = {},
                                   unsigned threads = 1);

}  // namespace slts
