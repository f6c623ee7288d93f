#include "slts/forward.hpp"

#include <cmath>
#include <numbers>
#include <sstream>

#include "slts/parallel.hpp"

namespace slts {

SpectralPoint SpectralPoint::from_lambda(Complex lambda) {
    Complex rho = std::sqrt(lambda);
    if (rho.imag() < 0.0 || (rho.imag() == 0.0 && rho.real() < 0.0)) rho = -rho;
    return {lambda, rho};
}

SpectralPoint SpectralPoint::from_rho(Complex rho) {
    if (rho.imag() < 0.0) rho = -rho;
    return {rho * rho, rho};
}

bool SpectralPoint::in_sector(double delta) const {
    if (rho == 0.0) return false;
    const double arg = std::arg(rho);
    return arg >= delta && arg <= std::numbers::pi - delta;
}

Eigen::Matrix2cd jump_matrix(double d, Complex qb, Complex lambda) {
    const Complex w = qb - lambda;
    Eigen::Matrix2cd m;
    m << 1.0, d, d * w, 1.0 + d * d * w;
    return m;
}

namespace {

void apply_transfer(const Eigen::Matrix2cd& m, SolutionState& s) {
    const Complex y = m(0, 0) * s.y + m(0, 1) * s.yp;
    const Complex yp = m(1, 0) * s.y + m(1, 1) * s.yp;
    s.y = y;
    s.yp = yp;
    s.normalize();
}

// Inverse of a unimodular 2x2 matrix.
Eigen::Matrix2cd unimodular_inverse(const Eigen::Matrix2cd& m) {
    Eigen::Matrix2cd inv;
    inv << m(1, 1), -m(0, 1), -m(1, 0), m(0, 0);
    return inv;
}

Eigen::Matrix2cd gap_jump(const TimeScale& ts, const Potential& q, std::size_t k, Complex lambda) {
    return jump_matrix(ts.gap(k), q.right_value(k), lambda);
}

void check_compatible(const TimeScale& ts, const Potential& q) {
    if (q.size() != ts.size())
        throw Error(Errc::kInvalidInput, "potential and time scale have different segment counts");
}

std::size_t locate(const TimeScale& ts, double x) {
    return ts.segment_of(ts.to_original(x));
}

}  // namespace

SolutionState propagate_segment(const Potential& q, std::size_t k, const SpectralPoint& sp,
                                SolutionState state, Direction dir, const ForwardOptions& opts) {
    if (k >= q.size()) throw Error(Errc::kDomain, "propagate_segment: segment index out of range");
    if (!std::isfinite(std::abs(state.y)) || !std::isfinite(std::abs(state.yp)))
        throw Error(Errc::kInvalidInput, "propagate_segment: non-finite state");
    const auto& seg = q.segment(k);
    return dir == Direction::kForward
               ? integrate(seg, sp.lambda, state, seg.lo(), seg.hi(), opts.integrator)
               : integrate(seg, sp.lambda, state, seg.hi(), seg.lo(), opts.integrator);
}

EndpointTrace solve_sc(const TimeScale& ts, const Potential& q, Complex lambda,
                       const ForwardOptions& opts) {
    check_compatible(ts, q);
    const auto sp = SpectralPoint::from_lambda(lambda);
    const std::size_t n = ts.size();
    EndpointTrace tr;
    for (auto* e : {&tr.S, &tr.C}) {
        e->at_a.resize(n);
        e->at_b.resize(n);
    }
    SolutionState s{0.0, 1.0, 0.0};
    SolutionState c{1.0, 0.0, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            const auto jm = gap_jump(ts, q, k - 1, lambda);
            apply_transfer(jm, s);
            apply_transfer(jm, c);
        }
        tr.S.at_a[k] = s;
        tr.C.at_a[k] = c;
        s = propagate_segment(q, k, sp, s, Direction::kForward, opts);
        c = propagate_segment(q, k, sp, c, Direction::kForward, opts);
        tr.S.at_b[k] = s;
        tr.C.at_b[k] = c;
    }
    tr.delta0 = s.value();
    tr.delta1 = c.value();
    return tr;
}

Complex char_delta(const TimeScale& ts, const Potential& q, Complex lambda, int j,
                   const ForwardOptions& opts) {
    if (j != 0 && j != 1) throw Error(Errc::kDomain, "char_delta: j must be 0 or 1");
    check_compatible(ts, q);
    const auto sp = SpectralPoint::from_lambda(lambda);
    SolutionState y = j == 0 ? SolutionState{0.0, 1.0, 0.0} : SolutionState{1.0, 0.0, 0.0};
    for (std::size_t k = 0; k < ts.size(); ++k) {
        if (k > 0) apply_transfer(gap_jump(ts, q, k - 1, lambda), y);
        y = propagate_segment(q, k, sp, y, Direction::kForward, opts);
    }
    return y.value();
}

PhiTrace solve_phi(const TimeScale& ts, const Potential& q, Complex lambda, const ForwardOptions& opts) {
    check_compatible(ts, q);
    const auto sp = SpectralPoint::from_lambda(lambda);
    const std::size_t n = ts.size();
    EndpointStates psi;
    psi.at_a.resize(n);
    psi.at_b.resize(n);
    SolutionState y{0.0, 1.0, 0.0};
    for (std::size_t k = n; k-- > 0;) {
        psi.at_b[k] = y;
        y = propagate_segment(q, k, sp, y, Direction::kBackward, opts);
        psi.at_a[k] = y;
        if (k > 0) apply_transfer(unimodular_inverse(gap_jump(ts, q, k - 1, lambda)), y);
    }
    // W(C, psi) = psi'(a_1) = Delta_1 and W(S, psi) = -psi(a_1) = Delta_0.
    const SolutionState& a1 = psi.at_a[0];
    const double floor = std::exp(-a1.log_scale);
    if (std::abs(a1.yp) < opts.pole_threshold * std::max(floor, std::abs(a1.y))) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is an eigenvalue of L1 (Weyl function pole)";
        throw Error(Errc::kPole, os.str());
    }
    PhiTrace tr;
    tr.M = a1.y / a1.yp;
    const Complex denom = a1.yp;
    const double shift = a1.log_scale;
    auto rescale = [&](SolutionState s) {
        s.y /= denom;
        s.yp /= denom;
        s.log_scale -= shift;
        return s;
    };
    tr.phi.at_a.resize(n);
    tr.phi.at_b.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        tr.phi.at_a[k] = rescale(psi.at_a[k]);
        tr.phi.at_b[k] = rescale(psi.at_b[k]);
    }
    return tr;
}

Complex weyl(const TimeScale& ts, const Potential& q, Complex lambda, const ForwardOptions& opts) {
    return solve_phi(ts, q, lambda, opts).M;
}

SolutionState shoot_forward_to(const TimeScale& ts, const Potential& q, Complex lambda,
                               SolutionState y, double x, const ForwardOptions& opts) {
    check_compatible(ts, q);
    const std::size_t target = locate(ts, x);
    for (std::size_t k = 0; k <= target; ++k) {
        if (k > 0) apply_transfer(gap_jump(ts, q, k - 1, lambda), y);
        const double stop = k == target ? x : ts.segment(k).b;
        y = integrate(q.segment(k), lambda, y, ts.segment(k).a, stop, opts.integrator);
    }
    return y;
}

SolutionState shoot_backward_to(const TimeScale& ts, const Potential& q, Complex lambda,
                                SolutionState y, double x, const ForwardOptions& opts) {
    check_compatible(ts, q);
    const std::size_t target = locate(ts, x);
    for (std::size_t k = ts.size(); k-- > target;) {
        if (k + 1 < ts.size()) apply_transfer(unimodular_inverse(gap_jump(ts, q, k, lambda)), y);
        const double stop = k == target ? x : ts.segment(k).a;
        y = integrate(q.segment(k), lambda, y, ts.segment(k).b, stop, opts.integrator);
    }
    return y;
}

SolutionState c_at(const TimeScale& ts, const Potential& q, Complex lambda, double x,
                   const ForwardOptions& opts) {
    return shoot_forward_to(ts, q, lambda, {1.0, 0.0, 0.0}, x, opts);
}

SolutionState phi_at(const TimeScale& ts, const Potential& q, Complex lambda, double x,
                     const ForwardOptions& opts) {
    const auto tr = solve_phi(ts, q, lambda, opts);
    auto y = shoot_backward_to(ts, q, lambda, tr.phi.at_b.back(), x, opts);
    return y;
}

std::vector<WeylSample> weyl_sweep(const TimeScale& ts, const Potential& q,
                                   const std::vector<Complex>& grid, const ForwardOptions& opts,
                                   unsigned threads) {
    std::vector<WeylSample> out(grid.size());
    parallel_for(grid.size(), threads, [&](std::size_t i) {
        out[i].lambda = grid[i];
        try {
            out[i].M = weyl(ts, q, grid[i], opts);
        } catch (const Error& e) {
            out[i].note = e.code() == Errc::kPole ? "pole" : e.what();
        }
    });
    return out;
}

}  // namespace slts
