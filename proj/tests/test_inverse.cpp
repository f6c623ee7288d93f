#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "slts/inverse.hpp"

using namespace slts;

namespace {

constexpr double kPi = std::numbers::pi;

TimeScale two() { return TimeScale({{0, 1}, {2, 3}}); }

Potential sample_q(const TimeScale& ts) { return Potential(ts, {{0.4, -0.7, 0.2}, {-0.5, 0.3, 0.6}}); }

WeylData synth(const TimeScale& ts, const Potential& q, const std::vector<Complex>& grid) {
    return WeylData::from_samples(weyl_sweep(ts, q, grid));
}

std::vector<Complex> neg_grid(double lo, double hi, int n) {
    std::vector<Complex> g;
    for (int i = 0; i < n; ++i) g.emplace_back(-std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * i / (n - 1)), 0.0);
    return g;
}

double sup_diff(const TimeScale& ts, const Potential& a, const Potential& b) {
    double e = 0;
    for (std::size_t k = 0; k < ts.size(); ++k)
        for (int i = 0; i <= 100; ++i) {
            double x = ts.segment(k).a + ts.segment(k).length() * i / 100.0;
            e = std::max(e, std::abs(a(k, x) - b(k, x)));
        }
    return e;
}

}  // namespace

TEST_CASE("Weyl data validation") {
    WeylData d;
    d.lambda = {-1.0, -1.0};
    d.M = {1.0, 2.0};
    CHECK_THROWS_AS(d.check(), Error);
    d.lambda = {-1.0};
    CHECK_THROWS_AS(d.check(), Error);
}

TEST_CASE("truncated scale and potential") {
    auto ts = two();
    auto tm = truncate(ts, 1);
    CHECK(tm.size() == 1);
    CHECK(tm.segment(0).a == 0.0);
    CHECK(tm.end() == 1.0);
    auto q = sample_q(ts);
    auto qm = truncate(q, tm, 1);
    CHECK(std::abs(qm(0, 0.25) - q(1, 2.25)) < 1e-15);
}

TEST_CASE("peeling at lambda = 0 follows the straight line") {
    auto ts = two();
    auto z = Potential::zero(ts);
    WeylData d;
    d.lambda = {0.0};
    d.M = {-3.0};
    auto same = peel_weyl(ts, z, 0, d);
    CHECK(same.data.M[0] == Complex(-3.0));
    auto p = peel_weyl(ts, z, 1, d);
    REQUIRE(p.data.size() == 1);
    CHECK(std::abs(p.data.M[0] - Complex(-1.0)) < 1e-13);
}

TEST_CASE("peel/forward duality") {
    auto ts = two();
    auto z = Potential::zero(ts);
    auto peeled = peel_weyl(ts, z, 1, synth(ts, z, {-1.0}));
    auto tm = truncate(ts, 1);
    CHECK(std::abs(peeled.data.M[0] - weyl(tm, truncate(z, tm, 1), -1.0)) < 1e-12);

    TimeScale t3({{0, 1}, {1.4, 2.2}, {3.0, 4.1}});
    Potential q(t3, {{0.3, 0.2}, {-0.6, 0.1, 0.4}, {0.8}});
    std::vector<Complex> grid{-2.0, -7.5, Complex(3, 1), Complex(-20, 4)};
    auto data = synth(t3, q, grid);
    for (std::size_t m = 1; m < 3; ++m) {
        auto p = peel_weyl(t3, q, m, data);
        auto tm = truncate(t3, m);
        auto qm = truncate(q, tm, m);
        for (std::size_t i = 0; i < p.data.size(); ++i) {
            auto direct = weyl(tm, qm, p.data.lambda[i]);
            CHECK(std::abs(p.data.M[i] - direct) < 1e-9 * std::abs(direct) * std::max(1.0, p.condition[i]));
        }
    }
}

TEST_CASE("segment recovery from zero-potential data") {
    TimeScale ts({{0, 1}});
    auto z = Potential::zero(ts, 2);
    auto data = synth(ts, z, neg_grid(1, 60, 30));
    InverseOptions o;
    auto fit = recover_segment(ts, z, data, o);
    for (double c : fit.coeffs) CHECK(std::abs(c) < 1e-6);
    CHECK(fit.converged);
}

TEST_CASE("segment recovery of x(1 - x)") {
    TimeScale ts({{0, 1}});
    // x(1 - x) = 1/8 - T_2(2x - 1) / 8
    Potential q(ts, {{0.125, 0.0, -0.125}});
    auto data = synth(ts, q, neg_grid(1, 60, 30));
    InverseOptions o;
    o.degree = 4;
    auto fit = recover_segment(ts, Potential::zero(ts, 4), data, o);
    std::vector<Complex> c(fit.coeffs.begin(), fit.coeffs.end());
    Potential qh(ts, {c});
    CHECK(sup_diff(ts, q, qh) < 1e-3);
}

TEST_CASE("noisy data degrades without failing") {
    TimeScale ts({{0, 1}});
    Potential q(ts, {{0.125, 0.0, -0.125}});
    auto data = synth(ts, q, neg_grid(1, 60, 30));
    std::mt19937_64 rng(3);
    std::normal_distribution<double> n(0, 0.01);
    for (auto& m : data.M) m *= 1.0 + n(rng);
    data.noise = 0.01;
    auto res = solve_inverse_weyl(ts, data);
    CHECK(std::isfinite(res.misfit));
    CHECK(std::isfinite(sup_diff(ts, q, res.q)));
    CHECK(res.misfit_threshold == doctest::Approx(0.03));
}

TEST_CASE("finite differences agree with central differences") {
    auto ts = two();
    auto q = sample_q(ts);
    InverseOptions o;
    auto data = synth(ts, q, neg_grid(1, 60, 20));
    WeylObjective obj(ts, Potential::zero(ts, 2), {0, 1}, data, o);
    std::mt19937_64 rng(21);
    std::uniform_real_distribution<double> u(-1, 1);
    for (int t = 0; t < 3; ++t) {
        Eigen::VectorXd c(obj.parameters());
        for (auto& v : c) v = u(rng);
        auto fd = obj.jacobian(c, 1e-6);
        auto cd = obj.jacobian(c, 5e-7, true);
        CHECK((fd - cd).norm() <= 1e-4 * cd.norm());
    }
}

TEST_CASE("reported misfit matches an independent re-evaluation") {
    auto ts = two();
    auto q = sample_q(ts);
    auto data = synth(ts, q, neg_grid(1, 60, 30));
    auto res = solve_inverse_weyl(ts, data);
    CHECK(res.converged);
    CHECK(std::abs(res.misfit - res.misfit_reevaluated) <= 1e-12 * std::max(res.misfit_reevaluated, 1e-300) +
                                                            1e-15);
    CHECK(std::abs(res.misfit_reevaluated - weyl_misfit(ts, res.q, data)) <= 1e-12 * res.misfit_reevaluated + 1e-15);
    CHECK(sup_diff(ts, q, res.q) < 1e-3);
}

TEST_CASE("zero data gives a zero potential") {
    auto ts = two();
    auto res = solve_inverse_weyl(ts, synth(ts, Potential::zero(ts), neg_grid(1, 60, 30)));
    CHECK(sup_diff(ts, Potential::zero(ts), res.q) < 1e-6);
    CHECK(res.ok());
}

TEST_CASE("data from a shifted scale is flagged") {
    TimeScale truth({{0, 1}, {2.4, 3.4}});
    auto data = synth(truth, Potential::zero(truth), neg_grid(1, 60, 30));
    auto res = solve_inverse_weyl(two(), data);
    CHECK(res.misfit_flag);
    CHECK_FALSE(res.ok());
}

TEST_CASE("too few samples") {
    auto ts = two();
    auto data = synth(ts, Potential::zero(ts), neg_grid(1, 60, 4));
    CHECK_THROWS_AS(solve_inverse_weyl(ts, data), Error);
}

TEST_CASE("two spectra of the free string on [0, pi]") {
    TimeScale ts({{0, kPi}});
    SpectrumList s0, s1;
    s0.j = 0;
    s1.j = 1;
    for (int n = 1; n <= 100; ++n) {
        Eigenvalue e{};
        e.lambda = e.bracket_lo = e.bracket_hi = double(n) * n;
        s0.eigenvalues.push_back(e);
        e.lambda = e.bracket_lo = e.bracket_hi = (n - 0.5) * (n - 0.5);
        s1.eigenvalues.push_back(e);
    }
    TwoSpectraOptions o;
    o.K = 100;
    auto res = solve_inverse_two_spectra(ts, s0, s1, o);
    CHECK(sup_diff(ts, Potential::zero(ts), res.q) < 5e-3);
    REQUIRE(res.truncation_error);
    CHECK(*res.truncation_error < 1e-3);
}

TEST_CASE("match residual diagnostics") {
    auto ts = two();
    auto q = sample_q(ts);
    std::vector<Complex> lams{-4.0, Complex(3, 2), std::pow(std::polar(40.0, kPi / 4), 2)};
    for (auto& m : match_residual(ts, q, q, 0.5, lams)) {
        CHECK(std::abs(m.P1 - 1.0) < 1e-9);
        CHECK(std::abs(m.P2) < 1e-9);
    }

    Potential same_first(ts, {{0.4, -0.7, 0.2}, {0.9, -0.2}});
    auto rho = std::polar(40.0, kPi / 4);
    auto r = match_residual(ts, q, same_first, 0.5, {rho * rho});
    REQUIRE(r.size() == 1);
    CHECK(std::abs(r[0].P2) < 10.0 / std::norm(rho));

    // Different q on the first segment: the 1/rho terms cancel in P1, but rho^2 (P1 - 1) stays away from 0.
    Potential other(ts, {{0.9, -0.7, 0.2}, {-0.5, 0.3, 0.6}});
    std::vector<Complex> ray;
    for (double s : {10.0, 40.0, 80.0}) ray.push_back(std::pow(std::polar(s, kPi / 4), 2));
    auto d = match_residual(ts, q, other, 0.5, ray);
    REQUIRE(d.size() == 3);
    for (auto& x : d) CHECK(std::abs((x.P1 - 1.0) * x.lambda) > 0.05);
    CHECK_THROWS_AS(match_residual(ts, q, q, 1.5, lams), Error);
}
