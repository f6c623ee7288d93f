#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "slts/forward.hpp"

using namespace slts;

namespace {

constexpr double kPi = std::numbers::pi;

TimeScale two() { return TimeScale({{0, 1}, {2, 3}}); }

double err(Complex a, Complex b) { return std::abs(a - b); }

// Constant-coefficient transfer matrix over length l for -y'' + c y = lambda y.
Eigen::Matrix2cd const_transfer(Complex c, Complex lambda, double l) {
    auto k = std::sqrt(lambda - c);
    Eigen::Matrix2cd t;
    t << std::cos(k * l), std::sin(k * l) / k, -k * std::sin(k * l), std::cos(k * l);
    return t;
}

}  // namespace

TEST_CASE("jump matrix entries") {
    auto j = jump_matrix(1.0, 0.0, 0.0);
    CHECK(err(j(0, 0), 1.0) == 0.0);
    CHECK(err(j(0, 1), 1.0) == 0.0);
    CHECK(err(j(1, 0), 0.0) == 0.0);
    CHECK(err(j(1, 1), 1.0) == 0.0);
    auto k = jump_matrix(0.5, 2.0, 1.0);
    CHECK(err(k(1, 0), 0.5) < 1e-15);
    CHECK(err(k(1, 1), 1.25) < 1e-15);
    for (double d : {0.1, 1.0, 3.0})
        for (Complex lam : {Complex(-7, 0), Complex(3, 2), Complex(50, -1)})
            CHECK(err(jump_matrix(d, Complex(0.3, -0.2), lam).determinant(), 1.0) < 1e-12);
}

TEST_CASE("segment propagation oracles") {
    TimeScale half({{0, kPi / 2}});
    auto z = Potential::zero(half);
    auto s = propagate_segment(z, 0, SpectralPoint::from_lambda(1.0), {0.0, 1.0, 0.0}, Direction::kForward);
    CHECK(err(s.value(), 1.0) < 1e-12);
    CHECK(err(s.derivative(), 0.0) < 1e-12);

    auto c = propagate_segment(z, 0, SpectralPoint::from_lambda(0.0), {1.0, 0.0, 0.0}, Direction::kForward);
    CHECK(err(c.value(), 1.0) < 1e-14);
    CHECK(err(c.derivative(), 0.0) < 1e-14);

    TimeScale one({{0, 1.3}});
    for (Complex cst : {Complex(2.0, 0), Complex(-3.0, 0.5)})
        for (Complex lam : {Complex(-20, 0), Complex(9, 0), Complex(4, 7)}) {
            Potential q(one, {{cst}});
            auto t = const_transfer(cst, lam, 1.3);
            auto u = propagate_segment(q, 0, SpectralPoint::from_lambda(lam), {1.0, 0.0, 0.0}, Direction::kForward);
            auto v = propagate_segment(q, 0, SpectralPoint::from_lambda(lam), {0.0, 1.0, 0.0}, Direction::kForward);
            double scale = t.norm();
            CHECK(err(u.value(), t(0, 0)) / scale < 1e-12);
            CHECK(err(u.derivative(), t(1, 0)) / scale < 1e-12);
            CHECK(err(v.value(), t(0, 1)) / scale < 1e-12);
            CHECK(err(v.derivative(), t(1, 1)) / scale < 1e-12);
        }
}

TEST_CASE("straight-line solutions at lambda = 0") {
    auto ts = two();
    auto z = Potential::zero(ts);
    auto tr = solve_sc(ts, z, 0.0);
    CHECK(err(tr.delta0, 3.0) < 1e-13);
    CHECK(err(tr.delta1, 1.0) < 1e-13);
    for (std::size_t k = 0; k < 2; ++k) {
        CHECK(err(tr.S.at_a[k].value(), ts.segment(k).a) < 1e-13);
        CHECK(err(tr.C.at_b[k].value(), 1.0) < 1e-13);
    }
    CHECK(err(weyl(ts, z, 0.0), -3.0) < 1e-13);
    auto phi = solve_phi(ts, z, 0.0);
    CHECK(err(phi.phi.at_b[0].value(), 1.0 - 3.0) < 1e-13);
}

TEST_CASE("single segment closed forms") {
    TimeScale ts({{0, kPi}});
    auto z = Potential::zero(ts);
    for (Complex lam : {Complex(-3, 0), Complex(2.5, 0), Complex(10, 3), Complex(-40, -8)}) {
        auto rho = SpectralPoint::from_lambda(lam).rho;
        double scale = std::max(1.0, std::abs(std::cos(rho * kPi)));
        CHECK(err(char_delta(ts, z, lam, 0), std::sin(rho * kPi) / rho) < 1e-11 * scale);
        CHECK(err(char_delta(ts, z, lam, 1), std::cos(rho * kPi)) < 1e-11 * scale);
    }
    CHECK(std::abs(char_delta(ts, z, 4.0, 0)) < 1e-12);
    CHECK(std::abs(char_delta(ts, z, 0.25, 1)) < 1e-12);

    TimeScale unit({{0, 1}});
    auto zu = Potential::zero(unit);
    for (Complex lam : {Complex(-5, 0), Complex(3, 0), Complex(7, 2)}) {
        auto rho = SpectralPoint::from_lambda(lam).rho;
        auto m = -std::sin(rho) / (rho * std::cos(rho));
        CHECK(err(weyl(unit, zu, lam), m) < 1e-12 * std::abs(m));
    }
}

TEST_CASE("two segments against the transfer product") {
    auto ts = two();
    auto z = Potential::zero(ts);
    for (Complex lam : {Complex(-1, 0), Complex(-30, 0), Complex(12, 0), Complex(5, -9)}) {
        Eigen::Matrix2cd t = const_transfer(0.0, lam, 1.0);
        t = jump_matrix(1.0, 0.0, lam) * t;
        t = const_transfer(0.0, lam, 1.0) * t;
        CHECK(err(char_delta(ts, z, lam, 0), t(0, 1)) < 1e-12 * t.norm());
        CHECK(err(char_delta(ts, z, lam, 1), t(0, 0)) < 1e-12 * t.norm());
    }
    CHECK(err(char_delta(ts, z, 0.0, 1), 1.0) < 1e-14);
}

TEST_CASE("Weyl function equals -Delta0/Delta1") {
    auto ts = two();
    Potential q(ts, {{0.3, -0.5, 0.2}, {1.0, 0.1, -0.4}});
    for (Complex lam : {Complex(-20, 0), Complex(2, 1), Complex(15, -3)}) {
        auto tr = solve_sc(ts, q, lam);
        auto m = weyl(ts, q, lam);
        CHECK(err(m, -tr.delta0 / tr.delta1) < 1e-10 * std::abs(m));
    }
}

TEST_CASE("Weyl sweep flags poles") {
    TimeScale unit({{0, 1}});
    auto z = Potential::zero(unit);
    CHECK(weyl_sweep(unit, z, {}).empty());
    auto pole = Complex(kPi * kPi / 4, 0);  // cos rho = 0
    auto out = weyl_sweep(unit, z, {-1.0, -2.0, -3.0, pole});
    REQUIRE(out.size() == 4);
    for (int i = 0; i < 3; ++i) {
        REQUIRE(out[i].M);
        auto rho = SpectralPoint::from_lambda(out[i].lambda).rho;
        CHECK(err(*out[i].M, -std::sin(rho) / (rho * std::cos(rho))) < 1e-12);
    }
    CHECK_FALSE(out[3].M);
    CHECK(out[3].note == "pole");
    CHECK_THROWS_AS(weyl(unit, z, pole), Error);
}

TEST_CASE("sweep order does not depend on threads") {
    auto ts = two();
    Potential q(ts, {{0.3, -0.5}, {1.0, 0.1}});
    std::vector<Complex> grid;
    for (int i = 0; i < 16; ++i) grid.emplace_back(-1.0 - 3.0 * i, 0.5 * i);
    auto a = weyl_sweep(ts, q, grid, {}, 1);
    auto b = weyl_sweep(ts, q, grid, {}, 4);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(*a[i].M == *b[i].M);
}
