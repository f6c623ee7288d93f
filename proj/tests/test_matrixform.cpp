#include <doctest.h>

#include <cmath>
#include <numbers>

#include <Eigen/LU>
#include <random>

#include "slts/matrixform.hpp"

using namespace slts;

namespace {

constexpr double kPi = std::numbers::pi;

double err(Complex a, Complex b) { return std::abs(a - b); }

Potential random_q(const TimeScale& ts, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(-2, 2);
    std::vector<std::vector<Complex>> c(ts.size());
    for (auto& s : c)
        for (int i = 0; i < 4; ++i) s.emplace_back(u(rng));
    return Potential(ts, c);
}

TimeScale three() { return TimeScale({{0, 1}, {1.5, 2.7}, {3.4, 4.0}}); }

}  // namespace

TEST_CASE("fundamental system of the free equation") {
    TimeScale ts({{0, kPi}});
    auto fs = build_fundamental(ts, Potential::zero(ts), 1.0);
    CHECK(fs.exact);
    CHECK(err(fs.y1_b[0], -1.0) < 1e-14);
    CHECK_THROWS_AS(build_fundamental(ts, Potential::zero(ts), 0.0), Error);
}

TEST_CASE("Wronskian of the default basis") {
    auto ts = three();
    std::mt19937_64 rng(5);
    for (Complex rho : {Complex(1, 0), Complex(0, 5), Complex(3, 4), Complex(7, 0.5)}) {
        auto fs = build_fundamental(ts, random_q(ts, rng), rho);
        for (std::size_t k = 0; k < ts.size(); ++k)
            CHECK(err(fs.wronskian_b(k), Complex(0, -2) * rho) < 1e-9 * std::abs(rho));
    }
}

TEST_CASE("constant potential basis") {
    TimeScale ts({{0, 1.5}});
    Potential q(ts, {{1.0}});
    Complex rho = 2.0;
    auto fs = build_fundamental(ts, q, rho);
    auto k = std::sqrt(rho * rho - 1.0);
    // Y_2 starts with (1, -i rho): cos(kx) - i rho sin(kx)/k.
    Complex y2 = std::cos(k * 1.5) - Complex(0, 1) * rho * std::sin(k * 1.5) / k;
    CHECK(err(fs.y2_b[0], y2) < 1e-12);
}

TEST_CASE("block matrix structure and determinant") {
    TimeScale ts({{0, 1}, {2, 3}});
    BlockSystem free(ts, Potential::zero(ts), SpectralPoint::from_rho(1.0));
    const auto& B = free.B();
    REQUIRE(B.rows() == 4);
    for (auto [r, c] : {std::pair{0, 2}, {0, 3}, {1, 2}, {1, 3}}) CHECK(std::abs(B(r, c)) == 0.0);
    CHECK(err(B.determinant(), std::pow(Complex(0, -2), 2)) < 1e-12);

    std::mt19937_64 rng(9);
    auto t3 = three();
    for (Complex rho : {Complex(1, 0), Complex(0, 5), Complex(3, 4)}) {
        BlockSystem bs(t3, random_q(t3, rng), SpectralPoint::from_rho(rho));
        auto expect = std::pow(Complex(0, -2) * rho, 3.0);
        CHECK(err(bs.B().determinant(), expect) / std::pow(std::abs(2.0 * rho), 3) < 1e-9);
    }
}

TEST_CASE("Cramer pathway matches shooting") {
    TimeScale pi({{0, kPi}});
    CHECK(std::abs(cramer_delta(pi, Potential::zero(pi), 4.0, 0).value) < 1e-12);

    TimeScale ts({{0, 1}, {2, 3}});
    auto z = Potential::zero(ts);
    for (int j = 0; j <= 1; ++j) {
        auto d = char_delta(ts, z, -1.0, j);
        CHECK(err(cramer_delta(ts, z, -1.0, j).value, d) < 1e-11 * std::abs(d));
    }

    auto t3 = three();
    std::mt19937_64 rng(11);
    auto q = random_q(t3, rng);
    std::uniform_real_distribution<double> u(-60, 60);
    for (int i = 0; i < 20; ++i) {
        Complex lam(u(rng), i % 2 ? u(rng) / 4 : 0.0);
        auto tr = solve_sc(t3, q, lam);
        double scale = std::abs(tr.S.at_b.back().value()) + std::abs(tr.C.at_b.back().value()) +
                       std::abs(tr.S.at_b.back().derivative()) + std::abs(tr.C.at_b.back().derivative());
        CHECK(err(cramer_delta(t3, q, lam, 0).value, tr.delta0) / scale < 1e-8);
        CHECK(err(cramer_delta(t3, q, lam, 1).value, tr.delta1) / scale < 1e-8);
    }
}

TEST_CASE("minors: recursion, dense determinant and the k = 1 closed form") {
    TimeScale ts({{0, 1}, {2, 3}});
    Complex rho(2.3, 0.4);
    BlockSystem free(ts, Potential::zero(ts), SpectralPoint::from_rho(rho));
    Complex i(0, 1);
    for (int j = 0; j <= 1; ++j) {
        auto expect = std::pow(-i * rho, j) * std::exp(i * rho) - std::pow(i * rho, j) * std::exp(-i * rho);
        CHECK(err(free.minor(j, 1), expect) < 1e-12 * std::abs(expect));
        CHECK(err(free.minor(j, 2), free.D(j).determinant()) < 1e-12 * std::abs(free.minor(j, 2)));
    }

    auto t3 = three();
    std::mt19937_64 rng(13);
    auto q = random_q(t3, rng);
    std::uniform_real_distribution<double> u(-8, 8);
    for (int n = 0; n < 20; ++n) {
        BlockSystem bs(t3, q, SpectralPoint::from_rho({u(rng), std::abs(u(rng))}));
        for (int j = 0; j <= 1; ++j)
            for (std::size_t k = 1; k <= 3; ++k) {
                auto d = bs.minor_dense(j, k);
                CHECK(err(bs.minor(j, k), d) <= 1e-10 * std::abs(d));
            }
    }
}

TEST_CASE("Weyl function from the first-segment coefficients") {
    TimeScale ts({{0, 1}, {2, 3}});
    Potential q(ts, {{0.5, -0.2, 0.1}, {-0.3, 0.4, 0.0}});
    auto pc = phi_cramer(ts, q, -5.0);
    auto m = weyl(ts, q, -5.0);
    CHECK(err(pc.M, m) < 1e-8 * std::abs(m));

    auto z = Potential::zero(ts);
    auto pz = phi_cramer(ts, z, Complex(-100, 0));
    Complex rho(0, 10);
    CHECK(std::abs(Complex(0, 1) * rho * pz.A1 - 1.0) < 0.1);
    CHECK_THROWS_AS(phi_cramer(ts, z, 0.0), Error);
}

TEST_CASE("asymptotic model") {
    TimeScale ts({{0, 1}, {2, 3}});
    AsymptoticModel am(ts);
    CHECK(am.gamma(2) == doctest::Approx(2.0));
    CHECK(err(am.f(0, 1, 1.7), std::cos(1.7)) < 1e-15);
    auto sp = SpectralPoint::from_lambda(-1e4);
    auto z = Potential::zero(ts);
    for (int j = 0; j <= 1; ++j) {
        auto ratio = std::exp(std::log(char_delta(ts, z, sp.lambda, j)) - am.log_g(sp.rho, j));
        CHECK(std::abs(ratio - 1.0) < 0.05);
    }
}
