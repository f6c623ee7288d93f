#include <doctest.h>

#include <cmath>
#include <numbers>

#include "slts/spectrum.hpp"

using namespace slts;

namespace {

constexpr double kPi = std::numbers::pi;

SpectrumList exact(const std::vector<double>& lambdas, int j) {
    SpectrumList s;
    s.j = j;
    for (double l : lambdas) {
        Eigenvalue e{};
        e.lambda = e.bracket_lo = e.bracket_hi = l;
        s.eigenvalues.push_back(e);
    }
    return s;
}

}  // namespace

TEST_CASE("cluster seeds") {
    TimeScale ts({{0, 1}, {2, 3}});
    auto s0 = asymptotic_seeds(ts, 0, 3);
    REQUIRE(s0.size() == 6);
    CHECK(s0[2].nu == 1);
    CHECK(s0[2].k == 3);
    CHECK(s0[2].rho == doctest::Approx(2.5 * kPi));
    CHECK(s0[3].nu == 2);
    CHECK(s0[3].rho == doctest::Approx(kPi));
    auto s1 = asymptotic_seeds(ts, 1, 2);
    CHECK(s1[0].rho == doctest::Approx(kPi));

    TimeScale wide({{0, 2}, {3, 4}});
    CHECK(asymptotic_seeds(wide, 0, 1)[1].rho == doctest::Approx(kPi));
    CHECK(asymptotic_seeds(wide, 0, 1)[0].rho == doctest::Approx(kPi / 4));
}

TEST_CASE("classical spectra on [0, pi]") {
    TimeScale ts({{0, kPi}});
    auto z = Potential::zero(ts);
    auto d = find_eigenvalues(ts, z, 0, 5);
    REQUIRE(d.eigenvalues.size() == 5);
    for (int n = 1; n <= 5; ++n) CHECK(d.eigenvalues[n - 1].lambda == doctest::Approx(n * n).epsilon(1e-12));
    auto n1 = find_eigenvalues(ts, z, 1, 5);
    for (int n = 1; n <= 5; ++n)
        CHECK(n1.eigenvalues[n - 1].lambda == doctest::Approx((n - 0.5) * (n - 0.5)).epsilon(1e-12));
    CHECK(find_eigenvalues(ts, z, 0, 0).eigenvalues.empty());
}

TEST_CASE("high eigenvalues approach the merged seeds") {
    TimeScale ts({{0, 1}, {2, 3}});
    auto spec = find_eigenvalues(ts, Potential::zero(ts), 0, 40);
    double first = 0, last = 0;
    int n = 0;
    for (auto& e : spec.eigenvalues) {
        if (e.nu == 0) continue;
        ++n;
        if (n <= 5) first += e.deviation();
        if (n > 30 && n <= 35) last += e.deviation();
    }
    CHECK(last < first);
    CHECK(last / 5 < 0.05);
}

TEST_CASE("eigenvalues need a real potential") {
    TimeScale ts({{0, 1}});
    Potential q(ts, {{Complex(0, 1)}});
    CHECK_THROWS_AS(find_eigenvalues(ts, q, 0, 3), Error);
}

TEST_CASE("Hadamard reconstruction of sin(rho pi)/rho") {
    TimeScale ts({{0, kPi}});
    std::vector<double> zeros;
    for (int n = 1; n <= 200; ++n) zeros.push_back(double(n) * n);
    auto model = hadamard_reconstruct(exact(zeros, 0), ts, 200);
    CHECK(std::abs(model.constant() - kPi) < 1e-3);
    CHECK(std::abs(model(0.0) - kPi) < 1e-3);
    auto direct = char_delta(ts, Potential::zero(ts), -4.0, 0);
    CHECK(std::abs(model(-4.0) - direct) < 1e-3 * std::abs(direct));
    CHECK(std::abs(model(9.0)) == 0.0);
}

TEST_CASE("Weyl function from two exact spectra") {
    TimeScale ts({{0, 1}});
    std::vector<double> z0, z1;
    for (int n = 1; n <= 200; ++n) {
        z0.push_back(kPi * kPi * n * n);
        z1.push_back(kPi * kPi * (n - 0.5) * (n - 0.5));
    }
    auto d0 = hadamard_reconstruct(exact(z0, 0), ts, 200);
    auto d1 = hadamard_reconstruct(exact(z1, 1), ts, 200);
    auto m = weyl_from_spectra(d0, d1, {-1.0, -1e-8, Complex(z1[0], 0)});
    REQUIRE(m[0].M);
    CHECK(std::abs(*m[0].M + std::tanh(1.0)) < 1e-3);
    CHECK(std::abs(*m[1].M + 1.0) < 1e-3);
    CHECK_FALSE(m[2].M);
}

TEST_CASE("consistency notes for a missing eigenvalue") {
    TimeScale ts({{0, 1}, {2, 3}});
    auto spec = find_eigenvalues(ts, Potential::zero(ts), 0, 30);
    CHECK(cluster_consistency(spec, ts, 30).empty());
    spec.eigenvalues.erase(spec.eigenvalues.begin() + 10);
    CHECK_FALSE(cluster_consistency(spec, ts, 29).empty());
}
