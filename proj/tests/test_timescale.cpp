#include <doctest.h>

#include <cmath>

#include "slts/timescale.hpp"

using namespace slts;

namespace {

TimeScale two() { return TimeScale({{0, 1}, {2, 3}}); }

GridFunction sample(const TimeScale& ts, double (*f)(double), int n = 41) {
    GridFunction g;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        auto s = ts.original_segment(k);
        GridFunction::Samples seg;
        for (int i = 0; i < n; ++i) {
            double x = s.a + (s.b - s.a) * i / (n - 1);
            seg.x.push_back(x);
            seg.v.emplace_back(f(x), 0.0);
        }
        g.segments.push_back(seg);
    }
    return g;
}

}  // namespace

TEST_CASE("jump operators") {
    auto ts = two();
    CHECK(ts.sigma(1.0) == 2.0);
    CHECK(ts.sigma(0.5) == 0.5);
    CHECK(ts.sigma(3.0) == 3.0);
    CHECK(ts.sigma_minus(2.0) == 1.0);
    CHECK(ts.sigma_minus(0.0) == 0.0);
    CHECK_THROWS_AS(ts.sigma(1.5), Error);
}

TEST_CASE("point classes") {
    auto ts = two();
    CHECK(ts.classify(1.0) == PointClass::kRightIsolated);
    CHECK(ts.classify(0.5) == PointClass::kInteriorDense);
    CHECK(ts.classify(2.0) == PointClass::kLeftIsolated);
    CHECK(ts.classify(0.0) == PointClass::kLeftEndpoint);
    CHECK(ts.classify(3.0) == PointClass::kRightBoundary);
}

TEST_CASE("segment validation") {
    CHECK(TimeScale::validate(std::vector<Segment>{{0, 1}, {2, 3}}).empty());
    auto overlap = TimeScale::validate(std::vector<Segment>{{0, 2}, {1, 3}});
    REQUIRE(overlap.size() == 1);
    CHECK(overlap[0].find("overlap") != std::string::npos);
    auto touch = TimeScale::validate(std::vector<Segment>{{0, 1}, {1, 2}});
    REQUIRE(touch.size() == 1);
    CHECK(touch[0].find("touch") != std::string::npos);
    CHECK_FALSE(TimeScale::validate(std::vector<Segment>{{1, 1}}).empty());
    CHECK_THROWS_AS(TimeScale(std::vector<Segment>{{0, 2}, {1, 3}}), Error);
}

TEST_CASE("normalization keeps original coordinates in queries") {
    TimeScale ts({{5, 6}, {7, 9}});
    CHECK(ts.shift() == 5.0);
    CHECK(ts.segment(1).a == 2.0);
    CHECK(ts.end() == 4.0);
    CHECK(ts.sigma(6.0) == 7.0);
    CHECK(ts.gap(0) == 1.0);
    CHECK(ts.gamma(1) == 2.0);
    CHECK(ts.gamma(2) == 3.0);
}

TEST_CASE("gamma of two unit segments") { CHECK(two().gamma(2) == doctest::Approx(2.0)); }

TEST_CASE("delta derivative") {
    auto ts = two();
    auto sq = sample(ts, [](double x) { return x * x; });
    CHECK(delta_derivative(ts, sq, 1.0).real() == doctest::Approx(3.0).epsilon(1e-14));
    CHECK(delta_derivative(ts, sq, 0.5).real() == doctest::Approx(1.0).epsilon(1e-10));
    auto c = sample(ts, [](double) { return 4.0; });
    CHECK(std::abs(delta_derivative(ts, c, 0.3)) < 1e-12);
    CHECK(std::abs(delta_derivative(ts, c, 1.0)) < 1e-12);
}
