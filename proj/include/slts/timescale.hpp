#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "slts/error.hpp"

namespace slts {

struct Segment {
    double a;
    double b;
    double length() const { return b - a; }
};

enum class PointClass {
    kInteriorDense,   // sigma_-(x) = x = sigma(x)
    kLeftEndpoint,    // x = a_1
    kRightIsolated,   // x = b_k, k < N
    kLeftIsolated,    // x = a_k, k > 1
    kRightBoundary,   // x = b_N
};

const char* to_string(PointClass c);

/// Finite union of disjoint closed segments [a_k, b_k], k = 1..N.
///
/// Coordinates are stored normalized so that a_1 = 0; `shift()` returns the
/// original a_1 so callers can map back with `to_original()`. All public
/// point queries (`sigma`, `classify`, ...) take original coordinates.
class TimeScale {
public:
    /// Throws Errc::kInvalidInput listing every violated invariant.
    explicit TimeScale(std::vector<Segment> segments);

    /// Returns an empty list when the segments form a valid time scale.
    static std::vector<std::string> validate(std::span<const Segment> segments);

    std::size_t size() const { return segs_.size(); }
    double shift() const { return shift_; }

    /// Normalized segment k (0-based), a_1 = 0.
    const Segment& segment(std::size_t k) const { return segs_[k]; }
    const std::vector<Segment>& segments() const { return segs_; }
    /// Segment k in original coordinates.
    Segment original_segment(std::size_t k) const {
        return {segs_[k].a + shift_, segs_[k].b + shift_};
    }

    /// Gap length d_k = a_{k+1} - b_k (0-based k < N-1).
    double gap(std::size_t k) const { return segs_[k + 1].a - segs_[k].b; }
    /// Normalized right end b_N.
    double end() const { return segs_.back().b; }
    /// gamma_k: total length of the last k segments (1 <= k <= N).
    double gamma(std::size_t k) const;

    double to_normalized(double x) const { return x - shift_; }
    double to_original(double x) const { return x + shift_; }

    bool contains(double x) const;
    /// 0-based index of the segment containing original coordinate x; throws kDomain.
    std::size_t segment_of(double x) const;

    double sigma(double x) const;
    double sigma_minus(double x) const;
    PointClass classify(double x) const;

private:
    std::vector<Segment> segs_;
    double shift_ = 0.0;
};

/// Per-segment samples of a function on T. Gaps carry no data.
struct GridFunction {
    struct Samples {
        std::vector<double> x;
        std::vector<Complex> v;
    };
    std::vector<Samples> segments;

    /// Checks sample layout against ts: strictly increasing x, endpoints present.
    void check(const TimeScale& ts) const;
    /// Value at an endpoint sample (original coordinates); throws kDomain if absent.
    Complex at(const TimeScale& ts, double x) const;
};

/// Delta-derivative at original coordinate t. Right-isolated points use the
/// exact difference quotient across the gap; right-dense points use a
/// 4th-order five-point interpolation derivative (one-sided near segment ends).
Complex delta_derivative(const TimeScale& ts, const GridFunction& f, double t);

}  // namespace slts
