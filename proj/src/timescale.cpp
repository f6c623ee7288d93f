#include "slts/timescale.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace slts {

const char* to_string(Errc code) {
    switch (code) {
        case Errc::kDomain: return "domain error";
        case Errc::kInvalidInput: return "invalid input";
        case Errc::kResolution: return "resolution error";
        case Errc::kIntegration: return "integration error";
        case Errc::kPole: return "Weyl function pole";
        case Errc::kDegenerate: return "degenerate basis";
        case Errc::kTailModel: return "tail model error";
        case Errc::kConvergence: return "non-convergence";
        case Errc::kUnsupported: return "unsupported mode";
    }
    return "unknown error";
}

const char* to_string(PointClass c) {
    switch (c) {
        case PointClass::kInteriorDense: return "interior-dense";
        case PointClass::kLeftEndpoint: return "left-endpoint";
        case PointClass::kRightIsolated: return "right-isolated";
        case PointClass::kLeftIsolated: return "left-isolated";
        case PointClass::kRightBoundary: return "right-boundary";
    }
    return "?";
}

std::vector<std::string> TimeScale::validate(std::span<const Segment> segments) {
    std::vector<std::string> errors;
    if (segments.empty()) {
        errors.emplace_back("time scale has no segments");
        return errors;
    }
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        if (!std::isfinite(s.a) || !std::isfinite(s.b)) {
            std::ostringstream os;
            os << "segment " << k + 1 << ": non-finite endpoint";
            errors.push_back(os.str());
            continue;
        }
        if (!(s.a < s.b)) {
            std::ostringstream os;
            os << "segment " << k + 1 << ": a >= b (" << s.a << ", " << s.b << ")";
            errors.push_back(os.str());
        }
        if (k + 1 < segments.size()) {
            const auto& n = segments[k + 1];
            std::ostringstream os;
            if (n.a < s.b) {
                os << "segments " << k + 1 << " and " << k + 2 << " overlap";
                errors.push_back(os.str());
            } else if (n.a == s.b) {
                os << "segments " << k + 1 << " and " << k + 2 << " touch (b_k = a_{k+1})";
                errors.push_back(os.str());
            }
        }
    }
    return errors;
}

TimeScale::TimeScale(std::vector<Segment> segments) {
    auto errors = validate(segments);
    if (!errors.empty()) {
        std::string msg = "invalid time scale:";
        for (const auto& e : errors) msg += " " + e + ";";
        throw Error(Errc::kInvalidInput, msg);
    }
    shift_ = segments.front().a;
    for (auto& s : segments) {
        s.a -= shift_;
        s.b -= shift_;
    }
    segs_ = std::move(segments);
}

double TimeScale::gamma(std::size_t k) const {
    double g = 0.0;
    for (std::size_t l = segs_.size() - k; l < segs_.size(); ++l) g += segs_[l].length();
    return g;
}

bool TimeScale::contains(double x) const {
    const double xn = to_normalized(x);
    return std::any_of(segs_.begin(), segs_.end(),
                       [xn](const Segment& s) { return s.a <= xn && xn <= s.b; });
}

std::size_t TimeScale::segment_of(double x) const {
    const double xn = to_normalized(x);
    for (std::size_t k = 0; k < segs_.size(); ++k)
        if (segs_[k].a <= xn && xn <= segs_[k].b) return k;
    std::ostringstream os;
    os << "point " << x << " is not in T";
    throw Error(Errc::kDomain, os.str());
}

double TimeScale::sigma(double x) const {
    const auto k = segment_of(x);
    if (to_normalized(x) == segs_[k].b && k + 1 < segs_.size()) return to_original(segs_[k + 1].a);
    return x;
}

double TimeScale::sigma_minus(double x) const {
    const auto k = segment_of(x);
    if (to_normalized(x) == segs_[k].a && k > 0) return to_original(segs_[k - 1].b);
    return x;
}

PointClass TimeScale::classify(double x) const {
    const auto k = segment_of(x);
    const double xn = to_normalized(x);
    if (k == 0 && xn == segs_[0].a) return PointClass::kLeftEndpoint;
    if (k + 1 == segs_.size() && xn == segs_[k].b) return PointClass::kRightBoundary;
    if (xn == segs_[k].b) return PointClass::kRightIsolated;
    if (xn == segs_[k].a) return PointClass::kLeftIsolated;
    return PointClass::kInteriorDense;
}

void GridFunction::check(const TimeScale& ts) const {
    if (segments.size() != ts.size())
        throw Error(Errc::kInvalidInput, "grid function segment count does not match time scale");
    for (std::size_t k = 0; k < segments.size(); ++k) {
        const auto& s = segments[k];
        const auto seg = ts.original_segment(k);
        if (s.x.size() != s.v.size() || s.x.size() < 2)
            throw Error(Errc::kInvalidInput, "grid function: malformed samples on segment " +
                                                 std::to_string(k + 1));
        if (s.x.front() != seg.a || s.x.back() != seg.b)
            throw Error(Errc::kInvalidInput, "grid function: segment endpoints must be sampled");
        if (!std::is_sorted(s.x.begin(), s.x.end(), std::less_equal<>()))
            throw Error(Errc::kInvalidInput, "grid function: x not strictly increasing");
    }
}

Complex GridFunction::at(const TimeScale& ts, double x) const {
    const auto k = ts.segment_of(x);
    const auto& s = segments.at(k);
    auto it = std::lower_bound(s.x.begin(), s.x.end(), x);
    if (it == s.x.end() || *it != x) throw Error(Errc::kDomain, "no sample at requested point");
    return s.v[static_cast<std::size_t>(it - s.x.begin())];
}

namespace {

// Derivative at t of the polynomial interpolating (xs, vs); Lagrange form.
Complex interp_derivative(std::span<const double> xs, std::span<const Complex> vs, double t) {
    const std::size_t m = xs.size();
    Complex d = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        double denom = 1.0;
        for (std::size_t j = 0; j < m; ++j)
            if (j != i) denom *= xs[i] - xs[j];
        // d/dt prod_{j != i} (t - x_j)
        double num = 0.0;
        for (std::size_t l = 0; l < m; ++l) {
            if (l == i) continue;
            double p = 1.0;
            for (std::size_t j = 0; j < m; ++j)
                if (j != i && j != l) p *= t - xs[j];
            num += p;
        }
        d += vs[i] * (num / denom);
    }
    return d;
}

}  // namespace

Complex delta_derivative(const TimeScale& ts, const GridFunction& f, double t) {
    f.check(ts);
    switch (ts.classify(t)) {
        case PointClass::kRightBoundary:
            throw Error(Errc::kDomain, "delta derivative: b_N is not in T^0");
        case PointClass::kRightIsolated: {
            const double s = ts.sigma(t);
            return (f.at(ts, s) - f.at(ts, t)) / (s - t);
        }
        default: break;
    }
    constexpr std::size_t kStencil = 5;
    const auto& s = f.segments[ts.segment_of(t)];
    if (s.x.size() < kStencil)
        throw Error(Errc::kResolution, "delta derivative: need at least 5 samples on the segment");
    // Window of the 5 samples nearest to t, clamped to the segment.
    auto it = std::lower_bound(s.x.begin(), s.x.end(), t);
    std::ptrdiff_t centre = it - s.x.begin();
    if (it != s.x.begin() && (it == s.x.end() || t - *(it - 1) < *it - t)) --centre;
    std::ptrdiff_t first = centre - 2;
    first = std::clamp<std::ptrdiff_t>(first, 0, static_cast<std::ptrdiff_t>(s.x.size() - kStencil));
    const auto off = static_cast<std::size_t>(first);
    return interp_derivative(std::span(s.x).subspan(off, kStencil),
                             std::span(s.v).subspan(off, kStencil), t);
}

}  // namespace slts
