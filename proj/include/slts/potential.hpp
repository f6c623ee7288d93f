#pragma once

#include <span>
#include <vector>

#include "slts/timescale.hpp"

namespace slts {

/// Chebyshev series on [lo, hi]: sum_i c_i T_i(t), t = (2x - lo - hi) / (hi - lo).
class ChebSeries {
public:
    ChebSeries() = default;
    ChebSeries(double lo, double hi, std::vector<Complex> coeffs);

    /// The degree-1 series through (lo, vlo) and (hi, vhi).
    static ChebSeries linear(double lo, double hi, Complex vlo, Complex vhi);

    Complex operator()(double x) const;
    double lo() const { return lo_; }
    double hi() const { return hi_; }
    const std::vector<Complex>& coeffs() const { return c_; }
    bool is_constant() const;
    bool is_real() const;

private:
    double lo_ = 0.0;
    double hi_ = 1.0;
    std::vector<Complex> c_{0.0};
};

/// Potential q on T as one Chebyshev series per segment (normalized coordinates).
///
/// q(b_k), which enters the jump matrices, is always read from the same
/// series, so the interval equation and the gap transfer stay consistent.
class Potential {
public:
    Potential(const TimeScale& ts, std::vector<std::vector<Complex>> coeffs);

    static Potential zero(const TimeScale& ts, std::size_t degree = 0);
    /// Least-squares Chebyshev fit of degree `degree` to per-segment samples
    /// (original coordinates).
    static Potential fit(const TimeScale& ts, const GridFunction& samples, std::size_t degree);

    std::size_t size() const { return segs_.size(); }
    const ChebSeries& segment(std::size_t k) const { return segs_[k]; }
    std::size_t degree() const;

    /// q at normalized coordinate x on segment k.
    Complex operator()(std::size_t k, double x) const { return segs_[k](x); }
    Complex right_value(std::size_t k) const { return segs_[k](segs_[k].hi()); }
    Complex left_value(std::size_t k) const { return segs_[k](segs_[k].lo()); }

    /// Continuous extension across gap k (between segments k and k+1): linear.
    ChebSeries gap_extension(std::size_t k) const;

    bool is_real() const;
    /// max |q| over T, sampled on a Chebyshev-Lobatto grid per segment.
    double sup_norm() const;

    /// Coefficients flattened segment by segment (used by the inverse solver).
    std::vector<Complex> flatten() const;

private:
    std::vector<ChebSeries> segs_;
};

}  // namespace slts
