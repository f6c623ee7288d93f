#include "slts/potential.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>

namespace slts {

ChebSeries::ChebSeries(double lo, double hi, std::vector<Complex> coeffs)
    : lo_(lo), hi_(hi), c_(std::move(coeffs)) {
    if (!(lo < hi)) throw Error(Errc::kInvalidInput, "Chebyshev series needs lo < hi");
    if (c_.empty()) c_.push_back(0.0);
    for (const auto& c : c_)
        if (!std::isfinite(c.real()) || !std::isfinite(c.imag()))
            throw Error(Errc::kInvalidInput, "potential coefficient is not finite");
}

ChebSeries ChebSeries::linear(double lo, double hi, Complex vlo, Complex vhi) {
    return ChebSeries(lo, hi, {0.5 * (vlo + vhi), 0.5 * (vhi - vlo)});
}

Complex ChebSeries::operator()(double x) const {
    const double t = (2.0 * x - lo_ - hi_) / (hi_ - lo_);
    // Clenshaw recurrence
    Complex b1 = 0.0, b2 = 0.0;
    for (std::size_t i = c_.size(); i-- > 1;) {
        const Complex b0 = c_[i] + 2.0 * t * b1 - b2;
        b2 = b1;
        b1 = b0;
    }
    return c_[0] + t * b1 - b2;
}

bool ChebSeries::is_constant() const {
    return std::all_of(c_.begin() + 1, c_.end(), [](Complex c) { return c == 0.0; });
}

bool ChebSeries::is_real() const {
    return std::all_of(c_.begin(), c_.end(), [](Complex c) { return c.imag() == 0.0; });
}

Potential::Potential(const TimeScale& ts, std::vector<std::vector<Complex>> coeffs) {
    if (coeffs.size() != ts.size())
        throw Error(Errc::kInvalidInput, "potential: need one coefficient list per segment");
    segs_.reserve(coeffs.size());
    for (std::size_t k = 0; k < coeffs.size(); ++k)
        segs_.emplace_back(ts.segment(k).a, ts.segment(k).b, std::move(coeffs[k]));
}

Potential Potential::zero(const TimeScale& ts, std::size_t degree) {
    return Potential(ts, std::vector<std::vector<Complex>>(ts.size(),
                                                           std::vector<Complex>(degree + 1, 0.0)));
}

Potential Potential::fit(const TimeScale& ts, const GridFunction& samples, std::size_t degree) {
    samples.check(ts);
    std::vector<std::vector<Complex>> coeffs(ts.size());
    for (std::size_t k = 0; k < ts.size(); ++k) {
        const auto& s = samples.segments[k];
        const auto seg = ts.original_segment(k);
        const auto m = static_cast<Eigen::Index>(s.x.size());
        const auto n = static_cast<Eigen::Index>(degree + 1);
        if (m < n)
            throw Error(Errc::kResolution, "potential fit: fewer samples than coefficients on segment " +
                                               std::to_string(k + 1));
        Eigen::MatrixXd A(m, n);
        Eigen::VectorXcd rhs(m);
        for (Eigen::Index i = 0; i < m; ++i) {
            const double t = (2.0 * s.x[i] - seg.a - seg.b) / (seg.b - seg.a);
            double t0 = 1.0, t1 = t;
            for (Eigen::Index j = 0; j < n; ++j) {
                A(i, j) = j == 0 ? 1.0 : (j == 1 ? t : 2.0 * t * t1 - t0);
                if (j >= 2) {
                    t0 = t1;
                    t1 = A(i, j);
                }
            }
            rhs(i) = s.v[i];
        }
        Eigen::VectorXcd c = A.cast<Complex>().colPivHouseholderQr().solve(rhs);
        coeffs[k].assign(c.data(), c.data() + n);
    }
    return Potential(ts, std::move(coeffs));
}

std::size_t Potential::degree() const {
    std::size_t d = 0;
    for (const auto& s : segs_) d = std::max(d, s.coeffs().size() - 1);
    return d;
}

ChebSeries Potential::gap_extension(std::size_t k) const {
    return ChebSeries::linear(segs_[k].hi(), segs_[k + 1].lo(), right_value(k), left_value(k + 1));
}

bool Potential::is_real() const {
    return std::all_of(segs_.begin(), segs_.end(), [](const ChebSeries& s) { return s.is_real(); });
}

double Potential::sup_norm() const {
    constexpr int kPoints = 65;
    double m = 0.0;
    for (const auto& s : segs_) {
        for (int i = 0; i < kPoints; ++i) {
            const double t = std::cos(std::numbers::pi * i / (kPoints - 1));
            const double x = 0.5 * (s.lo() + s.hi()) + 0.5 * (s.hi() - s.lo()) * t;
            m = std::max(m, std::abs(s(x)));
        }
    }
    return m;
}

std::vector<Complex> Potential::flatten() const {
    std::vector<Complex> out;
    for (const auto& s : segs_) out.insert(out.end(), s.coeffs().begin(), s.coeffs().end());
    return out;
}

}  // namespace slts
