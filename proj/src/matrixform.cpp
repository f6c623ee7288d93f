#include "slts/matrixform.hpp"

#include <cmath>
#include <sstream>

namespace slts {

namespace {

constexpr Complex kI{0.0, 1.0};

bool is_zero(const Potential& q) {
    for (std::size_t k = 0; k < q.size(); ++k)
        for (const auto& c : q.segment(k).coeffs())
            if (c != 0.0) return false;
    return true;
}

Complex ipow(Complex z, int n) { return n >= 0 ? std::pow(z, n) : 1.0 / std::pow(z, -n); }

Complex determinant(const Eigen::MatrixXcd& m) { return m.partialPivLu().determinant(); }

}  // namespace

FundamentalSystem build_fundamental(const TimeScale& ts, const Potential& q, Complex rho,
                                    const ForwardOptions& opts) {
    if (rho == 0.0) throw Error(Errc::kDegenerate, "fundamental system is degenerate at rho = 0");
    if (q.size() != ts.size())
        throw Error(Errc::kInvalidInput, "potential and time scale have different segment counts");
    const std::size_t n = ts.size();
    FundamentalSystem fs;
    fs.rho = rho;
    for (auto* v : {&fs.y1_a, &fs.dy1_a, &fs.y2_a, &fs.dy2_a, &fs.y1_b, &fs.dy1_b, &fs.y2_b, &fs.dy2_b})
        v->resize(n);
    const Complex lambda = rho * rho;

    if (is_zero(q)) {
        fs.exact = true;
        for (std::size_t k = 0; k < n; ++k) {
            for (bool at_b : {false, true}) {
                const double x = at_b ? ts.segment(k).b : ts.segment(k).a;
                const Complex e1 = std::exp(kI * rho * x), e2 = std::exp(-kI * rho * x);
                (at_b ? fs.y1_b : fs.y1_a)[k] = e1;
                (at_b ? fs.dy1_b : fs.dy1_a)[k] = kI * rho * e1;
                (at_b ? fs.y2_b : fs.y2_a)[k] = e2;
                (at_b ? fs.dy2_b : fs.dy2_a)[k] = -kI * rho * e2;
            }
        }
        return fs;
    }

    // Y_2 grows forward (Im rho >= 0) and is shot from x = 0; Y_1 grows
    // backward and is shot from b_N. Each is integrated in its stable direction.
    SolutionState y2{1.0, -kI * rho, 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        if (k > 0) {
            const auto gap = q.gap_extension(k - 1);
            y2 = integrate(gap, lambda, y2, gap.lo(), gap.hi(), opts.integrator);
        }
        fs.y2_a[k] = y2.value();
        fs.dy2_a[k] = y2.derivative();
        const auto& seg = q.segment(k);
        y2 = integrate(seg, lambda, y2, seg.lo(), seg.hi(), opts.integrator);
        fs.y2_b[k] = y2.value();
        fs.dy2_b[k] = y2.derivative();
    }
    const double bn = ts.end();
    const Complex e_bn = std::exp(kI * rho * bn);
    SolutionState y1{1.0, kI * rho, 0.0};
    y1.log_scale = -(rho * bn).imag();  // |exp(i rho b_N)|, phase applied below
    const Complex phase = e_bn / std::abs(e_bn);
    std::vector<SolutionState> y1a(n), y1b(n);
    for (std::size_t k = n; k-- > 0;) {
        y1b[k] = y1;
        const auto& seg = q.segment(k);
        y1 = integrate(seg, lambda, y1, seg.hi(), seg.lo(), opts.integrator);
        y1a[k] = y1;
        if (k > 0) {
            const auto gap = q.gap_extension(k - 1);
            y1 = integrate(gap, lambda, y1, gap.hi(), gap.lo(), opts.integrator);
        }
    }
    for (std::size_t k = 0; k < n; ++k) {
        fs.y1_a[k] = phase * y1a[k].value();
        fs.dy1_a[k] = phase * y1a[k].derivative();
        fs.y1_b[k] = phase * y1b[k].value();
        fs.dy1_b[k] = phase * y1b[k].derivative();
    }
    // Rescale Y_1 so that W(Y_1, Y_2) = -2 i rho, measured where both are O(1).
    const Complex w = fs.wronskian_a(0);
    const Complex factor = -2.0 * kI * rho / w;
    for (auto* v : {&fs.y1_a, &fs.dy1_a, &fs.y1_b, &fs.dy1_b})
        for (auto& z : *v) z *= factor;
    return fs;
}

BlockSystem::BlockSystem(const TimeScale& ts, const Potential& q, const SpectralPoint& sp,
                         const ForwardOptions& opts)
    : BlockSystem(ts, q, build_fundamental(ts, q, sp.rho, opts)) {}

BlockSystem::BlockSystem(const TimeScale& ts, const Potential& q, FundamentalSystem fs)
    : n_(ts.size()), fs_(std::move(fs)) {
    const Complex lambda = fs_.rho * fs_.rho;
    for (std::size_t k = 0; k + 1 < n_; ++k) alpha_.push_back(jump_matrix(ts.gap(k), q.right_value(k), lambda));
    assemble();
}

Complex BlockSystem::p(std::size_t k, int nu) const {
    const auto& a = alpha_.at(k - 2);
    return a(nu - 1, 0) * fs_.y1_b[k - 2] + a(nu - 1, 1) * fs_.dy1_b[k - 2];
}

Complex BlockSystem::q(std::size_t k, int nu) const {
    const auto& a = alpha_.at(k - 2);
    return a(nu - 1, 0) * fs_.y2_b[k - 2] + a(nu - 1, 1) * fs_.dy2_b[k - 2];
}

Complex BlockSystem::r(std::size_t k, int nu) const {
    return nu == 1 ? -fs_.y1_a[k - 1] : -fs_.dy1_a[k - 1];
}

Complex BlockSystem::s(std::size_t k, int nu) const {
    return nu == 1 ? -fs_.y2_a[k - 1] : -fs_.dy2_a[k - 1];
}

void BlockSystem::assemble() {
    const auto dim = static_cast<Eigen::Index>(2 * n_);
    B_ = Eigen::MatrixXcd::Zero(dim, dim);
    for (std::size_t k = 1; k <= n_; ++k) {
        const auto row = static_cast<Eigen::Index>(2 * (k - 1));
        for (int nu = 1; nu <= 2; ++nu) {
            const Eigen::Index i = row + nu - 1;
            B_(i, row) = r(k, nu);
            B_(i, row + 1) = s(k, nu);
            if (k >= 2) {
                B_(i, row - 2) = p(k, nu);
                B_(i, row - 1) = q(k, nu);
            }
        }
    }
}

Eigen::MatrixXcd BlockSystem::D(int j) const {
    const auto dim = static_cast<Eigen::Index>(2 * n_);
    Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(dim, dim);
    d(0, 0) = r(1, j + 1);
    d(0, 1) = s(1, j + 1);
    if (dim > 2) d.block(1, 0, dim - 2, dim) = B_.block(2, 0, dim - 2, dim);
    d(dim - 1, dim - 2) = fs_.y1_b[n_ - 1];
    d(dim - 1, dim - 1) = fs_.y2_b[n_ - 1];
    return d;
}

std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> BlockSystem::minor_indices(
    int j, std::size_t k) const {
    if (k < 1 || k > n_) throw Error(Errc::kDomain, "minor index k out of range");
    const auto dim = static_cast<Eigen::Index>(2 * n_);
    const auto first = static_cast<Eigen::Index>(2 * (n_ - k));
    std::vector<Eigen::Index> rows, cols;
    for (Eigen::Index c = first; c < dim; ++c) cols.push_back(c);
    if (j == 1 || k == n_) {
        rows = cols;
    } else {
        rows.push_back(first - 1);
        for (Eigen::Index i = first + 1; i < dim; ++i) rows.push_back(i);
    }
    return {rows, cols};
}

Complex BlockSystem::minor_dense(int j, std::size_t k) const {
    const auto [rows, cols] = minor_indices(j, k);
    const Eigen::MatrixXcd d = D(j);
    const auto m = static_cast<Eigen::Index>(rows.size());
    Eigen::MatrixXcd sub(m, m);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index c = 0; c < m; ++c) sub(i, c) = d(rows[i], cols[c]);
    return determinant(sub);
}

Complex BlockSystem::minor(int j, std::size_t k) const {
    if (k < 1 || k > n_) throw Error(Errc::kDomain, "minor index k out of range");
    const Complex y1 = fs_.y1_b[n_ - 1], y2 = fs_.y2_b[n_ - 1];
    // k = 1: rows (r, s) of segment N with the terminal row.
    Complex d0 = r(n_, 1) * y2 - s(n_, 1) * y1;
    Complex d1 = r(n_, 2) * y2 - s(n_, 2) * y1;
    for (std::size_t m = 1; m < k; ++m) {
        const std::size_t seg = n_ - m;  // segment N-n of the expansion
        const Complex qa = q(seg + 1, 1) * d1 - q(seg + 1, 2) * d0;
        const Complex pa = p(seg + 1, 1) * d1 - p(seg + 1, 2) * d0;
        const Complex n0 = r(seg, 1) * qa - s(seg, 1) * pa;
        const Complex n1 = r(seg, 2) * qa - s(seg, 2) * pa;
        d0 = n0;
        d1 = n1;
    }
    return j == 0 ? d0 : d1;
}

CramerValue cramer_delta(const TimeScale& ts, const Potential& q, Complex lambda, int j,
                         const ForwardOptions& opts) {
    if (j != 0 && j != 1) throw Error(Errc::kDomain, "cramer_delta: j must be 0 or 1");
    const BlockSystem sys(ts, q, SpectralPoint::from_lambda(lambda), opts);
    const auto lu = sys.D(j).partialPivLu();
    const Complex det_b = determinant(sys.B());
    CramerValue out;
    out.value = (j == 0 ? -1.0 : 1.0) * lu.determinant() / det_b;
    out.rcond = lu.rcond();
    out.ill_conditioned = out.rcond < 1e-12;
    return out;
}

PhiCoefficients phi_cramer(const TimeScale& ts, const Potential& q, Complex lambda,
                           const ForwardOptions& opts) {
    const BlockSystem sys(ts, q, SpectralPoint::from_lambda(lambda), opts);
    const std::size_t n = ts.size();
    const auto& fs = sys.fundamental();
    const Complex dn1 = sys.minor(1, n);
    const Complex dn0 = sys.minor(0, n);
    if (std::abs(dn1) < opts.pole_threshold * std::max(std::abs(sys.B().partialPivLu().determinant()),
                                                       std::abs(dn0))) {
        std::ostringstream os;
        os << "lambda=" << lambda << " is an eigenvalue of L1 (Weyl function pole)";
        throw Error(Errc::kPole, os.str());
    }
    PhiCoefficients out;
    if (n == 1) {
        out.A1 = -fs.y2_b[0] / dn1;
        out.A2 = fs.y1_b[0] / dn1;
    } else {
        const Complex m0 = sys.minor(0, n - 1), m1 = sys.minor(1, n - 1);
        out.A1 = (sys.q(2, 2) * m0 - sys.q(2, 1) * m1) / dn1;
        out.A2 = (sys.p(2, 1) * m1 - sys.p(2, 2) * m0) / dn1;
    }
    out.M = out.A1 * fs.y1_a[0] + out.A2 * fs.y2_a[0];
    return out;
}

Complex AsymptoticModel::f(int j, std::size_t k, Complex rho) const {
    const double l = ts_.segment(ts_.size() - k).length();
    return j == 0 ? std::cos(rho * l) : -kI * std::sin(rho * l);
}

Complex AsymptoticModel::alpha22(const Potential& q, std::size_t gap, Complex lambda) const {
    return jump_matrix(ts_.gap(gap), q.right_value(gap), lambda)(1, 1);
}

Complex AsymptoticModel::leading_delta(const Potential& q, Complex rho, int j) const {
    const std::size_t n = ts_.size();
    const Complex lambda = rho * rho;
    if (n == 1) return ipow(-kI * rho, j - 1) * f(1 - j, 1, rho);
    Complex v = ipow(-kI * rho, j - 1) * f(j, n, rho) * f(1, 1, rho);
    for (std::size_t l = 1; l < n; ++l) v *= alpha22(q, l - 1, lambda);
    for (std::size_t l = 2; l < n; ++l) v *= f(0, l, rho);
    return v;
}

Complex AsymptoticModel::leading_minor(const Potential& q, Complex rho, int j, std::size_t k) const {
    const std::size_t n = ts_.size();
    const Complex lambda = rho * rho;
    if (k == 1) return -2.0 * ipow(kI * rho, j) * f(1 - j, 1, rho);
    Complex v = std::pow(Complex(-2.0), static_cast<int>(k)) * ipow(kI * rho, static_cast<int>(k) + j - 1) *
                f(j, k, rho) * f(1, 1, rho);
    for (std::size_t l = 1; l < k; ++l) v *= alpha22(q, n - l - 1, lambda);
    for (std::size_t l = 2; l < k; ++l) v *= f(0, l, rho);
    return v;
}

Complex AsymptoticModel::g(Complex rho, int j) const {
    const std::size_t n = ts_.size();
    if (n == 1) return ipow(-kI * rho, j - 1) * f(1 - j, 1, rho);
    Complex v = ipow(-kI * rho, 2 * static_cast<int>(n) + j - 3) * f(j, n, rho) * f(1, 1, rho);
    for (std::size_t l = 0; l + 1 < n; ++l) v *= ts_.gap(l) * ts_.gap(l);
    for (std::size_t l = 2; l < n; ++l) v *= f(0, l, rho);
    return v;
}

namespace {

// log cos z and log(-i sin z), stable for large |Im z|.
Complex log_cos(Complex z) {
    if (std::abs(z.imag()) < 30.0) return std::log(std::cos(z));
    const Complex s = z.imag() > 0.0 ? 1.0 : -1.0;
    return -s * kI * z + std::log((1.0 + std::exp(2.0 * s * kI * z)) / 2.0);
}

Complex log_misin(Complex z) {
    if (std::abs(z.imag()) < 30.0) return std::log(-kI * std::sin(z));
    // -i sin z = -(e^{iz} - e^{-iz}) / 2
    if (z.imag() > 0.0) return -kI * z + std::log((1.0 - std::exp(2.0 * kI * z)) / 2.0);
    return kI * z + std::log((std::exp(-2.0 * kI * z) - 1.0) / 2.0);
}

}  // namespace

Complex AsymptoticModel::log_g(Complex rho, int j) const {
    const std::size_t n = ts_.size();
    auto log_f = [&](int jj, std::size_t k) {
        const double l = ts_.segment(n - k).length();
        return jj == 0 ? log_cos(rho * l) : log_misin(rho * l);
    };
    if (n == 1) return static_cast<double>(j - 1) * std::log(-kI * rho) + log_f(1 - j, 1);
    Complex v = static_cast<double>(2 * static_cast<int>(n) + j - 3) * std::log(-kI * rho) + log_f(j, n) +
                log_f(1, 1);
    for (std::size_t l = 0; l + 1 < n; ++l) v += 2.0 * std::log(ts_.gap(l));
    for (std::size_t l = 2; l < n; ++l) v += log_f(0, l);
    return v;
}

}  // namespace slts
