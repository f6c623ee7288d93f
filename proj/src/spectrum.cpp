#include "slts/spectrum.hpp"

#include <algorithm>
#include <boost/math/tools/roots.hpp>
#include <cmath>
#include <map>
#include <numbers>
#include <sstream>

#include "slts/matrixform.hpp"
#include "slts/parallel.hpp"

namespace slts {

namespace {

double cluster_offset(std::size_t nu, std::size_t n, int j) {
    const double dn = nu == n ? 1.0 : 0.0;
    const double d1 = nu == 1 ? 1.0 : 0.0;
    return (1.0 - dn - j * d1) / 2.0;
}

int sign(double v) { return v > 0.0 ? 1 : (v < 0.0 ? -1 : 0); }

}  // namespace

std::vector<Seed> asymptotic_seeds(const TimeScale& ts, int j, std::size_t K) {
    std::vector<Seed> out;
    const std::size_t n = ts.size();
    for (std::size_t nu = 1; nu <= n; ++nu) {
        const double spacing = std::numbers::pi / ts.segment(nu - 1).length();
        const double off = cluster_offset(nu, n, j);
        for (std::size_t k = 1; k <= K; ++k) out.push_back({nu, k, spacing * (static_cast<double>(k) - off)});
    }
    return out;
}

std::vector<Seed> merged_seeds(const TimeScale& ts, int j, double rho_max) {
    std::vector<Seed> out;
    const std::size_t n = ts.size();
    for (std::size_t nu = 1; nu <= n; ++nu) {
        const double spacing = std::numbers::pi / ts.segment(nu - 1).length();
        const double off = cluster_offset(nu, n, j);
        for (std::size_t k = 1;; ++k) {
            const double rho = spacing * (static_cast<double>(k) - off);
            if (rho > rho_max) break;
            out.push_back({nu, k, rho});
        }
    }
    std::sort(out.begin(), out.end(), [](const Seed& a, const Seed& b) {
        return a.rho != b.rho ? a.rho < b.rho : a.nu < b.nu;
    });
    return out;
}

double Eigenvalue::deviation() const {
    if (nu == 0) return 0.0;
    const Complex rho = SpectralPoint::from_lambda(lambda).rho;
    return std::abs(rho - seed_rho);
}

std::vector<double> SpectrumList::values() const {
    std::vector<double> v;
    for (const auto& e : eigenvalues)
        for (int m = 0; m < e.multiplicity; ++m) v.push_back(e.lambda);
    return v;
}

void label_clusters(const TimeScale& ts, SpectrumList& spec) {
    const std::size_t unclustered = ts.size() + static_cast<std::size_t>(spec.j) - 1;
    std::size_t clustered = 0;
    for (const auto& e : spec.eigenvalues) clustered += static_cast<std::size_t>(e.multiplicity);
    clustered = clustered > unclustered ? clustered - unclustered : 0;
    double rho_max = 1.0;
    std::vector<Seed> seeds;
    while ((seeds = merged_seeds(ts, spec.j, rho_max)).size() < clustered) rho_max *= 2.0;
    std::size_t n = 0, used = 0;
    for (auto& e : spec.eigenvalues) {
        e.nu = e.k = 0;
        e.seed_rho = 0.0;
        if (n >= unclustered && used < seeds.size()) {
            e.nu = seeds[used].nu;
            e.k = seeds[used].k;
            e.seed_rho = seeds[used].rho;
        }
        for (int m = 0; m < e.multiplicity; ++m, ++n)
            if (n >= unclustered) ++used;
    }
}

SpectrumList find_eigenvalues(const TimeScale& ts, const Potential& q, int j,
                              std::optional<std::size_t> count, std::optional<double> lambda_max,
                              const SpectrumOptions& opts) {
    if (j != 0 && j != 1) throw Error(Errc::kDomain, "find_eigenvalues: j must be 0 or 1");
    if (!q.is_real())
        throw Error(Errc::kUnsupported, "eigenvalue search needs a real potential; complex q is evaluate-only");
    if (!count && !lambda_max) throw Error(Errc::kInvalidInput, "find_eigenvalues: give count or lambda_max");

    SpectrumList spec;
    spec.j = j;
    if (count && *count == 0) return spec;

    auto f = [&](double lam) { return char_delta(ts, q, lam, j, opts.forward).real(); };

    const double lam_min = -(1.0 + q.sup_norm()) * 10.0;
    double l_max = 0.0;
    for (const auto& s : ts.segments()) l_max = std::max(l_max, s.length());
    const double rho_step = opts.scan_fraction * std::numbers::pi / l_max;

    // Sample abscissae in lambda: uniform on [lam_min, 0], then uniform in rho.
    auto abscissa = [&](std::size_t i) {
        constexpr std::size_t kNegative = 128;
        if (i <= kNegative) return lam_min * (1.0 - static_cast<double>(i) / kNegative);
        const double rho = rho_step * static_cast<double>(i - kNegative);
        return rho * rho;
    };

    std::vector<double> xs, fs;
    std::vector<std::pair<double, double>> brackets;  // (lo, hi) in lambda
    std::vector<std::pair<double, int>> touching;     // double-root candidates

    auto refine_min = [&](double a, double b, int s) {
        // Golden-section minimisation of s * f on [a, b].
        const double g = (std::sqrt(5.0) - 1.0) / 2.0;
        double c = b - g * (b - a), d = a + g * (b - a);
        double fc = s * f(c), fd = s * f(d);
        for (int it = 0; it < 80 && (b - a) > 1e-15 * std::max(1.0, std::abs(a)); ++it) {
            if (fc < fd) {
                b = d; d = c; fd = fc; c = b - g * (b - a); fc = s * f(c);
            } else {
                a = c; c = d; fc = fd; d = a + g * (b - a); fd = s * f(d);
            }
            if (fc < 0.0 || fd < 0.0) break;
        }
        return fc < fd ? std::pair{c, fc} : std::pair{d, fd};
    };

    auto enough = [&]() {
        if (count) return brackets.size() + 2 * touching.size() >= *count;
        return !xs.empty() && xs.back() > *lambda_max;
    };

    constexpr std::size_t kBatch = 64;
    std::size_t next = 0;
    while (!enough()) {
        const std::size_t start = next;
        std::vector<double> bx(kBatch), bf(kBatch);
        for (std::size_t i = 0; i < kBatch; ++i) bx[i] = abscissa(start + i);
        parallel_for(kBatch, opts.threads, [&](std::size_t i) { bf[i] = f(bx[i]); });
        next += kBatch;
        const std::size_t base = xs.size();
        xs.insert(xs.end(), bx.begin(), bx.end());
        fs.insert(fs.end(), bf.begin(), bf.end());
        for (std::size_t i = std::max<std::size_t>(base, 1); i < xs.size(); ++i) {
            if (lambda_max && xs[i - 1] > *lambda_max) break;
            if (fs[i - 1] == 0.0) {
                brackets.emplace_back(xs[i - 1], xs[i - 1]);
                continue;
            }
            if (sign(fs[i - 1]) * sign(fs[i]) < 0) {
                brackets.emplace_back(xs[i - 1], xs[i]);
                continue;
            }
            // Local minimum of |f| without a sign change: touching or close pair.
            if (i >= 2 && sign(fs[i - 2]) == sign(fs[i - 1]) && sign(fs[i - 1]) == sign(fs[i]) &&
                std::abs(fs[i - 1]) < std::abs(fs[i - 2]) && std::abs(fs[i - 1]) < std::abs(fs[i])) {
                const int s = sign(fs[i - 1]);
                const auto [xm, fm] = refine_min(xs[i - 2], xs[i], s);
                const double scale = std::max(std::abs(fs[i - 2]), std::abs(fs[i]));
                if (fm < 0.0) {
                    brackets.emplace_back(xs[i - 2], xm);
                    brackets.emplace_back(xm, xs[i]);
                } else if (fm <= opts.double_root_tol * scale) {
                    touching.emplace_back(xm, s);
                }
            }
        }
        // Drop duplicate brackets produced at batch joins.
        std::sort(brackets.begin(), brackets.end());
        brackets.erase(std::unique(brackets.begin(), brackets.end()), brackets.end());
        if (next > 2'000'000) throw Error(Errc::kConvergence, "eigenvalue scan did not terminate");
    }

    std::vector<Eigenvalue> found(brackets.size());
    parallel_for(brackets.size(), opts.threads, [&](std::size_t i) {
        auto [lo, hi] = brackets[i];
        Eigenvalue e;
        e.bracket_lo = lo;
        e.bracket_hi = hi;
        const double flo = f(lo), fhi = f(hi);
        const double scale = std::max({std::abs(flo), std::abs(fhi), 1e-300});
        if (lo == hi) {
            e.lambda = lo;
        } else {
            auto tol = [&](double a, double b) {
                return std::abs(b - a) <= opts.root_tol * std::max({std::abs(a), std::abs(b), 1.0});
            };
            std::uintmax_t iters = 200;
            const auto r = boost::math::tools::toms748_solve(f, lo, hi, flo, fhi, tol, iters);
            e.lambda = 0.5 * (r.first + r.second);
        }
        e.residual = std::abs(f(e.lambda)) / scale;
        found[i] = e;
    });
    for (const auto& [x, s] : touching) {
        Eigenvalue e;
        e.lambda = e.bracket_lo = e.bracket_hi = x;
        e.multiplicity = 2;
        e.residual = std::abs(f(x));
        found.push_back(e);
        std::ostringstream os;
        os << "double-root candidate at lambda=" << x << " (no sign change)";
        spec.warnings.push_back(os.str());
    }
    std::sort(found.begin(), found.end(), [](const Eigenvalue& a, const Eigenvalue& b) { return a.lambda < b.lambda; });
    if (lambda_max)
        found.erase(std::remove_if(found.begin(), found.end(), [&](const Eigenvalue& e) { return e.lambda > *lambda_max; }),
                    found.end());
    if (count) {
        std::size_t total = 0, keep = 0;
        while (keep < found.size() && total < *count) total += static_cast<std::size_t>(found[keep++].multiplicity);
        found.resize(keep);
    }
    spec.eigenvalues = std::move(found);
    label_clusters(ts, spec);

    // Completeness: compare with the number of seeds below the last root.
    if (!spec.eigenvalues.empty()) {
        const double last = spec.eigenvalues.back().lambda;
        const double rho_last = last > 0.0 ? std::sqrt(last) : 0.0;
        const std::size_t predicted = ts.size() + static_cast<std::size_t>(j) - 1 +
                                      merged_seeds(ts, j, rho_last + 0.5 * rho_step).size();
        const std::size_t got = spec.values().size();
        const std::size_t diff = predicted > got ? predicted - got : got - predicted;
        if (diff > 1) {
            std::ostringstream os;
            os << "completeness: found " << got << " eigenvalues below " << last << ", seeds predict "
               << predicted << " (possible missed double root)";
            spec.warnings.push_back(os.str());
        }
    }
    return spec;
}

HadamardModel::HadamardModel(const TimeScale& ts, int j, std::vector<double> zeros,
                             std::size_t zero_multiplicity, std::vector<TailCluster> tail)
    : ts_(ts), j_(j), zeros_(std::move(zeros)), s_(zero_multiplicity), tail_(std::move(tail)) {}

namespace {

// sum_{k >= a} (k - o)^{-2p} by Euler-Maclaurin from an integer start.
double power_tail(double u, int p) {
    const double e = 2.0 * p;
    // integral + f/2 - f'/12 + f'''/720 with f(x) = x^{-e}
    return std::pow(u, 1.0 - e) / (e - 1.0) + 0.5 * std::pow(u, -e) + e / 12.0 * std::pow(u, -e - 1.0) -
           e * (e + 1.0) * (e + 2.0) / 720.0 * std::pow(u, -e - 3.0);
}

}  // namespace

Complex HadamardModel::log_p(Complex lambda) const {
    if (lambda == 0.0) {
        if (s_ > 0) return {-std::numeric_limits<double>::infinity(), 0.0};
    }
    Complex acc = static_cast<double>(s_) * (s_ > 0 ? std::log(lambda) : Complex(0.0));
    for (double z : zeros_) {
        const Complex t = 1.0 - lambda / z;
        if (t == 0.0) return {-std::numeric_limits<double>::infinity(), 0.0};
        acc += std::log(t);
    }
    const double mag = std::sqrt(std::abs(lambda));
    for (const auto& c : tail_) {
        // Explicit terms until |lambda| / rho_k^2 is tiny, then the power-series remainder.
        const double u_min = std::max(2000.0, 100.0 * (mag + std::sqrt(std::abs(c.beta))) / c.spacing);
        std::size_t k = c.first_k;
        for (; static_cast<double>(k) - c.offset < u_min; ++k) {
            const double rho = c.spacing * (static_cast<double>(k) - c.offset);
            acc += std::log(1.0 - lambda / (rho * rho + 2.0 * c.beta));
        }
        // 1 - lambda / (rho^2 + 2 beta) = (1 - (lambda - 2 beta) / rho^2) / (1 + 2 beta / rho^2)
        const double u = static_cast<double>(k) - c.offset;
        auto remainder = [&](Complex x) {
            return x * power_tail(u, 1) + x * x / 2.0 * power_tail(u, 2) + x * x * x / 3.0 * power_tail(u, 3);
        };
        const double s2 = c.spacing * c.spacing;
        acc -= remainder((lambda - 2.0 * c.beta) / s2) - remainder(Complex(-2.0 * c.beta / s2));
    }
    return acc;
}

Complex HadamardModel::p(Complex lambda) const {
    const Complex l = log_p(lambda);
    if (std::isinf(l.real()) && l.real() < 0.0) return 0.0;
    return std::exp(l);
}

Complex HadamardModel::operator()(Complex lambda) const {
    const Complex l = log_p(lambda);
    if (std::isinf(l.real()) && l.real() < 0.0) return 0.0;
    return std::exp(std::log(C_) + l);
}

void HadamardModel::fit_constant(double T, double max_spread) {
    const AsymptoticModel am(ts_);
    auto ratio = [&](double t) {
        const auto sp = SpectralPoint::from_lambda(-t);
        return std::exp(am.log_g(sp.rho, j_) - log_p(-t));
    };
    const Complex e1 = ratio(T), e2 = ratio(2.0 * T), e3 = ratio(4.0 * T);
    // Error ~ a / rho + b / rho^2: eliminate rho^{-1} (ratio sqrt 2), then rho^{-2} (ratio 2).
    const double r = std::numbers::sqrt2;
    const Complex r12 = (r * e2 - e1) / (r - 1.0);
    const Complex r23 = (r * e3 - e2) / (r - 1.0);
    C_ = 2.0 * r23 - r12;
    spread_ = std::abs(r23 - r12) / std::abs(C_);
    if (!(spread_ <= max_spread) || C_ == 0.0) {
        std::ostringstream os;
        os << "Hadamard constant C_" << j_ << " did not converge (relative spread " << spread_ << ")";
        throw Error(Errc::kTailModel, os.str());
    }
}

namespace {

struct ClusterFit {
    SpectrumList kept;                // first K eigenvalues, relabeled
    std::vector<std::size_t> used;    // measured members per cluster
    std::vector<double> beta;         // mean (rho - seed) * seed over the upper half
    std::vector<double> worst;        // max |rho - seed| / spacing over the upper half
};

ClusterFit fit_clusters(const SpectrumList& spec, const TimeScale& ts, std::size_t K) {
    std::vector<double> all = spec.values();
    std::sort(all.begin(), all.end());
    if (K == 0 || K > all.size()) K = all.size();
    all.resize(K);
    ClusterFit f;
    f.kept.j = spec.j;
    for (double z : all) f.kept.eigenvalues.push_back({.lambda = z, .bracket_lo = z, .bracket_hi = z, .residual = 0.0});
    label_clusters(ts, f.kept);
    const std::size_t n = ts.size();
    f.used.assign(n, 0);
    for (const auto& e : f.kept.eigenvalues)
        if (e.nu > 0) ++f.used[e.nu - 1];
    f.beta.assign(n, 0.0);
    f.worst.assign(n, 0.0);
    for (std::size_t nu = 1; nu <= n; ++nu) {
        const double spacing = std::numbers::pi / ts.segment(nu - 1).length();
        std::size_t count = 0;
        for (const auto& e : f.kept.eigenvalues) {
            if (e.nu != nu || 2 * e.k <= f.used[nu - 1]) continue;
            const double rho = e.lambda > 0.0 ? std::sqrt(e.lambda) : 0.0;
            f.beta[nu - 1] += (rho - e.seed_rho) * e.seed_rho;
            f.worst[nu - 1] = std::max(f.worst[nu - 1], std::abs(rho - e.seed_rho) / spacing);
            ++count;
        }
        if (count > 0) f.beta[nu - 1] /= static_cast<double>(count);
    }
    return f;
}

}  // namespace

std::vector<std::string> cluster_consistency(const SpectrumList& spec, const TimeScale& ts, std::size_t K,
                                             const HadamardOptions& opts) {
    std::vector<std::string> notes;
    if (spec.eigenvalues.empty()) return notes;
    const ClusterFit f = fit_clusters(spec, ts, K);
    for (std::size_t nu = 0; nu < f.worst.size(); ++nu) {
        if (f.worst[nu] <= opts.consistency_tol) continue;
        std::ostringstream os;
        os << "spectrum j=" << spec.j << ", cluster " << nu + 1 << ": member " << f.worst[nu]
           << " spacings from its seed (missing or spurious eigenvalue?)";
        notes.push_back(os.str());
    }
    return notes;
}

HadamardModel hadamard_reconstruct(const SpectrumList& spec, const TimeScale& ts, std::size_t K,
                                   const HadamardOptions& opts) {
    if (spec.eigenvalues.empty()) throw Error(Errc::kInvalidInput, "Hadamard reconstruction needs a nonempty spectrum");
    const ClusterFit f = fit_clusters(spec, ts, K);

    double scale = 1.0;
    for (const auto& e : f.kept.eigenvalues) scale = std::max(scale, std::abs(e.lambda));
    std::vector<double> zeros;
    std::size_t s = 0;
    for (const auto& e : f.kept.eigenvalues) {
        if (std::abs(e.lambda) <= 1e-14 * scale) ++s;
        else zeros.push_back(e.lambda);
    }

    const std::size_t n = ts.size();
    std::vector<HadamardModel::TailCluster> tail;
    for (std::size_t nu = 1; nu <= n; ++nu) {
        const bool shift = opts.shift_tail && f.worst[nu - 1] <= opts.consistency_tol;
        tail.push_back({std::numbers::pi / ts.segment(nu - 1).length(), cluster_offset(nu, n, spec.j),
                        f.used[nu - 1] + 1, shift ? f.beta[nu - 1] : 0.0});
    }

    HadamardModel model(ts, spec.j, std::move(zeros), s, std::move(tail));
    model.fit_constant(1e3 * (1.0 + opts.q_bound), opts.max_spread);
    return model;
}

std::vector<WeylSample> weyl_from_spectra(const HadamardModel& d0, const HadamardModel& d1,
                                          const std::vector<Complex>& grid, double pole_threshold) {
    if (d0.j() != 0 || d1.j() != 1)
        throw Error(Errc::kInvalidInput, "weyl_from_spectra expects the L0 and L1 models in that order");
    std::vector<WeylSample> out;
    out.reserve(grid.size());
    for (const Complex lam : grid) {
        WeylSample w{lam, std::nullopt, {}};
        const Complex a = d0(lam), b = d1(lam);
        if (std::abs(b) < pole_threshold * std::max(1.0, std::abs(a))) w.note = "pole";
        else w.M = -a / b;
        out.push_back(w);
    }
    return out;
}

}  // namespace slts
