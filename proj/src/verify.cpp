#include "slts/verify.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <mutex>
#include <numbers>
#include <random>
#include <sstream>

#include "slts/inverse.hpp"
#include "slts/io.hpp"
#include "slts/matrixform.hpp"
#include "slts/parallel.hpp"

namespace slts {

namespace {

using Rng = std::mt19937_64;
constexpr double kPi = std::numbers::pi;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

// Segment lengths in [0.5, 1.5], gaps in [0.2, 1].
TimeScale random_scale(Rng& rng, std::size_t n) {
    std::vector<Segment> segs;
    double a = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
        double b = a + uniform(rng, 0.5, 1.5);
        segs.push_back({a, b});
        a = b + uniform(rng, 0.2, 1.0);
    }
    return TimeScale(segs);
}

Potential random_potential(Rng& rng, const TimeScale& ts, std::size_t degree, double bound) {
    std::vector<std::vector<Complex>> c(ts.size());
    for (auto& seg : c)
        for (std::size_t i = 0; i <= degree; ++i) seg.emplace_back(uniform(rng, -bound, bound), 0.0);
    return Potential(ts, c);
}

// 100 real lambda in [-100, 100] and 20 complex lambda with |lambda| <= 100.
std::vector<Complex> lambda_family(Rng& rng) {
    std::vector<Complex> out;
    for (int i = 0; i < 100; ++i) out.emplace_back(uniform(rng, -100, 100), 0.0);
    for (int i = 0; i < 20; ++i) out.push_back(std::polar(uniform(rng, 1, 100), uniform(rng, -kPi, kPi)));
    return out;
}

struct Family {
    TimeScale ts;
    std::vector<Potential> q;
};

// Criterion-1 family: one N = 3 scale, 20 cubics with coefficients in [-5, 5].
Family wronskian_family(std::uint64_t seed) {
    Rng rng(seed * 1000 + 1);
    Family f{random_scale(rng, 3), {}};
    for (int i = 0; i < 20; ++i) f.q.push_back(random_potential(rng, f.ts, 3, 5.0));
    return f;
}

// Criterion-6 family on [0,1] U [2,3] with sup |q| <= 1 (|T_i| <= 1 on each segment).
std::vector<Potential> bounded_family(const TimeScale& ts, std::uint64_t seed) {
    Rng rng(seed * 1000 + 6);
    std::vector<Potential> out;
    for (int i = 0; i < 3; ++i) out.push_back(random_potential(rng, ts, 2, 1.0 / 3.0));
    return out;
}

double rel(Complex a, Complex b, double scale = 0.0) { return std::abs(a - b) / std::max(std::abs(b), scale); }

// Closed-form transfer matrix of -y'' = lambda y over the whole scale (q == 0).
Eigen::Matrix2cd free_transfer(const TimeScale& ts, Complex lambda) {
    auto rho = SpectralPoint::from_lambda(lambda).rho;
    Eigen::Matrix2cd t = Eigen::Matrix2cd::Identity();
    for (std::size_t k = 0; k < ts.size(); ++k) {
        double l = ts.segment(k).length();
        Eigen::Matrix2cd s;
        s << std::cos(rho * l), std::sin(rho * l) / rho, -rho * std::sin(rho * l), std::cos(rho * l);
        t = s * t;
        if (k + 1 < ts.size()) {
            double d = ts.gap(k);
            Eigen::Matrix2cd g;
            g << 1.0, d, -d * lambda, 1.0 - d * d * lambda;
            t = g * t;
        }
    }
    return t;
}

double max_abs_diff(const TimeScale& ts, const Potential& a, const Potential& b) {
    double e = 0.0;
    for (std::size_t k = 0; k < ts.size(); ++k) {
        auto s = ts.segment(k);
        for (int i = 0; i <= 200; ++i) {
            double x = s.a + s.length() * i / 200.0;
            e = std::max(e, std::abs(a(k, x) - b(k, x)));
        }
    }
    return e;
}

// Worst value over parallel work items.
struct Worst {
    std::mutex m;
    double v = 0.0;
    void add(double x) {
        std::lock_guard lock(m);
        if (!(x <= v)) v = x;  // NaN sticks
    }
};

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(3);
    os << v;
    return os.str();
}

CriterionResult wronskian_conservation(const VerifyOptions& o) {
    CriterionResult r{1, "Wronskian conservation", false, 0, 1e-8, ""};
    auto fam = wronskian_family(o.seed);
    Rng rng(o.seed * 1000 + 101);
    auto lams = lambda_family(rng);
    Worst w;
    std::atomic<int> skipped{0};
    parallel_for(fam.q.size() * lams.size(), o.threads, [&](std::size_t i) {
        const auto& q = fam.q[i / lams.size()];
        auto lam = lams[i % lams.size()];
        auto sc = solve_sc(fam.ts, q, lam);
        PhiTrace ph;
        try {
            ph = solve_phi(fam.ts, q, lam);
        } catch (const Error& e) {
            if (e.code() != Errc::kPole) throw;
            ++skipped;
            return;
        }
        for (std::size_t k = 0; k < fam.ts.size(); ++k) {
            w.add(std::abs(wronskian(sc.C.at_a[k], ph.phi.at_a[k]) - 1.0));
            w.add(std::abs(wronskian(sc.C.at_b[k], ph.phi.at_b[k]) - 1.0));
        }
    });
    r.value = w.v;
    r.pass = r.value < r.threshold;
    r.detail = "20 cubics x 120 lambda, N=3, max |C Phi' - C' Phi - 1| at all endpoints";
    if (skipped) r.detail += ", " + std::to_string(skipped.load()) + " pole samples skipped";
    return r;
}

CriterionResult free_oracle(const VerifyOptions& o) {
    CriterionResult r{2, "q=0 closed-form oracle", false, 0, 1e-12, ""};
    Rng rng(o.seed * 1000 + 2);
    Worst w;
    for (std::size_t n = 1; n <= 3; ++n) {
        auto ts = random_scale(rng, n);
        auto q = Potential::zero(ts);
        std::vector<Complex> lams;
        for (int i = 0; i < 25; ++i) lams.emplace_back(uniform(rng, -100, 100), 0.0);
        for (int i = 0; i < 25; ++i) lams.push_back(std::polar(uniform(rng, 1, 100), uniform(rng, -kPi, kPi)));
        parallel_for(lams.size(), o.threads, [&](std::size_t i) {
            auto t = free_transfer(ts, lams[i]);
            double scale = t.norm();
            w.add(rel(char_delta(ts, q, lams[i], 0), t(0, 1), scale));
            w.add(rel(char_delta(ts, q, lams[i], 1), t(0, 0), scale));
        });
    }
    r.value = w.v;
    r.pass = r.value < r.threshold;
    r.detail = "N=1,2,3, 50 lambda each; |a-b| / max(|b|, |T|_F) against the trig transfer product";
    return r;
}

CriterionResult det_b(const VerifyOptions& o) {
    CriterionResult r{3, "det B exactness", false, 0, 1e-9, ""};
    Rng rng(o.seed * 1000 + 3);
    Worst w;
    const Complex rhos[] = {{1, 0}, {0, 5}, {3, 4}};
    for (std::size_t n = 2; n <= 3; ++n) {
        auto ts = random_scale(rng, n);
        for (int s = 0; s < 5; ++s) {
            auto q = random_potential(rng, ts, 3, 2.0);
            for (auto rho : rhos) {
                BlockSystem bs(ts, q, SpectralPoint::from_rho(rho));
                Complex expect = std::pow(Complex(0, -2) * rho, static_cast<double>(n));
                w.add(std::abs(bs.B().determinant() - expect) / std::pow(std::abs(2.0 * rho), n));
            }
        }
    }
    r.value = w.v;
    r.pass = r.value < r.threshold;
    r.detail = "N=2,3, 5 random real cubics, rho in {1, 5i, 3+4i}";
    return r;
}

CriterionResult pathways(const VerifyOptions& o) {
    CriterionResult r{4, "Pathway equivalence", false, 0, 1e-8, ""};
    Rng rng(o.seed * 1000 + 4);
    Worst cramer, minors;
    for (std::size_t n = 2; n <= 3; ++n) {
        auto ts = random_scale(rng, n);
        auto q = random_potential(rng, ts, 3, 2.0);
        std::vector<Complex> lams;
        for (int i = 0; i < 25; ++i) lams.emplace_back(uniform(rng, -100, 100), 0.0);
        for (int i = 0; i < 25; ++i) lams.push_back(std::polar(uniform(rng, 1, 100), uniform(rng, -kPi, kPi)));
        parallel_for(lams.size(), o.threads, [&](std::size_t i) {
            auto tr = solve_sc(ts, q, lams[i]);
            auto end = [](const SolutionState& s) { return std::hypot(std::abs(s.value()), std::abs(s.derivative())); };
            double scale = std::hypot(end(tr.S.at_b.back()), end(tr.C.at_b.back()));
            cramer.add(rel(cramer_delta(ts, q, lams[i], 0).value, tr.delta0, scale));
            cramer.add(rel(cramer_delta(ts, q, lams[i], 1).value, tr.delta1, scale));
            BlockSystem bs(ts, q, SpectralPoint::from_lambda(lams[i]));
            for (int j = 0; j <= 1; ++j)
                for (std::size_t k = 1; k <= n; ++k) minors.add(rel(bs.minor(j, k), bs.minor_dense(j, k)));
        });
    }
    r.value = cramer.v;
    r.pass = cramer.v < 1e-8 && minors.v < 1e-10;
    r.detail = "Cramer vs shooting (scale-relative) " + fmt(cramer.v) + " < 1e-8; minor recursion vs dense " +
               fmt(minors.v) + " < 1e-10";
    return r;
}

CriterionResult weyl_identity(const VerifyOptions& o) {
    CriterionResult r{5, "Weyl identity", false, 0, 1e-8, ""};
    auto fam = wronskian_family(o.seed);
    Rng rng(o.seed * 1000 + 101);
    auto lams = lambda_family(rng);
    Worst w;
    parallel_for(fam.q.size() * lams.size(), o.threads, [&](std::size_t i) {
        const auto& q = fam.q[i / lams.size()];
        auto lam = lams[i % lams.size()];
        Complex m;
        try {
            m = weyl(fam.ts, q, lam);
        } catch (const Error& e) {
            if (e.code() != Errc::kPole) throw;
            return;
        }
        auto tr = solve_sc(fam.ts, q, lam);
        w.add(rel(m, -tr.delta0 / tr.delta1));
    });
    r.value = w.v;
    r.pass = r.value < r.threshold;
    r.detail = "criterion-1 family, M from the Weyl solution vs -Delta0/Delta1";
    return r;
}

// Mean |rho - seed| over the first and last ten of the first 40 clustered eigenvalues.
struct ClusterTrend {
    double first = 0.0;
    double last = 0.0;
    double max = 0.0;
};

ClusterTrend cluster_trend(const TimeScale& ts, const Potential& q, int j, unsigned threads) {
    SpectrumOptions so;
    so.threads = threads;
    auto spec = find_eigenvalues(ts, q, j, 40 + ts.size() + 1, std::nullopt, so);
    std::vector<double> dev;
    for (auto& e : spec.eigenvalues)
        if (e.nu > 0 && dev.size() < 40) dev.push_back(e.deviation());
    if (dev.size() < 40) throw Error(Errc::kResolution, "fewer than 40 clustered eigenvalues");
    ClusterTrend t;
    for (int i = 0; i < 10; ++i) {
        t.first += dev[i] / 10;
        t.last += dev[30 + i] / 10;
    }
    t.max = *std::max_element(dev.begin(), dev.end());
    return t;
}

CriterionResult asymptotics(const VerifyOptions& o) {
    CriterionResult r{6, "Eigenvalue asymptotics", false, 0, 1e-10, ""};
    TimeScale ts({{0, 1}, {2, 3}});
    bool trend_ok = true;
    double worst_ratio = 0.0;
    for (auto& q : bounded_family(ts, o.seed))
        for (int j = 0; j <= 1; ++j) {
            auto t = cluster_trend(ts, q, j, o.threads);
            trend_ok = trend_ok && t.last < t.first;
            worst_ratio = std::max(worst_ratio, t.last / t.first);
        }
    double zero_dev = 0.0, zero_last = 0.0;
    for (int j = 0; j <= 1; ++j) {
        auto t = cluster_trend(ts, Potential::zero(ts), j, o.threads);
        zero_dev = std::max(zero_dev, t.max);
        zero_last = std::max(zero_last, t.last);
    }
    r.value = zero_dev;
    r.pass = trend_ok && zero_dev < r.threshold;
    r.detail = std::string("decay last10/first10 ") + (trend_ok ? "holds" : "fails") + " (worst ratio " +
               fmt(worst_ratio) + "); q=0 max deviation " + fmt(zero_dev) + ", last-10 mean " + fmt(zero_last) +
               " (root tolerance clause needs < 1e-10)";
    return r;
}

CriterionResult asymptotic_ratio(const VerifyOptions& o) {
    CriterionResult r{7, "Asymptotic ratio", false, 0, 0.05, ""};
    TimeScale ts({{0, 1}, {2, 3}});
    AsymptoticModel am(ts);
    auto sp = SpectralPoint::from_lambda(-1e4);
    double worst = 0.0;
    auto fam = bounded_family(ts, o.seed);
    fam.push_back(Potential::zero(ts));
    for (auto& q : fam)
        for (int j = 0; j <= 1; ++j) {
            auto d = char_delta(ts, q, sp.lambda, j);
            worst = std::max(worst, std::abs(std::exp(std::log(d) - am.log_g(sp.rho, j)) - 1.0));
        }
    r.value = worst;
    r.pass = r.value < r.threshold;
    r.detail = "|Delta_j / g_j - 1| at lambda = -1e4, criterion-6 family and q=0";
    return r;
}

CriterionResult hadamard(const VerifyOptions&) {
    CriterionResult r{8, "Hadamard reconstruction", false, 0, 1e-3, ""};
    TimeScale ts({{0, kPi}});
    SpectrumList spec;
    spec.j = 0;
    for (int n = 1; n <= 200; ++n) {
        Eigenvalue e{};
        e.lambda = e.bracket_lo = e.bracket_hi = static_cast<double>(n) * n;
        spec.eigenvalues.push_back(e);
    }
    auto model = hadamard_reconstruct(spec, ts, 200);
    double c_err = std::abs(model.constant() - kPi);
    auto direct = char_delta(ts, Potential::zero(ts), -4.0, 0);
    double d_err = rel(model(-4.0), direct);
    r.value = std::max(c_err, d_err);
    r.pass = c_err < 1e-3 && d_err < 1e-3;
    r.detail = "|C_0 - pi| = " + fmt(c_err) + ", relative Delta_0(-4) error " + fmt(d_err);
    return r;
}

CriterionResult inverse_weyl(const VerifyOptions& o) {
    CriterionResult r{9, "Inverse Problem 1 round trip", false, 0, 1e-3, ""};
    TimeScale ts({{0, 1}, {2, 3}});
    Rng rng(o.seed * 1000 + 9);
    std::vector<Complex> grid;
    for (int i = 0; i < 30; ++i) grid.emplace_back(-std::exp(std::log(60.0) * i / 29.0), 0.0);
    InverseOptions iopt;
    iopt.threads = o.threads;
    double worst = 0.0;
    bool clean = true;
    for (int s = 0; s < 3; ++s) {
        auto q = random_potential(rng, ts, 2, 1.0);
        auto data = WeylData::from_samples(weyl_sweep(ts, q, grid, {}, o.threads));
        auto res = solve_inverse_weyl(ts, data, iopt);
        worst = std::max(worst, max_abs_diff(ts, q, res.q));
        clean = clean && res.ok();
    }
    r.value = worst;
    r.pass = worst < r.threshold;
    r.detail = "3 random quadratics, 30 samples on [-60,-1]; flags " + std::string(clean ? "clean" : "raised");
    return r;
}

CriterionResult inverse_spectra(const VerifyOptions& o) {
    CriterionResult r{10, "Inverse Problem 2 round trip", false, 0, 5e-2, ""};
    TimeScale ts({{0, 1}, {2, 3}});
    Rng rng(o.seed * 1000 + 10);
    TwoSpectraOptions to;
    to.K = 30;
    to.inverse.threads = o.threads;
    SpectrumOptions so;
    so.threads = o.threads;
    double worst = 0.0;
    bool clean = true, deleted_flag = false;
    for (int s = 0; s < 3; ++s) {
        auto q = random_potential(rng, ts, 2, 1.0);
        auto s0 = find_eigenvalues(ts, q, 0, 30, std::nullopt, so);
        auto s1 = find_eigenvalues(ts, q, 1, 30, std::nullopt, so);
        auto res = solve_inverse_two_spectra(ts, s0, s1, to);
        worst = std::max(worst, max_abs_diff(ts, q, res.q));
        clean = clean && !res.misfit_flag;
        if (s == 0) {
            s0.eigenvalues.erase(s0.eigenvalues.begin() + 10);
            to.K = 29;
            auto del = solve_inverse_two_spectra(ts, s0, s1, to);
            to.K = 30;
            deleted_flag = del.misfit_flag;
        }
    }
    r.value = worst;
    r.pass = worst < r.threshold && clean && deleted_flag;
    r.detail = "3 random quadratics, K=30; clean flags " + std::string(clean ? "yes" : "no") +
               "; 11th Dirichlet eigenvalue deleted: misfit flag " + (deleted_flag ? "raised" : "NOT raised");
    return r;
}

CriterionResult match(const VerifyOptions& o) {
    CriterionResult r{11, "P1/P2 diagnostics", false, 0, 10.0, ""};
    TimeScale ts({{0, 1}, {2, 3}});
    Rng rng(o.seed * 1000 + 11);
    auto q = random_potential(rng, ts, 2, 1.0);
    auto qt_coeffs = std::vector<std::vector<Complex>>{q.segment(0).coeffs(), {}};
    for (int i = 0; i <= 2; ++i) qt_coeffs[1].emplace_back(uniform(rng, -1, 1), 0.0);
    Potential qt(ts, qt_coeffs);

    std::vector<Complex> lams;
    for (int i = 0; i < 16; ++i) {
        auto rho = std::polar(10.0 + 70.0 * i / 15.0, kPi / 4);
        lams.push_back(rho * rho);
    }
    std::vector<Complex> mixed = lams;
    for (double l : {-50.0, -5.0, 3.0, 17.0}) mixed.emplace_back(l, 0.0);
    double same = 0.0;
    for (auto& m : match_residual(ts, q, q, 0.5, mixed))
        same = std::max({same, std::abs(m.P1 - 1.0), std::abs(m.P2)});
    double bound = 0.0;
    for (auto& m : match_residual(ts, q, qt, 0.5, lams)) bound = std::max(bound, std::abs(m.P2) * std::norm(std::sqrt(m.lambda)));
    r.value = bound;
    r.pass = same < 1e-9 && bound < r.threshold;
    r.detail = "q = q~: max |(P1,P2) - (1,0)| " + fmt(same) + " < 1e-9; agreement on first segment: max |P2| |rho|^2 " +
               fmt(bound) + " < 10 on rho = r e^{i pi/4}, r in [10,80], x = 0.5";
    return r;
}

CriterionResult weyl_asymptotics(const VerifyOptions& o) {
    CriterionResult r{12, "M asymptotics", false, 0, 0.2, ""};
    auto fam = wronskian_family(o.seed);
    const Complex rhos[] = {std::polar(30.0, kPi / 4), {0, 50}};
    Worst w;
    parallel_for(fam.q.size(), o.threads, [&](std::size_t i) {
        for (auto rho : rhos) w.add(std::abs(Complex(0, 1) * rho * weyl(fam.ts, fam.q[i], rho * rho) - 1.0));
    });
    r.value = w.v;
    r.pass = r.value < r.threshold;
    r.detail = "criterion-1 family at rho = 30 e^{i pi/4} and 50i";
    return r;
}

}  // namespace

std::vector<CriterionResult> run_criteria(const VerifyOptions& opts) {
    using Fn = std::function<CriterionResult(const VerifyOptions&)>;
    const std::vector<std::pair<std::string, Fn>> all = {
        {"Wronskian conservation", wronskian_conservation},
        {"q=0 closed-form oracle", free_oracle},
        {"det B exactness", det_b},
        {"Pathway equivalence", pathways},
        {"Weyl identity", weyl_identity},
        {"Eigenvalue asymptotics", asymptotics},
        {"Asymptotic ratio", asymptotic_ratio},
        {"Hadamard reconstruction", hadamard},
        {"Inverse Problem 1 round trip", inverse_weyl},
        {"Inverse Problem 2 round trip", inverse_spectra},
        {"P1/P2 diagnostics", match},
        {"M asymptotics", weyl_asymptotics},
    };
    std::vector<CriterionResult> out;
    for (int id = 1; id <= 12; ++id) {
        if (!opts.criteria.empty() && std::find(opts.criteria.begin(), opts.criteria.end(), id) == opts.criteria.end())
            continue;
        try {
            out.push_back(all[id - 1].second(opts));
        } catch (const std::exception& e) {
            CriterionResult r;
            r.id = id;
            r.title = all[id - 1].first;
            r.value = std::nan("");
            r.detail = std::string("error: ") + e.what();
            out.push_back(std::move(r));
        }
    }
    return out;
}

std::string format_criteria(const std::vector<CriterionResult>& results) {
    std::ostringstream os;
    for (auto& r : results) {
        os << (r.pass ? "PASS" : "FAIL") << "  " << r.id << "  " << r.title << "  value=" << fmt(r.value)
           << " threshold=" << fmt(r.threshold) << "  " << r.detail << "\n";
    }
    return os.str();
}

}  // namespace slts
