#include "slts/inverse.hpp"

#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <unsupported/Eigen/LevenbergMarquardt>

#include "slts/parallel.hpp"

namespace slts {

namespace {

constexpr double kPolePenalty = 1e3;

void check_real_data(const WeylData& d) {
    d.check();
    if (d.size() == 0) throw Error(Errc::kInvalidInput, "Weyl data is empty");
}

// Adaptor for Eigen's MINPACK-style Levenberg-Marquardt.
struct LmFunctor : Eigen::DenseFunctor<double> {
    const WeylObjective& obj;
    double step;
    LmFunctor(const WeylObjective& o, double h)
        : DenseFunctor<double>(static_cast<int>(o.parameters()), static_cast<int>(o.residuals())),
          obj(o),
          step(h) {}
    int operator()(const Eigen::VectorXd& x, Eigen::VectorXd& f) const {
        f = obj.residual(x);
        return 0;
    }
    int df(const Eigen::VectorXd& x, Eigen::MatrixXd& j) const {
        j = obj.jacobian(x, step);
        return 0;
    }
};

bool lm_converged(Eigen::LevenbergMarquardtSpace::Status s) {
    using namespace Eigen::LevenbergMarquardtSpace;
    switch (s) {
        case RelativeReductionTooSmall:
        case RelativeErrorTooSmall:
        case RelativeErrorAndReductionTooSmall:
        case CosinusTooSmall:
        case FtolTooSmall:
        case XtolTooSmall:
        case GtolTooSmall:
            return true;
        default:
            return false;
    }
}

const char* lm_status(Eigen::LevenbergMarquardtSpace::Status s) {
    using namespace Eigen::LevenbergMarquardtSpace;
    switch (s) {
        case ImproperInputParameters: return "improper input";
        case RelativeReductionTooSmall: return "relative reduction below tolerance";
        case RelativeErrorTooSmall: return "relative step below tolerance";
        case RelativeErrorAndReductionTooSmall: return "step and reduction below tolerance";
        case CosinusTooSmall: return "residual orthogonal to sensitivities";
        case TooManyFunctionEvaluation: return "too many function evaluations";
        case FtolTooSmall: return "reduction at machine precision";
        case XtolTooSmall: return "step at machine precision";
        case GtolTooSmall: return "gradient at machine precision";
        default: return "running";
    }
}

std::vector<Complex> resize_coeffs(const std::vector<Complex>& c, std::size_t n) {
    std::vector<Complex> out(n, 0.0);
    std::copy_n(c.begin(), std::min(n, c.size()), out.begin());
    return out;
}

struct Selection {
    WeylData data;
    std::vector<double> weight;
};

// Samples for the fit of segment m, weighted by the inverse peel condition.
// Where the next peel is well conditioned the data still depends on later
// segments; those samples are skipped unless too few remain. `next` is empty
// for the last segment.
Selection select_samples(const PeelResult& here, const std::optional<PeelResult>& next,
                         const InverseOptions& opts) {
    std::vector<double> next_cond;
    if (next) {
        next_cond.assign(here.kept.empty() ? 0 : here.kept.back() + 1, 0.0);
        for (std::size_t r = 0; r < next->kept.size(); ++r)
            if (next->kept[r] < next_cond.size()) next_cond[next->kept[r]] = next->condition[r];
    }
    std::vector<double> rank(here.data.size(), std::numeric_limits<double>::infinity());
    for (std::size_t r = 0; r < rank.size(); ++r) {
        const double c = next && here.kept[r] < next_cond.size() ? next_cond[here.kept[r]]
                                                                  : std::numeric_limits<double>::infinity();
        rank[r] = c == 0.0 ? std::numeric_limits<double>::infinity() : c;  // 0: dropped by the next peel
    }
    const std::size_t need = std::min(rank.size(), 2 * (opts.degree + 1));
    std::vector<std::size_t> idx(rank.size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    std::stable_sort(idx.begin(), idx.end(), [&](auto a, auto b) { return rank[a] > rank[b]; });
    std::vector<bool> keep(idx.size(), false);
    for (std::size_t r = 0; r < idx.size(); ++r)
        keep[idx[r]] = r < need || rank[idx[r]] >= opts.trailing_condition_min;
    Selection out;
    out.data.noise = here.data.noise;
    for (std::size_t i = 0; i < keep.size(); ++i) {
        if (!keep[i]) continue;
        out.data.lambda.push_back(here.data.lambda[i]);
        out.data.M.push_back(here.data.M[i]);
        out.weight.push_back(1.0 / std::max(1.0, here.condition[i]));
    }
    return out;
}

}  // namespace

void WeylData::check() const {
    if (lambda.size() != M.size())
        throw Error(Errc::kInvalidInput, "Weyl data: lambda and M lengths differ");
    for (std::size_t i = 0; i < size(); ++i) {
        if (!std::isfinite(lambda[i].real()) || !std::isfinite(lambda[i].imag()) ||
            !std::isfinite(M[i].real()) || !std::isfinite(M[i].imag()))
            throw Error(Errc::kInvalidInput, "Weyl data: non-finite entry at row " + std::to_string(i));
    }
    std::vector<std::size_t> idx(size());
    for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
    auto key = [&](std::size_t i) { return std::pair(lambda[i].real(), lambda[i].imag()); };
    std::sort(idx.begin(), idx.end(), [&](auto a, auto b) { return key(a) < key(b); });
    for (std::size_t i = 1; i < idx.size(); ++i)
        if (lambda[idx[i]] == lambda[idx[i - 1]])
            throw Error(Errc::kInvalidInput, "Weyl data: repeated sample point at row " + std::to_string(idx[i]));
    if (noise && !(*noise >= 0.0)) throw Error(Errc::kInvalidInput, "Weyl data: negative noise level");
}

WeylData WeylData::from_samples(const std::vector<WeylSample>& samples) {
    WeylData d;
    for (const auto& s : samples) {
        if (!s.M) continue;
        d.lambda.push_back(s.lambda);
        d.M.push_back(*s.M);
    }
    return d;
}

TimeScale truncate(const TimeScale& ts, std::size_t m) {
    if (m >= ts.size()) throw Error(Errc::kDomain, "truncate: segment index out of range");
    std::vector<Segment> segs(ts.segments().begin() + static_cast<std::ptrdiff_t>(m), ts.segments().end());
    return TimeScale(std::move(segs));
}

Potential truncate(const Potential& q, const TimeScale& tm, std::size_t m) {
    if (m + tm.size() != q.size()) throw Error(Errc::kInvalidInput, "truncate: potential does not match scale");
    std::vector<std::vector<Complex>> c;
    for (std::size_t k = m; k < q.size(); ++k) c.push_back(q.segment(k).coeffs());
    return Potential(tm, std::move(c));
}

PeelResult peel_weyl(const TimeScale& ts, const Potential& q, std::size_t m, const WeylData& data,
                     const ForwardOptions& opts) {
    if (m >= ts.size()) throw Error(Errc::kDomain, "peel_weyl: segment index out of range");
    if (q.size() != ts.size()) throw Error(Errc::kInvalidInput, "peel_weyl: potential does not match scale");
    PeelResult out;
    out.data.noise = data.noise;
    if (m == 0) {
        out.data = data;
        out.condition.assign(data.size(), 1.0);
        for (std::size_t i = 0; i < data.size(); ++i) out.kept.push_back(i);
        return out;
    }
    std::vector<std::optional<Complex>> mm(data.size());
    std::vector<double> cond(data.size(), 1.0);
    parallel_for(data.size(), 1, [&](std::size_t i) {
        const auto sp = SpectralPoint::from_lambda(data.lambda[i]);
        SolutionState s{data.M[i], 1.0, 0.0};
        for (std::size_t k = 0; k < m; ++k) {
            s = propagate_segment(q, k, sp, s, Direction::kForward, opts);
            const Eigen::Matrix2cd J = jump_matrix(ts.gap(k), q.right_value(k), sp.lambda);
            const Complex y = J(0, 0) * s.y + J(0, 1) * s.yp;
            const Complex yp = J(1, 0) * s.y + J(1, 1) * s.yp;
            s.y = y;
            s.yp = yp;
            s.normalize();
        }
        if (std::abs(s.yp) < opts.pole_threshold * std::max(1.0, std::abs(s.y))) return;
        mm[i] = s.y / s.yp;
        try {
            const PhiTrace ref = solve_phi(ts, q, data.lambda[i], opts);
            const SolutionState& r = ref.phi.at_a[m];
            cond[i] = std::abs(ref.M) / (std::abs(r.y * r.yp) * std::exp(2.0 * r.log_scale));
        } catch (const Error& e) {
            if (e.code() != Errc::kPole) throw;
            cond[i] = std::numeric_limits<double>::infinity();
        }
    });
    for (std::size_t i = 0; i < data.size(); ++i) {
        if (!mm[i]) {
            out.dropped.push_back(i);
            continue;
        }
        out.data.lambda.push_back(data.lambda[i]);
        out.data.M.push_back(*mm[i]);
        out.condition.push_back(cond[i]);
        out.kept.push_back(i);
    }
    return out;
}

WeylObjective::WeylObjective(TimeScale ts, Potential base, std::vector<std::size_t> free_segments,
                             WeylData data, const InverseOptions& opts, std::vector<double> sample_weight)
    : ts_(std::move(ts)),
      base_(std::move(base)),
      free_(std::move(free_segments)),
      data_(std::move(data)),
      degree_(opts.degree),
      opts_(opts) {
    check_real_data(data_);
    if (base_.size() != ts_.size()) throw Error(Errc::kInvalidInput, "objective: potential does not match scale");
    for (auto k : free_)
        if (k >= ts_.size()) throw Error(Errc::kDomain, "objective: free segment out of range");
    const double eps2 = opts.weight_eps * opts.weight_eps;
    if (!sample_weight.empty() && sample_weight.size() != data_.size())
        throw Error(Errc::kInvalidInput, "objective: one weight per sample expected");
    for (std::size_t i = 0; i < data_.size(); ++i)
        sqrt_w_.push_back((sample_weight.empty() ? 1.0 : sample_weight[i]) / std::sqrt(std::norm(data_.M[i]) + eps2));
}

Eigen::VectorXd WeylObjective::initial() const {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(parameters()));
    for (std::size_t f = 0; f < free_.size(); ++f) {
        const auto& src = base_.segment(free_[f]).coeffs();
        for (std::size_t i = 0; i <= degree_ && i < src.size(); ++i)
            c[static_cast<Eigen::Index>(f * (degree_ + 1) + i)] = src[i].real();
    }
    return c;
}

Potential WeylObjective::potential(const Eigen::VectorXd& c) const {
    std::vector<std::vector<Complex>> coeffs;
    for (std::size_t k = 0; k < base_.size(); ++k) coeffs.push_back(base_.segment(k).coeffs());
    for (std::size_t f = 0; f < free_.size(); ++f) {
        auto& dst = coeffs[free_[f]];
        dst = resize_coeffs(dst, degree_ + 1);
        for (std::size_t i = 0; i <= degree_; ++i) dst[i] = c[static_cast<Eigen::Index>(f * (degree_ + 1) + i)];
    }
    return Potential(ts_, std::move(coeffs));
}

Eigen::VectorXd WeylObjective::residual(const Eigen::VectorXd& c) const {
    Eigen::VectorXd r(static_cast<Eigen::Index>(residuals()));
    for (std::size_t f = 0; f < free_.size(); ++f) {
        if (c.segment(static_cast<Eigen::Index>(f * (degree_ + 1)), static_cast<Eigen::Index>(degree_ + 1))
                .lpNorm<1>() > opts_.coeff_bound) {
            r.setConstant(kPolePenalty);
            return r;
        }
    }
    const Potential q = potential(c);
    parallel_for(data_.size(), opts_.threads, [&](std::size_t i) {
        const auto ii = static_cast<Eigen::Index>(2 * i);
        try {
            const Complex d = (weyl(ts_, q, data_.lambda[i], opts_.forward) - data_.M[i]) * sqrt_w_[i];
            r[ii] = d.real();
            r[ii + 1] = d.imag();
        } catch (const Error& e) {
            if (e.code() != Errc::kPole && e.code() != Errc::kIntegration) throw;
            r[ii] = kPolePenalty;
            r[ii + 1] = kPolePenalty;
        }
    });
    return r;
}

Eigen::MatrixXd WeylObjective::jacobian(const Eigen::VectorXd& c, double rel_step, bool central) const {
    const auto n = static_cast<Eigen::Index>(parameters());
    Eigen::MatrixXd J(static_cast<Eigen::Index>(residuals()), n);
    const Eigen::VectorXd r0 = central ? Eigen::VectorXd() : residual(c);
    for (Eigen::Index p = 0; p < n; ++p) {
        const double h = rel_step * std::max(1.0, std::abs(c[p]));
        Eigen::VectorXd cp = c;
        cp[p] += h;
        if (central) {
            Eigen::VectorXd cm = c;
            cm[p] -= h;
            J.col(p) = (residual(cp) - residual(cm)) / (2.0 * h);
        } else {
            J.col(p) = (residual(cp) - r0) / h;
        }
    }
    return J;
}

double WeylObjective::misfit(const Eigen::VectorXd& c) const {
    return residual(c).norm() / std::sqrt(static_cast<double>(data_.size()));
}

SegmentFit fit_coefficients(const WeylObjective& objective, const InverseOptions& opts) {
    const std::size_t n = objective.parameters();
    SegmentFit fit;
    fit.samples = objective.data().size();
    if (fit.samples < 2 * n)
        throw Error(Errc::kInvalidInput, "inverse: need at least " + std::to_string(2 * n) + " usable samples, have " +
                                             std::to_string(fit.samples));
    const double root_n = std::sqrt(static_cast<double>(fit.samples));

    LmFunctor functor(objective, opts.fd_step);
    Eigen::LevenbergMarquardt<LmFunctor> lm(functor);
    lm.setXtol(opts.step_tol);
    lm.setFtol(opts.reduction_tol);
    lm.setGtol(0.0);
    lm.setFactor(opts.trust_factor);
    // Unit scaling: the trust region bounds the raw coefficient step.
    lm.setExternalScaling(true);
    lm.diag() = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(n));
    lm.setMaxfev(static_cast<Eigen::Index>(opts.max_iterations * 10));

    Eigen::VectorXd x = objective.initial();
    auto status = lm.minimizeInit(x);
    if (status == Eigen::LevenbergMarquardtSpace::ImproperInputParameters)
        throw Error(Errc::kInvalidInput, "inverse: optimizer rejected its parameters");
    fit.history.push_back(lm.fnorm() / root_n);
    std::size_t it = 0;
    do {
        status = lm.minimizeOneStep(x);
        ++it;
        fit.history.push_back(lm.fnorm() / root_n);
    } while (status == Eigen::LevenbergMarquardtSpace::Running && it < opts.max_iterations);

    fit.iterations = it;
    fit.converged = lm_converged(status);
    fit.status = fit.converged ? lm_status(status)
                               : (status == Eigen::LevenbergMarquardtSpace::Running ? "iteration limit reached"
                                                                                     : lm_status(status));
    fit.coeffs.assign(x.data(), x.data() + x.size());
    fit.misfit = objective.misfit(x);

    const Eigen::MatrixXd J = objective.jacobian(x, opts.fd_step);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(J);
    const auto& sv = svd.singularValues();
    fit.identifiable = sv.size() > 0 && sv[0] > 0.0 && sv[sv.size() - 1] > opts.rank_tol * sv[0];
    return fit;
}

SegmentFit recover_segment(const TimeScale& tm, const Potential& trailing, const WeylData& Mm,
                           const InverseOptions& opts, std::vector<double> sample_weight) {
    const WeylObjective obj(tm, trailing, {0}, Mm, opts, std::move(sample_weight));
    return fit_coefficients(obj, opts);
}

double weyl_misfit(const TimeScale& ts, const Potential& q, const WeylData& data, const InverseOptions& opts) {
    check_real_data(data);
    const double eps2 = opts.weight_eps * opts.weight_eps;
    std::vector<double> terms(data.size());
    parallel_for(data.size(), opts.threads, [&](std::size_t i) {
        double t;
        try {
            t = std::norm(weyl(ts, q, data.lambda[i], opts.forward) - data.M[i]) / (std::norm(data.M[i]) + eps2);
        } catch (const Error& e) {
            if (e.code() != Errc::kPole && e.code() != Errc::kIntegration) throw;
            t = 2.0 * kPolePenalty * kPolePenalty;
        }
        terms[i] = t;
    });
    double s = 0.0;
    for (double t : terms) s += t;
    return std::sqrt(s / static_cast<double>(data.size()));
}

std::vector<Complex> default_weyl_grid(const TimeScale& ts, std::size_t degree, std::size_t n) {
    double lmin = ts.segment(0).length();
    for (const auto& s : ts.segments()) lmin = std::min(lmin, s.length());
    const double top = std::max(4.0, std::pow(4.0 * static_cast<double>(std::max<std::size_t>(degree, 1)) / lmin, 2));
    std::vector<Complex> grid;
    if (n == 1) return {-1.0};
    for (std::size_t i = 0; i < n; ++i) {
        const double t = static_cast<double>(i) / static_cast<double>(n - 1);
        grid.emplace_back(-std::exp(t * std::log(top)), 0.0);
    }
    return grid;
}

std::vector<Complex> sector_ray_grid(const TimeScale& ts, std::size_t degree, double angle, std::size_t n) {
    double lmin = ts.segment(0).length();
    for (const auto& s : ts.segments()) lmin = std::min(lmin, s.length());
    const double top = std::max(2.0, 4.0 * static_cast<double>(std::max<std::size_t>(degree, 1)) / lmin);
    std::vector<Complex> grid;
    for (std::size_t i = 0; i < n; ++i) {
        const double t = n == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(n - 1);
        const Complex rho = std::polar(std::exp(t * std::log(top)), angle);
        grid.push_back(rho * rho);
    }
    return grid;
}

ReconstructionResult solve_inverse_weyl(const TimeScale& ts, const WeylData& data, const InverseOptions& opts) {
    check_real_data(data);
    const std::size_t N = ts.size();
    using Coeffs = std::vector<std::vector<Complex>>;
    Coeffs est(N, std::vector<Complex>(opts.degree + 1, 0.0));
    ReconstructionResult res(Potential(ts, est));

    // Every intermediate estimate is scored on the original data; the polish
    // starts from the best one, since errors on early segments are amplified
    // by the peel.
    Coeffs best = est;
    double best_misfit = weyl_misfit(ts, res.q, data, opts);
    bool sweep_ok = true;
    std::vector<std::string> sweep_warnings;
    for (std::size_t sweep = 0; sweep < std::max<std::size_t>(opts.sweeps, 1) && sweep_ok; ++sweep) {
        sweep_warnings.clear();
        double moved = 0.0;
        for (std::size_t m = 0; m < N; ++m) {
            const Potential current(ts, est);
            const PeelResult here = peel_weyl(ts, current, m, data, opts.forward);
            std::optional<PeelResult> next;
            if (m + 1 < N) next = peel_weyl(ts, current, m + 1, data, opts.forward);
            const std::string tag = "segment " + std::to_string(m + 1) + ": ";
            if (!here.dropped.empty())
                sweep_warnings.push_back(tag + "dropped " + std::to_string(here.dropped.size()) +
                                         " samples at poles of the peeled data");
            const TimeScale tm = truncate(ts, m);
            Selection sel = select_samples(here, next, opts);
            SegmentFit fit = recover_segment(tm, truncate(current, tm, m), sel.data, opts, std::move(sel.weight));
            for (std::size_t i = 0; i <= opts.degree; ++i) {
                moved = std::max(moved, std::abs(fit.coeffs[i] - est[m][i].real()));
                est[m][i] = fit.coeffs[i];
            }
            if (!fit.identifiable) sweep_warnings.push_back(tag + "rank-deficient sensitivity");
            if (res.segments.size() <= m) res.segments.push_back(fit);
            else res.segments[m] = fit;
            if (!fit.converged) {
                sweep_warnings.push_back(tag + fit.status + "; later segments not peeled");
                sweep_ok = false;
                break;
            }
            const double mis = weyl_misfit(ts, Potential(ts, est), data, opts);
            if (mis < best_misfit) {
                best_misfit = mis;
                best = est;
            }
        }
        if (moved <= opts.sweep_tol) break;
    }
    for (const auto& s : res.segments) res.identifiable = res.identifiable && s.identifiable;
    res.warnings = sweep_warnings;

    if (opts.polish) {
        std::vector<std::size_t> all(N);
        for (std::size_t k = 0; k < N; ++k) all[k] = k;
        // A polish that stalls from the sweep estimate is retried from q = 0.
        std::vector<Coeffs> starts{best};
        if (best != Coeffs(N, std::vector<Complex>(opts.degree + 1, 0.0)))
            starts.emplace_back(N, std::vector<Complex>(opts.degree + 1, 0.0));
        std::optional<WeylObjective> chosen;
        for (const auto& start : starts) {
            WeylObjective obj(ts, Potential(ts, start), all, data, opts);
            SegmentFit fit = fit_coefficients(obj, opts);
            if (!res.polish || fit.misfit < res.polish->misfit) {
                res.polish = std::move(fit);
                chosen.emplace(std::move(obj));
            }
            if (res.polish->converged && res.polish->misfit <= opts.misfit_tol) break;
        }
        const SegmentFit& fit = *res.polish;
        res.q = chosen->potential(Eigen::Map<const Eigen::VectorXd>(fit.coeffs.data(),
                                                                    static_cast<Eigen::Index>(fit.coeffs.size())));
        res.misfit = fit.misfit;
        res.converged = fit.converged;
        res.identifiable = fit.identifiable;
        if (!fit.converged) res.warnings.push_back("global polish: " + fit.status);
        if (!fit.identifiable) res.warnings.push_back("global polish: rank-deficient sensitivity");
    } else {
        res.q = Potential(ts, est);
        res.misfit = weyl_misfit(ts, res.q, data, opts);
        res.converged = sweep_ok;
    }
    res.misfit_reevaluated = weyl_misfit(ts, res.q, data, opts);
    res.misfit_threshold = std::max(opts.misfit_tol, 3.0 * data.noise.value_or(0.0));
    res.misfit_flag = res.misfit_reevaluated > res.misfit_threshold;
    if (res.misfit_flag) res.warnings.push_back("misfit above threshold");
    return res;
}

ReconstructionResult solve_inverse_two_spectra(const TimeScale& ts, const SpectrumList& spec0,
                                               const SpectrumList& spec1, const TwoSpectraOptions& opts) {
    if (spec0.j != 0 || spec1.j != 1)
        throw Error(Errc::kInvalidInput, "two-spectra inversion expects the L0 and L1 spectra in that order");
    std::vector<std::string> notes = cluster_consistency(spec0, ts, opts.K, opts.hadamard);
    for (auto& note : cluster_consistency(spec1, ts, opts.K, opts.hadamard)) notes.push_back(std::move(note));

    std::optional<HadamardModel> d0, d1;
    try {
        d0 = hadamard_reconstruct(spec0, ts, opts.K, opts.hadamard);
        d1 = hadamard_reconstruct(spec1, ts, opts.K, opts.hadamard);
    } catch (const Error& e) {
        if (e.code() != Errc::kTailModel || notes.empty()) throw;
        ReconstructionResult res(Potential::zero(ts, opts.inverse.degree));
        res.warnings = notes;
        res.warnings.push_back(e.what());
        res.misfit_flag = true;
        return res;
    }

    const std::vector<Complex> grid =
        opts.grid.empty() ? sector_ray_grid(ts, opts.inverse.degree, opts.ray_angle) : opts.grid;
    const WeylData data =
        WeylData::from_samples(weyl_from_spectra(*d0, *d1, grid, opts.inverse.forward.pole_threshold));
    InverseOptions iopts = opts.inverse;
    iopts.misfit_tol = opts.misfit_tol;
    ReconstructionResult res = solve_inverse_weyl(ts, data, iopts);
    if (data.size() < grid.size())
        res.warnings.push_back("dropped " + std::to_string(grid.size() - data.size()) +
                               " grid points at poles of the reconstructed M");

    std::vector<Complex> held;
    for (std::size_t i = 0; i + 1 < data.size(); ++i) {
        const Complex a = data.lambda[i], b = data.lambda[i + 1];
        if (a.imag() == 0.0 && b.imag() == 0.0 && a.real() < 0.0 && b.real() < 0.0)
            held.emplace_back(-std::sqrt(a.real() * b.real()), 0.0);
        else
            held.push_back(0.5 * (a + b));
    }
    const auto recon = weyl_from_spectra(*d0, *d1, held, opts.inverse.forward.pole_threshold);
    const auto model = weyl_sweep(ts, res.q, held, opts.inverse.forward, opts.inverse.threads);
    double worst = 0.0;
    for (std::size_t i = 0; i < held.size(); ++i) {
        if (!recon[i].M || !model[i].M) continue;
        worst = std::max(worst, std::abs(*recon[i].M - *model[i].M) / std::abs(*model[i].M));
    }
    res.truncation_error = worst;
    if (!notes.empty()) {
        res.warnings.insert(res.warnings.end(), notes.begin(), notes.end());
        res.misfit_flag = true;
    }
    return res;
}

std::vector<MatchResidual> match_residual(const TimeScale& ts, const Potential& q, const Potential& qt,
                                          double x, const std::vector<Complex>& lambdas,
                                          const ForwardOptions& opts) {
    const double xn = ts.to_normalized(x);
    const auto& s0 = ts.segment(0);
    if (!(xn > s0.a && xn < s0.b)) throw Error(Errc::kDomain, "match_residual: x must lie inside the first segment");
    std::vector<MatchResidual> out;
    for (const Complex lam : lambdas) {
        try {
            const SolutionState C = c_at(ts, q, lam, xn, opts);
            const SolutionState Ct = c_at(ts, qt, lam, xn, opts);
            const SolutionState F = phi_at(ts, q, lam, xn, opts);
            const SolutionState Ft = phi_at(ts, qt, lam, xn, opts);
            // Scales cancel in pairs: C ~ e^{s}, Phi ~ e^{-s}.
            const double sc = C.log_scale + Ft.log_scale, sct = Ct.log_scale + F.log_scale;
            const Complex P1 = Ft.yp * C.y * std::exp(sc) - F.y * Ct.yp * std::exp(sct);
            const Complex P2 = F.y * Ct.y * std::exp(sct) - Ft.y * C.y * std::exp(sc);
            out.push_back({lam, P1, P2});
        } catch (const Error& e) {
            if (e.code() != Errc::kPole) throw;
        }
    }
    return out;
}

}  // namespace slts
