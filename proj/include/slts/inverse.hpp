#pragma once

#include <Eigen/Core>
#include <optional>
#include <string>
#include <vector>

#include "slts/forward.hpp"
#include "slts/spectrum.hpp"

namespace slts {

/// Samples of a Weyl-type function M(lambda).
struct WeylData {
    std::vector<Complex> lambda;
    std::vector<Complex> M;
    std::optional<double> noise;  // relative noise level, if known

    std::size_t size() const { return lambda.size(); }
    /// Throws Errc::kInvalidInput on length mismatch, non-finite or repeated points.
    void check() const;
    /// Collects the usable entries of a sweep; flagged points are skipped.
    static WeylData from_samples(const std::vector<WeylSample>& samples);
};

struct InverseOptions {
    ForwardOptions forward;
    /// Polynomial degree P of q on each segment (P + 1 Chebyshev coefficients).
    std::size_t degree = 2;
    std::size_t max_iterations = 100;
    /// Relative step tolerance of the damped Gauss-Newton iteration.
    double step_tol = 1e-10;
    /// Relative reduction tolerance of the sum of squares.
    double reduction_tol = 1e-14;
    /// w_i = 1 / (|M_i|^2 + eps^2).
    double weight_eps = 1e-8;
    /// Forward-difference step, relative to max(1, |c|).
    double fd_step = 1e-6;
    /// Relative singular-value floor below which the sensitivity is rank deficient.
    double rank_tol = 1e-10;
    /// Initial trust-region radius relative to |c| (1 when c = 0).
    double trust_factor = 1.0;
    /// Trial potentials with sum_i |c_i| above this bound on any segment are
    /// rejected with the pole penalty instead of being integrated.
    double coeff_bound = 1e4;
    /// rms weighted misfit above which the result is flagged.
    double misfit_tol = 1e-6;
    /// Peeled samples enter the fit of segment m with weight w_i / kappa_i^2
    /// (kappa_i the peel condition), and only where the peel into m + 1 has
    /// condition at least `trailing_condition_min`, i.e. where q on later
    /// segments barely matters. At least 2 (P + 1) samples are always kept.
    double trailing_condition_min = 1e3;
    /// Maximum number of layer-peeling sweeps before the global polish; the
    /// sweeps stop early once no coefficient moves by more than sweep_tol.
    std::size_t sweeps = 6;
    double sweep_tol = 1e-8;
    bool polish = true;
    unsigned threads = 1;
};

/// T_m: segments m..N-1 (0-based m) renormalized so a_m = 0.
TimeScale truncate(const TimeScale& ts, std::size_t m);
/// Restriction of q to T_m; the per-segment Chebyshev coefficients carry over unchanged.
Potential truncate(const Potential& q, const TimeScale& tm, std::size_t m);

struct PeelResult {
    WeylData data;
    std::vector<std::size_t> kept;     // input index of each row of `data`
    std::vector<std::size_t> dropped;  // indices into the input with Phi'(a_m) ~ 0
    /// Relative condition |dM_m/dM| |M| / |M_m| = |M| / |Phi(a_m) Phi'(a_m)|
    /// of each kept sample, taken from the Weyl solution of q itself so it
    /// does not depend on how well q matches the data. Errors in M or in q on
    /// the peeled segments are amplified by roughly this factor.
    std::vector<double> condition;
};

/// M_m = Phi(a_m) / Phi'(a_m) for the 0-based segment m, using q on segments
/// 0..m-1 only. m = 0 returns the data unchanged.
PeelResult peel_weyl(const TimeScale& ts, const Potential& q, std::size_t m, const WeylData& data,
                     const ForwardOptions& opts = {});

/// Weighted Weyl misfit as a function of the real Chebyshev coefficients of a
/// chosen set of segments; the remaining segments stay frozen at `base`.
class WeylObjective {
public:
    /// `sample_weight` (default all 1) multiplies the noise weights w_i.
    WeylObjective(TimeScale ts, Potential base, std::vector<std::size_t> free_segments, WeylData data,
                  const InverseOptions& opts, std::vector<double> sample_weight = {});

    std::size_t parameters() const { return free_.size() * (degree_ + 1); }
    std::size_t residuals() const { return 2 * data_.size(); }
    const WeylData& data() const { return data_; }
    const TimeScale& timescale() const { return ts_; }

    Eigen::VectorXd initial() const;
    Potential potential(const Eigen::VectorXd& c) const;

    /// sqrt(w_i) (Mhat_i - M_i), real and imaginary parts interleaved.
    /// Samples where the model has a pole get a fixed penalty.
    Eigen::VectorXd residual(const Eigen::VectorXd& c) const;
    /// Finite-difference sensitivities with step h_i = rel_step * max(1, |c_i|).
    Eigen::MatrixXd jacobian(const Eigen::VectorXd& c, double rel_step, bool central = false) const;
    /// sqrt(mean_i w_i |Mhat_i - M_i|^2).
    double misfit(const Eigen::VectorXd& c) const;

private:
    TimeScale ts_;
    Potential base_;
    std::vector<std::size_t> free_;
    WeylData data_;
    std::vector<double> sqrt_w_;
    std::size_t degree_;
    InverseOptions opts_;
};

struct SegmentFit {
    std::vector<double> coeffs;   // flattened over the fitted segments
    std::vector<double> history;  // rms misfit after each iteration, starting value first
    double misfit = 0.0;
    std::size_t iterations = 0;
    std::size_t samples = 0;
    bool converged = false;
    bool identifiable = true;
    std::string status;
};

/// Fits the coefficients of `free_segments` by damped Gauss-Newton
/// (Levenberg-Marquardt trust region) on the given objective.
SegmentFit fit_coefficients(const WeylObjective& objective, const InverseOptions& opts);

/// Recovers q on the first segment of `tm` from M_m, with the trailing
/// segments frozen at `trailing`.
SegmentFit recover_segment(const TimeScale& tm, const Potential& trailing, const WeylData& Mm,
                           const InverseOptions& opts = {}, std::vector<double> sample_weight = {});

/// sqrt(mean_i w_i |M(lambda_i; q) - M_i|^2) evaluated directly by shooting.
double weyl_misfit(const TimeScale& ts, const Potential& q, const WeylData& data,
                   const InverseOptions& opts = {});

struct ReconstructionResult {
    explicit ReconstructionResult(Potential q_) : q(std::move(q_)) {}

    Potential q;
    std::vector<SegmentFit> segments;
    std::optional<SegmentFit> polish;
    double misfit = 0.0;              // as reported by the optimizer
    double misfit_reevaluated = 0.0;  // independent forward re-evaluation
    double misfit_threshold = 0.0;
    bool converged = false;
    bool identifiable = true;
    bool misfit_flag = false;
    /// Two-spectra mode: max relative gap between the reconstructed and the
    /// recovered model's M on held-out points.
    std::optional<double> truncation_error;
    std::vector<std::string> warnings;

    /// All flags clean.
    bool ok() const { return converged && identifiable && !misfit_flag; }
};

/// Default sample grid: n points log-spaced on [-lambda_max, -1] with
/// lambda_max = (4 P / l_min)^2.
std::vector<Complex> default_weyl_grid(const TimeScale& ts, std::size_t degree, std::size_t n = 30);

/// n points lambda = rho^2 with rho = r e^{i angle}, r log-spaced on
/// [1, 4 P / l_min]: a ray of the sector Omega_delta next to the positive axis.
std::vector<Complex> sector_ray_grid(const TimeScale& ts, std::size_t degree, double angle = 0.1,
                                     std::size_t n = 30);

/// Layer-peeling reconstruction of q from samples of M, then a joint polish.
ReconstructionResult solve_inverse_weyl(const TimeScale& ts, const WeylData& data,
                                        const InverseOptions& opts = {});

struct TwoSpectraOptions {
    /// inverse.misfit_tol is replaced by `misfit_tol` below.
    InverseOptions inverse;
    /// Misfit threshold against the reconstructed M, which carries the
    /// truncation error of the finite spectra.
    double misfit_tol = 5e-3;
    HadamardOptions hadamard;
    /// Eigenvalues used from each spectrum (0: all).
    std::size_t K = 0;
    /// Sample grid for M; empty selects sector_ray_grid with `ray_angle`.
    std::vector<Complex> grid;
    double ray_angle = 0.1;
};

/// Hadamard reconstruction of Delta_0, Delta_1 from their zeros, M = -Delta_0 / Delta_1
/// on the grid, then solve_inverse_weyl. Spectra that do not fit the cluster
/// asymptotics (a missing or spurious eigenvalue) raise the misfit flag. Throws
/// Errc::kTailModel if a characteristic function of consistent spectra cannot
/// be normalized; for inconsistent spectra that failure is reported in the
/// flagged result instead.
ReconstructionResult solve_inverse_two_spectra(const TimeScale& ts, const SpectrumList& spec0,
                                               const SpectrumList& spec1,
                                               const TwoSpectraOptions& opts = {});

struct MatchResidual {
    Complex lambda;
    Complex P1;
    Complex P2;
};

/// P1 = Phi~' C - Phi C~', P2 = Phi C~ - Phi~ C at x (original coordinate in
/// the interior of the first segment). Samples at a pole of either model are skipped.
std::vector<MatchResidual> match_residual(const TimeScale& ts, const Potential& q, const Potential& qt,
                                          double x, const std::vector<Complex>& lambdas,
                                          const ForwardOptions& opts = {});

}  // namespace slts
