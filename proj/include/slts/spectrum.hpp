#pragma once

#include <optional>
#include <string>
#include <vector>

#include "slts/forward.hpp"

namespace slts {

/// One member rho_{k nu j} of the asymptotic eigenvalue clusters (1-based nu, k).
struct Seed {
    std::size_t nu;
    std::size_t k;
    double rho;
};

/// rho_{k nu j} = pi / (b_nu - a_nu) * (k - (1 - [nu = N] - j [nu = 1]) / 2),
/// for k = 1..K and nu = 1..N, ordered by nu then k.
std::vector<Seed> asymptotic_seeds(const TimeScale& ts, int j, std::size_t K);
/// Seeds of all clusters merged and sorted by rho (ties broken by nu).
std::vector<Seed> merged_seeds(const TimeScale& ts, int j, double rho_max);

struct Eigenvalue {
    double lambda;
    double bracket_lo;
    double bracket_hi;
    double residual;        // |Delta_j(lambda)| relative to the local scale
    std::size_t nu = 0;     // 0 for the low-index unclustered eigenvalues
    std::size_t k = 0;
    int multiplicity = 1;
    double seed_rho = 0.0;  // matching cluster seed (0 when unclustered)

    /// |sqrt(lambda) - seed| with Im sqrt >= 0; 0 when unclustered.
    double deviation() const;
};

struct SpectrumList {
    int j = 0;
    std::vector<Eigenvalue> eigenvalues;  // ascending
    std::vector<std::string> warnings;

    std::vector<double> values() const;
};

struct SpectrumOptions {
    ForwardOptions forward;
    /// Scan step in rho as a fraction of the smallest cluster spacing pi / l_max.
    double scan_fraction = 1.0 / 16.0;
    /// Relative root tolerance in rho.
    double root_tol = 1e-14;
    /// Residual threshold for accepting a touching (double) root.
    double double_root_tol = 1e-9;
    unsigned threads = 1;
};

/// Eigenvalues of L_j for real q: the first `count` eigenvalues, or all up to
/// lambda_max when count is empty. Throws Errc::kUnsupported for complex q.
SpectrumList find_eigenvalues(const TimeScale& ts, const Potential& q, int j,
                              std::optional<std::size_t> count, std::optional<double> lambda_max = {},
                              const SpectrumOptions& opts = {});

/// Assigns cluster labels and seeds: the n-th eigenvalue, n >= N + j, takes
/// the (n - N - j + 1)-th merged seed.
void label_clusters(const TimeScale& ts, SpectrumList& spec);

/// Delta_j rebuilt from its zeros: C_j * lambda^{s_j} * prod (1 - lambda / lambda_n).
/// Measured zeros are used up to the truncation; past it the cluster seeds
/// stand in for the unknown zeros.
class HadamardModel {
public:
    struct TailCluster {
        double spacing;  // pi / l_nu
        double offset;   // (1 - [nu = N] - j [nu = 1]) / 2
        std::size_t first_k;
        /// Tail zeros sit at lambda = rho_k^2 + 2 beta, i.e. rho ~ rho_k + beta / rho_k.
        double beta = 0.0;
    };

    HadamardModel(const TimeScale& ts, int j, std::vector<double> zeros, std::size_t zero_multiplicity,
                  std::vector<TailCluster> tail);

    int j() const { return j_; }
    std::size_t zero_multiplicity() const { return s_; }
    const std::vector<double>& zeros() const { return zeros_; }
    const std::vector<TailCluster>& tail() const { return tail_; }
    Complex constant() const { return C_; }
    double constant_spread() const { return spread_; }

    /// log p_j(lambda); -inf real part when lambda is a retained zero.
    Complex log_p(Complex lambda) const;
    Complex p(Complex lambda) const;
    /// Reconstructed Delta_j(lambda) = C_j p_j(lambda).
    Complex operator()(Complex lambda) const;

    /// Richardson extrapolation of g_j / p_j at lambda = -T, -2T, -4T.
    /// Throws Errc::kTailModel if the extrapolants spread more than `max_spread`.
    void fit_constant(double T, double max_spread);

private:
    TimeScale ts_;
    int j_;
    std::vector<double> zeros_;
    std::size_t s_;
    std::vector<TailCluster> tail_;
    Complex C_{1.0, 0.0};
    double spread_ = 0.0;
};

struct HadamardOptions {
    /// Upper bound on |q| used to place the extrapolation points, T = 1e3 (1 + q_bound).
    double q_bound = 1.0;
    double max_spread = 0.05;
    /// Shift each tail cluster by the fitted beta; false keeps the bare seeds.
    bool shift_tail = true;
    /// Members farther than this fraction of the cluster spacing from their
    /// seed mark the cluster inconsistent (and exclude it from the shift fit).
    double consistency_tol = 0.25;
};

/// Notes on clusters whose upper-half members (within the first K
/// eigenvalues) sit farther than consistency_tol * spacing from their seeds,
/// as happens when an eigenvalue is missing or spurious. Empty when consistent.
std::vector<std::string> cluster_consistency(const SpectrumList& spec, const TimeScale& ts, std::size_t K,
                                             const HadamardOptions& opts = {});

/// Builds p_j from the first K eigenvalues of `spec` plus the seed tail and
/// fixes C_j from the large-|lambda| limit of g_j / p_j. Each tail cluster is
/// shifted by the mean of (rho - seed) * seed over the upper half of its
/// measured members.
HadamardModel hadamard_reconstruct(const SpectrumList& spec, const TimeScale& ts, std::size_t K,
                                   const HadamardOptions& opts = {});

/// M = -Delta_0 / Delta_1 from two reconstructed characteristic functions.
std::vector<WeylSample> weyl_from_spectra(const HadamardModel& d0, const HadamardModel& d1,
                                          const std::vector<Complex>& grid,
                                          double pole_threshold = 1e-12);

}  // namespace slts
