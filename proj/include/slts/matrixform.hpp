#pragma once

#include <Eigen/Dense>
#include <vector>

#include "slts/forward.hpp"

namespace slts {

/// Y_1, Y_2 and their derivatives at every segment endpoint for a fixed rho.
///
/// For q == 0 these are the exponentials exp(+-i rho x). Otherwise they
/// solve the gap-extended equation on [0, b_N]: Y_2(0) = 1, Y_2'(0) = -i rho;
/// Y_1 matches exp(i rho x) in value and slope at b_N and is then rescaled so
/// the Wronskian Y_1 Y_2' - Y_1' Y_2 equals -2 i rho everywhere.
struct FundamentalSystem {
    Complex rho;
    bool exact = false;
    // Indexed by segment: value/derivative at a_k and b_k.
    std::vector<Complex> y1_a, dy1_a, y2_a, dy2_a;
    std::vector<Complex> y1_b, dy1_b, y2_b, dy2_b;

    Complex wronskian_a(std::size_t k) const { return y1_a[k] * dy2_a[k] - dy1_a[k] * y2_a[k]; }
    Complex wronskian_b(std::size_t k) const { return y1_b[k] * dy2_b[k] - dy1_b[k] * y2_b[k]; }
};

/// Throws Errc::kDegenerate for rho = 0.
FundamentalSystem build_fundamental(const TimeScale& ts, const Potential& q, Complex rho,
                                    const ForwardOptions& opts = {});

/// Linear systems B X^0 = (0,-1,0..), B X^1 = (-1,0,..) and the Cramer
/// matrices D_0, D_1 for one spectral point.
class BlockSystem {
public:
    BlockSystem(const TimeScale& ts, const Potential& q, const SpectralPoint& sp,
                const ForwardOptions& opts = {});
    BlockSystem(const TimeScale& ts, const Potential& q, FundamentalSystem fs);

    const FundamentalSystem& fundamental() const { return fs_; }
    const Eigen::MatrixXcd& B() const { return B_; }
    Eigen::MatrixXcd D(int j) const;

    // Block entries, 1-based k and nu as in the jump conditions.
    Complex p(std::size_t k, int nu) const;
    Complex q(std::size_t k, int nu) const;
    Complex r(std::size_t k, int nu) const;
    Complex s(std::size_t k, int nu) const;

    /// Minor D_j^k by first-row expansion recursion.
    Complex minor(int j, std::size_t k) const;
    /// Minor D_j^k as the dense determinant of its row/column selection of D_j.
    Complex minor_dense(int j, std::size_t k) const;
    /// Row/column selection (0-based) defining D_j^k.
    std::pair<std::vector<Eigen::Index>, std::vector<Eigen::Index>> minor_indices(int j,
                                                                                  std::size_t k) const;

private:
    void assemble();

    std::size_t n_;
    FundamentalSystem fs_;
    std::vector<Eigen::Matrix2cd> alpha_;  // alpha_[k-1]: gap after segment k
    Eigen::MatrixXcd B_;
};

struct CramerValue {
    Complex value;
    /// Reciprocal condition estimate of D_j (LU-based); small means ill-conditioned.
    double rcond = 1.0;
    bool ill_conditioned = false;
};

/// Delta_j = (-1)^{j+1} det D_j / det B.
CramerValue cramer_delta(const TimeScale& ts, const Potential& q, Complex lambda, int j,
                         const ForwardOptions& opts = {});

struct PhiCoefficients {
    Complex A1;
    Complex A2;
    Complex M;
};

/// First-segment expansion coefficients of Phi and M = A_1 Y_1(0) + A_2 Y_2(0).
PhiCoefficients phi_cramer(const TimeScale& ts, const Potential& q, Complex lambda,
                           const ForwardOptions& opts = {});

/// Closed-form leading behaviour of Delta_j and of the minors for large |rho|.
class AsymptoticModel {
public:
    explicit AsymptoticModel(const TimeScale& ts) : ts_(ts) {}

    double gamma(std::size_t k) const { return ts_.gamma(k); }
    /// f_0^k = cos(rho l), f_1^k = -i sin(rho l), l = length of segment N-k+1.
    Complex f(int j, std::size_t k, Complex rho) const;

    /// Leading term of Delta_j with the exact alpha_22 products (needs q(b_l)).
    Complex leading_delta(const Potential& q, Complex rho, int j) const;
    /// Leading term of the minor D_j^k.
    Complex leading_minor(const Potential& q, Complex rho, int j, std::size_t k) const;
    /// g_j: leading term with alpha_22 replaced by -d^2 rho^2.
    Complex g(Complex rho, int j) const;
    /// log g_j, evaluated without forming the (possibly overflowing) product.
    Complex log_g(Complex rho, int j) const;

private:
    Complex alpha22(const Potential& q, std::size_t gap, Complex lambda) const;
    TimeScale ts_;
};

}  // namespace slts
