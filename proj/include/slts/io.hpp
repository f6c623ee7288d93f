#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "slts/inverse.hpp"
#include "slts/spectrum.hpp"

namespace slts::io {

/// Shortest decimal string that parses back to the same double.
std::string format_double(double v);
/// Whole-field parse; throws Errc::kInvalidInput naming `what` on failure.
double parse_double(std::string_view s, std::string_view what);

/// One row of the forward table. Empty optionals are written as empty cells.
struct ForwardRow {
    Complex lambda;
    std::optional<Complex> delta0;
    std::optional<Complex> delta1;
    std::optional<Complex> M;
    std::string flag;  // empty, or why a column is missing
};

inline constexpr std::string_view kForwardHeader =
    "lambda_re,lambda_im,delta0_re,delta0_im,delta1_re,delta1_im,M_re,M_im,flag";
inline constexpr std::string_view kSpectrumHeader = "j,n,lambda,cluster_nu,cluster_k,residual,seed_rho,deviation";
inline constexpr std::string_view kWeylHeader = "lambda_re,lambda_im,M_re,M_im";
inline constexpr std::string_view kPotentialHeader = "segment,x,q_re,q_im";

std::string forward_csv(const std::vector<ForwardRow>& rows);
std::vector<ForwardRow> read_forward_csv(std::string_view text);

/// Rows of one or more spectra; n is 1-based.
std::string spectrum_csv(const std::vector<SpectrumList>& spectra);
/// Rows with the given j. Only the j, n and lambda columns are required;
/// the cluster columns are diagnostics and are recomputed on use.
SpectrumList read_spectrum_csv(std::string_view text, int j);

std::string weyl_csv(const WeylData& data);
WeylData read_weyl_csv(std::string_view text);

/// q sampled at `points` equispaced original coordinates per segment.
std::string potential_csv(const TimeScale& ts, const Potential& q, std::size_t points = 101);

/// Reconstruction result with per-segment coefficients, misfits and flags.
std::string result_json(const TimeScale& ts, const ReconstructionResult& res, std::string_view mode);

std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, std::string_view text);

}  // namespace slts::io
