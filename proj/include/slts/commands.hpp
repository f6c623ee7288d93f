#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "slts/io.hpp"
#include "slts/problem.hpp"

namespace slts {

/// Rows of the forward table in grid order. Weyl poles leave the M cells
/// empty and set the flag; other numeric failures throw with the offending lambda.
std::vector<io::ForwardRow> run_forward(const Problem& p);

/// Spectra requested by the problem (j = 0, 1 or both).
std::vector<SpectrumList> run_spectrum(const Problem& p);

struct InverseRun {
    TimeScale ts;
    ReconstructionResult result;
};

/// Loads the data files named in the problem and runs the selected inverse mode.
InverseRun run_inverse(const Problem& p);

/// Weyl samples from either a Weyl table or a forward table (rows with M).
WeylData read_weyl_table(std::string_view text);

/// Human-readable description of what `command` would compute and write.
std::string describe_plan(const Problem& p, std::string_view command, std::string_view out_dir);

}  // namespace slts
