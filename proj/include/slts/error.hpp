#pragma once

#include <complex>
#include <stdexcept>
#include <string>

namespace slts {

using Complex = std::complex<double>;

enum class Errc {
    kDomain = 1,        // argument outside T, T^0, or an operation's domain
    kInvalidInput,      // malformed time scale, potential, problem file, data
    kResolution,        // too few samples for the requested accuracy
    kIntegration,       // step-size underflow inside the ODE solver
    kPole,              // lambda is an L1 eigenvalue (Weyl function pole)
    kDegenerate,        // rho = 0 in the matrix pathway
    kTailModel,         // Hadamard constant did not converge
    kConvergence,       // optimizer did not converge
    kUnsupported,       // e.g. eigenvalue search for complex q
};

const char* to_string(Errc code);

/// Library-wide exception; carries a category used by the C API and CLI.
class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

}  // namespace slts
