#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace slts {

struct CriterionResult {
    int id = 0;
    std::string title;
    bool pass = false;
    double value = 0.0;      // worst measured quantity
    double threshold = 0.0;  // pass when value < threshold (unless noted in detail)
    std::string detail;
};

struct VerifyOptions {
    std::uint64_t seed = 1;
    unsigned threads = 0;
    std::vector<int> criteria;  // empty: all twelve
};

/// Runs the acceptance suites (ids 1..12) with deterministic random families.
std::vector<CriterionResult> run_criteria(const VerifyOptions& opts = {});

/// One line per criterion: "PASS  3  det B exactness  value=... threshold=...  detail".
std::string format_criteria(const std::vector<CriterionResult>& results);

}  // namespace slts
