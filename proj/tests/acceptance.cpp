// Acceptance table: one PASS/FAIL line per criterion, nonzero exit if any fails.
#include <cstdio>
#include <cstdlib>
#include <string>

#include "slts/verify.hpp"

int main(int argc, char** argv) {
    slts::VerifyOptions opts;
    for (int i = 1; i < argc; ++i) opts.criteria.push_back(std::atoi(argv[i]));
    auto results = slts::run_criteria(opts);
    std::fputs(slts::format_criteria(results).c_str(), stdout);
    int failed = 0;
    for (auto& r : results) failed += r.pass ? 0 : 1;
    std::printf("%d/%zu criteria pass\n", int(results.size()) - failed, results.size());
    return failed ? 1 : 0;
}
