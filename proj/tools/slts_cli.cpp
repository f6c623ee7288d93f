// Command-line front end; talks to the solver only through the C interface.
#include <CLI11.hpp>

#include <cstdio>
#include <optional>
#include <string>

#include "slts/slts.h"

namespace {

struct Args {
    std::string problem;
    std::string out = ".";
    std::optional<unsigned> threads;
    std::optional<double> tol;
    std::optional<std::uint64_t> seed;
    bool dry_run = false;
    bool print_config = false;
};

void add_common(CLI::App* sub, Args& a, bool problem_required) {
    auto* opt = sub->add_option("--problem", a.problem, "problem file (YAML)");
    if (problem_required) opt->required();
    sub->add_option("--out", a.out, "output directory")->capture_default_str();
    sub->add_option("--threads", a.threads, "worker threads (default: machine parallelism)");
    sub->add_option("--tol", a.tol, "integrator relative tolerance");
    sub->add_option("--seed", a.seed, "seed for randomized suites");
    sub->add_flag("--dry-run", a.dry_run, "validate and print the plan without computing");
    sub->add_flag("--print-config", a.print_config, "print the fully resolved configuration");
}

int report(int rc) {
    if (rc != SLTS_OK) std::fprintf(stderr, "error: %s\n", slts_last_error());
    return rc;
}

int print_owned(int rc, char* text) {
    if (text) {
        std::fputs(text, stdout);
        slts_string_free(text);
    }
    return report(rc);
}

int run(const std::string& cmd, const Args& a) {
    slts_problem* p = nullptr;
    int rc = a.problem.empty() ? slts_problem_default(&p) : slts_problem_load(a.problem.c_str(), &p);
    if (rc != SLTS_OK) return report(rc);
    struct Guard {
        slts_problem* p;
        ~Guard() { slts_problem_free(p); }
    } guard{p};

    if (a.threads) rc = slts_problem_set_threads(p, *a.threads);
    if (rc == SLTS_OK && a.tol) rc = slts_problem_set_tol(p, *a.tol);
    if (rc == SLTS_OK && a.seed) rc = slts_problem_set_seed(p, *a.seed);
    if (rc != SLTS_OK) return report(rc);

    char* text = nullptr;
    if (a.print_config) {
        rc = slts_problem_config(p, &text);
        return print_owned(rc, text);
    }
    if (a.dry_run) {
        rc = slts_problem_plan(p, cmd.c_str(), a.out.c_str(), &text);
        return print_owned(rc, text);
    }

    if (cmd == "forward") return report(slts_run_forward(p, a.out.c_str()));
    if (cmd == "spectrum") return report(slts_run_spectrum(p, a.out.c_str()));
    if (cmd == "inverse") return report(slts_run_inverse(p, a.out.c_str()));

    int failed = 0;
    rc = slts_run_verify(p, &text, &failed);
    return print_owned(rc, text);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Sturm-Liouville problems on time scales"};
    app.require_subcommand(1);
    Args args;
    struct {
        const char* name;
        const char* help;
        bool needs_problem;
    } cmds[] = {
        {"forward", "characteristic functions and Weyl function on a lambda grid", true},
        {"spectrum", "eigenvalues with cluster labels", true},
        {"inverse", "reconstruct q from Weyl data or two spectra", true},
        {"verify", "run the acceptance suites and print a pass/fail table", false},
    };
    for (auto& c : cmds) add_common(app.add_subcommand(c.name, c.help), args, c.needs_problem);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return SLTS_ERR_INPUT;
    }
    return run(app.get_subcommands().front()->get_name(), args);
}
