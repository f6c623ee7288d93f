#include "slts/slts.h"

#include <cstring>
#include <filesystem>
#include <string>

#include "slts/commands.hpp"
#include "slts/verify.hpp"

struct slts_problem {
    slts::Problem p;
};

struct slts_model {
    slts::TimeScale ts;
    slts::Potential q;
};

namespace {

thread_local std::string g_last_error;

int code_of(slts::Errc c) {
    switch (c) {
        case slts::Errc::kDomain:
        case slts::Errc::kInvalidInput:
        case slts::Errc::kResolution:
            return SLTS_ERR_INPUT;
        case slts::Errc::kUnsupported:
            return SLTS_ERR_UNSUPPORTED;
        case slts::Errc::kConvergence:
            return SLTS_ERR_CONVERGENCE;
        default:
            return SLTS_ERR_NUMERIC;
    }
}

// Runs fn, mapping exceptions to status codes and the thread-local message.
template <class Fn>
int guarded(Fn&& fn) {
    g_last_error.clear();
    try {
        return fn();
    } catch (const slts::Error& e) {
        g_last_error = e.what();
        return code_of(e.code());
    } catch (const std::filesystem::filesystem_error& e) {
        g_last_error = e.what();
        return SLTS_ERR_INPUT;
    } catch (const std::exception& e) {
        g_last_error = e.what();
        return SLTS_ERR_NUMERIC;
    }
}

int fail_input(const char* msg) {
    g_last_error = msg;
    return SLTS_ERR_INPUT;
}

char* dup(const std::string& s) {
    char* out = new char[s.size() + 1];
    std::memcpy(out, s.c_str(), s.size() + 1);
    return out;
}

std::filesystem::path dir_of(const char* out_dir) { return out_dir && *out_dir ? out_dir : "."; }

}  // namespace

extern "C" {

const char* slts_last_error(void) { return g_last_error.c_str(); }

void slts_string_free(char* s) { delete[] s; }

int slts_problem_load(const char* path, slts_problem** out) {
    if (!path || !out) return fail_input("null argument");
    return guarded([&] {
        *out = new slts_problem{slts::Problem::load(path)};
        return SLTS_OK;
    });
}

int slts_problem_parse(const char* text, const char* base_dir, slts_problem** out) {
    if (!text || !out) return fail_input("null argument");
    return guarded([&] {
        *out = new slts_problem{slts::Problem::parse(text, base_dir ? base_dir : "")};
        return SLTS_OK;
    });
}

int slts_problem_default(slts_problem** out) {
    return slts_problem_parse("schema_version: 1\ntimescale: [[0, 1]]\n", nullptr, out);
}

void slts_problem_free(slts_problem* p) { delete p; }

int slts_problem_set_threads(slts_problem* p, unsigned threads) {
    if (!p) return fail_input("null problem");
    p->p.threads = threads;
    return SLTS_OK;
}

int slts_problem_set_tol(slts_problem* p, double tol) {
    if (!p) return fail_input("null problem");
    if (!(tol > 0.0 && tol < 1.0)) return fail_input("tolerance must lie in (0, 1)");
    p->p.rtol = tol;
    return SLTS_OK;
}

int slts_problem_set_seed(slts_problem* p, uint64_t seed) {
    if (!p) return fail_input("null problem");
    p->p.seed = seed;
    return SLTS_OK;
}

int slts_problem_config(const slts_problem* p, char** yaml) {
    if (!p || !yaml) return fail_input("null argument");
    return guarded([&] {
        *yaml = dup(p->p.to_yaml());
        return SLTS_OK;
    });
}

int slts_problem_plan(const slts_problem* p, const char* command, const char* out_dir, char** text) {
    if (!p || !command || !text) return fail_input("null argument");
    return guarded([&] {
        std::string cmd = command;
        if (cmd != "forward" && cmd != "spectrum" && cmd != "inverse" && cmd != "verify")
            throw slts::Error(slts::Errc::kInvalidInput, "unknown command '" + cmd + "'");
        *text = dup(slts::describe_plan(p->p, cmd, dir_of(out_dir).string()));
        return SLTS_OK;
    });
}

int slts_run_forward(const slts_problem* p, const char* out_dir) {
    if (!p) return fail_input("null problem");
    return guarded([&] {
        auto rows = slts::run_forward(p->p);
        slts::io::write_file(dir_of(out_dir) / "forward.csv", slts::io::forward_csv(rows));
        return SLTS_OK;
    });
}

int slts_run_spectrum(const slts_problem* p, const char* out_dir) {
    if (!p) return fail_input("null problem");
    return guarded([&] {
        auto spectra = slts::run_spectrum(p->p);
        slts::io::write_file(dir_of(out_dir) / "spectrum.csv", slts::io::spectrum_csv(spectra));
        return SLTS_OK;
    });
}

int slts_run_inverse(const slts_problem* p, const char* out_dir) {
    if (!p) return fail_input("null problem");
    return guarded([&] {
        auto run = slts::run_inverse(p->p);
        auto dir = dir_of(out_dir);
        slts::io::write_file(dir / "result.json", slts::io::result_json(run.ts, run.result, p->p.inverse.mode));
        slts::io::write_file(dir / "potential.csv",
                             slts::io::potential_csv(run.ts, run.result.q, p->p.inverse.samples_per_segment));
        if (run.result.ok()) return SLTS_OK;
        std::string why;
        if (!run.result.converged) why += "not converged; ";
        if (!run.result.identifiable) why += "rank-deficient sensitivity; ";
        if (run.result.misfit_flag) why += "misfit flag raised; ";
        for (auto& w : run.result.warnings) why += w + "; ";
        g_last_error = "inverse: " + why.substr(0, why.size() - 2);
        return SLTS_ERR_CONVERGENCE;
    });
}

int slts_run_verify(const slts_problem* p, char** table, int* failed) {
    if (!p || !table) return fail_input("null argument");
    return guarded([&] {
        slts::VerifyOptions vo;
        vo.seed = p->p.seed;
        vo.threads = p->p.threads;
        vo.criteria = p->p.verify.criteria;
        auto results = slts::run_criteria(vo);
        int bad = 0;
        for (auto& r : results) bad += r.pass ? 0 : 1;
        *table = dup(slts::format_criteria(results));
        if (failed) *failed = bad;
        if (bad) g_last_error = std::to_string(bad) + " criteria failed";
        return bad ? SLTS_ERR_NUMERIC : SLTS_OK;
    });
}

int slts_model_create(const double* segments, size_t n_segments, const double* coeffs_re, const double* coeffs_im,
                      size_t n_coeffs, slts_model** out) {
    if (!segments || !out || n_segments == 0) return fail_input("null or empty segment list");
    if (n_coeffs > 0 && !coeffs_re) return fail_input("null coefficient array");
    return guarded([&] {
        std::vector<slts::Segment> segs;
        for (size_t k = 0; k < n_segments; ++k) segs.push_back({segments[2 * k], segments[2 * k + 1]});
        slts::TimeScale ts(segs);
        std::vector<std::vector<slts::Complex>> c(n_segments);
        for (size_t k = 0; k < n_segments; ++k) {
            for (size_t i = 0; i < n_coeffs; ++i)
                c[k].emplace_back(coeffs_re[k * n_coeffs + i], coeffs_im ? coeffs_im[k * n_coeffs + i] : 0.0);
            if (c[k].empty()) c[k].emplace_back(0.0);
        }
        slts::Potential q(ts, c);
        *out = new slts_model{ts, q};
        return SLTS_OK;
    });
}

void slts_model_free(slts_model* m) { delete m; }

int slts_char_delta(const slts_model* m, double lambda_re, double lambda_im, int j, double* out_re, double* out_im) {
    if (!m || !out_re || !out_im) return fail_input("null argument");
    if (j != 0 && j != 1) return fail_input("j must be 0 or 1");
    return guarded([&] {
        auto d = slts::char_delta(m->ts, m->q, {lambda_re, lambda_im}, j);
        *out_re = d.real();
        *out_im = d.imag();
        return SLTS_OK;
    });
}

int slts_weyl(const slts_model* m, double lambda_re, double lambda_im, double* out_re, double* out_im) {
    if (!m || !out_re || !out_im) return fail_input("null argument");
    return guarded([&] {
        auto v = slts::weyl(m->ts, m->q, {lambda_re, lambda_im});
        *out_re = v.real();
        *out_im = v.imag();
        return SLTS_OK;
    });
}

}  // extern "C"
