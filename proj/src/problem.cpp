#include "slts/problem.hpp"

#include <yaml-cpp/yaml.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "slts/io.hpp"

namespace slts {

namespace {

[[noreturn]] void fail(const YAML::Node& n, const std::string& msg) {
    auto m = n.Mark();
    std::string at = m.is_null() ? std::string("problem file")
                                 : "problem file line " + std::to_string(m.line + 1) + " column " +
                                       std::to_string(m.column + 1);
    throw Error(Errc::kInvalidInput, at + ": " + msg);
}

void check_keys(const YAML::Node& n, std::initializer_list<std::string_view> allowed, const std::string& ctx) {
    if (!n.IsMap()) fail(n, ctx + " must be a mapping");
    for (auto it = n.begin(); it != n.end(); ++it) {
        auto key = it->first.as<std::string>();
        if (std::find(allowed.begin(), allowed.end(), key) == allowed.end())
            fail(it->first, "unknown key '" + key + "' in " + ctx);
    }
}

double as_double(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + " must be a number");
    try {
        return io::parse_double(n.Scalar(), what);
    } catch (const Error&) {
        fail(n, what + ": bad number '" + n.Scalar() + "'");
    }
}

std::uint64_t as_uint(const YAML::Node& n, const std::string& what) {
    double v = as_double(n, what);
    if (v < 0 || v != std::floor(v) || v > 9.0e15) fail(n, what + " must be a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

bool as_bool(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + " must be true or false");
    const auto& s = n.Scalar();
    if (s == "true") return true;
    if (s == "false") return false;
    fail(n, what + " must be true or false");
}

std::string as_string(const YAML::Node& n, const std::string& what) {
    if (!n.IsScalar()) fail(n, what + " must be a string");
    return n.Scalar();
}

// A number, or [re, im].
Complex as_complex(const YAML::Node& n, const std::string& what) {
    if (n.IsSequence()) {
        if (n.size() != 2) fail(n, what + " must be a number or [re, im]");
        return {as_double(n[0], what), as_double(n[1], what)};
    }
    return as_double(n, what);
}

std::vector<Complex> as_complex_list(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + " must be a list");
    std::vector<Complex> out;
    for (auto e : n) out.push_back(as_complex(e, what));
    return out;
}

std::vector<double> as_double_list(const YAML::Node& n, const std::string& what) {
    if (!n.IsSequence()) fail(n, what + " must be a list");
    std::vector<double> out;
    for (auto e : n) out.push_back(as_double(e, what));
    return out;
}

template <class T, class F>
void read(const YAML::Node& parent, const char* key, T& out, F conv, const std::string& ctx) {
    if (auto n = parent[key]) out = conv(n, ctx + "." + key);
}

void read_d(const YAML::Node& p, const char* key, double& out, const std::string& ctx) {
    read(p, key, out, as_double, ctx);
}
void read_z(const YAML::Node& p, const char* key, std::size_t& out, const std::string& ctx) {
    read(p, key, out, [](const YAML::Node& n, const std::string& w) { return static_cast<std::size_t>(as_uint(n, w)); },
         ctx);
}
void read_b(const YAML::Node& p, const char* key, bool& out, const std::string& ctx) {
    read(p, key, out, as_bool, ctx);
}
void read_s(const YAML::Node& p, const char* key, std::string& out, const std::string& ctx) {
    read(p, key, out, as_string, ctx);
}
void read_positive(const YAML::Node& p, const char* key, double& out, const std::string& ctx) {
    read_d(p, key, out, ctx);
    if (p[key] && !(out > 0.0)) fail(p[key], ctx + "." + key + " must be positive");
}

GridSpec parse_grid(const YAML::Node& n, const std::string& ctx) {
    check_keys(n, {"kind", "points", "from", "to", "n", "lambda_min", "lambda_max", "angle", "r_min", "r_max"}, ctx);
    GridSpec g;
    read_s(n, "kind", g.kind, ctx);
    static const std::set<std::string> kinds{"list", "linear", "negative_log", "ray"};
    if (!kinds.count(g.kind)) fail(n["kind"], ctx + ".kind must be list, linear, negative_log or ray");
    if (auto p = n["points"]) g.points = as_complex_list(p, ctx + ".points");
    read(n, "from", g.from, as_complex, ctx);
    read(n, "to", g.to, as_complex, ctx);
    read_z(n, "n", g.n, ctx);
    read_d(n, "lambda_min", g.lambda_min, ctx);
    read_d(n, "lambda_max", g.lambda_max, ctx);
    read_d(n, "angle", g.angle, ctx);
    read_d(n, "r_min", g.r_min, ctx);
    read_d(n, "r_max", g.r_max, ctx);
    if (g.kind == "negative_log" && !(g.lambda_min > 0 && g.lambda_max >= g.lambda_min))
        fail(n, ctx + ": need 0 < lambda_min <= lambda_max");
    if (g.kind == "ray" && !(g.r_min > 0 && g.r_max >= g.r_min)) fail(n, ctx + ": need 0 < r_min <= r_max");
    return g;
}

void emit_number(YAML::Emitter& e, double v) { e << io::format_double(v); }

void emit_complex(YAML::Emitter& e, Complex c) {
    if (c.imag() == 0.0) {
        emit_number(e, c.real());
        return;
    }
    e << YAML::Flow << YAML::BeginSeq;
    emit_number(e, c.real());
    emit_number(e, c.imag());
    e << YAML::EndSeq;
}

void emit_complex_list(YAML::Emitter& e, const std::vector<Complex>& v) {
    e << YAML::Flow << YAML::BeginSeq;
    for (auto c : v) emit_complex(e, c);
    e << YAML::EndSeq;
}

void emit_grid(YAML::Emitter& e, const GridSpec& g) {
    e << YAML::BeginMap << YAML::Key << "kind" << YAML::Value << g.kind;
    if (g.kind == "list") {
        e << YAML::Key << "points" << YAML::Value;
        emit_complex_list(e, g.points);
    } else if (g.kind == "linear") {
        e << YAML::Key << "from" << YAML::Value;
        emit_complex(e, g.from);
        e << YAML::Key << "to" << YAML::Value;
        emit_complex(e, g.to);
    } else if (g.kind == "negative_log") {
        e << YAML::Key << "lambda_min" << YAML::Value;
        emit_number(e, g.lambda_min);
        e << YAML::Key << "lambda_max" << YAML::Value;
        emit_number(e, g.lambda_max);
    } else {
        e << YAML::Key << "angle" << YAML::Value;
        emit_number(e, g.angle);
        e << YAML::Key << "r_min" << YAML::Value;
        emit_number(e, g.r_min);
        e << YAML::Key << "r_max" << YAML::Value;
        emit_number(e, g.r_max);
    }
    if (g.kind != "list") e << YAML::Key << "n" << YAML::Value << g.n;
    e << YAML::EndMap;
}

template <class V>
void kv(YAML::Emitter& e, const char* key, const V& v) {
    e << YAML::Key << key << YAML::Value;
    if constexpr (std::is_same_v<V, double>)
        emit_number(e, v);
    else
        e << v;
}

std::vector<double> logspace(double lo, double hi, std::size_t n) {
    std::vector<double> out(n);
    for (std::size_t i = 0; i < n; ++i) {
        double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
        out[i] = std::exp(std::log(lo) + t * (std::log(hi) - std::log(lo)));
    }
    if (n > 0) out.front() = lo;
    if (n > 1) out.back() = hi;
    return out;
}

}  // namespace

std::vector<Complex> GridSpec::resolve() const {
    std::vector<Complex> out;
    if (kind == "list") return points;
    if (kind == "linear") {
        for (std::size_t i = 0; i < n; ++i) {
            double t = n == 1 ? 0.0 : static_cast<double>(i) / (n - 1);
            out.push_back(from + (to - from) * t);
        }
        if (n > 1) out.back() = to;
    } else if (kind == "negative_log") {
        auto r = logspace(lambda_min, lambda_max, n);
        for (auto it = r.rbegin(); it != r.rend(); ++it) out.emplace_back(-*it, 0.0);
    } else if (kind == "ray") {
        for (double r : logspace(r_min, r_max, n)) {
            auto rho = std::polar(r, angle);
            out.push_back(rho * rho);
        }
    } else {
        throw Error(Errc::kInvalidInput, "unknown grid kind '" + kind + "'");
    }
    return out;
}

Problem Problem::parse(const std::string& text, std::filesystem::path base_dir) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw Error(Errc::kInvalidInput, "problem file line " + std::to_string(e.mark.line + 1) + " column " +
                                             std::to_string(e.mark.column + 1) + ": " + e.msg);
    }
    Problem p;
    p.base_dir = std::move(base_dir);
    check_keys(root, {"schema_version", "timescale", "potential", "threads", "seed", "integrator", "forward",
                      "spectrum", "inverse", "verify"},
               "problem");
    auto ver = root["schema_version"];
    if (!ver) fail(root, "schema_version is required");
    if (as_uint(ver, "schema_version") != kSchemaVersion)
        fail(ver, "unsupported schema_version (expected " + std::to_string(kSchemaVersion) + ")");

    auto tsn = root["timescale"];
    if (!tsn || !tsn.IsSequence() || tsn.size() == 0) fail(tsn ? tsn : root, "timescale must be a list of [a, b]");
    for (auto seg : tsn) {
        if (!seg.IsSequence() || seg.size() != 2) fail(seg, "timescale entries must be [a, b]");
        p.timescale.push_back({as_double(seg[0], "timescale"), as_double(seg[1], "timescale")});
    }
    if (auto issues = TimeScale::validate(p.timescale); !issues.empty()) fail(tsn, issues.front());

    if (auto pn = root["potential"]) {
        check_keys(pn, {"kind", "coefficients", "samples", "degree"}, "potential");
        read_s(pn, "kind", p.potential_kind, "potential");
        if (p.potential_kind == "coefficients") {
            auto c = pn["coefficients"];
            if (!c || !c.IsSequence() || c.size() != p.timescale.size())
                fail(c ? c : pn, "potential.coefficients needs one list per segment");
            for (auto seg : c) {
                p.coefficients.push_back(as_complex_list(seg, "potential.coefficients"));
                if (p.coefficients.back().empty()) fail(seg, "potential.coefficients: empty segment list");
            }
        } else if (p.potential_kind == "samples") {
            auto s = pn["samples"];
            if (!s || !s.IsSequence() || s.size() != p.timescale.size())
                fail(s ? s : pn, "potential.samples needs one {x, q} entry per segment");
            for (auto seg : s) {
                check_keys(seg, {"x", "q"}, "potential.samples");
                if (!seg["x"] || !seg["q"]) fail(seg, "potential.samples entries need x and q");
                GridFunction::Samples gs;
                gs.x = as_double_list(seg["x"], "potential.samples.x");
                gs.v = as_complex_list(seg["q"], "potential.samples.q");
                if (gs.x.size() != gs.v.size()) fail(seg, "potential.samples: x and q differ in length");
                p.samples.segments.push_back(std::move(gs));
            }
            read_z(pn, "degree", p.sample_degree, "potential");
        } else if (p.potential_kind != "zero") {
            fail(pn["kind"], "potential.kind must be zero, coefficients or samples");
        }
    }

    if (auto n = root["threads"]) p.threads = static_cast<unsigned>(as_uint(n, "threads"));
    if (auto n = root["seed"]) p.seed = as_uint(n, "seed");

    if (auto in = root["integrator"]) {
        check_keys(in, {"rtol", "max_steps", "pole_threshold"}, "integrator");
        read_positive(in, "rtol", p.rtol, "integrator");
        read_z(in, "max_steps", p.max_steps, "integrator");
        read_positive(in, "pole_threshold", p.pole_threshold, "integrator");
    }

    p.forward.grid.kind = "linear";
    p.forward.grid.from = -20.0;
    p.forward.grid.to = 20.0;
    p.forward.grid.n = 9;
    if (auto f = root["forward"]) {
        check_keys(f, {"grid", "output"}, "forward");
        if (auto g = f["grid"]) p.forward.grid = parse_grid(g, "forward.grid");
        read_s(f, "output", p.forward.output, "forward");
        static const std::set<std::string> outs{"both", "0", "1", "weyl"};
        if (!outs.count(p.forward.output)) fail(f["output"], "forward.output must be both, 0, 1 or weyl");
    }

    if (auto s = root["spectrum"]) {
        check_keys(s, {"j", "count", "lambda_max", "scan_fraction", "root_tol", "double_root_tol"}, "spectrum");
        if (auto j = s["j"]) {
            auto v = as_string(j, "spectrum.j");
            if (v == "both")
                p.spectrum.j = -1;
            else if (v == "0" || v == "1")
                p.spectrum.j = v[0] - '0';
            else
                fail(j, "spectrum.j must be 0, 1 or both");
        }
        read_z(s, "count", p.spectrum.count, "spectrum");
        if (auto lm = s["lambda_max"]; lm && !lm.IsNull()) p.spectrum.lambda_max = as_double(lm, "spectrum.lambda_max");
        read_positive(s, "scan_fraction", p.spectrum.scan_fraction, "spectrum");
        read_positive(s, "root_tol", p.spectrum.root_tol, "spectrum");
        read_positive(s, "double_root_tol", p.spectrum.double_root_tol, "spectrum");
    }

    if (auto n = root["inverse"]) {
        const std::string c = "inverse";
        auto& v = p.inverse;
        check_keys(n, {"mode", "weyl_data", "spectra", "noise", "degree", "max_iterations", "step_tol",
                       "reduction_tol", "weight_eps", "fd_step", "rank_tol", "trust_factor", "coeff_bound",
                       "misfit_tol", "trailing_condition_min", "sweeps", "sweep_tol", "polish", "K",
                       "two_spectra_misfit_tol", "ray_angle", "grid", "q_bound", "max_spread", "shift_tail",
                       "consistency_tol", "samples_per_segment"},
                   c);
        read_s(n, "mode", v.mode, c);
        if (v.mode != "weyl" && v.mode != "two-spectra") fail(n["mode"], "inverse.mode must be weyl or two-spectra");
        read_s(n, "weyl_data", v.weyl_data, c);
        read_s(n, "spectra", v.spectra, c);
        if (auto ns = n["noise"]; ns && !ns.IsNull()) v.noise = as_double(ns, "inverse.noise");
        read_z(n, "degree", v.degree, c);
        read_z(n, "max_iterations", v.max_iterations, c);
        read_positive(n, "step_tol", v.step_tol, c);
        read_positive(n, "reduction_tol", v.reduction_tol, c);
        read_positive(n, "weight_eps", v.weight_eps, c);
        read_positive(n, "fd_step", v.fd_step, c);
        read_positive(n, "rank_tol", v.rank_tol, c);
        read_positive(n, "trust_factor", v.trust_factor, c);
        read_positive(n, "coeff_bound", v.coeff_bound, c);
        read_positive(n, "misfit_tol", v.misfit_tol, c);
        read_positive(n, "trailing_condition_min", v.trailing_condition_min, c);
        read_z(n, "sweeps", v.sweeps, c);
        read_positive(n, "sweep_tol", v.sweep_tol, c);
        read_b(n, "polish", v.polish, c);
        read_z(n, "K", v.K, c);
        read_positive(n, "two_spectra_misfit_tol", v.two_spectra_misfit_tol, c);
        read_d(n, "ray_angle", v.ray_angle, c);
        if (auto g = n["grid"]; g && !g.IsNull()) v.grid = parse_grid(g, "inverse.grid");
        read_positive(n, "q_bound", v.q_bound, c);
        read_positive(n, "max_spread", v.max_spread, c);
        read_b(n, "shift_tail", v.shift_tail, c);
        read_positive(n, "consistency_tol", v.consistency_tol, c);
        read_z(n, "samples_per_segment", v.samples_per_segment, c);
        if (v.samples_per_segment < 2) fail(n, "inverse.samples_per_segment must be at least 2");
    }

    if (auto n = root["verify"]) {
        check_keys(n, {"criteria"}, "verify");
        if (auto c = n["criteria"]) {
            for (double x : as_double_list(c, "verify.criteria")) {
                if (x < 1 || x > 12 || x != std::floor(x)) fail(c, "verify.criteria entries must be 1..12");
                p.verify.criteria.push_back(static_cast<int>(x));
            }
        }
    }
    return p;
}

Problem Problem::load(const std::filesystem::path& path) {
    return parse(io::read_file(path), path.parent_path());
}

std::string Problem::to_yaml() const {
    YAML::Emitter e;
    e << YAML::BeginMap;
    kv(e, "schema_version", kSchemaVersion);
    e << YAML::Key << "timescale" << YAML::Value << YAML::BeginSeq;
    for (auto& s : timescale) {
        e << YAML::Flow << YAML::BeginSeq;
        emit_number(e, s.a);
        emit_number(e, s.b);
        e << YAML::EndSeq;
    }
    e << YAML::EndSeq;

    e << YAML::Key << "potential" << YAML::Value << YAML::BeginMap;
    kv(e, "kind", potential_kind);
    if (potential_kind == "coefficients") {
        e << YAML::Key << "coefficients" << YAML::Value << YAML::BeginSeq;
        for (auto& c : coefficients) emit_complex_list(e, c);
        e << YAML::EndSeq;
    } else if (potential_kind == "samples") {
        e << YAML::Key << "samples" << YAML::Value << YAML::BeginSeq;
        for (auto& s : samples.segments) {
            e << YAML::BeginMap << YAML::Key << "x" << YAML::Value << YAML::Flow << YAML::BeginSeq;
            for (double x : s.x) emit_number(e, x);
            e << YAML::EndSeq << YAML::Key << "q" << YAML::Value;
            emit_complex_list(e, s.v);
            e << YAML::EndMap;
        }
        e << YAML::EndSeq;
        kv(e, "degree", sample_degree);
    }
    e << YAML::EndMap;

    kv(e, "threads", threads);
    kv(e, "seed", seed);

    e << YAML::Key << "integrator" << YAML::Value << YAML::BeginMap;
    kv(e, "rtol", rtol);
    kv(e, "max_steps", max_steps);
    kv(e, "pole_threshold", pole_threshold);
    e << YAML::EndMap;

    e << YAML::Key << "forward" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "grid" << YAML::Value;
    emit_grid(e, forward.grid);
    kv(e, "output", forward.output);
    e << YAML::EndMap;

    e << YAML::Key << "spectrum" << YAML::Value << YAML::BeginMap;
    kv(e, "j", spectrum.j < 0 ? std::string("both") : std::to_string(spectrum.j));
    kv(e, "count", spectrum.count);
    e << YAML::Key << "lambda_max" << YAML::Value;
    if (spectrum.lambda_max)
        emit_number(e, *spectrum.lambda_max);
    else
        e << YAML::Null;
    kv(e, "scan_fraction", spectrum.scan_fraction);
    kv(e, "root_tol", spectrum.root_tol);
    kv(e, "double_root_tol", spectrum.double_root_tol);
    e << YAML::EndMap;

    auto& v = inverse;
    e << YAML::Key << "inverse" << YAML::Value << YAML::BeginMap;
    kv(e, "mode", v.mode);
    kv(e, "weyl_data", v.weyl_data);
    kv(e, "spectra", v.spectra);
    e << YAML::Key << "noise" << YAML::Value;
    if (v.noise)
        emit_number(e, *v.noise);
    else
        e << YAML::Null;
    kv(e, "degree", v.degree);
    kv(e, "max_iterations", v.max_iterations);
    kv(e, "step_tol", v.step_tol);
    kv(e, "reduction_tol", v.reduction_tol);
    kv(e, "weight_eps", v.weight_eps);
    kv(e, "fd_step", v.fd_step);
    kv(e, "rank_tol", v.rank_tol);
    kv(e, "trust_factor", v.trust_factor);
    kv(e, "coeff_bound", v.coeff_bound);
    kv(e, "misfit_tol", v.misfit_tol);
    kv(e, "trailing_condition_min", v.trailing_condition_min);
    kv(e, "sweeps", v.sweeps);
    kv(e, "sweep_tol", v.sweep_tol);
    kv(e, "polish", v.polish);
    kv(e, "K", v.K);
    kv(e, "two_spectra_misfit_tol", v.two_spectra_misfit_tol);
    kv(e, "ray_angle", v.ray_angle);
    e << YAML::Key << "grid" << YAML::Value;
    if (v.grid)
        emit_grid(e, *v.grid);
    else
        e << YAML::Null;
    kv(e, "q_bound", v.q_bound);
    kv(e, "max_spread", v.max_spread);
    kv(e, "shift_tail", v.shift_tail);
    kv(e, "consistency_tol", v.consistency_tol);
    kv(e, "samples_per_segment", v.samples_per_segment);
    e << YAML::EndMap;

    e << YAML::Key << "verify" << YAML::Value << YAML::BeginMap;
    e << YAML::Key << "criteria" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (int c : verify.criteria) e << c;
    e << YAML::EndSeq << YAML::EndMap;

    e << YAML::EndMap;
    return std::string(e.c_str()) + "\n";
}

TimeScale Problem::make_timescale() const { return TimeScale(timescale); }

Potential Problem::make_potential(const TimeScale& ts) const {
    if (potential_kind == "coefficients") return Potential(ts, coefficients);
    if (potential_kind == "samples") return Potential::fit(ts, samples, sample_degree);
    return Potential::zero(ts);
}

ForwardOptions Problem::forward_options() const {
    ForwardOptions o;
    o.integrator.rtol = rtol;
    o.integrator.max_steps = max_steps;
    o.pole_threshold = pole_threshold;
    return o;
}

SpectrumOptions Problem::spectrum_options() const {
    SpectrumOptions o;
    o.forward = forward_options();
    o.scan_fraction = spectrum.scan_fraction;
    o.root_tol = spectrum.root_tol;
    o.double_root_tol = spectrum.double_root_tol;
    o.threads = threads;
    return o;
}

InverseOptions Problem::inverse_options() const {
    InverseOptions o;
    auto& v = inverse;
    o.forward = forward_options();
    o.degree = v.degree;
    o.max_iterations = v.max_iterations;
    o.step_tol = v.step_tol;
    o.reduction_tol = v.reduction_tol;
    o.weight_eps = v.weight_eps;
    o.fd_step = v.fd_step;
    o.rank_tol = v.rank_tol;
    o.trust_factor = v.trust_factor;
    o.coeff_bound = v.coeff_bound;
    o.misfit_tol = v.misfit_tol;
    o.trailing_condition_min = v.trailing_condition_min;
    o.sweeps = v.sweeps;
    o.sweep_tol = v.sweep_tol;
    o.polish = v.polish;
    o.threads = threads;
    return o;
}

TwoSpectraOptions Problem::two_spectra_options() const {
    TwoSpectraOptions o;
    o.inverse = inverse_options();
    o.misfit_tol = inverse.two_spectra_misfit_tol;
    o.hadamard.q_bound = inverse.q_bound;
    o.hadamard.max_spread = inverse.max_spread;
    o.hadamard.shift_tail = inverse.shift_tail;
    o.hadamard.consistency_tol = inverse.consistency_tol;
    o.K = inverse.K;
    if (inverse.grid) o.grid = inverse.grid->resolve();
    o.ray_angle = inverse.ray_angle;
    return o;
}

std::filesystem::path Problem::resolve(const std::string& relative) const {
    std::filesystem::path p(relative);
    return p.is_absolute() || base_dir.empty() ? p : base_dir / p;
}

}  // namespace slts
