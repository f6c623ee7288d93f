#include "slts/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <nlohmann/json.hpp>
#include <sstream>

namespace slts::io {

namespace {

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

// Non-empty lines, CR stripped.
std::vector<std::string_view> lines_of(std::string_view text) {
    std::vector<std::string_view> out;
    for (auto l : split(text, '\n')) {
        if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
        if (!l.empty()) out.push_back(l);
    }
    return out;
}

void expect_header(const std::vector<std::string_view>& lines, std::string_view header, std::string_view what) {
    if (lines.empty() || lines.front() != header)
        throw Error(Errc::kInvalidInput,
                    std::string(what) + ": expected header '" + std::string(header) + "'");
}

std::string where(std::string_view what, std::size_t line) {
    return std::string(what) + " line " + std::to_string(line + 1);
}

std::optional<Complex> parse_pair(std::string_view re, std::string_view im, const std::string& what) {
    if (re.empty() && im.empty()) return std::nullopt;
    return Complex(parse_double(re, what), parse_double(im, what));
}

void put_pair(std::string& out, const std::optional<Complex>& v) {
    out += ',';
    if (v) out += format_double(v->real());
    out += ',';
    if (v) out += format_double(v->imag());
}

std::string clean_flag(std::string s) {
    for (auto& ch : s)
        if (ch == ',' || ch == '\n' || ch == '\r') ch = ';';
    return s;
}

std::size_t parse_index(std::string_view s, const std::string& what) {
    std::size_t v = 0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || p != s.data() + s.size())
        throw Error(Errc::kInvalidInput, what + ": bad integer '" + std::string(s) + "'");
    return v;
}

nlohmann::json complex_array(const std::vector<Complex>& v) {
    bool real = true;
    for (auto& c : v) real = real && c.imag() == 0.0;
    auto out = nlohmann::json::array();
    for (auto& c : v) {
        if (real)
            out.push_back(c.real());
        else
            out.push_back({c.real(), c.imag()});
    }
    return out;
}

nlohmann::json fit_json(const SegmentFit& f) {
    return {{"misfit", f.misfit},         {"iterations", f.iterations}, {"samples", f.samples},
            {"converged", f.converged}, {"identifiable", f.identifiable}, {"status", f.status},
            {"history", f.history}};
}

}  // namespace

std::string format_double(double v) {
    char buf[32];
    auto [p, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error(Errc::kInvalidInput, "cannot format number");
    return std::string(buf, p);
}

double parse_double(std::string_view s, std::string_view what) {
    while (!s.empty() && s.front() == ' ') s.remove_prefix(1);
    while (!s.empty() && s.back() == ' ') s.remove_suffix(1);
    if (!s.empty() && s.front() == '+') s.remove_prefix(1);
    double v = 0.0;
    auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (s.empty() || ec != std::errc() || p != s.data() + s.size())
        throw Error(Errc::kInvalidInput, std::string(what) + ": bad number '" + std::string(s) + "'");
    return v;
}

std::string forward_csv(const std::vector<ForwardRow>& rows) {
    std::string out(kForwardHeader);
    out += '\n';
    for (auto& r : rows) {
        out += format_double(r.lambda.real());
        out += ',';
        out += format_double(r.lambda.imag());
        put_pair(out, r.delta0);
        put_pair(out, r.delta1);
        put_pair(out, r.M);
        out += ',';
        out += clean_flag(r.flag);
        out += '\n';
    }
    return out;
}

std::vector<ForwardRow> read_forward_csv(std::string_view text) {
    auto lines = lines_of(text);
    expect_header(lines, kForwardHeader, "forward table");
    std::vector<ForwardRow> rows;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(lines[i], ',');
        auto w = where("forward table", i);
        if (f.size() != 9) throw Error(Errc::kInvalidInput, w + ": expected 9 fields");
        ForwardRow r;
        auto lam = parse_pair(f[0], f[1], w);
        if (!lam) throw Error(Errc::kInvalidInput, w + ": missing lambda");
        r.lambda = *lam;
        r.delta0 = parse_pair(f[2], f[3], w);
        r.delta1 = parse_pair(f[4], f[5], w);
        r.M = parse_pair(f[6], f[7], w);
        r.flag = std::string(f[8]);
        rows.push_back(std::move(r));
    }
    return rows;
}

std::string spectrum_csv(const std::vector<SpectrumList>& spectra) {
    std::string out(kSpectrumHeader);
    out += '\n';
    for (auto& s : spectra) {
        std::size_t n = 0;
        for (auto& e : s.eigenvalues) {
            out += std::to_string(s.j) + ',' + std::to_string(++n) + ',' + format_double(e.lambda) + ',';
            out += std::to_string(e.nu) + ',' + std::to_string(e.k) + ',' + format_double(e.residual) + ',';
            out += format_double(e.seed_rho) + ',' + format_double(e.deviation()) + '\n';
        }
    }
    return out;
}

SpectrumList read_spectrum_csv(std::string_view text, int j) {
    auto lines = lines_of(text);
    if (lines.empty() || !lines.front().starts_with("j,n,lambda"))
        throw Error(Errc::kInvalidInput, "spectrum table: header must start with 'j,n,lambda'");
    SpectrumList out;
    out.j = j;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(lines[i], ',');
        auto w = where("spectrum table", i);
        if (f.size() < 3) throw Error(Errc::kInvalidInput, w + ": expected at least 3 fields");
        if (static_cast<int>(parse_index(f[0], w)) != j) continue;
        Eigenvalue e{};
        e.lambda = parse_double(f[2], w);
        e.bracket_lo = e.bracket_hi = e.lambda;
        out.eigenvalues.push_back(e);
    }
    for (std::size_t i = 1; i < out.eigenvalues.size(); ++i)
        if (!(out.eigenvalues[i].lambda > out.eigenvalues[i - 1].lambda))
            throw Error(Errc::kInvalidInput, "spectrum table: eigenvalues of j=" + std::to_string(j) +
                                                 " are not strictly increasing");
    return out;
}

std::string weyl_csv(const WeylData& data) {
    std::string out(kWeylHeader);
    out += '\n';
    for (std::size_t i = 0; i < data.size(); ++i) {
        out += format_double(data.lambda[i].real()) + ',' + format_double(data.lambda[i].imag()) + ',';
        out += format_double(data.M[i].real()) + ',' + format_double(data.M[i].imag()) + '\n';
    }
    return out;
}

WeylData read_weyl_csv(std::string_view text) {
    auto lines = lines_of(text);
    expect_header(lines, kWeylHeader, "Weyl table");
    WeylData d;
    for (std::size_t i = 1; i < lines.size(); ++i) {
        auto f = split(lines[i], ',');
        auto w = where("Weyl table", i);
        if (f.size() != 4) throw Error(Errc::kInvalidInput, w + ": expected 4 fields");
        d.lambda.emplace_back(parse_double(f[0], w), parse_double(f[1], w));
        d.M.emplace_back(parse_double(f[2], w), parse_double(f[3], w));
    }
    d.check();
    return d;
}

std::string potential_csv(const TimeScale& ts, const Potential& q, std::size_t points) {
    std::string out(kPotentialHeader);
    out += '\n';
    for (std::size_t k = 0; k < ts.size(); ++k) {
        auto s = ts.segment(k);
        for (std::size_t i = 0; i < points; ++i) {
            double x = points == 1 ? s.a : s.a + s.length() * static_cast<double>(i) / (points - 1);
            if (i + 1 == points) x = s.b;
            auto v = q(k, x);
            out += std::to_string(k + 1) + ',' + format_double(ts.to_original(x)) + ',';
            out += format_double(v.real()) + ',' + format_double(v.imag()) + '\n';
        }
    }
    return out;
}

std::string result_json(const TimeScale& ts, const ReconstructionResult& res, std::string_view mode) {
    nlohmann::json j;
    j["schema_version"] = 1;
    j["mode"] = std::string(mode);
    j["degree"] = res.q.degree();
    auto segs = nlohmann::json::array();
    for (std::size_t k = 0; k < ts.size(); ++k) {
        auto s = ts.original_segment(k);
        nlohmann::json e{{"index", k + 1}, {"a", s.a}, {"b", s.b},
                         {"coefficients", complex_array(res.q.segment(k).coeffs())}};
        if (k < res.segments.size()) e["fit"] = fit_json(res.segments[k]);
        segs.push_back(std::move(e));
    }
    j["segments"] = std::move(segs);
    if (res.polish) j["polish"] = fit_json(*res.polish);
    j["misfit"] = res.misfit;
    j["misfit_reevaluated"] = res.misfit_reevaluated;
    j["misfit_threshold"] = res.misfit_threshold;
    j["converged"] = res.converged;
    j["identifiable"] = res.identifiable;
    j["misfit_flag"] = res.misfit_flag;
    j["ok"] = res.ok();
    j["truncation_error"] = res.truncation_error ? nlohmann::json(*res.truncation_error) : nlohmann::json();
    j["warnings"] = res.warnings;
    return j.dump(2) + "\n";
}

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(Errc::kInvalidInput, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, std::string_view text) {
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) throw Error(Errc::kInvalidInput, "cannot write " + path.string());
}

}  // namespace slts::io
