#include "slts/commands.hpp"

#include <sstream>

#include "slts/parallel.hpp"

namespace slts {

namespace {

std::string lambda_text(Complex l) {
    return "lambda=(" + io::format_double(l.real()) + "," + io::format_double(l.imag()) + ")";
}

std::vector<int> requested_js(const Problem& p) {
    if (p.spectrum.j < 0) return {0, 1};
    return {p.spectrum.j};
}

}  // namespace

std::vector<io::ForwardRow> run_forward(const Problem& p) {
    auto ts = p.make_timescale();
    auto q = p.make_potential(ts);
    auto fo = p.forward_options();
    auto grid = p.forward.grid.resolve();
    const auto& out = p.forward.output;
    bool want_delta = out != "weyl";
    bool want_m = out == "both" || out == "weyl";

    std::vector<io::ForwardRow> rows(grid.size());
    parallel_for(grid.size(), p.threads, [&](std::size_t i) {
        auto& r = rows[i];
        r.lambda = grid[i];
        try {
            if (want_delta) {
                auto tr = solve_sc(ts, q, grid[i], fo);
                if (out != "1") r.delta0 = tr.delta0;
                if (out != "0") r.delta1 = tr.delta1;
            }
            if (want_m) {
                try {
                    r.M = weyl(ts, q, grid[i], fo);
                } catch (const Error& e) {
                    if (e.code() != Errc::kPole) throw;
                    r.flag = "pole";
                }
            }
        } catch (const Error& e) {
            throw Error(e.code(), lambda_text(grid[i]) + ": " + e.what());
        }
    });
    return rows;
}

std::vector<SpectrumList> run_spectrum(const Problem& p) {
    auto ts = p.make_timescale();
    auto q = p.make_potential(ts);
    auto so = p.spectrum_options();
    std::vector<SpectrumList> out;
    for (int j : requested_js(p)) {
        if (!q.is_real())
            throw Error(Errc::kUnsupported, "eigenvalue search needs a real potential");
        if (!p.spectrum.lambda_max && p.spectrum.count == 0) {
            SpectrumList empty;
            empty.j = j;
            out.push_back(std::move(empty));
            continue;
        }
        std::optional<std::size_t> count;
        if (!p.spectrum.lambda_max) count = p.spectrum.count;
        out.push_back(find_eigenvalues(ts, q, j, count, p.spectrum.lambda_max, so));
    }
    return out;
}

WeylData read_weyl_table(std::string_view text) {
    if (text.substr(0, io::kForwardHeader.size()) != io::kForwardHeader) return io::read_weyl_csv(text);
    WeylData d;
    for (auto& r : io::read_forward_csv(text)) {
        if (!r.M) continue;
        d.lambda.push_back(r.lambda);
        d.M.push_back(*r.M);
    }
    d.check();
    return d;
}

InverseRun run_inverse(const Problem& p) {
    auto ts = p.make_timescale();
    const auto& v = p.inverse;
    if (v.mode == "weyl") {
        if (v.weyl_data.empty()) throw Error(Errc::kInvalidInput, "inverse.weyl_data is required in weyl mode");
        auto data = read_weyl_table(io::read_file(p.resolve(v.weyl_data)));
        data.noise = v.noise;
        return {ts, solve_inverse_weyl(ts, data, p.inverse_options())};
    }
    if (v.spectra.empty()) throw Error(Errc::kInvalidInput, "inverse.spectra is required in two-spectra mode");
    auto text = io::read_file(p.resolve(v.spectra));
    auto s0 = io::read_spectrum_csv(text, 0);
    auto s1 = io::read_spectrum_csv(text, 1);
    return {ts, solve_inverse_two_spectra(ts, s0, s1, p.two_spectra_options())};
}

std::string describe_plan(const Problem& p, std::string_view command, std::string_view out_dir) {
    auto ts = p.make_timescale();
    std::ostringstream os;
    os << "command: " << command << "\n";
    os << "segments: " << ts.size() << ", b_N - a_1 = " << io::format_double(ts.end()) << "\n";
    os << "potential: " << p.potential_kind << "\n";
    os << "threads: " << (p.threads ? std::to_string(p.threads) : std::string("machine")) << "\n";
    if (command == "forward") {
        auto grid = p.forward.grid.resolve();
        os << "grid: " << p.forward.grid.kind << ", " << grid.size() << " points; output " << p.forward.output << "\n";
        os << "writes: " << out_dir << "/forward.csv\n";
    } else if (command == "spectrum") {
        for (int j : requested_js(p)) {
            os << "spectrum j=" << j << ": ";
            if (p.spectrum.lambda_max)
                os << "all eigenvalues up to " << io::format_double(*p.spectrum.lambda_max) << "\n";
            else
                os << "first " << p.spectrum.count << " eigenvalues\n";
        }
        os << "writes: " << out_dir << "/spectrum.csv\n";
    } else if (command == "inverse") {
        const auto& v = p.inverse;
        os << "mode: " << v.mode << ", degree " << v.degree << "\n";
        auto data = v.mode == "weyl" ? v.weyl_data : v.spectra;
        if (data.empty()) throw Error(Errc::kInvalidInput, "inverse: no data file given");
        auto path = p.resolve(data);
        if (!std::filesystem::exists(path)) throw Error(Errc::kInvalidInput, "missing data file " + path.string());
        os << "data: " << path.string() << "\n";
        if (v.mode == "two-spectra") os << "K: " << (v.K ? std::to_string(v.K) : std::string("all")) << "\n";
        os << "writes: " << out_dir << "/result.json, " << out_dir << "/potential.csv\n";
    } else if (command == "verify") {
        os << "criteria: ";
        if (p.verify.criteria.empty()) os << "all";
        for (std::size_t i = 0; i < p.verify.criteria.size(); ++i) os << (i ? "," : "") << p.verify.criteria[i];
        os << "; seed " << p.seed << "\n";
    }
    return os.str();
}

}  // namespace slts
