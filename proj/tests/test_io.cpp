#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <random>

#include "slts/commands.hpp"

using namespace slts;

namespace {

const char* kMinimal = "schema_version: 1\ntimescale: [[0, 1], [2, 3]]\n";

std::string error_of(const std::string& yaml) {
    try {
        Problem::parse(yaml);
    } catch (const Error& e) {
        CHECK(e.code() == Errc::kInvalidInput);
        return e.what();
    }
    return "";
}

}  // namespace

TEST_CASE("shortest round-trip doubles") {
    std::mt19937_64 rng(1);
    std::uniform_real_distribution<double> u(-1e6, 1e6);
    for (int i = 0; i < 1000; ++i) {
        double v = u(rng) * std::pow(10.0, i % 40 - 20);
        CHECK(io::parse_double(io::format_double(v), "v") == v);
    }
    CHECK(io::format_double(0.1) == "0.1");
    CHECK(io::format_double(-3.0) == "-3");
    CHECK(io::format_double(1e-14) == "1e-14");
    CHECK_THROWS_AS(io::parse_double("1.5x", "v"), Error);
    CHECK_THROWS_AS(io::parse_double("", "v"), Error);
}

TEST_CASE("forward table re-emits byte for byte") {
    std::vector<io::ForwardRow> rows(3);
    rows[0] = {0.0, Complex(3, 0), Complex(1, 0), Complex(-3, 0), ""};
    rows[1] = {Complex(2.4674011002723395, 0), Complex(0.1, -2e-300), Complex(1e-17, 0), std::nullopt, "pole"};
    rows[2] = {Complex(-7.25, 1.0 / 3.0), std::nullopt, std::nullopt, Complex(-0.2, 0.01), ""};
    auto text = io::forward_csv(rows);
    CHECK(io::forward_csv(io::read_forward_csv(text)) == text);
    CHECK(text.starts_with(std::string(io::kForwardHeader) + "\n0,0,3,0,1,0,-3,0,\n"));
    CHECK(text.find(",,pole\n") != std::string::npos);
}

TEST_CASE("forward table of the zero potential at lambda = 0") {
    auto p = Problem::parse(std::string(kMinimal) + "forward: {grid: {kind: list, points: [0, -1]}}\n");
    auto rows = run_forward(p);
    REQUIRE(rows.size() == 2);
    CHECK(std::abs(*rows[0].delta0 - 3.0) < 1e-13);
    CHECK(std::abs(*rows[0].delta1 - 1.0) < 1e-13);
    CHECK(std::abs(*rows[0].M + 3.0) < 1e-13);
    auto text = io::forward_csv(rows);
    CHECK(io::forward_csv(io::read_forward_csv(text)) == text);
}

TEST_CASE("forward table marks poles") {
    auto p = Problem::parse("schema_version: 1\ntimescale: [[0, 1]]\n"
                            "forward: {grid: {kind: list, points: [2.4674011002723395]}}\n");
    auto rows = run_forward(p);
    CHECK_FALSE(rows[0].M);
    CHECK(rows[0].flag == "pole");
    CHECK(rows[0].delta0);
}

TEST_CASE("spectrum table") {
    auto p = Problem::parse("schema_version: 1\ntimescale: [[0, 3.141592653589793]]\n"
                            "spectrum: {j: 0, count: 3}\n");
    auto spectra = run_spectrum(p);
    REQUIRE(spectra.size() == 1);
    auto text = io::spectrum_csv(spectra);
    auto back = io::read_spectrum_csv(text, 0);
    REQUIRE(back.eigenvalues.size() == 3);
    for (int n = 1; n <= 3; ++n) CHECK(back.eigenvalues[n - 1].lambda == doctest::Approx(n * n).epsilon(1e-12));
    CHECK(io::read_spectrum_csv(text, 1).eigenvalues.empty());

    auto none = Problem::parse("schema_version: 1\ntimescale: [[0, 1]]\nspectrum: {j: 0, count: 0}\n");
    CHECK(io::spectrum_csv(run_spectrum(none)) == std::string(io::kSpectrumHeader) + "\n");

    auto cplx = Problem::parse("schema_version: 1\ntimescale: [[0, 1]]\n"
                               "potential: {kind: coefficients, coefficients: [[[0, 1]]]}\n");
    try {
        run_spectrum(cplx);
        FAIL("expected an unsupported-mode error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::kUnsupported);
    }
}

TEST_CASE("Weyl table") {
    WeylData d;
    d.lambda = {-1.0, Complex(2, 3)};
    d.M = {Complex(-0.7, 0), Complex(0.1, -0.2)};
    auto text = io::weyl_csv(d);
    auto back = io::read_weyl_csv(text);
    CHECK(back.lambda == d.lambda);
    CHECK(back.M == d.M);
    CHECK(io::weyl_csv(back) == text);
    CHECK_THROWS_AS(io::read_weyl_csv("lambda_re,lambda_im,M_re,M_im\n1,2,3\n"), Error);
}

TEST_CASE("potential samples per segment") {
    TimeScale ts({{1, 2}, {3, 5}});
    auto text = io::potential_csv(ts, Potential::zero(ts), 101);
    std::size_t lines = std::count(text.begin(), text.end(), '\n');
    CHECK(lines == 1 + 2 * 101);
    CHECK(text.find("\n1,1,0,0\n") != std::string::npos);
    CHECK(text.find("\n2,5,0,0\n") != std::string::npos);
}

TEST_CASE("problem schema errors carry positions") {
    auto unknown = error_of(std::string(kMinimal) + "forwrd: {}\n");
    CHECK(unknown.find("unknown key 'forwrd'") != std::string::npos);
    CHECK(unknown.find("line 3 column 1") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "inverse: {degre: 2}\n").find("unknown key 'degre'") != std::string::npos);
    CHECK(error_of("timescale: [[0, 1]]\n").find("schema_version") != std::string::npos);
    CHECK(error_of("schema_version: 2\ntimescale: [[0, 1]]\n").find("unsupported") != std::string::npos);
    CHECK(error_of("schema_version: 1\ntimescale: [[0, 2], [1, 3]]\n").find("overlap") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "integrator: {rtol: abc}\n").find("line 3") != std::string::npos);
    CHECK(error_of(std::string(kMinimal) + "potential: {kind: coefficients, coefficients: [[1]]}\n")
              .find("one list per segment") != std::string::npos);
    CHECK_FALSE(error_of("schema_version: 1\ntimescale: [[0, 1]\n").empty());
}

TEST_CASE("printed configuration parses back to itself") {
    auto p = Problem::parse(std::string(kMinimal) +
                            "potential: {kind: coefficients, coefficients: [[0.1, [0.2, -0.5]], [3]]}\n"
                            "forward: {grid: {kind: ray, angle: 0.3, r_min: 1, r_max: 9, n: 4}, output: weyl}\n"
                            "spectrum: {j: 1, lambda_max: 250}\n"
                            "inverse: {mode: two-spectra, K: 12, noise: 0.01,"
                            " grid: {kind: negative_log, lambda_min: 0.5, lambda_max: 40, n: 7}}\n"
                            "verify: {criteria: [2, 5]}\n");
    auto yaml = p.to_yaml();
    auto again = Problem::parse(yaml);
    CHECK(again.to_yaml() == yaml);
    CHECK(again.coefficients[0][1] == Complex(0.2, -0.5));
    CHECK(again.forward.grid.resolve() == p.forward.grid.resolve());
    CHECK(*again.spectrum.lambda_max == 250.0);
    CHECK(again.inverse.grid->resolve().size() == 7);
    CHECK(again.verify.criteria == std::vector<int>{2, 5});
    CHECK(yaml.find("rtol: 1e-14") != std::string::npos);
}

TEST_CASE("grid kinds") {
    GridSpec g;
    g.kind = "negative_log";
    g.lambda_min = 1;
    g.lambda_max = 60;
    g.n = 30;
    auto pts = g.resolve();
    CHECK(pts.front() == Complex(-60, 0));
    CHECK(pts.back() == Complex(-1, 0));
    g.kind = "linear";
    g.from = -2.0;
    g.to = 2.0;
    g.n = 5;
    CHECK(g.resolve()[2] == Complex(0, 0));
    g.kind = "ray";
    g.angle = 0.1;
    g.r_min = 1;
    g.r_max = 8;
    g.n = 3;
    auto ray = g.resolve();
    CHECK(std::abs(std::sqrt(ray[2]) - std::polar(8.0, 0.1)) < 1e-14);
}

TEST_CASE("inverse reads forward tables as Weyl data") {
    auto p = Problem::parse(std::string(kMinimal) + "forward: {output: weyl,"
                                                    " grid: {kind: negative_log, lambda_min: 1, lambda_max: 60, n: 30}}\n");
    auto text = io::forward_csv(run_forward(p));
    auto d = read_weyl_table(text);
    CHECK(d.size() == 30);
    CHECK(std::abs(d.M.back() + std::tanh(1.0)) > 0.0);
}

TEST_CASE("missing data files are input errors") {
    auto p = Problem::parse(std::string(kMinimal) + "inverse: {weyl_data: no_such_file.csv}\n",
                            std::filesystem::temp_directory_path());
    try {
        run_inverse(p);
        FAIL("expected an input error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::kInvalidInput);
    }
    CHECK_THROWS_AS(describe_plan(p, "inverse", "out"), Error);
}

#ifdef SLTS_FIXTURE_DIR
// Compares the CLI output of the checked-in round-trip fixtures with the true potential.
TEST_CASE("cli fixture round trip" * doctest::skip(std::getenv("SLTS_CLI_OUT") == nullptr)) {
    std::filesystem::path out = std::getenv("SLTS_CLI_OUT");
    std::filesystem::path fixtures = SLTS_FIXTURE_DIR;
    struct Case {
        const char* dir;
        const char* truth;
        double tol;
    } cases[] = {{"ip1", "forward.yaml", 1e-6}, {"ip2", "spectrum.yaml", 5e-2}};
    for (auto& c : cases) {
        auto truth = Problem::load(fixtures / c.dir / c.truth);
        auto ts = truth.make_timescale();
        auto q = truth.make_potential(ts);
        auto text = io::read_file(out / c.dir / "potential.csv");
        std::istringstream in(text);
        std::string line;
        std::getline(in, line);
        CHECK(line == std::string(io::kPotentialHeader));
        double worst = 0.0;
        std::size_t rows = 0;
        while (std::getline(in, line)) {
            auto c1 = line.find(','), c2 = line.find(',', c1 + 1), c3 = line.find(',', c2 + 1);
            std::size_t k = std::stoul(line.substr(0, c1)) - 1;
            double x = io::parse_double(line.substr(c1 + 1, c2 - c1 - 1), "x");
            double v = io::parse_double(line.substr(c2 + 1, c3 - c2 - 1), "q");
            worst = std::max(worst, std::abs(q(k, ts.to_normalized(x)) - v));
            ++rows;
        }
        INFO(std::string(c.dir) << " max |q - q^| = " << worst);
        CHECK(rows == 2 * 101);
        CHECK(worst < c.tol);
    }
}
#endif
