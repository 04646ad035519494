#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "chirpsync/cli.hpp"
#include "chirpsync/io.hpp"
#include "chirpsync/signal.hpp"

using namespace chirpsync;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome invoke(std::vector<std::string> args) {
    std::ostringstream out, err;
    const int code = cli::run(args, out, err);
    return {code, out.str(), err.str()};
}

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / "chirpsync_cli_test";
    fs::create_directories(dir);
    return dir / name;
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

std::size_t count_lines(const std::string& text) {
    return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

// Preamble with a flat unit channel and a CFO rotation running over the whole frame.
fs::path rotated_capture(double eps, const std::string& name) {
    const auto frame = build_preamble({{128, 2}, {128, 8}, 16});
    SampleBuffer rx(frame.samples.size());
    for (std::size_t n = 0; n < rx.size(); ++n) {
        rx[n] = frame.samples[n] * std::polar(1.0, 2.0 * std::numbers::pi * eps * static_cast<double>(n) / 128.0 + 0.4);
    }
    const auto path = scratch(name);
    io::write_iq(path, rx);
    return path;
}

}  // namespace

TEST_CASE("preamble writes N+cp samples per symbol and a manifest") {
    const auto path = scratch("pre64.iq");
    const auto r = invoke({"preamble", "--n", "64", "--cp", "16", "--out", path.string()});
    CHECK(r.code == cli::kSuccess);
    CHECK(fs::file_size(path) == 2 * 80 * 8);
    const auto manifest = nlohmann::json::parse(slurp(path.string() + ".manifest.json"));
    CHECK(manifest["command"] == "preamble");
    CHECK(manifest["config"]["n_fft"] == 64);
    CHECK(manifest.contains("started_at"));
    CHECK(manifest.contains("tool_version"));
}

TEST_CASE("usage errors exit 2 with a message") {
    const auto out = scratch("x.iq").string();
    for (const auto& args : std::vector<std::vector<std::string>>{
             {"preamble", "--n", "63", "--out", out},
             {"preamble", "--r1", "3", "--n", "64", "--out", out},
             {"preamble", "--n", "abc", "--out", out},
             {"fig1", "--trials", "10"},
             {"fig2", "--mode", "fast", "--trials", "1", "--out", out},
             {"fig2", "--estimators", "ml", "--trials", "1", "--out", out},
             {"fig1", "--cfo", "70", "--out", out},
             {"fig1", "--paths", "5", "--out", out},
             {"nonsense"},
             {},
             {"estimate"},
             {"estimate", "/nonexistent/file.iq"},
         }) {
        const auto r = invoke(args);
        CHECK(r.code == cli::kUsageError);
        CHECK_FALSE(r.err.empty());
    }
    CHECK(invoke({"preamble", "--n", "63", "--out", out}).err.find("power of two") != std::string::npos);
}

TEST_CASE("help exits 0") {
    CHECK(invoke({"--help"}).code == 0);
    CHECK(invoke({"fig2", "--help"}).code == 0);
}

TEST_CASE("fig1 is deterministic and peaks at the offset for one path") {
    const auto a = scratch("fig1_a.csv");
    const auto b = scratch("fig1_b.csv");
    REQUIRE(invoke({"fig1", "--paths", "1", "--seed", "5", "--out", a.string()}).code == 0);
    REQUIRE(invoke({"fig1", "--paths", "1", "--seed", "5", "--out", b.string()}).code == 0);
    const auto text = slurp(a);
    CHECK(text == slurp(b));
    CHECK(count_lines(text) == 129);

    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    CHECK(line == "tau,corr_r1,corr_r2");
    std::size_t best_1 = 0, best_2 = 0;
    double max_1 = -1.0, max_2 = -1.0;
    while (std::getline(in, line)) {
        std::size_t tau = 0;
        double c1 = 0.0, c2 = 0.0;
        char comma = 0;
        std::istringstream row(line);
        row >> tau >> comma >> c1 >> comma >> c2;
        if (c1 > max_1) max_1 = c1, best_1 = tau;
        if (c2 > max_2) max_2 = c2, best_2 = tau;
    }
    CHECK(best_1 == 20);
    CHECK(best_2 == 20);
}

TEST_CASE("fig2 writes one row per snr and estimator") {
    const auto path = scratch("fig2.csv");
    const auto r = invoke({"fig2", "--trials", "20", "--snr", "0:10:20", "--threads", "2", "--out", path.string()});
    REQUIRE(r.code == 0);
    const auto text = slurp(path);
    CHECK(count_lines(text) == 1 + 3 * 2);
    CHECK(text.rfind(io::fig2_header(), 0) == 0);
    std::istringstream in(text);
    std::string line;
    std::getline(in, line);
    while (std::getline(in, line)) {
        std::vector<std::string> f;
        std::istringstream row(line);
        for (std::string cell; std::getline(row, cell, ',');) f.push_back(cell);
        REQUIRE(f.size() == 9);
        const double p = std::stod(f[5]);
        CHECK(p >= 0.0);
        CHECK(p <= 1.0);
        CHECK(f[2] == "varying");
    }

    const auto both = scratch("fig2_both.csv");
    REQUIRE(invoke({"fig2", "--trials", "5", "--snr", "10", "--mode", "both", "--out", both.string()}).code == 0);
    CHECK(count_lines(slurp(both)) == 1 + 2 * 2);
}

TEST_CASE("fig2 full grid writes one file per FFT size") {
    const auto path = scratch("grid.csv");
    const auto r = invoke({"fig2", "--paper", "--trials", "2", "--snr", "20", "--out", path.string()});
    REQUIRE(r.code == 0);
    CHECK(fs::exists(scratch("grid_n64.csv")));
    CHECK(fs::exists(scratch("grid_n128.csv")));
    CHECK(count_lines(slurp(scratch("grid_n64.csv"))) == 1 + 2 * 2);
    const auto manifest = nlohmann::json::parse(slurp(scratch("grid_n128.csv").string() + ".manifest.json"));
    CHECK(manifest["config"].size() == 2);
}

TEST_CASE("estimate recovers the offset from an IQ capture") {
    for (double eps : {20.0, -20.4, 3.25}) {
        const auto path = rotated_capture(eps, "cap.iq");
        const auto r = invoke({"estimate", path.string()});
        REQUIRE(r.code == cli::kSuccess);
        const auto j = nlohmann::json::parse(r.out);
        CHECK(j["total"].get<double>() == doctest::Approx(eps).epsilon(1e-6));
        CHECK(j["failed"] == false);
    }
}

TEST_CASE("estimate of an all-zero capture exits 3") {
    const auto path = scratch("zero.iq");
    io::write_iq(path, SampleBuffer(288));
    const auto r = invoke({"estimate", path.string()});
    CHECK(r.code == cli::kEstimationFailure);
    CHECK(nlohmann::json::parse(r.out)["failed"] == true);
}

TEST_CASE("estimate rejects truncated or short captures") {
    const auto path = scratch("trunc.iq");
    io::write_text(path, std::string(13, '\0'));
    CHECK(invoke({"estimate", path.string()}).code == cli::kUsageError);
    io::write_iq(path, SampleBuffer(100, Complex{1.0, 0.0}));
    CHECK(invoke({"estimate", path.string()}).code == cli::kUsageError);
}

TEST_CASE("config file entries are overridden by flags") {
    const auto cfg = scratch("run.cfg");
    io::write_text(cfg, "# test config\nn = 64\ncp = 8\n");
    const auto path = scratch("cfg_pre.iq");
    REQUIRE(invoke({"--config", cfg.string(), "preamble", "--out", path.string()}).code == 0);
    CHECK(fs::file_size(path) == 2 * 72 * 8);
    REQUIRE(invoke({"--config", cfg.string(), "preamble", "--cp", "0", "--out", path.string()}).code == 0);
    CHECK(fs::file_size(path) == 2 * 64 * 8);

    io::write_text(cfg, "trials = 4\n");
    CHECK(invoke({"--config", cfg.string(), "preamble", "--out", path.string()}).code == cli::kUsageError);
    io::write_text(cfg, "n = 64\nn = 32\n");
    CHECK(invoke({"--config", cfg.string(), "preamble", "--out", path.string()}).code == cli::kUsageError);
}
