#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "exponent_kit/problem_io.hpp"
#include "helpers.hpp"

using namespace exponent_kit;
namespace fs = std::filesystem;

namespace {

fs::path data_dir() {
    fs::path dir(EK_TEST_DATA);
    fs::create_directories(dir);
    return dir;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

int run_cli(const std::string& args) {
    std::string cmd = std::string(EK_CLI_PATH) + " " + args + " 2>/dev/null";
    int status = std::system(cmd.c_str());
    return WEXITSTATUS(status);
}

const char* kBscJson = R"({"type":"channel","matrix":[[0.9,0.1],[0.1,0.9]],"cost":[0,0]})";
const char* kSourceJson =
    R"({"type":"source","matrix":[[0.5,0.5]],"distortion":[[0,1],[1,0]]})";

} // namespace

TEST_CASE("parse_problem accepts the documented schema") {
    Problem p = parse_problem(nlohmann::json::parse(kBscJson));
    auto& ch = std::get<ChannelProblem>(p);
    CHECK(ch.nx() == 2);
    CHECK(ch.w(0, 0) == doctest::Approx(0.9));

    Problem s = parse_problem(nlohmann::json::parse(kSourceJson));
    auto& src = std::get<SourceProblem>(s);
    CHECK(src.ny() == 2);
    CHECK(src.d(0, 1) == doctest::Approx(1.0));
}

TEST_CASE("parse_problem validation errors") {
    CHECK_THROWS_AS(parse_problem(nlohmann::json::parse(R"({"matrix":[[1]]})")),
                    std::invalid_argument);
    // row sum off by 0.02: rejected
    CHECK_THROWS_AS(
        parse_problem(nlohmann::json::parse(
            R"({"type":"channel","matrix":[[0.49,0.49],[0.5,0.5]]})")),
        std::invalid_argument);
    // negative entries: rejected
    CHECK_THROWS_AS(
        parse_problem(nlohmann::json::parse(
            R"({"type":"channel","matrix":[[1.2,-0.2],[0.5,0.5]]})")),
        std::invalid_argument);
    // tiny drift is renormalized
    Problem p = parse_problem(nlohmann::json::parse(
        R"({"type":"channel","matrix":[[0.9000000001,0.1],[0.1,0.9]]})"));
    auto& ch = std::get<ChannelProblem>(p);
    double sum = ch.w(0, 0) + ch.w(0, 1);
    CHECK(std::abs(sum - 1.0) <= 1e-12);
    // missing zero-distortion column: error only in strict mode
    auto j = nlohmann::json::parse(
        R"({"type":"source","matrix":[[0.5,0.5]],"distortion":[[0.2,1],[1,0]]})");
    CHECK_NOTHROW(parse_problem(j));
    CHECK_THROWS_AS(parse_problem(j, true), std::invalid_argument);
}

TEST_CASE("emit/parse round-trips canonical problems bit-exactly") {
    Rng rng(81);
    ChannelProblem ch = rng.channel(3, 2, 1.0);
    Problem p = ch;
    nlohmann::json j = emit_problem(p);
    Problem back = parse_problem(nlohmann::json::parse(j.dump()));
    auto& ch2 = std::get<ChannelProblem>(back);
    for (std::size_t x = 0; x < 3; ++x) {
        CHECK(ch.cost[x] == ch2.cost[x]);
        for (std::size_t y = 0; y < 2; ++y) CHECK(ch.w(x, y) == ch2.w(x, y));
    }

    SourceProblem src = rng.source(2, 3);
    nlohmann::json js = emit_problem(src);
    Problem round = parse_problem(nlohmann::json::parse(js.dump()));
    auto& src2 = std::get<SourceProblem>(round);
    for (std::size_t x = 0; x < 2; ++x) {
        CHECK(src.px[x] == src2.px[x]);
        for (std::size_t y = 0; y < 3; ++y) CHECK(src.d(x, y) == src2.d(x, y));
    }
}

TEST_CASE("cli slope-point emits the trace CSV contract") {
    fs::path dir = data_dir();
    fs::path problem = dir / "bsc.json";
    fs::path out = dir / "trace.csv";
    write_file(problem, kBscJson);

    int rc = run_cli("--problem " + problem.string() +
                     " --task slope-point --alg tz --lambda 0.5 --out " + out.string());
    CHECK(rc == 0);
    std::string text = slurp(out);
    CHECK(text.rfind("iter,objective,delta\n", 0) == 0);
    // at least a couple of iterations and parsable numbers
    std::istringstream lines(text);
    std::string header, first;
    std::getline(lines, header);
    std::getline(lines, first);
    double it, obj, delta;
    char c;
    std::istringstream row(first);
    CHECK((row >> it >> c >> obj >> c >> delta));

    // deterministic output: same config, identical bytes
    fs::path out2 = dir / "trace2.csv";
    run_cli("--problem " + problem.string() +
            " --task slope-point --alg tz --lambda 0.5 --out " + out2.string());
    CHECK(slurp(out) == slurp(out2));

    // the remaining channel algorithms run end to end
    for (std::string alg : {"algB", "jo", "arimoto", "param-arimoto"}) {
        int ok = run_cli("--problem " + problem.string() + " --task slope-point --alg " +
                         alg + " --lambda 0.5 --out " + (dir / (alg + ".csv")).string());
        CHECK(ok == 0);
    }
    int ok = run_cli("--problem " + problem.string() +
                     " --task slope-point --alg family --t 1,0,0,1 --lambda 0.5 --out " +
                     (dir / "family.csv").string());
    CHECK(ok == 0);
}

TEST_CASE("cli curve emits the curve CSV contract") {
    fs::path dir = data_dir();
    fs::path problem = dir / "src.json";
    fs::path out = dir / "curve.csv";
    write_file(problem, kSourceJson);

    int rc = run_cli("--problem " + problem.string() +
                     " --task curve --delta 0.1 --r-grid 0:1:11 --out " + out.string());
    CHECK(rc == 0);
    std::string text = slurp(out);
    CHECK(text.rfind("R,exponent,lambda_star,nu_star\n", 0) == 0);
    std::size_t rows = 0;
    for (char c : text)
        if (c == '\n') ++rows;
    CHECK(rows == 12); // header + 11 points

    // source slope-point algorithms run end to end
    for (std::string alg : {"gck1", "gck2", "jo", "family", "arimoto"}) {
        int ok = run_cli("--problem " + problem.string() + " --task slope-point --alg " +
                         alg + " --lambda 0.5 --nu 1 --out " +
                         (dir / ("s_" + alg + ".csv")).string());
        CHECK(ok == 0);
    }
}

TEST_CASE("cli verify emits a JSON report and exit code reflects the outcome") {
    fs::path dir = data_dir();
    fs::path problem = dir / "bsc_verify.json";
    fs::path out = dir / "report.json";
    write_file(problem, kBscJson);

    int rc = run_cli("--problem " + problem.string() + " --task verify --out " +
                     out.string());
    CHECK(rc == 0);
    nlohmann::json report = nlohmann::json::parse(slurp(out));
    CHECK(report["pass"].get<bool>());
    CHECK(report["rows"].size() == 5);
    CHECK(report["max_deviation"].get<double>() <= report["tolerance"].get<double>());
}

TEST_CASE("cli guessing task") {
    fs::path dir = data_dir();
    fs::path problem = dir / "src_guess.json";
    fs::path out = dir / "guess.csv";
    write_file(problem, kSourceJson);

    int rc = run_cli("--problem " + problem.string() +
                     " --task guessing --rho 1 --delta 0.1 --out " + out.string());
    CHECK(rc == 0);
    std::string text = slurp(out);
    CHECK(text.rfind("rho,delta,guessing_exponent\n", 0) == 0);
    double rho, delta, value;
    char c;
    std::istringstream row(text.substr(text.find('\n') + 1));
    CHECK((row >> rho >> c >> delta >> c >> value));
    CHECK(std::abs(value - (std::log(2.0) - binary_entropy_nats(0.1))) <= 1e-4);
}

TEST_CASE("cli exit codes") {
    fs::path dir = data_dir();
    fs::path bad = dir / "bad.json";
    write_file(bad, R"({"type":"channel","matrix":[[0.7,0.2],[0.5,0.5]]})");
    CHECK(run_cli("--problem " + bad.string() + " --task slope-point --alg tz") == 2);

    fs::path problem = dir / "bsc_codes.json";
    write_file(problem, kBscJson);
    CHECK(run_cli("--problem " + problem.string() + " --task nonsense") == 2);
    // mismatched --mode
    CHECK(run_cli("--problem " + problem.string() + " --task verify --mode source") == 2);
    // non-convergence: one iteration cannot meet the tolerance
    int rc = run_cli("--problem " + problem.string() +
                     " --task slope-point --alg tz --lambda 0.5 --max-iters 1 --out " +
                     (dir / "short.csv").string());
    CHECK(rc == 3);
}
