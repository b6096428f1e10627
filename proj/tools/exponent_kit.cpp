// Command-line front end: load a problem, run one algorithm / curve /
// verification / guessing task, and emit CSV or JSON.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "exponent_kit/lft.hpp"
#include "exponent_kit/oracle.hpp"
#include "exponent_kit/problem_io.hpp"

namespace ek = exponent_kit;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailed = 1;
constexpr int kExitValidation = 2;
constexpr int kExitNoConvergence = 3;

std::vector<double> parse_r_grid(const std::string& spec) {
    // "a:b:n" -> n points from a to b inclusive
    double a, b;
    std::size_t n;
    char c1, c2;
    std::istringstream in(spec);
    if (!(in >> a >> c1 >> b >> c2 >> n) || c1 != ':' || c2 != ':' || n < 2)
        throw std::invalid_argument("--r-grid expects a:b:n with n >= 2");
    std::vector<double> grid(n);
    for (std::size_t i = 0; i < n; ++i)
        grid[i] = a + (b - a) * static_cast<double>(i) / static_cast<double>(n - 1);
    return grid;
}

ek::FamilyWeights parse_weights(const std::string& spec) {
    std::vector<double> t;
    std::stringstream in(spec);
    std::string tok;
    while (std::getline(in, tok, ',')) t.push_back(std::stod(tok));
    if (t.size() != 4) throw std::invalid_argument("--t expects four comma-separated weights");
    return ek::FamilyWeights(t[0], t[1], t[2], t[3]);
}

std::ostream& open_output(std::ofstream& file, const std::string& path) {
    if (path.empty()) return std::cout;
    file.open(path);
    if (!file) throw std::invalid_argument("cannot open output file " + path);
    return file;
}

void write_trace_csv(std::ostream& out, const ek::IterationTrace& trace) {
    out.precision(17);
    out << "iter,objective,delta\n";
    for (std::size_t i = 0; i < trace.objective.size(); ++i) {
        double delta = i == 0 ? 0.0 : trace.objective[i] - trace.objective[i - 1];
        out << i << ',' << trace.objective[i] << ',' << delta << '\n';
    }
}

void write_curve_csv(std::ostream& out, const ek::ExponentCurve& curve) {
    out.precision(17);
    out << "R,exponent,lambda_star,nu_star\n";
    for (std::size_t i = 0; i < curve.rate.size(); ++i)
        out << curve.rate[i] << ',' << curve.exponent[i] << ',' << curve.lambda_star[i]
            << ',' << curve.nu_star[i] << '\n';
}

nlohmann::json report_to_json(const ek::AgreementReport& report) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : report.rows) {
        nlohmann::json values;
        for (const auto& [name, v] : r.values) values[name] = v;
        rows.push_back({{"lambda", r.lambda},
                        {"nu", r.nu},
                        {"values", values},
                        {"max_deviation", r.max_deviation}});
    }
    return {{"rows", rows},
            {"tolerance", report.tolerance},
            {"max_deviation", report.max_deviation},
            {"pass", report.pass}};
}

struct Options {
    std::string problem_path;
    std::string mode;
    std::string task;
    std::string alg = "jo";
    std::string exponent = "strong-converse";
    double lambda = 0.5;
    double rho = 0.0;
    bool rho_set = false;
    double nu = 0.0;
    std::string weights;
    double gamma = -1.0;
    bool gamma_set = false;
    double delta = -1.0;
    bool delta_set = false;
    std::string r_grid = "0:2:41";
    double tol = 1e-10;
    std::size_t max_iters = 10000;
    std::string out_path;
    bool strict = false;
};

int run_slope_point(const Options& opt, const ek::Problem& problem) {
    ek::StoppingRule stop{opt.tol, opt.max_iters, 1e-8};
    std::optional<ek::RunResult> result;

    if (const auto* ch = std::get_if<ek::ChannelProblem>(&problem)) {
        if (opt.alg == "arimoto") {
            double rho = opt.rho_set ? opt.rho : -opt.lambda;
            result = ek::run_arimoto_channel(rho, opt.nu, *ch, stop);
        } else {
            ek::SlopeParams p(opt.lambda, opt.nu);
            if (opt.alg == "tz") {
                result = ek::run_tz(p, *ch, stop);
            } else if (opt.alg == "algB") {
                result = ek::run_alg_b(p, *ch, stop);
            } else if (opt.alg == "jo") {
                result = ek::run_jo_channel(p, *ch, stop);
            } else if (opt.alg == "family") {
                ek::FamilyWeights t =
                    opt.weights.empty() ? ek::FamilyWeights::tz() : parse_weights(opt.weights);
                result = ek::run_family(p, t, *ch, ek::JointDist::uniform_on_support(ch->w),
                                        stop);
            } else if (opt.alg == "param-arimoto") {
                ek::FamilyWeights t = opt.weights.empty() ? ek::FamilyWeights(0, 0, 0, 0)
                                                          : parse_weights(opt.weights);
                result = ek::run_parameterized_arimoto(opt.lambda, opt.nu, t.t2, t.t3, *ch,
                                                       stop);
            } else {
                throw std::invalid_argument("algorithm \"" + opt.alg +
                                            "\" is not a channel algorithm");
            }
        }
    } else {
        const auto& src = std::get<ek::SourceProblem>(problem);
        if (opt.alg == "arimoto") {
            double rho = opt.rho_set ? opt.rho : -opt.lambda;
            result = ek::run_arimoto_source(rho, opt.nu, src, stop);
        } else {
            ek::SlopeParams p(opt.lambda, opt.nu);
            if (opt.alg == "gck1") {
                result = ek::run_gck1(p, src, stop);
            } else if (opt.alg == "gck2") {
                result = ek::run_gck2(p, src, stop);
            } else if (opt.alg == "jo") {
                result = ek::run_jo_source(p, src, stop);
            } else if (opt.alg == "family") {
                ek::FamilyWeights t = opt.weights.empty()
                                          ? ek::FamilyWeights::jo_source(opt.lambda)
                                          : parse_weights(opt.weights);
                result = ek::run_source_family(p, t, src,
                                               ek::JointDist::uniform(src.nx(), src.ny()),
                                               stop);
            } else {
                throw std::invalid_argument("algorithm \"" + opt.alg +
                                            "\" is not a source algorithm");
            }
        }
    }

    std::ofstream file;
    std::ostream& out = open_output(file, opt.out_path);
    write_trace_csv(out, result->trace);
    std::cerr.precision(17);
    std::cerr << "value " << result->value << " after " << result->trace.iterations
              << " iterations (" << ek::to_string(result->trace.termination) << ")\n";
    return result->trace.termination == ek::Termination::max_iters ? kExitNoConvergence
                                                                   : kExitOk;
}

int run_curve(const Options& opt, const ek::Problem& problem) {
    std::vector<double> grid = parse_r_grid(opt.r_grid);
    ek::CurveMode mode = opt.exponent == "error" ? ek::CurveMode::error
                                                 : ek::CurveMode::strong_converse;
    ek::CurveOptions copts;
    copts.stop = ek::StoppingRule{opt.tol, opt.max_iters, 1e-8};
    ek::ExponentCurve curve;
    if (const auto* ch = std::get_if<ek::ChannelProblem>(&problem)) {
        double gamma = opt.gamma_set ? opt.gamma : ch->gamma_min();
        curve = ek::channel_exponent_curve(*ch, gamma, grid, mode, copts);
    } else {
        const auto& src = std::get<ek::SourceProblem>(problem);
        if (!opt.delta_set) throw std::invalid_argument("curve on a source needs --delta");
        ek::SourceCurveBackend backend = opt.alg == "arimoto"
                                             ? ek::SourceCurveBackend::arimoto
                                             : ek::SourceCurveBackend::family;
        curve = ek::source_exponent_curve(src, opt.delta, grid, mode, copts, backend);
    }
    std::ofstream file;
    std::ostream& out = open_output(file, opt.out_path);
    write_curve_csv(out, curve);
    return kExitOk;
}

int run_verify(const Options& opt, const ek::Problem& problem) {
    ek::StoppingRule stop{opt.tol, opt.max_iters, 1e-8};
    std::vector<ek::SlopeParams> slopes = {
        {0.0, opt.nu}, {0.25, opt.nu}, {0.5, opt.nu}, {0.75, opt.nu}, {1.0, opt.nu}};
    ek::AgreementReport report;
    if (const auto* ch = std::get_if<ek::ChannelProblem>(&problem))
        report = ek::channel_agreement_report(*ch, slopes, stop);
    else
        report = ek::source_agreement_report(std::get<ek::SourceProblem>(problem), slopes,
                                             stop);
    std::ofstream file;
    std::ostream& out = open_output(file, opt.out_path);
    out << report_to_json(report).dump(2) << '\n';
    std::cerr << (report.pass ? "PASS" : "FAIL") << " max deviation "
              << report.max_deviation << " (tolerance " << report.tolerance << ")\n";
    return report.pass ? kExitOk : kExitVerifyFailed;
}

int run_guessing(const Options& opt, const ek::Problem& problem) {
    const auto* src = std::get_if<ek::SourceProblem>(&problem);
    if (!src) throw std::invalid_argument("guessing task needs a source problem");
    if (!opt.delta_set) throw std::invalid_argument("guessing task needs --delta");
    if (!opt.rho_set) throw std::invalid_argument("guessing task needs --rho");
    ek::StoppingRule stop{opt.tol, opt.max_iters, 1e-8};
    double value = ek::guessing_exponent(opt.rho, opt.delta, *src, {}, stop);
    std::ofstream file;
    std::ostream& out = open_output(file, opt.out_path);
    out.precision(17);
    out << "rho,delta,guessing_exponent\n"
        << opt.rho << ',' << opt.delta << ',' << value << '\n';
    return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
    Options opt;
    CLI::App app{"exponent-kit: error and strong-converse exponents for DMCs and DMSs"};
    app.add_option("--problem", opt.problem_path, "problem definition (JSON)")->required();
    app.add_option("--mode", opt.mode, "channel|source (checked against the file)");
    app.add_option("--task", opt.task, "slope-point|curve|verify|guessing")->required();
    app.add_option("--alg", opt.alg,
                   "family|tz|algB|arimoto|jo|gck1|gck2|param-arimoto (slope-point; also "
                   "selects the source curve backend)");
    app.add_option("--lambda", opt.lambda, "slope parameter in [0,1]");
    auto* rho_opt = app.add_option("--rho", opt.rho, "signed slope for arimoto/guessing");
    app.add_option("--nu", opt.nu, "cost/distortion multiplier (>= 0)");
    app.add_option("--t", opt.weights, "family weights t1,t2,t3,t4");
    auto* gamma_opt = app.add_option("--gamma", opt.gamma, "cost budget (channel curves)");
    auto* delta_opt = app.add_option("--delta", opt.delta, "distortion budget (source)");
    app.add_option("--r-grid", opt.r_grid, "rate grid a:b:n (default 0:2:41)");
    app.add_option("--exponent", opt.exponent, "strong-converse|error (curve task)");
    app.add_option("--tol", opt.tol, "relative stopping tolerance");
    app.add_option("--max-iters", opt.max_iters, "iteration cap");
    app.add_option("--out", opt.out_path, "output file (default stdout)");
    app.add_flag("--strict", opt.strict, "treat problem warnings as errors");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? kExitOk : kExitValidation;
    }
    opt.rho_set = rho_opt->count() > 0;
    opt.gamma_set = gamma_opt->count() > 0;
    opt.delta_set = delta_opt->count() > 0;

    try {
        ek::Problem problem = ek::parse_problem_file(opt.problem_path, opt.strict);
        bool is_channel = std::holds_alternative<ek::ChannelProblem>(problem);
        if (!opt.mode.empty() &&
            ((opt.mode == "channel") != is_channel))
            throw std::invalid_argument("--mode does not match the problem file");

        if (opt.task == "slope-point") return run_slope_point(opt, problem);
        if (opt.task == "curve") return run_curve(opt, problem);
        if (opt.task == "verify") return run_verify(opt, problem);
        if (opt.task == "guessing") return run_guessing(opt, problem);
        throw std::invalid_argument("unknown task \"" + opt.task + "\"");
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitValidation;
    }
}
