#include "exponent_kit/problem_io.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace exponent_kit {

namespace {

std::vector<std::vector<double>> parse_matrix(const nlohmann::json& j, const char* key) {
    if (!j.contains(key) || !j[key].is_array() || j[key].empty())
        throw std::invalid_argument(std::string("problem: missing or empty \"") + key + "\"");
    std::vector<std::vector<double>> rows;
    std::size_t width = 0;
    for (const auto& r : j[key]) {
        if (!r.is_array() || r.empty())
            throw std::invalid_argument(std::string("problem: \"") + key +
                                        "\" rows must be non-empty arrays");
        std::vector<double> row;
        for (const auto& v : r) {
            if (!v.is_number())
                throw std::invalid_argument(std::string("problem: \"") + key +
                                            "\" entries must be numbers");
            double d = v.get<double>();
            if (!std::isfinite(d) || d < 0.0)
                throw std::invalid_argument(std::string("problem: \"") + key +
                                            "\" entries must be finite and >= 0");
            row.push_back(d);
        }
        if (width == 0) width = row.size();
        if (row.size() != width)
            throw std::invalid_argument(std::string("problem: \"") + key + "\" is ragged");
        rows.push_back(std::move(row));
    }
    return rows;
}

// Checks each row sums to 1 within 1e-9 and renormalizes the residual drift.
std::vector<ProbVec> stochastic_rows(std::vector<std::vector<double>> rows,
                                     const char* what) {
    std::vector<ProbVec> out;
    out.reserve(rows.size());
    for (auto& r : rows) {
        double sum = 0.0;
        for (double v : r) sum += v;
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument(std::string("problem: ") + what +
                                        " row sum deviates from 1 by more than 1e-9");
        out.emplace_back(std::move(r));
    }
    return out;
}

} // namespace

Problem parse_problem(const nlohmann::json& j, bool strict) {
    if (!j.contains("type") || !j["type"].is_string())
        throw std::invalid_argument("problem: missing \"type\"");
    std::string type = j["type"].get<std::string>();
    if (type == "channel") {
        auto rows = parse_matrix(j, "matrix");
        Kernel w(stochastic_rows(std::move(rows), "matrix"));
        std::vector<double> cost(w.num_inputs(), 0.0);
        if (j.contains("cost")) {
            if (!j["cost"].is_array() || j["cost"].size() != w.num_inputs())
                throw std::invalid_argument("problem: \"cost\" length must match inputs");
            for (std::size_t i = 0; i < cost.size(); ++i) {
                cost[i] = j["cost"][i].get<double>();
                if (!std::isfinite(cost[i]) || cost[i] < 0.0)
                    throw std::invalid_argument("problem: costs must be finite and >= 0");
            }
        }
        return ChannelProblem(std::move(w), std::move(cost));
    }
    if (type == "source") {
        auto px_rows = parse_matrix(j, "matrix");
        if (px_rows.size() != 1)
            throw std::invalid_argument(
                "problem: source \"matrix\" must hold a single row (P_X)");
        ProbVec px(stochastic_rows(std::move(px_rows), "matrix")[0]);
        auto d_rows = parse_matrix(j, "distortion");
        if (d_rows.size() != px.size())
            throw std::invalid_argument(
                "problem: \"distortion\" must have one row per source symbol");
        std::size_t ny = d_rows[0].size();
        std::vector<double> flat;
        flat.reserve(px.size() * ny);
        for (auto& r : d_rows) flat.insert(flat.end(), r.begin(), r.end());
        return SourceProblem(std::move(px), ny, std::move(flat), strict);
    }
    throw std::invalid_argument("problem: \"type\" must be \"channel\" or \"source\"");
}

Problem parse_problem_file(const std::string& path, bool strict) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("problem: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw std::invalid_argument(std::string("problem: malformed JSON: ") + e.what());
    }
    return parse_problem(j, strict);
}

nlohmann::json emit_problem(const Problem& p) {
    nlohmann::json j;
    if (const auto* ch = std::get_if<ChannelProblem>(&p)) {
        j["type"] = "channel";
        nlohmann::json matrix = nlohmann::json::array();
        for (std::size_t x = 0; x < ch->nx(); ++x) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t y = 0; y < ch->ny(); ++y) row.push_back(ch->w(x, y));
            matrix.push_back(std::move(row));
        }
        j["matrix"] = std::move(matrix);
        j["cost"] = ch->cost;
    } else {
        const auto& src = std::get<SourceProblem>(p);
        j["type"] = "source";
        j["matrix"] = nlohmann::json::array({src.px.weights()});
        nlohmann::json d = nlohmann::json::array();
        for (std::size_t x = 0; x < src.nx(); ++x) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t y = 0; y < src.ny(); ++y) row.push_back(src.d(x, y));
            d.push_back(std::move(row));
        }
        j["distortion"] = std::move(d);
    }
    return j;
}

} // namespace exponent_kit
