#include "graphflow/io.hpp"

#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace graphflow {

namespace {

using json = nlohmann::json;
using ordered_json = nlohmann::ordered_json;

json parseFile(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open " + file.string());
    try {
        return json::parse(in);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(file.string() + ": " + e.what());
    }
}

const json& need(const json& j, const char* key, const std::string& where) {
    auto it = j.find(key);
    if (it == j.end())
        throw std::invalid_argument(where + ": missing field \"" + key + "\"");
    return *it;
}

double needNumber(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_number())
        throw std::invalid_argument(where + ": field \"" + key + "\" must be a number");
    return v.get<double>();
}

std::string needString(const json& j, const char* key, const std::string& where) {
    const json& v = need(j, key, where);
    if (!v.is_string())
        throw std::invalid_argument(where + ": field \"" + key + "\" must be a string");
    return v.get<std::string>();
}

std::map<std::string, double> numberMap(const json& j, const std::string& where) {
    if (!j.is_object())
        throw std::invalid_argument(where + ": expected an object of vertex:number entries");
    std::map<std::string, double> out;
    for (const auto& [key, value] : j.items()) {
        if (!value.is_number())
            throw std::invalid_argument(where + ": value for \"" + key + "\" must be a number");
        out[key] = value.get<double>();
    }
    return out;
}

/// Matches a vertex:value map against the graph's vertex set exactly.
VertexFunction toFunction(const std::map<std::string, double>& values, const WeightedGraph& g,
                          const std::string& where) {
    VertexFunction f(g.size());
    for (int i = 0; i < g.size(); ++i) {
        auto it = values.find(g.id(i));
        if (it == values.end())
            throw std::invalid_argument(where + ": no value for vertex '" + g.id(i) + "'");
        if (!std::isfinite(it->second))
            throw std::invalid_argument(where + ": value for vertex '" + g.id(i) +
                                        "' is not finite");
        f[i] = it->second;
    }
    if (static_cast<int>(values.size()) != g.size()) {
        for (const auto& [key, value] : values)
            if (g.indexOf(key) < 0)
                throw std::invalid_argument(where + ": '" + key + "' is not a vertex");
    }
    return f;
}

ordered_json functionJson(const WeightedGraph& g, const VertexFunction& u) {
    ordered_json out = ordered_json::object();
    for (int i = 0; i < g.size(); ++i) out[g.id(i)] = u[i];
    return out;
}

}  // namespace

WeightedGraph loadGraph(const std::filesystem::path& file) {
    const std::string where = file.filename().string();
    json j = parseFile(file);
    const json& jv = need(j, "vertices", where);
    if (!jv.is_array() || jv.empty())
        throw std::invalid_argument(where + ": \"vertices\" must be a non-empty array");
    std::vector<std::string> ids;
    Eigen::VectorXd mu(jv.size());
    int i = 0;
    for (const json& v : jv) {
        std::string at = where + ": vertices[" + std::to_string(i) + "]";
        ids.push_back(needString(v, "id", at));
        mu[i] = needNumber(v, "mu", at);
        ++i;
    }
    std::vector<std::tuple<std::string, std::string, double>> edges;
    const json& je = need(j, "edges", where);
    if (!je.is_array())
        throw std::invalid_argument(where + ": \"edges\" must be an array");
    i = 0;
    for (const json& e : je) {
        std::string at = where + ": edges[" + std::to_string(i) + "]";
        edges.emplace_back(needString(e, "a", at), needString(e, "b", at),
                           needNumber(e, "w", at));
        ++i;
    }
    try {
        return WeightedGraph(std::move(ids), std::move(mu), edges);
    } catch (const std::invalid_argument& e) {
        throw std::invalid_argument(where + ": " + e.what());
    }
}

RunConfig loadRunConfig(const std::filesystem::path& file) {
    const std::string where = file.filename().string();
    json j = parseFile(file);
    RunConfig cfg;

    cfg.graphPath = file.parent_path() / needString(j, "graph", where);

    const json& phi = need(j, "phi", where);
    cfg.phiKind = needString(phi, "kind", where + ": phi");
    if (cfg.phiKind == "exp") {
        cfg.phiAlpha = needNumber(phi, "alpha", where + ": phi");
    } else if (cfg.phiKind == "exp_poly") {
        cfg.phiAlpha = needNumber(phi, "alpha", where + ": phi");
        cfg.phiBeta = needNumber(phi, "beta", where + ": phi");
        cfg.phiP = needNumber(phi, "p", where + ": phi");
    } else if (cfg.phiKind == "quad_log") {
        cfg.phiA = needNumber(phi, "a", where + ": phi");
    } else {
        throw std::invalid_argument(where + ": phi kind \"" + cfg.phiKind +
                                    "\" is not one of exp, exp_poly, quad_log");
    }

    cfg.rho = needNumber(j, "rho", where);

    if (j.contains("q")) {
        const json& q = j["q"];
        if (q.is_string() && q.get<std::string>() == "uniform") {
            cfg.qKind = RunConfig::QKind::Uniform;
        } else if (q.is_object() && q.contains("normalize")) {
            cfg.qKind = RunConfig::QKind::Normalize;
            cfg.qValues = numberMap(q["normalize"], where + ": q.normalize");
        } else if (q.is_object()) {
            cfg.qKind = RunConfig::QKind::Explicit;
            cfg.qValues = numberMap(q, where + ": q");
        } else {
            throw std::invalid_argument(where +
                                        ": q must be \"uniform\", an object of vertex values, "
                                        "or {\"normalize\": {...}}");
        }
    }
    if (j.contains("normalize_q")) {
        if (!j["normalize_q"].is_boolean())
            throw std::invalid_argument(where + ": field \"normalize_q\" must be a boolean");
        cfg.normalizeQ = j["normalize_q"].get<bool>();
    }

    if (j.contains("u0")) {
        const json& u0 = j["u0"];
        if (u0.is_string() && u0.get<std::string>() == "zero") {
            cfg.u0Kind = RunConfig::U0Kind::Zero;
        } else if (u0.is_object() && u0.contains("random")) {
            cfg.u0Kind = RunConfig::U0Kind::Random;
            const json& r = u0["random"];
            const json& seed = need(r, "seed", where + ": u0.random");
            if (!seed.is_number_integer())
                throw std::invalid_argument(where + ": u0.random.seed must be an integer");
            cfg.seed = seed.get<std::uint64_t>();
            cfg.scale = needNumber(r, "scale", where + ": u0.random");
            if (!(cfg.scale > 0.0))
                throw std::invalid_argument(where + ": u0.random.scale must be positive");
        } else if (u0.is_object()) {
            cfg.u0Kind = RunConfig::U0Kind::Explicit;
            cfg.u0Values = numberMap(u0, where + ": u0");
        } else {
            throw std::invalid_argument(where +
                                        ": u0 must be \"zero\", an object of vertex values, "
                                        "or {\"random\": {\"seed\":...,\"scale\":...}}");
        }
    }

    auto positive = [&](const char* key, double fallback) {
        if (!j.contains(key)) return fallback;
        double v = needNumber(j, key, where);
        if (!(v > 0.0) || !std::isfinite(v))
            throw std::invalid_argument(where + ": field \"" + key + "\" must be positive");
        return v;
    };
    cfg.tolResidual = positive("tol_residual", cfg.tolResidual);
    cfg.tMax = positive("t_max", cfg.tMax);
    cfg.dtInit = positive("dt_init", cfg.dtInit);
    cfg.rkTol = positive("rk_tol", cfg.rkTol);
    cfg.massDriftTol = positive("mass_drift_tol", cfg.massDriftTol);
    if (j.contains("record_every")) {
        const json& r = j["record_every"];
        if (!r.is_number_integer() || r.get<int>() < 1)
            throw std::invalid_argument(where +
                                        ": field \"record_every\" must be a positive integer");
        cfg.recordEvery = r.get<int>();
    }
    return cfg;
}

Phi buildPhi(const RunConfig& cfg) {
    if (cfg.phiKind == "exp") return Phi::exp(cfg.phiAlpha);
    if (cfg.phiKind == "exp_poly") return Phi::expPoly(cfg.phiAlpha, cfg.phiBeta, cfg.phiP);
    return Phi::quadLog(cfg.phiA);
}

std::pair<VertexFunction, bool> buildQ(const RunConfig& cfg, const WeightedGraph& g) {
    switch (cfg.qKind) {
        case RunConfig::QKind::Uniform:
            return {VertexFunction::Constant(g.size(), cfg.rho / g.volume()), cfg.normalizeQ};
        case RunConfig::QKind::Explicit:
            return {toFunction(cfg.qValues, g, "q"), cfg.normalizeQ};
        case RunConfig::QKind::Normalize:
            return {toFunction(cfg.qValues, g, "q.normalize"), true};
    }
    throw std::logic_error("buildQ: unreachable");
}

VertexFunction buildU0(const RunConfig& cfg, const WeightedGraph& g) {
    switch (cfg.u0Kind) {
        case RunConfig::U0Kind::Zero:
            return VertexFunction::Zero(g.size());
        case RunConfig::U0Kind::Explicit:
            return toFunction(cfg.u0Values, g, "u0");
        case RunConfig::U0Kind::Random: {
            std::mt19937_64 gen(cfg.seed);
            VertexFunction u(g.size());
            for (int i = 0; i < g.size(); ++i) {
                // top 53 bits -> [0,1); fully determined by the engine, so
                // identical across standard libraries
                double x = static_cast<double>(gen() >> 11) * 0x1.0p-53;
                u[i] = cfg.scale * (2.0 * x - 1.0);
            }
            return u;
        }
    }
    throw std::logic_error("buildU0: unreachable");
}

FlowProblem buildFlowProblem(const RunConfig& cfg) {
    WeightedGraph g = loadGraph(cfg.graphPath);
    auto [q, normalize] = buildQ(cfg, g);
    VertexFunction u0 = buildU0(cfg, g);
    FlowProblem fp{ProblemData::make(g, cfg.rho, std::move(q), buildPhi(cfg), normalize),
                   std::move(u0)};
    fp.tolResidual = cfg.tolResidual;
    fp.tMax = cfg.tMax;
    fp.dtInit = cfg.dtInit;
    fp.rkTol = cfg.rkTol;
    fp.massDriftTol = cfg.massDriftTol;
    fp.recordEvery = cfg.recordEvery;
    return fp;
}

std::string formatG17(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

void writeTrajectoryCsv(const std::filesystem::path& file, const TrajectoryRecord& rec) {
    std::ofstream out(file);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    out << "t,J,residual_inf,mass\n";
    for (const TrajectorySample& s : rec.samples)
        out << formatG17(s.t) << ',' << formatG17(s.j) << ',' << formatG17(s.residualInf)
            << ',' << formatG17(s.mass) << '\n';
}

std::vector<CsvRow> readTrajectoryCsv(const std::filesystem::path& file) {
    std::ifstream in(file);
    if (!in) throw std::invalid_argument("cannot open " + file.string());
    const std::string where = file.filename().string();
    std::string line;
    if (!std::getline(in, line) || line != "t,J,residual_inf,mass")
        throw std::invalid_argument(where + ": bad header, expected t,J,residual_inf,mass");
    std::vector<CsvRow> rows;
    int lineNo = 1;
    while (std::getline(in, line)) {
        ++lineNo;
        if (line.empty()) continue;
        CsvRow row;
        double* fields[4] = {&row.t, &row.j, &row.residualInf, &row.mass};
        std::istringstream ss(line);
        std::string cell;
        for (int k = 0; k < 4; ++k) {
            if (!std::getline(ss, cell, ','))
                throw std::invalid_argument(where + ": line " + std::to_string(lineNo) +
                                            " has fewer than 4 fields");
            size_t used = 0;
            try {
                *fields[k] = std::stod(cell, &used);
            } catch (const std::exception&) {
                used = 0;
            }
            if (used != cell.size() || cell.empty())
                throw std::invalid_argument(where + ": line " + std::to_string(lineNo) +
                                            ": '" + cell + "' is not a number");
        }
        if (std::getline(ss, cell, ','))
            throw std::invalid_argument(where + ": line " + std::to_string(lineNo) +
                                        " has more than 4 fields");
        rows.push_back(row);
    }
    return rows;
}

void writeStateJson(const std::filesystem::path& file, const WeightedGraph& g,
                    const TrajectoryRecord& rec, const RunConfig& cfg) {
    const TrajectorySample& last = rec.samples.back();
    ordered_json out;
    out["status"] = toString(rec.status);
    out["t_final"] = last.t;
    out["u_infty"] = functionJson(g, last.u);
    out["residual_inf"] = last.residualInf;
    out["mass"] = last.mass;
    out["j_final"] = last.j;
    if (cfg.u0Kind == RunConfig::U0Kind::Random) out["seed"] = cfg.seed;
    if (!rec.message.empty()) out["message"] = rec.message;
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << out.dump(2) << '\n';
}

StateFile readStateJson(const std::filesystem::path& file, const WeightedGraph& g) {
    const std::string where = file.filename().string();
    json j = parseFile(file);
    StateFile s;
    s.status = needString(j, "status", where);
    s.tFinal = needNumber(j, "t_final", where);
    s.uInfty = toFunction(numberMap(need(j, "u_infty", where), where + ": u_infty"), g,
                          where + ": u_infty");
    s.residualInf = needNumber(j, "residual_inf", where);
    s.mass = needNumber(j, "mass", where);
    s.jFinal = needNumber(j, "j_final", where);
    return s;
}

void writeSteadyJson(const std::filesystem::path& file, const WeightedGraph& g,
                     const SteadyResult& res, double massTarget) {
    ordered_json out;
    out["converged"] = res.converged;
    out["u_star"] = functionJson(g, res.uStar);
    out["residual_inf"] = res.residualInf;
    out["mass_target"] = massTarget;
    out["mass_error"] = res.massError;
    out["newton_iters"] = res.iterations;
    if (!res.message.empty()) out["message"] = res.message;
    std::ofstream f(file);
    if (!f) throw std::runtime_error("cannot write " + file.string());
    f << out.dump(2) << '\n';
}

}  // namespace graphflow
