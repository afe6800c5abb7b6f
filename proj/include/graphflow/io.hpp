#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "graphflow/flow.hpp"
#include "graphflow/steady.hpp"

namespace graphflow {

/// Graph JSON: {"vertices":[{"id":"a","mu":1.0},...],"edges":[{"a":"x","b":"y","w":1.0},...]}.
WeightedGraph loadGraph(const std::filesystem::path& file);

/// Run configuration as parsed from JSON, before any objects are assembled.
/// Schema (defaults in parentheses):
///   graph: path, resolved relative to the config file's directory  [required]
///   phi:   {"kind":"exp","alpha":..} | {"kind":"exp_poly","alpha":..,"beta":..,"p":..}
///          | {"kind":"quad_log","a":..}                            [required]
///   rho:   real                                                    [required]
///   q:     "uniform" | {vertex:value,...} | {"normalize":{vertex:value,...}}  ("uniform")
///   u0:    "zero" | {"random":{"seed":int,"scale":real}} | {vertex:value,...} ("zero")
///   normalize_q: bool (false) — shift any q to satisfy the compatibility condition
///   tol_residual (1e-8), t_max (1e6), dt_init (1e-2), rk_tol (1e-10),
///   mass_drift_tol (1e-8), record_every (10)
struct RunConfig {
    std::filesystem::path graphPath;

    std::string phiKind;  // "exp" | "exp_poly" | "quad_log"
    double phiAlpha = 1.0;
    double phiBeta = 0.0;
    double phiP = 2.0;
    double phiA = 0.0;

    double rho = 0.0;

    enum class QKind { Uniform, Explicit, Normalize };
    QKind qKind = QKind::Uniform;
    std::map<std::string, double> qValues;
    bool normalizeQ = false;

    enum class U0Kind { Zero, Random, Explicit };
    U0Kind u0Kind = U0Kind::Zero;
    std::uint64_t seed = 0;
    double scale = 1.0;
    std::map<std::string, double> u0Values;

    double tolResidual = 1e-8;
    double tMax = 1e6;
    double dtInit = 1e-2;
    double rkTol = 1e-10;
    double massDriftTol = 1e-8;
    int recordEvery = 10;
};

/// Parses and validates a config file; throws std::invalid_argument naming the
/// offending field on any schema violation.
RunConfig loadRunConfig(const std::filesystem::path& file);

Phi buildPhi(const RunConfig& cfg);

/// Q per the config's q spec: "uniform" gives Q = rho/|V| at every vertex;
/// explicit maps are matched against the vertex set. The returned flag is
/// true when the problem should shift Q to satisfy the compatibility
/// condition (a "normalize" spec or normalize_q).
std::pair<VertexFunction, bool> buildQ(const RunConfig& cfg, const WeightedGraph& g);

/// u0 per the config's spec. "random" draws independent uniform values in
/// [-scale, scale] from std::mt19937_64(seed) via the mapping
/// (x >> 11) * 2^-53, so results are identical across platforms.
VertexFunction buildU0(const RunConfig& cfg, const WeightedGraph& g);

/// Assembles ProblemData and FlowProblem from a config (loads the graph file).
FlowProblem buildFlowProblem(const RunConfig& cfg);

/// One parsed trajectory CSV row.
struct CsvRow {
    double t;
    double j;
    double residualInf;
    double mass;
};

/// Shortest 17-significant-digit form; round-trips doubles exactly.
std::string formatG17(double x);

/// Header is byte-exact "t,J,residual_inf,mass"; one row per recorded sample.
void writeTrajectoryCsv(const std::filesystem::path& file, const TrajectoryRecord& rec);

/// Parses a trajectory CSV back; throws std::invalid_argument on a malformed
/// header or row.
std::vector<CsvRow> readTrajectoryCsv(const std::filesystem::path& file);

/// Final state of a run as serialized to JSON.
struct StateFile {
    std::string status;
    double tFinal = 0.0;
    VertexFunction uInfty;
    double residualInf = 0.0;
    double mass = 0.0;
    double jFinal = 0.0;
};

/// {"status":..., "t_final":..., "u_infty":{...}, "residual_inf":...,
///  "mass":..., "j_final":...}; a "seed" field is added for random u0.
void writeStateJson(const std::filesystem::path& file, const WeightedGraph& g,
                    const TrajectoryRecord& rec, const RunConfig& cfg);

StateFile readStateJson(const std::filesystem::path& file, const WeightedGraph& g);

void writeSteadyJson(const std::filesystem::path& file, const WeightedGraph& g,
                     const SteadyResult& res, double massTarget);

}  // namespace graphflow
