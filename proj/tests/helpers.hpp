#pragma once

// Shared fixtures: small named graphs, seeded random instances, and dense
// matrix oracles built directly from the defining formulas, independent of
// the library's adjacency-list code paths.

#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "graphflow/energy.hpp"
#include "graphflow/graph.hpp"

namespace testing {

using graphflow::VertexFunction;
using graphflow::WeightedGraph;

/// Top 53 bits of the engine output mapped to [0,1); identical everywhere.
inline double u01(std::mt19937_64& gen) {
    return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
    return lo + (hi - lo) * u01(gen);
}

inline std::vector<std::string> vertexNames(int n) {
    std::vector<std::string> ids;
    for (int i = 0; i < n; ++i) ids.push_back("v" + std::to_string(i));
    return ids;
}

/// Two vertices, unit weight and measure.
inline WeightedGraph k2() {
    return WeightedGraph({"a", "b"}, Eigen::Vector2d::Ones(), {{"a", "b", 1.0}});
}

/// Path a-b-c with unit weights and measure.
inline WeightedGraph p3() {
    return WeightedGraph({"a", "b", "c"}, Eigen::Vector3d::Ones(),
                         {{"a", "b", 1.0}, {"b", "c", 1.0}});
}

inline WeightedGraph completeGraph(int n) {
    auto ids = vertexNames(n);
    std::vector<std::tuple<std::string, std::string, double>> edges;
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j) edges.emplace_back(ids[i], ids[j], 1.0);
    return WeightedGraph(ids, Eigen::VectorXd::Ones(n), edges);
}

/// Random spanning tree plus extra edges; mu and w uniform in [0.5, 2].
inline WeightedGraph randomConnectedGraph(std::mt19937_64& gen, int n,
                                          double extraEdgeProb = 0.3) {
    auto ids = vertexNames(n);
    Eigen::VectorXd mu(n);
    for (int i = 0; i < n; ++i) mu[i] = uniform(gen, 0.5, 2.0);
    std::vector<std::tuple<std::string, std::string, double>> edges;
    for (int i = 1; i < n; ++i) {
        int j = static_cast<int>(u01(gen) * i);
        edges.emplace_back(ids[j], ids[i], uniform(gen, 0.5, 2.0));
    }
    for (int i = 0; i < n; ++i)
        for (int j = i + 2; j < n; ++j)  // tree already linked (parent, child) pairs
            if (u01(gen) < extraEdgeProb) {
                bool present = false;
                for (const auto& [a, b, w] : edges)
                    if ((a == ids[i] && b == ids[j]) || (a == ids[j] && b == ids[i]))
                        present = true;
                if (!present) edges.emplace_back(ids[i], ids[j], uniform(gen, 0.5, 2.0));
            }
    return WeightedGraph(ids, mu, edges);
}

inline VertexFunction randomFunction(std::mt19937_64& gen, int n, double scale = 3.0) {
    VertexFunction u(n);
    for (int i = 0; i < n; ++i) u[i] = uniform(gen, -scale, scale);
    return u;
}

/// Random Q with int_V Q dmu = rho, built by shifting a random function.
inline VertexFunction randomQ(std::mt19937_64& gen, const WeightedGraph& g, double rho) {
    VertexFunction q = randomFunction(gen, g.size(), 1.0);
    q.array() += (rho - g.mu().dot(q)) / g.volume();
    return q;
}

/// Dense Laplacian oracle: assembles the full weight matrix, then
/// L(i,j) = w_ij / mu_i off the diagonal and L(i,i) = -deg_i / mu_i.
inline Eigen::MatrixXd denseLaplacian(const WeightedGraph& g) {
    const int n = g.size();
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (const graphflow::Edge& e : g.edges()) {
        w(e.a, e.b) = e.w;
        w(e.b, e.a) = e.w;
    }
    Eigen::MatrixXd l = Eigen::MatrixXd::Zero(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j)
            if (j != i) l(i, j) = w(i, j) / g.mu()[i];
        l(i, i) = -w.row(i).sum() / g.mu()[i];
    }
    return l;
}

/// lambda_1 oracle from the generalized eigenproblem L0 v = lambda D v,
/// a different route than the library's similarity transform.
inline double firstEigenvalueOracle(const WeightedGraph& g) {
    const int n = g.size();
    Eigen::MatrixXd l0 = Eigen::MatrixXd::Zero(n, n);
    for (const graphflow::Edge& e : g.edges()) {
        l0(e.a, e.b) -= e.w;
        l0(e.b, e.a) -= e.w;
        l0(e.a, e.a) += e.w;
        l0(e.b, e.b) += e.w;
    }
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> solver(
        l0, Eigen::MatrixXd(g.mu().asDiagonal()));
    return solver.eigenvalues()[1];
}

}  // namespace testing
