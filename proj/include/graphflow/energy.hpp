#pragma once

#include "graphflow/graph.hpp"
#include "graphflow/phi.hpp"

namespace graphflow {

/// A fully specified mean field problem: graph, rho, source Q with
/// int_V Q dmu = rho, and the nonlinearity phi.
struct ProblemData {
    WeightedGraph graph;
    double rho;
    VertexFunction q;
    Phi phi;

    /// Validates the compatibility condition |int Q dmu - rho| <= 1e-10 max(1, |rho|).
    /// With normalizeQ set, Q is first shifted by the constant (rho - int Q)/|V|.
    static ProblemData make(WeightedGraph graph, double rho, VertexFunction q, Phi phi,
                            bool normalizeQ = false);
};

/// log int_V e^u dmu, computed as m + log int e^{u-m} dmu with m = max u.
double logIntegralExp(const WeightedGraph& g, const VertexFunction& u);

/// J_rho(u) = (1/2) int |grad u|^2 dmu + int Q u dmu - rho log int e^u dmu.
/// Translation invariant: J(u + c) = J(u) for constant c.
double energy(const ProblemData& p, const VertexFunction& u);

/// M(u) = Delta u - Q + rho e^u / int_V e^u dmu. Zeros of M are solutions of
/// the mean field equation; int_V M(u) dmu = 0 identically.
VertexFunction meanFieldResidual(const ProblemData& p, const VertexFunction& u);

/// int_V phi(u) dmu, the quantity the flow conserves.
double phiMass(const ProblemData& p, const VertexFunction& u);

/// <dJ_rho(u), h> = -int_V M(u) h dmu, the Gateaux derivative of J along h.
double energyDifferential(const ProblemData& p, const VertexFunction& u,
                          const VertexFunction& h);

}  // namespace graphflow
