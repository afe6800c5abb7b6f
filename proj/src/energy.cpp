#include "graphflow/energy.hpp"

#include <cmath>
#include <stdexcept>

namespace graphflow {

ProblemData ProblemData::make(WeightedGraph graph, double rho, VertexFunction q, Phi phi,
                              bool normalizeQ) {
    checkDomain(graph, q, "ProblemData");
    if (!std::isfinite(rho)) throw std::invalid_argument("ProblemData: rho must be finite");
    if (!q.allFinite()) throw std::invalid_argument("ProblemData: Q has non-finite values");
    double qInt = graph.mu().dot(q);
    if (normalizeQ) {
        q.array() += (rho - qInt) / graph.volume();
        qInt = graph.mu().dot(q);
    }
    if (std::abs(qInt - rho) > 1e-10 * std::max(1.0, std::abs(rho)))
        throw std::invalid_argument(
            "ProblemData: Q violates the compatibility condition int_V Q dmu = rho "
            "(int Q dmu = " +
            std::to_string(qInt) + ", rho = " + std::to_string(rho) +
            "); pass normalizeQ to shift Q by a constant");
    return ProblemData{std::move(graph), rho, std::move(q), std::move(phi)};
}

double logIntegralExp(const WeightedGraph& g, const VertexFunction& u) {
    checkDomain(g, u, "logIntegralExp");
    double m = u.maxCoeff();
    double s = g.mu().dot((u.array() - m).exp().matrix());
    return m + std::log(s);
}

double energy(const ProblemData& p, const VertexFunction& u) {
    checkDomain(p.graph, u, "energy");
    double j = 0.5 * dirichletEnergy(p.graph, u) + integral(p.graph, p.q.cwiseProduct(u));
    if (p.rho != 0.0) j -= p.rho * logIntegralExp(p.graph, u);
    return j;
}

VertexFunction meanFieldResidual(const ProblemData& p, const VertexFunction& u) {
    checkDomain(p.graph, u, "meanFieldResidual");
    VertexFunction m = laplacian(p.graph, u) - p.q;
    if (p.rho != 0.0) {
        double shift = u.maxCoeff();
        Eigen::ArrayXd e = (u.array() - shift).exp();
        double s = (p.graph.mu().array() * e).sum();
        m.array() += p.rho * e / s;
    }
    return m;
}

double phiMass(const ProblemData& p, const VertexFunction& u) {
    checkDomain(p.graph, u, "phiMass");
    double acc = 0.0;
    for (int i = 0; i < u.size(); ++i) acc += p.graph.mu()[i] * p.phi.value(u[i]);
    return acc;
}

double energyDifferential(const ProblemData& p, const VertexFunction& u,
                          const VertexFunction& h) {
    checkDomain(p.graph, h, "energyDifferential");
    return -integral(p.graph, meanFieldResidual(p, u).cwiseProduct(h));
}

}  // namespace graphflow
