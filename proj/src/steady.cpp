#include "graphflow/steady.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>
#include <vector>

namespace graphflow {

namespace {

// squared 2-norm of the scaled residual [M(u); (mass - target)/target]
double merit(const ProblemData& p, const VertexFunction& u, double target) {
    VertexFunction m = meanFieldResidual(p, u);
    double massErr = (phiMass(p, u) - target) / target;
    return m.squaredNorm() + massErr * massErr;
}

}  // namespace

Eigen::MatrixXd augmentedJacobian(const ProblemData& p, const VertexFunction& u,
                                  double massTarget) {
    checkDomain(p.graph, u, "augmentedJacobian");
    const int n = p.graph.size();
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(n + 1, n);
    for (const Edge& e : p.graph.edges()) {
        jac(e.a, e.b) += e.w / p.graph.mu()[e.a];
        jac(e.b, e.a) += e.w / p.graph.mu()[e.b];
        jac(e.a, e.a) -= e.w / p.graph.mu()[e.a];
        jac(e.b, e.b) -= e.w / p.graph.mu()[e.b];
    }
    if (p.rho != 0.0) {
        double shift = u.maxCoeff();
        Eigen::ArrayXd e = (u.array() - shift).exp();
        double s = (p.graph.mu().array() * e).sum();
        Eigen::VectorXd w = (e / s).matrix();  // e^{u_i}/S
        jac.topRows(n) += p.rho * (Eigen::MatrixXd(w.asDiagonal()) -
                                   w * p.graph.mu().cwiseProduct(w).transpose());
    }
    for (int j = 0; j < n; ++j)
        jac(n, j) = p.graph.mu()[j] * p.phi.deriv(u[j]) / massTarget;
    return jac;
}

SteadyResult newtonSolve(const ProblemData& p, double massTarget, const VertexFunction& uInit,
                         const NewtonOptions& opts) {
    checkDomain(p.graph, uInit, "newtonSolve");
    if (!(massTarget > 0.0) || !std::isfinite(massTarget))
        throw std::invalid_argument("newtonSolve: mass target must be positive, got " +
                                    std::to_string(massTarget));

    const int n = p.graph.size();
    SteadyResult result;
    VertexFunction u = uInit;

    for (int it = 0; it <= opts.maxIterations; ++it) {
        VertexFunction m = meanFieldResidual(p, u);
        double massErr = (phiMass(p, u) - massTarget) / massTarget;
        result.uStar = u;
        result.residualInf = m.cwiseAbs().maxCoeff();
        result.massError = massErr;
        result.iterations = it;
        if (result.residualInf <= opts.tolResidual && std::abs(massErr) <= opts.tolMassRel) {
            result.converged = true;
            return result;
        }
        if (it == opts.maxIterations) break;

        Eigen::VectorXd f(n + 1);
        f.head(n) = m;
        f[n] = massErr;
        Eigen::MatrixXd jac = augmentedJacobian(p, u, massTarget);
        Eigen::VectorXd d = jac.colPivHouseholderQr().solve(-f);
        if (!d.allFinite()) {
            result.message = "newtonSolve: singular Jacobian, direction not finite";
            return result;
        }

        double m0 = f.squaredNorm();
        double alpha = 1.0;
        bool advanced = false;
        for (int bt = 0; bt <= opts.maxBacktrack; ++bt) {
            VertexFunction trial = u + alpha * d;
            double mTrial;
            try {
                mTrial = merit(p, trial, massTarget);
            } catch (const std::range_error&) {
                mTrial = std::numeric_limits<double>::infinity();
            }
            if (mTrial < m0) {
                u = std::move(trial);
                advanced = true;
                break;
            }
            alpha *= 0.5;
        }
        if (!advanced) {
            result.message = "newtonSolve: damping exhausted after " +
                             std::to_string(opts.maxBacktrack) + " halvings";
            return result;
        }
    }
    result.message = "newtonSolve: no convergence within " +
                     std::to_string(opts.maxIterations) + " iterations";
    return result;
}

VertexFunction translateToMass(const ProblemData& p, const VertexFunction& u,
                               double massTarget) {
    checkDomain(p.graph, u, "translateToMass");
    if (!(massTarget > 0.0) || !std::isfinite(massTarget))
        throw std::invalid_argument("translateToMass: mass target must be positive");
    double c = 0.0;
    for (int it = 0; it < 60; ++it) {
        VertexFunction shifted = u.array() + c;
        double g = phiMass(p, shifted) - massTarget;
        if (std::abs(g) <= 1e-14 * massTarget) break;
        double dg = 0.0;
        for (int i = 0; i < u.size(); ++i) dg += p.graph.mu()[i] * p.phi.deriv(shifted[i]);
        c -= g / dg;
    }
    return u.array() + c;
}

double kazdanWarnerResidual(const ProblemData& p, const VertexFunction& u) {
    checkDomain(p.graph, u, "kazdanWarnerResidual");
    VertexFunction v = u.array() - logIntegralExp(p.graph, u);
    VertexFunction r = laplacian(p.graph, v) - p.q + p.rho * v.array().exp().matrix();
    return r.cwiseAbs().maxCoeff();
}

LojasiewiczFit lojasiewiczFit(const TrajectoryRecord& traj, double jLimit) {
    std::vector<std::pair<double, double>> pts;  // (log(J - jLimit), log ||M||_L2)
    for (const TrajectorySample& s : traj.samples) {
        if (s.j > jLimit + 1e-14 && s.residualL2 > 0.0)
            pts.emplace_back(std::log(s.j - jLimit), std::log(s.residualL2));
    }
    if (pts.size() < 10)
        throw std::invalid_argument("lojasiewiczFit: trajectory too short (" +
                                    std::to_string(pts.size()) + " usable samples)");
    // tail closest to the limit
    std::vector<std::pair<double, double>> tail(pts.begin() + pts.size() / 2, pts.end());

    const double n = static_cast<double>(tail.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : tail) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    double varX = sxx - sx * sx / n;
    if (!(varX > 1e-24))
        throw std::invalid_argument("lojasiewiczFit: J values in tail have no spread");
    double slope = (sxy - sx * sy / n) / varX;
    slope = std::clamp(slope, 0.5, 1.0 - 1e-9);  // theta in (0, 1/2]

    // smallest C for which log||M|| >= (1-theta) log(J - jLimit) + log(1/C) everywhere
    double intercept = std::numeric_limits<double>::infinity();
    for (auto [x, y] : tail) intercept = std::min(intercept, y - slope * x);

    LojasiewiczFit fit;
    fit.theta = 1.0 - slope;
    fit.c = std::exp(-intercept);
    fit.samplesUsed = static_cast<int>(tail.size());
    int ok = 0;
    for (auto [x, y] : tail)
        if (y >= slope * x + intercept - 1e-12) ++ok;
    fit.fitQuality = static_cast<double>(ok) / n;
    return fit;
}

}  // namespace graphflow
