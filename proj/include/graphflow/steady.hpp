#pragma once

#include "graphflow/energy.hpp"
#include "graphflow/flow.hpp"

namespace graphflow {

struct SteadyResult {
    VertexFunction uStar;
    double residualInf = 0.0;
    double massError = 0.0;  // relative to the requested mass
    int iterations = 0;
    bool converged = false;
    std::string message;
};

struct NewtonOptions {
    double tolResidual = 1e-10;
    double tolMassRel = 1e-10;
    int maxIterations = 100;
    int maxBacktrack = 30;
};

/// Solves M(u) = 0 together with int_V phi(u) dmu = massTarget by damped
/// Gauss-Newton on the full (l+1) x l least-squares system; the mass
/// constraint pins the translation degree of freedom of the equation.
SteadyResult newtonSolve(const ProblemData& p, double massTarget, const VertexFunction& uInit,
                         const NewtonOptions& opts = {});

/// The (l+1) x l Jacobian of [M(u); (phiMass(u) - massTarget)/massTarget].
Eigen::MatrixXd augmentedJacobian(const ProblemData& p, const VertexFunction& u,
                                  double massTarget);

/// u + c with the constant c chosen so phiMass(u + c) = massTarget.
VertexFunction translateToMass(const ProblemData& p, const VertexFunction& u,
                               double massTarget);

/// Residual of the Kazdan-Warner equation Delta v = Q - rho e^v at
/// v = u - log int e^u dmu; algebraically equal to ||M(u)||_inf.
double kazdanWarnerResidual(const ProblemData& p, const VertexFunction& u);

struct LojasiewiczFit {
    double theta = 0.0;
    double c = 0.0;
    double fitQuality = 0.0;  // fraction of tail samples satisfying the bound
    int samplesUsed = 0;
};

/// Fits |J(u(t)) - jLimit|^{1-theta} <= C ||M(u(t))||_{L^2} over the tail of a
/// trajectory: the slope of log||M|| against log(J - jLimit) is estimated by
/// least squares with theta constrained to (0, 1/2], and C is then the
/// smallest constant making the bound hold on every tail sample. Throws when
/// fewer than 10 samples have J above jLimit.
LojasiewiczFit lojasiewiczFit(const TrajectoryRecord& traj, double jLimit);

}  // namespace graphflow
