#pragma once

#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "graphflow/energy.hpp"

namespace graphflow {

/// phi'(u) underflowed to exactly zero somewhere; the explicit stepper cannot
/// advance the state at that vertex.
struct StiffnessError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// The step size underflowed while rejections kept halving it.
struct StepFailure : std::runtime_error {
    StepFailure(const std::string& msg, double dt) : std::runtime_error(msg), dt(dt) {}
    double dt;
};

struct FlowProblem {
    ProblemData data;
    VertexFunction u0;
    double tolResidual = 1e-8;   // stop when ||M(u)||_inf falls below this
    double tMax = 1e6;           // safety horizon
    double dtInit = 1e-2;
    double rkTol = 1e-10;        // per-step embedded error tolerance
    double massDriftTol = 1e-8;  // step rejection threshold on conservation
    int recordEvery = 10;        // trajectory thinning
};

enum class FlowStatus { Converged, HorizonReached, StepFailure };

const char* toString(FlowStatus s);

struct TrajectorySample {
    double t;
    VertexFunction u;
    double j;
    double residualInf;
    double residualL2;
    double mass;
};

struct TrajectoryRecord {
    std::vector<TrajectorySample> samples;
    FlowStatus status = FlowStatus::StepFailure;
    long acceptedSteps = 0;
    long rejectedSteps = 0;
    double uInfMax = 0.0;  // max over t of ||u(t)||_inf, reported not asserted
    std::string message;   // diagnostics on failure
};

/// du/dt = M(u)/phi'(u), the ODE form of the flow. Throws StiffnessError if
/// phi'(u) underflows to zero at some vertex.
VertexFunction flowRhs(const ProblemData& p, const VertexFunction& u);

/// One raw Dormand-Prince 5(4) stage: returns the 5th-order proposal and the
/// embedded error vector for step size dt, with no acceptance control.
std::pair<VertexFunction, VertexFunction> trialStep(const ProblemData& p,
                                                    const VertexFunction& u, double dt);

struct StepOptions {
    double rkTol = 1e-10;
    double massDriftTol = 1e-8;
    double energySlack = 1e-10;
    double dtMin = 1e-14;
    /// Mass level to project accepted states back onto (a constant shift,
    /// which changes neither J nor M). NaN projects onto the incoming state's mass.
    double massTarget = std::numeric_limits<double>::quiet_NaN();
};

struct StepResult {
    VertexFunction u;
    double dtUsed = 0.0;
    double dtNext = 0.0;
    double errorEstimate = 0.0;  // scaled embedded error of the accepted step
    int rejections = 0;          // trials discarded before acceptance
};

/// One adaptive step. A trial is accepted only if the embedded error estimate
/// passes rkTol, the relative mass drift stays within massDriftTol, and J does
/// not increase by more than energySlack; rejected trials halve dt. Throws
/// StepFailure when dt falls below dtMin.
StepResult step(const ProblemData& p, const VertexFunction& u, double dt,
                const StepOptions& opts = {});

/// Integrates from u0 until ||M(u)||_inf < tolResidual or t >= tMax.
TrajectoryRecord integrate(const FlowProblem& fp);

}  // namespace graphflow
