#include "graphflow/flow.hpp"

#include <cmath>

namespace graphflow {

const char* toString(FlowStatus s) {
    switch (s) {
        case FlowStatus::Converged: return "converged";
        case FlowStatus::HorizonReached: return "horizon_reached";
        case FlowStatus::StepFailure: return "step_failure";
    }
    return "unknown";
}

VertexFunction flowRhs(const ProblemData& p, const VertexFunction& u) {
    VertexFunction m = meanFieldResidual(p, u);
    for (int i = 0; i < u.size(); ++i) {
        double d = p.phi.deriv(u[i]);
        if (d == 0.0)
            throw StiffnessError("flow: phi'(u) underflowed to zero at vertex '" +
                                 p.graph.id(i) + "' (u = " + std::to_string(u[i]) + ")");
        m[i] /= d;
    }
    return m;
}

namespace {

// Dormand-Prince 5(4) coefficients
constexpr double a21 = 1.0 / 5;
constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                 a54 = -212.0 / 729;
constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                 a64 = 49.0 / 176, a65 = -5103.0 / 18656;
constexpr double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192, b5 = -2187.0 / 6784,
                 b6 = 11.0 / 84;
// difference between the 5th- and embedded 4th-order weights
constexpr double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                 e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

// shift u by the constant c with phiMass(u + c) = target; 1e-15-level correction
VertexFunction projectMass(const ProblemData& p, VertexFunction u, double target) {
    double c = 0.0;
    for (int it = 0; it < 8; ++it) {
        VertexFunction shifted = u.array() + c;
        double g = phiMass(p, shifted) - target;
        if (std::abs(g) <= 1e-15 * std::abs(target)) break;
        double dg = 0.0;
        for (int i = 0; i < u.size(); ++i) dg += p.graph.mu()[i] * p.phi.deriv(shifted[i]);
        if (dg <= 0.0) break;
        c -= g / dg;
    }
    if (c != 0.0) u.array() += c;
    return u;
}

}  // namespace

std::pair<VertexFunction, VertexFunction> trialStep(const ProblemData& p,
                                                    const VertexFunction& u, double dt) {
    VertexFunction k1 = flowRhs(p, u);
    VertexFunction k2 = flowRhs(p, u + dt * (a21 * k1));
    VertexFunction k3 = flowRhs(p, u + dt * (a31 * k1 + a32 * k2));
    VertexFunction k4 = flowRhs(p, u + dt * (a41 * k1 + a42 * k2 + a43 * k3));
    VertexFunction k5 = flowRhs(p, u + dt * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
    VertexFunction k6 =
        flowRhs(p, u + dt * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
    VertexFunction u5 = u + dt * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
    VertexFunction k7 = flowRhs(p, u5);
    VertexFunction err =
        dt * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);
    return {std::move(u5), std::move(err)};
}

StepResult step(const ProblemData& p, const VertexFunction& u, double dt,
                const StepOptions& opts) {
    double massBefore = phiMass(p, u);
    double jBefore = energy(p, u);
    double target = std::isnan(opts.massTarget) ? massBefore : opts.massTarget;

    std::string lastReason;
    int rejections = 0;
    while (true) {
        if (!(dt >= opts.dtMin))
            throw StepFailure("flow: step size underflowed to " + std::to_string(dt) +
                                  (lastReason.empty() ? "" : " (" + lastReason + ")"),
                              dt);
        bool rejected = false;
        try {
            auto [u5, err] = trialStep(p, u, dt);
            double errNorm = 0.0;
            for (int i = 0; i < u.size(); ++i) {
                double scale = opts.rkTol * (1.0 + std::max(std::abs(u[i]), std::abs(u5[i])));
                errNorm = std::max(errNorm, std::abs(err[i]) / scale);
            }
            if (errNorm > 1.0) {
                lastReason = "embedded error estimate too large";
                rejected = true;
            } else {
                double drift = std::abs(phiMass(p, u5) - massBefore) / std::abs(massBefore);
                if (drift > opts.massDriftTol) {
                    lastReason = "mass drift " + std::to_string(drift);
                    rejected = true;
                } else if (energy(p, u5) > jBefore + opts.energySlack) {
                    lastReason = "energy increased";
                    rejected = true;
                } else {
                    double grow =
                        errNorm > 0.0 ? std::min(2.0, 0.9 * std::pow(errNorm, -0.2)) : 2.0;
                    return {projectMass(p, std::move(u5), target), dt, dt * grow, errNorm,
                            rejections};
                }
            }
        } catch (const StiffnessError& e) {
            // a stage may leave the representable region for large dt
            lastReason = e.what();
            rejected = true;
        } catch (const std::range_error& e) {
            lastReason = e.what();
            rejected = true;
        }
        if (rejected) {
            dt *= 0.5;
            ++rejections;
        }
    }
}

TrajectoryRecord integrate(const FlowProblem& fp) {
    const ProblemData& p = fp.data;
    TrajectoryRecord rec;
    VertexFunction u = fp.u0;
    double t = 0.0;
    double mass0 = phiMass(p, u);

    StepOptions opts;
    opts.rkTol = fp.rkTol;
    opts.massDriftTol = fp.massDriftTol;
    opts.dtMin = 1e-14 * fp.tMax;
    opts.massTarget = mass0;

    auto record = [&](const VertexFunction& v, double time) {
        VertexFunction m = meanFieldResidual(p, v);
        double l2 = std::sqrt(p.graph.mu().dot(m.cwiseProduct(m)));
        rec.samples.push_back(TrajectorySample{time, v, energy(p, v),
                                               m.cwiseAbs().maxCoeff(), l2, phiMass(p, v)});
    };

    rec.uInfMax = u.cwiseAbs().maxCoeff();
    record(u, t);
    if (rec.samples.back().residualInf < fp.tolResidual) {
        rec.status = FlowStatus::Converged;
        return rec;
    }

    double dt = fp.dtInit;
    while (true) {
        if (fp.tMax - t <= opts.dtMin) {
            rec.status = FlowStatus::HorizonReached;
            break;
        }
        if (t + dt > fp.tMax) dt = fp.tMax - t;
        StepResult res;
        try {
            res = step(p, u, dt, opts);
        } catch (const StepFailure& e) {
            rec.status = FlowStatus::StepFailure;
            rec.message = e.what();
            break;
        } catch (const StiffnessError& e) {
            rec.status = FlowStatus::StepFailure;
            rec.message = e.what();
            break;
        } catch (const std::range_error& e) {
            rec.status = FlowStatus::StepFailure;
            rec.message = e.what();
            break;
        }
        u = std::move(res.u);
        t += res.dtUsed;
        dt = res.dtNext;
        ++rec.acceptedSteps;
        rec.rejectedSteps += res.rejections;
        rec.uInfMax = std::max(rec.uInfMax, u.cwiseAbs().maxCoeff());

        double residual = meanFieldResidual(p, u).cwiseAbs().maxCoeff();
        bool converged = residual < fp.tolResidual;
        bool horizon = t >= fp.tMax;
        if (converged || horizon || rec.acceptedSteps % fp.recordEvery == 0) record(u, t);
        if (converged) {
            rec.status = FlowStatus::Converged;  // ties with the horizon report converged
            break;
        }
        if (horizon) {
            rec.status = FlowStatus::HorizonReached;
            break;
        }
    }
    if (rec.samples.back().t != t) record(u, t);
    return rec;
}

}  // namespace graphflow
