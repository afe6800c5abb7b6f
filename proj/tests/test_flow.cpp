#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>
#include <string>

#include "graphflow/flow.hpp"
#include "helpers.hpp"

using namespace graphflow;
using namespace testing;

namespace {

ProblemData k2Zero() {
    return ProblemData::make(k2(), 0.0, VertexFunction::Zero(2), Phi::exp(1.0));
}

/// Constant steady problem: Q = rho/|V| makes every constant u a solution.
ProblemData constantSteady(const WeightedGraph& g, double rho, Phi phi) {
    return ProblemData::make(g, rho, VertexFunction::Constant(g.size(), rho / g.volume()),
                             std::move(phi));
}

}  // namespace

TEST_CASE("flow right-hand side") {
    ProblemData p = constantSteady(p3(), 2.0, Phi::exp(1.0));
    CHECK(flowRhs(p, VertexFunction::Constant(3, 0.4)).cwiseAbs().maxCoeff() <= 1e-15);

    ProblemData p0 = k2Zero();
    VertexFunction u(2);
    u << 0.0, 1.0;
    VertexFunction r = flowRhs(p0, u);
    CHECK(r[0] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(r[1] == doctest::Approx(-std::exp(-1.0)).epsilon(1e-15));
}

TEST_CASE("chain rule identity phi'(u) rhs(u) = M(u)") {
    std::mt19937_64 gen(83);
    for (const Phi& phi : {Phi::exp(1.0), Phi::expPoly(1.0, 2.0, 2.0),
                           Phi::quadLog(std::exp(1.0))}) {
        for (int trial = 0; trial < 100; ++trial) {
            WeightedGraph g = randomConnectedGraph(gen, 3 + static_cast<int>(u01(gen) * 12));
            double rho = uniform(gen, -8.0, 8.0);
            ProblemData p = ProblemData::make(g, rho, randomQ(gen, g, rho), phi);
            VertexFunction u = randomFunction(gen, g.size());
            VertexFunction r = flowRhs(p, u);
            VertexFunction m = meanFieldResidual(p, u);
            for (int i = 0; i < g.size(); ++i) {
                REQUIRE(std::abs(p.phi.deriv(u[i]) * r[i] - m[i]) <=
                        1e-14 * std::max(1.0, std::abs(m[i])));
            }
        }
    }
}

TEST_CASE("stiffness failure names the offending vertex") {
    ProblemData p = k2Zero();
    VertexFunction u(2);
    u << -746.0, 0.0;  // e^{-746} underflows to exactly zero
    try {
        flowRhs(p, u);
        FAIL("expected StiffnessError");
    } catch (const StiffnessError& e) {
        CHECK(std::string(e.what()).find("'a'") != std::string::npos);
    }
}

TEST_CASE("single step at a steady state is exact") {
    ProblemData p = constantSteady(k2(), 1.0, Phi::exp(1.0));
    VertexFunction u = VertexFunction::Constant(2, 0.3);
    StepResult res = step(p, u, 0.5);
    CHECK((res.u - u).cwiseAbs().maxCoeff() == 0.0);
    CHECK(res.dtUsed == 0.5);
    CHECK(res.dtNext == 1.0);  // grows by the capped factor 2
    CHECK(res.errorEstimate == 0.0);
    CHECK(res.rejections == 0);
}

TEST_CASE("accepted steps preserve mass and never raise the energy") {
    std::mt19937_64 gen(89);
    for (int trial = 0; trial < 60; ++trial) {
        WeightedGraph g = randomConnectedGraph(gen, 3 + static_cast<int>(u01(gen) * 10));
        double rho = uniform(gen, -6.0, 6.0);
        ProblemData p = ProblemData::make(g, rho, randomQ(gen, g, rho), Phi::exp(1.0));
        VertexFunction u = randomFunction(gen, g.size(), 1.5);
        double massBefore = phiMass(p, u);
        double jBefore = energy(p, u);
        StepResult res = step(p, u, 1e-2);
        REQUIRE(std::abs(phiMass(p, res.u) - massBefore) <= 1e-8 * std::abs(massBefore));
        REQUIRE(energy(p, res.u) <= jBefore + 1e-10);
        REQUIRE(res.dtNext <= 2.0 * res.dtUsed);
    }
}

TEST_CASE("step size underflow raises a loud failure") {
    ProblemData p = k2Zero();
    VertexFunction u(2);
    u << 0.0, 1.0;
    StepOptions opts;
    opts.dtMin = 1e-14;
    CHECK_THROWS_AS(step(p, u, 1e-20, opts), StepFailure);
}

TEST_CASE("integrate detects an already-steady start") {
    ProblemData p = constantSteady(p3(), -2.0, Phi::quadLog(std::exp(1.0)));
    FlowProblem fp{p, VertexFunction::Constant(3, 1.1)};
    TrajectoryRecord rec = integrate(fp);
    CHECK(rec.status == FlowStatus::Converged);
    CHECK(rec.samples.size() == 1);
    CHECK(rec.samples[0].t == 0.0);
    CHECK((rec.samples[0].u - fp.u0).cwiseAbs().maxCoeff() == 0.0);
    CHECK(rec.acceptedSteps == 0);
}

TEST_CASE("closed-form limit on the two-vertex graph") {
    ProblemData p = k2Zero();
    VertexFunction u0(2);
    u0 << 0.0, std::log(3.0);
    FlowProblem fp{p, u0};
    TrajectoryRecord rec = integrate(fp);
    REQUIRE(rec.status == FlowStatus::Converged);
    const VertexFunction& limit = rec.samples.back().u;
    CHECK(limit[0] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(limit[1] == doctest::Approx(std::log(2.0)).epsilon(1e-6));
    CHECK(rec.samples.back().residualInf < fp.tolResidual);
    CHECK(rec.uInfMax >= std::log(3.0));
}

TEST_CASE("trajectory invariants hold on random problems") {
    std::mt19937_64 gen(97);
    for (int trial = 0; trial < 10; ++trial) {
        WeightedGraph g = randomConnectedGraph(gen, 4 + static_cast<int>(u01(gen) * 9));
        double rho = uniform(gen, -6.0, 6.0);
        ProblemData p = ProblemData::make(g, rho, randomQ(gen, g, rho), Phi::exp(1.0));
        FlowProblem fp{p, randomFunction(gen, g.size(), 1.0)};
        TrajectoryRecord rec = integrate(fp);
        REQUIRE(rec.status == FlowStatus::Converged);
        REQUIRE(rec.samples.back().residualInf < fp.tolResidual);

        double mass0 = rec.samples.front().mass;
        for (size_t i = 0; i < rec.samples.size(); ++i) {
            const TrajectorySample& s = rec.samples[i];
            if (i > 0) {
                REQUIRE(s.t > rec.samples[i - 1].t);
                REQUIRE(s.j <= rec.samples[i - 1].j + 1e-10);
            }
            REQUIRE(std::abs(s.mass - mass0) <= fp.massDriftTol * std::abs(mass0));
        }
        // the limit keeps the initial mass
        REQUIRE(std::abs(rec.samples.back().mass - phiMass(p, fp.u0)) <=
                1e-6 * phiMass(p, fp.u0));
    }
}

TEST_CASE("horizon is reported when the clock runs out") {
    ProblemData p = k2Zero();
    VertexFunction u0(2);
    u0 << 0.0, std::log(3.0);
    FlowProblem fp{p, u0};
    fp.tMax = 1e-3;
    TrajectoryRecord rec = integrate(fp);
    CHECK(rec.status == FlowStatus::HorizonReached);
    CHECK(rec.samples.back().t <= fp.tMax);
    CHECK(rec.samples.back().residualInf >= fp.tolResidual);
}

TEST_CASE("unsteppable state fails loudly with diagnostics") {
    ProblemData p = k2Zero();
    VertexFunction u0(2);
    u0 << -746.0, 0.0;  // phi' = 0 exactly at the first vertex
    FlowProblem fp{p, u0};
    TrajectoryRecord rec = integrate(fp);
    CHECK(rec.status == FlowStatus::StepFailure);
    CHECK(!rec.message.empty());
}

TEST_CASE("record thinning keeps first and last samples") {
    ProblemData p = k2Zero();
    VertexFunction u0(2);
    u0 << 0.0, std::log(3.0);
    FlowProblem fp{p, u0};
    fp.recordEvery = 1000000;
    TrajectoryRecord rec = integrate(fp);
    REQUIRE(rec.status == FlowStatus::Converged);
    CHECK(rec.samples.size() == 2);
    CHECK(rec.samples.front().t == 0.0);
    CHECK(rec.samples.back().residualInf < fp.tolResidual);
}

TEST_CASE("rejections are counted when the initial step is absurd") {
    ProblemData p = k2Zero();
    VertexFunction u0(2);
    u0 << 0.0, std::log(3.0);
    FlowProblem fp{p, u0};
    fp.dtInit = 1e5;
    TrajectoryRecord rec = integrate(fp);
    CHECK(rec.status == FlowStatus::Converged);
    CHECK(rec.rejectedSteps >= 1);
}

TEST_CASE("translates of the initial data reach steady states too") {
    std::mt19937_64 gen(103);
    WeightedGraph g = randomConnectedGraph(gen, 6);
    ProblemData p = ProblemData::make(g, 1.0, randomQ(gen, g, 1.0), Phi::exp(1.0));
    VertexFunction u0 = randomFunction(gen, 6, 1.0);
    for (double c : {0.0, 2.0}) {
        FlowProblem fp{p, u0.array() + c};
        TrajectoryRecord rec = integrate(fp);
        REQUIRE(rec.status == FlowStatus::Converged);
        REQUIRE(meanFieldResidual(p, rec.samples.back().u).cwiseAbs().maxCoeff() <
                fp.tolResidual);
    }
}

TEST_CASE("discrete dissipation approaches -int phi'(u) u_t^2 dmu as dt shrinks") {
    ProblemData p = k2Zero();
    VertexFunction u(2);
    u << 0.0, 1.0;
    VertexFunction r = flowRhs(p, u);
    double dissipation = 0.0;
    for (int i = 0; i < 2; ++i)
        dissipation += p.graph.mu()[i] * p.phi.deriv(u[i]) * r[i] * r[i];

    auto defect = [&](double dt) {
        auto [u5, err] = trialStep(p, u, dt);
        return std::abs((energy(p, u5) - energy(p, u)) / dt + dissipation);
    };
    double e1 = defect(1e-3);
    double e2 = defect(5e-4);
    double e3 = defect(2.5e-4);
    CHECK(e2 <= 0.75 * e1);
    CHECK(e3 <= 0.75 * e2);
}
