#include "graphflow/phi.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace graphflow {

namespace {
constexpr double kGridLo = -50.0;
constexpr double kGridHi = 50.0;
constexpr int kGridN = 2001;
}  // namespace

Phi Phi::exp(double alpha) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("phi: exp requires alpha > 0");
    Phi phi;
    phi.kind_ = Kind::Exp;
    phi.alpha_ = alpha;
    phi.infDeriv_ = alpha;  // phi' = alpha e^{alpha s}, minimal at s = 0
    phi.validate();
    return phi;
}

Phi Phi::expPoly(double alpha, double beta, double p) {
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("phi: exp_poly requires alpha > 0");
    if (!(beta >= 0.0) || !std::isfinite(beta))
        throw std::invalid_argument("phi: exp_poly requires beta >= 0");
    if (!(p > 1.0) || !std::isfinite(p))
        throw std::invalid_argument("phi: exp_poly requires p > 1");
    Phi phi;
    phi.kind_ = Kind::ExpPoly;
    phi.alpha_ = alpha;
    phi.beta_ = beta;
    phi.p_ = p;
    // phi'(s) = alpha e^{alpha s} + beta p s^{p-1} on s > 0, both terms
    // increasing, so the infimum over [0, inf) sits at s = 0.
    phi.infDeriv_ = alpha;
    phi.validate();
    return phi;
}

Phi Phi::quadLog(double a) {
    if (!(a > 1.0) || !std::isfinite(a))
        throw std::invalid_argument("phi: quad_log requires a > 1");
    Phi phi;
    phi.kind_ = Kind::QuadLog;
    phi.a_ = a;
    // phi'(s) = 2s + log(a)(1 - sin s) on s >= 0. If log a <= 2 this is
    // increasing and the infimum is log a at s = 0; otherwise the interior
    // minimum is at s0 = arccos(2/log a), the first critical point.
    double la = std::log(a);
    if (la <= 2.0) {
        phi.infDeriv_ = la;
    } else {
        double s0 = std::acos(2.0 / la);
        phi.infDeriv_ = 2.0 * s0 + la * (1.0 - std::sin(s0));
    }
    phi.validate();
    return phi;
}

Phi Phi::custom(std::function<double(double)> value, std::function<double(double)> deriv) {
    if (!value || !deriv) throw std::invalid_argument("phi: custom requires value and deriv");
    Phi phi;
    phi.kind_ = Kind::Custom;
    phi.customValue_ = std::move(value);
    phi.customDeriv_ = std::move(deriv);
    double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i <= 1000; ++i) {
        double s = kGridHi * i / 1000.0;
        inf = std::min(inf, phi.rawDeriv(s));
    }
    phi.infDeriv_ = inf;
    phi.validate();
    return phi;
}

double Phi::rawValue(double s) const {
    switch (kind_) {
        case Kind::Exp:
            return std::exp(alpha_ * s);
        case Kind::ExpPoly:
            return s > 0.0 ? std::exp(alpha_ * s) + beta_ * std::pow(s, p_)
                           : std::exp(alpha_ * s);
        case Kind::QuadLog:
            return s > 0.0 ? s * s + std::log(a_) * (s + std::cos(s) - 1.0) + 1.0
                           : std::exp(s * std::log(a_));
        case Kind::Custom:
            return customValue_(s);
    }
    return 0.0;
}

double Phi::rawDeriv(double s) const {
    switch (kind_) {
        case Kind::Exp:
            return alpha_ * std::exp(alpha_ * s);
        case Kind::ExpPoly:
            return s > 0.0 ? alpha_ * std::exp(alpha_ * s) + beta_ * p_ * std::pow(s, p_ - 1.0)
                           : alpha_ * std::exp(alpha_ * s);
        case Kind::QuadLog:
            return s > 0.0 ? 2.0 * s + std::log(a_) * (1.0 - std::sin(s))
                           : std::log(a_) * std::exp(s * std::log(a_));
        case Kind::Custom:
            return customDeriv_(s);
    }
    return 0.0;
}

void Phi::validate() {
    for (int i = 0; i < kGridN; ++i) {
        double s = kGridLo + (kGridHi - kGridLo) * i / (kGridN - 1);
        double v = rawValue(s);
        double d = rawDeriv(s);
        if (!std::isfinite(v) || v <= 0.0)
            throw std::invalid_argument("phi: not positive and finite at s = " +
                                        std::to_string(s));
        if (!std::isfinite(d) || d <= 0.0)
            throw std::invalid_argument("phi: derivative not positive and finite at s = " +
                                        std::to_string(s));
    }
    if (!(rawValue(kGridLo) < 1e-6 * rawValue(0.0)))
        throw std::invalid_argument("phi: does not decay at -infty (phi(-50) >= 1e-6 phi(0))");
    if (!(infDeriv_ > 0.0))
        throw std::invalid_argument("phi: inf of derivative on [0, +infty) is not positive");
}

double Phi::value(double s) const {
    if (s > kMaxArg)
        throw std::range_error("phi: argument " + std::to_string(s) + " exceeds " +
                               std::to_string(kMaxArg));
    return rawValue(s);
}

double Phi::deriv(double s) const {
    if (s > kMaxArg)
        throw std::range_error("phi: argument " + std::to_string(s) + " exceeds " +
                               std::to_string(kMaxArg));
    return rawDeriv(s);
}

double Phi::invert(double y) const {
    if (!(y > 0.0) || !std::isfinite(y))
        throw std::range_error("phi: invert requires y > 0, got " + std::to_string(y));
    if (kind_ == Kind::Exp) {
        double s = std::log(y) / alpha_;
        if (s > kMaxArg) throw std::range_error("phi: invert target above range");
        return s;
    }

    // bracket: phi is strictly increasing with phi -> 0 at -infty
    double lo, hi;
    if (rawValue(0.0) < y) {
        lo = 0.0;
        hi = 1.0;
        while (rawValue(hi) < y) {
            if (hi >= kMaxArg) throw std::range_error("phi: invert target above range");
            lo = hi;
            hi = std::min(hi * 2.0, kMaxArg);
        }
    } else {
        hi = 0.0;
        lo = -1.0;
        while (rawValue(lo) > y) {
            hi = lo;
            lo *= 2.0;
            if (lo < -1e6) throw std::range_error("phi: invert target below range");
        }
    }

    for (int i = 0; i < 200 && hi - lo > 1e-15 * (1.0 + std::abs(lo) + std::abs(hi)); ++i) {
        double mid = 0.5 * (lo + hi);
        (rawValue(mid) < y ? lo : hi) = mid;
    }
    double s = 0.5 * (lo + hi);
    for (int i = 0; i < 4; ++i) {
        double d = rawDeriv(s);
        if (d <= 0.0) break;
        s -= (rawValue(s) - y) / d;
    }
    if (std::abs(rawValue(s) - y) > 1e-12 * std::max(1.0, y))
        throw std::range_error("phi: invert failed to reach tolerance");
    return s;
}

double Phi::infDerivNonneg() const { return infDeriv_; }

}  // namespace graphflow
