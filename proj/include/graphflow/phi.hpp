#pragma once

#include <functional>
#include <string>

namespace graphflow {

/// Admissible nonlinearity for the flow: C^1, strictly increasing, phi(s) -> 0
/// as s -> -infty, and inf_{s>=0} phi'(s) > 0. Three built-in families:
///
///   exp(alpha):                phi(s) = e^{alpha s},                       alpha > 0
///   expPoly(alpha, beta, p):   phi(s) = e^{alpha s} + beta s^p  (s > 0),
///                              phi(s) = e^{alpha s}             (s <= 0),  beta >= 0, p > 1
///   quadLog(a):                phi(s) = s^2 + (log a)(s + cos s - 1) + 1 (s > 0),
///                              phi(s) = a^s                              (s <= 0),  a > 1
///
/// Admissibility is validated at construction on a 2001-point grid over
/// [-50, 50]: phi and phi' positive and finite throughout, and
/// phi(-50) < 1e-6 * phi(0) as the decay gate. Custom functions pass the same
/// grid checks; their asymptotic behavior is taken as declared by the caller.
class Phi {
  public:
    enum class Kind { Exp, ExpPoly, QuadLog, Custom };

    static Phi exp(double alpha);
    static Phi expPoly(double alpha, double beta, double p);
    static Phi quadLog(double a);
    static Phi custom(std::function<double(double)> value, std::function<double(double)> deriv);

    double value(double s) const;
    double deriv(double s) const;

    /// Unique s with phi(s) = y, to |phi(s) - y| <= 1e-12 * max(1, y).
    /// Monotone bracketing plus bisection, then Newton refinement.
    double invert(double y) const;

    /// inf_{s >= 0} phi'(s); analytic for the built-in families, grid minimum
    /// over [0, 50] for custom ones. The stepper uses this for step safety.
    double infDerivNonneg() const;

    Kind kind() const { return kind_; }
    double alpha() const { return alpha_; }
    double beta() const { return beta_; }
    double p() const { return p_; }
    double a() const { return a_; }

    /// Inputs above this are rejected with std::range_error: e^{alpha s}
    /// overflows the double range near s = 709/alpha.
    static constexpr double kMaxArg = 500.0;

  private:
    Phi() = default;
    void validate();
    double rawValue(double s) const;
    double rawDeriv(double s) const;

    Kind kind_ = Kind::Exp;
    double alpha_ = 1.0;
    double beta_ = 0.0;
    double p_ = 2.0;
    double a_ = 0.0;
    double infDeriv_ = 0.0;
    std::function<double(double)> customValue_;
    std::function<double(double)> customDeriv_;
};

}  // namespace graphflow
