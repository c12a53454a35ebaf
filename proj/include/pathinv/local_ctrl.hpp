#pragma once

#include <optional>

#include "pathinv/tfl.hpp"

namespace pathinv {

/// Gains of the finite-time transversal law. The exponents are tied to one
/// scalar beta: beta1 = beta/(2-beta), beta2 = beta, beta3 = 1; beta = 1
/// degenerates to plain linear state feedback.
struct FiniteTimeGains {
    double k1 = 6.0, k2 = 11.0, k3 = 6.0;
    double beta = 0.9;

    double beta1() const { return beta / (2.0 - beta); }
    double beta2() const { return beta; }
    double beta3() const { return 1.0; }

    /// Requires k1,k2,k3 > 0 with k2*k3 > k1 (all characteristic roots in
    /// the open left half-plane) and beta in (0, 1].
    void validate() const;
};

struct BarrierConfig {
    double delta = 0.02;        // minimum forward-speed margin [m/s]
    double lambda0 = 1.0;       // slope of the first barrier lifting term
    double lambda_k = 1.0;      // slope of the barrier decay condition
    double clf_gain = 1.0;      // slope of the Lyapunov decay condition
    // cross-term weight of the tracking Lyapunov function, in [0, 1). The
    // diagonal form leaves the speed error unactuated wherever its rate
    // error vanishes; the cross term removes that degenerate direction.
    double clf_cross = 0.5;
    double relax_penalty = 100.0;

    void validate() const;
};

struct SpeedReference {
    enum class Kind { Constant, Sinusoid };
    Kind kind = Kind::Constant;
    double value = 0.5;      // constant reference
    double amplitude = 1.0;  // sinusoid: amplitude*sin(frequency*t) + offset
    double frequency = 1.0;
    double offset = 0.0;

    double eta2(double t) const;
    double eta3(double t) const;       // time derivative of eta2
    double eta3_rate(double t) const;  // time derivative of eta3
    /// Finite-difference consistency check of the derivative chain.
    void validate() const;
};

/// Finite-time transversal feedback -sum k_i sign(xi_i)|xi_i|^{beta_i}.
double kappa_xi(const Vec3& xi, const FiniteTimeGains& g);

struct BarrierTerms {
    double b = 0.0;     // delta - eta2
    double psi0 = 0.0;  // = b
    double psi1 = 0.0;  // b_dot + lambda0*b
    double lf_b = 0.0;  // -eta3
    double lf2_b = 0.0; // 0 for the chain dynamics
    double lg_lf_b = 0.0;  // -1
};

BarrierTerms barrier_terms(const Vec3& eta, const BarrierConfig& cfg);

struct QpSolution {
    double v_par = 0.0;
    double relax = 0.0;  // slack on the tracking (Lyapunov) row
    bool clf_active = false;
    bool cbf_active = false;
};

/// Two-variable strictly convex program: minimize (1/2)v^2 + p*relax^2
/// subject to the soft Lyapunov decrease row and the hard barrier row.
/// The Lyapunov row decreases the tracking error of the time-varying
/// reference, so the reference rate enters its drift term. Solved exactly
/// by active-set enumeration; the hard row is one-sided in v_par so the
/// program is always feasible.
QpSolution qp_filter(const Vec3& eta, double eta2_ref, double eta3_ref,
                     double eta3_ref_rate, const BarrierConfig& cfg);

struct LocalControlResult {
    AuxInput u;
    double v_par = 0.0;
    double v_perp = 0.0;
    double relax = 0.0;
    bool cbf_active = false;
    TflEval tfl;
};

/// The local path-invariant controller: transverse coordinates, finite-time
/// transversal input, barrier-filtered tangential input, and the
/// linearizing feedback. Throws HeadingViolation when the heading projects
/// non-positively onto the path direction.
LocalControlResult kappa0(const ExtendedState& x, const Curve& curve,
                          const CarParams& p, const FiniteTimeGains& gains,
                          const BarrierConfig& barrier, const SpeedReference& ref,
                          double t, double delta_y,
                          std::optional<double> hint = std::nullopt);

}  // namespace pathinv
