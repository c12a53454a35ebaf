#include "pathinv/local_ctrl.hpp"

#include <cmath>
#include <string>

namespace pathinv {

namespace {
constexpr double kKktTol = 1e-9;

double signed_power(double x, double e) {
    if (x == 0.0) return 0.0;  // removes the non-Lipschitz kink at the origin
    return std::copysign(std::pow(std::abs(x), e), x);
}
}  // namespace

void FiniteTimeGains::validate() const {
    if (!(k1 > 0.0 && k2 > 0.0 && k3 > 0.0))
        throw ScenarioError("finite-time gains must be positive");
    if (!(k2 * k3 > k1))
        throw ScenarioError("gain polynomial is not Hurwitz (needs k2*k3 > k1)");
    if (!(beta > 0.0 && beta <= 1.0))
        throw ScenarioError("beta must lie in (0, 1]");
}

void BarrierConfig::validate() const {
    if (!(delta > 0.0 && lambda0 > 0.0 && lambda_k > 0.0 && clf_gain > 0.0 &&
          relax_penalty > 0.0))
        throw ScenarioError("barrier configuration values must be positive");
    if (!(clf_cross >= 0.0 && clf_cross < 1.0))
        throw ScenarioError("tracking cross-term weight must lie in [0, 1)");
}

double SpeedReference::eta2(double t) const {
    if (kind == Kind::Constant) return value;
    return amplitude * std::sin(frequency * t) + offset;
}

double SpeedReference::eta3(double t) const {
    if (kind == Kind::Constant) return 0.0;
    return amplitude * frequency * std::cos(frequency * t);
}

double SpeedReference::eta3_rate(double t) const {
    if (kind == Kind::Constant) return 0.0;
    return -amplitude * frequency * frequency * std::sin(frequency * t);
}

void SpeedReference::validate() const {
    const double h = 1e-5;
    for (double t : {0.0, 0.37, 1.9, 7.3}) {
        const double fd2 = (eta2(t + h) - eta2(t - h)) / (2.0 * h);
        if (std::abs(fd2 - eta3(t)) > 1e-6 * std::max(1.0, std::abs(eta3(t))))
            throw ScenarioError("speed reference derivative is inconsistent");
        const double fd3 = (eta3(t + h) - eta3(t - h)) / (2.0 * h);
        if (std::abs(fd3 - eta3_rate(t)) > 1e-6 * std::max(1.0, std::abs(eta3_rate(t))))
            throw ScenarioError("speed reference second derivative is inconsistent");
    }
}

double kappa_xi(const Vec3& xi, const FiniteTimeGains& g) {
    return -g.k1 * signed_power(xi(0), g.beta1()) -
           g.k2 * signed_power(xi(1), g.beta2()) -
           g.k3 * signed_power(xi(2), g.beta3());
}

BarrierTerms barrier_terms(const Vec3& eta, const BarrierConfig& cfg) {
    BarrierTerms t;
    t.b = cfg.delta - eta(1);
    t.psi0 = t.b;
    t.lf_b = -eta(2);
    t.lf2_b = 0.0;
    t.lg_lf_b = -1.0;
    t.psi1 = t.lf_b + cfg.lambda0 * t.psi0;
    return t;
}

QpSolution qp_filter(const Vec3& eta, double eta2_ref, double eta3_ref,
                     double eta3_ref_rate, const BarrierConfig& cfg) {
    // tracking errors follow e2_dot = e3, e3_dot = v_par - eta3_ref_rate,
    // so the input-free part of V_dot carries the reference rate;
    // V = e2^2/2 + c*e2*e3 + e3^2/2 with c = clf_cross
    const double e2 = eta(1) - eta2_ref;
    const double e3 = eta(2) - eta3_ref;
    const double c = cfg.clf_cross;
    const double V = 0.5 * e2 * e2 + c * e2 * e3 + 0.5 * e3 * e3;
    const double lf_v = (e2 + c * e3) * e3 - (e3 + c * e2) * eta3_ref_rate;
    const double lg_v = e3 + c * e2;

    const BarrierTerms bt = barrier_terms(eta, cfg);

    // rows a*(v, s) <= b with s the relaxation on the tracking row
    const double a1v = lg_v, a1s = -1.0;
    const double b1 = -cfg.clf_gain * V - lf_v;
    // hard row: lf2_b + lambda0*lf_b + lg_lf_b*v <= -lambda_k*psi1
    const double b2 = -cfg.lambda_k * bt.psi1 - cfg.lambda0 * bt.lf_b - bt.lf2_b;
    // a2 = (lg_lf_b, 0) = (-1, 0)

    const double p = cfg.relax_penalty;
    QpSolution sol;

    auto feasible1 = [&](double v, double s) { return a1v * v + a1s * s <= b1 + kKktTol; };
    auto feasible2 = [&](double v) { return -v <= b2 + kKktTol; };

    bool solved = false;
    // unconstrained optimum
    if (feasible1(0.0, 0.0) && feasible2(0.0)) {
        sol.v_par = 0.0;
        sol.relax = 0.0;
        solved = true;
    }
    // tracking row active
    if (!solved) {
        const double mu1 = -b1 / (a1v * a1v + 1.0 / (2.0 * p));
        const double v = -mu1 * a1v;
        const double s = mu1 / (2.0 * p);
        if (mu1 >= -kKktTol && feasible2(v)) {
            sol.v_par = v;
            sol.relax = s;
            sol.clf_active = true;
            solved = true;
        }
    }
    // barrier row active
    if (!solved) {
        const double v = -b2;
        const double mu2 = v;
        if (mu2 >= -kKktTol && feasible1(v, 0.0)) {
            sol.v_par = v;
            sol.relax = 0.0;
            sol.cbf_active = true;
            solved = true;
        }
    }
    // both active
    if (!solved) {
        const double v = -b2;
        const double s = a1v * v - b1;
        const double mu1 = 2.0 * p * s;
        const double mu2 = v + mu1 * a1v;
        if (mu1 >= -kKktTol && mu2 >= -kKktTol) {
            sol.v_par = v;
            sol.relax = s;
            sol.clf_active = true;
            sol.cbf_active = true;
            solved = true;
        }
    }
    if (!solved)
        throw std::logic_error("speed filter program has no KKT point; "
                               "active-set enumeration is inconsistent");
    // the relaxed tracking row and the hard barrier row must both hold
    if (!(feasible1(sol.v_par, sol.relax) && feasible2(sol.v_par)))
        throw std::logic_error("speed filter returned an infeasible point");
    return sol;
}

LocalControlResult kappa0(const ExtendedState& x, const Curve& curve,
                          const CarParams& p, const FiniteTimeGains& gains,
                          const BarrierConfig& barrier, const SpeedReference& ref,
                          double t, double delta_y, std::optional<double> hint) {
    LocalControlResult r;
    r.tfl = eval_tfl(x, curve, p, delta_y, hint);
    if (!(r.tfl.heading_alignment > 0.0))
        throw HeadingViolation("heading projects non-positively onto the path "
                               "direction (alignment = " +
                               std::to_string(r.tfl.heading_alignment) + ")");
    r.v_perp = kappa_xi(r.tfl.coords.xi, gains);
    const QpSolution qp = qp_filter(r.tfl.coords.eta, ref.eta2(t), ref.eta3(t),
                                    ref.eta3_rate(t), barrier);
    r.v_par = qp.v_par;
    r.relax = qp.relax;
    r.cbf_active = qp.cbf_active;
    r.u = kappa_fb(r.tfl, r.v_par, r.v_perp);
    return r;
}

}  // namespace pathinv
