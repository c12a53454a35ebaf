#include "pathinv/tfl.hpp"

#include <cmath>
#include <string>

#include "pathinv/util.hpp"

namespace pathinv {

OutputDerivs projection_derivs(const ProjectionResult& proj) {
    // The projection parameter lambda(y) satisfies the orthogonality
    // condition g(lambda, y) = <y - sigma(lambda), sigma'(lambda)> = 0.
    // Differentiating it implicitly gives the derivatives below; everything
    // reduces to the Frenet data of the foot point and the normal offset,
    // using sigma' = T, sigma'' = kN, sigma''' = k'N - k^2 T and
    // sigma'''' = (k'' - k^3)N - 3kk'T for a unit-speed curve.
    const FrenetFrame& f = proj.frame;
    const double dn = proj.normal_offset;
    const double k = f.k, dk = f.dk, ddk = f.ddk;
    const double m = 1.0 - dn * k;

    const double g_ll = dn * dk;
    const double g_lll = k * k + dn * (ddk - k * k * k);
    const Vec2 g_ly = k * f.normal;                            // d/dlambda d/dy_i
    const Vec2 g_lly = dk * f.normal - k * k * f.tangent;      // d2/dlambda2 d/dy_i

    OutputDerivs d;
    d.value = f.lambda;
    d.grad = f.tangent / m;

    Mat2 lam2;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            lam2(i, j) = (g_ll * d.grad(i) * d.grad(j) + g_ly(j) * d.grad(i) +
                          g_ly(i) * d.grad(j)) /
                         m;
    d.hess = lam2;

    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int kk = 0; kk < 2; ++kk) {
                const double t =
                    (g_lll * d.grad(kk) + g_lly(kk)) * d.grad(i) * d.grad(j) +
                    g_ll * (d.grad(i) * lam2(j, kk) + d.grad(j) * lam2(i, kk) +
                            d.grad(kk) * lam2(i, j)) +
                    g_lly(i) * d.grad(j) * d.grad(kk) +
                    g_lly(j) * d.grad(i) * d.grad(kk) +
                    g_ly(i) * lam2(j, kk) + g_ly(j) * lam2(i, kk) +
                    g_ly(kk) * lam2(i, j);
                d.third[4 * i + 2 * j + kk] = t / m;
            }
    return d;
}

VirtualOutputData virtual_output_derivs(const Vec2& y, const Curve& curve,
                                        double delta_y, std::optional<double> hint) {
    VirtualOutputData out;
    out.foot = curve.project_full(y, delta_y, hint);
    out.pi = projection_derivs(out.foot);

    out.alpha.value = curve.implicit(y);
    out.alpha.grad = curve.implicit_gradient(y);
    out.alpha.hess = curve.implicit_hessian(y);
    const auto t3 = curve.implicit_third(y);  // {s_111, s_112, s_122, s_222}
    auto& th = out.alpha.third;
    th[0] = t3[0];
    th[1] = th[2] = th[4] = t3[1];
    th[3] = th[5] = th[6] = t3[2];
    th[7] = t3[3];
    return out;
}

std::pair<double, double> virtual_output(const ExtendedState& x, const Curve& curve,
                                         double delta_y) {
    const Vec2 y(x.x1, x.x2);
    const double lambda = curve.project(y, delta_y);
    return {lambda, curve.implicit(y)};
}

namespace {

// Lie derivatives of a position-only output c along the extended dynamics.
// With w the heading direction, u the forward speed, tau = tan(steering):
//   P = <grad c, w>, Pp = <grad c, w_perp>, Q = w'Hw, Qp = w'Hw_perp,
//   T3 = third tensor contracted three times with w.
struct ChainTerms {
    double P, Pp, Q, Qp, T3;
};

ChainTerms chain_terms(const OutputDerivs& c, double heading) {
    const Vec2 w(std::cos(heading), std::sin(heading));
    const Vec2 wp(-w.y(), w.x());
    ChainTerms t;
    t.P = c.grad.dot(w);
    t.Pp = c.grad.dot(wp);
    t.Q = w.dot(c.hess * w);
    t.Qp = w.dot(c.hess * wp);
    t.T3 = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int k = 0; k < 2; ++k)
                t.T3 += c.third_at(i, j, k) * w(i) * w(j) * w(k);
    return t;
}

void fill_lie(const ChainTerms& t, double value, double u, double x6, double tau,
              double cos4, double ell, std::array<double, 4>& lf,
              std::array<double, 3>& g1, std::array<double, 3>& g2) {
    const double u2 = u * u, u3 = u2 * u;
    lf[0] = value;
    lf[1] = u * t.P;
    lf[2] = x6 * t.P + u2 * t.Q + u2 / ell * tau * t.Pp;
    lf[3] = 3.0 * u * x6 * t.Q + 3.0 * u * x6 / ell * tau * t.Pp + u3 * t.T3 +
            3.0 * u3 / ell * tau * t.Qp - u3 * tau * tau / (ell * ell) * t.P;
    // The outputs depend on position only and their first drift derivatives
    // depend on (position, heading, speed offset); neither sees the input
    // channels, so the k in {0,1} entries vanish identically.
    g1[0] = g2[0] = 0.0;
    g1[1] = g2[1] = 0.0;
    g1[2] = t.P;
    g2[2] = u2 / (ell * cos4 * cos4) * t.Pp;
}

}  // namespace

LieDerivs lie_derivatives(const ExtendedState& x, const VirtualOutputData& out,
                          const CarParams& p) {
    const double u = p.nominal_speed + x.x5;
    const double tau = std::tan(x.x4);
    const double cos4 = std::cos(x.x4);
    LieDerivs lie;
    lie.speed_singular = std::abs(u) < kSpeedSingularTol;
    const ChainTerms tp = chain_terms(out.pi, x.x3);
    const ChainTerms ta = chain_terms(out.alpha, x.x3);
    fill_lie(tp, out.pi.value, u, x.x6, tau, cos4, p.length, lie.pi, lie.g1_pi,
             lie.g2_pi);
    fill_lie(ta, out.alpha.value, u, x.x6, tau, cos4, p.length, lie.alpha,
             lie.g1_alpha, lie.g2_alpha);
    return lie;
}

LieDerivs lie_derivatives(const ExtendedState& x, const Curve& curve,
                          const CarParams& p, double delta_y,
                          std::optional<double> hint) {
    const VirtualOutputData out =
        virtual_output_derivs(Vec2(x.x1, x.x2), curve, delta_y, hint);
    return lie_derivatives(x, out, p);
}

DecouplingMatrix decoupling_matrix(const LieDerivs& lie) {
    DecouplingMatrix d;
    d.m << lie.g1_pi[2], lie.g2_pi[2], lie.g1_alpha[2], lie.g2_alpha[2];
    d.det = d.m(0, 0) * d.m(1, 1) - d.m(0, 1) * d.m(1, 0);
    if (std::abs(d.det) < kDetSingularTol)
        throw Singularity("decoupling matrix is singular (det = " +
                          std::to_string(d.det) + ")");
    return d;
}

DecouplingMatrix decoupling_matrix(const ExtendedState& x, const Curve& curve,
                                   const CarParams& p, double delta_y) {
    return decoupling_matrix(lie_derivatives(x, curve, p, delta_y));
}

TflEval eval_tfl(const ExtendedState& x, const Curve& curve, const CarParams& p,
                 double delta_y, std::optional<double> hint) {
    TflEval e;
    e.out = virtual_output_derivs(Vec2(x.x1, x.x2), curve, delta_y, hint);
    e.lie = lie_derivatives(x, e.out, p);
    if (e.lie.speed_singular)
        throw Singularity("forward speed is zero; transverse coordinates degenerate");
    e.dec = decoupling_matrix(e.lie);
    e.coords.eta = Vec3(e.lie.pi[0], e.lie.pi[1], e.lie.pi[2]);
    e.coords.xi = Vec3(e.lie.alpha[0], e.lie.alpha[1], e.lie.alpha[2]);
    e.heading_alignment = e.out.pi.grad.dot(Vec2(std::cos(x.x3), std::sin(x.x3)));
    return e;
}

TransverseCoords to_transverse(const ExtendedState& x, const Curve& curve,
                               const CarParams& p, double delta_y,
                               std::optional<double> hint) {
    const VirtualOutputData out =
        virtual_output_derivs(Vec2(x.x1, x.x2), curve, delta_y, hint);
    const LieDerivs lie = lie_derivatives(x, out, p);
    if (lie.speed_singular)
        throw Singularity("forward speed is zero; transverse coordinates degenerate");
    TransverseCoords c;
    c.eta = Vec3(lie.pi[0], lie.pi[1], lie.pi[2]);
    c.xi = Vec3(lie.alpha[0], lie.alpha[1], lie.alpha[2]);
    return c;
}

ExtendedState from_transverse_on_path(const Vec3& eta, const Curve& curve,
                                      const CarParams& p) {
    const FrenetFrame f = curve.frame(eta(0));
    ExtendedState x;
    x.x1 = f.point.x();
    x.x2 = f.point.y();
    x.x3 = std::atan2(f.tangent.y(), f.tangent.x());
    x.x4 = std::atan(p.length * f.k);
    x.x5 = eta(1) - p.nominal_speed;
    x.x6 = eta(2);
    return x;
}

AuxInput kappa_fb(const TflEval& eval, double v_par, double v_perp) {
    const double r1 = -eval.lie.pi[3] + v_par;
    const double r2 = -eval.lie.alpha[3] + v_perp;
    const Mat2& d = eval.dec.m;
    const double det = eval.dec.det;
    AuxInput u;
    u.u1 = (d(1, 1) * r1 - d(0, 1) * r2) / det;
    u.u2 = (-d(1, 0) * r1 + d(0, 0) * r2) / det;
    return u;
}

AuxInput kappa_fb(const ExtendedState& x, const Curve& curve, const CarParams& p,
                  double delta_y, double v_par, double v_perp,
                  std::optional<double> hint) {
    return kappa_fb(eval_tfl(x, curve, p, delta_y, hint), v_par, v_perp);
}

}  // namespace pathinv
