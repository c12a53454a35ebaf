#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>

#include "pathinv/tfl.hpp"
#include "pathinv/util.hpp"

using namespace pathinv;

namespace {

constexpr double kDeltaY = 0.2;

CarParams test_car() {
    CarParams p;
    p.length = 0.25;
    p.max_steering = kPi / 4.0;
    p.nominal_speed = 1.0;
    return p;
}

// Random state in the tube with forward alignment and healthy speed.
ExtendedState random_tube_state(std::mt19937_64& rng, const Curve& c) {
    const double lam = uniform(rng, 0.5, c.length() - 0.5);
    const FrenetFrame f = c.frame(lam);
    const Vec2 y = f.point + uniform(rng, -0.7, 0.7) * kDeltaY * f.normal;
    ExtendedState x;
    x.x1 = y.x();
    x.x2 = y.y();
    x.x3 = wrap_angle(std::atan2(f.tangent.y(), f.tangent.x()) + uniform(rng, -0.5, 0.5));
    x.x4 = uniform(rng, -0.6, 0.6);
    x.x5 = uniform(rng, -0.5, 0.8);
    x.x6 = uniform(rng, -0.5, 0.5);
    return x;
}

ExtendedState flow_to(const ExtendedState& x0, const CarParams& p, double t,
                      int substeps = 64) {
    ExtendedState x = x0;
    const double dt = t / substeps;
    for (int i = 0; i < substeps; ++i) x = rk4_step(x, AuxInput{0.0, 0.0}, p, dt);
    return x;
}

// Finite-difference derivative along the input-free flow of a quantity
// extracted from the state.
template <typename F>
double flow_fd(F&& quantity, const ExtendedState& x, const CarParams& p,
               double h = 1e-6) {
    const ExtendedState fwd = flow_to(x, p, h, 8);
    const ExtendedState bwd = flow_to(x, p, -h, 8);
    return (quantity(fwd) - quantity(bwd)) / (2.0 * h);
}

}  // namespace

TEST_SUITE_BEGIN("tfl");

TEST_CASE("virtual output on the unit circle") {
    const Curve c = Curve::circle(1.0);
    ExtendedState x{1.0, 0.0, kPi / 2, 0.0, 0.0, 0.0};
    auto [lam, level] = virtual_output(x, c, kDeltaY);
    CHECK(lam == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(level == doctest::Approx(0.0).epsilon(1e-12));

    x.x1 = 0.0;
    x.x2 = 1.1;
    auto [lam2, level2] = virtual_output(x, c, kDeltaY);
    CHECK(lam2 == doctest::Approx(kPi / 2));
    CHECK(level2 == doctest::Approx(0.21));
}

TEST_CASE("projection-parameter derivatives match finite differences") {
    // gradient, Hessian, and third derivatives of the projection parameter
    for (const Curve& c : {Curve::circle(1.0), Curve::sinusoid(1.0, 1.0, -2.0, 12.0)}) {
        std::mt19937_64 rng(31);
        for (int trial = 0; trial < 12; ++trial) {
            const double lam = uniform(rng, 0.5, c.length() - 0.5);
            const FrenetFrame f = c.frame(lam);
            const Vec2 y = f.point + uniform(rng, -0.6, 0.6) * kDeltaY * f.normal;
            const auto d = projection_derivs(c.project_full(y, kDeltaY));

            const double h = 1e-6;
            auto lam_at = [&](const Vec2& q) {
                return c.project(q, 10.0 * kDeltaY, d.value);
            };
            for (int i = 0; i < 2; ++i) {
                Vec2 e = Vec2::Zero();
                e(i) = h;
                const double fd = (lam_at(y + e) - lam_at(y - e)) / (2 * h);
                CHECK(d.grad(i) == doctest::Approx(fd).epsilon(1e-5));
                for (int j = 0; j < 2; ++j) {
                    Vec2 ej = Vec2::Zero();
                    ej(j) = h;
                    const auto da = projection_derivs(
                        c.project_full(y + ej, 10.0 * kDeltaY, d.value));
                    const auto db = projection_derivs(
                        c.project_full(y - ej, 10.0 * kDeltaY, d.value));
                    const double fd_h = (da.grad(i) - db.grad(i)) / (2 * h);
                    CHECK(d.hess(i, j) == doctest::Approx(fd_h).epsilon(2e-4).scale(1.0));
                    for (int k = 0; k < 2; ++k) {
                        const double fd_t = (da.hess(i, k) - db.hess(i, k)) / (2 * h);
                        CHECK(d.third_at(i, k, j) ==
                              doctest::Approx(fd_t).epsilon(2e-3).scale(1.0));
                    }
                }
            }
        }
    }
}

TEST_CASE("unit-circle input-coupling entries match their closed forms") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(37);
    for (int trial = 0; trial < 200; ++trial) {
        const ExtendedState x = random_tube_state(rng, c);
        const LieDerivs lie = lie_derivatives(x, c, p, kDeltaY);
        const double u = p.nominal_speed + x.x5;
        const double sec2 = std::tan(x.x4) * std::tan(x.x4) + 1.0;
        const double r2 = x.x1 * x.x1 + x.x2 * x.x2;
        const double c3 = std::cos(x.x3), s3 = std::sin(x.x3);

        const double g1a = 2.0 * x.x1 * c3 + 2.0 * x.x2 * s3;
        const double g2a = 2.0 * u * u * sec2 * (x.x2 * c3 - x.x1 * s3) / p.length;
        const double g1p = -(x.x2 * c3 - x.x1 * s3) / r2;
        const double g2p = u * u * sec2 * (x.x1 * c3 + x.x2 * s3) / (p.length * r2);

        CHECK(lie.g1_alpha[2] == doctest::Approx(g1a).epsilon(1e-10));
        CHECK(lie.g2_alpha[2] == doctest::Approx(g2a).epsilon(1e-10));
        CHECK(lie.g1_pi[2] == doctest::Approx(g1p).epsilon(1e-10));
        CHECK(lie.g2_pi[2] == doctest::Approx(g2p).epsilon(1e-10));
    }
}

TEST_CASE("specific input-coupling value at the top of the circle") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const ExtendedState x{1.0, 0.0, kPi / 2, 0.0, 0.0, 0.0};
    const LieDerivs lie = lie_derivatives(x, c, p, kDeltaY);
    // 2*x1*cos(x3) + 2*x2*sin(x3) = 0 at this pose
    CHECK(lie.g1_alpha[2] == doctest::Approx(0.0).epsilon(1e-14));
}

TEST_CASE("low-order input derivatives vanish identically") {
    const Curve c = Curve::sinusoid(1.0, 1.0, -2.0, 12.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(41);
    for (int trial = 0; trial < 100; ++trial) {
        const ExtendedState x = random_tube_state(rng, c);
        const LieDerivs lie = lie_derivatives(x, c, p, kDeltaY);
        for (int k = 0; k < 2; ++k) {
            CHECK(std::abs(lie.g1_pi[k]) < 1e-10);
            CHECK(std::abs(lie.g2_pi[k]) < 1e-10);
            CHECK(std::abs(lie.g1_alpha[k]) < 1e-10);
            CHECK(std::abs(lie.g2_alpha[k]) < 1e-10);
        }
    }
}

TEST_CASE("input derivatives verified by perturbing the input channels") {
    // finite-difference check that the stored g-entries really are the
    // sensitivities of the drift derivatives to the two input channels
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(43);
    const double h = 1e-6;
    for (int trial = 0; trial < 20; ++trial) {
        const ExtendedState x = random_tube_state(rng, c);
        auto lf2 = [&](const ExtendedState& s, bool of_pi) {
            const LieDerivs l = lie_derivatives(s, c, p, kDeltaY);
            return of_pi ? l.pi[2] : l.alpha[2];
        };
        for (bool of_pi : {true, false}) {
            ExtendedState xp = x, xm = x;
            xp.x6 += h;  // first input channel enters through x6
            xm.x6 -= h;
            const double fd1 = (lf2(xp, of_pi) - lf2(xm, of_pi)) / (2 * h);
            xp = x; xm = x;
            xp.x4 += h;  // second input channel enters through x4
            xm.x4 -= h;
            const double fd2 = (lf2(xp, of_pi) - lf2(xm, of_pi)) / (2 * h);
            const LieDerivs l = lie_derivatives(x, c, p, kDeltaY);
            CHECK((of_pi ? l.g1_pi[2] : l.g1_alpha[2]) ==
                  doctest::Approx(fd1).epsilon(1e-5));
            CHECK((of_pi ? l.g2_pi[2] : l.g2_alpha[2]) ==
                  doctest::Approx(fd2).epsilon(1e-5));
        }
    }
}

TEST_CASE("drift derivatives match flow finite differences") {
    for (const Curve& c : {Curve::circle(1.0), Curve::sinusoid(1.0, 1.0, -2.0, 12.0)}) {
        const CarParams p = test_car();
        std::mt19937_64 rng(47);
        for (int trial = 0; trial < 15; ++trial) {
            ExtendedState x = random_tube_state(rng, c);
            x.x5 = uniform(rng, -0.3, 0.5);  // keep the flow inside the tube
            const LieDerivs lie = lie_derivatives(x, c, p, kDeltaY);
            const double hint = lie.pi[0];

            auto alpha_of = [&](const ExtendedState& s) {
                return c.implicit(Vec2(s.x1, s.x2));
            };
            auto lf1a_of = [&](const ExtendedState& s) {
                return lie_derivatives(s, c, p, 2.0 * kDeltaY, hint).alpha[1];
            };
            auto lf2a_of = [&](const ExtendedState& s) {
                return lie_derivatives(s, c, p, 2.0 * kDeltaY, hint).alpha[2];
            };
            auto pi_of = [&](const ExtendedState& s) {
                return c.project(Vec2(s.x1, s.x2), 2.0 * kDeltaY, hint);
            };
            auto lf1p_of = [&](const ExtendedState& s) {
                return lie_derivatives(s, c, p, 2.0 * kDeltaY, hint).pi[1];
            };
            auto lf2p_of = [&](const ExtendedState& s) {
                return lie_derivatives(s, c, p, 2.0 * kDeltaY, hint).pi[2];
            };

            CHECK(lie.alpha[1] == doctest::Approx(flow_fd(alpha_of, x, p)).epsilon(1e-5));
            CHECK(lie.alpha[2] == doctest::Approx(flow_fd(lf1a_of, x, p)).epsilon(1e-4));
            CHECK(lie.alpha[3] ==
                  doctest::Approx(flow_fd(lf2a_of, x, p)).epsilon(1e-3).scale(1.0));
            CHECK(lie.pi[1] == doctest::Approx(flow_fd(pi_of, x, p)).epsilon(1e-5));
            CHECK(lie.pi[2] == doctest::Approx(flow_fd(lf1p_of, x, p)).epsilon(1e-4));
            CHECK(lie.pi[3] ==
                  doctest::Approx(flow_fd(lf2p_of, x, p)).epsilon(1e-3).scale(1.0));
        }
    }
}

TEST_CASE("determinant matches its closed form") {
    for (const Curve& c : {Curve::circle(1.0), Curve::sinusoid(1.0, 1.0, -2.0, 12.0)}) {
        const CarParams p = test_car();
        std::mt19937_64 rng(53);
        for (int trial = 0; trial < 200; ++trial) {
            const ExtendedState x = random_tube_state(rng, c);
            const VirtualOutputData out =
                virtual_output_derivs(Vec2(x.x1, x.x2), c, kDeltaY);
            const DecouplingMatrix D = decoupling_matrix(lie_derivatives(x, out, p));
            const double u = p.nominal_speed + x.x5;
            const double cross = out.pi.grad(0) * out.alpha.grad(1) -
                                 out.pi.grad(1) * out.alpha.grad(0);
            const double want =
                u * u / (p.length * std::cos(x.x4) * std::cos(x.x4)) * cross;
            CHECK(D.det == doctest::Approx(want).epsilon(1e-8));
        }
    }
}

TEST_CASE("decoupling degenerates when the speed offset cancels the nominal") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    ExtendedState x{1.05, 0.0, kPi / 2, 0.1, -p.nominal_speed, 0.0};
    const LieDerivs lie = lie_derivatives(x, c, p, kDeltaY);
    CHECK(lie.speed_singular);
    CHECK_THROWS_AS(decoupling_matrix(lie), Singularity);
}

TEST_CASE("on-path motion has zero transverse coordinates") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const ExtendedState x{1.0, 0.0, kPi / 2, std::atan(p.length), 0.0, 0.0};
    const TransverseCoords tc = to_transverse(x, c, p, kDeltaY);
    CHECK(tc.xi.norm() < 1e-12);
    CHECK(tc.eta(1) == doctest::Approx(1.0));
}

TEST_CASE("stationary states are rejected as singular") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const ExtendedState x{1.0, 0.0, kPi / 2, 0.0, -p.nominal_speed, 0.0};
    CHECK_THROWS_AS(to_transverse(x, c, p, kDeltaY), Singularity);
}

TEST_CASE("transverse coordinates chain correctly along the flow") {
    // eta2 = d(eta1)/dt, eta3 = d(eta2)/dt, same for xi, along input-free flow
    const Curve c = Curve::sinusoid(1.0, 1.0, -2.0, 12.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(59);
    for (int trial = 0; trial < 10; ++trial) {
        ExtendedState x = random_tube_state(rng, c);
        x.x5 = uniform(rng, -0.3, 0.5);
        const TransverseCoords tc = to_transverse(x, c, p, kDeltaY);
        const double hint = tc.eta(0);
        auto coords_of = [&](const ExtendedState& s) {
            return to_transverse(s, c, p, 2.0 * kDeltaY, hint);
        };
        for (int i : {0, 1}) {
            const double fd_eta = flow_fd(
                [&](const ExtendedState& s) { return coords_of(s).eta(i); }, x, p);
            const double fd_xi = flow_fd(
                [&](const ExtendedState& s) { return coords_of(s).xi(i); }, x, p);
            CHECK(tc.eta(i + 1) == doctest::Approx(fd_eta).epsilon(1e-4).scale(1.0));
            CHECK(tc.xi(i + 1) == doctest::Approx(fd_xi).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("on-path inverse worked example") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    const ExtendedState x = from_transverse_on_path(Vec3(0.0, 1.0, 0.0), c, p);
    CHECK(x.x1 == doctest::Approx(1.0));
    CHECK(x.x2 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x.x3 == doctest::Approx(kPi / 2));
    CHECK(x.x4 == doctest::Approx(std::atan(0.25)));
    CHECK(x.x5 == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(x.x6 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("straight path needs no steering on the inverse") {
    const Curve line = Curve::polynomial({0.0, 0.0}, -5.0, 5.0);
    const CarParams p = test_car();
    const ExtendedState x = from_transverse_on_path(Vec3(2.0, 1.0, 0.0), line, p);
    CHECK(x.x4 == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("on-path round trip") {
    for (const Curve& c : {Curve::circle(1.0), Curve::sinusoid(1.0, 1.0, -2.0, 12.0)}) {
        const CarParams p = test_car();
        std::mt19937_64 rng(61);
        for (int trial = 0; trial < 200; ++trial) {
            Vec3 eta;
            eta(0) = uniform(rng, 0.5, c.length() - 0.5);
            eta(1) = uniform(rng, 0.05, 2.0);
            eta(2) = uniform(rng, -1.0, 1.0);
            const ExtendedState x = from_transverse_on_path(eta, c, p);
            const TransverseCoords tc = to_transverse(x, c, p, kDeltaY);
            CHECK(std::abs(tc.eta(0) - eta(0)) < 1e-7);
            CHECK(std::abs(tc.eta(1) - eta(1)) < 1e-7);
            CHECK(std::abs(tc.eta(2) - eta(2)) < 1e-7);
            CHECK(tc.xi.norm() < 1e-7);
        }
    }
}

TEST_CASE("linearizing feedback cancels at matched auxiliary inputs") {
    const Curve c = Curve::circle(1.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(67);
    const ExtendedState x = random_tube_state(rng, c);
    const TflEval eval = eval_tfl(x, c, p, kDeltaY);
    const AuxInput u = kappa_fb(eval, eval.lie.pi[3], eval.lie.alpha[3]);
    CHECK(std::abs(u.u1) < 1e-9);
    CHECK(std::abs(u.u2) < 1e-9);
}

TEST_CASE("linearizing feedback drives the third-derivative chain") {
    // after the feedback, d(eta3)/dt == v_par and d(xi3)/dt == v_perp
    for (const Curve& c : {Curve::circle(1.0), Curve::sinusoid(1.0, 1.0, -2.0, 12.0)}) {
        const CarParams p = test_car();
        std::mt19937_64 rng(71);
        for (int trial = 0; trial < 8; ++trial) {
            ExtendedState x = random_tube_state(rng, c);
            x.x5 = uniform(rng, -0.3, 0.5);
            const double v_par = uniform(rng, -1.0, 1.0);
            const double v_perp = uniform(rng, -1.0, 1.0);
            const TflEval eval = eval_tfl(x, c, p, kDeltaY);
            const AuxInput u = kappa_fb(eval, v_par, v_perp);
            const double hint = eval.coords.eta(0);

            const double h = 1e-4;
            auto step_to = [&](double dt) {
                ExtendedState s = x;
                const int n = 8;
                for (int i = 0; i < n; ++i) s = rk4_step(s, u, p, dt / n);
                return to_transverse(s, c, p, 2.0 * kDeltaY, hint);
            };
            const TransverseCoords fwd = step_to(h), bwd = step_to(-h);
            const double fd_eta3 = (fwd.eta(2) - bwd.eta(2)) / (2 * h);
            const double fd_xi3 = (fwd.xi(2) - bwd.xi(2)) / (2 * h);
            CHECK(fd_eta3 == doctest::Approx(v_par).epsilon(1e-4).scale(1.0));
            CHECK(fd_xi3 == doctest::Approx(v_perp).epsilon(1e-4).scale(1.0));
        }
    }
}

TEST_CASE("coordinate-change jacobian stays nonsingular in the tube") {
    const Curve c = Curve::sinusoid(1.0, 1.0, -2.0, 12.0);
    const CarParams p = test_car();
    std::mt19937_64 rng(73);
    for (int trial = 0; trial < 20; ++trial) {
        ExtendedState x = random_tube_state(rng, c);
        x.x5 = uniform(rng, -0.3, 0.5);
        const double hint = c.project(Vec2(x.x1, x.x2), kDeltaY);
        const double h = 1e-6;
        Eigen::Matrix<double, 6, 6> J;
        auto coords = [&](const ExtendedState& s) {
            const TransverseCoords tc = to_transverse(s, c, p, 2.0 * kDeltaY, hint);
            Eigen::Matrix<double, 6, 1> v;
            v << tc.eta, tc.xi;
            return v;
        };
        for (int col = 0; col < 6; ++col) {
            ExtendedState xp = x, xm = x;
            double* fp = &xp.x1;
            double* fm = &xm.x1;
            fp[col] += h;
            fm[col] -= h;
            J.col(col) = (coords(xp) - coords(xm)) / (2 * h);
        }
        CHECK(std::abs(J.determinant()) > 1e-8);
    }
}

TEST_CASE("first-order output coupling of the unextended car is singular") {
    // with position outputs, the steering channel never reaches the outputs
    // at first order: the 2x2 coupling matrix has an exactly zero second row
    std::mt19937_64 rng(79);
    for (int trial = 0; trial < 50; ++trial) {
        const double x3 = uniform(rng, -kPi, kPi);
        Mat2 coupling;
        // rows: input channels (speed, steering rate); cols: outputs (x1, x2)
        coupling << std::cos(x3), std::sin(x3), 0.0, 0.0;
        CHECK(coupling(1, 0) == 0.0);
        CHECK(coupling(1, 1) == 0.0);
        CHECK(coupling.determinant() == 0.0);
    }
}

TEST_SUITE_END();
