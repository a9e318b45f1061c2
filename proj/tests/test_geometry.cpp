#include <doctest.h>

#include <cmath>
#include <random>

#include "neckflow/geometry.hpp"
#include "neckflow/preset.hpp"
#include "oracles.hpp"

using namespace neckflow;

namespace {

FlowState catenoid_state(double c, double a, double b, Index n) {
    PresetSpec spec;
    spec.kind = PresetKind::catenoid;
    spec.params["c"] = c;
    return preset_profile(spec, make_grid(a, b, n));
}

}  // namespace

TEST_CASE("cylinder geometry") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, 0, 1, 101);
    const GeometrySample g = geometry_sample(s);
    CHECK((g.v == 1.0).all());
    CHECK((g.p == 1.0).all());
    CHECK((g.k == 0.0).all());
    CHECK((g.q == 0.0).all());
    CHECK((g.H == 1.0).all());
    CHECK((g.A2 == 1.0).all());
}

TEST_CASE("cylinder sign convention: H = 1/r > 0") {
    const FlowState s = oracles::cylinder_state(0.5, 0.0, 0, 1, 51);
    const GeometrySample g = geometry_sample(s);
    CHECK(g.H[25] == doctest::Approx(2.0).epsilon(1e-13));
    CHECK((g.p > 0).all());
}

TEST_CASE("catenoid is a discrete minimal surface away from the ends") {
    const FlowState s = catenoid_state(1.0, -1, 1, 1001);
    const GeometrySample g = geometry_sample(s);
    // x = 0 row: y=1, v=1, p=1, k=-1, H=0.
    CHECK(g.y[500] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(g.v[500] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(g.p[500] == doctest::Approx(1.0).epsilon(1e-7));
    CHECK(g.k[500] == doctest::Approx(-1.0).epsilon(1e-6));
    CHECK(std::abs(g.H[500]) < 1e-6);

    // The two boundary nodes carry the mirror closure, which the catenoid
    // does not satisfy; every interior node is second-order accurate.
    const double maxH_interior = g.H.segment(1, g.H.size() - 2).abs().maxCoeff();
    CHECK(maxH_interior < 1e-4);
}

TEST_CASE("catenoid H converges at second order (interior)") {
    auto interior_maxH = [](Index n) {
        const GeometrySample g = geometry_sample(catenoid_state(1.0, -1, 1, n));
        return g.H.segment(1, g.H.size() - 2).abs().maxCoeff();
    };
    const double e1 = interior_maxH(251);
    const double e2 = interior_maxH(501);
    const double order = std::log2(e1 / e2);
    CHECK(order == doctest::Approx(2.0).epsilon(0.15));
}

TEST_CASE("derivatives: mirror ends and catenoid second derivative") {
    const FlowState s = catenoid_state(1.0, -1, 1, 1001);
    auto [dr, ddr] = derivatives(s);
    CHECK(dr[0] == 0.0);
    CHECK(dr[1000] == 0.0);
    double worst = 0;
    for (Index j = 1; j < 1000; ++j) {
        worst = std::max(worst, std::abs(ddr[j] - std::cosh(s.grid.nodes[j])));
    }
    CHECK(worst <= 5e-6);
}

TEST_CASE("synthetic point rho=2, rho'=1 matches the sum-of-squares identity") {
    // Linear profile: rho = 2 + (x - 1/2); interior nodes carry dr = 1 exactly.
    FlowState s;
    s.grid = make_grid(0, 1, 101);
    s.t = 0;
    s.rho = 2.0 + (s.grid.nodes - 0.5);
    const GeometrySample g = geometry_sample(s);
    const Index j = 50;  // x = 1/2, rho = 2
    CHECK(g.y[j] == doctest::Approx(2.0).epsilon(1e-15));
    CHECK(g.dr[j] == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(g.v[j] == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(g.p[j] == doctest::Approx(1.0 / (2 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(g.q[j] == doctest::Approx(-1.0 / (2 * std::sqrt(2.0))).epsilon(1e-12));
    CHECK(g.p[j] * g.p[j] + g.q[j] * g.q[j] == doctest::Approx(0.25).epsilon(1e-12));
}

TEST_CASE("pointwise identities on random admissible profiles") {
    std::mt19937_64 rng(2024);
    for (int it = 0; it < 50; ++it) {
        const auto prof = oracles::random_profile(rng);
        const FlowState s = oracles::profile_state(prof, 0, 2, 101);
        const GeometrySample g = geometry_sample(s);

        // p^2 + q^2 = 1/y^2, algebraic in (rho, rho').
        const double id = ((g.p.square() + g.q.square()) * g.y.square() - 1.0).abs().maxCoeff();
        CHECK(id < 1e-12);
        // H = k + p bitwise by construction; |A|^2 consistency.
        CHECK(((g.H - g.k - g.p).abs() == 0.0).all());
        CHECK((g.H.square() <= 2 * g.A2 * (1 + 1e-14)).all());
        // |q y| <= 1 and p y <= 1.
        CHECK(((g.q * g.y).abs() <= 1.0 + 1e-14).all());
        CHECK((g.v >= 1.0).all());
        CHECK((g.p > 0).all());
    }
}

TEST_CASE("geometry_sample rejects degenerate states") {
    FlowState s;
    s.grid = make_grid(0, 1, 11);
    s.t = 0;
    s.rho = Array::Constant(11, 1.0);
    s.rho[4] = -0.5;
    CHECK_THROWS_AS(geometry_sample(s), DegenerateStateError);
}

TEST_CASE("laplace_beltrami on the cylinder") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, 0, 1, 101);
    const GeometrySample g = geometry_sample(s);
    const Array lap = laplace_beltrami(s, g.y);
    CHECK(lap.abs().maxCoeff() < 1e-13);
    // Delta y - 1/y = -1 = -H/v on the unit cylinder.
    CHECK(((lap - g.y.inverse()) + 1.0).abs().maxCoeff() < 1e-13);
}

TEST_CASE("laplace_beltrami of a constant vanishes") {
    std::mt19937_64 rng(5);
    const auto prof = oracles::random_profile(rng);
    const FlowState s = oracles::profile_state(prof, 0, 1, 101);
    const Array f = Array::Constant(101, 3.25);
    CHECK(laplace_beltrami(s, f).abs().maxCoeff() < 1e-11);
}

TEST_CASE("laplace_beltrami length mismatch is an input error") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, 0, 1, 21);
    CHECK_THROWS_AS(laplace_beltrami(s, Array::Constant(20, 1.0)), InputError);
}

TEST_CASE("catenoid satisfies Delta y = 1/y away from the ends") {
    const FlowState s = catenoid_state(1.0, -1, 1, 1001);
    const Array lap = laplace_beltrami(s, s.rho);
    double worst = 0;
    for (Index j = 2; j < s.grid.n - 2; ++j) {
        worst = std::max(worst, std::abs(lap[j] - 1.0 / s.rho[j]));
    }
    CHECK(worst <= 1e-4);
}

TEST_CASE("spatial identity residual converges at second order") {
    std::mt19937_64 rng(99);
    for (int it = 0; it < 5; ++it) {
        const auto prof = oracles::random_profile(rng, 3);
        auto residual = [&](Index n) {
            const FlowState s = oracles::profile_state(prof, 0, 1, n);
            const GeometrySample g = geometry_sample(s);
            const Array r = laplace_beltrami(s, g.y) - g.y.inverse() + g.H / g.v;
            return r.abs().maxCoeff();
        };
        const double r1 = residual(201);
        const double r2 = residual(401);
        const double order = std::log2(r1 / r2);
        CHECK(order == doctest::Approx(2.0).epsilon(0.2));
    }
}
