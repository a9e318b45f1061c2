#include <doctest.h>

#include <cmath>

#include "neckflow/singularity.hpp"
#include "neckflow/preset.hpp"
#include "oracles.hpp"

using namespace neckflow;

TEST_CASE("extinction fit on exact cylinder samples") {
    const Trajectory traj = oracles::cylinder_trajectory(1.0, {0.1, 0.2, 0.3, 0.4});
    const auto fit = estimate_extinction(traj);
    REQUIRE(fit.has_value());
    CHECK(fit->T_est == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(fit->slope == doctest::Approx(-2.0).epsilon(1e-12));
    CHECK(fit->r2 == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(fit->uncertainty < 1e-10);
}

TEST_CASE("extinction fit flags synthetic curvature-quadratic data") {
    std::vector<Scalar> times;
    for (int i = 0; i <= 40; ++i) times.push_back(0.999 * i / 40.0);
    const Trajectory traj = oracles::type_II_trajectory(1.0, times);
    const auto fit = estimate_extinction(traj);
    REQUIRE(fit.has_value());
    CHECK(fit->poor_linearity());
    CHECK(fit->uncertainty > 1e-4);
}

TEST_CASE("extinction fit is not applicable without a pinch") {
    Trajectory traj = oracles::cylinder_trajectory(1.0, {0.1, 0.2, 0.3});
    traj.events.clear();  // no pinch recorded
    CHECK(!estimate_extinction(traj).has_value());
}

TEST_CASE("rescaling sequence on the exact cylinder") {
    std::vector<Scalar> times;
    for (int i = 0; i <= 200; ++i) times.push_back(0.4999 * i / 200.0);
    const Trajectory traj = oracles::cylinder_trajectory(1.0, times);
    const auto pts = rescaling_sequence(traj, 0.5, 6);
    REQUIRE(pts.size() >= 3);
    for (size_t i = 0; i < pts.size(); ++i) {
        CHECK(pts[i].alpha ==
              doctest::Approx(1.0 / std::sqrt(1.0 - 2 * pts[i].t)).epsilon(1e-10));
        if (i > 0) {
            CHECK(pts[i].t > pts[i - 1].t);
            CHECK(pts[i].alpha >= pts[i - 1].alpha);
        }
    }
}

TEST_CASE("rescaling sequence reports insufficient resolution") {
    const Trajectory traj = oracles::cylinder_trajectory(1.0, {0.1, 0.4});
    CHECK(rescaling_sequence(traj, 0.5, 8).empty());
}

TEST_CASE("rescale_profile scaling identities") {
    // Cylinder of radius 1/2 zoomed by its own curvature |A| = 2.
    const FlowState s = oracles::cylinder_state(0.5, 0.0, -1, 1, 201);
    const FlowState rs = rescale_profile(s, 0.0, 2.0, 4.0);
    CHECK((rs.rho - 1.0).abs().maxCoeff() < 1e-14);
    const GeometrySample g = geometry_sample(rs);
    CHECK((g.A2 - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(rs.t == 0.0);

    // alpha = 1, center = 0 is the identity on the window.
    const FlowState id = rescale_profile(s, 0.0, 1.0, 10.0);
    CHECK(id.grid.n == s.grid.n);
    CHECK((id.rho - s.rho).abs().maxCoeff() == 0.0);
}

TEST_CASE("rescaled curvatures scale as |A|/alpha at interior nodes") {
    std::mt19937_64 rng(31);
    for (int it = 0; it < 20; ++it) {
        const auto prof = oracles::random_profile(rng);
        const FlowState s = oracles::profile_state(prof, 0, 2, 201);
        const GeometrySample g0 = geometry_sample(s);
        const double alpha = 0.5 + 3.0 * (it % 5);
        const double center = 1.0;
        const FlowState rs = rescale_profile(s, center, alpha, 1e9);
        REQUIRE(rs.grid.n == s.grid.n);
        const GeometrySample g1 = geometry_sample(rs);
        for (Index j = 1; j < s.grid.n - 1; ++j) {
            CHECK(std::sqrt(g1.A2[j]) ==
                  doctest::Approx(std::sqrt(g0.A2[j]) / alpha).epsilon(1e-9));
            CHECK(std::abs(g1.H[j] - g0.H[j] / alpha) <
                  1e-9 * (1.0 + std::abs(g0.H[j]) / alpha));
        }
    }
}

TEST_CASE("rescale_profile rejects empty windows") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, 0, 1, 101);
    CHECK_THROWS_AS(rescale_profile(s, 0.5, 1e6, 1.0), InputError);
    CHECK_THROWS_AS(rescale_profile(s, 5.0, 1.0, 1.0), InputError);
}

TEST_CASE("compare_to_cylinder") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, -3, 3, 601);
    const FlowState rs = rescale_profile(s, 0.0, 1.0, 4.0);
    CHECK(compare_to_cylinder(rs, 2.0).sup_abs < 1e-14);

    PresetSpec cat;
    cat.kind = PresetKind::catenoid;
    cat.params["c"] = 1.0;
    const FlowState cs = preset_profile(cat, make_grid(-3, 3, 601));
    const FlowState crs = rescale_profile(cs, 0.0, 1.0, 4.0);
    const auto dev = compare_to_cylinder(crs, 2.0);
    CHECK(dev.sup_abs == doctest::Approx(std::cosh(2.0) - 1.0).epsilon(1e-10));
    CHECK(dev.sup_abs == doctest::Approx(2.7622).epsilon(1e-4));
    CHECK(!dev.clipped);

    // Window wider than the data is clipped and flagged.
    const auto clipped = compare_to_cylinder(crs, 10.0);
    CHECK(clipped.clipped);
    CHECK(clipped.window_used <= 4.0 + 1e-12);
}

TEST_CASE("compare_to_catenoid recovers the exact catenoid") {
    PresetSpec cat;
    cat.kind = PresetKind::catenoid;
    cat.params["c"] = 1.0;
    const FlowState cs = preset_profile(cat, make_grid(-2, 2, 401));
    const auto fit = compare_to_catenoid(cs);
    CHECK(fit.converged);
    CHECK(fit.c == doctest::Approx(1.0).epsilon(1e-6));
    CHECK(fit.rms_residual < 1e-8);
    // yv growth at the window edge: cosh^2(2) = (cosh(4) + 1)/2.
    CHECK(fit.yv_growth == doctest::Approx((std::cosh(4.0) + 1) / 2).epsilon(1e-6));
}

TEST_CASE("yv diagnostic identity at x=1 for the unit catenoid") {
    PresetSpec cat;
    cat.kind = PresetKind::catenoid;
    cat.params["c"] = 1.0;
    const FlowState cs = preset_profile(cat, make_grid(-1, 1, 401));
    const auto fit = compare_to_catenoid(cs);
    CHECK(fit.yv_growth == doctest::Approx((std::cosh(2.0) + 1) / 2).epsilon(1e-6));
    CHECK(fit.yv_growth == doctest::Approx(2.381).epsilon(1e-3));
}

TEST_CASE("no catenoid fits the cylinder") {
    const FlowState s = oracles::cylinder_state(1.0, 0.0, -2, 2, 401);
    const auto fit = compare_to_catenoid(s);
    CHECK(fit.rms_residual >= 0.1);

    // Independent scan oracle: the misfit really is bounded away from zero.
    double best = 1e9;
    for (int i = 0; i <= 600; ++i) {
        const double c = 1e-3 * std::pow(1e6, i / 600.0);
        double ss = 0;
        for (Index j = 0; j < s.grid.n; ++j) {
            const double d = c * std::cosh(s.grid.nodes[j] / c) - 1.0;
            ss += d * d;
        }
        best = std::min(best, std::sqrt(ss / s.grid.n));
    }
    CHECK(best >= 0.1);
    CHECK(fit.rms_residual <= best * 1.05 + 1e-12);
}

TEST_CASE("classify the exact cylinder as type I with rate 1/2") {
    std::vector<Scalar> times;
    for (int i = 0; i <= 400; ++i) times.push_back(0.49995 * i / 400.0);
    const Trajectory traj = oracles::cylinder_trajectory(1.0, times, 201);
    const auto fit = estimate_extinction(traj);
    REQUIRE(fit.has_value());
    const SingularityReport rep = classify(traj, fit);
    CHECK(rep.verdict == TypeVerdict::type_I);
    CHECK(rep.rate_constant == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.rate_tail == doctest::Approx(0.5).epsilon(1e-6));
    CHECK(rep.ratio_bound == doctest::Approx(1.0).epsilon(1e-10));
}

TEST_CASE("classify synthetic faster-than-type-I data as type II") {
    std::vector<Scalar> times;
    // Dense geometric tail mimicking a real snapshot cadence near the pinch.
    for (int i = 0; i <= 60; ++i) times.push_back(0.9 * i / 60.0);
    for (int i = 1; i <= 40; ++i) times.push_back(1.0 - 0.1 * std::pow(0.8, i));
    std::sort(times.begin(), times.end());
    const Trajectory traj = oracles::type_II_trajectory(1.0, times);
    const auto fit = estimate_extinction(traj);
    REQUIRE(fit.has_value());
    const SingularityReport rep = classify(traj, fit);
    CHECK(rep.verdict == TypeVerdict::type_II);
}

TEST_CASE("classify without a pinch returns no_singularity") {
    Trajectory traj = oracles::cylinder_trajectory(1.0, {0.0, 0.1, 0.2});
    traj.events.clear();
    const SingularityReport rep = classify(traj, std::nullopt);
    CHECK(rep.verdict == TypeVerdict::no_singularity);
}

TEST_CASE("cylinder: rescaling the exact solution by its own |A| is the unit cylinder") {
    for (double t : {0.1, 0.3, 0.45}) {
        const double r = oracles::cylinder_radius(1.0, t);
        const FlowState s = oracles::cylinder_state(1.0, t, -1, 1, 401);
        const FlowState rs = rescale_profile(s, 0.0, 1.0 / r, 4.0);
        CHECK((rs.rho - 1.0).abs().maxCoeff() < 1e-12);
    }
}
