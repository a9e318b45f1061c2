#include <doctest.h>

#include <cmath>
#include <random>

#include "neckflow/preset.hpp"
#include "neckflow/geometry.hpp"
#include "oracles.hpp"

using namespace neckflow;

TEST_CASE("make_grid produces uniform nodes") {
    const ProfileGrid g = make_grid(0, 1, 401);
    CHECK(g.h == doctest::Approx(0.0025).epsilon(1e-15));
    CHECK(g.nodes[0] == 0.0);
    CHECK(g.nodes[400] == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(g.nodes[160] == doctest::Approx(0.4).epsilon(1e-15));

    const ProfileGrid g2 = make_grid(1, 2, 5);
    CHECK(g2.nodes[0] == 1.0);
    CHECK(g2.nodes[1] == 1.25);
    CHECK(g2.nodes[2] == 1.5);
    CHECK(g2.nodes[3] == 1.75);
    CHECK(g2.nodes[4] == 2.0);
}

TEST_CASE("make_grid rejects bad arguments") {
    CHECK_THROWS_AS(make_grid(0, 1, 4), ConfigError);
    CHECK_THROWS_AS(make_grid(1, 1, 11), ConfigError);
    CHECK_THROWS_AS(make_grid(2, 1, 11), ConfigError);
}

TEST_CASE("grid nodes strictly increasing") {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ab(-3, 3);
    for (int it = 0; it < 50; ++it) {
        double a = ab(rng), b = ab(rng);
        if (a > b) std::swap(a, b);
        if (b - a < 1e-3) continue;
        const ProfileGrid g = make_grid(a, b, 5 + (it % 40));
        for (Index j = 1; j < g.n; ++j) CHECK(g.nodes[j] > g.nodes[j - 1]);
    }
}

TEST_CASE("cylinder preset") {
    PresetSpec spec;
    spec.kind = PresetKind::cylinder;
    spec.params["r"] = 1.0;
    const FlowState s = preset_profile(spec, make_grid(0, 1, 401));
    CHECK((s.rho == 1.0).all());
    CHECK(s.t == 0.0);
}

TEST_CASE("cosine_neck preset endpoints") {
    PresetSpec spec;
    spec.kind = PresetKind::cosine_neck;
    spec.params["m"] = 0.6;
    spec.params["A"] = 0.4;
    spec.params["w"] = 1;
    const FlowState s = preset_profile(spec, make_grid(0, 1, 401));
    CHECK(s.rho[0] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.rho[400] == doctest::Approx(0.2).epsilon(1e-12));

    // Integer mode counts satisfy the even mirror condition exactly.
    auto [dr, ddr] = derivatives(s);
    CHECK(dr[0] == 0.0);
    CHECK(dr[400] == 0.0);
}

TEST_CASE("cosine_neck preset rejects non-positive profiles") {
    PresetSpec spec;
    spec.kind = PresetKind::cosine_neck;
    spec.params["m"] = 0.4;
    spec.params["A"] = 0.6;
    spec.params["w"] = 1;
    CHECK_THROWS_AS(preset_profile(spec, make_grid(0, 1, 101)), ConfigError);
}

TEST_CASE("catenoid preset values") {
    PresetSpec spec;
    spec.kind = PresetKind::catenoid;
    spec.params["c"] = 1.0;
    const FlowState s = preset_profile(spec, make_grid(-1, 1, 201));
    CHECK(s.rho[100] == doctest::Approx(1.0).epsilon(1e-14));
    CHECK(s.rho[0] == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
    CHECK(s.rho[200] == doctest::Approx(std::cosh(1.0)).epsilon(1e-14));
}

TEST_CASE("table preset must match the grid") {
    PresetSpec spec;
    spec.kind = PresetKind::table;
    spec.table = Array::Constant(11, 1.0);
    CHECK_NOTHROW(preset_profile(spec, make_grid(0, 1, 11)));
    CHECK_THROWS_AS(preset_profile(spec, make_grid(0, 1, 12)), ConfigError);

    spec.table_x = Array::LinSpaced(11, 0.0, 1.0);
    CHECK_NOTHROW(preset_profile(spec, make_grid(0, 1, 11)));
    (*spec.table_x)[3] += 0.01;  // more than h/100 off the node
    CHECK_THROWS_AS(preset_profile(spec, make_grid(0, 1, 11)), ConfigError);
}

TEST_CASE("resample of a constant is exact") {
    PresetSpec spec;
    spec.kind = PresetKind::cylinder;
    spec.params["r"] = 1.0;
    const FlowState s = preset_profile(spec, make_grid(0, 1, 101));
    const FlowState fine = resample(s, 201);
    CHECK(fine.grid.n == 201);
    CHECK((fine.rho == 1.0).all());
    CHECK(fine.t == s.t);
}

TEST_CASE("resample to the same node count is the identity") {
    PresetSpec spec;
    spec.kind = PresetKind::cosine_neck;
    spec.params["m"] = 0.6;
    spec.params["A"] = 0.4;
    spec.params["w"] = 1;
    const FlowState s = preset_profile(spec, make_grid(0, 1, 101));
    const FlowState same = resample(s, 101);
    for (Index j = 0; j < s.grid.n; ++j) CHECK(same.rho[j] == s.rho[j]);
}

TEST_CASE("resample rejects coarsening") {
    PresetSpec spec;
    spec.kind = PresetKind::cylinder;
    spec.params["r"] = 1.0;
    const FlowState s = preset_profile(spec, make_grid(0, 1, 101));
    CHECK_THROWS_AS(resample(s, 51), ConfigError);
}

TEST_CASE("resample converges at fourth order on the cosine preset") {
    PresetSpec spec;
    spec.kind = PresetKind::cosine_neck;
    spec.params["m"] = 0.6;
    spec.params["A"] = 0.4;
    spec.params["w"] = 1;

    auto deviation = [&](Index n_coarse, Index n_fine) {
        const FlowState coarse = preset_profile(spec, make_grid(0, 1, n_coarse));
        const FlowState interp = resample(coarse, n_fine);
        const FlowState exact = preset_profile(spec, make_grid(0, 1, n_fine));
        return (interp.rho - exact.rho).abs().maxCoeff();
    };

    const double dev101 = deviation(101, 401);
    const double dev201 = deviation(201, 801);
    const double h101 = 1.0 / 100;

    // Report the constant in err <= C h^4 and check the order.
    const double C = dev101 / std::pow(h101, 4);
    INFO("interpolation constant C = ", C);
    CHECK(dev101 <= 10.0 * std::pow(h101, 4));
    const double order = std::log2(dev101 / dev201);
    CHECK(order > 3.5);
}

TEST_CASE("resampled states stay positive") {
    std::mt19937_64 rng(42);
    for (int it = 0; it < 30; ++it) {
        const auto prof = oracles::random_profile(rng);
        const FlowState s = oracles::profile_state(prof, 0, 1, 51);
        const FlowState fine = resample(s, 51 + 17 * (it % 5 + 1));
        CHECK((fine.rho > 0).all());
    }
}
