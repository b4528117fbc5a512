#include <algorithm>
#include <cmath>
#include <random>

#include "diffcodec/complexity.hpp"
#include "doctest.h"

using namespace diffcodec;

TEST_CASE("ball volumes") {
    CHECK(std::exp2(ball_volume_log2(2, 1.5)) == doctest::Approx(kPi * 2.25).epsilon(1e-13));
    CHECK(std::exp2(ball_volume_log2(3, 2.0)) == doctest::Approx(4.0 / 3.0 * kPi * 8.0).epsilon(1e-13));
    CHECK(std::exp2(ball_volume_log2(1, 0.5)) == doctest::Approx(1.0).epsilon(1e-13));
}

TEST_CASE("ellipsoid body geometry") {
    CircleSpace s(64);
    const EllipsoidModel m(s, 1.0, 2.0, 4.0);
    CHECK(m.dim() == 9);
    // Cuts at M = 1 and M = 2; M = 4 has an empty tail.
    CHECK(m.lipschitz() == 3.0);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> G;
    for (int t = 0; t < 200; ++t) {
        Eigen::VectorXd c(9);
        for (auto& v : c) v = G(rng);
        CHECK(m.norm(c) >= c.norm());
        CHECK(m.norm(c) <= m.lipschitz() * c.norm() * (1 + 1e-15));
        // Sign flips of basis functions leave the body unchanged.
        Eigen::VectorXd flipped = c;
        flipped[t % 9] = -flipped[t % 9];
        CHECK(m.norm(flipped) == m.norm(c));
        // Hand evaluation: ‖c‖ + max(1·‖c_{λ>1}‖, 2·‖c_{λ>2}‖).
        const double hand = c.norm() + std::max(c.tail(6).norm(), 2.0 * c.tail(4).norm());
        CHECK(m.norm(c) == doctest::Approx(hand).epsilon(1e-14));
    }
    CHECK_THROWS_AS(EllipsoidModel(s, 1.0, 1.0, 13.0), DomainError);
    CHECK_THROWS_AS(EllipsoidModel(s, 0.0, 1.0, 4.0), DomainError);
}

TEST_CASE("covering estimates") {
    CircleSpace s(64);
    const double r = 1.0;
    const EllipsoidModel m(s, 1.0, r, 4.0);
    const BodySamples body = sample_body(m, 3000, 5);
    CHECK(body.points.size() == 3000);
    for (const auto& x : body.points) CHECK(m.contains(x));

    const CoveringEstimate whole = covering_estimate(m, r, body);
    CHECK(whole.lower_log2 == 0.0);
    CHECK(whole.upper_log2 == 0.0);
    CHECK_THROWS_AS(covering_estimate(m, 1.5 * r, body), DomainError);

    std::vector<double> x, y;
    CoveringEstimate prev = whole;
    for (int j = 1; j <= 5; ++j) {
        const CoveringEstimate c = covering_estimate(m, r * std::ldexp(1.0, -j), body);
        CAPTURE(j);
        CHECK(c.lower_log2 <= c.upper_log2);
        CHECK(c.packing <= c.net);
        CHECK(c.lower_log2 >= prev.lower_log2);
        CHECK(c.upper_log2 >= prev.upper_log2);
        prev = c;
        x.push_back(j);
        y.push_back(std::log2(c.midpoint()));
    }
    const double slope = fit_slope(x, y);
    CAPTURE(slope);
    CHECK(slope >= 0.65);
    CHECK(slope <= 1.35);

    // Reflecting one coordinate of every sample changes nothing.
    BodySamples flipped = body;
    for (auto& p : flipped.points) p[4] = -p[4];
    const CoveringEstimate a = covering_estimate(m, r / 8, body), b = covering_estimate(m, r / 8, flipped);
    CHECK(a.packing == b.packing);
    CHECK(a.net == b.net);
    CHECK(a.lower_log2 == b.lower_log2);
    CHECK(a.upper_log2 == b.upper_log2);

    // Same seed, same answer.
    const CoveringEstimate c1 = covering_estimate(m, r / 4, 500, 9), c2 = covering_estimate(m, r / 4, 500, 9);
    CHECK(c1.packing == c2.packing);
    CHECK(c1.volume_log2 == c2.volume_log2);
}

TEST_CASE("linear width curve") {
    CircleSpace s(600);
    const Filter f = standard_filter();
    const std::vector<double> grid{4, 8, 16, 32, 64};
    const WidthCurve c = linear_width_upper(s, f, 1.0, 1.0, 2.0, grid);
    CHECK(c.theory_slope == -1.0);
    CHECK(c.fit_slope <= c.theory_slope + 0.2);
    CHECK(c.constant < 5.0);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        CHECK(c.n[i] == static_cast<double>(s.count_upto(grid[i])));
        CHECK(c.value[i] <= c.constant * std::pow(c.n[i], c.theory_slope) * (1 + 1e-12));
    }

    const WidthCurve c2 = linear_width_upper(s, f, 1.0, 2.0, 2.0, grid);
    for (std::size_t i = 0; i < grid.size(); ++i) CHECK(c2.value[i] == doctest::Approx(2.0 * c.value[i]).epsilon(1e-12));

    const WidthCurve ci = linear_width_upper(s, f, 1.0, 1.0, INFINITY, grid);
    CHECK(ci.fit_slope <= ci.theory_slope + 0.2);

    // Band-limited members are reproduced once N reaches twice their band.
    std::vector<SpectralInput> fam;
    fam.push_back(std::get<SpectralInput>(basis_input(s, 5)));
    fam.push_back(power_family(s, 2.0, 4.0));
    fam.back().tail.reset();
    const WidthCurve z = linear_width_upper(s, f, 1.0, 1.0, 2.0, grid, &fam);
    CHECK(z.value[0] > 0.0);
    for (std::size_t i = 1; i < grid.size(); ++i) CHECK(z.value[i] == 0.0);
    CHECK_THROWS_AS(linear_width_upper(s, f, 1.0, 1.0, 1.0, grid), DomainError);
}

TEST_CASE("Bernstein ratios") {
    CircleSpace s(600);
    const Filter f = standard_filter();
    // φ_0: every E term vanishes.
    const SpectralInput one = std::get<SpectralInput>(basis_input(s, 0));
    for (double N : {4.0, 16.0}) CHECK(bernstein_ratio(s, f, 1.0, 2.0, N, one) == doctest::Approx(1.0 / N).epsilon(1e-14));
    // λ = 3: E(Π_1) = E(Π_2) = 1 and E(Π_M) = 0 for M ≥ 4, so the norm is
    // 1 + max(1·1, 2·1) = 3.
    const SpectralInput three = std::get<SpectralInput>(basis_input(s, 5));
    CHECK(bernstein_ratio(s, f, 1.0, 2.0, 8.0, three) == doctest::Approx(3.0 / 8.0).epsilon(1e-14));

    std::vector<double> c;
    for (double N : {4.0, 8.0, 16.0, 32.0, 64.0}) c.push_back(bernstein_width_lower(s, f, 1.0, 1.0, 2.0, N, 100));
    const double lo = *std::min_element(c.begin(), c.end()), hi = *std::max_element(c.begin(), c.end());
    // One constant C with every value in [0.75C, 1.25C].
    CHECK(hi / lo <= 1.25 / 0.75);

    CHECK(bernstein_width_lower(s, f, 1.0, 7.0, 2.0, 8.0, 100) == bernstein_width_lower(s, f, 1.0, 1.0, 2.0, 8.0, 100));
    CHECK_THROWS_AS(bernstein_width_lower(s, f, 1.0, 1.0, 2.0, 8.0, 50), DomainError);
}
