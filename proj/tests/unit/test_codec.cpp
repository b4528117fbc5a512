#include <cmath>
#include <random>

#include "diffcodec/codec.hpp"
#include "diffcodec/kernels.hpp"
#include "doctest.h"

using namespace diffcodec;

namespace {

SpectralInput random_poly(const Space& s, double band, std::mt19937_64& rng) {
    std::normal_distribution<double> G;
    SpectralInput f;
    f.coeffs.resize(static_cast<Eigen::Index>(s.count_upto(band)));
    for (auto& v : f.coeffs) v = G(rng);
    return f;
}

double sup_on_dense(const Space& s, const Eigen::VectorXd& c) { return poly_lp_norm(s, c, INFINITY); }

}  // namespace

TEST_CASE("quantizer examples") {
    Eigen::VectorXd v(3);
    v << 0.30, -0.30, 0.0;
    const std::vector<std::int64_t> I = quantize(v, 4, 2);
    CHECK(I == std::vector<std::int64_t>{4, -5, 0});
    CHECK(quantizer_residual(v, I, 4, 2) <= 1.0);
    CHECK_THROWS_AS(quantize(v, 4, 1.0), DomainError);
    CHECK_THROWS_AS(quantize(v, 4, 2.0, 2.5), DomainError);
    Eigen::VectorXd bad(1);
    bad << std::nan("");
    CHECK_THROWS_AS(quantize(bad, 4, 2), DomainError);
    bad << 1e300;
    CHECK_THROWS_AS(quantize(bad, 4, 2), DomainError);
}

TEST_CASE("theoretical bit count") {
    CHECK(theoretical_bits({0, 0, 0}) == 0);
    // max |I| = 3: 7 symbols, 3 bits each.
    CHECK(theoretical_bits({1, -3, 2, 0}) == 12);
    CHECK(theoretical_bits({-4}) == 4);
}

TEST_CASE("zero function") {
    CircleSpace s(64);
    const Filter f = standard_filter();
    const QuadratureMeasure q = make_quadrature(s, 8);
    SpectralInput zero;
    zero.coeffs = Eigen::VectorXd::Zero(5);
    const EncodedFunction e = encode(s, f, zero, 8, 2, q, q);
    CHECK(e.header.count == q.support());
    for (std::int64_t v : e.payload) CHECK(v == 0);
    CHECK(e.payload_bits == 8 * q.support());
    NodeSetRegistry reg;
    const DiffusionPolynomial d = decode(e, s, f, reg);
    CHECK(d.coeffs.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("first eigenfunction on the circle") {
    CircleSpace s(64);
    const Filter f = standard_filter();
    const QuadratureMeasure q = make_quadrature(s, 8);
    const EncodedFunction e = encode(s, f, basis_input(s, 1), 8, 2, q, q);
    REQUIRE(e.payload.size() == q.support());
    int mismatches = 0;
    for (std::size_t i = 0; i < q.support(); ++i) {
        const double v = 64.0 * std::sqrt(2.0) * std::cos(q.nodes.points[i].u);
        const auto expect = static_cast<std::int64_t>(std::floor(v));
        // A value within rounding of an integer may land on either side.
        if (e.payload[i] != expect) {
            ++mismatches;
            CHECK(std::abs(v - std::round(v)) < 1e-12);
        }
    }
    CHECK(mismatches <= 1);
    CHECK(e.residual <= 1.0);
}

TEST_CASE("quantizer residual on every node") {
    const Filter f = standard_filter();
    std::mt19937_64 rng(8);
    for (const char* id : {"S1", "T2", "S2"}) {
        auto s = make_space(id, 80);
        for (double N : {4.0, 8.0, 16.0}) {
            const QuadratureMeasure q = make_quadrature(*s, N);
            for (double S : {1.5, 2.0, 3.0}) {
                const EncodedFunction e = encode(*s, f, random_poly(*s, 2 * N, rng), N, S, q, q);
                CHECK(e.residual >= 0.0);
                CHECK(e.residual <= 1.0);
            }
        }
    }
}

TEST_CASE("reconstruction error is bounded by the quantizer and the kernel mass") {
    const Filter f = standard_filter();
    std::mt19937_64 rng(11);
    for (const char* id : {"S1", "T2", "S2"}) {
        auto s = make_space(id, 80);
        for (double N : {4.0, 8.0}) {
            const QuadratureMeasure q = make_quadrature(*s, N);
            const SpectralInput g = random_poly(*s, N / 2, rng);
            const double S = 3.0;
            const EncodedFunction e = encode(*s, f, g, N, S, q, q);
            NodeSetRegistry reg;
            const DiffusionPolynomial rec = decode(e, *s, f, reg);
            // σ_N g = g, and each node contributes at most N^{−S}|K(x, y)||w_y|.
            const double mass = l1_mass_audit(KernelSpec{s.get(), &f, N, 2}, q);
            const double err = difference_lp_norm(*s, g, rec.coeffs, INFINITY);
            CAPTURE(id);
            CAPTURE(N);
            CHECK(err <= std::pow(N, -S) * (1.0 + mass));
            CHECK(err > 0.0);
        }
    }
}

TEST_CASE("streams, registry and determinism") {
    SphereSpace s(64);
    const Filter f = standard_filter();
    std::mt19937_64 rng(4);
    const QuadratureMeasure q = make_quadrature(s, 8);
    const SpectralInput g = random_poly(s, 12, rng);
    const EncodedFunction e = encode(s, f, g, 8, 2.5, q, q);
    const std::vector<std::uint8_t> bytes = serialize(e);
    const EncodedFunction back = deserialize(bytes);
    CHECK(back.payload == e.payload);
    CHECK(back.payload_bits == e.payload_bits);
    CHECK(serialize(encode(s, f, g, 8, 2.5, q, q)) == bytes);

    NodeSetRegistry reg;
    const DiffusionPolynomial d1 = decode(back, s, f, reg);
    const DiffusionPolynomial d2 = decode(e, s, f, reg);
    CHECK(d1.coeffs == d2.coeffs);
    CHECK(d1.band == 16.0);
    CHECK(static_cast<std::size_t>(d1.coeffs.size()) == s.count_below(16.0));

    // encode ∘ decode ∘ encode is reproducible.
    SpectralInput again{d1.coeffs, std::nullopt};
    CHECK(serialize(encode(s, f, again, 8, 2.5, q, q)) == serialize(encode(s, f, again, 8, 2.5, q, q)));

    EncodedFunction lost = back;
    lost.header.node_set ^= 0x5555;
    CHECK_THROWS_AS(decode(lost, s, f, reg), UnknownNodeSet);
    CircleSpace other(64);
    CHECK_THROWS_AS(decode(back, other, f, reg), DomainError);

    // A non-canonical node set resolves once registered.
    QuadratureMeasure custom = reference_quadrature(s, 40.0);
    const EncodedFunction ec = encode(s, f, g, 8, 2.5, custom, custom);
    CHECK_THROWS_AS(decode(ec, s, f, reg), UnknownNodeSet);
    reg.add(custom);
    CHECK_NOTHROW(decode(ec, s, f, reg));
}

TEST_CASE("sampled and spectral encodes agree for band-limited data") {
    TorusSpace s(64);
    const Filter f = standard_filter();
    std::mt19937_64 rng(6);
    const QuadratureMeasure q = make_quadrature(s, 8);
    const SpectralInput g = random_poly(s, 8, rng);
    const SampledInput smp{s.synthesize(g.coeffs, q.nodes), node_set_id(q)};
    const EncodedFunction a = encode(s, f, g, 8, 2, q, q), b = encode(s, f, smp, 8, 2, q, q);
    REQUIRE(a.payload.size() == b.payload.size());
    for (std::size_t i = 0; i < a.payload.size(); ++i) CHECK(std::abs(a.payload[i] - b.payload[i]) <= 1);

    const QuadratureMeasure coarse = make_quadrature(s, 2);
    const SampledInput low{Eigen::VectorXd::Zero(static_cast<Eigen::Index>(coarse.support())), node_set_id(coarse)};
    CHECK_THROWS_AS(encode(s, f, low, 8, 2, coarse, q), CertificationError);
    CHECK_THROWS_AS(encode(s, f, g, 8, 2, q, coarse), CertificationError);
    CHECK_THROWS_AS(encode(s, f, g, 8.5, 2, q, q), DomainError);
}

TEST_CASE("local mode restricts the payload to the ball") {
    SphereSpace s(64);
    const Filter f = standard_filter();
    std::mt19937_64 rng(3);
    const QuadratureMeasure q = make_quadrature(s, 8);
    const SpectralInput g = random_poly(s, 8, rng);
    const Ball b{{1.0, 2.0}, 0.6};
    const EncodedFunction e = encode(s, f, g, 8, 2, q, q, CodecMode::local, b);
    const std::size_t inside = nodes_in_ball(s, q, b).size();
    CHECK(e.header.count == inside);
    CHECK(inside < q.support());
    const EncodedFunction back = deserialize(serialize(e));
    REQUIRE(back.header.ball);
    CHECK(back.header.ball->radius == 0.6);
    NodeSetRegistry reg;
    CHECK(decode(back, s, f, reg).coeffs == decode(e, s, f, reg).coeffs);
    CHECK_THROWS_AS(encode(s, f, g, 8, 2, q, q, CodecMode::local), DomainError);
    CHECK_THROWS_AS(encode(s, f, g, 8, 2, q, q, CodecMode::local, Ball{{1.0, 2.0}, 1e-6}), DomainError);
}

TEST_CASE("cut-off profile") {
    CircleSpace s(32);
    const CutoffFunction c = make_cutoff(s, {1.0, 0.0}, 0.5, 1.5);
    CHECK(c.profile(0.25) == 1.0);
    CHECK(c.profile(0.5) == 1.0);
    CHECK(c.profile(1.5) == 0.0);
    CHECK(c.profile(3.0) == 0.0);
    CHECK(c.profile(1.0) == doctest::Approx(std::exp(-22.0 / 9.0)).epsilon(1e-12));
    CHECK(c({1.25, 0.0}) == 1.0);
    std::mt19937_64 rng(1);
    double prev = 1.0;
    for (int i = 0; i <= 200; ++i) {
        const double v = c.profile(0.5 + i / 200.0);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        CHECK(v <= prev);
        prev = v;
    }
    CHECK_THROWS_AS(make_cutoff(s, {1.0, 0.0}, 1.5, 0.5), DomainError);
    CHECK_THROWS_AS(make_cutoff(s, {1.0, 0.0}, 0.0, 0.5), DomainError);
    CHECK_THROWS_AS(make_cutoff(s, {1.0, 0.0}, 1.0, 3.5), DomainError);
    CHECK_THROWS_AS(make_cutoff(s, {7.0, 0.0}, 0.5, 1.0), DomainError);
    CHECK_NOTHROW(make_cutoff(s, {1.0, 0.0}, 4.0, 5.0));
}

TEST_CASE("global cut-off equals the global encode") {
    CircleSpace s(64);
    const Filter f = standard_filter();
    std::mt19937_64 rng(2);
    const QuadratureMeasure q = make_quadrature(s, 16);
    const SpectralInput g = random_poly(s, 20, rng);
    const CutoffFunction c = make_cutoff(s, {0.3, 0.0}, s.diameter(), s.diameter() + 1.0);
    const EncodedFunction a = encode_local_cutoff(s, f, g, c, 16, 2, q, q);
    const EncodedFunction b = encode(s, f, g, 16, 2, q, q);
    CHECK(a.payload == b.payload);
    NodeSetRegistry reg;
    CHECK(decode(a, s, f, reg).coeffs == decode(b, s, f, reg).coeffs);
}

TEST_CASE("cut-off encodes the cut-off itself") {
    const Filter f = standard_filter();
    for (const char* id : {"S1", "S2"}) {
        auto s = make_space(id, 300);
        const Point center{1.2, 0.4};
        const CutoffFunction c = make_cutoff(*s, center, 0.6, 1.4);
        QuadratureFamily fam(*s);
        std::vector<double> errs;
        for (double N : {8.0, 16.0, 32.0, 64.0}) {
            const QuadratureMeasure& q = fam.at(N);
            const CallbackInput one{[](const Point&) { return 1.0; }};
            const EncodedFunction e = encode_local_cutoff(*s, f, one, c, N, 3, q, q);
            CHECK(e.header.count <= nodes_in_ball(*s, q, {center, 1.4}).size());
            CHECK(e.residual <= 1.0);
            NodeSetRegistry reg;
            const DiffusionPolynomial rec = decode(e, *s, f, reg);
            Eigen::VectorXd shifted = rec.coeffs;
            shifted[0] -= 1.0;
            errs.push_back(ball_sup_norm(*s, shifted, {center, 0.6}));
        }
        CAPTURE(id);
        for (std::size_t i = 1; i < errs.size(); ++i) CHECK(errs[i] < errs[i - 1]);
        CHECK(errs.back() < 2e-3);
    }
}

TEST_CASE("ball sup norm") {
    CircleSpace s(32);
    Eigen::VectorXd c = Eigen::VectorXd::Zero(3);
    c[1] = 1.0;  // √2 cos θ
    CHECK(ball_sup_norm(s, c, {{0.0, 0.0}, 0.1}) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
    CHECK(ball_sup_norm(s, c, {{kPi / 2, 0.0}, 0.2}) == doctest::Approx(std::sqrt(2.0) * std::sin(0.2)).epsilon(0.05));
    CHECK(sup_on_dense(s, c) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-12));
}

TEST_CASE("rate sweep records") {
    CircleSpace s(600);
    const Filter f = standard_filter();
    QuadratureFamily fam(s);
    const SpectralInput g = power_family(s, l2_family_exponent(s, 1.0), 520);
    const std::vector<RateRecord> r = rate_sweep(s, f, g, {8, 16, 32, 64}, 2.0, fam);
    REQUIRE(r.size() == 4);
    for (std::size_t i = 0; i < r.size(); ++i) {
        CHECK(r[i].residual <= 1.0);
        CHECK(r[i].payload_bits >= 8 * fam.at(r[i].N).support());
        if (i > 0) CHECK(r[i].error_p2 < r[i - 1].error_p2);
    }
    const nlohmann::json j = to_json(r[0]);
    for (const char* k : {"N", "S", "error_p2", "error_inf", "payload_bits", "theoretical_bits"}) CHECK(j.contains(k));
}
