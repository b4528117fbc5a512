#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "diffcodec/codec.hpp"
#include "diffcodec/datamanifold.hpp"
#include "doctest.h"

using namespace diffcodec;

namespace {

std::string temp_path(const std::string& name) {
    return (std::filesystem::temp_directory_path() / ("diffcodec_test_" + name)).string();
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream out(path);
    out << text;
}

PointCloud circle_cloud(int M) {
    PointCloud c;
    c.points.resize(M, 2);
    for (int i = 0; i < M; ++i) {
        c.points(i, 0) = std::cos(2 * kPi * i / M);
        c.points(i, 1) = std::sin(2 * kPi * i / M);
    }
    return c;
}

PointCloud sphere_cloud(int M) {
    // Fibonacci lattice.
    PointCloud c;
    c.points.resize(M, 3);
    const double golden = kPi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < M; ++i) {
        const double z = 1.0 - (2.0 * i + 1.0) / M;
        const double r = std::sqrt(1.0 - z * z);
        c.points(i, 0) = r * std::cos(golden * i);
        c.points(i, 1) = r * std::sin(golden * i);
        c.points(i, 2) = z;
    }
    return c;
}

double circle_spacing(int M) { return 2.0 * std::sin(kPi / M); }

}  // namespace

TEST_CASE("csv ingestion") {
    const std::string p = temp_path("cloud.csv");
    std::string text;
    for (int i = 0; i < 200; ++i) text += std::to_string(std::cos(0.1 * i)) + ", " + std::to_string(std::sin(0.1 * i)) + "\n";
    write_file(p, text + "\n");
    const PointCloud c = ingest_csv(p);
    CHECK(c.size() == 200);
    CHECK(c.dim() == 2);
    CHECK(c.source == p);

    write_file(p, "");
    CHECK_THROWS_WITH_AS(ingest_csv(p), "no data rows", DomainError);

    write_file(p, "1,2\n3,4\n5,abc\n");
    try {
        ingest_csv(p);
        FAIL("expected a parse error");
    } catch (const ParseError& e) {
        CHECK(e.line() == 3);
        CHECK(e.column() == 2);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }

    write_file(p, "1,2\n3,4,5\n6,7\n");
    CHECK_THROWS_AS(ingest_csv(p), ParseError);
    write_file(p, "1,2\n3,4\n");
    CHECK_THROWS_AS(ingest_csv(p), DomainError);
    write_file(p, "1,2\n3,4\n1,2\n");
    CHECK_THROWS_AS(ingest_csv(p), DomainError);
    write_file(p, "1,2\n3,\n5,6\n");
    CHECK_THROWS_AS(ingest_csv(p), ParseError);
    std::filesystem::remove(p);
    CHECK_THROWS(ingest_csv(p));
}

TEST_CASE("equispaced circle spectrum matches the circulant oracle") {
    const int M = 200;
    const double bw = 2.0 * circle_spacing(M);
    const GraphSpace gs = build_graph_space(circle_cloud(M), {bw, static_cast<std::size_t>(M)});

    // W is circulant, so the balanced matrix is W / (row sum) and its
    // eigenvalues are the normalized discrete Fourier transform of a row.
    std::vector<double> w(M);
    double total = 0.0;
    for (int j = 0; j < M; ++j) {
        const double chord = 2.0 * std::sin(kPi * j / M);
        w[j] = std::exp(-chord * chord / (bw * bw));
        total += w[j];
    }
    std::vector<double> oracle;
    for (int m = 0; m < M; ++m) {
        double acc = 0.0;
        for (int j = 0; j < M; ++j) acc += w[j] * std::cos(2 * kPi * m * j / M);
        oracle.push_back(std::sqrt(std::max(0.0, 1.0 - acc / total)));
    }
    std::sort(oracle.begin(), oracle.end());
    for (int k = 1; k < M; ++k) CHECK(gs.lambda(k) == doctest::Approx(oracle[k]).epsilon(1e-9));

    CHECK(gs.lambda(0) == 0.0);
    CHECK(std::abs(gs.lambda(1) - gs.lambda(2)) / gs.lambda(1) < 0.05);
    CHECK_FALSE(gs.disconnected());
    CHECK(gs.spectrum_complete());
    CHECK(gs.count_upto(1e6) == static_cast<std::size_t>(M));
    CHECK(gs.id() == "graph");
}

TEST_CASE("eigenvectors are orthonormal under the uniform measure") {
    const GraphSpace gs = build_graph_space(sphere_cloud(300), {0.3, 120});
    const Eigen::MatrixXd& Phi = gs.eigenvectors();
    CHECK((Phi.col(0).array() == 1.0).all());
    const Eigen::MatrixXd G = Phi.transpose() * Phi / 300.0;
    CHECK((G - Eigen::MatrixXd::Identity(120, 120)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(gs.dimension() == 120);
    CHECK_FALSE(gs.spectrum_complete());
    CHECK_THROWS_AS(gs.count_upto(gs.lambda_cap() * 2), SpectrumExhausted);
}

TEST_CASE("alpha estimates") {
    const GraphSpace c = build_graph_space(circle_cloud(200), {2.0 * circle_spacing(200), 200});
    const double a1 = estimate_alpha(c);
    CHECK(a1 >= 0.8);
    CHECK(a1 <= 1.2);
    CHECK(c.alpha_estimated());
    CHECK(c.alpha() == a1);

    const int M = 800;
    const GraphSpace s = build_graph_space(sphere_cloud(M), {std::sqrt(4.0 * kPi / M), static_cast<std::size_t>(M)});
    const double a2 = estimate_alpha(s);
    CAPTURE(a2);
    CHECK(a2 >= 1.6);
    CHECK(a2 <= 2.4);

    // Every nonzero eigenvalue equal: no usable grid.
    const int n = 30;
    Eigen::VectorXd lam = Eigen::VectorXd::Ones(n);
    lam[0] = 0.0;
    const GraphSpace flat(circle_cloud(n).points, lam, Eigen::MatrixXd::Identity(n, n) * std::sqrt(double(n)));
    CHECK_THROWS_AS(estimate_alpha(flat), DomainError);
    CHECK_FALSE(flat.alpha_estimated());
    CHECK(flat.alpha() == 2.0);
}

TEST_CASE("weyl constant bounds the counting function") {
    const GraphSpace gs = build_graph_space(circle_cloud(120), {2.0 * circle_spacing(120), 120, 1.0});
    CHECK(gs.lambda(1) == doctest::Approx(1.0).epsilon(1e-14));
    const double C = gs.weyl_constant();
    for (std::size_t k = 0; k < gs.dimension(); ++k) {
        const double lam = std::max(1.0, gs.lambda(k));
        CHECK(static_cast<double>(gs.count_upto(lam)) <= C * std::pow(lam, gs.alpha()) * (1 + 1e-12));
    }
}

TEST_CASE("the uniform measure is an exact quadrature and the codec runs") {
    const int M = 200;
    const GraphSpace gs = build_graph_space(circle_cloud(M), {2.0 * circle_spacing(M), static_cast<std::size_t>(M), 1.0});
    const QuadratureMeasure q = make_quadrature(gs, 8);
    CHECK(q.support() == static_cast<std::size_t>(M));
    Eigen::VectorXd moments = gs.project(q.weights, q.nodes, gs.dimension());
    moments[0] -= 1.0;
    CHECK(moments.cwiseAbs().maxCoeff() <= 1e-10);

    const Filter f = standard_filter();
    const auto n = static_cast<Eigen::Index>(gs.count_upto(4.0));
    REQUIRE(n >= 5);
    Eigen::VectorXd c(n);
    for (Eigen::Index k = 0; k < n; ++k) c[k] = 1.0 / (1.0 + static_cast<double>(k));
    const SpectralInput g{c, std::nullopt};
    const SampledInput smp{gs.synthesize(c, q.nodes), node_set_id(q)};
    const DiffusionPolynomial s1 = sigma(gs, f, 8, smp, &q);
    CHECK((s1.coeffs.head(n) - c).cwiseAbs().maxCoeff() <= 1e-10);

    const EncodedFunction e = encode(gs, f, smp, 8, 8, q, q);
    CHECK(e.residual <= 1.0);
    NodeSetRegistry reg;
    reg.add(q);
    const DiffusionPolynomial rec = decode(deserialize(serialize(e)), gs, f, reg);
    const double err = difference_lp_norm(gs, g, rec.coeffs, INFINITY);
    CHECK(err <= 1e-5);
}

TEST_CASE("graph-space files") {
    const GraphSpace gs = build_graph_space(circle_cloud(50), {2.0 * circle_spacing(50), 30});
    const std::string p = temp_path("space.dmgs");
    save_graph_space(gs, p);
    const GraphSpace back = load_graph_space(p);
    CHECK(back.points() == gs.points());
    CHECK(back.eigenvectors() == gs.eigenvectors());
    CHECK(back.lambdas() == gs.lambdas());
    CHECK(std::filesystem::file_size(p) == 4 + 12 + 8 * (50 * 2 + 30 + 50 * 30));

    {
        std::fstream io(p, std::ios::in | std::ios::out | std::ios::binary);
        io.seekp(0);
        io.put('X');
    }
    CHECK_THROWS_AS(load_graph_space(p), CorruptStream);
    save_graph_space(gs, p);
    std::filesystem::resize_file(p, std::filesystem::file_size(p) - 8);
    CHECK_THROWS_AS(load_graph_space(p), CorruptStream);
    std::filesystem::remove(p);
}

TEST_CASE("knn graph distances") {
    Eigen::MatrixXd line(10, 1);
    for (int i = 0; i < 10; ++i) line(i, 0) = i * i * 0.1;
    const Eigen::MatrixXd D = knn_graph_distances(line, 1);
    CHECK(D(0, 9) == doctest::Approx(8.1));
    CHECK(D(3, 3) == 0.0);
    CHECK((D - D.transpose()).cwiseAbs().maxCoeff() <= 1e-12);

    const PointCloud c = circle_cloud(60);
    GraphOptions o{2.0 * circle_spacing(60), 20};
    o.metric = GraphMetric::knn_graph;
    o.knn = 2;
    const GraphSpace gs = build_graph_space(c, o);
    // The shortest path runs along the polygon.
    CHECK(gs.distance({0, 0}, {30, 0}) == doctest::Approx(30 * circle_spacing(60)).epsilon(1e-12));
    CHECK(gs.distance({0, 0}, {30, 0}) >= (c.points.row(0) - c.points.row(30)).norm());
    CHECK(gs.diameter() == doctest::Approx(30 * circle_spacing(60)).epsilon(1e-12));
}

TEST_CASE("disconnected clouds are flagged") {
    PointCloud c;
    c.points.resize(20, 1);
    for (int i = 0; i < 10; ++i) {
        c.points(i, 0) = 0.1 * i;
        c.points(10 + i, 0) = 100.0 + 0.1 * i;
    }
    const GraphSpace gs = build_graph_space(c, {0.2, 20});
    CHECK(gs.disconnected());
    CHECK(gs.lambda(1) < 1e-6);
}

TEST_CASE("graph construction errors") {
    const PointCloud c = circle_cloud(20);
    CHECK_THROWS_AS(build_graph_space(c, {0.0, 10}), DomainError);
    CHECK_THROWS_AS(build_graph_space(c, {0.3, 0}), DomainError);
    CHECK_THROWS_AS(build_graph_space(c, {0.3, 21}), DomainError);
    PointCloud dup = c;
    dup.points.row(3) = dup.points.row(4);
    CHECK_THROWS_AS(build_graph_space(dup, {0.3, 10}), DomainError);
    const GraphSpace gs = build_graph_space(c, {0.5, 20});
    CHECK_THROWS_AS(gs.eval_basis(0, {2.5, 0}), DomainError);
    CHECK_THROWS_AS(gs.eval_basis(0, {20, 0}), DomainError);
    CHECK(gs.eval_basis(0, {7, 0}) == 1.0);
}
