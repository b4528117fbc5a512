#include "diffcodec/datamanifold.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iterator>
#include <limits>
#include <queue>
#include <sstream>

#include "diffcodec/approx.hpp"
#include "diffcodec/bitstream.hpp"

namespace diffcodec {

namespace {

constexpr double kDuplicateTol = 1e-12;
constexpr double kDisconnectedTol = 1e-12;
constexpr Eigen::Index kMaxDenseNodes = 2000;

std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

double parse_field(std::string_view field, std::size_t line, std::size_t col) {
    const std::string_view t = trim(field);
    double v = 0.0;
    const auto res = std::from_chars(t.data(), t.data() + t.size(), v);
    if (t.empty() || res.ec != std::errc() || res.ptr != t.data() + t.size() || !std::isfinite(v))
        throw ParseError("line " + std::to_string(line) + ", field " + std::to_string(col) + ": '" + std::string(t) +
                             "' is not a real number",
                         line, col);
    return v;
}

void check_distinct(const Eigen::MatrixXd& pts) {
    for (Eigen::Index i = 0; i < pts.rows(); ++i)
        for (Eigen::Index j = i + 1; j < pts.rows(); ++j)
            if ((pts.row(i) - pts.row(j)).norm() <= kDuplicateTol)
                throw DomainError("rows " + std::to_string(i + 1) + " and " + std::to_string(j + 1) + " coincide");
}

// Symmetric Sinkhorn scaling: returns d with diag(d)·W·diag(d) doubly
// stochastic.
Eigen::VectorXd sinkhorn(const Eigen::MatrixXd& W) {
    Eigen::VectorXd d = Eigen::VectorXd::Ones(W.rows());
    for (int it = 0; it < 100000; ++it) {
        const Eigen::VectorXd r = W * d;
        const double err = (d.array() * r.array() - 1.0).abs().maxCoeff();
        if (err < 1e-14) break;
        d = (d.array() / r.array()).sqrt();
    }
    return d;
}

}  // namespace

PointCloud ingest_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::vector<std::vector<double>> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty()) continue;
        std::vector<double> row;
        std::string_view rest = line;
        std::size_t col = 1;
        while (true) {
            const std::size_t comma = rest.find(',');
            row.push_back(parse_field(rest.substr(0, comma), lineno, col));
            if (comma == std::string_view::npos) break;
            rest.remove_prefix(comma + 1);
            ++col;
        }
        if (!rows.empty() && row.size() != rows.front().size())
            throw ParseError("line " + std::to_string(lineno) + ": expected " + std::to_string(rows.front().size()) +
                                 " fields, found " + std::to_string(row.size()),
                             lineno, row.size());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw DomainError("no data rows");
    if (rows.size() < 3) throw DomainError("a point cloud needs at least 3 rows");
    PointCloud c;
    c.source = path;
    c.points.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
    for (std::size_t i = 0; i < rows.size(); ++i)
        for (std::size_t j = 0; j < rows[i].size(); ++j) c.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    check_distinct(c.points);
    return c;
}

GraphSpace::GraphSpace(Eigen::MatrixXd points, Eigen::VectorXd lambdas, Eigen::MatrixXd phi, GraphMetric metric,
                       std::size_t knn)
    : points_(std::move(points)), phi_(std::move(phi)), metric_(metric) {
    const Eigen::Index M = points_.rows(), K = lambdas.size();
    if (M < 3) throw DomainError("a graph space needs at least 3 nodes");
    if (K < 1 || K > M) throw DomainError("spectrum size K must lie in [1, M]");
    if (phi_.rows() != M || phi_.cols() != K) throw DomainError("eigenvector matrix must be M x K");
    for (Eigen::Index k = 0; k < K; ++k) {
        if (!(lambdas[k] >= 0.0) || (k > 0 && lambdas[k] < lambdas[k - 1]))
            throw DomainError("graph spectrum must be nonnegative and nondecreasing");
        spectrum_.push_back({static_cast<std::size_t>(k), lambdas[k], {static_cast<int>(k), 0}});
    }
    cap_ = lambdas[K - 1];
    disconnected_ = K >= 2 && lambdas[1] * lambdas[1] < kDisconnectedTol;

    if (metric_ == GraphMetric::knn_graph) graph_dist_ = knn_graph_distances(points_, knn);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = i + 1; j < M; ++j) {
            const double d = metric_ == GraphMetric::knn_graph ? graph_dist_(i, j) : (points_.row(i) - points_.row(j)).norm();
            if (std::isfinite(d)) diameter_ = std::max(diameter_, d);
        }

    alpha_ = static_cast<double>(points_.cols());
    try {
        alpha_ = estimate_alpha(*this);
        alpha_estimated_ = true;
    } catch (const DomainError&) {
    }
}

std::size_t GraphSpace::index(const Point& x) const {
    if (!valid(x)) throw DomainError("not a node of the graph space");
    return static_cast<std::size_t>(x.u);
}

bool GraphSpace::valid(const Point& x) const {
    return std::isfinite(x.u) && x.u == std::floor(x.u) && x.u >= 0.0 && x.u < static_cast<double>(nodes()) && x.v == 0.0;
}

void GraphSpace::eval_basis_all(const Point& x, std::size_t count, double* out) const {
    check_index(count);
    const auto i = static_cast<Eigen::Index>(index(x));
    for (std::size_t k = 0; k < count; ++k) out[k] = phi_(i, static_cast<Eigen::Index>(k));
}

Eigen::VectorXd GraphSpace::synthesize(const Eigen::VectorXd& coeffs, const NodeSet& ns) const {
    const auto count = static_cast<std::size_t>(coeffs.size());
    check_index(count);
    Eigen::VectorXd out(static_cast<Eigen::Index>(ns.size()));
    for (std::size_t r = 0; r < ns.size(); ++r)
        out[static_cast<Eigen::Index>(r)] =
            phi_.row(static_cast<Eigen::Index>(index(ns.points[r]))).head(coeffs.size()).dot(coeffs);
    return out;
}

Eigen::VectorXd GraphSpace::project(const Eigen::VectorXd& values, const NodeSet& ns, std::size_t count) const {
    check_index(count);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    for (std::size_t r = 0; r < ns.size(); ++r)
        out += values[static_cast<Eigen::Index>(r)] *
               phi_.row(static_cast<Eigen::Index>(index(ns.points[r]))).head(static_cast<Eigen::Index>(count)).transpose();
    return out;
}

double GraphSpace::distance(const Point& x, const Point& y) const {
    const auto i = static_cast<Eigen::Index>(index(x)), j = static_cast<Eigen::Index>(index(y));
    if (metric_ == GraphMetric::knn_graph) return graph_dist_(i, j);
    return (points_.row(i) - points_.row(j)).norm();
}

double GraphSpace::ball_volume(const Point& x, double t) const {
    std::size_t n = 0;
    for (std::size_t j = 0; j < nodes(); ++j)
        if (distance(x, {static_cast<double>(j), 0.0}) <= t) ++n;
    return static_cast<double>(n) / static_cast<double>(nodes());
}

Point GraphSpace::random_point(std::mt19937_64& rng) const {
    std::uniform_int_distribution<std::size_t> pick(0, nodes() - 1);
    return {static_cast<double>(pick(rng)), 0.0};
}

QuadratureRule GraphSpace::quadrature_rule(double) const {
    std::vector<Point> pts(nodes());
    for (std::size_t i = 0; i < nodes(); ++i) pts[i] = {static_cast<double>(i), 0.0};
    return {NodeSet::from_points(std::move(pts)),
            Eigen::VectorXd::Constant(static_cast<Eigen::Index>(nodes()), 1.0 / static_cast<double>(nodes()))};
}

double GraphSpace::tail_power_sum(double cap, double q) const {
    if (!spectrum_complete()) throw SpectrumExhausted("the graph spectrum was truncated; its tail is unknown");
    double acc = 0.0;
    for (const SpectrumEntry& e : spectrum_)
        if (e.lambda > cap) acc += std::pow(e.lambda, -q);
    return acc;
}

double GraphSpace::weyl_constant() const {
    // The counting function jumps at each λ_k, so the sup of count(λ)/λ^α
    // over λ ≥ 1 sits at λ = 1 or at a shell ending at some λ_k ≥ 1.
    const std::size_t K = spectrum_.size();
    double C = static_cast<double>(std::upper_bound(spectrum_.begin(), spectrum_.end(), 1.0,
                                                    [](double b, const SpectrumEntry& e) { return b < e.lambda; }) -
                                   spectrum_.begin());
    for (std::size_t k = 0; k < K; ++k) {
        if (spectrum_[k].lambda < 1.0) continue;
        if (k + 1 < K && spectrum_[k + 1].lambda == spectrum_[k].lambda) continue;
        C = std::max(C, static_cast<double>(k + 1) / std::pow(spectrum_[k].lambda, alpha_));
    }
    return C;
}

Eigen::VectorXd GraphSpace::lambdas() const {
    Eigen::VectorXd l(static_cast<Eigen::Index>(spectrum_.size()));
    for (std::size_t k = 0; k < spectrum_.size(); ++k) l[static_cast<Eigen::Index>(k)] = spectrum_[k].lambda;
    return l;
}

GraphSpace build_graph_space(const PointCloud& cloud, const GraphOptions& opts) {
    const Eigen::Index M = cloud.points.rows();
    if (M < 3) throw DomainError("a point cloud needs at least 3 rows");
    if (M > kMaxDenseNodes) throw DomainError("dense eigensolve is limited to " + std::to_string(kMaxDenseNodes) + " points");
    if (!(opts.bandwidth > 0.0) || !std::isfinite(opts.bandwidth)) throw DomainError("bandwidth must be positive");
    if (opts.K < 1 || opts.K > static_cast<std::size_t>(M)) throw DomainError("K must lie in [1, M]");
    check_distinct(cloud.points);

    Eigen::MatrixXd W(M, M);
    const double inv = 1.0 / (opts.bandwidth * opts.bandwidth);
    for (Eigen::Index i = 0; i < M; ++i)
        for (Eigen::Index j = i; j < M; ++j) W(i, j) = W(j, i) = std::exp(-(cloud.points.row(i) - cloud.points.row(j)).squaredNorm() * inv);
    const Eigen::VectorXd d = sinkhorn(W);
    Eigen::MatrixXd L = -(d.asDiagonal() * W * d.asDiagonal());
    L.diagonal().array() += 1.0;
    L = 0.5 * (L + L.transpose()).eval();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(L);
    if (es.info() != Eigen::Success) throw std::runtime_error("graph eigensolve did not converge");
    const auto K = static_cast<Eigen::Index>(opts.K);
    Eigen::VectorXd lam = es.eigenvalues().head(K).cwiseMax(0.0).cwiseSqrt();
    lam[0] = 0.0;
    Eigen::MatrixXd phi = es.eigenvectors().leftCols(K) * std::sqrt(static_cast<double>(M));
    // The balanced matrix fixes the constant vector exactly.
    phi.col(0).setOnes();
    for (Eigen::Index k = 1; k < K; ++k) {
        Eigen::Index arg = 0;
        phi.col(k).cwiseAbs().maxCoeff(&arg);
        if (phi(arg, k) < 0.0) phi.col(k) *= -1.0;
    }
    if (opts.calibrate_lambda1) {
        if (K < 2 || !(lam[1] > 0.0)) throw DomainError("calibration needs a positive lambda_1");
        lam *= *opts.calibrate_lambda1 / lam[1];
    }
    return GraphSpace(cloud.points, lam, phi, opts.metric, opts.knn);
}

double estimate_alpha(const Space& space) {
    const std::size_t K = space.dimension();
    if (K < 20) throw DomainError("alpha estimation needs at least 20 spectrum entries");
    double lambda1 = 0.0;
    for (const SpectrumEntry& e : space.spectrum())
        if (e.lambda > 1e-12) {
            lambda1 = e.lambda;
            break;
        }
    if (lambda1 == 0.0) throw DomainError("degenerate spectrum");
    std::vector<double> x, y;
    for (int j = 0;; ++j) {
        const double N = 1.5 * lambda1 * std::ldexp(1.0, j);
        if (N > space.lambda_cap()) break;
        const std::size_t c = space.count_upto(N);
        if (2 * c > K) break;
        x.push_back(std::log(N));
        y.push_back(std::log(static_cast<double>(c)));
    }
    if (x.size() < 3) throw DomainError("fewer than 3 usable grid points for the alpha fit");
    return fit_slope(x, y);
}

Eigen::MatrixXd knn_graph_distances(const Eigen::MatrixXd& points, std::size_t k) {
    const auto M = static_cast<std::size_t>(points.rows());
    if (k < 1 || k >= M) throw DomainError("knn must lie in [1, M)");
    std::vector<std::vector<std::pair<std::size_t, double>>> adj(M);
    std::vector<std::pair<double, std::size_t>> cand(M);
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = 0; j < M; ++j)
            cand[j] = {(points.row(static_cast<Eigen::Index>(i)) - points.row(static_cast<Eigen::Index>(j))).norm(), j};
        std::partial_sort(cand.begin(), cand.begin() + static_cast<std::ptrdiff_t>(k + 1), cand.end());
        for (std::size_t r = 0; r <= k; ++r) {
            if (cand[r].second == i) continue;
            adj[i].push_back({cand[r].second, cand[r].first});
            adj[cand[r].second].push_back({i, cand[r].first});
        }
    }
    const double inf = std::numeric_limits<double>::infinity();
    Eigen::MatrixXd D = Eigen::MatrixXd::Constant(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M), inf);
    using Item = std::pair<double, std::size_t>;
    for (std::size_t s = 0; s < M; ++s) {
        auto col = D.col(static_cast<Eigen::Index>(s));
        std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
        col[static_cast<Eigen::Index>(s)] = 0.0;
        pq.push({0.0, s});
        while (!pq.empty()) {
            const auto [du, u] = pq.top();
            pq.pop();
            if (du > col[static_cast<Eigen::Index>(u)]) continue;
            for (const auto& [v, w] : adj[u]) {
                const double nd = du + w;
                if (nd < col[static_cast<Eigen::Index>(v)]) {
                    col[static_cast<Eigen::Index>(v)] = nd;
                    pq.push({nd, v});
                }
            }
        }
    }
    return D;
}

void save_graph_space(const GraphSpace& gs, const std::string& path) {
    ByteWriter w;
    w.bytes(reinterpret_cast<const std::uint8_t*>("DMGS"), 4);
    const Eigen::MatrixXd& P = gs.points();
    const Eigen::MatrixXd& Phi = gs.eigenvectors();
    w.u32(static_cast<std::uint32_t>(P.rows()));
    w.u32(static_cast<std::uint32_t>(P.cols()));
    w.u32(static_cast<std::uint32_t>(Phi.cols()));
    for (Eigen::Index i = 0; i < P.rows(); ++i)
        for (Eigen::Index j = 0; j < P.cols(); ++j) w.f64(P(i, j));
    for (std::size_t k = 0; k < gs.dimension(); ++k) w.f64(gs.lambda(k));
    for (Eigen::Index i = 0; i < Phi.rows(); ++i)
        for (Eigen::Index k = 0; k < Phi.cols(); ++k) w.f64(Phi(i, k));
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open " + path + " for writing");
    out.write(reinterpret_cast<const char*>(w.buffer().data()), static_cast<std::streamsize>(w.buffer().size()));
    if (!out) throw std::runtime_error("write failed: " + path);
}

GraphSpace load_graph_space(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    ByteReader r(bytes);
    const std::uint8_t* magic = r.take(4);
    if (std::string(reinterpret_cast<const char*>(magic), 4) != "DMGS") throw CorruptStream("bad graph-space magic");
    const std::uint64_t M = r.u32(), d = r.u32(), K = r.u32();
    if (M < 3 || d < 1 || K < 1 || K > M) throw CorruptStream("implausible graph-space dimensions");
    if (r.remaining() != 8 * (M * d + K + M * K)) throw CorruptStream("graph-space file size does not match its header");
    const auto m = static_cast<Eigen::Index>(M), dd = static_cast<Eigen::Index>(d), kk = static_cast<Eigen::Index>(K);
    Eigen::MatrixXd P(m, dd), Phi(m, kk);
    Eigen::VectorXd lam(kk);
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index j = 0; j < dd; ++j) P(i, j) = r.f64();
    for (Eigen::Index k = 0; k < kk; ++k) lam[k] = r.f64();
    for (Eigen::Index i = 0; i < m; ++i)
        for (Eigen::Index k = 0; k < kk; ++k) Phi(i, k) = r.f64();
    try {
        return GraphSpace(std::move(P), std::move(lam), std::move(Phi));
    } catch (const DomainError& e) {
        throw CorruptStream(std::string("invalid graph space: ") + e.what());
    }
}

}  // namespace diffcodec
