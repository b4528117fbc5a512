#include "diffcodec/spaces.hpp"

#include <algorithm>
#include <cmath>

#include "diffcodec/parallel.hpp"

namespace diffcodec {

namespace {
// Spectral comparisons tolerate rounding in λ = √(integer).
constexpr double kLambdaSlack = 1e-12;
}

NodeSet NodeSet::from_points(std::vector<Point> pts) {
    NodeSet n;
    n.points = std::move(pts);
    return n;
}

NodeSet NodeSet::from_grid(TensorGrid g) {
    NodeSet n;
    n.points.reserve(g.u.size() * g.v.size());
    for (double a : g.u)
        for (double b : g.v) n.points.push_back({a, b});
    n.grid = std::move(g);
    return n;
}

NodeSet NodeSet::subset(const std::vector<std::size_t>& idx) const {
    NodeSet n;
    n.points.reserve(idx.size());
    for (std::size_t i : idx) n.points.push_back(points.at(i));
    return n;
}

double Space::lambda(std::size_t k) const {
    check_index(k + 1);
    return spectrum_[k].lambda;
}

void Space::check_index(std::size_t count) const {
    if (count > spectrum_.size())
        throw SpectrumExhausted("basis index " + std::to_string(count - 1) + " beyond spectrum cap of " + id());
}

std::size_t Space::count_upto(double N) const {
    if (!(N >= 0.0)) throw DomainError("count_upto requires N >= 0");
    if (!spectrum_complete() && N > cap_ * (1.0 + kLambdaSlack))
        throw SpectrumExhausted("N = " + std::to_string(N) + " exceeds the spectrum cap of " + id());
    const double bound = N * (1.0 + kLambdaSlack) + kLambdaSlack;
    auto it = std::upper_bound(spectrum_.begin(), spectrum_.end(), bound,
                               [](double b, const SpectrumEntry& e) { return b < e.lambda; });
    return static_cast<std::size_t>(it - spectrum_.begin());
}

std::size_t Space::count_below(double N) const {
    if (!(N >= 0.0)) throw DomainError("count_below requires N >= 0");
    if (!spectrum_complete() && N > cap_ * (1.0 + kLambdaSlack))
        throw SpectrumExhausted("N = " + std::to_string(N) + " exceeds the spectrum cap of " + id());
    const double bound = N * (1.0 - kLambdaSlack) - kLambdaSlack;
    auto it = std::upper_bound(spectrum_.begin(), spectrum_.end(), bound,
                               [](double b, const SpectrumEntry& e) { return b < e.lambda; });
    return static_cast<std::size_t>(it - spectrum_.begin());
}

double Space::eval_basis(std::size_t k, const Point& x) const {
    check_index(k + 1);
    if (!valid(x)) throw DomainError("point outside the fundamental domain of " + id());
    std::vector<double> buf(k + 1);
    eval_basis_all(x, k + 1, buf.data());
    return buf[k];
}

Eigen::MatrixXd Space::basis_matrix(const NodeSet& nodes, std::size_t count) const {
    check_index(count);
    Eigen::MatrixXd B(static_cast<Eigen::Index>(nodes.size()), static_cast<Eigen::Index>(count));
    std::vector<double> row(count);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        eval_basis_all(nodes.points[i], count, row.data());
        for (std::size_t k = 0; k < count; ++k) B(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = row[k];
    }
    return B;
}

Eigen::VectorXd Space::synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const {
    const std::size_t count = static_cast<std::size_t>(coeffs.size());
    check_index(count);
    Eigen::VectorXd out(static_cast<Eigen::Index>(nodes.size()));
    parallel_for(0, nodes.size(), [&](std::size_t i) {
        std::vector<double> row(count);
        eval_basis_all(nodes.points[i], count, row.data());
        double acc = 0.0;
        for (std::size_t k = 0; k < count; ++k) acc += coeffs[static_cast<Eigen::Index>(k)] * row[k];
        out[static_cast<Eigen::Index>(i)] = acc;
    });
    return out;
}

Eigen::VectorXd Space::project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const {
    check_index(count);
    // Fixed chunking keeps the summation order independent of the thread count.
    constexpr std::size_t kChunks = 64;
    const std::size_t n = nodes.size();
    std::vector<Eigen::VectorXd> partial(kChunks, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count)));
    parallel_for(0, kChunks, [&](std::size_t c) {
        const std::size_t lo = n * c / kChunks, hi = n * (c + 1) / kChunks;
        std::vector<double> row(count);
        for (std::size_t i = lo; i < hi; ++i) {
            eval_basis_all(nodes.points[i], count, row.data());
            const double v = values[static_cast<Eigen::Index>(i)];
            for (std::size_t k = 0; k < count; ++k) partial[c][static_cast<Eigen::Index>(k)] += v * row[k];
        }
    });
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    for (const auto& p : partial) out += p;
    return out;
}

double Space::tail_power_sum(double, double) const {
    throw DomainError("tail sums are not available for space " + id());
}

nlohmann::json Space::descriptor() const {
    return {{"space_id", id()}, {"alpha", alpha()}, {"a", product_constant()}, {"lambda_cap", lambda_cap()}};
}

std::unique_ptr<Space> make_space(const std::string& id, double lambda_cap) {
    if (!(lambda_cap >= 0.0) || !std::isfinite(lambda_cap)) throw DomainError("lambda_cap must be finite and >= 0");
    if (id == "S1") return std::make_unique<CircleSpace>(lambda_cap);
    if (id == "T2") return std::make_unique<TorusSpace>(lambda_cap);
    if (id == "S2") return std::make_unique<SphereSpace>(lambda_cap);
    throw DomainError("unknown space id '" + id + "'");
}

void gauss_legendre(int n, std::vector<double>& nodes, std::vector<double>& weights) {
    if (n < 1) throw DomainError("Gauss-Legendre needs n >= 1");
    nodes.assign(static_cast<std::size_t>(n), 0.0);
    weights.assign(static_cast<std::size_t>(n), 0.0);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            if (n == 1) {
                p1 = x;
                p0 = 1.0;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        // Recompute the derivative at the converged node for the weight.
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = p2;
        }
        if (n == 1) p0 = 1.0;
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[static_cast<std::size_t>(i)] = -x;
        nodes[static_cast<std::size_t>(n - 1 - i)] = x;
        weights[static_cast<std::size_t>(i)] = w;
        weights[static_cast<std::size_t>(n - 1 - i)] = w;
    }
    if (n % 2 == 1) nodes[static_cast<std::size_t>(n / 2)] = 0.0;
}

}  // namespace diffcodec
