#include <algorithm>
#include <cmath>

#include "diffcodec/parallel.hpp"
#include "diffcodec/spaces.hpp"

namespace diffcodec {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// √2 cos mθ and √2 sin mθ by rotation, reseeded periodically to bound drift.
template <typename F>
void circle_harmonics(double theta, int max_m, F&& emit) {
    const double c1 = std::cos(theta), s1 = std::sin(theta);
    double c = 1.0, s = 0.0;
    for (int m = 1; m <= max_m; ++m) {
        if ((m & 63) == 0) {
            c = std::cos(m * theta);
            s = std::sin(m * theta);
        } else {
            const double cn = c * c1 - s * s1;
            s = s * c1 + c * s1;
            c = cn;
        }
        emit(m, kSqrt2 * c, kSqrt2 * s);
    }
}

double wrap(double d) {
    d = std::fmod(std::abs(d), 2.0 * kPi);
    return std::min(d, 2.0 * kPi - d);
}

}  // namespace

CircleSpace::CircleSpace(double lambda_cap) {
    cap_ = lambda_cap;
    const int M = static_cast<int>(std::floor(lambda_cap + 1e-12));
    spectrum_.reserve(static_cast<std::size_t>(2 * M + 1));
    spectrum_.push_back({0, 0.0, {0, 0}});
    for (int m = 1; m <= M; ++m) {
        spectrum_.push_back({spectrum_.size(), static_cast<double>(m), {m, 0}});
        spectrum_.push_back({spectrum_.size(), static_cast<double>(m), {m, 1}});
    }
}

void CircleSpace::eval_basis_all(const Point& x, std::size_t count, double* out) const {
    check_index(count);
    if (count == 0) return;
    out[0] = 1.0;
    const int max_m = static_cast<int>(count / 2);
    circle_harmonics(x.u, max_m, [&](int m, double c, double s) {
        const std::size_t kc = static_cast<std::size_t>(2 * m - 1);
        if (kc < count) out[kc] = c;
        if (kc + 1 < count) out[kc + 1] = s;
    });
}

double CircleSpace::distance(const Point& x, const Point& y) const { return wrap(x.u - y.u); }

double CircleSpace::ball_volume(const Point&, double t) const {
    if (!(t > 0.0)) throw DomainError("ball_volume requires t > 0");
    return std::min(t / kPi, 1.0);
}

bool CircleSpace::valid(const Point& x) const { return std::isfinite(x.u) && x.u >= 0.0 && x.u < 2.0 * kPi; }

Point CircleSpace::random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> U(0.0, 2.0 * kPi);
    return {U(rng), 0.0};
}

QuadratureRule CircleSpace::quadrature_rule(double D) const {
    if (!(D >= 0.0) || !std::isfinite(D)) throw DomainError("quadrature degree must be finite and >= 0");
    const long M = 2 * static_cast<long>(std::ceil(D - 1e-12)) + 1;
    QuadratureRule q;
    q.nodes.points.reserve(static_cast<std::size_t>(M));
    for (long i = 0; i < M; ++i) q.nodes.points.push_back({2.0 * kPi * static_cast<double>(i) / static_cast<double>(M), 0.0});
    q.weights = Eigen::VectorXd::Constant(M, 1.0 / static_cast<double>(M));
    return q;
}

Eigen::VectorXd CircleSpace::synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const {
    const std::size_t count = static_cast<std::size_t>(coeffs.size());
    check_index(count);
    Eigen::VectorXd out(static_cast<Eigen::Index>(nodes.size()));
    const int max_m = static_cast<int>(count / 2);
    parallel_for(0, nodes.size(), [&](std::size_t i) {
        double acc = count > 0 ? coeffs[0] : 0.0;
        circle_harmonics(nodes.points[i].u, max_m, [&](int m, double c, double s) {
            const Eigen::Index kc = 2 * m - 1;
            if (static_cast<std::size_t>(kc) < count) acc += coeffs[kc] * c;
            if (static_cast<std::size_t>(kc) + 1 < count) acc += coeffs[kc + 1] * s;
        });
        out[static_cast<Eigen::Index>(i)] = acc;
    });
    return out;
}

Eigen::VectorXd CircleSpace::project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const {
    check_index(count);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    if (count == 0) return out;
    const int max_m = static_cast<int>(count / 2);
    // Each worker owns a contiguous band of frequencies, so sums are
    // accumulated in node order regardless of the thread count.
    constexpr std::size_t kBands = 32;
    parallel_for(0, kBands, [&](std::size_t b) {
        const int lo = static_cast<int>(static_cast<std::size_t>(max_m + 1) * b / kBands);
        const int hi = static_cast<int>(static_cast<std::size_t>(max_m + 1) * (b + 1) / kBands);
        if (lo >= hi) return;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            const double th = nodes.points[i].u;
            const double v = values[static_cast<Eigen::Index>(i)];
            const double c1 = std::cos(th), s1 = std::sin(th);
            double c = std::cos(lo * th), s = std::sin(lo * th);
            for (int m = lo; m < hi; ++m) {
                if (m > lo) {
                    if ((m & 63) == 0) {
                        c = std::cos(m * th);
                        s = std::sin(m * th);
                    } else {
                        const double cn = c * c1 - s * s1;
                        s = s * c1 + c * s1;
                        c = cn;
                    }
                }
                if (m == 0) {
                    out[0] += v;
                    continue;
                }
                const Eigen::Index kc = 2 * m - 1;
                if (static_cast<std::size_t>(kc) < count) out[kc] += v * kSqrt2 * c;
                if (static_cast<std::size_t>(kc) + 1 < count) out[kc + 1] += v * kSqrt2 * s;
            }
        }
    });
    return out;
}

double CircleSpace::tail_power_sum(double cap, double q) const {
    if (!(q > 1.0)) throw DomainError("tail sum diverges for q <= alpha");
    // 2 Σ_{m ≥ a} m^{−q}, a = ⌊cap⌋ + 1: explicit terms, then Euler–Maclaurin.
    const long a = static_cast<long>(std::floor(cap + 1e-12)) + 1;
    const long head = std::max<long>(a, 64);
    double sum = 0.0;
    for (long m = a; m < head; ++m) sum += std::pow(static_cast<double>(m), -q);
    const double x = static_cast<double>(head);
    const double f = std::pow(x, -q);
    sum += x * f / (q - 1.0) + 0.5 * f + q * f / (12.0 * x) - q * (q + 1.0) * (q + 2.0) * f / (720.0 * x * x * x);
    return 2.0 * sum;
}

}  // namespace diffcodec
