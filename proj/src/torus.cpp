#include <algorithm>
#include <cmath>

#include "diffcodec/spaces.hpp"

namespace diffcodec {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;

// Circle basis index: 0 ↦ 1, m > 0 ↦ √2 cos mθ, m < 0 ↦ √2 sin |m|θ.
std::size_t circle_index(int m) {
    if (m == 0) return 0;
    return m > 0 ? static_cast<std::size_t>(2 * m - 1) : static_cast<std::size_t>(-2 * m);
}

void circle_row(double theta, int max_m, double* out) {
    out[0] = 1.0;
    for (int m = 1; m <= max_m; ++m) {
        out[2 * m - 1] = kSqrt2 * std::cos(m * theta);
        out[2 * m] = kSqrt2 * std::sin(m * theta);
    }
}

Eigen::MatrixXd circle_matrix(const std::vector<double>& thetas, int max_m) {
    Eigen::MatrixXd U(static_cast<Eigen::Index>(thetas.size()), 2 * max_m + 1);
    std::vector<double> row(static_cast<std::size_t>(2 * max_m + 1));
    for (std::size_t i = 0; i < thetas.size(); ++i) {
        circle_row(thetas[i], max_m, row.data());
        for (int j = 0; j < 2 * max_m + 1; ++j) U(static_cast<Eigen::Index>(i), j) = row[static_cast<std::size_t>(j)];
    }
    return U;
}

double wrap(double d) {
    d = std::fmod(std::abs(d), 2.0 * kPi);
    return std::min(d, 2.0 * kPi - d);
}

}  // namespace

TorusSpace::TorusSpace(double lambda_cap) {
    cap_ = lambda_cap;
    max_freq_ = static_cast<int>(std::floor(lambda_cap + 1e-12));
    const long R2 = static_cast<long>(std::floor(lambda_cap * lambda_cap + 1e-9));
    struct Raw {
        long norm2;
        int m1, m2;
    };
    std::vector<Raw> raw;
    for (int m1 = -max_freq_; m1 <= max_freq_; ++m1)
        for (int m2 = -max_freq_; m2 <= max_freq_; ++m2) {
            const long n2 = static_cast<long>(m1) * m1 + static_cast<long>(m2) * m2;
            if (n2 <= R2) raw.push_back({n2, m1, m2});
        }
    std::sort(raw.begin(), raw.end(), [](const Raw& a, const Raw& b) {
        if (a.norm2 != b.norm2) return a.norm2 < b.norm2;
        if (a.m1 != b.m1) return a.m1 < b.m1;
        return a.m2 < b.m2;
    });
    spectrum_.reserve(raw.size());
    for (const auto& r : raw)
        spectrum_.push_back({spectrum_.size(), std::sqrt(static_cast<double>(r.norm2)), {r.m1, r.m2}});
}

void TorusSpace::eval_basis_all(const Point& x, std::size_t count, double* out) const {
    check_index(count);
    if (count == 0) return;
    int top = 0;
    for (std::size_t k = 0; k < count; ++k)
        top = std::max({top, std::abs(spectrum_[k].tag[0]), std::abs(spectrum_[k].tag[1])});
    std::vector<double> a(static_cast<std::size_t>(2 * top + 1)), b(a.size());
    circle_row(x.u, top, a.data());
    circle_row(x.v, top, b.data());
    for (std::size_t k = 0; k < count; ++k)
        out[k] = a[circle_index(spectrum_[k].tag[0])] * b[circle_index(spectrum_[k].tag[1])];
}

double TorusSpace::distance(const Point& x, const Point& y) const {
    return std::hypot(wrap(x.u - y.u), wrap(x.v - y.v));
}

double TorusSpace::ball_volume(const Point&, double t) const {
    if (!(t > 0.0)) throw DomainError("ball_volume requires t > 0");
    // Per-coordinate distances are independent and uniform on [0, π].
    if (t <= kPi) return t * t / (4.0 * kPi);
    if (t >= kPi * std::sqrt(2.0)) return 1.0;
    const double th0 = std::acos(kPi / t);
    const double area = kPi * std::sqrt(t * t - kPi * kPi) + 0.5 * t * t * (0.5 * kPi - 2.0 * th0);
    return std::min(1.0, area / (kPi * kPi));
}

bool TorusSpace::valid(const Point& x) const {
    return std::isfinite(x.u) && std::isfinite(x.v) && x.u >= 0.0 && x.u < 2.0 * kPi && x.v >= 0.0 && x.v < 2.0 * kPi;
}

Point TorusSpace::random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> U(0.0, 2.0 * kPi);
    const double a = U(rng);
    return {a, U(rng)};
}

QuadratureRule TorusSpace::quadrature_rule(double D) const {
    if (!(D >= 0.0) || !std::isfinite(D)) throw DomainError("quadrature degree must be finite and >= 0");
    const long M = 2 * static_cast<long>(std::ceil(D - 1e-12)) + 1;
    TensorGrid g;
    for (long i = 0; i < M; ++i) g.u.push_back(2.0 * kPi * static_cast<double>(i) / static_cast<double>(M));
    g.v = g.u;
    QuadratureRule q;
    q.nodes = NodeSet::from_grid(std::move(g));
    q.weights = Eigen::VectorXd::Constant(M * M, 1.0 / static_cast<double>(M * M));
    return q;
}

Eigen::VectorXd TorusSpace::synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const {
    if (!nodes.grid) return Space::synthesize(coeffs, nodes);
    const std::size_t count = static_cast<std::size_t>(coeffs.size());
    check_index(count);
    int top = 0;
    for (std::size_t k = 0; k < count; ++k)
        top = std::max({top, std::abs(spectrum_[k].tag[0]), std::abs(spectrum_[k].tag[1])});
    const int J = 2 * top + 1;
    Eigen::MatrixXd C = Eigen::MatrixXd::Zero(J, J);
    for (std::size_t k = 0; k < count; ++k)
        C(static_cast<Eigen::Index>(circle_index(spectrum_[k].tag[0])),
          static_cast<Eigen::Index>(circle_index(spectrum_[k].tag[1]))) = coeffs[static_cast<Eigen::Index>(k)];
    const Eigen::MatrixXd U1 = circle_matrix(nodes.grid->u, top);
    const Eigen::MatrixXd U2 = circle_matrix(nodes.grid->v, top);
    const Eigen::MatrixXd F = U1 * C * U2.transpose();
    Eigen::VectorXd out(F.size());
    const Eigen::Index nv = F.cols();
    for (Eigen::Index i = 0; i < F.rows(); ++i)
        for (Eigen::Index j = 0; j < nv; ++j) out[i * nv + j] = F(i, j);
    return out;
}

Eigen::VectorXd TorusSpace::project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const {
    if (!nodes.grid) return Space::project(values, nodes, count);
    check_index(count);
    int top = 0;
    for (std::size_t k = 0; k < count; ++k)
        top = std::max({top, std::abs(spectrum_[k].tag[0]), std::abs(spectrum_[k].tag[1])});
    const Eigen::Index nu = static_cast<Eigen::Index>(nodes.grid->u.size());
    const Eigen::Index nv = static_cast<Eigen::Index>(nodes.grid->v.size());
    Eigen::MatrixXd V(nu, nv);
    for (Eigen::Index i = 0; i < nu; ++i)
        for (Eigen::Index j = 0; j < nv; ++j) V(i, j) = values[i * nv + j];
    const Eigen::MatrixXd U1 = circle_matrix(nodes.grid->u, top);
    const Eigen::MatrixXd U2 = circle_matrix(nodes.grid->v, top);
    const Eigen::MatrixXd G = U1.transpose() * V * U2;
    Eigen::VectorXd out(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k)
        out[static_cast<Eigen::Index>(k)] = G(static_cast<Eigen::Index>(circle_index(spectrum_[k].tag[0])),
                                              static_cast<Eigen::Index>(circle_index(spectrum_[k].tag[1])));
    return out;
}

double TorusSpace::tail_power_sum(double cap, double q) const {
    if (!(q > 2.0)) throw DomainError("tail sum diverges for q <= alpha");
    // Explicit lattice sum out to radius R, then the radial integral.
    const double R = std::max(4.0 * cap, 256.0);
    const int Ri = static_cast<int>(std::floor(R));
    double sum = 0.0;
    for (int m1 = -Ri; m1 <= Ri; ++m1)
        for (int m2 = -Ri; m2 <= Ri; ++m2) {
            const double n2 = static_cast<double>(m1) * m1 + static_cast<double>(m2) * m2;
            const double lam = std::sqrt(n2);
            if (lam > cap + 1e-12 && lam <= R) sum += std::pow(lam, -q);
        }
    sum += 2.0 * kPi * std::pow(R, 2.0 - q) / (q - 2.0);
    return sum;
}

}  // namespace diffcodec
