#include <algorithm>
#include <cmath>

#include "diffcodec/parallel.hpp"
#include "diffcodec/spaces.hpp"

namespace diffcodec {

namespace {

constexpr double kSqrt2 = 1.41421356237309504880;
// Below this the sectoral seed P̄_m^m and everything after it is treated as zero.
constexpr double kUnderflow = 1e-280;

int degree_of_count(std::size_t count) {
    if (count == 0) return -1;
    int L = static_cast<int>(std::floor(std::sqrt(static_cast<double>(count - 1))));
    while (static_cast<std::size_t>((L + 1) * (L + 1)) <= count - 1) ++L;
    while (L > 0 && static_cast<std::size_t>(L * L) > count - 1) --L;
    return L;
}

}  // namespace

int SphereSpace::degree_for(double D) {
    if (!(D >= 0.0)) throw DomainError("degree requires D >= 0");
    const double D2 = D * D * (1.0 + 1e-12) + 1e-12;
    int l = static_cast<int>(std::floor(D));
    while (static_cast<double>(l + 1) * (l + 2) <= D2) ++l;
    while (l > 0 && static_cast<double>(l) * (l + 1) > D2) --l;
    return l;
}

SphereSpace::SphereSpace(double lambda_cap) {
    cap_ = lambda_cap;
    max_degree_ = degree_for(lambda_cap);
    const int L = max_degree_;
    spectrum_.reserve(static_cast<std::size_t>((L + 1) * (L + 1)));
    for (int l = 0; l <= L; ++l) {
        const double lam = std::sqrt(static_cast<double>(l) * (l + 1));
        for (int m = -l; m <= l; ++m) spectrum_.push_back({spectrum_.size(), lam, {l, m}});
    }
    rec_a_.assign(tri(L + 1, 0), 0.0);
    rec_b_.assign(tri(L + 1, 0), 0.0);
    for (int m = 0; m <= L; ++m)
        for (int l = m + 2; l <= L; ++l) {
            const double l2 = static_cast<double>(l) * l, m2 = static_cast<double>(m) * m;
            const double lm1 = static_cast<double>(l - 1);
            rec_a_[tri(l, m)] = std::sqrt((4.0 * l2 - 1.0) / (l2 - m2));
            rec_b_[tri(l, m)] = std::sqrt((lm1 * lm1 - m2) / (4.0 * lm1 * lm1 - 1.0));
        }
    pmm_factor_.assign(static_cast<std::size_t>(L + 1), 1.0);
    for (int m = 1; m <= L; ++m) pmm_factor_[static_cast<std::size_t>(m)] = std::sqrt((2.0 * m + 1.0) / (2.0 * m));
}

void SphereSpace::legendre_column(int m, int L, double x, double pmm, double* out) const {
    out[0] = pmm;
    if (L == m) return;
    out[1] = std::sqrt(2.0 * m + 3.0) * x * pmm;
    for (int l = m + 2; l <= L; ++l) {
        const std::size_t t = tri(l, m);
        out[l - m] = rec_a_[t] * (x * out[l - m - 1] - rec_b_[t] * out[l - m - 2]);
    }
}

void SphereSpace::eval_basis_all(const Point& p, std::size_t count, double* out) const {
    check_index(count);
    if (count == 0) return;
    const int L = degree_of_count(count);
    const double x = std::cos(p.u), s = std::sin(p.u);
    std::vector<double> col(static_cast<std::size_t>(L + 1));
    double pmm = 1.0;
    for (int m = 0; m <= L; ++m) {
        if (m > 0) pmm *= pmm_factor(m) * s;
        const bool dead = std::abs(pmm) < kUnderflow;
        if (!dead) legendre_column(m, L, x, pmm, col.data());
        const double cm = m == 0 ? 1.0 : kSqrt2 * std::cos(m * p.v);
        const double sm = m == 0 ? 0.0 : kSqrt2 * std::sin(m * p.v);
        for (int l = m; l <= L; ++l) {
            const double P = dead ? 0.0 : col[static_cast<std::size_t>(l - m)];
            const std::size_t base = static_cast<std::size_t>(l * l + l);
            if (base + m < count) out[base + m] = P * cm;
            if (m > 0 && base - m < count) out[base - m] = P * sm;
        }
    }
}

double SphereSpace::distance(const Point& x, const Point& y) const {
    const double ax = std::sin(x.u) * std::cos(x.v), ay = std::sin(x.u) * std::sin(x.v), az = std::cos(x.u);
    const double bx = std::sin(y.u) * std::cos(y.v), by = std::sin(y.u) * std::sin(y.v), bz = std::cos(y.u);
    const double cx = ay * bz - az * by, cy = az * bx - ax * bz, cz = ax * by - ay * bx;
    return std::atan2(std::sqrt(cx * cx + cy * cy + cz * cz), ax * bx + ay * by + az * bz);
}

double SphereSpace::ball_volume(const Point&, double t) const {
    if (!(t > 0.0)) throw DomainError("ball_volume requires t > 0");
    if (t >= kPi) return 1.0;
    return 0.5 * (1.0 - std::cos(t));
}

bool SphereSpace::valid(const Point& x) const {
    return std::isfinite(x.u) && std::isfinite(x.v) && x.u >= 0.0 && x.u <= kPi && x.v >= 0.0 && x.v < 2.0 * kPi;
}

Point SphereSpace::random_point(std::mt19937_64& rng) const {
    std::uniform_real_distribution<double> Z(-1.0, 1.0), U(0.0, 2.0 * kPi);
    const double z = Z(rng);
    return {std::acos(z), U(rng)};
}

QuadratureRule SphereSpace::quadrature_rule(double D) const {
    if (!(D >= 0.0) || !std::isfinite(D)) throw DomainError("quadrature degree must be finite and >= 0");
    const int L = degree_for(D);
    const int n_lat = L + 1, n_lon = 2 * L + 1;
    std::vector<double> x, w;
    gauss_legendre(n_lat, x, w);
    TensorGrid g;
    std::vector<double> lat_w;
    for (int i = n_lat - 1; i >= 0; --i) {
        g.u.push_back(std::acos(x[static_cast<std::size_t>(i)]));
        lat_w.push_back(0.5 * w[static_cast<std::size_t>(i)]);
    }
    for (int j = 0; j < n_lon; ++j) g.v.push_back(2.0 * kPi * j / n_lon);
    QuadratureRule q;
    q.nodes = NodeSet::from_grid(std::move(g));
    q.weights.resize(static_cast<Eigen::Index>(n_lat) * n_lon);
    for (int i = 0; i < n_lat; ++i)
        for (int j = 0; j < n_lon; ++j)
            q.weights[static_cast<Eigen::Index>(i) * n_lon + j] = lat_w[static_cast<std::size_t>(i)] / n_lon;
    return q;
}

Eigen::VectorXd SphereSpace::synthesize(const Eigen::VectorXd& coeffs, const NodeSet& nodes) const {
    if (!nodes.grid) return Space::synthesize(coeffs, nodes);
    const std::size_t count = static_cast<std::size_t>(coeffs.size());
    check_index(count);
    const auto& g = *nodes.grid;
    const Eigen::Index n_lat = static_cast<Eigen::Index>(g.u.size()), n_lon = static_cast<Eigen::Index>(g.v.size());
    if (count == 0) return Eigen::VectorXd::Zero(n_lat * n_lon);
    const int L = degree_of_count(count);
    Eigen::MatrixXd Ac = Eigen::MatrixXd::Zero(n_lat, L + 1), As = Eigen::MatrixXd::Zero(n_lat, L + 1);
    parallel_for(0, static_cast<std::size_t>(n_lat), [&](std::size_t i) {
        const double x = std::cos(g.u[i]), s = std::sin(g.u[i]);
        std::vector<double> col(static_cast<std::size_t>(L + 1));
        double pmm = 1.0;
        for (int m = 0; m <= L; ++m) {
            if (m > 0) pmm *= pmm_factor(m) * s;
            if (std::abs(pmm) < kUnderflow) break;
            legendre_column(m, L, x, pmm, col.data());
            double c = 0.0, d = 0.0;
            for (int l = m; l <= L; ++l) {
                const std::size_t base = static_cast<std::size_t>(l * l + l);
                const double P = col[static_cast<std::size_t>(l - m)];
                if (base + m < count) c += coeffs[static_cast<Eigen::Index>(base + m)] * P;
                if (m > 0 && base - m < count) d += coeffs[static_cast<Eigen::Index>(base - m)] * P;
            }
            const double f = m == 0 ? 1.0 : kSqrt2;
            Ac(static_cast<Eigen::Index>(i), m) = f * c;
            As(static_cast<Eigen::Index>(i), m) = f * d;
        }
    });
    Eigen::MatrixXd Cos(n_lon, L + 1), Sin(n_lon, L + 1);
    for (Eigen::Index j = 0; j < n_lon; ++j)
        for (int m = 0; m <= L; ++m) {
            Cos(j, m) = std::cos(m * g.v[static_cast<std::size_t>(j)]);
            Sin(j, m) = std::sin(m * g.v[static_cast<std::size_t>(j)]);
        }
    const Eigen::MatrixXd F = Ac * Cos.transpose() + As * Sin.transpose();
    Eigen::VectorXd out(n_lat * n_lon);
    for (Eigen::Index i = 0; i < n_lat; ++i)
        for (Eigen::Index j = 0; j < n_lon; ++j) out[i * n_lon + j] = F(i, j);
    return out;
}

Eigen::VectorXd SphereSpace::project(const Eigen::VectorXd& values, const NodeSet& nodes, std::size_t count) const {
    if (!nodes.grid) return Space::project(values, nodes, count);
    check_index(count);
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    if (count == 0) return out;
    const auto& g = *nodes.grid;
    const Eigen::Index n_lat = static_cast<Eigen::Index>(g.u.size()), n_lon = static_cast<Eigen::Index>(g.v.size());
    const int L = degree_of_count(count);
    Eigen::MatrixXd V(n_lat, n_lon);
    for (Eigen::Index i = 0; i < n_lat; ++i)
        for (Eigen::Index j = 0; j < n_lon; ++j) V(i, j) = values[i * n_lon + j];
    Eigen::MatrixXd Cos(n_lon, L + 1), Sin(n_lon, L + 1);
    for (Eigen::Index j = 0; j < n_lon; ++j)
        for (int m = 0; m <= L; ++m) {
            Cos(j, m) = std::cos(m * g.v[static_cast<std::size_t>(j)]);
            Sin(j, m) = std::sin(m * g.v[static_cast<std::size_t>(j)]);
        }
    const Eigen::MatrixXd Bc = V * Cos, Bs = V * Sin;
    // Sectoral seeds per latitude.
    Eigen::MatrixXd Pmm = Eigen::MatrixXd::Zero(n_lat, L + 1);
    for (Eigen::Index i = 0; i < n_lat; ++i) {
        const double s = std::sin(g.u[static_cast<std::size_t>(i)]);
        double pmm = 1.0;
        for (int m = 0; m <= L; ++m) {
            if (m > 0) pmm *= pmm_factor(m) * s;
            if (std::abs(pmm) < kUnderflow) break;
            Pmm(i, m) = pmm;
        }
    }
    parallel_for(0, static_cast<std::size_t>(L + 1), [&](std::size_t mi) {
        const int m = static_cast<int>(mi);
        std::vector<double> col(static_cast<std::size_t>(L + 1));
        const double f = m == 0 ? 1.0 : kSqrt2;
        for (Eigen::Index i = 0; i < n_lat; ++i) {
            if (Pmm(i, m) == 0.0) continue;
            legendre_column(m, L, std::cos(g.u[static_cast<std::size_t>(i)]), Pmm(i, m), col.data());
            const double bc = f * Bc(i, m), bs = f * Bs(i, m);
            for (int l = m; l <= L; ++l) {
                const std::size_t base = static_cast<std::size_t>(l * l + l);
                const double P = col[static_cast<std::size_t>(l - m)];
                if (base + m < count) out[static_cast<Eigen::Index>(base + m)] += P * bc;
                if (m > 0 && base - m < count) out[static_cast<Eigen::Index>(base - m)] += P * bs;
            }
        }
    });
    return out;
}

double SphereSpace::tail_power_sum(double cap, double q) const {
    if (!(q > 2.0)) throw DomainError("tail sum diverges for q <= alpha");
    const double beta = 0.5 * q;
    auto f = [beta](double l) { return (2.0 * l + 1.0) * std::pow(l * (l + 1.0), -beta); };
    const int a = degree_for(cap) + 1;
    const int head = std::max(a, 64);
    double sum = 0.0;
    for (int l = a; l < head; ++l) sum += f(static_cast<double>(l));
    const double x = static_cast<double>(head);
    const double u = x * (x + 1.0);
    const double df = 2.0 * std::pow(u, -beta) - beta * (2.0 * x + 1.0) * (2.0 * x + 1.0) * std::pow(u, -beta - 1.0);
    sum += std::pow(u, 1.0 - beta) / (beta - 1.0) + 0.5 * f(x) - df / 12.0;
    return sum;
}

}  // namespace diffcodec
