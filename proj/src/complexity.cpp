#include "diffcodec/complexity.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace diffcodec {

namespace {

constexpr std::size_t kMaxEntropyDim = 25;
constexpr std::uint64_t kMaxProposals = 4000000000ULL;

bool valid_width_p(double p) { return p == 2.0 || std::isinf(p); }

// Greedy selection in sample order: a sample joins when it is farther than
// sep from every selected point.
std::size_t greedy_select(const std::vector<Eigen::VectorXd>& pts, double sep) {
    const double sep2 = sep * sep;
    std::vector<const Eigen::VectorXd*> chosen;
    for (const auto& x : pts) {
        bool far = true;
        for (const auto* c : chosen)
            if ((x - *c).squaredNorm() <= sep2) {
                far = false;
                break;
            }
        if (far) chosen.push_back(&x);
    }
    return chosen.size();
}

}  // namespace

EllipsoidModel::EllipsoidModel(const Space& space, double s, double r, double N) : s_(s), r_(r), N_(N) {
    if (!(s > 0.0) || !(r > 0.0) || !(N >= 1.0)) throw DomainError("ellipsoid model needs s > 0, r > 0, N >= 1");
    const std::size_t n = space.count_upto(N);
    if (n > kMaxEntropyDim) throw DomainError("dimension too large for entropy estimates: " + std::to_string(n));
    for (std::size_t k = 0; k < n; ++k) lambdas_.push_back(space.lambda(k));
    for (double M = 1.0; M <= N; M *= 2.0) {
        const std::size_t idx = space.count_upto(M);
        if (idx < n) cuts_.push_back({M, idx});
    }
}

double EllipsoidModel::norm(const Eigen::VectorXd& c) const {
    if (static_cast<std::size_t>(c.size()) != dim()) throw DomainError("coefficient vector has the wrong dimension");
    double sup = 0.0;
    for (const auto& [M, idx] : cuts_)
        sup = std::max(sup, std::pow(M, s_) * c.tail(c.size() - static_cast<Eigen::Index>(idx)).norm());
    return c.norm() + sup;
}

double EllipsoidModel::lipschitz() const {
    double m = 0.0;
    for (const auto& cut : cuts_) m = std::max(m, std::pow(cut.first, s_));
    return 1.0 + m;
}

double ball_volume_log2(std::size_t n, double rho) {
    const double h = 0.5 * static_cast<double>(n);
    return h * std::log2(kPi) - std::lgamma(h + 1.0) / std::log(2.0) + static_cast<double>(n) * std::log2(rho);
}

BodySamples sample_body(const EllipsoidModel& model, std::size_t trials, std::uint64_t seed) {
    if (trials < 1) throw DomainError("covering estimate needs at least one sample");
    const std::size_t n = model.dim();
    const double r = model.r();
    // Uniform samples of the r-ball, kept when inside the body.
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G;
    std::uniform_real_distribution<double> U;
    BodySamples out;
    out.points.reserve(trials);
    Eigen::VectorXd x(static_cast<Eigen::Index>(n));
    while (out.points.size() < trials) {
        if (++out.proposals > kMaxProposals) throw std::runtime_error("rejection sampling of the body did not finish");
        for (auto& v : x) v = G(rng);
        x *= r * std::pow(U(rng), 1.0 / static_cast<double>(n)) / x.norm();
        if (model.contains(x)) out.points.push_back(x);
    }
    out.volume_log2 =
        std::log2(static_cast<double>(out.points.size()) / static_cast<double>(out.proposals)) + ball_volume_log2(n, r);
    return out;
}

CoveringEstimate covering_estimate(const EllipsoidModel& model, double eps, const BodySamples& body) {
    const double r = model.r();
    if (!(eps > 0.0) || eps > r) throw DomainError("covering estimate needs 0 < eps <= r");
    const std::size_t n = model.dim();
    CoveringEstimate out;
    out.samples = body.points.size();
    out.proposals = body.proposals;
    out.volume_log2 = body.volume_log2;

    out.packing = greedy_select(body.points, 2.0 * eps);
    out.lower_log2 = std::max({0.0, std::log2(static_cast<double>(out.packing)), out.volume_log2 - ball_volume_log2(n, eps)});

    if (eps >= r) {
        out.net = 1;
        out.upper_log2 = 0.0;
        return out;
    }
    const double grown = static_cast<double>(n) * std::log2(1.0 + eps * model.lipschitz() / (2.0 * r));
    out.upper_log2 = std::max(0.0, out.volume_log2 + grown - ball_volume_log2(n, eps / 2.0));
    out.net = greedy_select(body.points, eps);
    if (8 * out.net < out.samples) out.upper_log2 = std::min(out.upper_log2, std::log2(static_cast<double>(out.net)));
    return out;
}

CoveringEstimate covering_estimate(const EllipsoidModel& model, double eps, std::size_t trials, std::uint64_t seed) {
    if (!(eps > 0.0) || eps > model.r()) throw DomainError("covering estimate needs 0 < eps <= r");
    return covering_estimate(model, eps, sample_body(model, trials, seed));
}

nlohmann::json to_json(const WidthCurve& c) {
    nlohmann::json pts = nlohmann::json::array();
    for (std::size_t i = 0; i < c.N.size(); ++i) pts.push_back({{"N", c.N[i]}, {"eps_or_n", c.n[i]}, {"value", c.value[i]}});
    return {{"points", pts}, {"fit_slope", c.fit_slope}, {"theory_slope", c.theory_slope}, {"constant", c.constant}};
}

WidthCurve linear_width_upper(const Space& space, const Filter& filter, double s, double r, double p,
                              const std::vector<double>& N_grid, const std::vector<SpectralInput>* family) {
    if (!valid_width_p(p)) throw DomainError("linear widths are computed for p = 2 or inf");
    if (!(s > 0.0) || !(r > 0.0)) throw DomainError("widths need s > 0 and r > 0");
    if (N_grid.empty()) throw DomainError("empty N grid");
    const double N_max = *std::max_element(N_grid.begin(), N_grid.end());
    const double sob_max = 2.0 * N_max;

    std::vector<SpectralInput> members;
    if (family) {
        members = *family;
    } else {
        const double q = p == 2.0 ? l2_family_exponent(space, s) : linf_family_exponent(space, s);
        members.push_back(power_family(space, q, 4.0 * N_max));
        for (double N : N_grid) members.push_back(std::get<SpectralInput>(basis_input(space, space.count_upto(N))));
    }
    std::vector<double> scale;
    for (const auto& m : members) scale.push_back(r / sobolev_norm(space, filter, m, s, p, sob_max).value);

    WidthCurve c;
    c.theory_slope = -s / space.alpha();
    std::vector<double> lx, ly;
    for (double N : N_grid) {
        double v = 0.0;
        for (std::size_t i = 0; i < members.size(); ++i)
            v = std::max(v, scale[i] * sigma_error(space, filter, members[i], N, p));
        const double n = static_cast<double>(space.count_upto(N));
        c.N.push_back(N);
        c.n.push_back(n);
        c.value.push_back(v);
        c.constant = std::max(c.constant, v / (r * std::pow(n, c.theory_slope)));
        if (v > 0.0) {
            lx.push_back(std::log(n));
            ly.push_back(std::log(v));
        }
    }
    c.fit_slope = lx.size() >= 2 ? fit_slope(lx, ly) : -std::numeric_limits<double>::infinity();
    return c;
}

double bernstein_ratio(const Space& space, const Filter& filter, double s, double p, double N, const SpectralInput& f) {
    return std::pow(N, -s) * sobolev_norm(space, filter, f, s, p, 2.0 * N).value;
}

double bernstein_width_lower(const Space& space, const Filter& filter, double s, double r, double p, double N,
                             int trials, std::uint64_t seed) {
    if (trials < 100) throw DomainError("Bernstein width estimate needs at least 100 trials");
    if (!(r > 0.0) || !(N >= 1.0)) throw DomainError("Bernstein width needs r > 0 and N >= 1");
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> G;
    SpectralInput f;
    f.coeffs.resize(static_cast<Eigen::Index>(space.count_upto(2.0 * N)));
    double best = 0.0;
    for (int t = 0; t < trials; ++t) {
        for (auto& v : f.coeffs) v = G(rng);
        f.coeffs /= poly_lp_norm(space, f.coeffs, p);
        best = std::max(best, bernstein_ratio(space, filter, s, p, N, f));
    }
    return best;
}

}  // namespace diffcodec
