#include "diffcodec/kernels.hpp"

#include <algorithm>
#include <boost/math/special_functions/gamma.hpp>
#include <cmath>
#include <limits>

#include "diffcodec/parallel.hpp"

namespace diffcodec {

namespace {

// Below this a heat-kernel value is indistinguishable from rounding in the
// partial sum, so it carries no information about Gaussian decay.
constexpr double kHeatFloor = 1e-8;

std::vector<double> basis_row(const Space& s, const Point& x, std::size_t count) {
    if (!s.valid(x)) throw DomainError("point outside the fundamental domain of " + s.id());
    std::vector<double> row(count);
    if (count > 0) s.eval_basis_all(x, count, row.data());
    return row;
}

}  // namespace

void validate(const KernelSpec& spec) {
    if (spec.space == nullptr || spec.filter == nullptr) throw DomainError("kernel needs a space and a filter");
    if (!(spec.N > 0.0) || !std::isfinite(spec.N)) throw DomainError("kernel order N must be positive");
    if (spec.dilation != 1 && spec.dilation != 2) throw DomainError("kernel dilation must be 1 or 2");
}

std::size_t KernelSpec::count() const {
    validate(*this);
    return space->count_below(band());
}

Eigen::VectorXd KernelSpec::weights() const {
    const std::size_t n = count();
    Eigen::VectorXd w(static_cast<Eigen::Index>(n));
    const auto& spec = space->spectrum();
    for (std::size_t k = 0; k < n; ++k) w[static_cast<Eigen::Index>(k)] = filter->H(spec[k].lambda / band());
    return w;
}

double eval_kernel(const KernelSpec& spec, const Point& x, const Point& y) {
    const Eigen::VectorXd w = spec.weights();
    const std::size_t n = static_cast<std::size_t>(w.size());
    const std::vector<double> a = basis_row(*spec.space, x, n);
    const std::vector<double> b = basis_row(*spec.space, y, n);
    double acc = 0.0;
    for (std::size_t k = 0; k < n; ++k) acc += w[static_cast<Eigen::Index>(k)] * (a[k] * b[k]);
    return acc;
}

Eigen::MatrixXd kernel_matrix(const KernelSpec& spec, const NodeSet& xs, const NodeSet& ys) {
    const Eigen::VectorXd w = spec.weights();
    const std::size_t n = static_cast<std::size_t>(w.size());
    const Eigen::MatrixXd Bx = spec.space->basis_matrix(xs, n);
    const Eigen::MatrixXd By = spec.space->basis_matrix(ys, n);
    return Bx * w.asDiagonal() * By.transpose();
}

HeatValue eval_heat_kernel(const Space& space, double t, const Point& x, const Point& y) {
    if (!(t > 0.0) || !std::isfinite(t)) throw DomainError("heat kernel needs t > 0");
    const double L = std::sqrt(-std::log(kHeatTruncation) / t);
    const auto& spec = space.spectrum();
    std::size_t n = 0;
    while (n < spec.size() && spec[n].lambda <= L) ++n;

    HeatValue out;
    out.terms = n;
    const bool all_stored = n == spec.size();
    if (all_stored && space.spectrum_complete()) {
        out.tail_bound = 0.0;
    } else {
        // Σ_{λ_k > L₀} e^{−tλ_k²} ≤ ∫_{L₀}^∞ Cλ^α d(−e^{−tλ²}) = C t^{−α/2} Γ(α/2 + 1, tL₀²),
        // and |Σ c_k φ_k(x)φ_k(y)| is controlled by the diagonal sums.
        const double L0 = std::max(1.0, all_stored ? space.lambda_cap() : L);
        const double a = space.alpha() / 2.0 + 1.0;
        out.tail_bound = space.weyl_constant() * std::pow(t, -space.alpha() / 2.0) * boost::math::tgamma(a, t * L0 * L0);
    }
    if (out.tail_bound > kHeatTailLimit)
        throw SpectrumExhausted("heat kernel at t = " + std::to_string(t) + " needs more spectrum than " + space.id() +
                                " stores (tail bound " + std::to_string(out.tail_bound) + ")");

    const std::vector<double> a = basis_row(space, x, n);
    const std::vector<double> b = basis_row(space, y, n);
    double acc = 0.0;
    for (std::size_t k = n; k-- > 0;) acc += std::exp(-spec[k].lambda * spec[k].lambda * t) * (a[k] * b[k]);
    out.value = acc;
    return out;
}

nlohmann::json to_json(const AuditRecord& r) {
    return {{"check", r.check}, {"N", r.N}, {"statistic", r.statistic}, {"threshold", r.threshold}, {"pass", r.pass}};
}

LocalizationReport localization_audit(const Space& space, const Filter& filter, int dilation, double S,
                                      const std::vector<std::pair<Point, Point>>& pairs,
                                      const std::vector<double>& Ns) {
    if (!(S > space.alpha())) throw DomainError("localization exponent S must exceed alpha");
    if (Ns.empty() || pairs.empty()) throw DomainError("localization audit needs pairs and orders");
    std::vector<double> rho(pairs.size());
    for (std::size_t i = 0; i < pairs.size(); ++i) {
        rho[i] = space.distance(pairs[i].first, pairs[i].second);
        if (!(rho[i] > 0.0)) throw DomainError("localization pairs must be distinct points");
    }
    std::vector<double> bucket(Ns.size(), 0.0);
    parallel_for(0, Ns.size(), [&](std::size_t j) {
        KernelSpec spec{&space, &filter, Ns[j], dilation};
        const double scale = std::pow(Ns[j], S - space.alpha());
        double m = 0.0;
        for (std::size_t i = 0; i < pairs.size(); ++i)
            m = std::max(m, std::abs(eval_kernel(spec, pairs[i].first, pairs[i].second)) * std::pow(rho[i], S) * scale);
        bucket[j] = m;
    });

    constexpr double kStableSpread = 10.0;
    LocalizationReport rep;
    const double lo = *std::min_element(bucket.begin(), bucket.end());
    const double hi = *std::max_element(bucket.begin(), bucket.end());
    rep.max_statistic = hi;
    rep.spread = lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
    rep.stable = rep.spread <= kStableSpread;
    for (std::size_t j = 0; j < Ns.size(); ++j)
        rep.buckets.push_back({"localization", Ns[j], bucket[j], kStableSpread * lo, bucket[j] <= kStableSpread * lo});
    return rep;
}

double l1_mass_audit(const KernelSpec& spec, const QuadratureMeasure& q) {
    validate(spec);
    if (q.certified_order + 1e-12 < spec.N)
        throw DomainError("l1 mass audit needs a quadrature of order at least N");
    const Eigen::MatrixXd K = kernel_matrix(spec, q.nodes, q.nodes);
    const Eigen::VectorXd w = q.abs_weights();
    return (K.cwiseAbs() * w).maxCoeff();
}

int restricted_gram_rank(const Space& space, const Point& center, double radius, std::size_t K,
                         const NodeSet& dense_nodes, double rel_tol) {
    if (!(rel_tol > 0.0)) throw DomainError("rank tolerance must be positive");
    if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
    if (K == 0) throw DomainError("restricted Gram rank needs K >= 1");
    if (dense_nodes.size() < 4 * K) throw DomainError("restricted Gram rank needs at least 4K nodes");
    for (const Point& p : dense_nodes.points)
        if (space.distance(center, p) > radius * (1.0 + 1e-12)) throw DomainError("dense node outside the ball");
    const Eigen::MatrixXd B = space.basis_matrix(dense_nodes, K);
    const Eigen::BDCSVD<Eigen::MatrixXd> svd(B);
    const Eigen::VectorXd& sv = svd.singularValues();
    const double tol = rel_tol * sv[0];
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i)
        if (sv[i] > tol) ++rank;
    return rank;
}

HeatDiagnostics heat_diagnostics(const Space& space, const std::vector<double>& ts, const std::vector<Point>& diag_points,
                                 const std::vector<std::pair<Point, Point>>& pairs, const HeatThresholds& thr) {
    if (ts.empty() || diag_points.empty()) throw DomainError("heat diagnostics need times and points");
    const double half_alpha = space.alpha() / 2.0;
    HeatDiagnostics d;
    d.diag_lo = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        double lo = std::numeric_limits<double>::infinity();
        for (const Point& x : diag_points) {
            const double v = std::pow(t, half_alpha) * eval_heat_kernel(space, t, x, x).value;
            lo = std::min(lo, v);
            d.diag_hi = std::max(d.diag_hi, v);
        }
        d.diag_lo = std::min(d.diag_lo, lo);
        d.records.push_back({"heat_diagonal_lower", t, lo, thr.diag_min, lo >= thr.diag_min});
    }
    const double ratio = d.diag_lo > 0.0 ? d.diag_hi / d.diag_lo : std::numeric_limits<double>::infinity();
    d.records.push_back({"heat_diagonal_ratio", 0.0, ratio, thr.diag_ratio, ratio <= thr.diag_ratio});

    // Fit log(t^{α/2} G) ≈ b − c·ρ²/t by least squares.
    struct Sample {
        double x, scaled;
    };
    std::vector<Sample> samples;
    for (double t : ts)
        for (const auto& [x, y] : pairs) {
            const double rho = space.distance(x, y);
            const double g = eval_heat_kernel(space, t, x, y).value;
            if (rho > 0.0 && g > kHeatFloor) samples.push_back({rho * rho / t, std::pow(t, half_alpha) * g});
        }
    if (samples.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (const auto& s : samples) {
            mx += s.x;
            my += std::log(s.scaled);
        }
        mx /= static_cast<double>(samples.size());
        my /= static_cast<double>(samples.size());
        double sxy = 0.0, sxx = 0.0;
        for (const auto& s : samples) {
            sxy += (s.x - mx) * (std::log(s.scaled) - my);
            sxx += (s.x - mx) * (s.x - mx);
        }
        d.c_fit = sxx > 0.0 ? -sxy / sxx : 0.0;
    }
    const double c = d.c_fit > 0.0 ? d.c_fit / 2.0 : 0.0;
    for (const auto& s : samples) d.gauss_sup = std::max(d.gauss_sup, s.scaled * std::exp(c * s.x));
    d.records.push_back({"heat_gaussian_upper", 0.0, d.gauss_sup, thr.gauss_max, d.c_fit > 0.0 && d.gauss_sup <= thr.gauss_max});
    return d;
}

}  // namespace diffcodec
