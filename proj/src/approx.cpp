#include "diffcodec/approx.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace diffcodec {

namespace {

bool valid_p(double p) { return p == 1.0 || p == 2.0 || std::isinf(p); }

void require_p(double p) {
    if (!valid_p(p)) throw DomainError("p must be 1, 2 or inf");
}

// f̂_k for k < count, drawing on the tail past the stored block.
Eigen::VectorXd coefficient_block(const Space& space, const SpectralInput& f, std::size_t count) {
    Eigen::VectorXd c = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(count));
    const std::size_t stored = std::min(count, static_cast<std::size_t>(f.coeffs.size()));
    c.head(static_cast<Eigen::Index>(stored)) = f.coeffs.head(static_cast<Eigen::Index>(stored));
    if (f.tail && count > stored) {
        if (count > space.dimension()) throw SpectrumExhausted("tail coefficients beyond the spectrum cap of " + space.id());
        for (std::size_t k = stored; k < count; ++k)
            c[static_cast<Eigen::Index>(k)] = f.tail->scale * std::pow(space.spectrum()[k].lambda, -f.tail->q);
    }
    return c;
}

// Σ_{k ≥ count} |f̂_k|²; count must close an eigenvalue shell when a tail
// is present.
double energy_after(const Space& space, const SpectralInput& f, std::size_t count) {
    const std::size_t stored = static_cast<std::size_t>(f.coeffs.size());
    const std::size_t end = std::max(count, stored);
    double e = 0.0;
    if (end > count) e += coefficient_block(space, f, end).tail(static_cast<Eigen::Index>(end - count)).squaredNorm();
    if (f.tail) {
        if (end == 0) throw DomainError("a tail needs at least one stored coefficient");
        e += f.tail->scale * f.tail->scale * space.tail_power_sum(space.spectrum()[end - 1].lambda, 2.0 * f.tail->q);
    }
    return e;
}

Eigen::VectorXd filter_weights(const Space& space, const Filter& filter, double N, std::size_t count) {
    Eigen::VectorXd w(static_cast<Eigen::Index>(count));
    for (std::size_t k = 0; k < count; ++k) w[static_cast<Eigen::Index>(k)] = filter.H(space.spectrum()[k].lambda / N);
    return w;
}

// ⟨f, φ_k⟩ for k < count: exact for spectral input, against μ_N otherwise.
Eigen::VectorXd inner_products(const Space& space, double N, const FunctionInput& f, const QuadratureMeasure* mu_N,
                               std::size_t count) {
    if (const auto* sp = std::get_if<SpectralInput>(&f)) return coefficient_block(space, *sp, count);
    if (mu_N == nullptr) throw DomainError("sampled and callback input need a quadrature measure");
    if (mu_N->space_id != space.id()) throw DomainError("quadrature belongs to a different space");
    if (mu_N->certified_order + 1e-12 < N)
        throw CertificationError("quadrature of order " + std::to_string(mu_N->certified_order) +
                                 " cannot serve sigma_N with N = " + std::to_string(N));
    Eigen::VectorXd values;
    if (const auto* sa = std::get_if<SampledInput>(&f)) {
        if (sa->node_set != node_set_id(*mu_N) || static_cast<std::size_t>(sa->values.size()) != mu_N->support())
            throw DomainError("samples were taken on a different quadrature");
        values = sa->values;
    } else {
        values = sample(std::get<CallbackInput>(f), *mu_N).values;
    }
    return space.project(values.cwiseProduct(mu_N->weights), mu_N->nodes, count);
}

// Smallest prefix holding every nonzero coefficient.
Eigen::Index effective_size(const Eigen::VectorXd& c) {
    Eigen::Index n = c.size();
    while (n > 0 && c[n - 1] == 0.0) --n;
    return n;
}

double poly_lp_norm_on(const Space& space, const Eigen::VectorXd& coeffs, double p, const QuadratureMeasure& rule) {
    return lp_norm(space.synthesize(coeffs, rule.nodes), rule.weights, p);
}

QuadratureMeasure dense_rule(const Space& space, double band) {
    return reference_quadrature(space, kDenseFactor * std::max(band, 1.0));
}

}  // namespace

FunctionInput basis_input(const Space& space, std::size_t k, double coefficient) {
    if (k >= space.dimension()) throw SpectrumExhausted("basis index beyond the spectrum cap of " + space.id());
    SpectralInput f;
    f.coeffs = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(k + 1));
    f.coeffs[static_cast<Eigen::Index>(k)] = coefficient;
    return f;
}

SampledInput sample(const CallbackInput& f, const QuadratureMeasure& q) {
    SampledInput s;
    s.values.resize(static_cast<Eigen::Index>(q.support()));
    for (std::size_t i = 0; i < q.support(); ++i) {
        const double v = f.f(q.nodes.points[i]);
        if (!std::isfinite(v)) throw DomainError("callback returned a non-finite value");
        s.values[static_cast<Eigen::Index>(i)] = v;
    }
    s.node_set = node_set_id(q);
    return s;
}

Eigen::VectorXd DiffusionPolynomial::evaluate(const NodeSet& nodes) const {
    if (space == nullptr) throw DomainError("polynomial without a space");
    if (coeffs.size() == 0) return Eigen::VectorXd::Zero(static_cast<Eigen::Index>(nodes.size()));
    return space->synthesize(coeffs, nodes);
}

DiffusionPolynomial sigma(const Space& space, const Filter& filter, double N, const FunctionInput& f,
                          const QuadratureMeasure* mu_N) {
    if (!(N > 0.0) || !std::isfinite(N)) throw DomainError("sigma needs N > 0");
    const std::size_t count = space.count_below(N);
    DiffusionPolynomial out{&space, filter_weights(space, filter, N, count), N};
    out.coeffs.array() *= inner_products(space, N, f, mu_N, count).array();
    return out;
}

DiffusionPolynomial tau(const Space& space, const Filter& filter, double N, const FunctionInput& f,
                        const QuadratureMeasure* mu_N) {
    if (!(N >= 2.0) || !std::isfinite(N)) throw DomainError("tau needs N >= 2");
    const std::size_t count = space.count_below(N);
    Eigen::VectorXd w = filter_weights(space, filter, N, count) - filter_weights(space, filter, N / 2.0, count);
    DiffusionPolynomial out{&space, w, N};
    out.coeffs.array() *= inner_products(space, N, f, mu_N, count).array();
    return out;
}

double poly_lp_norm(const Space& space, const Eigen::VectorXd& coeffs, double p) {
    require_p(p);
    if (p == 2.0) return coeffs.norm();
    const Eigen::Index n = effective_size(coeffs);
    if (n == 0) return 0.0;
    if (n == 1) return std::abs(coeffs[0]);
    return poly_lp_norm_on(space, coeffs.head(n), p, dense_rule(space, space.lambda(static_cast<std::size_t>(n - 1))));
}

double input_lp_norm(const Space& space, const SpectralInput& f, double p) {
    require_p(p);
    if (p == 2.0) return std::sqrt(f.coeffs.squaredNorm() + energy_after(space, f, static_cast<std::size_t>(f.coeffs.size())));
    return poly_lp_norm(space, f.coeffs, p);
}

double difference_lp_norm(const Space& space, const SpectralInput& f, const Eigen::VectorXd& g, double p) {
    require_p(p);
    const std::size_t n = std::max(static_cast<std::size_t>(f.coeffs.size()), static_cast<std::size_t>(g.size()));
    Eigen::VectorXd diff = coefficient_block(space, f, n);
    diff.head(g.size()) -= g;
    if (p == 2.0) return std::sqrt(diff.squaredNorm() + energy_after(space, f, n));
    return poly_lp_norm(space, diff, p);
}

ApproxError best_approx_error(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p) {
    require_p(p);
    if (p == 2.0) return {std::sqrt(energy_after(space, f, space.count_upto(N))), false};
    return {sigma_error(space, filter, f, 2.0 * N, p), true};
}

double sigma_error(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p) {
    require_p(p);
    const std::size_t count = space.count_below(N);
    const Eigen::VectorXd w = filter_weights(space, filter, N, count);
    if (p == 2.0) {
        const Eigen::VectorXd c = coefficient_block(space, f, count);
        const double inside = ((1.0 - w.array()) * c.array()).matrix().squaredNorm();
        return std::sqrt(inside + energy_after(space, f, count));
    }
    const std::size_t n = std::max(count, static_cast<std::size_t>(f.coeffs.size()));
    Eigen::VectorXd diff = coefficient_block(space, f, n);
    diff.head(static_cast<Eigen::Index>(count)).array() *= (1.0 - w.array());
    return poly_lp_norm(space, diff, p);
}

double tau_norm(const Space& space, const Filter& filter, const SpectralInput& f, double N, double p) {
    return poly_lp_norm(space, tau(space, filter, N, f).coeffs, p);
}

double sigma_error(const Space& space, const Filter& filter, const CallbackInput& f, double N, double p,
                   const QuadratureFamily& family, double eval_band) {
    require_p(p);
    const DiffusionPolynomial s = sigma(space, filter, N, f, &family.at(N));
    const QuadratureMeasure rule = dense_rule(space, std::max(eval_band, N));
    const Eigen::VectorXd fv = sample(f, rule).values;
    return lp_norm(fv - s.evaluate(rule.nodes), rule.weights, p);
}

SobolevNorm sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                         double N_max) {
    if (!(s > 0.0)) throw DomainError("Sobolev order s must be positive");
    require_p(p);
    SobolevNorm out;
    out.lp_part = input_lp_norm(space, f, p);
    for (double N = 1.0; N <= N_max; N *= 2.0) {
        const ApproxError e = best_approx_error(space, filter, f, N, p);
        out.surrogate = out.surrogate || e.surrogate;
        const double v = std::pow(N, s) * e.value;
        if (v > out.sup_part) {
            out.sup_part = v;
            out.argmax_N = N;
        }
    }
    out.value = out.lp_part + out.sup_part;
    return out;
}

SobolevNorm local_sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                               const Ball& ball, double N_max) {
    if (!(s > 0.0)) throw DomainError("Sobolev order s must be positive");
    if (!(ball.radius > 0.0)) throw DomainError("ball must have positive radius");
    if (!(N_max >= 2.0)) throw DomainError("local Sobolev norm needs N_max >= 2");
    require_p(p);
    const QuadratureMeasure rule = dense_rule(space, N_max);
    Eigen::VectorXd w = rule.weights;
    std::size_t inside = 0;
    for (std::size_t i = 0; i < rule.support(); ++i) {
        if (space.distance(ball.center, rule.nodes.points[i]) <= ball.radius)
            ++inside;
        else
            w[static_cast<Eigen::Index>(i)] = 0.0;
    }
    if (inside == 0) throw DomainError("ball contains no reference nodes");

    SobolevNorm out;
    out.lp_part = input_lp_norm(space, f, p);
    for (double N = 2.0; N <= N_max; N *= 2.0) {
        const DiffusionPolynomial t = tau(space, filter, N, f);
        const double v = std::pow(N, s) * lp_norm(t.evaluate(rule.nodes), w, p);
        if (v > out.sup_part) {
            out.sup_part = v;
            out.argmax_N = N;
        }
    }
    out.value = out.lp_part + out.sup_part;
    return out;
}

SobolevNorm tau_sobolev_norm(const Space& space, const Filter& filter, const SpectralInput& f, double s, double p,
                             double N_max) {
    return local_sobolev_norm(space, filter, f, s, p, Ball{Point{}, 2.0 * space.diameter()}, N_max);
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw DomainError("slope fit needs two or more points");
    const double n = static_cast<double>(x.size());
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxy += (x[i] - mx) * (y[i] - my);
        sxx += (x[i] - mx) * (x[i] - mx);
    }
    if (sxx == 0.0) throw DomainError("slope fit needs distinct abscissae");
    return sxy / sxx;
}

namespace {

template <typename ErrorFn>
SmoothnessEstimate estimate_from(const Space& space, const SpectralInput& f, const std::vector<double>& N_grid,
                                 ErrorFn error) {
    if (N_grid.size() < 4) throw DomainError("smoothness estimate needs at least 4 grid points");
    SmoothnessEstimate est;
    const double scale = std::max(input_lp_norm(space, f, 2.0), std::numeric_limits<double>::min());
    std::vector<double> lx, ly;
    for (double N : N_grid) {
        const double e = error(N);
        est.errors.push_back(e);
        if (e <= 1e-14 * scale) est.band_limited = true;
        lx.push_back(std::log(N));
        ly.push_back(std::log(e));
    }
    est.s = est.band_limited ? std::numeric_limits<double>::infinity() : -fit_slope(lx, ly);
    return est;
}

}  // namespace

SmoothnessEstimate estimate_smoothness(const Space& space, const Filter& filter, const SpectralInput& f, double p,
                                       const std::vector<double>& N_grid) {
    return estimate_from(space, f, N_grid, [&](double N) { return sigma_error(space, filter, f, N, p); });
}

SmoothnessEstimate estimate_smoothness_tau(const Space& space, const Filter& filter, const SpectralInput& f, double p,
                                           const std::vector<double>& N_grid) {
    return estimate_from(space, f, N_grid, [&](double N) { return tau_norm(space, filter, f, N, p); });
}

}  // namespace diffcodec
