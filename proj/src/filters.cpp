#include "diffcodec/filters.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "diffcodec/common.hpp"

namespace diffcodec {

namespace {
constexpr double kEdge = 1e-9;
}

double standard_H(double x) {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("filter argument must be a finite nonnegative real");
    if (x <= 0.5 + kEdge) return 1.0;
    if (x >= 1.0 - kEdge) return 0.0;
    const double a = x - 0.5;
    const double b = x * (x - 1.0);
    const double exponent = a * a * (2.0 * x * x - 2.0 * x - 1.0) / (b * b);
    return std::exp(exponent);
}

Filter::Filter(std::string name, std::function<double(double)> H) : name_(std::move(name)), H_(std::move(H)) {}

double Filter::H(double x) const {
    if (!std::isfinite(x) || x < 0.0) throw DomainError("filter argument must be a finite nonnegative real");
    return H_(x);
}

double Filter::h(double t) const { return std::sqrt(H(t)); }

double Filter::g(double t) const {
    const double d = H(0.5 * t) - H(t);
    return std::sqrt(std::max(0.0, d));
}

Filter standard_filter() { return Filter("standard", standard_H); }

double partition_check(const Filter& filter, double lambda, int n) {
    if (n < 0) throw DomainError("partition_check requires n >= 0");
    if (lambda < 0.0) throw DomainError("partition_check requires lambda >= 0");
    double lhs = filter.H(lambda);
    double scale = 1.0;
    for (int j = 0; j <= n; ++j) {
        const double gj = filter.g(lambda * scale);
        lhs += gj * gj;
        scale *= 0.5;
    }
    return std::abs(lhs - filter.H(std::ldexp(lambda, -(n + 1))));
}

}  // namespace diffcodec
