#pragma once

#include <functional>
#include <string>

namespace diffcodec {

// Low-pass filter: H ≡ 1 on [0, 1/2], H ≡ 0 on [1, ∞), smooth and
// nonincreasing in between.
class Filter {
public:
    Filter(std::string name, std::function<double(double)> H);

    const std::string& name() const { return name_; }

    // Throws DomainError for negative or non-finite arguments.
    double H(double x) const;
    double h(double t) const;
    // g(t) = √max(0, h²(t/2) − h²(t)); supported in (1/2, 2).
    double g(double t) const;

private:
    std::string name_;
    std::function<double(double)> H_;
};

Filter standard_filter();

// The standard H evaluated directly; exposed for oracles and hot loops.
double standard_H(double x);

// |h(λ)|² + Σ_{j=0}^{n} |g(2^{−j}λ)|² − H(λ/2^{n+1}), in absolute value.
double partition_check(const Filter& filter, double lambda, int n);

}  // namespace diffcodec
