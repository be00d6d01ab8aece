// distribution.hpp - Regularly varying positive distributions.
//
// Only Pareto and Lomax are admitted: both have tails that are regularly
// varying of index -nu with closed-form residual-lifetime tails and
// closed-form inverse CDFs. Families without regular variation (Weibull,
// lognormal, ...) are rejected at construction because the asymptotic
// theory this library implements does not hold for them.
#pragma once

#include <cstdint>
#include <string>

namespace htql {

enum class TailKind : std::uint8_t {
    pareto, // P{X > x} = (x / scale)^-nu for x >= scale, 1 below
    lomax,  // P{X > x} = (1 + x / scale)^-nu for x >= 0
};

class HeavyTailDist {
public:
    static HeavyTailDist pareto(double scale, double index);
    static HeavyTailDist lomax(double scale, double index);

    TailKind kind() const { return kind_; }
    double scale() const { return scale_; }
    double index() const { return index_; }

    double mean() const;

    // P{X > x}
    double tail(double x) const;

    // Residual-lifetime tail P{X^r > x} = (1/E X) * integral_x^inf P{X > y} dy.
    double residual_tail(double x) const;

    // Inverse CDFs, parameterized by the tail probability u in (0, 1):
    // sample(u) is the x with tail(x) = u, residual_sample likewise for X^r.
    double sample(double u) const;
    double residual_sample(double u) const;

    // Same shape with all traffic/size units multiplied by k (> 0).
    HeavyTailDist scaled(double k) const;

    bool operator==(const HeavyTailDist&) const = default;

    std::string describe() const;

private:
    HeavyTailDist(TailKind kind, double scale, double index);

    TailKind kind_;
    double scale_;
    double index_;
};

} // namespace htql
