#include "htql/distribution.hpp"

#include <cmath>
#include <sstream>
#include <stdexcept>

namespace htql {

HeavyTailDist::HeavyTailDist(TailKind kind, double scale, double index)
    : kind_(kind), scale_(scale), index_(index) {
    if (!(scale > 0.0) || !std::isfinite(scale))
        throw std::invalid_argument("heavy-tail scale must be positive and finite");
    if (!(index > 1.0) || !std::isfinite(index))
        throw std::invalid_argument("heavy-tail index must exceed 1 (finite mean required)");
}

HeavyTailDist HeavyTailDist::pareto(double scale, double index) {
    return HeavyTailDist(TailKind::pareto, scale, index);
}

HeavyTailDist HeavyTailDist::lomax(double scale, double index) {
    return HeavyTailDist(TailKind::lomax, scale, index);
}

double HeavyTailDist::mean() const {
    switch (kind_) {
    case TailKind::pareto: return index_ * scale_ / (index_ - 1.0);
    case TailKind::lomax: return scale_ / (index_ - 1.0);
    }
    return 0.0;
}

double HeavyTailDist::tail(double x) const {
    if (x <= 0.0) return 1.0;
    switch (kind_) {
    case TailKind::pareto:
        return x <= scale_ ? 1.0 : std::pow(x / scale_, -index_);
    case TailKind::lomax:
        return std::pow(1.0 + x / scale_, -index_);
    }
    return 0.0;
}

double HeavyTailDist::residual_tail(double x) const {
    if (x <= 0.0) return 1.0;
    switch (kind_) {
    case TailKind::pareto: {
        // integral_x^inf tail = (xm - x) + xm/(nu-1) below the scale,
        //                       xm^nu * x^(1-nu) / (nu-1) above it.
        if (x <= scale_)
            return (scale_ - x + scale_ / (index_ - 1.0)) / mean();
        return std::pow(scale_, index_ - 1.0) * std::pow(x, 1.0 - index_) / index_;
    }
    case TailKind::lomax:
        // The residual of Lomax(s, nu) is Lomax(s, nu - 1).
        return std::pow(1.0 + x / scale_, 1.0 - index_);
    }
    return 0.0;
}

double HeavyTailDist::sample(double u) const {
    switch (kind_) {
    case TailKind::pareto: return scale_ * std::pow(u, -1.0 / index_);
    case TailKind::lomax: return scale_ * (std::pow(u, -1.0 / index_) - 1.0);
    }
    return 0.0;
}

double HeavyTailDist::residual_sample(double u) const {
    switch (kind_) {
    case TailKind::pareto: {
        // Tail value at the scale point is 1/nu; below it the residual
        // tail is linear in x, above it a pure power.
        if (u <= 1.0 / index_)
            return scale_ * std::pow(index_ * u, -1.0 / (index_ - 1.0));
        return scale_ * index_ * (1.0 - u) / (index_ - 1.0);
    }
    case TailKind::lomax:
        return scale_ * (std::pow(u, -1.0 / (index_ - 1.0)) - 1.0);
    }
    return 0.0;
}

HeavyTailDist HeavyTailDist::scaled(double k) const {
    if (!(k > 0.0)) throw std::invalid_argument("distribution scale factor must be positive");
    return HeavyTailDist(kind_, scale_ * k, index_);
}

std::string HeavyTailDist::describe() const {
    std::ostringstream os;
    os << (kind_ == TailKind::pareto ? "pareto" : "lomax") << "(scale=" << scale_
       << ",index=" << index_ << ")";
    return os.str();
}

} // namespace htql
