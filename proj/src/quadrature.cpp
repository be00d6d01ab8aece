#include "htql/quadrature.hpp"

#include <cmath>
#include <stdexcept>
#include <vector>

namespace htql {

namespace {

constexpr double kLambda = 1.5707963267948966;  // pi/2
constexpr double kTmax = 5.6;

struct Axis {
    std::vector<double> y;
    std::vector<double> w;
};

Axis build_axis(double scale, double h) {
    Axis axis;
    int half = static_cast<int>(std::ceil(kTmax / h));
    axis.y.reserve(2 * half + 1);
    axis.w.reserve(2 * half + 1);
    for (int k = -half; k <= half; ++k) {
        double t = k * h;
        double sh = std::sinh(t);
        double ch = std::cosh(t);
        double e = std::exp(kLambda * sh);
        axis.y.push_back(scale * e);
        axis.w.push_back(h * scale * kLambda * ch * e);
    }
    return axis;
}

double tensor_pass(const std::function<double(const double*)>& f,
                   const std::vector<Axis>& axes, int& evals) {
    // Positive integrands: per-slice accumulation keeps summation error
    // well below the quadrature tolerance.
    const int d = static_cast<int>(axes.size());
    double total = 0.0;
    double point[3];
    switch (d) {
    case 1: {
        for (std::size_t i = 0; i < axes[0].y.size(); ++i) {
            point[0] = axes[0].y[i];
            total += axes[0].w[i] * f(point);
            ++evals;
        }
        break;
    }
    case 2: {
        for (std::size_t i = 0; i < axes[0].y.size(); ++i) {
            point[0] = axes[0].y[i];
            double slice = 0.0;
            for (std::size_t j = 0; j < axes[1].y.size(); ++j) {
                point[1] = axes[1].y[j];
                slice += axes[1].w[j] * f(point);
                ++evals;
            }
            total += axes[0].w[i] * slice;
        }
        break;
    }
    case 3: {
        for (std::size_t i = 0; i < axes[0].y.size(); ++i) {
            point[0] = axes[0].y[i];
            double plane = 0.0;
            for (std::size_t j = 0; j < axes[1].y.size(); ++j) {
                point[1] = axes[1].y[j];
                double slice = 0.0;
                for (std::size_t k = 0; k < axes[2].y.size(); ++k) {
                    point[2] = axes[2].y[k];
                    slice += axes[2].w[k] * f(point);
                    ++evals;
                }
                plane += axes[1].w[j] * slice;
            }
            total += axes[0].w[i] * plane;
        }
        break;
    }
    default:
        throw std::invalid_argument("quadrature supports 1 to 3 dimensions");
    }
    return total;
}

} // namespace

QuadratureResult integrate_positive_orthant(
    const std::function<double(const double*)>& integrand, std::span<const double> scales,
    double rel_tol) {
    const int d = static_cast<int>(scales.size());
    if (d < 1 || d > 3) throw std::invalid_argument("quadrature supports 1 to 3 dimensions");
    for (double s : scales)
        if (!(s > 0.0) || !std::isfinite(s))
            throw std::invalid_argument("quadrature scale hints must be positive");

    const double h_floor = d == 3 ? 0.04 : 0.02;
    QuadratureResult result;
    double previous = 0.0;
    bool have_previous = false;
    for (double h = 0.7; h > h_floor; h *= 0.5) {
        std::vector<Axis> axes;
        axes.reserve(static_cast<std::size_t>(d));
        for (double s : scales) axes.push_back(build_axis(s, h));
        double value = tensor_pass(integrand, axes, result.evaluations);
        if (have_previous) {
            result.error = std::abs(value - previous);
            result.value = value;
            if (result.error <= rel_tol * std::max(std::abs(value), 1e-300)) return result;
        }
        previous = value;
        have_previous = true;
        result.value = value;
    }
    return result;
}

} // namespace htql
