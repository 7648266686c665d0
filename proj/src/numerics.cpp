#include "tfd/numerics.hpp"

#include <cmath>
#include <stdexcept>

namespace tfd {

namespace {

double pairwise_sum_impl(const double* data, size_t n) {
    // Small blocks are folded directly; larger ones split at the midpoint so
    // the reduction tree is a function of n alone.
    if (n <= 32) {
        double s = 0.0;
        for (size_t q = 0; q < n; ++q) s += data[q];
        return s;
    }
    const size_t half = n / 2;
    return pairwise_sum_impl(data, half) + pairwise_sum_impl(data + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> values) {
    return pairwise_sum_impl(values.data(), values.size());
}

const QuadratureRule& gauss_legendre(int n) {
    static const QuadratureRule rules[5] = {
        {{0.0}, {2.0}},
        {{-0.5773502691896257645091488, 0.5773502691896257645091488}, {1.0, 1.0}},
        {{-0.7745966692414833770358531, 0.0, 0.7745966692414833770358531},
         {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0}},
        {{-0.8611363115940525752239465, -0.3399810435848562648026658,
          0.3399810435848562648026658, 0.8611363115940525752239465},
         {0.3478548451374538573730639, 0.6521451548625461426269361,
          0.6521451548625461426269361, 0.3478548451374538573730639}},
        {{-0.9061798459386639927976269, -0.5384693101056830910363144, 0.0,
          0.5384693101056830910363144, 0.9061798459386639927976269},
         {0.2369268850561890875142640, 0.4786286704993664680412915, 128.0 / 225.0,
          0.4786286704993664680412915, 0.2369268850561890875142640}}};
    if (n < 1 || n > 5) throw std::invalid_argument("gauss_legendre: order must be in [1,5]");
    return rules[n - 1];
}

double smoothstep4(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    // 126 t^5 - 420 t^6 + 540 t^7 - 315 t^8 + 70 t^9
    return ((((70.0 * t - 315.0) * t + 540.0) * t - 420.0) * t + 126.0) * t * t * t * t * t;
}

double smoothstep4_d1(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double u = t * (1.0 - t);
    return 630.0 * u * u * u * u;
}

double smoothstep4_d2(double t) {
    if (t <= 0.0 || t >= 1.0) return 0.0;
    const double u = t * (1.0 - t);
    return 2520.0 * u * u * u * (1.0 - 2.0 * t);
}

double Falloff::value(double r) const {
    if (r <= a) return 1.0;
    if (r >= b) return 0.0;
    return 1.0 - smoothstep4((r - a) / (b - a));
}

double Falloff::d1(double r) const {
    if (r <= a || r >= b) return 0.0;
    const double w = b - a;
    return -smoothstep4_d1((r - a) / w) / w;
}

double Falloff::d2(double r) const {
    if (r <= a || r >= b) return 0.0;
    const double w = b - a;
    return -smoothstep4_d2((r - a) / w) / (w * w);
}

double least_squares_slope(std::span<const double> x, std::span<const double> y) {
    if (x.size() != y.size() || x.size() < 2)
        throw std::invalid_argument("least_squares_slope: need matching arrays of size >= 2");
    const double n = static_cast<double>(x.size());
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    for (size_t q = 0; q < x.size(); ++q) {
        sx += x[q];
        sy += y[q];
        sxx += x[q] * x[q];
        sxy += x[q] * y[q];
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace tfd
