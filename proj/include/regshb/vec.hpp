#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

namespace regshb {

inline double dot(std::span<const double> a, std::span<const double> b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

inline double norm2_sq(std::span<const double> a) { return dot(a, a); }

inline double norm2(std::span<const double> a) { return std::sqrt(norm2_sq(a)); }

// y += alpha * x
inline void axpy(double alpha, std::span<const double> x, std::span<double> y) {
    for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

inline void fill(std::span<double> a, double v) {
    for (auto& e : a) e = v;
}

inline bool all_finite(std::span<const double> a) {
    for (double e : a)
        if (!std::isfinite(e)) return false;
    return true;
}

inline double max_abs(std::span<const double> a) {
    double m = 0.0;
    for (double e : a) m = std::max(m, std::abs(e));
    return m;
}

}  // namespace regshb
