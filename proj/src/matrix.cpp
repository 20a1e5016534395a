// SPDX-License-Identifier: MIT
#include "soilrf/matrix.hpp"

#include <cmath>

namespace soilrf {

std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b,
                                        size_t n) {
    if (a.size() != n * n || b.size() != n)
        fail(ErrorKind::contract, "solve: matrix/vector shape mismatch");
    for (size_t col = 0; col < n; ++col) {
        size_t pivot = col;
        double best = std::abs(a[col * n + col]);
        for (size_t r = col + 1; r < n; ++r) {
            double v = std::abs(a[r * n + col]);
            if (v > best) {
                best = v;
                pivot = r;
            }
        }
        if (best < 1e-12)
            fail(ErrorKind::numeric, "solve: singular or near-singular system");
        if (pivot != col) {
            for (size_t c = 0; c < n; ++c)
                std::swap(a[col * n + c], a[pivot * n + c]);
            std::swap(b[col], b[pivot]);
        }
        double d = a[col * n + col];
        for (size_t r = col + 1; r < n; ++r) {
            double factor = a[r * n + col] / d;
            if (factor == 0.0)
                continue;
            for (size_t c = col; c < n; ++c)
                a[r * n + c] -= factor * a[col * n + c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n, 0.0);
    for (size_t i = n; i-- > 0;) {
        double acc = b[i];
        for (size_t c = i + 1; c < n; ++c)
            acc -= a[i * n + c] * x[c];
        x[i] = acc / a[i * n + i];
    }
    return x;
}

} // namespace soilrf
