// SPDX-License-Identifier: MIT
#ifndef SOILRF_MATRIX_HPP
#define SOILRF_MATRIX_HPP

#include <cstddef>
#include <vector>

#include "soilrf/error.hpp"

namespace soilrf {

// Dense row-major matrix of doubles; just enough linear algebra for the
// pipeline (no external dependency wanted in the shared library).
struct Matrix {
    size_t rows = 0;
    size_t cols = 0;
    std::vector<double> d;

    Matrix() = default;
    Matrix(size_t r, size_t c) : rows(r), cols(c), d(r * c, 0.0) {}

    double& at(size_t r, size_t c) { return d[r * cols + c]; }
    double at(size_t r, size_t c) const { return d[r * cols + c]; }
    double* row(size_t r) { return d.data() + r * cols; }
    const double* row(size_t r) const { return d.data() + r * cols; }
};

// Solves A x = b in place by Gaussian elimination with partial pivoting.
// A is n x n row-major. Throws Error{numeric} on (near-)singular systems.
std::vector<double> solve_linear_system(std::vector<double> a, std::vector<double> b,
                                        size_t n);

} // namespace soilrf

#endif
