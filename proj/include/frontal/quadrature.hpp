#pragma once

#include "frontal/scene.hpp"

#include <functional>

namespace frontal {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    long evaluations = 0;
    int pieces = 0;
    bool converged = false;
};

/// One 15-point Kronrod panel with its embedded 7-point Gauss estimate.
QuadResult gk15(const std::function<double(double)>& f, double a, double b);

/// Globally adaptive Gauss-Kronrod on [a, b], bisecting the panel with the
/// largest error until the summed error is below abs_tol.
QuadResult integrate_1d(const std::function<double(double)>& f, double a, double b,
                        double abs_tol, int initial_panels = 1, int max_panels = 20000);

struct CubatureOptions {
    double abs_tol = 1e-6;
    int initial_cells_per_axis = 8;
    long max_cells = 400000;
    /// Cells narrower than this fraction of the box are never split.
    double subdivision_floor = 1.0 / 1048576.0;
};

/**
 * Adaptive tensor-product Gauss-Kronrod cubature on a rectangle.
 *
 * Cells are refined in batches taken from a priority queue, each batch's
 * children evaluated in parallel; leaves are summed in a fixed order, so the
 * result does not depend on the thread count.
 */
QuadResult integrate_2d(const std::function<double(double, double)>& f, Interval x, Interval y,
                        const CubatureOptions& options);

/// Pairwise sum, for order-independent reductions.
double pairwise_sum(const double* v, std::size_t n);

} // namespace frontal
