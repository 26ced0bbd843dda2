#pragma once

#include <array>
#include <functional>
#include <vector>

namespace eulerctl {

struct QuadNode {
    double x;  // abscissa on [-1, 1]
    double w;
};

// Gauss-Legendre rule of the given order, cached per order.
const std::vector<QuadNode>& gauss_legendre(int order);

// Composite Gauss-Legendre on [a, b] with equal panels.
double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int panels, int order = 12);

// Doubles the panel count until two successive composite values agree to
// tol * max(1, |I|). Returns the last value; throws std::runtime_error if the
// doubling limit is reached without agreement.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol = 1e-12,
                          int max_doublings = 20);

// Tensor-product composite Gauss-Legendre on [0, L1] x [0, L2].
double integrate2d_panels(const std::function<double(double, double)>& f,
                          double L1, double L2, int panels, int order = 8);

double integrate2d_adaptive(const std::function<double(double, double)>& f,
                            double L1, double L2, double tol = 1e-12,
                            int max_doublings = 8);

// Midpoint tensor grid on [0, L1] x [0, L2]: n midpoints per axis, uniform
// weight. On the torus this rule integrates trigonometric polynomials with
// per-axis harmonics up to n - 1 exactly.
struct MidpointGrid {
    std::vector<std::array<double, 2>> points;
    double weight;
};
MidpointGrid midpoint_grid(double L1, double L2, int points_per_axis);

}  // namespace eulerctl
