#include "eulerctl/quadrature.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace eulerctl {

namespace {

std::vector<QuadNode> compute_gauss_legendre(int order) {
    if (order < 1) throw std::invalid_argument("quadrature order must be >= 1");
    std::vector<QuadNode> nodes(order);
    const int n = order;
    for (int i = 0; i < (n + 1) / 2; ++i) {
        // Chebyshev-based initial guess, then Newton on P_n.
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double pp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = 0.0;
            for (int j = 0; j < n; ++j) {
                const double p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j + 1.0) * x * p1 - j * p2) / (j + 1.0);
            }
            pp = n * (x * p0 - p1) / (x * x - 1.0);
            const double dx = p0 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        nodes[i] = {-x, w};
        nodes[n - 1 - i] = {x, w};
    }
    return nodes;
}

const std::vector<QuadNode>& cached_rule(int order) {
    static std::mutex mu;
    static std::map<int, std::vector<QuadNode>> cache;
    std::scoped_lock lock(mu);
    auto it = cache.find(order);
    if (it == cache.end()) it = cache.emplace(order, compute_gauss_legendre(order)).first;
    return it->second;
}

}  // namespace

const std::vector<QuadNode>& gauss_legendre(int order) { return cached_rule(order); }

double integrate_panels(const std::function<double(double)>& f, double a,
                        double b, int panels, int order) {
    const auto& rule = gauss_legendre(order);
    const double h = (b - a) / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double lo = a + p * h;
        const double mid = lo + 0.5 * h;
        for (const auto& nd : rule) sum += nd.w * f(mid + 0.5 * h * nd.x);
    }
    return sum * 0.5 * h;
}

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, double tol, int max_doublings) {
    int panels = 1;
    double prev = integrate_panels(f, a, b, panels);
    for (int d = 0; d < max_doublings; ++d) {
        panels *= 2;
        const double cur = integrate_panels(f, a, b, panels);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate_adaptive: no convergence within doubling limit");
}

double integrate2d_panels(const std::function<double(double, double)>& f,
                          double L1, double L2, int panels, int order) {
    const auto& rule = gauss_legendre(order);
    const double h1 = L1 / panels, h2 = L2 / panels;
    double sum = 0.0;
    for (int p = 0; p < panels; ++p) {
        const double m1 = (p + 0.5) * h1;
        for (int q = 0; q < panels; ++q) {
            const double m2 = (q + 0.5) * h2;
            for (const auto& n1 : rule) {
                const double x1 = m1 + 0.5 * h1 * n1.x;
                double inner = 0.0;
                for (const auto& n2 : rule) inner += n2.w * f(x1, m2 + 0.5 * h2 * n2.x);
                sum += n1.w * inner;
            }
        }
    }
    return sum * 0.25 * h1 * h2;
}

double integrate2d_adaptive(const std::function<double(double, double)>& f,
                            double L1, double L2, double tol, int max_doublings) {
    int panels = 1;
    double prev = integrate2d_panels(f, L1, L2, panels);
    for (int d = 0; d < max_doublings; ++d) {
        panels *= 2;
        const double cur = integrate2d_panels(f, L1, L2, panels);
        if (std::abs(cur - prev) <= tol * std::max(1.0, std::abs(cur))) return cur;
        prev = cur;
    }
    throw std::runtime_error("integrate2d_adaptive: no convergence within doubling limit");
}

MidpointGrid midpoint_grid(double L1, double L2, int points_per_axis) {
    if (points_per_axis < 1) throw std::invalid_argument("midpoint grid needs >= 1 point per axis");
    MidpointGrid g;
    const int n = points_per_axis;
    const double h1 = L1 / n, h2 = L2 / n;
    g.points.reserve(static_cast<size_t>(n) * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g.points.push_back({(i + 0.5) * h1, (j + 0.5) * h2});
    g.weight = h1 * h2;
    return g;
}

}  // namespace eulerctl
