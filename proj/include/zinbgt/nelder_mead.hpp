#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <limits>

namespace zinbgt {

struct NelderMeadOptions {
    int max_evals = 500;
    double f_abs_tol = 1e-12;
    double f_rel_tol = 1e-13;
    double x_tol = 1e-9;          // simplex diameter, infinity norm
    double initial_step = 0.1;
};

template <std::size_t N>
struct NelderMeadResult {
    std::array<double, N> x{};
    double f = std::numeric_limits<double>::infinity();
    int evals = 0;
    bool converged = false;
};

/**
 * Minimizes f over R^N with the Nelder-Mead simplex (reflection 1,
 * expansion 2, contraction 1/2, shrink 1/2). The start point is one vertex;
 * the others are offset by initial_step along each axis. Stops when the spread
 * of function values or the simplex diameter falls below tolerance.
 * Non-finite objective values are treated as +infinity.
 */
template <std::size_t N, class F>
NelderMeadResult<N> nelder_mead(F&& f, const std::array<double, N>& start, const NelderMeadOptions& opt = {}) {
    using Point = std::array<double, N>;
    constexpr double kInf = std::numeric_limits<double>::infinity();

    NelderMeadResult<N> res;
    auto eval = [&](const Point& p) {
        ++res.evals;
        const double v = f(p);
        return std::isfinite(v) ? v : kInf;
    };

    std::array<Point, N + 1> simplex;
    std::array<double, N + 1> fv;
    simplex[0] = start;
    fv[0] = eval(start);
    for (std::size_t i = 0; i < N; ++i) {
        simplex[i + 1] = start;
        simplex[i + 1][i] += opt.initial_step;
        fv[i + 1] = eval(simplex[i + 1]);
    }

    std::array<std::size_t, N + 1> order;
    auto sort_simplex = [&] {
        for (std::size_t i = 0; i <= N; ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return fv[a] < fv[b]; });
    };

    auto lerp = [](const Point& from, const Point& to, double t) {
        Point out;
        for (std::size_t i = 0; i < N; ++i) out[i] = from[i] + t * (to[i] - from[i]);
        return out;
    };

    while (true) {
        sort_simplex();
        const std::size_t best = order[0];
        const std::size_t worst = order[N];
        const std::size_t second = order[N - 1];

        double diameter = 0.0;
        for (std::size_t v = 0; v <= N; ++v) {
            for (std::size_t i = 0; i < N; ++i) {
                diameter = std::max(diameter, std::abs(simplex[v][i] - simplex[best][i]));
            }
        }
        const double spread = fv[worst] - fv[best];
        if (std::isfinite(fv[best]) &&
            (spread <= opt.f_abs_tol + opt.f_rel_tol * std::abs(fv[best]) || diameter <= opt.x_tol)) {
            res.converged = true;
            break;
        }
        if (res.evals >= opt.max_evals) break;

        Point centroid{};
        for (std::size_t v = 0; v <= N; ++v) {
            if (v == worst) continue;
            for (std::size_t i = 0; i < N; ++i) centroid[i] += simplex[v][i] / static_cast<double>(N);
        }

        const Point reflected = lerp(centroid, simplex[worst], -1.0);
        const double f_ref = eval(reflected);
        if (f_ref < fv[best]) {
            const Point expanded = lerp(centroid, simplex[worst], -2.0);
            const double f_exp = eval(expanded);
            if (f_exp < f_ref) {
                simplex[worst] = expanded;
                fv[worst] = f_exp;
            } else {
                simplex[worst] = reflected;
                fv[worst] = f_ref;
            }
            continue;
        }
        if (f_ref < fv[second]) {
            simplex[worst] = reflected;
            fv[worst] = f_ref;
            continue;
        }
        const bool outside = f_ref < fv[worst];
        const Point contracted = outside ? lerp(centroid, reflected, 0.5) : lerp(centroid, simplex[worst], 0.5);
        const double f_con = eval(contracted);
        if (f_con < (outside ? f_ref : fv[worst])) {
            simplex[worst] = contracted;
            fv[worst] = f_con;
            continue;
        }
        for (std::size_t v = 0; v <= N; ++v) {
            if (v == best) continue;
            simplex[v] = lerp(simplex[best], simplex[v], 0.5);
            fv[v] = eval(simplex[v]);
        }
    }

    sort_simplex();
    res.x = simplex[order[0]];
    res.f = fv[order[0]];
    return res;
}

}  // namespace zinbgt
