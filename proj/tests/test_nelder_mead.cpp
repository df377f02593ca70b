#include <gtest/gtest.h>

#include <cmath>

#include "zinbgt/nelder_mead.hpp"

using namespace zinbgt;

TEST(NelderMead, Quadratic) {
    auto f = [](const std::array<double, 2>& x) { return (x[0] - 3.0) * (x[0] - 3.0) + 4.0 * (x[1] + 1.0) * (x[1] + 1.0); };
    const auto r = nelder_mead<2>(f, {0.0, 0.0});
    EXPECT_TRUE(r.converged);
    EXPECT_NEAR(r.x[0], 3.0, 1e-4);
    EXPECT_NEAR(r.x[1], -1.0, 1e-4);
}

TEST(NelderMead, Rosenbrock) {
    auto f = [](const std::array<double, 2>& x) {
        return 100.0 * std::pow(x[1] - x[0] * x[0], 2) + std::pow(1.0 - x[0], 2);
    };
    NelderMeadOptions opt;
    opt.max_evals = 5000;
    opt.initial_step = 0.5;
    const auto r = nelder_mead<2>(f, {-1.2, 1.0}, opt);
    EXPECT_NEAR(r.x[0], 1.0, 1e-3);
    EXPECT_NEAR(r.x[1], 1.0, 2e-3);
}

TEST(NelderMead, TreatsNonFiniteAsInfinite) {
    auto f = [](const std::array<double, 1>& x) { return x[0] < 0.0 ? std::nan("") : (x[0] - 2.0) * (x[0] - 2.0); };
    NelderMeadOptions opt;
    opt.initial_step = 1.0;
    const auto r = nelder_mead<1>(f, {0.3}, opt);
    EXPECT_NEAR(r.x[0], 2.0, 1e-4);
}

TEST(NelderMead, StopsAtBudget) {
    int calls = 0;
    auto f = [&](const std::array<double, 2>& x) {
        ++calls;
        return x[0] * x[0] + x[1] * x[1];
    };
    NelderMeadOptions opt;
    opt.max_evals = 10;
    const auto r = nelder_mead<2>(f, {50.0, 50.0}, opt);
    EXPECT_FALSE(r.converged);
    EXPECT_LE(calls, 14);
    EXPECT_LT(r.f, 5000.0);
}
