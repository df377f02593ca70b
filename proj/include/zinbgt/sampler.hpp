#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "zinbgt/model.hpp"

namespace zinbgt {

/// Uniform double in [0, 1) from the top 53 bits of one engine output.
inline double uniform01(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

/**
 * Draws from a fixed mixture.
 *
 * The component is chosen from (p0, p1, p2). The geometric component uses its
 * analytic inverse CDF; the hurdle NB component uses an inverse CDF built
 * from a cumulative table, continued by sequential search past the table end.
 * Both are exact for the hurdle distributions.
 */
class Sampler {
public:
    explicit Sampler(const Params& theta);

    std::int64_t operator()(std::mt19937_64& rng) const;

    /// Fills out with n draws from a fresh engine seeded with seed.
    void draw(std::size_t n, std::uint64_t seed, std::vector<std::int64_t>& out) const;

    const Params& params() const { return theta_; }

private:
    std::int64_t draw_nb(double u) const;
    std::int64_t draw_geom(double u) const;

    Params theta_;
    double cut0_ = 1.0;
    double cut1_ = 1.0;

    bool nb_constant_one_ = false;
    std::vector<double> nb_cdf_;  // nb_cdf_[i] = P(X <= i + 1)
    double nb_last_pmf_ = 0.0;
    HurdleNbLogPmf nb_log_pmf_;

    double geom_log_q_ = 0.0;  // log(mu_g / (1 + mu_g))
};

}  // namespace zinbgt
