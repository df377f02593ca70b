#include "zinbgt/sampler.hpp"

#include <algorithm>
#include <cmath>

namespace zinbgt {

namespace {

constexpr double kTableTail = 1e-13;
constexpr std::int64_t kTableCap = 1'000'000;
constexpr std::int64_t kSearchCap = 1'000'000'000;

}  // namespace

Sampler::Sampler(const Params& theta)
    : theta_(theta),
      nb_log_pmf_(theta.p1 > 0.0 ? theta.m : 0.0, theta.p1 > 0.0 ? theta.d : 1.0) {
    cut0_ = theta.p0;
    cut1_ = theta.p0 + theta.p1;

    if (theta.p1 > 0.0) {
        if (nb_log_pmf_.branch() == HurdleNbLogPmf::Branch::ConstantOne) {
            nb_constant_one_ = true;
        } else {
            double cum = 0.0;
            double pmf = 0.0;
            for (std::int64_t x = 1; x <= kTableCap; ++x) {
                pmf = std::exp(nb_log_pmf_(x));
                cum += pmf;
                nb_cdf_.push_back(cum);
                if (1.0 - cum < kTableTail && pmf < kTableTail) break;
            }
            nb_last_pmf_ = pmf;
        }
    }
    if (theta.p2 > 0.0 && theta.mu_g > 0.0) {
        geom_log_q_ = std::log(theta.mu_g) - std::log1p(theta.mu_g);
    }
}

std::int64_t Sampler::draw_nb(double u) const {
    if (nb_constant_one_) return 1;
    if (u < nb_cdf_.back()) {
        const auto it = std::upper_bound(nb_cdf_.begin(), nb_cdf_.end(), u);
        return static_cast<std::int64_t>(it - nb_cdf_.begin()) + 1;
    }
    // Sequential search beyond the table via the pmf recursion.
    std::int64_t x = static_cast<std::int64_t>(nb_cdf_.size());
    double cum = nb_cdf_.back();
    double pmf = nb_last_pmf_;
    while (x < kSearchCap) {
        pmf *= nb_log_pmf_.successor_ratio(x);
        ++x;
        cum += pmf;
        if (cum > u || pmf == 0.0) break;
    }
    return x;
}

std::int64_t Sampler::draw_geom(double u) const {
    if (theta_.mu_g == 0.0) return 1;
    const double v = 1.0 - u;  // (0, 1]
    const double k = std::floor(std::log(v) / geom_log_q_);
    if (!(k < static_cast<double>(kSearchCap))) return kSearchCap;
    return 1 + static_cast<std::int64_t>(k);
}

std::int64_t Sampler::operator()(std::mt19937_64& rng) const {
    const double u = uniform01(rng);
    if (u < cut0_) return 0;
    const double v = uniform01(rng);
    if (u < cut1_) return draw_nb(v);
    if (theta_.p2 > 0.0) return draw_geom(v);
    // Rounding in cut1_ can leave a sliver above p0 + p1 when p2 = 0.
    return theta_.p1 > 0.0 ? draw_nb(v) : 0;
}

void Sampler::draw(std::size_t n, std::uint64_t seed, std::vector<std::int64_t>& out) const {
    std::mt19937_64 rng(seed);
    out.resize(n);
    for (auto& v : out) v = (*this)(rng);
}

}  // namespace zinbgt
