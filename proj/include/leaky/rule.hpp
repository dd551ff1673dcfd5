#pragma once

#include <array>
#include <stdexcept>

#include "leaky/rational.hpp"

namespace leaky {

/// Toppling rule of the leaky sandpile: per-direction chip weights and the
/// leakiness parameter d. A toppling site loses c*d chips, sends c_dir to
/// each neighbor and leaks c*(d-1).
template <class S>
struct ToppleRule {
    S c_up{};
    S c_right{};
    S c_down{};
    S c_left{};
    S d{};

    ToppleRule() = default;
    ToppleRule(S up, S right, S down, S left, S leak_d)
        : c_up(up), c_right(right), c_down(down), c_left(left), d(leak_d) {
        validate();
    }

    static ToppleRule uniform(S leak_d) { return ToppleRule(S(1), S(1), S(1), S(1), leak_d); }

    S chip_total() const { return c_up + c_right + c_down + c_left; }
    S threshold() const { return chip_total() * d; }
    S leak_per_topple() const { return chip_total() * (d - S(1)); }

    bool is_uniform() const { return c_up == c_right && c_up == c_down && c_up == c_left; }

    std::array<double, 4> weights_double() const {
        return {to_double(c_up), to_double(c_right), to_double(c_down), to_double(c_left)};
    }

    void validate() const {
        if (is_negative(c_up) || is_negative(c_right) || is_negative(c_down) || is_negative(c_left))
            throw std::invalid_argument("ToppleRule: chip weights must be >= 0");
        if (!(chip_total() > S(0))) throw std::invalid_argument("ToppleRule: total chip weight must be > 0");
        if (d < S(1)) throw std::invalid_argument("ToppleRule: d must be >= 1");
        if constexpr (ScalarTraits<S>::mode == ScalarMode::Float64) {
            if (!is_finite_scalar(d) || !is_finite_scalar(chip_total()))
                throw std::invalid_argument("ToppleRule: nonfinite parameter");
        }
    }
};

/// Step distribution of the killed random walk associated with a rule:
/// move probabilities c_dir/(c d) and kill probability 1 - 1/d.
struct StepDistribution {
    double p_right = 0, p_left = 0, p_up = 0, p_down = 0, p_kill = 0;

    template <class S>
    static StepDistribution from_rule(const ToppleRule<S>& rule) {
        double c = to_double(rule.chip_total());
        double d = to_double(rule.d);
        if (!(d > 1.0)) throw std::invalid_argument("StepDistribution: requires d > 1");
        StepDistribution sd;
        sd.p_right = to_double(rule.c_right) / (c * d);
        sd.p_left = to_double(rule.c_left) / (c * d);
        sd.p_up = to_double(rule.c_up) / (c * d);
        sd.p_down = to_double(rule.c_down) / (c * d);
        sd.p_kill = 1.0 - 1.0 / d;
        return sd;
    }

    double sum() const { return p_right + p_left + p_up + p_down + p_kill; }
};

}  // namespace leaky
