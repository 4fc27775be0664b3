#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "dca/alphabet.hpp"
#include "dca/configuration.hpp"
#include "dca/discrete.hpp"
#include "dca/pattern.hpp"
#include "dca/rule_table.hpp"
#include "dca/topology.hpp"

namespace dca {

// Slack on the analytic [0,1] range of binary cell values.
inline constexpr double kBinaryRangeTol = 1e-12;

inline double sigmoid(double w) {
    if (w >= 0.0) return 1.0 / (1.0 + std::exp(-w));
    const double e = std::exp(w);
    return e / (1.0 + e);
}

// Probability that a cell with P(black) = p matches pattern bit `bit`:
// p for a black bit, 1 - p for a white one.
inline double pair_prob(double p, std::size_t bit) { return bit ? p : 1.0 - p; }

// Two-symbol rule with a single scalar weight per pattern; the black
// probability is the sigmoid of the weight. Probability-specified rules
// (exact 0/1 entries allowed) evolve but cannot be trained.
class BinaryRule {
public:
    static BinaryRule from_weights(std::size_t arity, std::vector<double> weights) {
        BinaryRule rule(arity);
        if (weights.size() != rule.pattern_count())
            throw std::invalid_argument("weight table has wrong size");
        rule.weights_ = std::move(weights);
        for (std::size_t code = 0; code < rule.pattern_count(); ++code)
            rule.refresh(code);
        return rule;
    }

    static BinaryRule from_probs(std::size_t arity, std::vector<double> probs) {
        BinaryRule rule(arity);
        if (probs.size() != rule.pattern_count())
            throw std::invalid_argument("probability table has wrong size");
        for (double p : probs)
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("rule probability outside [0,1]");
        rule.probs_ = std::move(probs);
        return rule;
    }

    std::size_t arity() const { return arity_; }
    std::size_t pattern_count() const { return patterns_; }
    std::size_t weight_count() const { return patterns_; }

    bool weight_backed() const { return !weights_.empty(); }

    double weight(std::size_t pattern) const {
        check_weight_backed();
        return weights_[pattern];
    }
    std::span<const double> weights() const {
        check_weight_backed();
        return weights_;
    }

    void set_weights(std::vector<double> weights) {
        check_weight_backed();
        if (weights.size() != pattern_count())
            throw std::invalid_argument("weight table has wrong size");
        weights_ = std::move(weights);
        for (std::size_t code = 0; code < pattern_count(); ++code) refresh(code);
    }

    void set_weight(std::size_t pattern, double value) {
        check_weight_backed();
        if (pattern >= pattern_count())
            throw std::invalid_argument("pattern code out of range");
        weights_[pattern] = value;
        refresh(pattern);
    }

    double prob(std::size_t pattern) const { return probs_[pattern]; }
    std::span<const double> probs() const { return probs_; }

    // P(black) >= 0.5 becomes black.
    DiscreteRule thresholded() const {
        std::vector<std::size_t> outputs(pattern_count());
        for (std::size_t code = 0; code < pattern_count(); ++code)
            outputs[code] = probs_[code] >= 0.5 ? 1 : 0;
        return DiscreteRule(2, arity_, std::move(outputs));
    }

    bool operator==(const BinaryRule&) const = default;

private:
    explicit BinaryRule(std::size_t arity)
        : arity_(arity), patterns_(dca::pattern_count(2, arity)) {
        probs_.assign(patterns_, 0.0);
    }

    void check_weight_backed() const {
        if (!weight_backed())
            throw std::invalid_argument("binary rule is probability-specified, no weights");
    }

    void refresh(std::size_t pattern) { probs_[pattern] = sigmoid(weights_[pattern]); }

    std::size_t arity_;
    std::size_t patterns_;
    std::vector<double> weights_;  // empty when probability-specified
    std::vector<double> probs_;
};

// One P(black) per cell.
class BinaryConfig {
public:
    explicit BinaryConfig(std::vector<double> p_black)
        : p_(std::move(p_black)) {
        if (p_.empty()) throw std::invalid_argument("configuration needs cells");
        for (double p : p_)
            if (!(p >= -kBinaryRangeTol && p <= 1.0 + kBinaryRangeTol))
                throw std::invalid_argument("cell probability outside [0,1]");
    }

    static BinaryConfig delta(const DiscreteState& state) {
        std::vector<double> p(state.size());
        for (std::size_t cell = 0; cell < state.size(); ++cell) {
            if (state[cell] > 1)
                throw std::invalid_argument("state symbol out of range");
            p[cell] = static_cast<double>(state[cell]);
        }
        return BinaryConfig(std::move(p));
    }

    static BinaryConfig uniform(std::size_t cells) {
        return BinaryConfig(std::vector<double>(cells, 0.5));
    }

    std::size_t cell_count() const { return p_.size(); }
    double at(std::size_t cell) const { return p_[cell]; }
    double& at(std::size_t cell) { return p_[cell]; }
    std::span<const double> p_black() const { return p_; }

    DiscreteState argmax_state() const {
        DiscreteState state(p_.size());
        for (std::size_t cell = 0; cell < p_.size(); ++cell)
            state[cell] = p_[cell] > 0.5 ? 1 : 0;
        return state;
    }

    bool operator==(const BinaryConfig&) const = default;

private:
    std::vector<double> p_;
};

// d P(black)(cell) / d w(pattern), stored flat (cell-major).
class BinaryGradient {
public:
    BinaryGradient(std::size_t cells, std::size_t pattern_count)
        : patterns_(pattern_count), values_(cells * pattern_count, 0.0) {}

    std::size_t cell_count() const { return values_.size() / patterns_; }
    std::size_t pattern_count() const { return patterns_; }

    double at(std::size_t cell, std::size_t pattern) const {
        return values_[cell * patterns_ + pattern];
    }
    double& at(std::size_t cell, std::size_t pattern) {
        return values_[cell * patterns_ + pattern];
    }

    std::span<const double> row(std::size_t cell) const {
        return std::span(values_).subspan(cell * patterns_, patterns_);
    }
    std::span<double> row(std::size_t cell) {
        return std::span(values_).subspan(cell * patterns_, patterns_);
    }

    std::span<const double> flat() const { return values_; }

    bool operator==(const BinaryGradient&) const = default;

private:
    std::size_t patterns_;
    std::vector<double> values_;
};

namespace detail {

inline void check_binary_dims(const BinaryRule& rule, const BinaryConfig& config,
                              const Topology& topology) {
    if (config.cell_count() != topology.ring_size())
        throw std::invalid_argument("configuration length does not match ring size");
    if (rule.arity() != topology.arity())
        throw std::invalid_argument("rule arity does not match topology");
}

inline double check_binary_range(double value, std::size_t cell) {
    if (!(value >= -kBinaryRangeTol && value <= 1.0 + kBinaryRangeTol))
        throw std::runtime_error("cell " + std::to_string(cell) +
                                 " left the [0,1] range");
    return value;
}

}  // namespace detail

// new p(cell) = sum over patterns y of rho(y) * prod_s pair_prob(p(nbr_s), y_s)
inline BinaryConfig binary_step(const BinaryRule& rule, const BinaryConfig& config,
                                const Topology& topology) {
    detail::check_binary_dims(rule, config, topology);
    const std::size_t arity = rule.arity();
    const auto digits = pattern_digit_table(2, arity);
    std::vector<double> out(config.cell_count());
    std::vector<double> nbr(arity);
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell) {
        for (std::size_t s = 0; s < arity; ++s)
            nbr[s] = config.at(topology.neighbor(cell, s));
        double value = 0.0;
        for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
            const std::size_t* digit = digits.data() + code * arity;
            double prod = 1.0;
            for (std::size_t s = 0; s < arity; ++s) prod *= pair_prob(nbr[s], digit[s]);
            value += rule.prob(code) * prod;
        }
        out[cell] = detail::check_binary_range(value, cell);
    }
    return BinaryConfig(std::move(out));
}

inline std::vector<BinaryConfig> binary_run(const BinaryRule& rule,
                                            const BinaryConfig& config,
                                            const Topology& topology,
                                            std::size_t steps) {
    std::vector<BinaryConfig> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back(config);
    for (std::size_t i = 0; i < steps; ++i)
        trajectory.push_back(binary_step(rule, trajectory.back(), topology));
    return trajectory;
}

// One forward step of the (values, gradient) pair. The direct term is the
// sigmoid derivative rho(1-rho) at each realized pattern; the chain term
// feeds the neighbors' previous derivatives through d pair_prob/d p = 2*bit - 1.
inline std::pair<BinaryConfig, BinaryGradient> binary_grad_step(
    const BinaryRule& rule, const BinaryConfig& config, const BinaryGradient& grad,
    const Topology& topology) {
    detail::check_binary_dims(rule, config, topology);
    if (grad.cell_count() != config.cell_count() ||
        grad.pattern_count() != rule.pattern_count())
        throw std::invalid_argument("gradient dimensions do not match configuration and rule");

    BinaryConfig next = binary_step(rule, config, topology);

    const std::size_t arity = rule.arity();
    const std::size_t patterns = rule.pattern_count();
    const auto digits = pattern_digit_table(2, arity);
    BinaryGradient out(config.cell_count(), patterns);
    std::vector<double> nbr_p(arity);
    std::vector<std::size_t> nbr(arity);
    std::vector<double> chain(arity);

    for (std::size_t cell = 0; cell < config.cell_count(); ++cell) {
        for (std::size_t s = 0; s < arity; ++s) {
            nbr[s] = topology.neighbor(cell, s);
            nbr_p[s] = config.at(nbr[s]);
            chain[s] = 0.0;
        }
        auto grad_out = out.row(cell);

        for (std::size_t code = 0; code < patterns; ++code) {
            const std::size_t* digit = digits.data() + code * arity;
            const double rho = rule.prob(code);

            double prod_all = 1.0;
            for (std::size_t s = 0; s < arity; ++s)
                prod_all *= pair_prob(nbr_p[s], digit[s]);
            grad_out[code] += rho * (1.0 - rho) * prod_all;

            // coefficient of each neighbor's previous gradient; independent
            // of which weight the derivative is taken against
            for (std::size_t s = 0; s < arity; ++s) {
                double prod_except = 1.0;
                for (std::size_t s1 = 0; s1 < arity; ++s1)
                    if (s1 != s) prod_except *= pair_prob(nbr_p[s1], digit[s1]);
                chain[s] += rho * (2.0 * static_cast<double>(digit[s]) - 1.0) * prod_except;
            }
        }

        for (std::size_t s = 0; s < arity; ++s) {
            if (chain[s] == 0.0) continue;
            auto grad_in = grad.row(nbr[s]);
            for (std::size_t w = 0; w < patterns; ++w)
                grad_out[w] += chain[s] * grad_in[w];
        }
    }
    return {std::move(next), std::move(out)};
}

struct BinaryGradRunResult {
    std::vector<BinaryConfig> configs;
    BinaryGradient gradient;
};

inline BinaryGradRunResult binary_grad_run(const BinaryRule& rule,
                                           const BinaryConfig& config,
                                           const Topology& topology,
                                           std::size_t steps) {
    BinaryGradRunResult result{{config},
                               BinaryGradient(config.cell_count(), rule.pattern_count())};
    result.configs.reserve(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) {
        auto [next, grad] =
            binary_grad_step(rule, result.configs.back(), result.gradient, topology);
        result.configs.push_back(std::move(next));
        result.gradient = std::move(grad);
    }
    return result;
}

// The weight bridge pins the white logit of every pattern at zero, so the
// two-symbol softmax of (0, w) reproduces sigmoid(w) exactly.
inline RuleTable to_rule_table(const BinaryRule& rule) {
    if (rule.weight_backed()) {
        std::vector<double> weights(rule.pattern_count() * 2, 0.0);
        for (std::size_t code = 0; code < rule.pattern_count(); ++code)
            weights[code * 2 + 1] = rule.weight(code);
        return RuleTable(Alphabet::binary(), rule.arity(), std::move(weights));
    }
    std::vector<double> rho(rule.pattern_count() * 2);
    for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
        rho[code * 2 + 1] = rule.prob(code);
        rho[code * 2] = 1.0 - rule.prob(code);
    }
    return RuleTable::from_distributions(Alphabet::binary(), rule.arity(), std::move(rho));
}

inline Configuration to_configuration(const BinaryConfig& config) {
    Configuration out(config.cell_count(), 2);
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell) {
        out.at(cell, 1) = config.at(cell);
        out.at(cell, 0) = 1.0 - config.at(cell);
    }
    return out;
}

inline BinaryConfig to_binary_config(const Configuration& config) {
    if (config.symbol_count() != 2)
        throw std::invalid_argument("configuration is not two-symbol");
    std::vector<double> p(config.cell_count());
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell)
        p[cell] = config.at(cell, 1);
    return BinaryConfig(std::move(p));
}

}  // namespace dca
