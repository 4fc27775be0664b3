#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dca/pattern.hpp"
#include "dca/topology.hpp"

namespace dca {

using DiscreteState = std::vector<std::size_t>;

// Deterministic local map: one output symbol per neighborhood pattern code.
struct DiscreteRule {
    std::size_t symbol_count;
    std::size_t arity;
    std::vector<std::size_t> outputs;  // indexed by pattern code

    DiscreteRule(std::size_t symbol_count_, std::size_t arity_,
                 std::vector<std::size_t> outputs_)
        : symbol_count(symbol_count_), arity(arity_), outputs(std::move(outputs_)) {
        if (outputs.size() != pattern_count(symbol_count, arity))
            throw std::invalid_argument("rule output table has wrong size");
        for (std::size_t sym : outputs)
            if (sym >= symbol_count)
                throw std::invalid_argument("rule output symbol out of range");
    }

    bool operator==(const DiscreteRule&) const = default;
};

// Wolfram's ECA numbering: bit `code` of `number` is the output for the
// radius-1 binary pattern with that code.
inline DiscreteRule wolfram_to_rule(int number) {
    if (number < 0 || number > 255)
        throw std::invalid_argument("Wolfram rule number must be in 0..255");
    std::vector<std::size_t> outputs(8);
    for (std::size_t code = 0; code < 8; ++code)
        outputs[code] = static_cast<std::size_t>((number >> code) & 1);
    return DiscreteRule(2, 3, std::move(outputs));
}

inline DiscreteState discrete_step(const DiscreteRule& rule,
                                   const DiscreteState& state,
                                   const Topology& topology) {
    if (state.size() != topology.ring_size())
        throw std::invalid_argument("state length does not match ring size");
    if (rule.arity != topology.arity())
        throw std::invalid_argument("rule arity does not match topology");
    DiscreteState out(state.size());
    std::vector<std::size_t> pattern(rule.arity);
    for (std::size_t cell = 0; cell < state.size(); ++cell) {
        for (std::size_t s = 0; s < rule.arity; ++s)
            pattern[s] = state[topology.neighbor(cell, s)];
        out[cell] = rule.outputs[encode_pattern(pattern, rule.symbol_count)];
    }
    return out;
}

inline std::vector<DiscreteState> discrete_run(const DiscreteRule& rule,
                                               const DiscreteState& state,
                                               const Topology& topology,
                                               std::size_t steps) {
    std::vector<DiscreteState> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back(state);
    for (std::size_t i = 0; i < steps; ++i)
        trajectory.push_back(discrete_step(rule, trajectory.back(), topology));
    return trajectory;
}

}  // namespace dca
