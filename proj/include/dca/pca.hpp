#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "dca/discrete.hpp"
#include "dca/rng.hpp"
#include "dca/rule_table.hpp"
#include "dca/topology.hpp"

namespace dca {

// One sampled stochastic step from a deterministic state: every cell
// draws its next symbol independently from the rule row of its
// neighborhood pattern. Reproducible for a given seed (cells are visited
// in ascending order, one draw each).
inline DiscreteState pca_sample(const RuleTable& rule, const DiscreteState& state,
                                const Topology& topology, std::uint64_t seed) {
    if (state.size() != topology.ring_size())
        throw std::invalid_argument("state length does not match ring size");
    if (rule.arity() != topology.arity())
        throw std::invalid_argument("rule arity does not match topology");

    Rng rng(seed);
    DiscreteState out(state.size());
    std::vector<std::size_t> pattern(rule.arity());
    for (std::size_t cell = 0; cell < state.size(); ++cell) {
        for (std::size_t s = 0; s < rule.arity(); ++s)
            pattern[s] = state[topology.neighbor(cell, s)];
        const std::size_t code = encode_pattern(pattern, rule.symbol_count());
        auto row = rule.rho_row(code);
        const double u = rng.uniform_unit();
        double cum = 0.0;
        std::size_t drawn = row.size() - 1;  // u lands past the last edge only by rounding
        for (std::size_t a = 0; a < row.size(); ++a) {
            cum += row[a];
            if (u < cum) {
                drawn = a;
                break;
            }
        }
        out[cell] = drawn;
    }
    return out;
}

}  // namespace dca
