#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "dca/configuration.hpp"
#include "dca/rule_table.hpp"
#include "dca/topology.hpp"

namespace dca {

namespace detail {

// Mixes rule rows by the product of neighbor probabilities at each
// pattern. `digits` is the flat table from pattern_digit_table.
inline void dca_local_into(const RuleTable& rule,
                           const double* const* neighborhood,
                           const std::size_t* digits,
                           std::span<double> out) {
    const std::size_t k = rule.symbol_count();
    const std::size_t arity = rule.arity();
    for (std::size_t a = 0; a < k; ++a) out[a] = 0.0;
    for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
        const std::size_t* digit = digits + code * arity;
        double prod = 1.0;
        for (std::size_t s = 0; s < arity; ++s) prod *= neighborhood[s][digit[s]];
        if (prod == 0.0) continue;
        auto row = rule.rho_row(code);
        for (std::size_t a = 0; a < k; ++a) out[a] += row[a] * prod;
    }
}

inline void check_simplex_sum(std::span<const double> probs, std::size_t cell) {
    double sum = 0.0;
    for (double p : probs) sum += p;
    if (std::abs(sum - 1.0) > kSimplexTol)
        throw std::runtime_error("cell " + std::to_string(cell) +
                                 " drifted off the simplex");
}

}  // namespace detail

// out(a) = sum over patterns y of rho(y)(a) * prod_s neighborhood[s][y(s)]
inline CellDistribution dca_local(const RuleTable& rule,
                                  const std::vector<CellDistribution>& neighborhood) {
    if (neighborhood.size() != rule.arity())
        throw std::invalid_argument("neighborhood size does not match rule arity");
    std::vector<const double*> cells(neighborhood.size());
    for (std::size_t s = 0; s < neighborhood.size(); ++s) {
        if (neighborhood[s].size() != rule.symbol_count())
            throw std::invalid_argument("neighborhood distribution has wrong size");
        validate_distribution(neighborhood[s]);
        cells[s] = neighborhood[s].data();
    }
    const auto digits = pattern_digit_table(rule.symbol_count(), rule.arity());
    CellDistribution out(rule.symbol_count());
    detail::dca_local_into(rule, cells.data(), digits.data(), out);
    detail::check_simplex_sum(out, 0);
    return out;
}

// One synchronous update of the whole ring. Output rows sum to one
// analytically; this is checked, never renormalized.
inline Configuration dca_step(const RuleTable& rule, const Configuration& config,
                              const Topology& topology) {
    if (config.cell_count() != topology.ring_size())
        throw std::invalid_argument("configuration length does not match ring size");
    if (config.symbol_count() != rule.symbol_count())
        throw std::invalid_argument("configuration alphabet does not match rule");
    if (rule.arity() != topology.arity())
        throw std::invalid_argument("rule arity does not match topology");

    const auto digits = pattern_digit_table(rule.symbol_count(), rule.arity());
    std::vector<const double*> neighborhood(rule.arity());
    Configuration out(config.cell_count(), config.symbol_count());
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell) {
        for (std::size_t s = 0; s < rule.arity(); ++s)
            neighborhood[s] = config.cell(topology.neighbor(cell, s)).data();
        detail::dca_local_into(rule, neighborhood.data(), digits.data(), out.cell(cell));
        detail::check_simplex_sum(out.cell(cell), cell);
    }
    return out;
}

// Trajectory including the input: result[0] = config, result[t+1] = step(result[t]).
inline std::vector<Configuration> dca_run(const RuleTable& rule,
                                          const Configuration& config,
                                          const Topology& topology,
                                          std::size_t steps) {
    std::vector<Configuration> trajectory;
    trajectory.reserve(steps + 1);
    trajectory.push_back(config);
    for (std::size_t i = 0; i < steps; ++i)
        trajectory.push_back(dca_step(rule, trajectory.back(), topology));
    return trajectory;
}

}  // namespace dca
