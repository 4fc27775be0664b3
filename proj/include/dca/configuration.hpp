#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dca/discrete.hpp"

namespace dca {

// Tolerance for distributions that have drifted through many steps.
// Freshly normalized rows are held to kRowSumTol in rule_table.hpp.
inline constexpr double kSimplexTol = 1e-9;

using CellDistribution = std::vector<double>;

inline void validate_distribution(std::span<const double> probs,
                                  double tol = kSimplexTol) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= -tol && p <= 1.0 + tol))
            throw std::invalid_argument("probability outside [0,1]");
        sum += p;
    }
    if (std::abs(sum - 1.0) > tol)
        throw std::invalid_argument("probabilities do not sum to 1");
}

// One distribution over the alphabet per ring cell, stored flat
// (cell-major). The step engine asserts the simplex invariant instead of
// renormalizing, so drift shows up as an error rather than being hidden.
class Configuration {
public:
    Configuration(std::size_t cells, std::size_t symbol_count)
        : symbol_count_(symbol_count), probs_(cells * symbol_count, 0.0) {
        if (cells == 0) throw std::invalid_argument("configuration needs cells");
        if (symbol_count < 2) throw std::invalid_argument("need at least two symbols");
    }

    static Configuration delta(const DiscreteState& state, std::size_t symbol_count) {
        Configuration config(state.size(), symbol_count);
        for (std::size_t cell = 0; cell < state.size(); ++cell) {
            if (state[cell] >= symbol_count)
                throw std::invalid_argument("state symbol out of range");
            config.at(cell, state[cell]) = 1.0;
        }
        return config;
    }

    static Configuration uniform(std::size_t cells, std::size_t symbol_count) {
        Configuration config(cells, symbol_count);
        const double p = 1.0 / static_cast<double>(symbol_count);
        for (double& v : config.probs_) v = p;
        return config;
    }

    std::size_t cell_count() const { return probs_.size() / symbol_count_; }
    std::size_t symbol_count() const { return symbol_count_; }

    double at(std::size_t cell, std::size_t sym) const {
        return probs_[cell * symbol_count_ + sym];
    }
    double& at(std::size_t cell, std::size_t sym) {
        return probs_[cell * symbol_count_ + sym];
    }

    std::span<const double> cell(std::size_t cell) const {
        return std::span(probs_).subspan(cell * symbol_count_, symbol_count_);
    }
    std::span<double> cell(std::size_t cell) {
        return std::span(probs_).subspan(cell * symbol_count_, symbol_count_);
    }

    std::span<const double> flat() const { return probs_; }

    void validate(double tol = kSimplexTol) const {
        for (std::size_t c = 0; c < cell_count(); ++c) {
            try {
                validate_distribution(cell(c), tol);
            } catch (const std::invalid_argument& e) {
                throw std::invalid_argument("cell " + std::to_string(c) + ": " + e.what());
            }
        }
    }

    // True when every entry is exactly 0 or 1 (an embedded discrete state).
    bool is_delta() const {
        for (double p : probs_)
            if (p != 0.0 && p != 1.0) return false;
        return true;
    }

    // Ties resolve to the lowest symbol index.
    DiscreteState argmax_state() const {
        DiscreteState state(cell_count());
        for (std::size_t c = 0; c < cell_count(); ++c) {
            std::size_t best = 0;
            for (std::size_t a = 1; a < symbol_count_; ++a)
                if (at(c, a) > at(c, best)) best = a;
            state[c] = best;
        }
        return state;
    }

    // Cell g of the input lands at cell (g + shift) mod n.
    Configuration rotated(std::size_t shift) const {
        const std::size_t n = cell_count();
        Configuration out(n, symbol_count_);
        for (std::size_t c = 0; c < n; ++c) {
            const std::size_t dst = (c + shift) % n;
            for (std::size_t a = 0; a < symbol_count_; ++a)
                out.at(dst, a) = at(c, a);
        }
        return out;
    }

    bool operator==(const Configuration&) const = default;

private:
    std::size_t symbol_count_;
    std::vector<double> probs_;
};

}  // namespace dca
