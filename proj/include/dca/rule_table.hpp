#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dca/alphabet.hpp"
#include "dca/discrete.hpp"
#include "dca/pattern.hpp"

namespace dca {

// Freshly normalized rule rows must sum to one this tightly.
inline constexpr double kRowSumTol = 1e-12;

// Logit magnitude used when a deterministic rule is forced into weight
// space; sigmoid(30) differs from 1 by less than 1e-13.
inline constexpr double kLogitCap = 30.0;

inline std::vector<double> softmax(std::span<const double> logits) {
    if (logits.empty()) throw std::invalid_argument("softmax of empty vector");
    double top = logits[0];
    for (double z : logits)
        if (z > top) top = z;
    std::vector<double> out(logits.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - top);
        sum += out[i];
    }
    for (double& v : out) v /= sum;
    return out;
}

// Rule distributions indexed by (pattern code, output symbol). A
// weight-backed table keeps its rows equal to the softmax of the weight
// rows on every update; a probability-specified table (exact embeddings,
// interpolations) carries no weights and cannot be trained.
class RuleTable {
public:
    RuleTable(Alphabet alphabet, std::size_t arity, std::vector<double> weights)
        : alphabet_(std::move(alphabet)),
          arity_(arity),
          patterns_(dca::pattern_count(alphabet_.size(), arity)),
          weights_(std::move(weights)),
          rho_(patterns_ * alphabet_.size(), 0.0) {
        if (weights_.size() != weight_count())
            throw std::invalid_argument("weight table has wrong size");
        for (std::size_t code = 0; code < patterns_; ++code) refresh_row(code);
    }

    static RuleTable from_distributions(Alphabet alphabet, std::size_t arity,
                                        std::vector<double> rho) {
        RuleTable table(std::move(alphabet), arity, Unchecked{});
        if (rho.size() != table.weight_count())
            throw std::invalid_argument("distribution table has wrong size");
        table.rho_ = std::move(rho);
        const std::size_t k = table.symbol_count();
        for (std::size_t code = 0; code < table.patterns_; ++code)
            validate_row(std::span(table.rho_).subspan(code * k, k));
        return table;
    }

    // Exact 0/1 rows; evolves bit-identically to the discrete rule.
    static RuleTable deterministic(Alphabet alphabet, const DiscreteRule& rule) {
        if (alphabet.size() != rule.symbol_count)
            throw std::invalid_argument("alphabet size does not match rule");
        std::vector<double> rho(rule.outputs.size() * rule.symbol_count, 0.0);
        for (std::size_t code = 0; code < rule.outputs.size(); ++code)
            rho[code * rule.symbol_count + rule.outputs[code]] = 1.0;
        return from_distributions(std::move(alphabet), rule.arity, std::move(rho));
    }

    const Alphabet& alphabet() const { return alphabet_; }
    std::size_t symbol_count() const { return alphabet_.size(); }
    std::size_t arity() const { return arity_; }
    std::size_t pattern_count() const { return patterns_; }
    std::size_t weight_count() const { return patterns_ * alphabet_.size(); }

    bool weight_backed() const { return !weights_.empty(); }

    double weight(std::size_t pattern, std::size_t sym) const {
        check_weight_backed();
        return weights_[pattern * symbol_count() + sym];
    }
    std::span<const double> weights() const {
        check_weight_backed();
        return weights_;
    }

    void set_weights(std::vector<double> weights) {
        if (weights.size() != weight_count())
            throw std::invalid_argument("weight table has wrong size");
        weights_ = std::move(weights);
        for (std::size_t code = 0; code < patterns_; ++code) refresh_row(code);
    }

    void set_weight(std::size_t pattern, std::size_t sym, double value) {
        check_weight_backed();
        if (pattern >= patterns_ || sym >= symbol_count())
            throw std::invalid_argument("weight index out of range");
        weights_[pattern * symbol_count() + sym] = value;
        refresh_row(pattern);
    }

    double rho(std::size_t pattern, std::size_t sym) const {
        return rho_[pattern * symbol_count() + sym];
    }
    std::span<const double> rho_row(std::size_t pattern) const {
        return std::span(rho_).subspan(pattern * symbol_count(), symbol_count());
    }
    std::span<const double> rho_flat() const { return rho_; }

    // Most probable output per pattern; ties resolve to the lowest index.
    DiscreteRule argmax_rule() const {
        std::vector<std::size_t> outputs(patterns_);
        for (std::size_t code = 0; code < patterns_; ++code) {
            auto row = rho_row(code);
            std::size_t best = 0;
            for (std::size_t a = 1; a < row.size(); ++a)
                if (row[a] > row[best]) best = a;
            outputs[code] = best;
        }
        return DiscreteRule(symbol_count(), arity_, std::move(outputs));
    }

    bool operator==(const RuleTable&) const = default;

private:
    struct Unchecked {};
    RuleTable(Alphabet alphabet, std::size_t arity, Unchecked)
        : alphabet_(std::move(alphabet)),
          arity_(arity),
          patterns_(dca::pattern_count(alphabet_.size(), arity)),
          rho_(patterns_ * alphabet_.size(), 0.0) {}

    static void validate_row(std::span<const double> row) {
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0 && p <= 1.0))
                throw std::invalid_argument("rule probability outside [0,1]");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9)
            throw std::invalid_argument("rule row does not sum to 1");
    }

    void check_weight_backed() const {
        if (!weight_backed())
            throw std::invalid_argument("rule table is probability-specified, no weights");
    }

    void refresh_row(std::size_t pattern) {
        const std::size_t k = symbol_count();
        auto row = softmax(std::span(weights_).subspan(pattern * k, k));
        double sum = 0.0;
        for (std::size_t a = 0; a < k; ++a) {
            rho_[pattern * k + a] = row[a];
            sum += row[a];
        }
        if (std::abs(sum - 1.0) > kRowSumTol)
            throw std::runtime_error("softmax row failed to normalize");
    }

    Alphabet alphabet_;
    std::size_t arity_;
    std::size_t patterns_;
    std::vector<double> weights_;  // empty when probability-specified
    std::vector<double> rho_;
};

}  // namespace dca
