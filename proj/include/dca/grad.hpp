#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <utility>
#include <vector>

#include "dca/configuration.hpp"
#include "dca/pattern.hpp"
#include "dca/rule_table.hpp"
#include "dca/step.hpp"
#include "dca/topology.hpp"

namespace dca {

// Derivative of every cell probability with respect to every rule weight:
// entry (cell, sym, pattern, wsym) = d config(cell)(sym) / d w(pattern)(wsym).
// Stored flat; the (pattern, wsym) block of one (cell, sym) pair is
// contiguous so propagation and loss contraction run over whole slices.
class ConfigGradient {
public:
    ConfigGradient(std::size_t cells, std::size_t symbol_count,
                   std::size_t pattern_count)
        : cells_(cells),
          symbols_(symbol_count),
          patterns_(pattern_count),
          values_(cells * symbol_count * pattern_count * symbol_count, 0.0) {}

    std::size_t cell_count() const { return cells_; }
    std::size_t symbol_count() const { return symbols_; }
    std::size_t pattern_count() const { return patterns_; }
    std::size_t weight_count() const { return patterns_ * symbols_; }

    double at(std::size_t cell, std::size_t sym, std::size_t pattern,
              std::size_t wsym) const {
        return values_[((cell * symbols_ + sym) * patterns_ + pattern) * symbols_ + wsym];
    }
    double& at(std::size_t cell, std::size_t sym, std::size_t pattern,
               std::size_t wsym) {
        return values_[((cell * symbols_ + sym) * patterns_ + pattern) * symbols_ + wsym];
    }

    // All weight derivatives of one cell probability, length weight_count().
    std::span<const double> weight_slice(std::size_t cell, std::size_t sym) const {
        return std::span(values_).subspan((cell * symbols_ + sym) * weight_count(),
                                          weight_count());
    }
    std::span<double> weight_slice(std::size_t cell, std::size_t sym) {
        return std::span(values_).subspan((cell * symbols_ + sym) * weight_count(),
                                          weight_count());
    }

    std::span<const double> flat() const { return values_; }

    bool operator==(const ConfigGradient&) const = default;

private:
    std::size_t cells_;
    std::size_t symbols_;
    std::size_t patterns_;
    std::vector<double> values_;
};

// J[a][a'] = rho(a) * (delta(a,a') - rho(a')); rows and columns sum to 0.
inline std::vector<double> softmax_jacobian(std::span<const double> rho_row) {
    const std::size_t k = rho_row.size();
    std::vector<double> jac(k * k);
    for (std::size_t a = 0; a < k; ++a)
        for (std::size_t a1 = 0; a1 < k; ++a1)
            jac[a * k + a1] = rho_row[a] * ((a == a1 ? 1.0 : 0.0) - rho_row[a1]);
    return jac;
}

// One forward step of the (configuration, gradient) pair. The returned
// configuration is computed by dca_step on the same inputs, so trajectories
// with and without gradients are bit-identical. The new gradient of a cell
// combines the softmax Jacobian at each realized pattern with the previous
// gradients of the neighbors:
//
//   direct:  J_y[a][a'] * prod_s x(nbr_s)(y_s)            (only at pattern y' = y)
//   chain :  rho(y)(a) * prod_{s' != s} x(nbr_s')(y_s') * grad(nbr_s, y_s)
//
// The partial products are re-multiplied explicitly: delta configurations
// put zeros in x and dividing the full product would produce 0/0.
inline std::pair<Configuration, ConfigGradient> grad_step(const RuleTable& rule,
                                                          const Configuration& config,
                                                          const ConfigGradient& grad,
                                                          const Topology& topology) {
    const std::size_t k = rule.symbol_count();
    const std::size_t arity = rule.arity();
    const std::size_t patterns = rule.pattern_count();
    if (grad.cell_count() != config.cell_count() || grad.symbol_count() != k ||
        grad.pattern_count() != patterns)
        throw std::invalid_argument("gradient dimensions do not match configuration and rule");

    Configuration next = dca_step(rule, config, topology);

    const std::size_t n = config.cell_count();
    const std::size_t wcount = patterns * k;
    const auto digits = pattern_digit_table(k, arity);
    ConfigGradient out(n, k, patterns);
    std::vector<std::size_t> nbr(arity);

    for (std::size_t cell = 0; cell < n; ++cell) {
        for (std::size_t s = 0; s < arity; ++s) nbr[s] = topology.neighbor(cell, s);

        for (std::size_t code = 0; code < patterns; ++code) {
            const std::size_t* digit = digits.data() + code * arity;
            auto row = rule.rho_row(code);

            double prod_all = 1.0;
            for (std::size_t s = 0; s < arity; ++s)
                prod_all *= config.at(nbr[s], digit[s]);
            if (prod_all != 0.0) {
                for (std::size_t a = 0; a < k; ++a) {
                    const double scaled = row[a] * prod_all;
                    for (std::size_t a1 = 0; a1 < k; ++a1)
                        out.at(cell, a, code, a1) +=
                            scaled * ((a == a1 ? 1.0 : 0.0) - row[a1]);
                }
            }

            for (std::size_t s = 0; s < arity; ++s) {
                double prod_except = 1.0;
                for (std::size_t s1 = 0; s1 < arity; ++s1)
                    if (s1 != s) prod_except *= config.at(nbr[s1], digit[s1]);
                if (prod_except == 0.0) continue;
                auto grad_in = grad.weight_slice(nbr[s], digit[s]);
                for (std::size_t a = 0; a < k; ++a) {
                    const double coeff = row[a] * prod_except;
                    if (coeff == 0.0) continue;
                    auto grad_out = out.weight_slice(cell, a);
                    for (std::size_t w = 0; w < wcount; ++w)
                        grad_out[w] += coeff * grad_in[w];
                }
            }
        }
    }
    return {std::move(next), std::move(out)};
}

struct GradRunResult {
    std::vector<Configuration> configs;  // trajectory including the input
    ConfigGradient gradient;             // of the final configuration
};

// Iterates grad_step from a zero seed gradient.
inline GradRunResult grad_run(const RuleTable& rule, const Configuration& config,
                              const Topology& topology, std::size_t steps) {
    GradRunResult result{{config},
                         ConfigGradient(config.cell_count(), rule.symbol_count(),
                                        rule.pattern_count())};
    result.configs.reserve(steps + 1);
    for (std::size_t i = 0; i < steps; ++i) {
        auto [next, grad] = grad_step(rule, result.configs.back(), result.gradient, topology);
        result.configs.push_back(std::move(next));
        result.gradient = std::move(grad);
    }
    return result;
}

}  // namespace dca
