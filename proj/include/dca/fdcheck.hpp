#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include "dca/binary.hpp"
#include "dca/grad.hpp"
#include "dca/optim.hpp"
#include "dca/rng.hpp"
#include "dca/step.hpp"

namespace dca {

// Central-difference checks of the propagated gradients. Everything here
// runs the plain step engines on perturbed weights; the propagation scheme
// under test is never called.

inline double component_error(double a, double b, double abs_floor = 1e-8) {
    const double diff = std::abs(a - b);
    if (diff <= abs_floor) return 0.0;
    return diff / std::max(std::abs(a), std::abs(b));
}

inline double max_component_error(std::span<const double> a, std::span<const double> b,
                                  double abs_floor = 1e-8) {
    if (a.size() != b.size())
        throw std::invalid_argument("comparing gradients of different size");
    double worst = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        worst = std::max(worst, component_error(a[i], b[i], abs_floor));
    return worst;
}

inline ConfigGradient fd_config_gradient(const RuleTable& rule,
                                         const Configuration& initial,
                                         const Topology& topology, std::size_t steps,
                                         double step_size = 1e-6) {
    ConfigGradient out(initial.cell_count(), rule.symbol_count(), rule.pattern_count());
    for (std::size_t code = 0; code < rule.pattern_count(); ++code)
        for (std::size_t sym = 0; sym < rule.symbol_count(); ++sym) {
            const double w = rule.weight(code, sym);
            RuleTable plus = rule;
            plus.set_weight(code, sym, w + step_size);
            RuleTable minus = rule;
            minus.set_weight(code, sym, w - step_size);
            const Configuration hi = dca_run(plus, initial, topology, steps).back();
            const Configuration lo = dca_run(minus, initial, topology, steps).back();
            for (std::size_t cell = 0; cell < initial.cell_count(); ++cell)
                for (std::size_t a = 0; a < rule.symbol_count(); ++a)
                    out.at(cell, a, code, sym) =
                        (hi.at(cell, a) - lo.at(cell, a)) / (2.0 * step_size);
        }
    return out;
}

inline std::vector<double> fd_loss_gradient(const RuleTable& rule,
                                            const Configuration& initial,
                                            const Topology& topology, std::size_t steps,
                                            const TargetSpec& target_spec,
                                            double step_size = 1e-6) {
    const Configuration target = resolve_target(target_spec, initial, topology, steps);
    std::vector<double> out(rule.weight_count());
    for (std::size_t code = 0; code < rule.pattern_count(); ++code)
        for (std::size_t sym = 0; sym < rule.symbol_count(); ++sym) {
            const double w = rule.weight(code, sym);
            RuleTable plus = rule;
            plus.set_weight(code, sym, w + step_size);
            RuleTable minus = rule;
            minus.set_weight(code, sym, w - step_size);
            const double hi = cross_entropy(target, dca_run(plus, initial, topology, steps).back());
            const double lo = cross_entropy(target, dca_run(minus, initial, topology, steps).back());
            out[code * rule.symbol_count() + sym] = (hi - lo) / (2.0 * step_size);
        }
    return out;
}

inline BinaryGradient fd_binary_config_gradient(const BinaryRule& rule,
                                                const BinaryConfig& initial,
                                                const Topology& topology,
                                                std::size_t steps,
                                                double step_size = 1e-6) {
    BinaryGradient out(initial.cell_count(), rule.pattern_count());
    for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
        const double w = rule.weight(code);
        BinaryRule plus = rule;
        plus.set_weight(code, w + step_size);
        BinaryRule minus = rule;
        minus.set_weight(code, w - step_size);
        const BinaryConfig hi = binary_run(plus, initial, topology, steps).back();
        const BinaryConfig lo = binary_run(minus, initial, topology, steps).back();
        for (std::size_t cell = 0; cell < initial.cell_count(); ++cell)
            out.at(cell, code) = (hi.at(cell) - lo.at(cell)) / (2.0 * step_size);
    }
    return out;
}

inline std::vector<double> fd_binary_loss_gradient(const BinaryRule& rule,
                                                   const BinaryConfig& initial,
                                                   const Topology& topology,
                                                   std::size_t steps,
                                                   const TargetSpec& target_spec,
                                                   double step_size = 1e-6) {
    const BinaryConfig target = resolve_target(target_spec, initial, topology, steps);
    std::vector<double> out(rule.pattern_count());
    for (std::size_t code = 0; code < rule.pattern_count(); ++code) {
        const double w = rule.weight(code);
        BinaryRule plus = rule;
        plus.set_weight(code, w + step_size);
        BinaryRule minus = rule;
        minus.set_weight(code, w - step_size);
        const double hi = cross_entropy(target, binary_run(plus, initial, topology, steps).back());
        const double lo = cross_entropy(target, binary_run(minus, initial, topology, steps).back());
        out[code] = (hi - lo) / (2.0 * step_size);
    }
    return out;
}

struct GradCheckSettings {
    std::size_t instances = 20;
    std::uint64_t seed = 1;
    double step_size = 1e-6;
    double rel_tolerance = 1e-5;
    double abs_floor = 1e-8;
    std::size_t min_ring = 6;
    std::size_t max_ring = 12;
    std::size_t min_steps = 1;
    std::size_t max_steps = 5;
};

struct GradCheckReport {
    std::size_t instances = 0;
    double max_config_gradient_error = 0.0;
    double max_loss_gradient_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Seeded sweep of two-symbol, radius-1 instances with standard-normal
// weights and random delta starts. Checks both the full configuration
// gradient and the loss gradient against central differences.
inline GradCheckReport run_gradcheck(const GradCheckSettings& settings = {}) {
    if (settings.instances == 0)
        throw std::invalid_argument("gradcheck needs at least one instance");
    if (settings.min_ring < 3 || settings.max_ring < settings.min_ring ||
        settings.min_steps < 1 || settings.max_steps < settings.min_steps)
        throw std::invalid_argument("bad gradcheck ranges");

    GradCheckReport report;
    report.instances = settings.instances;
    report.tolerance = settings.rel_tolerance;

    Rng rng(settings.seed);
    for (std::size_t i = 0; i < settings.instances; ++i) {
        const std::size_t ring =
            settings.min_ring + rng.uniform_index(settings.max_ring - settings.min_ring + 1);
        const std::size_t steps =
            settings.min_steps + rng.uniform_index(settings.max_steps - settings.min_steps + 1);
        const Topology topology = Topology::ring(ring);
        RuleTable rule(Alphabet::binary(), 3, random_normal_weights(rng, 16, 1.0));
        const Configuration initial = random_delta_configuration(rng, ring, 2);

        const auto run = grad_run(rule, initial, topology, steps);
        const auto fd = fd_config_gradient(rule, initial, topology, steps, settings.step_size);
        report.max_config_gradient_error =
            std::max(report.max_config_gradient_error,
                     max_component_error(run.gradient.flat(), fd.flat(), settings.abs_floor));

        const TargetSpec target = MajorityTarget{};
        const auto analytic = loss_gradient(rule, initial, topology, steps, target);
        const auto fd_loss =
            fd_loss_gradient(rule, initial, topology, steps, target, settings.step_size);
        report.max_loss_gradient_error =
            std::max(report.max_loss_gradient_error,
                     max_component_error(analytic.grad, fd_loss, settings.abs_floor));
    }
    report.pass = report.max_config_gradient_error < settings.rel_tolerance &&
                  report.max_loss_gradient_error < settings.rel_tolerance;
    return report;
}

}  // namespace dca
