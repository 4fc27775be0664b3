#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "dca/binary.hpp"
#include "dca/configuration.hpp"
#include "dca/discrete.hpp"
#include "dca/errors.hpp"
#include "dca/grad.hpp"
#include "dca/rng.hpp"
#include "dca/rule_table.hpp"
#include "dca/topology.hpp"

namespace dca {

// Cross-entropy log arguments are clamped below at this value. Rule rows
// from softmax are strictly positive, but delta targets against near-zero
// predictions would otherwise send the loss to infinity mid-training. The
// gradient coefficients use the same clamp so loss and gradient stay
// consistent.
inline constexpr double kLogFloor = 1e-12;

struct MajorityTarget {};
struct FixedTarget {
    Configuration config;
};
struct RuleTarget {
    DiscreteRule rule;
};
using TargetSpec = std::variant<MajorityTarget, FixedTarget, RuleTarget>;

// Every cell becomes the delta at the symbol with the largest probability
// mass summed over the whole ring; ties go to the lowest symbol index.
inline Configuration majority_target(const Configuration& config) {
    const std::size_t k = config.symbol_count();
    std::vector<double> mass(k, 0.0);
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell)
        for (std::size_t a = 0; a < k; ++a) mass[a] += config.at(cell, a);
    std::size_t winner = 0;
    for (std::size_t a = 1; a < k; ++a)
        if (mass[a] > mass[winner]) winner = a;
    Configuration out(config.cell_count(), k);
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell)
        out.at(cell, winner) = 1.0;
    return out;
}

inline BinaryConfig majority_target(const BinaryConfig& config) {
    double black = 0.0;
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell)
        black += config.at(cell);
    const double white = static_cast<double>(config.cell_count()) - black;
    const double value = black > white ? 1.0 : 0.0;  // tie goes to white
    return BinaryConfig(std::vector<double>(config.cell_count(), value));
}

namespace detail {

inline DiscreteState delta_state_of(const Configuration& config) {
    auto state = config.argmax_state();
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell)
        if (config.at(cell, state[cell]) < 1.0 - kSimplexTol)
            throw std::invalid_argument(
                "rule targets need a delta initial configuration");
    return state;
}

inline DiscreteState delta_state_of(const BinaryConfig& config) {
    DiscreteState state(config.cell_count());
    for (std::size_t cell = 0; cell < config.cell_count(); ++cell) {
        const double p = config.at(cell);
        if (p > kSimplexTol && p < 1.0 - kSimplexTol)
            throw std::invalid_argument(
                "rule targets need a delta initial configuration");
        state[cell] = p > 0.5 ? 1 : 0;
    }
    return state;
}

}  // namespace detail

// The training target for one initial configuration: either a fixed
// configuration, the majority of the initial one, or the initial state
// advanced `steps` times by a reference discrete rule.
inline Configuration resolve_target(const TargetSpec& spec, const Configuration& initial,
                                    const Topology& topology, std::size_t steps) {
    if (std::holds_alternative<MajorityTarget>(spec)) return majority_target(initial);
    if (const auto* fixed = std::get_if<FixedTarget>(&spec)) {
        if (fixed->config.cell_count() != initial.cell_count() ||
            fixed->config.symbol_count() != initial.symbol_count())
            throw std::invalid_argument("fixed target dimensions do not match");
        return fixed->config;
    }
    const auto& rule = std::get<RuleTarget>(spec).rule;
    auto state = detail::delta_state_of(initial);
    auto trajectory = discrete_run(rule, state, topology, steps);
    return Configuration::delta(trajectory.back(), initial.symbol_count());
}

inline BinaryConfig resolve_target(const TargetSpec& spec, const BinaryConfig& initial,
                                   const Topology& topology, std::size_t steps) {
    if (std::holds_alternative<MajorityTarget>(spec)) return majority_target(initial);
    if (const auto* fixed = std::get_if<FixedTarget>(&spec)) {
        if (fixed->config.cell_count() != initial.cell_count())
            throw std::invalid_argument("fixed target dimensions do not match");
        return to_binary_config(fixed->config);
    }
    const auto& rule = std::get<RuleTarget>(spec).rule;
    if (rule.symbol_count != 2)
        throw std::invalid_argument("binary engine needs a two-symbol target rule");
    auto state = detail::delta_state_of(initial);
    auto trajectory = discrete_run(rule, state, topology, steps);
    return BinaryConfig::delta(trajectory.back());
}

// E = -sum over cells and symbols of target * log(actual); zero-target
// terms are skipped, log arguments clamped below at kLogFloor.
inline double cross_entropy(const Configuration& target, const Configuration& actual) {
    if (target.cell_count() != actual.cell_count() ||
        target.symbol_count() != actual.symbol_count())
        throw std::invalid_argument("cross entropy dimensions do not match");
    double loss = 0.0;
    for (std::size_t cell = 0; cell < target.cell_count(); ++cell)
        for (std::size_t a = 0; a < target.symbol_count(); ++a) {
            const double t = target.at(cell, a);
            if (t == 0.0) continue;
            loss -= t * std::log(std::max(actual.at(cell, a), kLogFloor));
        }
    return loss;
}

inline double cross_entropy(const BinaryConfig& target, const BinaryConfig& actual) {
    if (target.cell_count() != actual.cell_count())
        throw std::invalid_argument("cross entropy dimensions do not match");
    double loss = 0.0;
    for (std::size_t cell = 0; cell < target.cell_count(); ++cell) {
        const double t = target.at(cell);
        const double p = actual.at(cell);
        if (t > 0.0) loss -= t * std::log(std::max(p, kLogFloor));
        if (t < 1.0) loss -= (1.0 - t) * std::log(std::max(1.0 - p, kLogFloor));
    }
    return loss;
}

struct LossGrad {
    double loss = 0.0;
    std::vector<double> grad;  // same layout as the rule's weights
};

// Propagates configuration gradients over `steps` updates and contracts
// them with the cross-entropy coefficients at the final configuration.
inline LossGrad loss_gradient(const RuleTable& rule, const Configuration& initial,
                              const Topology& topology, std::size_t steps,
                              const TargetSpec& target_spec) {
    if (steps == 0) throw std::invalid_argument("loss needs at least one step");
    const Configuration target = resolve_target(target_spec, initial, topology, steps);
    auto run = grad_run(rule, initial, topology, steps);
    const Configuration& final_config = run.configs.back();

    LossGrad result;
    result.loss = cross_entropy(target, final_config);
    result.grad.assign(rule.weight_count(), 0.0);
    for (std::size_t cell = 0; cell < target.cell_count(); ++cell)
        for (std::size_t a = 0; a < target.symbol_count(); ++a) {
            const double t = target.at(cell, a);
            if (t == 0.0) continue;
            const double coeff = t / std::max(final_config.at(cell, a), kLogFloor);
            auto slice = run.gradient.weight_slice(cell, a);
            for (std::size_t w = 0; w < slice.size(); ++w)
                result.grad[w] -= coeff * slice[w];
        }
    return result;
}

inline LossGrad loss_gradient(const BinaryRule& rule, const BinaryConfig& initial,
                              const Topology& topology, std::size_t steps,
                              const TargetSpec& target_spec) {
    if (steps == 0) throw std::invalid_argument("loss needs at least one step");
    const BinaryConfig target = resolve_target(target_spec, initial, topology, steps);
    auto run = binary_grad_run(rule, initial, topology, steps);
    const BinaryConfig& final_config = run.configs.back();

    LossGrad result;
    result.loss = cross_entropy(target, final_config);
    result.grad.assign(rule.weight_count(), 0.0);
    for (std::size_t cell = 0; cell < target.cell_count(); ++cell) {
        const double t = target.at(cell);
        const double p = final_config.at(cell);
        double coeff = 0.0;
        if (t > 0.0) coeff += t / std::max(p, kLogFloor);
        if (t < 1.0) coeff -= (1.0 - t) / std::max(1.0 - p, kLogFloor);
        auto row = run.gradient.row(cell);
        for (std::size_t w = 0; w < row.size(); ++w)
            result.grad[w] -= coeff * row[w];
    }
    return result;
}

struct TrainOptions {
    double descent_rate = 0.5;
    double momentum = 0.0;
};

// Everything one descent run needs: the rule being trained, the batch of
// initial configurations the loss is summed over, and the velocity buffer
// for momentum.
template <class Rule, class Config>
struct TrainState {
    Rule rule;
    Topology topology;
    std::vector<Config> batch;
    TrainOptions options;
    std::uint64_t seed = 0;
    std::vector<double> velocity;
    std::uint64_t step_count = 0;
};

using GeneralTrainState = TrainState<RuleTable, Configuration>;
using BinaryTrainState = TrainState<BinaryRule, BinaryConfig>;

inline std::vector<double> random_normal_weights(Rng& rng, std::size_t count,
                                                 double stddev = 0.1) {
    std::vector<double> weights(count);
    for (double& w : weights) w = rng.normal(0.0, stddev);
    return weights;
}

inline BinaryTrainState make_binary_train_state(BinaryRule rule, Topology topology,
                                                std::size_t batch_size,
                                                std::uint64_t seed,
                                                TrainOptions options = {}) {
    BinaryTrainState state{std::move(rule), std::move(topology), {}, options, seed, {}, 0};
    Rng rng(seed);
    state.batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        state.batch.push_back(
            BinaryConfig::delta(random_state(rng, state.topology.ring_size(), 2)));
    state.velocity.assign(state.rule.weight_count(), 0.0);
    return state;
}

inline GeneralTrainState make_train_state(RuleTable rule, Topology topology,
                                          std::size_t batch_size, std::uint64_t seed,
                                          TrainOptions options = {}) {
    GeneralTrainState state{std::move(rule), std::move(topology), {}, options, seed, {}, 0};
    Rng rng(seed);
    state.batch.reserve(batch_size);
    for (std::size_t i = 0; i < batch_size; ++i)
        state.batch.push_back(random_delta_configuration(
            rng, state.topology.ring_size(), state.rule.symbol_count()));
    state.velocity.assign(state.rule.weight_count(), 0.0);
    return state;
}

struct TrainHistory {
    std::vector<double> loss;  // total batch loss before each update
};

using TrainCallback = std::function<void(std::size_t iteration, double batch_loss)>;

// Batch gradient descent with classical momentum:
//   v <- momentum * v + sum of per-example gradients
//   w <- w - descent_rate * v
// Examples are accumulated in batch order, so runs are bit-reproducible.
template <class Rule, class Config>
TrainHistory train(TrainState<Rule, Config>& state, std::size_t steps,
                   const TargetSpec& target, std::size_t iterations,
                   const TrainCallback& callback = {}) {
    if (state.batch.empty()) throw std::invalid_argument("training batch is empty");
    if (!(state.options.descent_rate > 0.0))
        throw std::invalid_argument("descent rate must be positive");
    if (!(state.options.momentum >= 0.0 && state.options.momentum < 1.0))
        throw std::invalid_argument("momentum must be in [0,1)");
    if (!state.rule.weight_backed())
        throw std::invalid_argument("training needs a weight-backed rule");
    const std::size_t wcount = state.rule.weight_count();
    if (state.velocity.size() != wcount)
        throw std::invalid_argument("velocity buffer has wrong size");

    TrainHistory history;
    history.loss.reserve(iterations);
    for (std::size_t iter = 0; iter < iterations; ++iter) {
        double batch_loss = 0.0;
        std::vector<double> batch_grad(wcount, 0.0);
        for (const Config& example : state.batch) {
            LossGrad lg = loss_gradient(state.rule, example, state.topology, steps, target);
            if (!std::isfinite(lg.loss))
                throw NumericalError("non-finite loss at iteration " +
                                     std::to_string(iter));
            for (std::size_t w = 0; w < wcount; ++w) {
                if (!std::isfinite(lg.grad[w]))
                    throw NumericalError("non-finite gradient at iteration " +
                                         std::to_string(iter) + ", weight " +
                                         std::to_string(w));
                batch_grad[w] += lg.grad[w];
            }
            batch_loss += lg.loss;
        }

        std::vector<double> weights(state.rule.weights().begin(),
                                    state.rule.weights().end());
        for (std::size_t w = 0; w < wcount; ++w) {
            state.velocity[w] = state.options.momentum * state.velocity[w] + batch_grad[w];
            weights[w] -= state.options.descent_rate * state.velocity[w];
            if (!std::isfinite(weights[w]))
                throw NumericalError("non-finite weight at iteration " +
                                     std::to_string(iter) + ", weight " +
                                     std::to_string(w));
        }
        state.rule.set_weights(std::move(weights));
        state.step_count += 1;
        history.loss.push_back(batch_loss);
        if (callback) callback(iter, batch_loss);
    }
    return history;
}

}  // namespace dca
