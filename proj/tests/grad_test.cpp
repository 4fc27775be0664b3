#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dca/configuration.hpp"
#include "dca/fdcheck.hpp"
#include "dca/grad.hpp"
#include "dca/rng.hpp"
#include "dca/rule_table.hpp"
#include "dca/step.hpp"

#include "support.hpp"

using namespace dca;
using dca::test::state_from_string;

namespace {

RuleTable random_rule(Rng& rng, double stddev = 1.0) {
    std::vector<double> weights(16);
    for (double& w : weights) w = rng.normal(0.0, stddev);
    return RuleTable(Alphabet::binary(), 3, std::move(weights));
}

double max_zero_sum_violation(const ConfigGradient& grad) {
    double worst = 0.0;
    for (std::size_t cell = 0; cell < grad.cell_count(); ++cell)
        for (std::size_t code = 0; code < grad.pattern_count(); ++code)
            for (std::size_t wsym = 0; wsym < grad.symbol_count(); ++wsym) {
                double sum = 0.0;
                for (std::size_t a = 0; a < grad.symbol_count(); ++a)
                    sum += grad.at(cell, a, code, wsym);
                worst = std::max(worst, std::abs(sum));
            }
    return worst;
}

}  // namespace

TEST(SoftmaxJacobian, UniformRow) {
    const std::vector<double> row{0.25, 0.25, 0.25, 0.25};
    const auto jac = softmax_jacobian(row);
    for (std::size_t a = 0; a < 4; ++a)
        for (std::size_t a1 = 0; a1 < 4; ++a1)
            EXPECT_NEAR(jac[a * 4 + a1], 0.25 * ((a == a1 ? 1.0 : 0.0) - 0.25), 1e-15);
}

TEST(SoftmaxJacobian, SaturatedRowVanishes) {
    const double eps = 1e-9;
    const std::vector<double> row{1.0 - eps, eps};
    const auto jac = softmax_jacobian(row);
    for (double entry : jac) EXPECT_NEAR(entry, 0.0, 2e-9);
}

TEST(SoftmaxJacobian, MatchesFiniteDifferencesOfSoftmax) {
    Rng rng(3);
    std::vector<double> logits(5);
    for (double& z : logits) z = rng.normal(0.0, 1.0);
    const auto rho = softmax(logits);
    const auto jac = softmax_jacobian(rho);
    const double h = 1e-6;
    for (std::size_t a1 = 0; a1 < logits.size(); ++a1) {
        auto hi = logits, lo = logits;
        hi[a1] += h;
        lo[a1] -= h;
        const auto rho_hi = softmax(hi);
        const auto rho_lo = softmax(lo);
        for (std::size_t a = 0; a < logits.size(); ++a) {
            const double fd = (rho_hi[a] - rho_lo[a]) / (2.0 * h);
            EXPECT_NEAR(jac[a * logits.size() + a1], fd, 1e-8);
        }
    }
    // rows of the Jacobian sum to zero
    for (std::size_t a = 0; a < logits.size(); ++a) {
        double sum = 0.0;
        for (std::size_t a1 = 0; a1 < logits.size(); ++a1) sum += jac[a * logits.size() + a1];
        EXPECT_NEAR(sum, 0.0, 1e-15);
    }
}

TEST(GradStep, FirstStepFromDeltaIsTheJacobianAtTheRealizedPattern) {
    const Topology topo = Topology::ring(8);
    Rng rng(41);
    const RuleTable rule = random_rule(rng);
    const auto state = state_from_string("00110101");
    const auto config = Configuration::delta(state, 2);
    const ConfigGradient zero(8, 2, 8);

    const auto [next, grad] = grad_step(rule, config, zero, topo);
    EXPECT_EQ(next, dca_step(rule, config, topo));

    for (std::size_t cell = 0; cell < 8; ++cell) {
        // pattern realized at this cell
        std::vector<std::size_t> pattern(3);
        for (std::size_t s = 0; s < 3; ++s) pattern[s] = state[topo.neighbor(cell, s)];
        const std::size_t realized = encode_pattern(pattern, 2);
        const auto jac = softmax_jacobian(rule.rho_row(realized));
        for (std::size_t code = 0; code < 8; ++code)
            for (std::size_t a = 0; a < 2; ++a)
                for (std::size_t wsym = 0; wsym < 2; ++wsym) {
                    const double expected =
                        code == realized ? jac[a * 2 + wsym] : 0.0;
                    EXPECT_NEAR(grad.at(cell, a, code, wsym), expected, 1e-15);
                }
    }
}

TEST(GradStep, RejectsMismatchedDimensions) {
    const Topology topo = Topology::ring(8);
    Rng rng(43);
    const RuleTable rule = random_rule(rng);
    const auto config = random_delta_configuration(rng, 8, 2);
    const ConfigGradient wrong(7, 2, 8);
    EXPECT_THROW(grad_step(rule, config, wrong, topo), std::invalid_argument);
}

TEST(GradStep, ThreeStepsMatchFiniteDifferences) {
    const Topology topo = Topology::ring(8);
    Rng rng(47);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 8, 2);
    const auto run = grad_run(rule, initial, topo, 3);
    const auto fd = fd_config_gradient(rule, initial, topo, 3);
    EXPECT_LT(max_component_error(run.gradient.flat(), fd.flat()), 1e-5);
}

TEST(GradRun, ZeroStepsLeaveTheSeedGradient) {
    const Topology topo = Topology::ring(6);
    Rng rng(53);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 6, 2);
    const auto run = grad_run(rule, initial, topo, 0);
    ASSERT_EQ(run.configs.size(), 1u);
    for (double v : run.gradient.flat()) EXPECT_EQ(v, 0.0);
}

TEST(GradRun, OneStepEqualsGradStep) {
    const Topology topo = Topology::ring(6);
    Rng rng(59);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 6, 2);
    const auto run = grad_run(rule, initial, topo, 1);
    const auto [next, grad] =
        grad_step(rule, initial, ConfigGradient(6, 2, 8), topo);
    EXPECT_EQ(run.configs.back(), next);
    EXPECT_EQ(run.gradient, grad);
}

TEST(GradRun, FourStepsMatchFiniteDifferences) {
    const Topology topo = Topology::ring(8);
    Rng rng(61);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_interior_configuration(rng, 8, 2);
    const auto run = grad_run(rule, initial, topo, 4);
    const auto fd = fd_config_gradient(rule, initial, topo, 4);
    EXPECT_LT(max_component_error(run.gradient.flat(), fd.flat()), 1e-5);
}

TEST(GradRun, ThreeSymbolAlphabetMatchesFiniteDifferences) {
    const Topology topo(6, {0, 1});
    Rng rng(63);
    std::vector<double> weights(9 * 3);
    for (double& w : weights) w = rng.normal(0.0, 1.0);
    const RuleTable rule(Alphabet({"0", "1", "2"}), 2, weights);
    const auto initial = random_interior_configuration(rng, 6, 3);
    const auto run = grad_run(rule, initial, topo, 3);
    const auto fd = fd_config_gradient(rule, initial, topo, 3);
    EXPECT_LT(max_component_error(run.gradient.flat(), fd.flat()), 1e-5);
}

// property: seeded instances across ring sizes and depths agree with the
// finite-difference oracle componentwise
TEST(GradInvariants, FiniteDifferenceAgreement) {
    Rng rng(67);
    for (int instance = 0; instance < 8; ++instance) {
        const std::size_t n = 6 + rng.uniform_index(7);
        const std::size_t steps = 1 + rng.uniform_index(5);
        const Topology topo = Topology::ring(n);
        const RuleTable rule = random_rule(rng);
        const auto initial = random_delta_configuration(rng, n, 2);
        const auto run = grad_run(rule, initial, topo, steps);
        const auto fd = fd_config_gradient(rule, initial, topo, steps);
        EXPECT_LT(max_component_error(run.gradient.flat(), fd.flat()), 1e-5)
            << "n=" << n << " steps=" << steps;
    }
}

// property: symbol-summed gradients vanish at every cell and step
TEST(GradInvariants, ZeroSumOverSymbols) {
    Rng rng(71);
    for (int instance = 0; instance < 5; ++instance) {
        const std::size_t n = 6 + rng.uniform_index(7);
        const Topology topo = Topology::ring(n);
        const RuleTable rule = random_rule(rng);
        auto config = random_delta_configuration(rng, n, 2);
        ConfigGradient grad(n, 2, 8);
        for (int t = 0; t < 5; ++t) {
            auto [next, next_grad] = grad_step(rule, config, grad, topo);
            config = std::move(next);
            grad = std::move(next_grad);
            EXPECT_LT(max_zero_sum_violation(grad), 1e-9) << "step " << t;
        }
    }
}

// the with-gradient and plain trajectories must be bit-identical
TEST(GradInvariants, ConfigurationsMatchPlainRunExactly) {
    Rng rng(73);
    const std::size_t n = 10;
    const Topology topo = Topology::ring(n);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_interior_configuration(rng, n, 2);
    const auto with_grad = grad_run(rule, initial, topo, 6);
    const auto plain = dca_run(rule, initial, topo, 6);
    ASSERT_EQ(with_grad.configs.size(), plain.size());
    for (std::size_t t = 0; t < plain.size(); ++t)
        EXPECT_EQ(with_grad.configs[t], plain[t]) << "step " << t;
}

// information travels at most max|offset| cells per step, so edits far
// from a cell cannot change its gradient
TEST(GradInvariants, GradientIsLocal) {
    const std::size_t n = 13;
    const std::size_t steps = 2;
    const Topology topo = Topology::ring(n);
    Rng rng(79);
    const RuleTable rule = random_rule(rng);
    auto base = random_interior_configuration(rng, n, 2);

    const std::size_t cell = 0;
    const std::size_t far_cell = 6;  // ring distance 6 > steps * max|offset| = 2
    auto edited = base;
    edited.at(far_cell, 0) = 0.9;
    edited.at(far_cell, 1) = 0.1;

    const auto run_base = grad_run(rule, base, topo, steps);
    const auto run_edit = grad_run(rule, edited, topo, steps);
    for (std::size_t a = 0; a < 2; ++a) {
        const auto slice_base = run_base.gradient.weight_slice(cell, a);
        const auto slice_edit = run_edit.gradient.weight_slice(cell, a);
        for (std::size_t w = 0; w < slice_base.size(); ++w)
            EXPECT_EQ(slice_base[w], slice_edit[w]);
    }
    // and the far cell itself did change
    EXPECT_NE(run_base.configs.back().at(far_cell, 0),
              run_edit.configs.back().at(far_cell, 0));
}
