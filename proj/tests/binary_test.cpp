#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dca/binary.hpp"
#include "dca/fdcheck.hpp"
#include "dca/grad.hpp"
#include "dca/rng.hpp"
#include "dca/rule_table.hpp"
#include "dca/step.hpp"

#include "support.hpp"

using namespace dca;
using dca::test::state_from_string;

namespace {

BinaryRule random_binary_rule(Rng& rng, double stddev = 1.0) {
    std::vector<double> weights(8);
    for (double& w : weights) w = rng.normal(0.0, stddev);
    return BinaryRule::from_weights(3, std::move(weights));
}

BinaryConfig random_binary_config(Rng& rng, std::size_t cells) {
    std::vector<double> p(cells);
    for (double& v : p) v = rng.uniform_unit();
    return BinaryConfig(std::move(p));
}

}  // namespace

TEST(PairProb, MatchesTheTwoCases) {
    EXPECT_DOUBLE_EQ(pair_prob(0.3, 1), 0.3);
    EXPECT_DOUBLE_EQ(pair_prob(0.3, 0), 0.7);
    EXPECT_DOUBLE_EQ(pair_prob(1.0, 0), 0.0);
}

TEST(BinaryRule, SigmoidKeepsProbsInsideTheOpenInterval) {
    Rng rng(5);
    BinaryRule rule = random_binary_rule(rng);
    for (std::size_t code = 0; code < 8; ++code) {
        EXPECT_GT(rule.prob(code), 0.0);
        EXPECT_LT(rule.prob(code), 1.0);
        EXPECT_NEAR(rule.prob(code), 1.0 / (1.0 + std::exp(-rule.weight(code))), 1e-12);
    }
    rule.set_weight(2, 4.0);
    EXPECT_NEAR(rule.prob(2), 1.0 / (1.0 + std::exp(-4.0)), 1e-12);
}

TEST(BinaryRule, ThresholdRecoversTheDiscreteTable) {
    // logits +-kLogitCap encode rule 30 in weight space
    const DiscreteRule discrete = wolfram_to_rule(30);
    std::vector<double> weights(8);
    for (std::size_t code = 0; code < 8; ++code)
        weights[code] = discrete.outputs[code] ? kLogitCap : -kLogitCap;
    const BinaryRule rule = BinaryRule::from_weights(3, weights);
    EXPECT_EQ(rule.thresholded(), discrete);
}

TEST(SigmoidSoftmaxIdentity, TwoLogitSoftmaxEqualsSigmoidOfTheDifference) {
    for (double d : {-30.0, -4.0, -0.5, 0.0, 0.5, 4.0, 30.0}) {
        const std::vector<double> logits{0.0, d};
        const auto rho = softmax(logits);
        EXPECT_DOUBLE_EQ(rho[1], sigmoid(d));
        EXPECT_DOUBLE_EQ(rho[0], sigmoid(-d));
    }
}

TEST(BinaryStep, UniformConfigAveragesTheRuleRows) {
    Rng rng(7);
    const BinaryRule rule = random_binary_rule(rng);
    const Topology topo = Topology::ring(8);
    const auto next = binary_step(rule, BinaryConfig::uniform(8), topo);
    double mean = 0.0;
    for (std::size_t code = 0; code < 8; ++code) mean += rule.prob(code);
    mean /= 8.0;
    for (std::size_t cell = 0; cell < 8; ++cell) EXPECT_NEAR(next.at(cell), mean, 1e-12);
}

TEST(BinaryStep, AgreesWithTheGeneralEngine) {
    Rng rng(11);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 5 + rng.uniform_index(8);
        const Topology topo = Topology::ring(n);
        const BinaryRule rule = random_binary_rule(rng);
        const RuleTable table = to_rule_table(rule);
        BinaryConfig binary = random_binary_config(rng, n);
        Configuration general = to_configuration(binary);
        for (int t = 0; t < 5; ++t) {
            binary = binary_step(rule, binary, topo);
            general = dca_step(table, general, topo);
            for (std::size_t cell = 0; cell < n; ++cell)
                ASSERT_NEAR(binary.at(cell), general.at(cell, 1), 1e-12)
                    << "instance " << instance << " t=" << t;
        }
    }
}

TEST(BinaryStep, InterpolationTableMatchesGeneralEngine) {
    // first interpolation table at alpha = 0.5, black probabilities by code
    const std::vector<double> black{1, 1, 1, 1, 1, 0, 0.5, 0};
    const BinaryRule rule = BinaryRule::from_probs(3, black);
    const RuleTable table = to_rule_table(rule);
    const Topology topo = Topology::ring(16);
    Rng rng(13);
    const auto start = random_state(rng, 16, 2);
    BinaryConfig binary = BinaryConfig::delta(start);
    Configuration general = Configuration::delta(start, 2);
    for (int t = 0; t < 20; ++t) {
        binary = binary_step(rule, binary, topo);
        general = dca_step(table, general, topo);
        // both engines see the same trajectory; their rounding disagrees a
        // little more with every step
        const double tol = t < 5 ? 1e-12 : 1e-10;
        for (std::size_t cell = 0; cell < 16; ++cell) {
            ASSERT_NEAR(binary.at(cell), general.at(cell, 1), tol) << "t=" << t;
            ASSERT_GE(binary.at(cell), 0.0);
            ASSERT_LE(binary.at(cell), 1.0);
        }
    }
}

TEST(BinaryStep, RejectsMismatchedRing) {
    Rng rng(17);
    const BinaryRule rule = random_binary_rule(rng);
    EXPECT_THROW(binary_step(rule, BinaryConfig::uniform(5), Topology::ring(8)),
                 std::invalid_argument);
}

TEST(BinaryGradStep, FirstStepFromDeltaIsTheSigmoidDerivative) {
    const Topology topo = Topology::ring(8);
    Rng rng(19);
    const BinaryRule rule = random_binary_rule(rng);
    const auto state = state_from_string("00110101");
    const BinaryConfig config = BinaryConfig::delta(state);
    const BinaryGradient zero(8, 8);

    const auto [next, grad] = binary_grad_step(rule, config, zero, topo);
    EXPECT_EQ(next, binary_step(rule, config, topo));
    for (std::size_t cell = 0; cell < 8; ++cell) {
        std::vector<std::size_t> pattern(3);
        for (std::size_t s = 0; s < 3; ++s) pattern[s] = state[topo.neighbor(cell, s)];
        const std::size_t realized = encode_pattern(pattern, 2);
        for (std::size_t code = 0; code < 8; ++code) {
            const double rho = rule.prob(code);
            const double expected = code == realized ? rho * (1.0 - rho) : 0.0;
            EXPECT_NEAR(grad.at(cell, code), expected, 1e-15);
        }
    }
}

TEST(BinaryGradStep, MatchesFiniteDifferences) {
    const Topology topo = Topology::ring(8);
    Rng rng(23);
    const BinaryRule rule = random_binary_rule(rng);
    const BinaryConfig initial = BinaryConfig::delta(random_state(rng, 8, 2));
    const auto run = binary_grad_run(rule, initial, topo, 3);
    const auto fd = fd_binary_config_gradient(rule, initial, topo, 3);
    EXPECT_LT(max_component_error(run.gradient.flat(), fd.flat()), 1e-5);
}

TEST(BinaryGradStep, MatchesTheGeneralEngineThroughTheBridge) {
    // moving the binary weight moves only the black logit, so the binary
    // derivative is the general (black, pattern, black) component
    Rng rng(29);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 5 + rng.uniform_index(8);
        const std::size_t steps = 1 + rng.uniform_index(4);
        const Topology topo = Topology::ring(n);
        const BinaryRule rule = random_binary_rule(rng);
        const RuleTable table = to_rule_table(rule);
        const auto state = random_state(rng, n, 2);

        const auto binary = binary_grad_run(rule, BinaryConfig::delta(state), topo, steps);
        const auto general = grad_run(table, Configuration::delta(state, 2), topo, steps);
        for (std::size_t cell = 0; cell < n; ++cell) {
            ASSERT_NEAR(binary.configs.back().at(cell),
                        general.configs.back().at(cell, 1), 1e-12);
            for (std::size_t code = 0; code < 8; ++code)
                ASSERT_NEAR(binary.gradient.at(cell, code),
                            general.gradient.at(cell, 1, code, 1), 1e-10)
                    << "instance " << instance;
        }
    }
}

TEST(BinaryGradStep, RejectsMismatchedGradient) {
    Rng rng(31);
    const BinaryRule rule = random_binary_rule(rng);
    const Topology topo = Topology::ring(8);
    EXPECT_THROW(
        binary_grad_step(rule, BinaryConfig::uniform(8), BinaryGradient(7, 8), topo),
        std::invalid_argument);
}

// property: values stay inside [0,1] without any clamping
TEST(BinaryInvariants, RangeIsPreserved) {
    Rng rng(37);
    for (int instance = 0; instance < 10; ++instance) {
        const std::size_t n = 5 + rng.uniform_index(8);
        const Topology topo = Topology::ring(n);
        const BinaryRule rule = random_binary_rule(rng);
        BinaryConfig config = random_binary_config(rng, n);
        for (int t = 0; t < 30; ++t) {
            config = binary_step(rule, config, topo);
            for (std::size_t cell = 0; cell < n; ++cell) {
                EXPECT_GE(config.at(cell), -kBinaryRangeTol);
                EXPECT_LE(config.at(cell), 1.0 + kBinaryRangeTol);
            }
        }
    }
}
