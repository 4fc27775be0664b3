#include <gtest/gtest.h>

#include <cmath>
#include <stdexcept>
#include <vector>

#include "dca/binary.hpp"
#include "dca/fdcheck.hpp"
#include "dca/optim.hpp"
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

}  // namespace

TEST(MajorityTarget, SumsProbabilityMassOverTheRing) {
    // 5 cells at 0.9 black and 3 at 0.1: total black 4.8 beats white 3.2
    std::vector<double> p{0.9, 0.9, 0.9, 0.9, 0.9, 0.1, 0.1, 0.1};
    const auto target = majority_target(BinaryConfig(p));
    for (std::size_t cell = 0; cell < 8; ++cell) EXPECT_EQ(target.at(cell), 1.0);

    const auto general = majority_target(to_configuration(BinaryConfig(p)));
    for (std::size_t cell = 0; cell < 8; ++cell) EXPECT_EQ(general.at(cell, 1), 1.0);
}

TEST(MajorityTarget, TieGoesToTheLowestSymbol) {
    const auto target = majority_target(Configuration::uniform(6, 2));
    for (std::size_t cell = 0; cell < 6; ++cell) {
        EXPECT_EQ(target.at(cell, 0), 1.0);
        EXPECT_EQ(target.at(cell, 1), 0.0);
    }
}

TEST(MajorityTarget, MostlyWhiteDeltaGoesWhite) {
    const auto config = Configuration::delta(state_from_string("00010000"), 2);
    const auto target = majority_target(config);
    for (std::size_t cell = 0; cell < 8; ++cell) EXPECT_EQ(target.at(cell, 0), 1.0);
}

TEST(CrossEntropy, ZeroWhenTargetEqualsDeltaActual) {
    const auto config = Configuration::delta(state_from_string("0110"), 2);
    EXPECT_EQ(cross_entropy(config, config), 0.0);
}

TEST(CrossEntropy, SingleCellHalfProbability) {
    Configuration target(1, 2);
    target.at(0, 1) = 1.0;
    Configuration actual(1, 2);
    actual.at(0, 0) = 0.5;
    actual.at(0, 1) = 0.5;
    EXPECT_NEAR(cross_entropy(target, actual), std::log(2.0), 1e-15);
}

TEST(CrossEntropy, GeneralAndBinaryFormsAgree) {
    Rng rng(3);
    for (int instance = 0; instance < 20; ++instance) {
        const std::size_t n = 4 + rng.uniform_index(8);
        std::vector<double> t(n), p(n);
        for (double& v : t) v = rng.uniform_unit();
        for (double& v : p) v = 0.05 + 0.9 * rng.uniform_unit();
        const BinaryConfig bt(t), bp(p);
        const double binary_form = cross_entropy(bt, bp);
        const double general_form =
            cross_entropy(to_configuration(bt), to_configuration(bp));
        EXPECT_NEAR(binary_form, general_form, 1e-12);
    }
}

TEST(CrossEntropy, RejectsMismatchedDimensions) {
    EXPECT_THROW(
        cross_entropy(Configuration::uniform(4, 2), Configuration::uniform(5, 2)),
        std::invalid_argument);
}

TEST(LossGradient, ZeroLossOnAnExactDeterministicMatch) {
    // deterministic rule, target = the same rule applied for n steps
    const Topology topo = Topology::ring(8);
    const DiscreteRule discrete = wolfram_to_rule(30);
    const RuleTable rule = RuleTable::deterministic(Alphabet::binary(), discrete);
    const auto initial = Configuration::delta(state_from_string("00010110"), 2);
    const auto result = loss_gradient(rule, initial, topo, 2, RuleTarget{discrete});
    EXPECT_LE(std::abs(result.loss), 8 * 2 * 1e-12);
    for (double g : result.grad) EXPECT_EQ(g, 0.0);
}

TEST(LossGradient, MatchesFiniteDifferencesOnMajorityTarget) {
    const Topology topo = Topology::ring(8);
    Rng rng(7);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 8, 2);
    const TargetSpec target = MajorityTarget{};
    const auto analytic = loss_gradient(rule, initial, topo, 2, target);
    const auto fd = fd_loss_gradient(rule, initial, topo, 2, target);
    EXPECT_LT(max_component_error(analytic.grad, fd), 1e-5);
}

TEST(LossGradient, MatchesFiniteDifferencesOnRuleTarget) {
    const Topology topo = Topology::ring(8);
    Rng rng(11);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 8, 2);
    const TargetSpec target = RuleTarget{wolfram_to_rule(30)};
    const auto analytic = loss_gradient(rule, initial, topo, 3, target);
    const auto fd = fd_loss_gradient(rule, initial, topo, 3, target);
    EXPECT_LT(max_component_error(analytic.grad, fd), 1e-5);
}

TEST(LossGradient, BinaryPathMatchesFiniteDifferences) {
    const Topology topo = Topology::ring(8);
    Rng rng(13);
    std::vector<double> weights(8);
    for (double& w : weights) w = rng.normal(0.0, 1.0);
    const BinaryRule rule = BinaryRule::from_weights(3, weights);
    const BinaryConfig initial = BinaryConfig::delta(random_state(rng, 8, 2));
    const TargetSpec target = RuleTarget{wolfram_to_rule(110)};
    const auto analytic = loss_gradient(rule, initial, topo, 3, target);
    const auto fd = fd_binary_loss_gradient(rule, initial, topo, 3, target);
    EXPECT_LT(max_component_error(analytic.grad, fd), 1e-5);
}

TEST(LossGradient, NeedsAtLeastOneStep) {
    Rng rng(17);
    const RuleTable rule = random_rule(rng);
    const auto initial = random_delta_configuration(rng, 6, 2);
    EXPECT_THROW(
        loss_gradient(rule, initial, Topology::ring(6), 0, TargetSpec{MajorityTarget{}}),
        std::invalid_argument);
}

TEST(Train, ZeroIterationsChangeNothing) {
    auto state = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(11), 4,
        99);
    const auto before = state.rule;
    const auto history = train(state, 1, RuleTarget{wolfram_to_rule(30)}, 0);
    EXPECT_TRUE(history.loss.empty());
    EXPECT_EQ(state.rule, before);
    EXPECT_EQ(state.step_count, 0u);
}

TEST(Train, RecoversRule30FromItsOneStepBehavior) {
    auto state = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(11), 32,
        2024, TrainOptions{0.5, 0.0});
    const auto history = train(state, 1, RuleTarget{wolfram_to_rule(30)}, 2000);
    ASSERT_EQ(history.loss.size(), 2000u);
    EXPECT_EQ(state.rule.thresholded(), wolfram_to_rule(30));
    EXPECT_LT(history.loss.back(), 0.01);
}

TEST(Train, LossIsNonIncreasingForASmallRate) {
    auto state = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(11), 32,
        2024, TrainOptions{0.05, 0.0});
    const auto history = train(state, 1, RuleTarget{wolfram_to_rule(30)}, 100);
    for (std::size_t i = 1; i < history.loss.size(); ++i)
        EXPECT_LE(history.loss[i], history.loss[i - 1] + 1e-12) << "iteration " << i;
}

TEST(Train, DeterministicGivenTheSeed) {
    const auto run = [] {
        auto state = make_binary_train_state(
            BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(9),
            8, 77, TrainOptions{0.3, 0.5});
        return train(state, 2, TargetSpec{MajorityTarget{}}, 40).loss;
    };
    const auto first = run();
    const auto second = run();
    ASSERT_EQ(first.size(), second.size());
    for (std::size_t i = 0; i < first.size(); ++i) EXPECT_EQ(first[i], second[i]);
}

TEST(Train, BatchGradientIsTheSumOfExampleGradients) {
    const Topology topo = Topology::ring(9);
    Rng rng(19);
    std::vector<double> weights(8);
    for (double& w : weights) w = rng.normal(0.0, 0.5);
    const BinaryRule rule = BinaryRule::from_weights(3, weights);
    const TargetSpec target = RuleTarget{wolfram_to_rule(90)};

    auto state = make_binary_train_state(rule, topo, 6, 31, TrainOptions{1.0, 0.0});
    std::vector<double> summed(8, 0.0);
    for (const auto& example : state.batch) {
        const auto lg = loss_gradient(rule, example, topo, 1, target);
        for (std::size_t w = 0; w < 8; ++w) summed[w] += lg.grad[w];
    }
    // one plain-descent iteration applies exactly the summed gradient
    train(state, 1, target, 1);
    for (std::size_t w = 0; w < 8; ++w)
        EXPECT_NEAR(state.rule.weight(w), rule.weight(w) - summed[w], 1e-12);
}

TEST(Train, GeneralEngineRecoversADeterministicTarget) {
    auto state = make_train_state(
        RuleTable(Alphabet::binary(), 3, std::vector<double>(16, 0.0)),
        Topology::ring(9), 16, 4242, TrainOptions{0.5, 0.0});
    const auto history = train(state, 1, RuleTarget{wolfram_to_rule(30)}, 400);
    EXPECT_EQ(state.rule.argmax_rule(), wolfram_to_rule(30));
    EXPECT_LT(history.loss.back(), 0.05);
}

TEST(Train, AbortsOnNonFiniteValues) {
    auto state = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(9), 4,
        55, TrainOptions{HUGE_VAL, 0.0});
    try {
        train(state, 1, RuleTarget{wolfram_to_rule(30)}, 5);
        FAIL() << "expected a NumericalError";
    } catch (const NumericalError& e) {
        EXPECT_NE(std::string(e.what()).find("iteration"), std::string::npos);
    }
}

TEST(Train, RejectsBadSettings) {
    auto state = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(9), 4,
        55, TrainOptions{0.0, 0.0});
    EXPECT_THROW(train(state, 1, TargetSpec{MajorityTarget{}}, 1), std::invalid_argument);

    auto empty = make_binary_train_state(
        BinaryRule::from_weights(3, std::vector<double>(8, 0.0)), Topology::ring(9), 0,
        55);
    EXPECT_THROW(train(empty, 1, TargetSpec{MajorityTarget{}}, 1), std::invalid_argument);
}
