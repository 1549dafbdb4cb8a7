#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <limits>
#include <random>

#include "beliefmarket/beliefs.hpp"
#include "beliefmarket/errors.hpp"
#include "beliefmarket/outcome_space.hpp"

using namespace beliefmarket;

namespace {

OutcomeSpace binary() { return OutcomeSpace({{"y", 2}}); }
OutcomeSpace two_binary() { return OutcomeSpace({{"y1", 2}, {"y2", 2}}); }

constexpr double kInf = std::numeric_limits<double>::infinity();

} // namespace

TEST_CASE("normalize") {
    auto u = normalize(std::vector<double>{1, 1, 1, 1});
    for (double v : u) CHECK(v == Catch::Approx(0.25));

    // sqrt(0.45)/sqrt(0.05) = 3, so the normalized pair is exactly (3/4, 1/4).
    auto g = normalize(std::vector<double>{std::sqrt(0.45), std::sqrt(0.05)});
    CHECK(g[0] == Catch::Approx(0.75).margin(1e-14));
    CHECK(g[1] == Catch::Approx(0.25).margin(1e-14));

    CHECK(normalize(std::vector<double>{0.0, 2.0})[0] == 0.0);
    CHECK_THROWS_AS(normalize(std::vector<double>{0.0, 0.0}), DomainError);
    CHECK_THROWS_AS(normalize(std::vector<double>{1.0, -0.1}), DomainError);
    CHECK_THROWS_AS(normalize(std::vector<double>{1.0, kInf}), DomainError);
    CHECK_THROWS_AS(normalize(std::vector<double>{}), DomainError);
}

TEST_CASE("belief tables are validated and normalized") {
    auto space = binary();
    CHECK_THROWS_AS(Belief::full(space, {0.5, 0.3, 0.2}), ContractError);
    auto b = Belief::full(space, {2.0, 6.0});
    CHECK(b.probability(0) == Catch::Approx(0.25));
    CHECK(b.probability(1) == Catch::Approx(0.75));
    CHECK_FALSE(b.scoped());

    auto zero = Belief::full(space, {1.0, 0.0});
    CHECK(zero.probability(1) == 0.0);
    CHECK(zero.log_probability(1) == -kInf);
    CHECK(zero.log_probability(0) == Catch::Approx(0.0));
}

TEST_CASE("scoped beliefs know their clique") {
    auto space = two_binary();
    auto b = Belief::over(Clique({1}), space, {0.3, 0.7});
    REQUIRE(b.scoped());
    CHECK(b.scope().members() == std::vector<int>{1});
    CHECK(b.size() == 2);
    CHECK_THROWS_AS(Belief::over(Clique({1}), space, {0.3, 0.3, 0.4}), ContractError);
    CHECK_THROWS_AS(Belief::full(space, {0.25, 0.25, 0.25, 0.25}).scope(), ContractError);
}

TEST_CASE("marginalization sums consistent joint mass") {
    auto space = two_binary();
    auto b = Belief::full(space, {0.3, 0.1, 0.2, 0.4});
    auto m1 = b.marginal(Clique({0}), space);
    CHECK(m1[0] == Catch::Approx(0.4));
    CHECK(m1[1] == Catch::Approx(0.6));
    auto m2 = b.marginal(Clique({1}), space);
    CHECK(m2[0] == Catch::Approx(0.5));
    CHECK(m2[1] == Catch::Approx(0.5));
    auto both = b.marginal(Clique({0, 1}), space);
    CHECK(both == b.probabilities());
}

TEST_CASE("factor tables must be strictly positive") {
    auto space = two_binary();
    Clique c({0});
    CHECK_THROWS_AS(FactorTable(c, space, {1.0, 0.0}), DomainError);
    CHECK_THROWS_AS(FactorTable(c, space, {1.0, -2.0}), DomainError);
    CHECK_THROWS_AS(FactorTable(c, space, {1.0}), ContractError);

    FactorTable f(c, space, {1.0, 3.0});
    CHECK(f.value(1) == 3.0);
    CHECK(f.log_value(1) == Catch::Approx(std::log(3.0)));
    CHECK(f.at_joint({1, 0}, space) == 3.0);
    CHECK(f.at_joint({0, 1}, space) == 1.0);
}

TEST_CASE("utility kinds round-trip through names") {
    CHECK(utility_kind_from_string("linear") == UtilityKind::LinearDebtFree);
    CHECK(utility_kind_from_string("log") == UtilityKind::Logarithmic);
    CHECK(utility_kind_from_string("exp") == UtilityKind::ExponentialNegative);
    CHECK(to_string(UtilityKind::Logarithmic) == "log");
    CHECK_THROWS_AS(utility_kind_from_string("quadratic"), ParseError);
}

TEST_CASE("utility evaluation") {
    CHECK(utility_eval(UtilityKind::Logarithmic, 1.0) == 0.0);
    CHECK(utility_eval(UtilityKind::Logarithmic, 0.0) == -kInf);
    CHECK(utility_eval(UtilityKind::ExponentialNegative, 0.0) == -1.0);
    CHECK(utility_eval(UtilityKind::ExponentialNegative, 50.0) ==
          Catch::Approx(0.0).margin(1e-20));
    CHECK(utility_eval(UtilityKind::LinearDebtFree, 2.0) == 2.0);
    CHECK(utility_eval(UtilityKind::LinearDebtFree, 0.0) == -kInf);
    CHECK(utility_eval(UtilityKind::LinearDebtFree, -0.5) == -kInf);
}

TEST_CASE("utilities are increasing and the curved ones concave") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> x(0.01, 20.0);
    for (auto kind : {UtilityKind::LinearDebtFree, UtilityKind::Logarithmic,
                      UtilityKind::ExponentialNegative}) {
        for (int i = 0; i < 200; ++i) {
            double a = x(rng), b = x(rng);
            if (a > b) std::swap(a, b);
            if (a == b) continue;
            CHECK(utility_eval(kind, a) <= utility_eval(kind, b));
        }
    }
    for (auto kind : {UtilityKind::Logarithmic, UtilityKind::ExponentialNegative}) {
        for (int i = 0; i < 200; ++i) {
            double a = x(rng), b = x(rng);
            double mid = utility_eval(kind, (a + b) / 2);
            double chord = (utility_eval(kind, a) + utility_eval(kind, b)) / 2;
            CHECK(mid >= chord - 1e-12);
        }
    }
}

TEST_CASE("exponential utility is wealth-translation invariant in ratio") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> x(-3.0, 3.0);
    for (int i = 0; i < 100; ++i) {
        double w = x(rng), v = x(rng);
        double lhs = utility_eval(UtilityKind::ExponentialNegative, w + v) /
                     utility_eval(UtilityKind::ExponentialNegative, v);
        CHECK(lhs == Catch::Approx(std::exp(-w)).epsilon(1e-12));
    }
}

TEST_CASE("expected utility of the empty position is the utility of wealth") {
    auto space = binary();
    auto b = Belief::full(space, {0.4, 0.6});
    std::vector<double> zero{0.0, 0.0};
    std::vector<double> prices{0.5, 0.5};
    CHECK(expected_utility(UtilityKind::Logarithmic, b, zero, prices, 1.0) == Catch::Approx(0.0));
    CHECK(expected_utility(UtilityKind::ExponentialNegative, b, zero, prices, 0.0) ==
          Catch::Approx(-1.0));
    CHECK(expected_utility(UtilityKind::LinearDebtFree, b, zero, prices, 2.5) ==
          Catch::Approx(2.5));
}

TEST_CASE("expected utility worked case") {
    auto space = binary();
    auto b = Belief::full(space, {0.8, 0.2});
    std::vector<double> stakes{1.0, -1.0};
    std::vector<double> prices{0.5, 0.5};
    // Zero-cost position paying +1 on the first state, -1 on the second.
    double want = -(0.8 * std::exp(-1.0) + 0.2 * std::exp(1.0));
    CHECK(expected_utility(UtilityKind::ExponentialNegative, b, stakes, prices, 0.0) ==
          Catch::Approx(want).epsilon(1e-14));
}

TEST_CASE("zero-probability states never poison the sum") {
    auto space = binary();
    auto b = Belief::full(space, {1.0, 0.0});
    // The second state would bankrupt a debt-free agent, but it has mass zero.
    std::vector<double> stakes{1.0, -100.0};
    std::vector<double> prices{0.5, 0.5};
    double eu = expected_utility(UtilityKind::LinearDebtFree, b, stakes, prices, 1.0);
    CHECK(std::isfinite(eu));
    CHECK(eu == Catch::Approx(1.0 + 1.0 - (1.0 * 0.5 - 100.0 * 0.5)));
}

TEST_CASE("restricted-market exponential expected utility") {
    auto space = two_binary();
    auto b = Belief::full(space, {0.3, 0.1, 0.2, 0.4});
    std::vector<double> zero{0.0, 0.0};
    std::vector<double> prices{0.5, 0.5};
    CHECK(expected_utility_restricted_exp(b, zero, prices, 0.0, space) == Catch::Approx(-1.0));

    std::vector<double> stakes{0.7, -0.2};
    double manual = 0.0;
    for (std::uint64_t k = 0; k < 4; ++k) {
        auto s = space.state_at(k);
        double gain = 0.7 * (s[0] - prices[0]) - 0.2 * (s[1] - prices[1]);
        manual -= b.probability(k) * std::exp(-(1.5 + gain));
    }
    CHECK(expected_utility_restricted_exp(b, stakes, prices, 1.5, space) ==
          Catch::Approx(manual).epsilon(1e-14));
}
