#include <catch2/catch_amalgamated.hpp>

#include <numeric>
#include <random>

#include "beliefmarket/errors.hpp"
#include "beliefmarket/outcome_space.hpp"

using namespace beliefmarket;

namespace {

OutcomeSpace three_binary() {
    return OutcomeSpace({{"y1", 2}, {"y2", 2}, {"y3", 2}});
}

OutcomeSpace mixed() {
    return OutcomeSpace({{"a", 2}, {"b", 3}});
}

} // namespace

TEST_CASE("joint states are row-major with the last variable fastest") {
    auto space = three_binary();
    REQUIRE(space.num_joint_states() == 8);
    CHECK(space.state_at(0) == JointState{0, 0, 0});
    CHECK(space.state_at(1) == JointState{0, 0, 1});
    CHECK(space.state_at(2) == JointState{0, 1, 0});
    CHECK(space.state_at(4) == JointState{1, 0, 0});
    CHECK(space.state_at(7) == JointState{1, 1, 1});

    auto m = mixed();
    REQUIRE(m.num_joint_states() == 6);
    CHECK(m.state_at(0) == JointState{0, 0});
    CHECK(m.state_at(1) == JointState{0, 1});
    CHECK(m.state_at(2) == JointState{0, 2});
    CHECK(m.state_at(3) == JointState{1, 0});
    CHECK(m.state_at(5) == JointState{1, 2});
}

TEST_CASE("state_at and index_of are inverse") {
    auto space = OutcomeSpace({{"a", 3}, {"b", 2}, {"c", 4}});
    for (std::uint64_t k = 0; k < space.num_joint_states(); ++k) {
        CHECK(space.index_of(space.state_at(k)) == k);
    }
}

TEST_CASE("index_of rejects malformed states") {
    auto space = mixed();
    CHECK_THROWS_AS(space.index_of(JointState{0}), ContractError);
    CHECK_THROWS_AS(space.index_of(JointState{0, 3}), ContractError);
    CHECK_THROWS_AS(space.index_of(JointState{-1, 0}), ContractError);
}

TEST_CASE("space construction validates variables") {
    CHECK_THROWS_AS(OutcomeSpace({{"a", 2}, {"a", 2}}), ContractError);
    CHECK_THROWS_AS(OutcomeSpace({{"a", 1}}), ContractError);
    CHECK_THROWS_AS(OutcomeSpace({{"a", 0}}), ContractError);
    CHECK_THROWS_AS(OutcomeSpace({}), ContractError);
    CHECK_THROWS_AS(OutcomeSpace({{"", 2}}), ContractError);
}

TEST_CASE("find_variable and all_binary") {
    auto m = mixed();
    CHECK(m.find_variable("a") == 0);
    CHECK(m.find_variable("b") == 1);
    CHECK(m.find_variable("z") == -1);
    CHECK_FALSE(m.all_binary());
    CHECK(three_binary().all_binary());
}

TEST_CASE("enumerate_joint honors the cap") {
    auto space = three_binary();
    CHECK(enumerate_joint(space).size() == 8);
    CHECK_THROWS_AS(enumerate_joint(space, 7), CapacityError);

    // 40 binary variables: the count itself must not overflow.
    std::vector<Variable> vars;
    for (int i = 0; i < 40; ++i) vars.push_back({"v" + std::to_string(i), 2});
    OutcomeSpace big(std::move(vars));
    CHECK(big.num_joint_states() == (std::uint64_t{1} << 40));
    CHECK_THROWS_AS(enumerate_joint(big), CapacityError);
}

TEST_CASE("cliques are sorted, unique, and validated") {
    Clique c({2, 0});
    CHECK(c.members() == std::vector<int>{0, 2});
    CHECK(c.contains(0));
    CHECK_FALSE(c.contains(1));
    CHECK_THROWS_AS(Clique({}), ContractError);
    CHECK_THROWS_AS(Clique({2, 0, 2}), ContractError); // duplicates are an error, not deduped

    auto space = mixed();
    CHECK_THROWS_AS(Clique({5}).check_within(space), ContractError);
    CHECK_NOTHROW(Clique({0, 1}).check_within(space));
}

TEST_CASE("clique enumeration mirrors the joint order") {
    auto space = OutcomeSpace({{"a", 2}, {"b", 3}, {"c", 2}});
    Clique bc({1, 2});
    CHECK(clique_state_count(bc, space) == 6);
    auto states = enumerate_clique(bc, space);
    REQUIRE(states.size() == 6);
    CHECK(states[0] == JointState{0, 0});
    CHECK(states[1] == JointState{0, 1}); // last member fastest
    CHECK(states[2] == JointState{1, 0});
    CHECK(states[5] == JointState{2, 1});
    for (std::uint64_t i = 0; i < states.size(); ++i) {
        CHECK(clique_index_of(states[i], bc, space) == i);
    }
}

TEST_CASE("restrict_state picks clique coordinates in member order") {
    auto space = OutcomeSpace({{"a", 2}, {"b", 3}, {"c", 2}});
    Clique ac({0, 2});
    CHECK(restrict_state({1, 2, 0}, ac, space) == JointState{1, 0});
    CHECK(restrict_state({0, 1, 1}, ac, space) == JointState{0, 1});
}

TEST_CASE("consistent_states partitions the joint space") {
    auto space = OutcomeSpace({{"a", 2}, {"b", 3}, {"c", 2}});
    Clique b({1});
    std::size_t total = 0;
    for (auto& sub : enumerate_clique(b, space)) {
        auto block = consistent_states(sub, b, space);
        CHECK(block.size() == 4); // 2 * 2 free assignments
        for (auto& s : block) CHECK(restrict_state(s, b, space) == sub);
        total += block.size();
    }
    CHECK(total == space.num_joint_states());
}

TEST_CASE("joint_to_clique_index matches explicit restriction") {
    auto space = OutcomeSpace({{"a", 3}, {"b", 2}, {"c", 2}, {"d", 2}});
    std::mt19937 rng(91);
    for (int trial = 0; trial < 10; ++trial) {
        std::vector<int> members;
        for (int j = 0; j < space.num_variables(); ++j)
            if (rng() % 2 == 0) members.push_back(j);
        if (members.empty()) members.push_back(static_cast<int>(rng() % 4));
        Clique clique(members);
        auto map = joint_to_clique_index(clique, space);
        REQUIRE(map.size() == space.num_joint_states());
        for (std::uint64_t k = 0; k < map.size(); ++k) {
            auto sub = restrict_state(space.state_at(k), clique, space);
            CHECK(map[k] == clique_index_of(sub, clique, space));
        }
    }
}

TEST_CASE("marginal_cost sums the consistent joint prices") {
    auto space = three_binary();
    std::vector<double> prices(8);
    std::iota(prices.begin(), prices.end(), 1.0); // 1..8, deliberately unnormalized
    Clique c13({0, 2});

    // (a=1, c=0) picks joint states (1,0,0) and (1,1,0): indices 4 and 6.
    CHECK(marginal_cost(prices, c13, {1, 0}, space) == Catch::Approx(5.0 + 7.0));

    auto costs = marginal_costs(prices, c13, space);
    REQUIRE(costs.size() == 4);
    double total = 0;
    for (double v : costs) total += v;
    CHECK(total == Catch::Approx(36.0));
    CHECK(costs[2] == Catch::Approx(12.0)); // substate (1,0)
}

TEST_CASE("good labels") {
    auto space = OutcomeSpace({{"y1", 2}, {"y2", 2}});
    auto joints = joint_goods(space);
    REQUIRE(joints.size() == 4);
    CHECK(joints[1].label(space) == "(0,1)");
    CHECK(joints[2].label(space) == "(1,0)");

    auto singles = single_var_goods(space);
    REQUIRE(singles.size() == 2);
    CHECK(singles[0].label(space) == "y1=1");
    CHECK(singles[1].label(space) == "y2=1");

    Good marg{Good::Kind::MarginalBet, {1, 0}, {0, 1}, 1};
    CHECK(marg.label(space) == "y1=1,y2=0");

    CHECK_THROWS_AS(single_var_goods(OutcomeSpace({{"a", 3}})), ContractError);
}
