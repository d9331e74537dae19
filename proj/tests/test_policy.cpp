#include <gtest/gtest.h>

#include <random>

#include "workrest/policy.hpp"

namespace workrest {
namespace {

TEST(WorkRestIndex, Examples) {
    EXPECT_DOUBLE_EQ(compute_wri(5, 0, 0, 0.7, 10), 5.0);
    EXPECT_DOUBLE_EQ(compute_wri(5, 2, 0, 0.5, 10), -5.0);
    EXPECT_DOUBLE_EQ(compute_wri(100, 3, 4, 0.2, 10), 86.0);
}

TEST(WorkEffort, Examples) {
    EXPECT_DOUBLE_EQ(work_effort(2, 0.5, 10), 0.4);
    EXPECT_DOUBLE_EQ(work_effort(20, 0.1, 10), 1.0);
    EXPECT_DOUBLE_EQ(work_effort(3, 0.0, 5), 1.0);
    EXPECT_EQ(compute_mu(work_effort(3, 0.0, 5), 0.0, 5), 0u);
}

TEST(DecideCpl, Examples) {
    EXPECT_EQ(decide_cpl(PolicyParams::cpl(5), 2, 0, 0.5, 10), (PolicyDecision{0.4, 2}));
    EXPECT_EQ(decide_cpl(PolicyParams::cpl(5), 0, 0, 1.0, 10), kRest);
    EXPECT_EQ(decide_cpl(PolicyParams::cpl(50), 1, 0, 1.0, 10), kRest);
}

TEST(DecideCpl, RestsOnZeroIndex) {
    // phi = (q + Q) * mood * mu_max exactly.
    EXPECT_EQ(decide_cpl(PolicyParams::cpl(10), 2, 0, 0.5, 10), kRest);
}

TEST(DecideCpl, RejectsWrongKind) {
    EXPECT_THROW(decide_cpl(PolicyParams::ac(5), 1, 0, 0.5, 10), std::invalid_argument);
}

TEST(DecideMe, Examples) {
    EXPECT_EQ(decide_me(3, 0.6, 5), (PolicyDecision{1.0, 3}));
    EXPECT_EQ(decide_me(0, 0.9, 5), kRest);
    EXPECT_EQ(decide_me(10, 0.05, 4), (PolicyDecision{1.0, 0}));
}

TEST(DecideMt, Examples) {
    EXPECT_EQ(decide_mt(0.5, 3, 0.6, 5), (PolicyDecision{1.0, 3}));
    EXPECT_EQ(decide_mt(0.5, 3, 0.4, 5), kRest);
    EXPECT_EQ(decide_mt(1.0, 3, 0.99, 5), kRest);
}

TEST(DecideMw, Examples) {
    EXPECT_EQ(decide_mw(0.2, 3, 0.6, 5), (PolicyDecision{1.0, 3}));
    EXPECT_EQ(decide_mw(0.8, 1, 0.2, 5), kRest);
    // 50 * floor(3.0) = 150 >= 5 * floor(5.0) = 25: the literal condition fires at theta2 = 1.
    EXPECT_EQ(decide_mw(1.0, 50, 0.6, 5), (PolicyDecision{1.0, 3}));
}

TEST(DecideAc, Examples) {
    EXPECT_EQ(decide_ac(5, 2, 0.5, 10), (PolicyDecision{0.4, 2}));
    EXPECT_EQ(decide_ac(5, 0, 1.0, 10), kRest);
}

struct Input {
    std::uint64_t q;
    std::uint64_t conceptual_q;
    double mood;
    std::uint32_t mu_max;
};

std::vector<Input> random_inputs(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::vector<Input> out;
    for (std::size_t i = 0; i < n; ++i) {
        Input in{rng() % 60, rng() % 80, unit(rng), static_cast<std::uint32_t>(1 + rng() % 20)};
        if (i % 17 == 0) in.mood = 0.0;
        if (i % 19 == 0) in.mood = 1.0;
        out.push_back(in);
    }
    return out;
}

std::vector<PolicyParams> all_params() {
    std::vector<PolicyParams> ps{PolicyParams::me()};
    for (double th : {0.0, 0.3, 0.7, 1.0}) {
        ps.push_back(PolicyParams::mt(th));
        ps.push_back(PolicyParams::mw(th));
    }
    for (double k : {0.5, 5.0, 25.0, 100.0}) {
        ps.push_back(PolicyParams::ac(k));
        ps.push_back(PolicyParams::cpl(k));
    }
    return ps;
}

TEST(PolicyProperties, DecisionInvariants) {
    for (const Input& in : random_inputs(20000, 1)) {
        const PolicyDecision me = decide_me(in.q, in.mood, in.mu_max);
        for (const PolicyParams& p : all_params()) {
            const PolicyDecision d = decide(p, in.q, in.conceptual_q, in.mood, in.mu_max);
            ASSERT_GE(d.effort, 0.0);
            ASSERT_LE(d.effort, 1.0);
            ASSERT_LE(d.completed, std::min<std::uint64_t>(in.q, in.mu_max));
            ASSERT_EQ(d.completed, compute_mu(d.effort, in.mood, in.mu_max));
            ASSERT_GE(me.completed, d.completed) << to_string(p.kind);
            if (in.mood == 0.0) {
                ASSERT_EQ(d.completed, 0u);
                if (p.kind == PolicyKind::CPL) ASSERT_EQ(d, kRest);
            }
        }
    }
}

TEST(PolicyProperties, CplWorkIsMonotoneInPhi) {
    // If CPL takes the work branch at phi, it takes the same branch at every
    // smaller phi.
    const std::vector<double> phis{0.5, 1, 2, 5, 10, 25, 50, 75, 100, 250};
    for (const Input& in : random_inputs(5000, 2)) {
        for (std::size_t hi = 0; hi < phis.size(); ++hi) {
            if (compute_wri(phis[hi], in.q, in.conceptual_q, in.mood, in.mu_max) >= 0.0) continue;
            const PolicyDecision at_hi = decide_cpl(PolicyParams::cpl(phis[hi]), in.q, in.conceptual_q, in.mood, in.mu_max);
            for (std::size_t lo = 0; lo < hi; ++lo) {
                ASSERT_LT(compute_wri(phis[lo], in.q, in.conceptual_q, in.mood, in.mu_max), 0.0);
                ASSERT_EQ(decide_cpl(PolicyParams::cpl(phis[lo]), in.q, in.conceptual_q, in.mood, in.mu_max), at_hi);
            }
        }
    }
}

TEST(PolicyProperties, AcEqualsCplWithoutConceptualQueue) {
    for (const Input& in : random_inputs(20000, 3)) {
        for (double k : {0.5, 5.0, 25.0, 100.0}) {
            ASSERT_EQ(decide_ac(k, in.q, in.mood, in.mu_max), decide_cpl(PolicyParams::cpl(k), in.q, 0, in.mood, in.mu_max));
        }
    }
}

TEST(PolicyProperties, WorkBranchCompletesMinOfBacklogAndCapacity) {
    // Exhaustive over q in [0,100], mood = k/100, mu_max in [1,20]; ME always
    // takes the work branch when q > 0.
    for (std::uint64_t q = 0; q <= 100; ++q) {
        for (int k = 0; k <= 100; ++k) {
            for (std::uint32_t m = 1; m <= 20; ++m) {
                const std::uint64_t capacity = (static_cast<std::uint64_t>(k) * m) / 100;
                if (capacity < 1) continue;
                const PolicyDecision d = decide_me(q, k / 100.0, m);
                ASSERT_EQ(d.completed, std::min(q, capacity)) << q << " " << k << " " << m;
            }
        }
    }
}

TEST(PolicyParams, ParseAndValidate) {
    EXPECT_EQ(parse_policy("cpl"), PolicyKind::CPL);
    EXPECT_EQ(parse_policy("Mw"), PolicyKind::MW);
    EXPECT_FALSE(parse_policy("xyz"));
    EXPECT_THROW(validate(PolicyParams::cpl(0.0)), std::domain_error);
    EXPECT_THROW(validate(PolicyParams::ac(-1.0)), std::domain_error);
    EXPECT_THROW(validate(PolicyParams::mt(1.5)), std::domain_error);
    EXPECT_THROW(validate(PolicyParams::mw(-0.1)), std::domain_error);
    EXPECT_NO_THROW(validate(PolicyParams::me()));
}

}  // namespace
}  // namespace workrest
