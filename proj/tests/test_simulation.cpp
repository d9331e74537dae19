#include <gtest/gtest.h>

#include <random>

#include "workrest/simulation.hpp"

namespace workrest {
namespace {

SimConfig config_for(PolicyParams policy, double lf, std::uint64_t slots, Deadline deadline = 3, std::uint64_t seed = 1) {
    SimConfig c;
    c.policy = policy;
    c.load_factor = lf;
    c.slots = slots;
    c.deadline = deadline;
    c.seed = seed;
    return c;
}

TEST(Lyapunov, Examples) {
    std::vector<WorkerState> one(1);
    one[0].q = 3;
    one[0].conceptual_q = 4;
    EXPECT_DOUBLE_EQ(compute_lyapunov(one), 12.5);
    EXPECT_DOUBLE_EQ(compute_lyapunov(std::vector<WorkerState>(3)), 0.0);
    std::vector<WorkerState> two(2);
    two[0].q = two[1].q = 1;
    EXPECT_DOUBLE_EQ(compute_lyapunov(two), 1.0);
}

TEST(DriftBound, AllZeroSlack) {
    const std::vector<WorkerSlotTrace> traces(3);
    const DriftSides d = drift_bound_sides(traces, 2, 4);
    EXPECT_DOUBLE_EQ(d.lhs, 0.0);
    EXPECT_DOUBLE_EQ(d.rhs, 3 * 0.5 * (4 + 16) + 3 * 0.5 * 16);
}

TEST(DriftBound, HandEvaluatedSlot) {
    WorkerSlotTrace t;
    t.q_before = 0;
    t.q_observed = 2;
    t.q_after = 2;
    t.conceptual_before = 0;
    t.conceptual_after = 4;
    t.arrivals = 2;
    t.completed = 0;
    const DriftSides d = drift_bound_sides(std::span(&t, 1), 2, 4);
    EXPECT_DOUBLE_EQ(d.lhs, 10.0);
    EXPECT_DOUBLE_EQ(d.rhs, 26.0);
}

TEST(DriftBound, HoldsOnRandomSlots) {
    // Random per-worker slots, including expiry, respecting the uniform
    // bounds lambda_max and mu_max_global.
    std::mt19937_64 rng(17);
    const std::uint64_t lambda_max = 12, mu_max_global = 9;
    std::uint64_t checked = 0;
    for (int slot = 0; slot < 100000; ++slot) {
        std::vector<WorkerSlotTrace> traces(1 + rng() % 3);
        for (WorkerSlotTrace& t : traces) {
            const auto mu_max = static_cast<std::uint32_t>(1 + rng() % mu_max_global);
            t.q_before = rng() % 40;
            t.conceptual_before = rng() % 200;
            t.arrivals = rng() % (lambda_max + 1);
            t.q_observed = t.q_before + t.arrivals;
            t.completed = std::min<std::uint64_t>(rng() % (mu_max + 1), t.q_observed);
            const std::uint64_t left = t.q_observed - t.completed;
            t.q_after = left - (left == 0 ? 0 : rng() % (left + 1));
            t.conceptual_after = update_conceptual_queue(t.conceptual_before, t.q_observed, t.completed, mu_max);
        }
        const DriftSides d = drift_bound_sides(traces, lambda_max, mu_max_global);
        ASSERT_LE(d.lhs, d.rhs) << "slot " << slot;
        ++checked;
    }
    EXPECT_EQ(checked, 100000u);
}

TEST(Step, TwoSlotCplHandTrace) {
    const std::vector<WorkerProfile> pop{{0, 1.0, 4}};
    Simulator sim(pop, config_for(PolicyParams::cpl(5), 0.5, 2), ConstantMood{0.5});
    ASSERT_EQ(sim.slot_workload(), 2u);

    // Slot 0: q = 2, index 5 - 2*0.5*4 = 1 >= 0, so rest; Q grows by mu_max.
    const SlotReport s0 = sim.step();
    EXPECT_EQ(s0.arrivals, 2u);
    EXPECT_EQ(s0.pending_total, 2u);
    EXPECT_EQ(s0.completions, 0u);
    EXPECT_EQ(s0.expired, 0u);
    EXPECT_EQ(sim.states()[0].q, 2u);
    EXPECT_EQ(sim.states()[0].conceptual_q, 4u);
    EXPECT_DOUBLE_EQ(s0.effort_sum, 0.0);
    EXPECT_DOUBLE_EQ(s0.drift_lhs, 10.0);
    EXPECT_DOUBLE_EQ(s0.drift_rhs, 26.0);
    EXPECT_DOUBLE_EQ(s0.lyapunov, 10.0);

    // Slot 1: q = 4, index 5 - 8*0.5*4 = -11 < 0, so work at effort 1, mu = 2.
    const SlotReport s1 = sim.step();
    EXPECT_EQ(s1.arrivals, 2u);
    EXPECT_EQ(s1.pending_total, 4u);
    EXPECT_EQ(s1.completions, 2u);
    EXPECT_DOUBLE_EQ(s1.effort_sum, 1.0);
    EXPECT_EQ(sim.states()[0].q, 2u);
    EXPECT_EQ(sim.states()[0].conceptual_q, 2u);
    EXPECT_TRUE(sim.done());
    EXPECT_THROW(sim.step(), std::logic_error);
}

TEST(Step, EmptySystemRests) {
    // Capacity 0.1 at LF 0.1 rounds to zero tasks per slot.
    const std::vector<WorkerProfile> pop{{0, 0.1, 1}, {1, 0.0, 3}};
    for (PolicyKind k : kAllPolicies) {
        const RunResult r = run(config_for(PolicyParams::with_knob(k, k == PolicyKind::MT || k == PolicyKind::MW ? 0.5 : 5.0), 0.1, 20),
                                pop, ConstantMood{0.9}, true);
        for (const SlotReport& s : r.slots) {
            EXPECT_EQ(s.pending_total, 0u);
            EXPECT_EQ(s.completions, 0u);
            EXPECT_DOUBLE_EQ(s.expiry_ratio_sum, 0.0);
            EXPECT_DOUBLE_EQ(s.lyapunov, 0.0);
        }
        EXPECT_EQ(r.metrics.slots_counted_for_completion, 0u);
        EXPECT_DOUBLE_EQ(r.metrics.completion_avg, 0.0);
        EXPECT_DOUBLE_EQ(r.metrics.effort_avg, 0.0);
    }
}

TEST(Run, SingleTermEffortAverage) {
    const std::vector<WorkerProfile> pop{{0, 1.0, 10}};
    const RunResult r = run(config_for(PolicyParams::me(), 0.2, 1), pop, ConstantMood{0.5});
    EXPECT_DOUBLE_EQ(r.metrics.effort_avg, 0.4);
    EXPECT_DOUBLE_EQ(r.metrics.completion_avg, 1.0);
    EXPECT_EQ(r.metrics.slots_counted_for_completion, 1u);
}

TEST(Run, SaturatingMaxEffortNeverExpires) {
    const std::vector<WorkerProfile> pop(20, WorkerProfile{0, 1.0, 5});
    std::vector<WorkerProfile> ids = pop;
    for (std::size_t i = 0; i < ids.size(); ++i) ids[i].id = i;
    const RunResult r = run(config_for(PolicyParams::me(), 1.0, 500), ids, ConstantMood{1.0}, true);
    for (const SlotReport& s : r.slots) {
        EXPECT_EQ(s.expired, 0u);
        EXPECT_EQ(s.completions, s.arrivals);
    }
    EXPECT_DOUBLE_EQ(r.metrics.expiry_avg, 0.0);
    EXPECT_DOUBLE_EQ(r.metrics.completion_avg, 1.0);
}

TEST(Run, ExpiryAverageOnConstructedTrace) {
    // Worker 0 receives 2 tasks per slot and never works (MT at theta 1 with
    // mood < 1); from slot 2 on it holds 6 tasks and 2 expire each slot.
    // Worker 1 has zero reputation, receives nothing, and still counts in N.
    const std::vector<WorkerProfile> pop{{0, 1.0, 2}, {1, 0.0, 5}};
    const RunResult r = run(config_for(PolicyParams::mt(1.0), 1.0, 10), pop, ConstantMood{0.9}, true);
    EXPECT_EQ(r.slots[2].pending_total, 6u);
    EXPECT_EQ(r.slots[2].expired, 2u);
    EXPECT_NEAR(r.metrics.expiry_avg, (8.0 / 3.0) / 20.0, 1e-15);
    EXPECT_DOUBLE_EQ(r.metrics.completion_avg, 0.0);
    EXPECT_EQ(r.metrics.slots_counted_for_completion, 10u);
}

TEST(Run, ConservationDriftAndStability) {
    std::vector<WorkerProfile> pop;
    std::mt19937_64 rng(5);
    for (std::uint64_t i = 0; i < 40; ++i) pop.push_back({i, 0.5 + 0.5 * static_cast<double>(rng() % 100) / 100.0, static_cast<std::uint32_t>(1 + rng() % 10)});
    for (PolicyKind k : kAllPolicies) {
        for (double lf : {0.2, 0.7, 1.0}) {
            const double knob = (k == PolicyKind::MT || k == PolicyKind::MW) ? 0.5 : 25.0;
            const RunResult r = run(config_for(PolicyParams::with_knob(k, knob), lf, 400, 3, 77), pop, CounterMood{77}, true);
            std::uint64_t arrivals = 0, done = 0, expired = 0, pending = 0;
            for (const SlotReport& s : r.slots) {
                arrivals += s.arrivals;
                done += s.completions;
                expired += s.expired;
                EXPECT_LE(s.completions, s.pending_total);
                EXPECT_GE(s.lyapunov, 0.0);
                EXPECT_LE(s.drift_lhs, s.drift_rhs);
            }
            for (const WorkerState& st : r.final_states) pending += st.q;
            EXPECT_EQ(arrivals, done + expired + pending);
            EXPECT_EQ(r.drift_violations, 0u);
            EXPECT_EQ(r.stability_violations, 0u);
            for (double m : {r.metrics.effort_avg, r.metrics.expiry_avg, r.metrics.completion_avg}) {
                EXPECT_GE(m, 0.0);
                EXPECT_LE(m, 1.0);
            }
        }
    }
}

TEST(Run, NoDeadlineMatchesCountRecurrence) {
    std::vector<WorkerProfile> pop;
    for (std::uint64_t i = 0; i < 10; ++i) pop.push_back({i, 0.1 * static_cast<double>(i + 1), static_cast<std::uint32_t>(1 + i % 4)});
    Simulator sim(pop, config_for(PolicyParams::cpl(25), 0.9, 1000, kNoDeadline, 3));
    std::vector<std::uint64_t> q(pop.size(), 0);
    while (!sim.done()) {
        const SlotReport s = sim.step();
        ASSERT_EQ(s.expired, 0u);
        for (std::size_t i = 0; i < pop.size(); ++i) {
            const WorkerSlotTrace& t = sim.last_traces()[i];
            q[i] = update_backlog_count(q[i], t.arrivals, t.completed);
            ASSERT_EQ(sim.states()[i].q, q[i]);
            ASSERT_EQ(sim.states()[i].backlog_total(), q[i]);
        }
    }
}

TEST(Run, Deterministic) {
    std::vector<WorkerProfile> pop;
    for (std::uint64_t i = 0; i < 30; ++i) pop.push_back({i, 0.75, static_cast<std::uint32_t>(1 + i % 7)});
    const SimConfig c = config_for(PolicyParams::cpl(25), 0.6, 300, 3, 2024);
    const RunResult a = run(c, pop, true);
    const RunResult b = run(c, pop, true);
    EXPECT_EQ(a.metrics, b.metrics);
    EXPECT_EQ(a.slots, b.slots);
    EXPECT_EQ(a.totals, b.totals);
}

TEST(Simulator, RejectsInvalidSetups) {
    const std::vector<WorkerProfile> pop{{0, 1.0, 4}};
    EXPECT_THROW(Simulator(std::vector<WorkerProfile>{}, config_for(PolicyParams::me(), 0.5, 1)), std::invalid_argument);
    EXPECT_THROW(Simulator(std::vector<WorkerProfile>{{0, 0.0, 4}}, config_for(PolicyParams::me(), 0.5, 1)), std::domain_error);
    EXPECT_THROW(Simulator(pop, config_for(PolicyParams::me(), 0.0, 1)), std::domain_error);
    EXPECT_THROW(Simulator(pop, config_for(PolicyParams::me(), 0.5, 0)), std::domain_error);
    EXPECT_THROW(Simulator(pop, config_for(PolicyParams::cpl(-1), 0.5, 1)), std::domain_error);

    Simulator bad_mood(pop, config_for(PolicyParams::me(), 0.5, 1), ConstantMood{1.5});
    EXPECT_THROW(bad_mood.step(), std::domain_error);
}

TEST(Simulator, LambdaBoundViolationAborts) {
    const std::vector<WorkerProfile> pop{{0, 1.0, 4}};
    SimConfig c = config_for(PolicyParams::me(), 1.0, 1);
    c.lambda_max = 1;  // 4 tasks per slot arrive
    Simulator sim(pop, c, ConstantMood{1.0});
    EXPECT_THROW(sim.step(), ContractViolation);
}

}  // namespace
}  // namespace workrest
