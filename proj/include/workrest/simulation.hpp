#pragma once

#include <algorithm>
#include <concepts>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <vector>

#include "workrest/delegation.hpp"
#include "workrest/policy.hpp"
#include "workrest/random.hpp"
#include "workrest/worker.hpp"

namespace workrest {

struct SimConfig {
    std::uint64_t slots = 1;
    Deadline deadline = 3;
    double load_factor = 0.5;
    PolicyParams policy;
    std::uint64_t seed = 0;
    // Uniform per-slot bounds used by the drift diagnostic. Zero means derive:
    // lambda_max = tasks delegated per slot, mu_max_global = max mu_max.
    std::uint64_t lambda_max = 0;
    std::uint64_t mu_max_global = 0;
};

inline void validate(const SimConfig& c) {
    if (c.slots < 1) throw std::domain_error("slots must be >= 1");
    if (c.deadline < 1) throw std::domain_error("deadline must be >= 1");
    if (!(c.load_factor > 0.0 && c.load_factor <= 1.0)) throw std::domain_error("load factor must lie in (0,1]");
    validate(c.policy);
}

struct SlotReport {
    std::uint64_t slot = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t completions = 0;
    std::uint64_t expired = 0;
    std::uint64_t pending_total = 0;
    double effort_sum = 0.0;
    double expiry_ratio_sum = 0.0;  // sum of expired_i / q_i over workers with q_i > 0
    std::uint64_t busy_workers = 0;  // workers with q_i > 0
    double lyapunov = 0.0;
    double drift_lhs = 0.0;
    double drift_rhs = 0.0;

    friend bool operator==(const SlotReport&, const SlotReport&) = default;
};

struct RunMetrics {
    double effort_avg = 0.0;
    double expiry_avg = 0.0;
    double completion_avg = 0.0;
    std::uint64_t slots_counted_for_completion = 0;

    friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

/// Per-worker sums over a run of the conceptual-queue inflow x_i(t) and the
/// completions mu_i(t).
struct WorkerTotals {
    std::uint64_t rest_pressure = 0;
    std::uint64_t completed = 0;

    friend bool operator==(const WorkerTotals&, const WorkerTotals&) = default;
};

// ---------------------------------------------------------------------------
// Mood sources. Any callable (const WorkerProfile&, slot) -> double in [0,1].

struct CounterMood {
    std::uint64_t seed = 0;
    double operator()(const WorkerProfile& w, std::uint64_t slot) const { return mood_sample(seed, w.id, slot); }
};

struct ConstantMood {
    double value = 1.0;
    double operator()(const WorkerProfile&, std::uint64_t) const { return value; }
};

template <typename F>
concept MoodSource = std::regular_invocable<const F&, const WorkerProfile&, std::uint64_t> &&
                     std::convertible_to<std::invoke_result_t<const F&, const WorkerProfile&, std::uint64_t>, double>;

// ---------------------------------------------------------------------------
// Lyapunov diagnostics.

inline double compute_lyapunov(std::span<const WorkerState> states) {
    double sum = 0.0;
    for (const WorkerState& s : states) {
        const auto q = static_cast<double>(s.q);
        const auto cq = static_cast<double>(s.conceptual_q);
        sum += q * q + cq * cq;
    }
    return 0.5 * sum;
}

/// One worker's queue values around a slot. `q_before`/`conceptual_before`
/// are the start-of-slot values, `q_observed` the backlog after arrivals that
/// the policy acted on, and the `_after` fields the start of the next slot.
struct WorkerSlotTrace {
    std::uint64_t q_before = 0;
    std::uint64_t conceptual_before = 0;
    std::uint64_t q_observed = 0;
    std::uint64_t q_after = 0;
    std::uint64_t conceptual_after = 0;
    std::uint64_t arrivals = 0;
    std::uint64_t completed = 0;
};

struct DriftSides {
    double lhs = 0.0;
    double rhs = 0.0;
};

/// Exact one-slot Lyapunov change (lhs) against the uniform upper bound
/// built from lambda_max and mu_max_global (rhs), summed over workers.
///
/// Both sides are accumulated as doubled 64-bit integers so the comparison
/// lhs <= rhs is exact.
inline DriftSides drift_bound_sides(std::span<const WorkerSlotTrace> traces, std::uint64_t lambda_max,
                                    std::uint64_t mu_max_global) {
    using I = std::int64_t;
    const I lmax = static_cast<I>(lambda_max);
    const I mmax = static_cast<I>(mu_max_global);
    I lhs2 = 0;
    I rhs2 = 0;
    for (const WorkerSlotTrace& t : traces) {
        const I q0 = static_cast<I>(t.q_before);
        const I q1 = static_cast<I>(t.q_after);
        const I c0 = static_cast<I>(t.conceptual_before);
        const I c1 = static_cast<I>(t.conceptual_after);
        const I lam = static_cast<I>(t.arrivals);
        const I mu = static_cast<I>(t.completed);
        const I ind = (t.q_observed > 0 && t.completed == 0) ? 1 : 0;

        lhs2 += (q1 * q1 - q0 * q0) + (c1 * c1 - c0 * c0);
        rhs2 += 2 * (q0 * (lam - mu) - mu * lam) + (lmax * lmax + mmax * mmax);
        rhs2 += 2 * c0 * (mmax * ind - mu) + (mmax * mmax * ind + mmax * mmax);
    }
    return {static_cast<double>(lhs2) / 2.0, static_cast<double>(rhs2) / 2.0};
}

// ---------------------------------------------------------------------------

/// Slot-by-slot simulation over a fixed population. Each call to step()
/// runs, in order: delegation, observation of q and N_total, mood sampling,
/// policy decisions, the conceptual-queue update, completion/aging/expiry,
/// and the Lyapunov diagnostics.
template <MoodSource Mood = CounterMood>
class Simulator {
public:
    Simulator(std::vector<WorkerProfile> population, SimConfig config, Mood mood)
        : population_(std::move(population)), config_(config), mood_(std::move(mood)) {
        validate(config_);
        if (population_.empty()) throw std::invalid_argument("simulation needs a non-empty population");
        for (const WorkerProfile& p : population_) validate(p);
        omega_ = collective_capacity(population_);
        if (!(omega_ > 0.0)) throw std::domain_error("population has zero collective capacity");
        w_req_ = workrest::slot_workload(config_.load_factor, omega_);

        lambda_max_ = config_.lambda_max != 0 ? config_.lambda_max : w_req_;
        mu_max_global_ = config_.mu_max_global;
        if (mu_max_global_ == 0) {
            for (const WorkerProfile& p : population_) mu_max_global_ = std::max<std::uint64_t>(mu_max_global_, p.mu_max);
        }

        states_.resize(population_.size());
        totals_.resize(population_.size());
        traces_.resize(population_.size());
    }

    explicit Simulator(std::vector<WorkerProfile> population, SimConfig config)
        requires std::same_as<Mood, CounterMood>
        : Simulator(std::move(population), config, CounterMood{config.seed}) {}

    SlotReport step() {
        if (slot_ >= config_.slots) throw std::logic_error("step: simulation already ran all slots");
        const std::size_t n = population_.size();
        SlotReport report;
        report.slot = slot_;

        const std::vector<std::uint64_t> arrivals = delegate(w_req_, population_, states_);
        for (std::size_t i = 0; i < n; ++i) {
            WorkerSlotTrace& tr = traces_[i];
            tr = {};
            tr.q_before = states_[i].q;
            tr.conceptual_before = states_[i].conceptual_q;
            tr.arrivals = arrivals[i];
            if (arrivals[i] > lambda_max_) throw ContractViolation("arrivals exceed lambda_max");
            states_[i].enqueue(arrivals[i]);
            tr.q_observed = states_[i].q;
            report.arrivals += arrivals[i];
            report.pending_total += tr.q_observed;
        }

        for (std::size_t i = 0; i < n; ++i) {
            const WorkerProfile& worker = population_[i];
            WorkerState& state = states_[i];
            WorkerSlotTrace& tr = traces_[i];

            const double mood = mood_(worker, slot_);
            if (!(mood >= 0.0 && mood <= 1.0)) {
                throw std::domain_error("mood source returned a value outside [0,1] at slot " + std::to_string(slot_));
            }
            const PolicyDecision d = decide(config_.policy, state.q, state.conceptual_q, mood, worker.mu_max);
            if (d.completed > state.q || d.completed > mu_max_global_) {
                throw ContractViolation("policy " + std::string(to_string(config_.policy.kind)) + " completed " +
                                        std::to_string(d.completed) + " of " + std::to_string(state.q) +
                                        " pending tasks for worker " + std::to_string(worker.id) + " at slot " +
                                        std::to_string(slot_));
            }

            totals_[i].rest_pressure += rest_pressure(state.q, d.completed, worker.mu_max);
            totals_[i].completed += d.completed;

            const std::uint64_t expired = complete_and_age_in_place(state, d.completed, config_.deadline, worker.mu_max);

            tr.completed = d.completed;
            tr.q_after = state.q;
            tr.conceptual_after = state.conceptual_q;

            report.completions += d.completed;
            report.expired += expired;
            report.effort_sum += d.effort;
            if (tr.q_observed > 0) {
                report.expiry_ratio_sum += static_cast<double>(expired) / static_cast<double>(tr.q_observed);
                ++report.busy_workers;
            }
        }

        report.lyapunov = compute_lyapunov(states_);
        const DriftSides drift = drift_bound_sides(traces_, lambda_max_, mu_max_global_);
        report.drift_lhs = drift.lhs;
        report.drift_rhs = drift.rhs;
        if (drift.lhs > drift.rhs) ++drift_violations_;

        effort_total_ += report.effort_sum;
        expiry_total_ += report.expiry_ratio_sum;
        if (report.pending_total > 0) {
            completion_total_ += static_cast<double>(report.completions) / static_cast<double>(report.pending_total);
            ++completion_slots_;
        }
        ++slot_;
        return report;
    }

    [[nodiscard]] bool done() const { return slot_ >= config_.slots; }

    /// Time averages over the slots run so far.
    [[nodiscard]] RunMetrics metrics() const {
        RunMetrics m;
        if (slot_ == 0) return m;
        const double cells = static_cast<double>(slot_) * static_cast<double>(population_.size());
        m.effort_avg = effort_total_ / cells;
        m.expiry_avg = expiry_total_ / cells;
        m.completion_avg = completion_slots_ > 0 ? completion_total_ / static_cast<double>(completion_slots_) : 0.0;
        m.slots_counted_for_completion = completion_slots_;
        return m;
    }

    /// Slots so far where the one-slot Lyapunov change exceeded its bound.
    [[nodiscard]] std::uint64_t drift_violations() const { return drift_violations_; }

    /// Workers for which Q_i(t) >= sum x_i - sum mu_i fails at the current
    /// slot. Q_i(0) = 0, so this is the time-averaged stability inequality
    /// multiplied through by t.
    [[nodiscard]] std::uint64_t stability_violations() const {
        std::uint64_t bad = 0;
        for (std::size_t i = 0; i < states_.size(); ++i) {
            const auto lhs = static_cast<std::int64_t>(states_[i].conceptual_q);
            const auto rhs = static_cast<std::int64_t>(totals_[i].rest_pressure) - static_cast<std::int64_t>(totals_[i].completed);
            if (lhs < rhs) ++bad;
        }
        return bad;
    }

    [[nodiscard]] std::uint64_t slot() const { return slot_; }
    [[nodiscard]] double omega() const { return omega_; }
    [[nodiscard]] std::uint64_t slot_workload() const { return w_req_; }
    [[nodiscard]] std::uint64_t lambda_max() const { return lambda_max_; }
    [[nodiscard]] std::uint64_t mu_max_global() const { return mu_max_global_; }
    [[nodiscard]] std::span<const WorkerProfile> population() const { return population_; }
    [[nodiscard]] std::span<const WorkerState> states() const { return states_; }
    [[nodiscard]] std::span<const WorkerTotals> totals() const { return totals_; }
    /// Per-worker queue trace of the most recent slot.
    [[nodiscard]] std::span<const WorkerSlotTrace> last_traces() const { return traces_; }

private:
    std::vector<WorkerProfile> population_;
    SimConfig config_;
    Mood mood_;

    double omega_ = 0.0;
    std::uint64_t w_req_ = 0;
    std::uint64_t lambda_max_ = 0;
    std::uint64_t mu_max_global_ = 0;

    std::vector<WorkerState> states_;
    std::vector<WorkerTotals> totals_;
    std::vector<WorkerSlotTrace> traces_;
    std::uint64_t slot_ = 0;

    double effort_total_ = 0.0;
    double expiry_total_ = 0.0;
    double completion_total_ = 0.0;
    std::uint64_t completion_slots_ = 0;
    std::uint64_t drift_violations_ = 0;
};

struct RunResult {
    RunMetrics metrics;
    std::vector<SlotReport> slots;  // empty unless requested
    std::vector<WorkerTotals> totals;
    std::vector<WorkerState> final_states;
    std::uint64_t drift_violations = 0;
    std::uint64_t stability_violations = 0;
};

template <MoodSource Mood>
RunResult run(const SimConfig& config, std::vector<WorkerProfile> population, Mood mood, bool record_slots = false) {
    Simulator<Mood> sim(std::move(population), config, std::move(mood));
    RunResult result;
    if (record_slots) result.slots.reserve(config.slots);
    while (!sim.done()) {
        SlotReport r = sim.step();
        if (record_slots) result.slots.push_back(r);
    }
    result.metrics = sim.metrics();
    result.totals.assign(sim.totals().begin(), sim.totals().end());
    result.final_states.assign(sim.states().begin(), sim.states().end());
    result.drift_violations = sim.drift_violations();
    result.stability_violations = sim.stability_violations();
    return result;
}

inline RunResult run(const SimConfig& config, std::vector<WorkerProfile> population, bool record_slots = false) {
    return run(config, std::move(population), CounterMood{config.seed}, record_slots);
}

}  // namespace workrest
