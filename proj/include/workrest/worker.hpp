#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace workrest {

/// Raised when a simulation phase receives input that a correct policy or
/// caller could never produce (e.g. completing more tasks than are pending).
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Immutable identity of a worker: reputation in [0,1] and the maximum number
/// of unit tasks the worker can finish in one slot.
struct WorkerProfile {
    std::uint64_t id = 0;
    double reputation = 1.0;
    std::uint32_t mu_max = 1;

    friend bool operator==(const WorkerProfile&, const WorkerProfile&) = default;
};

inline void validate(const WorkerProfile& p) {
    if (!(p.reputation >= 0.0 && p.reputation <= 1.0)) {
        throw std::domain_error("worker " + std::to_string(p.id) + ": reputation outside [0,1]");
    }
    if (p.mu_max < 1) {
        throw std::domain_error("worker " + std::to_string(p.id) + ": mu_max must be >= 1");
    }
}

/// Tasks delegated in the same slot. `age` counts end-of-slot agings since
/// delegation.
struct TaskCohort {
    std::uint64_t count = 0;
    std::uint32_t age = 0;

    friend bool operator==(const TaskCohort&, const TaskCohort&) = default;
};

/// Deadline in slots. kNoDeadline disables expiry entirely.
using Deadline = std::uint32_t;
inline constexpr Deadline kNoDeadline = std::numeric_limits<Deadline>::max();

struct WorkerState {
    std::deque<TaskCohort> backlog;  // oldest first
    std::uint64_t q = 0;
    std::uint64_t conceptual_q = 0;

    void enqueue(std::uint64_t arrivals) {
        if (arrivals == 0) return;
        backlog.push_back({arrivals, 0});
        q += arrivals;
    }

    [[nodiscard]] std::uint64_t backlog_total() const {
        return std::accumulate(backlog.begin(), backlog.end(), std::uint64_t{0},
                               [](std::uint64_t acc, const TaskCohort& c) { return acc + c.count; });
    }
};

/// Tasks completed in one slot: floor(effort * mood * mu_max).
///
/// The product is floored with a relative tolerance of 1e-9 so that an effort
/// computed as q / (mood * mu_max) yields exactly q rather than q - 1 after
/// binary rounding.
inline std::uint64_t compute_mu(double effort, double mood, std::uint32_t mu_max) {
    if (!(effort >= 0.0 && effort <= 1.0)) throw std::domain_error("compute_mu: effort outside [0,1]");
    if (!(mood >= 0.0 && mood <= 1.0)) throw std::domain_error("compute_mu: mood outside [0,1]");
    if (mu_max < 1) throw std::domain_error("compute_mu: mu_max must be >= 1");
    const double raw = effort * mood * static_cast<double>(mu_max);
    const auto floored = static_cast<std::uint64_t>(std::floor(raw + 1e-9 * std::max(1.0, raw)));
    return std::min<std::uint64_t>(floored, mu_max);
}

/// Count-level backlog recurrence: max[0, q + arrivals - completed].
constexpr std::uint64_t update_backlog_count(std::uint64_t q, std::uint64_t arrivals,
                                             std::uint64_t completed) {
    const std::uint64_t inflow = q + arrivals;
    return inflow > completed ? inflow - completed : 0;
}

/// Pressure added to the conceptual queue in a slot: mu_max when the worker
/// has pending work but completes nothing, else 0.
constexpr std::uint64_t rest_pressure(std::uint64_t q, std::uint64_t completed, std::uint32_t mu_max) {
    return (q > 0 && completed == 0) ? mu_max : 0;
}

/// Conceptual-queue recurrence: max[0, Q + x - completed], x = rest_pressure.
constexpr std::uint64_t update_conceptual_queue(std::uint64_t conceptual_q, std::uint64_t q,
                                                std::uint64_t completed, std::uint32_t mu_max) {
    const std::uint64_t inflow = conceptual_q + rest_pressure(q, completed, mu_max);
    return inflow > completed ? inflow - completed : 0;
}

struct AgingResult {
    WorkerState state;
    std::uint64_t expired = 0;
};

/// Removes `completed` tasks oldest-cohort-first, then ages every remaining
/// cohort by one slot and drops cohorts whose age reached `deadline`.
///
/// The conceptual queue is advanced from the pre-expiry backlog; expiry never
/// reduces it. Throws ContractViolation if `completed` exceeds the backlog.
inline std::uint64_t complete_and_age_in_place(WorkerState& state, std::uint64_t completed,
                                               Deadline deadline, std::uint32_t mu_max) {
    if (deadline == 0) throw std::domain_error("complete_and_age: deadline must be >= 1");
    if (completed > state.q) {
        throw ContractViolation("complete_and_age: completed " + std::to_string(completed) +
                                " exceeds backlog " + std::to_string(state.q));
    }
    state.conceptual_q = update_conceptual_queue(state.conceptual_q, state.q, completed, mu_max);

    std::uint64_t remaining = completed;
    while (remaining > 0) {
        TaskCohort& head = state.backlog.front();
        const std::uint64_t take = std::min(head.count, remaining);
        head.count -= take;
        remaining -= take;
        if (head.count == 0) state.backlog.pop_front();
    }
    state.q -= completed;

    std::uint64_t expired = 0;
    for (TaskCohort& c : state.backlog) {
        if (c.age < std::numeric_limits<std::uint32_t>::max()) ++c.age;
    }
    if (deadline != kNoDeadline) {
        // Ages are non-increasing from the front, so expired cohorts form a prefix.
        while (!state.backlog.empty() && state.backlog.front().age >= deadline) {
            expired += state.backlog.front().count;
            state.backlog.pop_front();
        }
    }
    state.q -= expired;
    return expired;
}

inline AgingResult complete_and_age(WorkerState state, std::uint64_t completed, Deadline deadline,
                                    std::uint32_t mu_max) {
    const std::uint64_t expired = complete_and_age_in_place(state, completed, deadline, mu_max);
    return {std::move(state), expired};
}

}  // namespace workrest
