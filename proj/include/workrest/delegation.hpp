#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "workrest/worker.hpp"

namespace workrest {

struct DelegationConfig {
    double load_factor = 1.0;
    Deadline deadline = 3;
    double omega = 0.0;
};

/// Reputation-weighted collective capacity: sum of reputation * mu_max.
inline double collective_capacity(std::span<const WorkerProfile> population) {
    if (population.empty()) throw std::invalid_argument("collective_capacity: empty population");
    double omega = 0.0;
    for (const WorkerProfile& p : population) omega += p.reputation * static_cast<double>(p.mu_max);
    return omega;
}

/// Tasks delegated per slot: load_factor * omega rounded half-up.
inline std::uint64_t slot_workload(double load_factor, double omega) {
    if (!(omega > 0.0)) throw std::domain_error("slot_workload: omega must be > 0");
    if (!(load_factor >= 0.0)) throw std::domain_error("slot_workload: load_factor must be >= 0");
    return static_cast<std::uint64_t>(std::floor(load_factor * omega + 0.5));
}

/// Splits `w_req` tasks across workers in proportion to
/// reputation * mu_max / (1 + q), using largest-remainder rounding with ties
/// going to the lower worker id. If every weight is zero the tasks are dealt
/// round-robin in ascending id order.
inline std::vector<std::uint64_t> delegate(std::uint64_t w_req, std::span<const WorkerProfile> population,
                                           std::span<const WorkerState> states) {
    if (population.size() != states.size()) {
        throw std::invalid_argument("delegate: population and states differ in size");
    }
    const std::size_t n = population.size();
    std::vector<std::uint64_t> out(n, 0);
    if (w_req == 0 || n == 0) {
        if (w_req > 0) throw std::invalid_argument("delegate: no workers to receive tasks");
        return out;
    }

    std::vector<std::size_t> by_id(n);
    std::iota(by_id.begin(), by_id.end(), std::size_t{0});
    auto id_less = [&](std::size_t a, std::size_t b) { return population[a].id < population[b].id; };

    std::vector<double> weight(n);
    double total = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        weight[i] = population[i].reputation * static_cast<double>(population[i].mu_max) /
                    (1.0 + static_cast<double>(states[i].q));
        total += weight[i];
    }

    if (!(total > 0.0)) {
        std::sort(by_id.begin(), by_id.end(), id_less);
        const std::uint64_t base = w_req / n;
        const std::uint64_t extra = w_req % n;
        for (std::size_t k = 0; k < n; ++k) out[by_id[k]] = base + (k < extra ? 1 : 0);
        return out;
    }

    // Remainders are compared on a 1e-9 grid so that quotas equal in exact
    // arithmetic tie and fall through to the id order.
    constexpr double kGrid = 1e9;
    std::vector<std::int64_t> remainder(n);
    std::uint64_t assigned = 0;
    const double scale = static_cast<double>(w_req) / total;
    for (std::size_t i = 0; i < n; ++i) {
        const double quota = weight[i] * scale;
        const double whole = std::floor(quota + 1.0 / kGrid);
        out[i] = static_cast<std::uint64_t>(whole);
        remainder[i] = std::llround(std::max(0.0, quota - whole) * kGrid);
        assigned += out[i];
    }
    // Floating-point quotas can overshoot by a unit; take it back from the
    // smallest remainders.
    while (assigned > w_req) {
        std::size_t pick = n;
        for (std::size_t i = 0; i < n; ++i) {
            if (out[i] > 0 && (pick == n || remainder[i] < remainder[pick])) pick = i;
        }
        --out[pick];
        remainder[pick] += static_cast<std::int64_t>(kGrid);
        --assigned;
    }

    std::uint64_t leftover = w_req - assigned;
    if (leftover == 0) return out;
    auto before = [&](std::size_t a, std::size_t b) {
        if (remainder[a] != remainder[b]) return remainder[a] > remainder[b];
        return population[a].id < population[b].id;
    };
    std::vector<std::size_t> candidates;
    candidates.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (weight[i] > 0.0) candidates.push_back(i);
    }
    const auto take = static_cast<std::ptrdiff_t>(std::min<std::uint64_t>(leftover, candidates.size()));
    std::partial_sort(candidates.begin(), candidates.begin() + take, candidates.end(), before);
    for (std::ptrdiff_t k = 0; leftover > 0; k = (k + 1) % take, --leftover) ++out[candidates[k]];
    return out;
}

}  // namespace workrest
