#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <exception>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "workrest/policy.hpp"
#include "workrest/population.hpp"
#include "workrest/simulation.hpp"

namespace workrest {

inline constexpr std::string_view kSummaryCsvHeader =
    "policy,knob,knob_value,lf,effort_avg,expiry_avg,completion_avg,effort_pct_of_me,completion_pct_of_me";
inline constexpr std::string_view kSlotCsvHeader = "slot,arrivals,completions,expired,pending,lyapunov,drift_lhs,drift_rhs";
inline constexpr std::string_view kReportCsvHeader =
    "policy,rows,expiry_avg,effort_pct_of_me,completion_pct_of_me,superlinearity_ratio,regime";
inline constexpr std::string_view kNA = "NA";

/// Raised when a CSV handed to the report stage does not match the summary schema.
class SchemaError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Evenly spaced grid [start, stop] with the given step. Values are snapped
/// to 1e-9 so that e.g. 0.05 * 3 prints as 0.150000.
inline std::vector<double> make_grid(double start, double stop, double step) {
    if (!(step > 0.0) || stop < start) throw std::domain_error("grid needs step > 0 and stop >= start");
    const auto count = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9)) + 1;
    std::vector<double> out;
    out.reserve(count);
    for (std::size_t k = 0; k < count; ++k) {
        out.push_back(std::round((start + static_cast<double>(k) * step) * 1e9) / 1e9);
    }
    return out;
}

inline std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.6f", v);
    return buf;
}

inline std::string format_optional(const std::optional<double>& v) {
    return v ? format_fixed(*v) : std::string(kNA);
}

struct SweepSpec {
    std::vector<PolicyKind> policies{kAllPolicies.begin(), kAllPolicies.end()};
    std::vector<double> phi_grid = make_grid(5, 100, 5);
    std::vector<double> sigma_grid = make_grid(5, 100, 5);
    std::vector<double> theta1_grid = make_grid(0.05, 1.0, 0.05);
    std::vector<double> theta2_grid = make_grid(0.05, 1.0, 0.05);
    std::vector<double> lf_grid = make_grid(0.05, 1.0, 0.05);
    std::uint64_t slots = 10'000;
    Deadline deadline = 3;
    std::uint64_t seed = 0;

    [[nodiscard]] const std::vector<double>& knob_grid(PolicyKind kind) const {
        static const std::vector<double> none{0.0};
        switch (kind) {
            case PolicyKind::ME: return none;
            case PolicyKind::MT: return theta1_grid;
            case PolicyKind::MW: return theta2_grid;
            case PolicyKind::AC: return sigma_grid;
            case PolicyKind::CPL: return phi_grid;
        }
        return none;
    }
};

/// Reduced grid used by the acceptance suite: 500 workers, 2,000 slots.
inline SweepSpec desk_sweep_spec(std::uint64_t seed = 2018) {
    SweepSpec s;
    s.phi_grid = {5, 25, 50, 100};
    s.sigma_grid = s.phi_grid;
    s.theta1_grid = {0.2, 0.5, 0.8};
    s.theta2_grid = s.theta1_grid;
    s.lf_grid = make_grid(0.1, 1.0, 0.1);
    s.slots = 2'000;
    s.deadline = 3;
    s.seed = seed;
    return s;
}

inline PopulationSpec desk_population_spec(std::uint64_t seed = 2018) {
    PopulationSpec p;
    p.count = 500;
    p.seed = seed;
    return p;
}

inline void validate(const SweepSpec& spec) {
    if (spec.policies.empty()) throw std::domain_error("sweep selects no policies");
    if (spec.lf_grid.empty()) throw std::domain_error("load-factor grid is empty");
    if (spec.slots < 1) throw std::domain_error("slots must be >= 1");
    for (PolicyKind k : spec.policies) {
        if (spec.knob_grid(k).empty()) {
            throw std::domain_error(std::string(knob_name(k)) + " grid is empty for " + std::string(to_string(k)));
        }
        for (double v : spec.knob_grid(k)) validate(PolicyParams::with_knob(k, v));
    }
    for (double lf : spec.lf_grid) {
        if (!(lf > 0.0 && lf <= 1.0)) throw std::domain_error("load factor " + format_fixed(lf) + " outside (0,1]");
    }
}

struct SweepPoint {
    PolicyParams params;
    double load_factor = 0.0;
    std::size_t lf_index = 0;
};

/// Grid order: ME first, then MT, MW, AC, CPL (as selected); within a
/// policy, knob-major then load factor. ME is always included since it is
/// the normalization baseline.
inline std::vector<SweepPoint> sweep_points(const SweepSpec& spec) {
    std::vector<SweepPoint> points;
    for (PolicyKind kind : kAllPolicies) {
        const bool selected = std::find(spec.policies.begin(), spec.policies.end(), kind) != spec.policies.end();
        if (!selected && kind != PolicyKind::ME) continue;
        for (double knob : spec.knob_grid(kind)) {
            for (std::size_t j = 0; j < spec.lf_grid.size(); ++j) {
                points.push_back({PolicyParams::with_knob(kind, knob), spec.lf_grid[j], j});
            }
        }
    }
    return points;
}

struct SweepRow {
    PolicyKind policy = PolicyKind::ME;
    double knob_value = 0.0;
    double load_factor = 0.0;
    RunMetrics metrics;
    std::optional<double> effort_pct_of_me;
    std::optional<double> completion_pct_of_me;
    // Run diagnostics; not part of the CSV schema.
    std::uint64_t slots_simulated = 0;
    std::uint64_t drift_violations = 0;
    std::uint64_t stability_violations = 0;
};

inline std::optional<double> pct_of(double value, double baseline) {
    if (baseline == 0.0) return std::nullopt;
    return 100.0 * value / baseline;
}

inline SimConfig point_config(const SweepSpec& spec, const SweepPoint& point) {
    SimConfig c;
    c.slots = spec.slots;
    c.deadline = spec.deadline;
    c.load_factor = point.load_factor;
    c.policy = point.params;
    c.seed = spec.seed;
    return c;
}

inline std::string describe(const SweepPoint& p) {
    std::string s(to_string(p.params.kind));
    if (p.params.kind != PolicyKind::ME) s += " " + std::string(knob_name(p.params.kind)) + "=" + format_fixed(p.params.knob());
    return s + " lf=" + format_fixed(p.load_factor);
}

/// Runs every grid point, `threads` at a time (0 = hardware concurrency).
/// Results come back in grid order whatever the execution order. Any failing
/// point aborts the sweep with a message naming the first such point.
inline std::vector<SweepRow> run_sweep(const SweepSpec& spec, std::span<const WorkerProfile> population,
                                       unsigned threads = 0) {
    validate(spec);
    const std::vector<SweepPoint> points = sweep_points(spec);
    std::vector<RunResult> results(points.size());
    std::vector<std::exception_ptr> errors(points.size());
    const std::vector<WorkerProfile> workers(population.begin(), population.end());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (std::size_t i; (i = next.fetch_add(1)) < points.size();) {
            try {
                RunResult r = run(point_config(spec, points[i]), workers);
                r.totals.clear();
                r.final_states.clear();
                results[i] = std::move(r);
            } catch (...) {
                errors[i] = std::current_exception();
            }
        }
    };
    if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, points.size()));
    if (threads <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(threads);
        for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
    }

    for (std::size_t i = 0; i < points.size(); ++i) {
        if (!errors[i]) continue;
        try {
            std::rethrow_exception(errors[i]);
        } catch (const std::exception& e) {
            throw std::runtime_error("sweep point " + describe(points[i]) + " failed: " + e.what());
        }
    }

    std::vector<const RunMetrics*> baseline(spec.lf_grid.size(), nullptr);
    for (std::size_t i = 0; i < points.size(); ++i) {
        if (points[i].params.kind == PolicyKind::ME) baseline[points[i].lf_index] = &results[i].metrics;
    }

    std::vector<SweepRow> rows;
    rows.reserve(points.size());
    for (std::size_t i = 0; i < points.size(); ++i) {
        const RunMetrics& me = *baseline[points[i].lf_index];
        SweepRow row;
        row.policy = points[i].params.kind;
        row.knob_value = points[i].params.knob();
        row.load_factor = points[i].load_factor;
        row.metrics = results[i].metrics;
        row.effort_pct_of_me = pct_of(row.metrics.effort_avg, me.effort_avg);
        row.completion_pct_of_me = pct_of(row.metrics.completion_avg, me.completion_avg);
        row.slots_simulated = spec.slots;
        row.drift_violations = results[i].drift_violations;
        row.stability_violations = results[i].stability_violations;
        rows.push_back(row);
    }
    return rows;
}

inline void write_summary_row(std::ostream& out, const SweepRow& row) {
    out << to_string(row.policy) << ',' << knob_name(row.policy) << ','
        << (row.policy == PolicyKind::ME ? std::string(kNA) : format_fixed(row.knob_value)) << ','
        << format_fixed(row.load_factor) << ',' << format_fixed(row.metrics.effort_avg) << ','
        << format_fixed(row.metrics.expiry_avg) << ',' << format_fixed(row.metrics.completion_avg) << ','
        << format_optional(row.effort_pct_of_me) << ',' << format_optional(row.completion_pct_of_me) << '\n';
}

inline void write_summary_csv(std::ostream& out, std::span<const SweepRow> rows) {
    out << kSummaryCsvHeader << '\n';
    for (const SweepRow& row : rows) write_summary_row(out, row);
}

inline void write_slot_csv(std::ostream& out, std::span<const SlotReport> slots) {
    out << kSlotCsvHeader << '\n';
    for (const SlotReport& s : slots) {
        out << s.slot << ',' << s.arrivals << ',' << s.completions << ',' << s.expired << ',' << s.pending_total << ','
            << format_fixed(s.lyapunov) << ',' << format_fixed(s.drift_lhs) << ',' << format_fixed(s.drift_rhs) << '\n';
    }
}

// ---------------------------------------------------------------------------
// Report stage: reads a summary CSV back and aggregates per policy.

inline std::vector<SweepRow> read_summary_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || detail::trim(line) != kSummaryCsvHeader) {
        throw SchemaError("summary CSV must start with header '" + std::string(kSummaryCsvHeader) + "'");
    }
    std::vector<SweepRow> rows;
    std::size_t line_no = 1;
    auto fail = [&](const std::string& what) { throw SchemaError("line " + std::to_string(line_no) + ": " + what); };
    auto real = [&](std::string_view field, const char* name) {
        double v = 0.0;
        if (!detail::parse_number(field, v)) fail(std::string("malformed ") + name);
        return v;
    };
    auto optional_real = [&](std::string_view field, const char* name) -> std::optional<double> {
        if (detail::trim(field) == kNA) return std::nullopt;
        return real(field, name);
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string_view> f;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            f.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        f.push_back(rest);
        if (f.size() != 9) fail("expected 9 fields, found " + std::to_string(f.size()));

        SweepRow row;
        const auto kind = parse_policy(detail::trim(f[0]));
        if (!kind) fail("unknown policy '" + std::string(f[0]) + "'");
        row.policy = *kind;
        if (detail::trim(f[1]) != knob_name(*kind)) fail("knob column does not match policy");
        row.knob_value = *kind == PolicyKind::ME ? 0.0 : real(f[2], "knob_value");
        row.load_factor = real(f[3], "lf");
        row.metrics.effort_avg = real(f[4], "effort_avg");
        row.metrics.expiry_avg = real(f[5], "expiry_avg");
        row.metrics.completion_avg = real(f[6], "completion_avg");
        row.effort_pct_of_me = optional_real(f[7], "effort_pct_of_me");
        row.completion_pct_of_me = optional_real(f[8], "completion_pct_of_me");
        rows.push_back(row);
    }
    return rows;
}

enum class ProductivityRegime { Sublinear, Linear, Superlinear, Undefined };

constexpr std::string_view to_string(ProductivityRegime r) {
    switch (r) {
        case ProductivityRegime::Sublinear: return "sublinear";
        case ProductivityRegime::Linear: return "linear";
        case ProductivityRegime::Superlinear: return "superlinear";
        case ProductivityRegime::Undefined: return "undefined";
    }
    return "undefined";
}

/// Per-policy aggregate over every row of that policy (all knob values and
/// all load factors). Percentage means skip NA entries.
struct PolicyAggregate {
    PolicyKind policy = PolicyKind::ME;
    std::size_t rows = 0;
    double expiry_avg = 0.0;
    std::optional<double> effort_pct_of_me;
    std::optional<double> completion_pct_of_me;
    std::optional<double> superlinearity_ratio;
    ProductivityRegime regime = ProductivityRegime::Undefined;
};

inline std::vector<PolicyAggregate> aggregate_by_policy(std::span<const SweepRow> rows) {
    struct Acc {
        std::size_t n = 0;
        double expiry = 0.0;
        double effort = 0.0;
        std::size_t effort_n = 0;
        double completion = 0.0;
        std::size_t completion_n = 0;
    };
    std::map<int, Acc> acc;
    for (const SweepRow& r : rows) {
        Acc& a = acc[static_cast<int>(r.policy)];
        ++a.n;
        a.expiry += r.metrics.expiry_avg;
        if (r.effort_pct_of_me) { a.effort += *r.effort_pct_of_me; ++a.effort_n; }
        if (r.completion_pct_of_me) { a.completion += *r.completion_pct_of_me; ++a.completion_n; }
    }
    std::vector<PolicyAggregate> out;
    for (const auto& [key, a] : acc) {
        PolicyAggregate g;
        g.policy = static_cast<PolicyKind>(key);
        g.rows = a.n;
        g.expiry_avg = a.expiry / static_cast<double>(a.n);
        if (a.effort_n) g.effort_pct_of_me = a.effort / static_cast<double>(a.effort_n);
        if (a.completion_n) g.completion_pct_of_me = a.completion / static_cast<double>(a.completion_n);
        if (g.effort_pct_of_me && g.completion_pct_of_me && *g.effort_pct_of_me > 0.0) {
            g.superlinearity_ratio = *g.completion_pct_of_me / *g.effort_pct_of_me;
            g.regime = *g.superlinearity_ratio > 1.0   ? ProductivityRegime::Superlinear
                       : *g.superlinearity_ratio < 1.0 ? ProductivityRegime::Sublinear
                                                        : ProductivityRegime::Linear;
        }
        out.push_back(g);
    }
    return out;
}

inline void write_report_csv(std::ostream& out, std::span<const PolicyAggregate> aggregates) {
    out << kReportCsvHeader << '\n';
    for (const PolicyAggregate& g : aggregates) {
        out << to_string(g.policy) << ',' << g.rows << ',' << format_fixed(g.expiry_avg) << ','
            << format_optional(g.effort_pct_of_me) << ',' << format_optional(g.completion_pct_of_me) << ','
            << format_optional(g.superlinearity_ratio) << ',' << to_string(g.regime) << '\n';
    }
}

}  // namespace workrest
