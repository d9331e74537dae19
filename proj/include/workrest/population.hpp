#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <ostream>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_set>
#include <variant>
#include <vector>

#include "workrest/random.hpp"
#include "workrest/worker.hpp"

namespace workrest {

inline constexpr std::string_view kWorkerCsvHeader = "worker_id,reputation,mu_max";

/// Raised for unreadable or invalid worker files. `line()` is 1-based, 0 when
/// the problem is not tied to a line.
class PopulationError : public std::runtime_error {
public:
    PopulationError(const std::string& what, std::size_t line = 0)
        : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
    [[nodiscard]] std::size_t line() const { return line_; }

private:
    std::size_t line_;
};

struct UniformReal {
    double lo = 0.5;
    double hi = 1.0;
};
struct ConstantReal {
    double value = 1.0;
};
struct UniformInt {
    std::uint32_t lo = 1;
    std::uint32_t hi = 10;
};
struct ConstantInt {
    std::uint32_t value = 1;
};

using ReputationDist = std::variant<UniformReal, ConstantReal>;
using MuMaxDist = std::variant<UniformInt, ConstantInt>;

struct PopulationSpec {
    std::uint64_t count = 1;
    ReputationDist reputation = UniformReal{0.5, 1.0};
    MuMaxDist mu_max = UniformInt{1, 10};
    std::uint64_t seed = 0;
};

inline void validate(const PopulationSpec& spec) {
    if (spec.count < 1) throw std::domain_error("population count must be >= 1");
    auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
    if (const auto* u = std::get_if<UniformReal>(&spec.reputation)) {
        if (!(in_unit(u->lo) && in_unit(u->hi) && u->lo <= u->hi)) {
            throw std::domain_error("reputation range must satisfy 0 <= lo <= hi <= 1");
        }
    } else if (!in_unit(std::get<ConstantReal>(spec.reputation).value)) {
        throw std::domain_error("constant reputation must lie in [0,1]");
    }
    if (const auto* u = std::get_if<UniformInt>(&spec.mu_max)) {
        if (!(u->lo >= 1 && u->lo <= u->hi)) throw std::domain_error("mu_max range must satisfy 1 <= lo <= hi");
    } else if (std::get<ConstantInt>(spec.mu_max).value < 1) {
        throw std::domain_error("constant mu_max must be >= 1");
    }
}

namespace detail {
inline constexpr std::uint64_t kReputationStream = 0x7265707574617469ULL;
inline constexpr std::uint64_t kMuMaxStream = 0x6d755f6d61785f5fULL;
}  // namespace detail

/// Deterministic synthetic population with ids 0..count-1.
inline std::vector<WorkerProfile> generate(const PopulationSpec& spec) {
    validate(spec);
    std::vector<WorkerProfile> out;
    out.reserve(spec.count);
    for (std::uint64_t id = 0; id < spec.count; ++id) {
        WorkerProfile p;
        p.id = id;
        if (const auto* u = std::get_if<UniformReal>(&spec.reputation)) {
            const double draw = to_unit_interval(counter_hash(spec.seed, id, detail::kReputationStream));
            p.reputation = std::min(u->hi, u->lo + (u->hi - u->lo) * draw);
        } else {
            p.reputation = std::get<ConstantReal>(spec.reputation).value;
        }
        if (const auto* u = std::get_if<UniformInt>(&spec.mu_max)) {
            const double draw = to_unit_interval(counter_hash(spec.seed, id, detail::kMuMaxStream));
            const std::uint64_t span = std::uint64_t{u->hi} - u->lo + 1;
            p.mu_max = u->lo + static_cast<std::uint32_t>(std::floor(draw * static_cast<double>(span)));
        } else {
            p.mu_max = std::get<ConstantInt>(spec.mu_max).value;
        }
        out.push_back(p);
    }
    return out;
}

namespace detail {

inline std::string_view trim(std::string_view s) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
    return s;
}

template <typename T>
bool parse_number(std::string_view field, T& out) {
    field = trim(field);
    if (field.empty()) return false;
    const char* end = field.data() + field.size();
    auto [ptr, ec] = std::from_chars(field.data(), end, out);
    return ec == std::errc{} && ptr == end;
}

inline std::string format_real(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return {buf, ptr};
}

}  // namespace detail

inline std::vector<WorkerProfile> read_workers_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw PopulationError("empty worker file, expected header", 1);
    if (line.size() >= 3 && line.compare(0, 3, "\xEF\xBB\xBF") == 0) line.erase(0, 3);
    if (detail::trim(line) != kWorkerCsvHeader) {
        throw PopulationError("header must be '" + std::string(kWorkerCsvHeader) + "'", 1);
    }

    std::vector<WorkerProfile> out;
    std::unordered_set<std::uint64_t> seen;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (detail::trim(line).empty()) continue;
        std::vector<std::string_view> fields;
        std::string_view rest(line);
        for (std::size_t pos; (pos = rest.find(',')) != std::string_view::npos;) {
            fields.push_back(rest.substr(0, pos));
            rest.remove_prefix(pos + 1);
        }
        fields.push_back(rest);
        if (fields.size() != 3) throw PopulationError("expected 3 fields, found " + std::to_string(fields.size()), line_no);

        WorkerProfile p;
        std::int64_t mu = 0;
        if (!detail::parse_number(fields[0], p.id)) throw PopulationError("malformed worker_id", line_no);
        if (!detail::parse_number(fields[1], p.reputation)) throw PopulationError("malformed reputation", line_no);
        if (!detail::parse_number(fields[2], mu)) throw PopulationError("malformed mu_max", line_no);
        if (!(p.reputation >= 0.0 && p.reputation <= 1.0)) throw PopulationError("reputation outside [0,1]", line_no);
        if (mu < 1 || mu > static_cast<std::int64_t>(UINT32_MAX)) throw PopulationError("mu_max must be >= 1", line_no);
        p.mu_max = static_cast<std::uint32_t>(mu);
        if (!seen.insert(p.id).second) throw PopulationError("duplicate worker_id " + std::to_string(p.id), line_no);
        out.push_back(p);
    }
    if (out.empty()) throw PopulationError("worker file contains no workers");
    return out;
}

inline std::vector<WorkerProfile> load_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw PopulationError("cannot open " + path);
    return read_workers_csv(in);
}

/// Reputations are written in shortest round-trip form.
inline void write_workers_csv(std::ostream& out, std::span<const WorkerProfile> population) {
    out << kWorkerCsvHeader << '\n';
    for (const WorkerProfile& p : population) {
        out << p.id << ',' << detail::format_real(p.reputation) << ',' << p.mu_max << '\n';
    }
}

inline void write_csv(const std::string& path, std::span<const WorkerProfile> population) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw PopulationError("cannot write " + path);
    write_workers_csv(out, population);
    if (!out) throw PopulationError("write failed for " + path);
}

}  // namespace workrest
