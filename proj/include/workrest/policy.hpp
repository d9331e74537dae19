#pragma once

#include <array>
#include <cctype>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "workrest/worker.hpp"

namespace workrest {

enum class PolicyKind { ME, MT, MW, AC, CPL };

inline constexpr std::array<PolicyKind, 5> kAllPolicies{PolicyKind::ME, PolicyKind::MT, PolicyKind::MW,
                                                        PolicyKind::AC, PolicyKind::CPL};

constexpr std::string_view to_string(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ME: return "ME";
        case PolicyKind::MT: return "MT";
        case PolicyKind::MW: return "MW";
        case PolicyKind::AC: return "AC";
        case PolicyKind::CPL: return "CPL";
    }
    return "?";
}

/// Case-insensitive parse of "me", "mt", "mw", "ac", "cpl".
inline std::optional<PolicyKind> parse_policy(std::string_view name) {
    std::string upper(name);
    for (char& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (PolicyKind k : kAllPolicies) {
        if (to_string(k) == upper) return k;
    }
    return std::nullopt;
}

/// Name of the control knob a policy consults, or "none" for ME.
constexpr std::string_view knob_name(PolicyKind kind) {
    switch (kind) {
        case PolicyKind::ME: return "none";
        case PolicyKind::MT: return "theta1";
        case PolicyKind::MW: return "theta2";
        case PolicyKind::AC: return "sigma";
        case PolicyKind::CPL: return "phi";
    }
    return "none";
}

struct PolicyParams {
    PolicyKind kind = PolicyKind::ME;
    double phi = 5.0;
    double sigma = 5.0;
    double theta1 = 0.5;
    double theta2 = 0.5;

    static PolicyParams me() { return {}; }
    static PolicyParams mt(double theta1) { PolicyParams p; p.kind = PolicyKind::MT; p.theta1 = theta1; return p; }
    static PolicyParams mw(double theta2) { PolicyParams p; p.kind = PolicyKind::MW; p.theta2 = theta2; return p; }
    static PolicyParams ac(double sigma) { PolicyParams p; p.kind = PolicyKind::AC; p.sigma = sigma; return p; }
    static PolicyParams cpl(double phi) { PolicyParams p; p.kind = PolicyKind::CPL; p.phi = phi; return p; }

    /// Value of the knob matching `kind` (0 for ME).
    [[nodiscard]] double knob() const {
        switch (kind) {
            case PolicyKind::ME: return 0.0;
            case PolicyKind::MT: return theta1;
            case PolicyKind::MW: return theta2;
            case PolicyKind::AC: return sigma;
            case PolicyKind::CPL: return phi;
        }
        return 0.0;
    }

    static PolicyParams with_knob(PolicyKind kind, double value) {
        switch (kind) {
            case PolicyKind::ME: return me();
            case PolicyKind::MT: return mt(value);
            case PolicyKind::MW: return mw(value);
            case PolicyKind::AC: return ac(value);
            case PolicyKind::CPL: return cpl(value);
        }
        return me();
    }
};

inline void validate(const PolicyParams& p) {
    switch (p.kind) {
        case PolicyKind::ME: break;
        case PolicyKind::MT:
            if (!(p.theta1 >= 0.0 && p.theta1 <= 1.0)) throw std::domain_error("theta1 must lie in [0,1]");
            break;
        case PolicyKind::MW:
            if (!(p.theta2 >= 0.0 && p.theta2 <= 1.0)) throw std::domain_error("theta2 must lie in [0,1]");
            break;
        case PolicyKind::AC:
            if (!(p.sigma > 0.0)) throw std::domain_error("sigma must be > 0");
            break;
        case PolicyKind::CPL:
            if (!(p.phi > 0.0)) throw std::domain_error("phi must be > 0");
            break;
    }
}

struct PolicyDecision {
    double effort = 0.0;
    std::uint64_t completed = 0;

    friend bool operator==(const PolicyDecision&, const PolicyDecision&) = default;
};

inline constexpr PolicyDecision kRest{};

/// Work-Rest Index: phi - (q + Q) * mood * mu_max. Negative means work.
constexpr double compute_wri(double phi, std::uint64_t q, std::uint64_t conceptual_q, double mood,
                             std::uint32_t mu_max) {
    return phi - static_cast<double>(q + conceptual_q) * mood * static_cast<double>(mu_max);
}

/// Just enough effort to clear the backlog at the current mood, capped at 1.
/// When mood * mu_max is 0 the worker is unproductive regardless and full
/// effort is returned.
constexpr double work_effort(std::uint64_t q, double mood, std::uint32_t mu_max) {
    const double capacity = mood * static_cast<double>(mu_max);
    if (capacity <= 0.0) return 1.0;
    const double ratio = static_cast<double>(q) / capacity;
    return ratio < 1.0 ? ratio : 1.0;
}

inline PolicyDecision work_branch(std::uint64_t q, double mood, std::uint32_t mu_max) {
    const double effort = work_effort(q, mood, mu_max);
    return {effort, compute_mu(effort, mood, mu_max)};
}

inline PolicyDecision decide_cpl(const PolicyParams& params, std::uint64_t q, std::uint64_t conceptual_q,
                                 double mood, std::uint32_t mu_max) {
    if (params.kind != PolicyKind::CPL) throw std::invalid_argument("decide_cpl: params.kind is not CPL");
    if (compute_wri(params.phi, q, conceptual_q, mood, mu_max) < 0.0) return work_branch(q, mood, mu_max);
    return kRest;
}

inline PolicyDecision decide_me(std::uint64_t q, double mood, std::uint32_t mu_max) {
    return q > 0 ? work_branch(q, mood, mu_max) : kRest;
}

inline PolicyDecision decide_mt(double theta1, std::uint64_t q, double mood, std::uint32_t mu_max) {
    return (q > 0 && mood >= theta1) ? work_branch(q, mood, mu_max) : kRest;
}

/// Works when q * mu(1, mood) >= mu_max * mu(1, theta2).
inline PolicyDecision decide_mw(double theta2, std::uint64_t q, double mood, std::uint32_t mu_max) {
    if (q == 0) return kRest;
    const std::uint64_t lhs = q * compute_mu(1.0, mood, mu_max);
    const std::uint64_t rhs = std::uint64_t{mu_max} * compute_mu(1.0, theta2, mu_max);
    return lhs >= rhs ? work_branch(q, mood, mu_max) : kRest;
}

/// CPL without the conceptual queue: rest while sigma - q * mood * mu_max >= 0.
inline PolicyDecision decide_ac(double sigma, std::uint64_t q, double mood, std::uint32_t mu_max) {
    if (compute_wri(sigma, q, 0, mood, mu_max) < 0.0) return work_branch(q, mood, mu_max);
    return kRest;
}

inline PolicyDecision decide(const PolicyParams& params, std::uint64_t q, std::uint64_t conceptual_q, double mood,
                             std::uint32_t mu_max) {
    switch (params.kind) {
        case PolicyKind::ME: return decide_me(q, mood, mu_max);
        case PolicyKind::MT: return decide_mt(params.theta1, q, mood, mu_max);
        case PolicyKind::MW: return decide_mw(params.theta2, q, mood, mu_max);
        case PolicyKind::AC: return decide_ac(params.sigma, q, mood, mu_max);
        case PolicyKind::CPL: return decide_cpl(params, q, conceptual_q, mood, mu_max);
    }
    return kRest;
}

}  // namespace workrest
