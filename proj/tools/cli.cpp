#include "cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iostream>
#include <iterator>
#include <memory>
#include <optional>
#include <sstream>

#include "workrest/workrest.hpp"

namespace workrest::cli {
namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string json_scalar(const nlohmann::json& v) {
    if (v.is_string()) return v.get<std::string>();
    return v.dump();
}

/// Expands `--config <file.json>` into long flags. Keys mirror the flag names
/// (dashes or underscores); arrays become comma-joined values so grid options
/// accept `[5, 25, 50]`; `true` turns on a switch. Flags already present on the
/// command line win.
std::vector<std::string> expand_config(std::vector<std::string> args) {
    const auto it = std::find(args.begin(), args.end(), "--config");
    if (it == args.end()) return args;
    if (std::next(it) == args.end()) throw UsageError("--config needs a file");
    const std::string path = *std::next(it);
    args.erase(it, std::next(it, 2));

    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw UsageError(path + ": invalid JSON: " + e.what());
    }
    if (!doc.is_object()) throw UsageError(path + ": JSON config must be an object");

    for (const auto& [key, value] : doc.items()) {
        std::string flag = "--" + key;
        std::replace(flag.begin(), flag.end(), '_', '-');
        if (std::find(args.begin(), args.end(), flag) != args.end()) continue;
        if (value.is_boolean()) {
            if (value.get<bool>()) args.push_back(flag);
            continue;
        }
        std::string text;
        if (value.is_array()) {
            for (const auto& v : value) {
                if (!text.empty()) text += ',';
                text += json_scalar(v);
            }
        } else {
            text = json_scalar(value);
        }
        args.push_back(flag);
        args.push_back(text);
    }
    return args;
}

/// "a,b,c" or "start:stop:step".
std::vector<double> parse_grid(const std::string& text, const std::string& name) {
    auto number = [&](std::string_view field) {
        double v = 0.0;
        if (!workrest::detail::parse_number(field, v)) throw UsageError("malformed value in " + name + ": '" + text + "'");
        return v;
    };
    std::vector<std::string_view> parts;
    std::string_view rest(text);
    const char sep = text.find(':') != std::string::npos ? ':' : ',';
    for (std::size_t pos; (pos = rest.find(sep)) != std::string_view::npos;) {
        parts.push_back(rest.substr(0, pos));
        rest.remove_prefix(pos + 1);
    }
    parts.push_back(rest);
    if (sep == ':') {
        if (parts.size() != 3) throw UsageError(name + " range must be start:stop:step");
        try {
            return make_grid(number(parts[0]), number(parts[1]), number(parts[2]));
        } catch (const std::domain_error& e) {
            throw UsageError(name + ": " + e.what());
        }
    }
    std::vector<double> out;
    for (std::string_view p : parts) out.push_back(number(p));
    return out;
}

std::vector<PolicyKind> parse_policies(const std::string& text) {
    std::vector<PolicyKind> out;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        const auto kind = parse_policy(workrest::detail::trim(item));
        if (!kind) throw UsageError("unknown policy '" + item + "'");
        if (std::find(out.begin(), out.end(), *kind) == out.end()) out.push_back(*kind);
    }
    if (out.empty()) throw UsageError("--policies selects nothing");
    return out;
}

struct PopulationArgs {
    std::string workers_csv;
    std::uint64_t gen_n = 0;

    void attach(CLI::App& app) {
        auto* w = app.add_option("--workers", workers_csv, "Worker CSV (worker_id,reputation,mu_max)");
        auto* g = app.add_option("--gen-n", gen_n, "Generate N synthetic workers instead of loading a CSV");
        w->excludes(g);
    }

    [[nodiscard]] std::vector<WorkerProfile> load(std::uint64_t seed, std::uint64_t default_n = 0) const {
        if (!workers_csv.empty()) {
            try {
                return load_csv(workers_csv);
            } catch (const PopulationError& e) {
                if (e.line() == 0 && std::string(e.what()).starts_with("cannot open")) throw IoError(e.what());
                throw UsageError(workers_csv + ": " + e.what());
            }
        }
        const std::uint64_t n = gen_n != 0 ? gen_n : default_n;
        if (n == 0) throw UsageError("one of --workers or --gen-n is required");
        PopulationSpec spec;
        spec.count = n;
        spec.seed = seed;
        return generate(spec);
    }
};

/// Opens `path` for writing, or returns nullptr for stdout when empty.
std::unique_ptr<std::ofstream> open_output(const std::string& path) {
    if (path.empty()) return nullptr;
    auto f = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*f) throw IoError("cannot write " + path);
    return f;
}

void finish_output(std::ofstream* f, const std::string& path) {
    if (f == nullptr) return;
    f->flush();
    if (!*f) throw IoError("write failed for " + path);
}

// --------------------------------------------------------------------------

struct GenWorkersCmd {
    std::uint64_t n = 0;
    std::uint64_t seed = 0;
    double rep_lo = 0.5, rep_hi = 1.0;
    std::optional<double> rep_const;
    std::uint32_t mu_lo = 1, mu_hi = 10;
    std::optional<std::uint32_t> mu_const;
    std::string out_path;

    void attach(CLI::App& app) {
        app.add_option("--n", n, "Number of workers")->required();
        app.add_option("--seed", seed, "Generator seed");
        auto* rl = app.add_option("--rep-lo", rep_lo, "Reputation uniform lower bound");
        auto* rh = app.add_option("--rep-hi", rep_hi, "Reputation uniform upper bound");
        app.add_option("--rep-const", rep_const, "Constant reputation")->excludes(rl)->excludes(rh);
        auto* ml = app.add_option("--mu-lo", mu_lo, "mu_max uniform-integer lower bound");
        auto* mh = app.add_option("--mu-hi", mu_hi, "mu_max uniform-integer upper bound");
        app.add_option("--mu-const", mu_const, "Constant mu_max")->excludes(ml)->excludes(mh);
        app.add_option("--out", out_path, "Output CSV (stdout if omitted)");
    }

    int execute(std::ostream& out) const {
        PopulationSpec spec;
        spec.count = n;
        spec.seed = seed;
        spec.reputation = rep_const ? ReputationDist{ConstantReal{*rep_const}} : ReputationDist{UniformReal{rep_lo, rep_hi}};
        spec.mu_max = mu_const ? MuMaxDist{ConstantInt{*mu_const}} : MuMaxDist{UniformInt{mu_lo, mu_hi}};
        std::vector<WorkerProfile> workers;
        try {
            workers = generate(spec);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        auto file = open_output(out_path);
        write_workers_csv(file ? *file : out, workers);
        finish_output(file.get(), out_path);
        return kExitOk;
    }
};

struct SimulateCmd {
    std::string policy = "cpl";
    std::optional<double> phi, sigma, theta1, theta2;
    double lf = 0.5;
    std::uint64_t slots = 10'000;
    std::uint64_t seed = 0;
    std::uint32_t deadline = 3;
    PopulationArgs population;
    std::string out_path;
    std::string per_slot_path;

    void attach(CLI::App& app) {
        app.add_option("--policy", policy, "me | mt | mw | ac | cpl");
        app.add_option("--phi", phi, "CPL effort-conservation weight (> 0)");
        app.add_option("--sigma", sigma, "AC rest knob (> 0)");
        app.add_option("--theta1", theta1, "MT mood threshold in [0,1]");
        app.add_option("--theta2", theta2, "MW mood threshold in [0,1]");
        app.add_option("--lf", lf, "Load factor in (0,1]");
        app.add_option("--slots", slots, "Number of time slots");
        app.add_option("--seed", seed, "Seed for mood and synthetic workers");
        app.add_option("--deadline", deadline, "Slots before an uncompleted task expires");
        population.attach(app);
        app.add_option("--out", out_path, "Summary CSV (stdout if omitted)");
        app.add_option("--per-slot", per_slot_path, "Per-slot CSV dump");
    }

    [[nodiscard]] PolicyParams params() const {
        const auto kind = parse_policy(policy);
        if (!kind) throw UsageError("unknown policy '" + policy + "'");
        auto reject = [&](const std::optional<double>& v, const char* flag, PolicyKind owner) {
            if (v && *kind != owner) {
                throw UsageError(std::string(flag) + " does not apply to policy " + std::string(to_string(*kind)));
            }
        };
        reject(phi, "--phi", PolicyKind::CPL);
        reject(sigma, "--sigma", PolicyKind::AC);
        reject(theta1, "--theta1", PolicyKind::MT);
        reject(theta2, "--theta2", PolicyKind::MW);
        PolicyParams p;
        p.kind = *kind;
        if (phi) p.phi = *phi;
        if (sigma) p.sigma = *sigma;
        if (theta1) p.theta1 = *theta1;
        if (theta2) p.theta2 = *theta2;
        return p;
    }

    int execute(std::ostream& out) const {
        SimConfig config;
        config.policy = params();
        config.load_factor = lf;
        config.slots = slots;
        config.seed = seed;
        config.deadline = deadline;
        try {
            validate(config);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        const std::vector<WorkerProfile> workers = population.load(seed);

        const RunResult result = run(config, workers, !per_slot_path.empty());
        RunMetrics me = result.metrics;
        if (config.policy.kind != PolicyKind::ME) {
            SimConfig baseline = config;
            baseline.policy = PolicyParams::me();
            me = run(baseline, workers).metrics;
        }
        SweepRow row;
        row.policy = config.policy.kind;
        row.knob_value = config.policy.knob();
        row.load_factor = lf;
        row.metrics = result.metrics;
        row.effort_pct_of_me = pct_of(result.metrics.effort_avg, me.effort_avg);
        row.completion_pct_of_me = pct_of(result.metrics.completion_avg, me.completion_avg);

        auto file = open_output(out_path);
        std::ostream& sink = file ? *file : out;
        sink << kSummaryCsvHeader << '\n';
        write_summary_row(sink, row);
        finish_output(file.get(), out_path);

        if (!per_slot_path.empty()) {
            auto slots_file = open_output(per_slot_path);
            write_slot_csv(*slots_file, result.slots);
            finish_output(slots_file.get(), per_slot_path);
        }
        return kExitOk;
    }
};

struct SweepCmd {
    std::string policies = "me,mt,mw,ac,cpl";
    std::string phi_grid = "5:100:5";
    std::optional<std::string> sigma_grid;
    std::string theta1_grid = "0.05:1:0.05";
    std::string theta2_grid = "0.05:1:0.05";
    std::string lf_grid = "0.05:1:0.05";
    std::uint64_t slots = 10'000;
    std::uint64_t seed = 0;
    std::uint32_t deadline = 3;
    unsigned threads = 0;
    bool desk = false;
    PopulationArgs population;
    std::string out_path;
    CLI::App* app = nullptr;

    void attach(CLI::App& a) {
        app = &a;
        a.add_option("--policies", policies, "Comma-separated subset of me,mt,mw,ac,cpl");
        a.add_option("--phi-grid", phi_grid, "CPL phi values: list a,b,c or range start:stop:step");
        a.add_option("--sigma-grid", sigma_grid, "AC sigma values (defaults to the phi grid)");
        a.add_option("--theta1-grid", theta1_grid, "MT thresholds");
        a.add_option("--theta2-grid", theta2_grid, "MW thresholds");
        a.add_option("--lf-grid", lf_grid, "Load factors");
        a.add_option("--slots", slots, "Slots per run");
        a.add_option("--seed", seed, "Shared seed for every grid point");
        a.add_option("--deadline", deadline, "Task deadline in slots");
        a.add_option("--threads", threads, "Parallel runs (0 = all cores)");
        a.add_flag("--desk", desk, "Desk-scale preset: 500 workers, 2000 slots, reduced grids");
        population.attach(a);
        a.add_option("--out", out_path, "Sweep CSV (stdout if omitted)");
    }

    [[nodiscard]] bool given(const char* name) const { return app->get_option(name)->count() > 0; }

    [[nodiscard]] SweepSpec spec() const {
        SweepSpec s = desk ? desk_sweep_spec(seed) : SweepSpec{};
        s.policies = parse_policies(policies);
        if (!desk || given("--phi-grid")) s.phi_grid = parse_grid(phi_grid, "--phi-grid");
        if (sigma_grid) {
            s.sigma_grid = parse_grid(*sigma_grid, "--sigma-grid");
        } else if (!desk || given("--phi-grid")) {
            s.sigma_grid = s.phi_grid;
        }
        if (!desk || given("--theta1-grid")) s.theta1_grid = parse_grid(theta1_grid, "--theta1-grid");
        if (!desk || given("--theta2-grid")) s.theta2_grid = parse_grid(theta2_grid, "--theta2-grid");
        if (!desk || given("--lf-grid")) s.lf_grid = parse_grid(lf_grid, "--lf-grid");
        if (!desk || given("--slots")) s.slots = slots;
        if (!desk || given("--deadline")) s.deadline = deadline;
        s.seed = seed;
        try {
            validate(s);
        } catch (const std::domain_error& e) {
            throw UsageError(e.what());
        }
        return s;
    }

    int execute(std::ostream& out) const {
        const SweepSpec s = spec();
        const std::vector<WorkerProfile> workers =
            population.load(seed, desk ? desk_population_spec(seed).count : 0);
        const std::vector<SweepRow> rows = run_sweep(s, workers, threads);
        auto file = open_output(out_path);
        write_summary_csv(file ? *file : out, rows);
        finish_output(file.get(), out_path);
        return kExitOk;
    }
};

struct ReportCmd {
    std::string input;
    std::string out_path;

    void attach(CLI::App& app) {
        app.add_option("sweep_csv", input, "CSV written by `sweep`")->required();
        app.add_option("--out", out_path, "Report CSV (stdout if omitted)");
    }

    int execute(std::ostream& out) const {
        std::ifstream in(input);
        if (!in) throw IoError("cannot open " + input);
        std::vector<SweepRow> rows;
        try {
            rows = read_summary_csv(in);
        } catch (const SchemaError& e) {
            throw UsageError(input + ": " + e.what());
        }
        const std::vector<PolicyAggregate> aggregates = aggregate_by_policy(rows);
        auto file = open_output(out_path);
        write_report_csv(file ? *file : out, aggregates);
        finish_output(file.get(), out_path);
        return kExitOk;
    }
};

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Work-rest scheduling simulator", "workrest"};
    app.require_subcommand(1);

    GenWorkersCmd gen;
    SimulateCmd simulate;
    SweepCmd sweep;
    ReportCmd report;

    auto* gen_app = app.add_subcommand("gen-workers", "Write a synthetic worker CSV");
    gen.attach(*gen_app);
    auto* sim_app = app.add_subcommand("simulate", "Run one policy and print its time-averaged metrics");
    simulate.attach(*sim_app);
    auto* sweep_app = app.add_subcommand("sweep", "Run a policy x knob x load-factor grid");
    sweep.attach(*sweep_app);
    auto* report_app = app.add_subcommand("report", "Aggregate a sweep CSV per policy");
    report.attach(*report_app);

    for (CLI::App* sub : {sim_app, sweep_app}) {
        sub->add_option("--config", "JSON file whose keys mirror the long flags; flags win");
    }

    try {
        std::vector<std::string> expanded;
        try {
            expanded = expand_config(args);
        } catch (const UsageError& e) {
            err << "usage error: " << e.what() << '\n';
            return kExitUsage;
        } catch (const IoError& e) {
            err << "i/o error: " << e.what() << '\n';
            return kExitIo;
        }
        std::vector<std::string> reversed(expanded.rbegin(), expanded.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    }

    try {
        if (gen_app->parsed()) return gen.execute(out);
        if (sim_app->parsed()) return simulate.execute(out);
        if (sweep_app->parsed()) return sweep.execute(out);
        if (report_app->parsed()) return report.execute(out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const IoError& e) {
        err << "i/o error: " << e.what() << '\n';
        return kExitIo;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kExitIo;
    }
    return kExitUsage;
}

}  // namespace workrest::cli
