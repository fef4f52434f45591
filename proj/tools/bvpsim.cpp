// bvpsim: Monte Carlo harness for low-tech boardroom voting protocols.
//
// Subcommands: run, sweep, compare, audit, oracle, schema. Identical argv
// and input files produce byte-identical output; --workers changes only
// wall-clock time.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "bvp/analysis.hpp"
#include "bvp/report.hpp"
#include "bvp/scenario.hpp"

#include "CLI11.hpp"

namespace {

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw bvp::SimError(bvp::Err::ValidationError, "cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_output(const std::string& bytes, const std::string& out_path) {
    if (out_path.empty()) {
        std::fwrite(bytes.data(), 1, bytes.size(), stdout);
        return;
    }
    std::ofstream out(out_path, std::ios::binary);
    if (!out) throw bvp::SimError(bvp::Err::ValidationError, "cannot write " + out_path);
    out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

struct CommonOpts {
    std::string scenario_path;
    std::optional<std::uint64_t> seed;
    std::optional<int> trials;
    std::string format = "json";
    std::string out_path;
    int workers = 1;
};

void add_common(CLI::App* cmd, CommonOpts& opts, bool needs_scenario = true) {
    auto* sc = cmd->add_option("--scenario", opts.scenario_path, "scenario file path");
    if (needs_scenario) sc->required();
    cmd->add_option("--seed", opts.seed, "override the scenario's master seed");
    cmd->add_option("--trials", opts.trials, "override the scenario's trial count");
    cmd->add_option("--format", opts.format, "json | table")->capture_default_str();
    cmd->add_option("--out", opts.out_path, "write the report here instead of stdout");
    cmd->add_option("--workers", opts.workers, "worker threads (output-invariant)")
        ->check(CLI::Range(1, 256));
}

bvp::Scenario load_scenario(const CommonOpts& opts) {
    auto parsed = bvp::parse_scenario(read_file(opts.scenario_path));
    for (const auto& note : parsed.notes) std::cerr << "note: " << note << "\n";
    bvp::Scenario s = parsed.scenario;
    if (opts.seed) s.master_seed = *opts.seed;
    if (opts.trials) s.trials = *opts.trials;
    return s;
}

// Grid spec tokens for the audit table: "N=30", "d=0..5", "m=1..10".
std::vector<int> parse_grid_token(const std::string& token) {
    auto dots = token.find("..");
    std::vector<int> values;
    if (dots == std::string::npos) {
        values.push_back(std::stoi(token));
        return values;
    }
    int lo = std::stoi(token.substr(0, dots));
    int hi = std::stoi(token.substr(dots + 2));
    if (hi < lo) throw bvp::SimError(bvp::Err::ValidationError, "bad range " + token);
    for (int v = lo; v <= hi; ++v) values.push_back(v);
    return values;
}

int run_audit(const std::vector<std::string>& grid, const std::string& format,
              const std::string& out_path) {
    std::vector<int> populations{30};
    std::vector<int> defectives{0, 1, 2, 3};
    std::vector<int> samples{1, 2, 3, 4, 5};
    for (const auto& token : grid) {
        auto eq = token.find('=');
        if (eq == std::string::npos)
            throw bvp::SimError(bvp::Err::ValidationError, "grid token needs key=values");
        std::string key = token.substr(0, eq);
        auto values = parse_grid_token(token.substr(eq + 1));
        if (key == "N") populations = values;
        else if (key == "d") defectives = values;
        else if (key == "m") samples = values;
        else throw bvp::SimError(bvp::Err::ValidationError, "grid keys are N, d, m");
    }
    std::string out;
    if (format == "table") {
        out += "# schema: bvp-audit/1\n";
        out += "N,d,m,p_detect\n";
        for (int N : populations)
            for (int d : defectives)
                for (int m : samples)
                    out += std::to_string(N) + "," + std::to_string(d) + "," + std::to_string(m) +
                           "," + bvp::fmt_number(bvp::audit_detection_probability(N, d, m)) + "\n";
    } else if (format == "json") {
        out += "{\n  \"rows\": [\n";
        bool first = true;
        for (int N : populations)
            for (int d : defectives)
                for (int m : samples) {
                    if (!first) out += ",\n";
                    first = false;
                    out += "    {\"N\": " + std::to_string(N) + ", \"d\": " + std::to_string(d) +
                           ", \"m\": " + std::to_string(m) + ", \"p_detect\": " +
                           bvp::fmt_number(bvp::audit_detection_probability(N, d, m)) + "}";
                }
        out += "\n  ],\n  \"schema\": \"bvp-audit/1\"\n}\n";
    } else {
        throw bvp::SimError(bvp::Err::UnsupportedFormat, "format must be 'json' or 'table'");
    }
    write_output(out, out_path);
    return 0;
}

int run_oracle(const std::string& kind, int max_n, int k, int instances, std::uint64_t seed,
               const std::string& out_path) {
    std::string out;
    if (kind == "decision") {
        out += "# schema: bvp-oracle-decision/1\n";
        out += "counts,objections,outcome,winner,margin\n";
        for (const auto& row : bvp::exhaustive_decision_table(max_n, k)) {
            std::string counts;
            for (std::size_t i = 0; i < row.counts.size(); ++i) {
                if (i) counts += ' ';
                counts += std::to_string(row.counts[i]);
            }
            out += counts + "," + std::to_string(row.objections) + ",";
            if (row.outcome.kind == bvp::OutcomeKind::Elected)
                out += "elected," + std::to_string(row.outcome.winner);
            else
                out += std::string("annulled:") + bvp::annul_reason_name(row.outcome.reason) + ",";
            out += "," + std::to_string(row.outcome.margin) + "\n";
        }
    } else if (kind == "matching") {
        if (max_n > 7)
            throw bvp::SimError(bvp::Err::BoundTooLarge, "matching oracle caps at n=7");
        out += "# schema: bvp-oracle-matching/1\n";
        out += "instance,voter,anonymity_set\n";
        bvp::Rng rng(seed);
        for (int i = 0; i < instances; ++i) {
            int n = 2 + static_cast<int>(rng.below(static_cast<std::uint64_t>(max_n - 1)));
            auto inst = bvp::random_constraint_instance(n, k, rng);
            try {
                auto sets = bvp::oracle_anonymity_sets(inst.constraints, inst.pool);
                for (int v = 0; v < n; ++v) {
                    std::string positions;
                    for (std::size_t j = 0; j < sets[static_cast<std::size_t>(v)].size(); ++j) {
                        if (j) positions += ' ';
                        positions += std::to_string(sets[static_cast<std::size_t>(v)][j]);
                    }
                    out += std::to_string(i) + "," + std::to_string(v) + "," + positions + "\n";
                }
            } catch (const bvp::SimError& e) {
                if (e.code() != bvp::Err::InfeasibleConstraints) throw;
                out += std::to_string(i) + ",-1,infeasible\n";
            }
        }
    } else {
        throw bvp::SimError(bvp::Err::ValidationError, "oracle kind is 'decision' or 'matching'");
    }
    write_output(out, out_path);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Boardroom voting protocol simulator"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    auto* cmd_run = app.add_subcommand("run", "single-scenario Monte Carlo report");
    add_common(cmd_run, run_opts);

    CommonOpts sweep_opts;
    auto* cmd_sweep = app.add_subcommand("sweep", "multi-point sweep report");
    add_common(cmd_sweep, sweep_opts);

    CommonOpts cmp_opts;
    auto* cmd_compare = app.add_subcommand("compare", "BVP1 vs SPB on the same scenario");
    add_common(cmd_compare, cmp_opts);

    std::vector<std::string> grid;
    std::string audit_format = "table";
    std::string audit_out;
    auto* cmd_audit = app.add_subcommand("audit", "cut-and-choose detection probability table");
    cmd_audit->add_option("--grid", grid, "cells, e.g. N=30 d=0..5 m=1..10")->expected(-1);
    cmd_audit->add_option("--format", audit_format, "json | table")->capture_default_str();
    cmd_audit->add_option("--out", audit_out, "output path");

    std::string oracle_kind = "decision";
    int oracle_max_n = 12;
    int oracle_k = 2;
    int oracle_instances = 100;
    std::uint64_t oracle_seed = 0;
    std::string oracle_out;
    auto* cmd_oracle = app.add_subcommand("oracle", "emit exhaustive reference tables");
    cmd_oracle->add_option("--kind", oracle_kind, "decision | matching")->capture_default_str();
    cmd_oracle->add_option("--max-n", oracle_max_n, "bound on n")->capture_default_str();
    cmd_oracle->add_option("--k", oracle_k, "choice count")->capture_default_str();
    cmd_oracle->add_option("--instances", oracle_instances, "matching instances")
        ->capture_default_str();
    cmd_oracle->add_option("--seed", oracle_seed, "matching instance seed")->capture_default_str();
    cmd_oracle->add_option("--out", oracle_out, "output path");

    auto* cmd_schema = app.add_subcommand("schema", "print the scenario-file schema");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        if (rc != 0) {
            std::cerr << "usage error; see 'bvpsim schema' for the scenario format\n";
            return 1;
        }
        return 0;  // --help and friends
    }

    try {
        if (cmd_run->parsed() || cmd_sweep->parsed()) {
            CommonOpts& opts = cmd_run->parsed() ? run_opts : sweep_opts;
            bvp::Scenario s = load_scenario(opts);
            if (cmd_sweep->parsed() && s.sweep.empty())
                throw bvp::SimError(bvp::Err::ValidationError,
                                    "sweep subcommand needs sweep axes in the scenario");
            auto report = bvp::monte_carlo(s, opts.workers);
            write_output(bvp::emit_report(report, bvp::report_format_from(opts.format)),
                         opts.out_path);
        } else if (cmd_compare->parsed()) {
            bvp::Scenario base = load_scenario(cmp_opts);
            bvp::Scenario first = base;
            first.spb = false;
            bvp::Scenario second = base;
            second.spb = true;
            auto cmp = bvp::compare_protocols(first, second, cmp_opts.workers);
            write_output(bvp::emit_comparison(cmp, bvp::report_format_from(cmp_opts.format)),
                         cmp_opts.out_path);
        } else if (cmd_audit->parsed()) {
            return run_audit(grid, audit_format, audit_out);
        } else if (cmd_oracle->parsed()) {
            return run_oracle(oracle_kind, oracle_max_n, oracle_k, oracle_instances, oracle_seed,
                              oracle_out);
        } else if (cmd_schema->parsed()) {
            write_output(bvp::scenario_schema_text(), "");
        }
    } catch (const bvp::SimError& e) {
        std::cerr << "error: " << e.what() << "\n";
        switch (e.code()) {
            case bvp::Err::ParseError:
            case bvp::Err::ValidationError:
            case bvp::Err::InvalidConfig:
            case bvp::Err::UnsupportedFormat:
            case bvp::Err::StrategyPreconditionFailed:
                std::cerr << "see 'bvpsim schema' for the scenario format\n";
                return 1;
            default:
                return 2;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
