// SPDX-License-Identifier: Apache-2.0
//
// rsma-xurllc — finite-blocklength RSMA massive-MIMO downlink library and batch CLI
// Copyright (C) 2026 the rsma-xurllc authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>

#include "rsma/schemes.hpp"
#include "rsma/sweep.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitInfeasible = 3;

rsma::SystemConfig load_config(const std::string& path, std::uint64_t seed_override) {
    rsma::SystemConfig cfg =
        path.empty() ? rsma::SystemConfig{} : rsma::SystemConfig::from_file(path);
    if (seed_override != 0) cfg.seed = seed_override;
    for (const auto& w : cfg.warnings()) std::cerr << "warning: " << w << "\n";
    return cfg;
}

void print_solution(const rsma::SystemConfig& cfg, const rsma::SchemeResult& res,
                    bool exact_etr) {
    const auto& jr = res.jprt;
    std::printf("scheme          %s\n", rsma::to_string(res.scheme).c_str());
    std::printf("status          %s\n",
                jr.status == rsma::OptStatus::converged    ? "converged"
                : jr.status == rsma::OptStatus::max_iters ? "max_iters"
                                                           : "infeasible");
    if (jr.status == rsma::OptStatus::infeasible) return;
    const rsma::EtrReport rep =
        res.scheme == rsma::SchemeKind::NOMA
            ? jr.report
            : rsma::etr_total(cfg, jr.alloc, jr.sinrs, exact_etr);
    std::printf("total_etr       %.9g bits/s/Hz%s\n",
                exact_etr && res.scheme != rsma::SchemeKind::NOMA ? rep.total_etr : jr.objective,
                exact_etr ? " (exact accounting)" : "");
    std::printf("n_tx            %d (pilot %d, data %d)\n", jr.alloc.n_tx, jr.alloc.n_pilot,
                jr.alloc.n_data);
    std::printf("power_common    %.9g\n", jr.alloc.power_common);
    std::printf("rate_common     %.9g\n", jr.alloc.rate_common_total);
    for (int u = 0; u < cfg.num_users; ++u) {
        const auto su = static_cast<std::size_t>(u);
        std::printf("user %d: d=%.1fm  rho_p=%.6g  R_c=%.6g  R_p=%.6g  dep_c=%.3g  dep_p=%.3g\n",
                    u, jr.geometry.distances[su], jr.alloc.power_private[su],
                    jr.alloc.rate_common_user[su], jr.alloc.rate_private[su], rep.dep_common[su],
                    rep.dep_private[su]);
    }
    const auto viol = rsma::validate(cfg, jr.alloc);
    std::printf("validate        %s\n",
                viol.empty() ? "clean" : rsma::violations_to_string(viol).c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"RSMA massive-MIMO short-packet downlink: solver and experiment runner"};
    app.require_subcommand(1);

    std::string config_path;
    std::string scheme_str = "rsma";
    std::string out_path;
    std::uint64_t seed = 0;
    bool exact_etr = false;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", config_path, "flat key/value config file");
        sub->add_option("--seed", seed, "override the config seed");
    };

    auto* solve = app.add_subcommand("solve", "optimize one instance");
    add_common(solve);
    solve->add_option("--scheme", scheme_str, "rsma|noma|sdma");
    solve->add_flag("--exact-etr", exact_etr, "score with the full fallback accounting");
    solve->add_option("--out", out_path, "also write the trace CSV here");

    auto* sweep = app.add_subcommand("sweep", "axis sweep with Monte Carlo draws");
    add_common(sweep);
    std::string axis_str = "total_power";
    std::vector<double> values, values2;
    std::vector<std::string> scheme_list{"rsma"};
    int draws = 1;
    sweep->add_option("--axis", axis_str,
                      "latency_bound|dep_bound|num_users|min_rate|total_power|total_cus|"
                      "n_tx_profile|qos_grid");
    sweep->add_option("--values", values, "axis values")->delimiter(',');
    sweep->add_option("--values2", values2, "second axis values (qos_grid)")->delimiter(',');
    sweep->add_option("--draws", draws, "geometry draws per point");
    sweep->add_option("--scheme", scheme_list, "schemes to run")->delimiter(',');
    sweep->add_option("--out", out_path, "CSV output path");
    sweep->add_flag("--exact-etr", exact_etr);

    auto* trace = app.add_subcommand("trace", "per-iteration objective of one solve");
    add_common(trace);
    trace->add_option("--scheme", scheme_str, "rsma|noma|sdma");
    trace->add_option("--out", out_path, "CSV output path");

    auto* validate_cmd = app.add_subcommand("validate", "closed-form vs oracle report");
    add_common(validate_cmd);
    int trials = 20000;
    validate_cmd->add_option("--trials", trials, "Monte Carlo trials for the SINR oracle");
    validate_cmd->add_option("--out", out_path, "CSV output path");

    CLI11_PARSE(app, argc, argv);

    rsma::SystemConfig cfg;
    try {
        cfg = load_config(config_path, seed);
    } catch (const rsma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    }

    try {
        if (solve->parsed()) {
            const auto kind = rsma::scheme_from_string(scheme_str);
            if (!kind) {
                std::cerr << "config error: unknown scheme '" << scheme_str << "'\n";
                return kExitConfig;
            }
            const rsma::SchemeResult res = *kind == rsma::SchemeKind::RSMA ? rsma::solve_rsma(cfg)
                                           : *kind == rsma::SchemeKind::NOMA
                                               ? rsma::solve_noma(cfg)
                                               : rsma::solve_sdma(cfg);
            print_solution(cfg, res, exact_etr);
            if (!out_path.empty()) {
                std::vector<rsma::TraceRow> rows;
                for (const auto& e : res.jprt.trace.entries)
                    if (e.stage != "antenna") rows.push_back({e.iteration, e.stage, e.n_tx, e.objective});
                std::ofstream f(out_path, std::ios::binary);
                f << rsma::trace_csv(rows);
            }
            return res.jprt.status == rsma::OptStatus::infeasible ? kExitInfeasible : kExitOk;
        }

        if (sweep->parsed()) {
            rsma::SweepSpec spec;
            const auto axis = rsma::axis_from_string(axis_str);
            if (!axis || values.empty()) {
                std::cerr << "config error: bad axis or empty values\n";
                return kExitConfig;
            }
            spec.axis = *axis;
            spec.values = values;
            spec.values2 = values2;
            if (spec.axis == rsma::SweepAxis::qos_grid && values2.empty()) {
                std::cerr << "config error: qos_grid needs --values2\n";
                return kExitConfig;
            }
            spec.draws = std::max(1, draws);
            spec.schemes.clear();
            for (const auto& s : scheme_list) {
                const auto k = rsma::scheme_from_string(s);
                if (!k) {
                    std::cerr << "config error: unknown scheme '" << s << "'\n";
                    return kExitConfig;
                }
                spec.schemes.push_back(*k);
            }
            spec.out_path = out_path;
            spec.seed = seed;
            spec.exact_etr = exact_etr;
            const auto rows = rsma::run_sweep(cfg, spec);
            if (out_path.empty()) std::cout << rsma::sweep_csv(rows);
            return kExitOk;
        }

        if (trace->parsed()) {
            const auto kind = rsma::scheme_from_string(scheme_str);
            if (!kind) {
                std::cerr << "config error: unknown scheme '" << scheme_str << "'\n";
                return kExitConfig;
            }
            const auto rows = rsma::run_convergence_trace(cfg, *kind);
            const std::string csv = rsma::trace_csv(rows);
            if (out_path.empty())
                std::cout << csv;
            else {
                std::ofstream f(out_path, std::ios::binary);
                f << csv;
            }
            return kExitOk;
        }

        if (validate_cmd->parsed()) {
            const auto rows = rsma::run_validation_report(cfg, trials);
            const std::string csv = rsma::validation_csv(rows);
            if (out_path.empty())
                std::cout << csv;
            else {
                std::ofstream f(out_path, std::ios::binary);
                f << csv;
            }
            return kExitOk;
        }
    } catch (const rsma::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitInfeasible;
    }
    return kExitOk;
}
