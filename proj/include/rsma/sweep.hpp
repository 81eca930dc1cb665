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

#ifndef RSMA_SWEEP_HPP
#define RSMA_SWEEP_HPP

#include <optional>
#include <string>
#include <vector>

#include "rsma/schemes.hpp"

namespace rsma {

enum class SweepAxis {
    latency_bound,
    dep_bound,
    num_users,
    min_rate,
    total_power,
    total_cus,
    n_tx_profile,  // fixed antenna counts, no antenna search
    qos_grid       // latency (values) x error bound (values2)
};

std::optional<SweepAxis> axis_from_string(const std::string& s);
std::string to_string(SweepAxis a);

struct SweepSpec {
    SweepAxis axis = SweepAxis::total_power;
    std::vector<double> values;
    std::vector<double> values2;  // second axis of qos_grid
    int draws = 1;
    std::vector<SchemeKind> schemes{SchemeKind::RSMA};
    std::string out_path;         // empty: no file
    std::uint64_t seed = 0;       // 0: take the config seed
    bool exact_etr = false;
};

struct SweepRow {
    int point_index = 0;
    double axis_value = 0.0;
    double axis_value2 = 0.0;
    std::string scheme;
    std::string draw;  // draw index, or "mean"/"ci95" aggregate rows
    double total_etr = 0.0;
    int n_tx = 0;
    int iters = 0;
    std::string status;
};

// One solve per (point, scheme, draw) with counter-derived sub-seeds; rows
// are emitted in point order so the CSV is byte-stable across runs.
// Per-point failures become status rows, never aborts.
std::vector<SweepRow> run_sweep(const SystemConfig& cfg, const SweepSpec& spec);

std::string sweep_csv(const std::vector<SweepRow>& rows);

struct TraceRow {
    int iteration = 0;
    std::string stage;
    int n_tx = 0;
    double objective = 0.0;
};

// Per-iteration objective of one solve (the winning antenna count).
std::vector<TraceRow> run_convergence_trace(const SystemConfig& cfg, SchemeKind scheme);
std::string trace_csv(const std::vector<TraceRow>& rows);

struct ValidationRow {
    std::string quantity;
    double closed_form = 0.0;
    double oracle = 0.0;
    double rel_error = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

// Closed-form-vs-oracle table: the five ring expectations, the three SINR
// families and the normalization constant.
std::vector<ValidationRow> run_validation_report(const SystemConfig& cfg, int sinr_trials = 20000,
                                                 int theta_draws = 10000);
std::string validation_csv(const std::vector<ValidationRow>& rows);

}  // namespace rsma

#endif
