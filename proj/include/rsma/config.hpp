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

#ifndef RSMA_CONFIG_HPP
#define RSMA_CONFIG_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace rsma {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Scenario constants. All transmit powers are stored noise-normalized
// (divided by the noise power), so every SINR expression carries a literal
// "+1" noise term. Keys with a _dbm suffix in config files are converted
// against noise_dbm once at ingestion.
struct SystemConfig {
    double bandwidth_hz = 1e6;
    double carrier_hz = 2e9;
    double wavelength_m = 0.15;
    double noise_dbm = -113.0;
    double latency_bound_s = 1e-3;  // D_th
    double dep_bound = 1e-5;        // decoding-error target
    double ring_inner_m = 35.0;
    double ring_outer_m = 95.0;
    double bs_height_m = 3.0;
    double total_power = 2e12;  // noise-normalized
    double pilot_power = 2e10;  // noise-normalized
    int num_users = 5;
    int rx_antennas = 3;
    int total_cus = 1000;  // round(latency_bound_s * bandwidth_hz)
    double min_rate = 0.5;  // per-user rate floor, bits/s/Hz
    double sca_tol = 1e-6;
    double jprt_tol = 1e-3;
    int max_iters = 50;
    std::uint64_t seed = 1;

    // Derived helpers.
    double pathloss_scale() const;  // (wavelength / 4pi)^2
    double kappa_at(double distance_m) const;
    void derive_total_cus() { total_cus = static_cast<int>(latency_bound_s * bandwidth_hz + 0.5); }

    // Flat key/value file, one "key value" or "key = value" pair per line,
    // '#' comments. Unknown keys are rejected. Throws ConfigError.
    static SystemConfig from_file(const std::string& path);
    static SystemConfig from_text(const std::string& text);

    // Structural invariant violations (empty when valid) and non-fatal
    // warnings (e.g. BS height large relative to the inner radius).
    std::vector<std::string> check() const;
    std::vector<std::string> warnings() const;
};

// Full decision vector of the allocator.
struct ResourceAllocation {
    int n_tx = 0;
    int n_pilot = 0;
    int n_data = 0;
    double power_common = 0.0;
    std::vector<double> power_private;
    double rate_common_total = 0.0;
    std::vector<double> rate_common_user;
    std::vector<double> rate_private;

    double power_sum() const;
};

struct EtrReport {
    std::vector<double> dep_common;
    std::vector<double> dep_private;
    std::vector<double> etr_common;
    std::vector<double> etr_private;
    double total_etr = 0.0;
    std::vector<double> slack_dep_common;
    std::vector<double> slack_dep_private;
    std::vector<double> slack_rate_floor;
};

struct Violation {
    std::string constraint;  // e.g. "pilot-floor", "power-budget"
    double residual = 0.0;   // positive amount by which the constraint is broken
    int user = -1;           // -1 for scalar constraints
};

// Checks every structural constraint of the allocation against the config.
// Violations are data, not faults; an empty list means feasible.
std::vector<Violation> validate(const SystemConfig& cfg, const ResourceAllocation& alloc);

std::string violations_to_string(const std::vector<Violation>& v);

}  // namespace rsma

#endif
