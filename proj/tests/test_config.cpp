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

#include <catch2/catch_amalgamated.hpp>

#include "rsma/config.hpp"

using namespace rsma;

namespace {

bool has_violation(const std::vector<Violation>& v, const std::string& name) {
    for (const auto& x : v)
        if (x.constraint == name) return true;
    return false;
}

ResourceAllocation feasible_alloc(const SystemConfig& cfg) {
    ResourceAllocation a;
    a.n_tx = 64;
    a.n_pilot = 64;
    a.n_data = cfg.total_cus - 64;
    a.power_common = cfg.total_power / 2;
    a.power_private.assign(static_cast<std::size_t>(cfg.num_users),
                           cfg.total_power / (2.0 * cfg.num_users));
    a.rate_common_total = 3.0;
    a.rate_common_user.assign(static_cast<std::size_t>(cfg.num_users), 3.0 / cfg.num_users);
    a.rate_private.assign(static_cast<std::size_t>(cfg.num_users), 1.0);
    return a;
}

}  // namespace

TEST_CASE("defaults are self-consistent") {
    SystemConfig cfg;
    CHECK(cfg.check().empty());
    CHECK(cfg.warnings().empty());
    CHECK(cfg.total_cus == 1000);
}

TEST_CASE("config parsing") {
    const SystemConfig cfg = SystemConfig::from_text(
        "num_users 3\n"
        "rx_antennas = 2   # comment\n"
        "latency_bound_s 0.5e-3\n"
        "min_rate 1.5\n");
    CHECK(cfg.num_users == 3);
    CHECK(cfg.rx_antennas == 2);
    CHECK(cfg.total_cus == 500);  // derived from the latency bound
    CHECK(cfg.min_rate == 1.5);

    CHECK_THROWS_AS(SystemConfig::from_text("nope 3\n"), ConfigError);
    CHECK_THROWS_AS(SystemConfig::from_text("num_users abc\n"), ConfigError);
    CHECK_THROWS_AS(SystemConfig::from_text("dep_bound 0.7\n"), ConfigError);
    CHECK_THROWS_AS(SystemConfig::from_text("ring_inner_m 100\nring_outer_m 90\n"), ConfigError);
    CHECK_THROWS_AS(SystemConfig::from_text("total_cus 123\n"), ConfigError);
}

TEST_CASE("dBm powers convert once at ingestion") {
    const SystemConfig cfg = SystemConfig::from_text("total_power_dbm -113\npilot_power_dbm -103\n");
    CHECK(cfg.total_power == Catch::Approx(1.0));
    CHECK(cfg.pilot_power == Catch::Approx(10.0));
}

TEST_CASE("tall base stations only warn") {
    SystemConfig cfg;
    cfg.bs_height_m = 20.0;
    CHECK(cfg.check().empty());
    CHECK(cfg.warnings().size() == 1);
}

TEST_CASE("validate accepts a boundary-feasible allocation") {
    SystemConfig cfg;
    ResourceAllocation a = feasible_alloc(cfg);
    // power sum exactly on the budget
    double priv = 0.0;
    for (double p : a.power_private) priv += p;
    a.power_common = cfg.total_power - priv;
    const auto v = validate(cfg, a);
    CHECK(v.empty());
    // idempotent
    CHECK(validate(cfg, a).empty());
}

TEST_CASE("validate flags the pilot floor") {
    SystemConfig cfg;
    ResourceAllocation a = feasible_alloc(cfg);
    a.n_pilot = a.n_tx - 1;
    const auto v = validate(cfg, a);
    CHECK(has_violation(v, "pilot-floor"));
}

TEST_CASE("validate flags a broken share sum") {
    SystemConfig cfg;
    ResourceAllocation a = feasible_alloc(cfg);
    a.rate_common_user[0] += 0.1;
    const auto v = validate(cfg, a);
    CHECK(has_violation(v, "common-rate-sum"));
}

TEST_CASE("validate flags budget and sign violations") {
    SystemConfig cfg;
    ResourceAllocation a = feasible_alloc(cfg);
    a.power_common = cfg.total_power;  // sum now exceeds the budget
    CHECK(has_violation(validate(cfg, a), "power-budget"));

    a = feasible_alloc(cfg);
    a.rate_private[1] = -0.25;
    CHECK(has_violation(validate(cfg, a), "rate-nonneg"));

    a = feasible_alloc(cfg);
    a.n_pilot = cfg.total_cus;
    CHECK(has_violation(validate(cfg, a), "cu-budget"));
}
