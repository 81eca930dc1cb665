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

#include "rsma/sweep.hpp"

using namespace rsma;

namespace {

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.num_users = 2;
    cfg.rx_antennas = 2;
    cfg.bandwidth_hz = 2e5;
    cfg.derive_total_cus();
    cfg.min_rate = 1.0;
    cfg.seed = 5;
    return cfg;
}

}  // namespace

TEST_CASE("single point, single draw") {
    SystemConfig cfg = small_config();
    SweepSpec spec;
    spec.axis = SweepAxis::total_power;
    spec.values = {cfg.total_power};
    spec.draws = 1;
    spec.schemes = {SchemeKind::RSMA};
    const auto rows = run_sweep(cfg, spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "converged");
    CHECK(rows[0].total_etr > 0.0);
    const std::string csv = sweep_csv(rows);
    CHECK(csv.find("point,axis_value,axis_value2,scheme,draw,total_etr,n_tx,iters,status") == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 2);  // header + one data row
}

TEST_CASE("sweeps are reproducible byte for byte") {
    SystemConfig cfg = small_config();
    SweepSpec spec;
    spec.axis = SweepAxis::total_power;
    spec.values = {1e12, 2e12};
    spec.draws = 2;
    spec.schemes = {SchemeKind::RSMA, SchemeKind::SDMA};
    const std::string a = sweep_csv(run_sweep(cfg, spec));
    const std::string b = sweep_csv(run_sweep(cfg, spec));
    CHECK(a == b);
    CHECK(a.find("mean") != std::string::npos);
    CHECK(a.find("ci95") != std::string::npos);
}

TEST_CASE("failures become status rows") {
    SystemConfig cfg = small_config();
    cfg.min_rate = 50.0;  // unreachable
    SweepSpec spec;
    spec.axis = SweepAxis::total_power;
    spec.values = {cfg.total_power};
    spec.draws = 1;
    const auto rows = run_sweep(cfg, spec);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0].status == "infeasible");
}

TEST_CASE("convergence trace is monotone") {
    SystemConfig cfg = small_config();
    const auto rows = run_convergence_trace(cfg, SchemeKind::RSMA);
    REQUIRE(!rows.empty());
    CHECK(static_cast<int>(rows.size()) <= 2 * cfg.max_iters + 1);
    CHECK(rows.back().objective >= rows.front().objective);
    double prev = -1e300;
    for (const auto& r : rows) {
        CHECK(r.objective >= prev - 1e-9 * std::max(1.0, std::abs(prev)));
        prev = r.objective;
    }
    const std::string csv = trace_csv(rows);
    CHECK(csv.find("iteration,stage,n_tx,objective") == 0);
}

TEST_CASE("more latency budget never hurts any scheme") {
    SystemConfig cfg = small_config();
    cfg.num_users = 3;
    cfg.min_rate = 0.3;
    SweepSpec spec;
    spec.axis = SweepAxis::latency_bound;
    spec.values = {0.2e-3, 0.6e-3, 1.2e-3};
    spec.draws = 4;
    spec.schemes = {SchemeKind::RSMA, SchemeKind::NOMA, SchemeKind::SDMA};
    const auto rows = run_sweep(cfg, spec);
    for (const auto scheme : spec.schemes) {
        double prev = -1.0;
        for (std::size_t p = 0; p < spec.values.size(); ++p) {
            for (const auto& r : rows) {
                if (r.point_index != static_cast<int>(p) || r.scheme != to_string(scheme) ||
                    r.draw != "mean")
                    continue;
                INFO(r.scheme << " point " << p);
                CHECK(r.total_etr >= prev - 1e-9);
                prev = r.total_etr;
            }
        }
    }
}

TEST_CASE("looser error bounds never hurt") {
    SystemConfig cfg = small_config();
    cfg.num_users = 3;
    cfg.min_rate = 0.3;
    SweepSpec spec;
    spec.axis = SweepAxis::dep_bound;
    spec.values = {1e-9, 1e-7, 1e-5};
    spec.draws = 4;
    spec.schemes = {SchemeKind::RSMA};
    const auto rows = run_sweep(cfg, spec);
    double prev = -1.0;
    for (std::size_t p = 0; p < spec.values.size(); ++p) {
        for (const auto& r : rows) {
            if (r.point_index != static_cast<int>(p) || r.draw != "mean") continue;
            CHECK(r.total_etr >= prev - 1e-9);
            prev = r.total_etr;
        }
    }
}

TEST_CASE("qos grid crosses both axes") {
    SystemConfig cfg = small_config();
    SweepSpec spec;
    spec.axis = SweepAxis::qos_grid;
    spec.values = {0.5e-3, 1.0e-3};
    spec.values2 = {1e-6, 1e-5};
    spec.draws = 1;
    const auto rows = run_sweep(cfg, spec);
    REQUIRE(rows.size() == 4);
    CHECK(rows[0].axis_value == 0.5e-3);
    CHECK(rows[0].axis_value2 == 1e-6);
    CHECK(rows[3].axis_value == 1.0e-3);
    CHECK(rows[3].axis_value2 == 1e-5);
}

TEST_CASE("antenna profile axis pins the count") {
    SystemConfig cfg = small_config();
    SweepSpec spec;
    spec.axis = SweepAxis::n_tx_profile;
    spec.values = {16, 64, 128};
    spec.draws = 1;
    spec.schemes = {SchemeKind::RSMA, SchemeKind::NOMA};
    const auto rows = run_sweep(cfg, spec);
    for (const auto& r : rows) {
        if (r.status != "converged") continue;
        CHECK(r.n_tx == static_cast<int>(r.axis_value));
    }
}

TEST_CASE("every solved sweep point yields a clean allocation") {
    SystemConfig cfg = small_config();
    SweepSpec spec;
    spec.axis = SweepAxis::total_power;
    spec.values = {2e12};
    spec.draws = 3;
    spec.schemes = {SchemeKind::RSMA, SchemeKind::NOMA, SchemeKind::SDMA};
    const auto rows = run_sweep(cfg, spec);
    // replay the recorded sub-seeds and validate each allocation
    for (const auto& r : rows) {
        if (r.draw == "mean" || r.draw == "ci95" || r.status != "converged") continue;
        const auto scheme = scheme_from_string(r.scheme);
        REQUIRE(scheme.has_value());
        Rng geo = make_stream(cfg.seed, 0, std::stoull(r.draw), 0xA110C);
        const UserGeometry geom = sample_geometry(cfg, geo);
        Rng ch = make_stream(cfg.seed, 0, std::stoull(r.draw), 0xC4A7);
        const ChannelDraw draw = sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch);
        const SchemeResult sr = solve_scheme(cfg, *scheme, geom, draw);
        CHECK(validate(cfg, sr.jprt.alloc).empty());
        CHECK(sr.jprt.objective == Catch::Approx(r.total_etr).epsilon(1e-9));
    }
}

TEST_CASE("extra receive antennas raise the converged plateau") {
    SystemConfig base = small_config();
    base.num_users = 3;
    base.min_rate = 0.3;
    double mean2 = 0.0, mean3 = 0.0;
    const int draws = 10;
    for (int d = 0; d < draws; ++d) {
        for (int nr : {2, 3}) {
            SystemConfig cfg = base;
            cfg.rx_antennas = nr;
            cfg.seed = 600 + static_cast<std::uint64_t>(d);
            Rng geo = make_stream(cfg.seed, 0xA110C);
            const UserGeometry geom = sample_geometry(cfg, geo);
            Rng ch = make_stream(cfg.seed, 0xC4A7);
            const ChannelDraw draw =
                sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch);
            const SchemeResult sr = solve_scheme(cfg, SchemeKind::RSMA, geom, draw);
            const double v = sr.jprt.status == OptStatus::infeasible ? 0.0 : sr.jprt.objective;
            (nr == 2 ? mean2 : mean3) += v / draws;
        }
    }
    CHECK(mean3 > mean2);
}

TEST_CASE("validation report covers every oracle row") {
    SystemConfig cfg = small_config();
    const auto rows = run_validation_report(cfg, 1500, 2000);
    const auto find = [&](const std::string& q) {
        for (const auto& r : rows)
            if (r.quantity == q) return true;
        return false;
    };
    CHECK(find("ring-moment-1"));
    CHECK(find("ring-moment-2"));
    for (int w = 3; w <= 5; ++w) {
        CHECK(find("ring-moment-" + std::to_string(w) + "-large"));
        CHECK(find("ring-moment-" + std::to_string(w) + "-small"));
        CHECK(find("ring-moment-" + std::to_string(w) + "-unity"));
    }
    CHECK(find("sinr-common"));
    CHECK(find("sinr-private"));
    CHECK(find("sinr-private-fallback"));
    CHECK(find("power-normalization"));
    for (const auto& r : rows) {
        INFO(r.quantity << " err=" << r.rel_error << " tol=" << r.tolerance);
        CHECK(r.pass);
    }
    CHECK(validation_csv(rows).find("quantity,closed_form") == 0);
}
