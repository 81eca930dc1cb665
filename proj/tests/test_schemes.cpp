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
#include <cmath>

#include "rsma/fbl.hpp"
#include "rsma/schemes.hpp"

using namespace rsma;

namespace {

SystemConfig small_config() {
    SystemConfig cfg;
    cfg.num_users = 2;
    cfg.rx_antennas = 2;
    cfg.bandwidth_hz = 2e5;
    cfg.derive_total_cus();
    cfg.min_rate = 1.0;
    cfg.seed = 77;
    return cfg;
}

}  // namespace

TEST_CASE("scheme names round-trip") {
    for (auto k : {SchemeKind::RSMA, SchemeKind::NOMA, SchemeKind::SDMA})
        CHECK(scheme_from_string(to_string(k)) == k);
    CHECK(!scheme_from_string("tdma").has_value());
}

TEST_CASE("private-only scheme never uses the shared stream") {
    SystemConfig cfg = small_config();
    const SchemeResult r = solve_sdma(cfg);
    REQUIRE(r.jprt.status != OptStatus::infeasible);
    CHECK(r.jprt.alloc.power_common == 0.0);
    CHECK(r.jprt.alloc.rate_common_total == 0.0);
    for (double x : r.jprt.report.etr_common) CHECK(x == 0.0);
    for (double x : r.jprt.alloc.rate_private) CHECK(x >= cfg.min_rate - 1e-9);
    CHECK(validate(cfg, r.jprt.alloc).empty());
}

TEST_CASE("splitting dominates the private-only restriction") {
    SystemConfig cfg = small_config();
    UserGeometry geom;
    ChannelDraw draw;
    {
        Rng geo = make_stream(cfg.seed, 0xA110C);
        geom = sample_geometry(cfg, geo);
        Rng ch = make_stream(cfg.seed, 0xC4A7);
        draw = sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch);
    }
    const SchemeComparison cmp = solve_all_schemes(cfg, geom, draw);
    REQUIRE(cmp.rsma.jprt.status != OptStatus::infeasible);
    REQUIRE(cmp.sdma.jprt.status != OptStatus::infeasible);
    CHECK(cmp.rsma.jprt.objective >= cmp.sdma.jprt.objective - 1e-6);
}

TEST_CASE("single-user schemes coincide") {
    SystemConfig cfg = small_config();
    cfg.num_users = 1;
    cfg.min_rate = 0.5;
    const SchemeResult sdma = solve_sdma(cfg);
    const SchemeResult noma = solve_noma(cfg);
    const SchemeResult rsma = solve_rsma(cfg);
    REQUIRE(sdma.jprt.status != OptStatus::infeasible);
    REQUIRE(noma.jprt.status != OptStatus::infeasible);
    REQUIRE(rsma.jprt.status != OptStatus::infeasible);
    // a single user has no one to share with: the three collapse
    CHECK(noma.jprt.objective ==
          Catch::Approx(sdma.jprt.objective).epsilon(2e-3));
    CHECK(rsma.jprt.objective >= sdma.jprt.objective - 1e-6);
}

TEST_CASE("cancellation chains multiply the stage successes") {
    SystemConfig cfg = small_config();
    cfg.num_users = 3;
    cfg.rx_antennas = 2;
    cfg.min_rate = 0.6;
    const SchemeResult r = solve_noma(cfg);
    REQUIRE(r.jprt.status != OptStatus::infeasible);
    REQUIRE(r.noma_stages.has_value());
    const auto& st = *r.noma_stages;
    for (int i = 0; i < cfg.num_users; ++i) {
        const auto si = static_cast<std::size_t>(i);
        double weakest = 1.0;
        double product = 1.0;
        for (int m = i; m < cfg.num_users; ++m) {
            const double ok = 1.0 - st.stage_dep[si][static_cast<std::size_t>(m)];
            weakest = std::min(weakest, ok);
            product *= ok;
            // every stage clears the reliability bound
            CHECK(st.stage_dep[si][static_cast<std::size_t>(m)] <= cfg.dep_bound * (1.0 + 1e-9));
        }
        CHECK(product == Catch::Approx(st.chain_success[si]).epsilon(1e-12));
        CHECK(product <= weakest + 1e-15);
    }
    // rank ordering follows the large-scale gains
    for (std::size_t i = 0; i + 1 < st.order.size(); ++i)
        CHECK(r.jprt.geometry.kappas[static_cast<std::size_t>(st.order[i])] >=
              r.jprt.geometry.kappas[static_cast<std::size_t>(st.order[i + 1])]);
    CHECK(validate(cfg, r.jprt.alloc).empty());
}

TEST_CASE("ordered cancellation falls behind as the user count grows") {
    // the per-stage blocklength penalties scale with the user count while the
    // split scheme keeps a fixed number of streams per user
    SystemConfig base;
    base.rx_antennas = 2;
    base.min_rate = 0.3;
    const int draws = 8;
    double gap2 = 0.0, gap8 = 0.0;
    for (int d = 0; d < draws; ++d) {
        for (int users : {2, 8}) {
            SystemConfig cfg = base;
            cfg.num_users = users;
            cfg.seed = 800 + static_cast<std::uint64_t>(d);
            Rng geo = make_stream(cfg.seed, 0xA110C);
            const UserGeometry geom = sample_geometry(cfg, geo);
            Rng ch = make_stream(cfg.seed, 0xC4A7);
            const ChannelDraw draw =
                sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch);
            const SchemeComparison cmp = solve_all_schemes(cfg, geom, draw);
            REQUIRE(cmp.rsma.jprt.status != OptStatus::infeasible);
            REQUIRE(cmp.noma.jprt.status != OptStatus::infeasible);
            const double g = (cmp.rsma.jprt.objective - cmp.noma.jprt.objective) /
                             cmp.rsma.jprt.objective;
            (users == 2 ? gap2 : gap8) += g / draws;
        }
    }
    CHECK(gap8 > gap2);
}

TEST_CASE("randomized baseline instances stay clean") {
    for (int i = 0; i < 12; ++i) {
        SystemConfig cfg;
        Rng r = make_stream(0xF0221, static_cast<std::uint64_t>(i));
        cfg.num_users = 1 + static_cast<int>(rand_uniform(r) * 5.0);
        cfg.rx_antennas = 1 + static_cast<int>(rand_uniform(r) * 3.0);
        cfg.bandwidth_hz = 2e5 * (1.0 + std::floor(rand_uniform(r) * 4.0));
        cfg.derive_total_cus();
        cfg.total_power = std::pow(10.0, 7.0 + 6.0 * rand_uniform(r));
        cfg.pilot_power = cfg.total_power / 100.0;
        cfg.min_rate = rand_uniform(r) * 1.5;
        cfg.seed = 7200 + static_cast<std::uint64_t>(i);
        if (cfg.num_users * cfg.rx_antennas + 3 >= cfg.total_cus) continue;
        for (const auto kind : {SchemeKind::NOMA, SchemeKind::SDMA}) {
            SchemeResult sr;
            switch (kind) {
                case SchemeKind::NOMA: sr = solve_noma(cfg); break;
                default: sr = solve_sdma(cfg); break;
            }
            if (sr.jprt.status == OptStatus::infeasible) continue;
            INFO("instance " << i << " scheme " << to_string(kind));
            CHECK(sr.jprt.objective >= 0.0);
            CHECK(validate(cfg, sr.jprt.alloc).empty());
            if (kind == SchemeKind::NOMA) {
                REQUIRE(sr.noma_stages.has_value());
                for (const auto& row : sr.noma_stages->stage_dep)
                    for (double e : row) CHECK(e <= cfg.dep_bound * (1.0 + 1e-9));
            }
        }
    }
}

TEST_CASE("two-user ordered cancellation beats a coarse grid") {
    SystemConfig cfg = small_config();
    cfg.min_rate = 0.5;
    UserGeometry geom;
    ChannelDraw draw;
    {
        Rng geo = make_stream(cfg.seed, 0xA110C);
        geom = sample_geometry(cfg, geo);
        Rng ch = make_stream(cfg.seed, 0xC4A7);
        draw = sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch);
    }
    const SchemeResult r = solve_scheme(cfg, SchemeKind::NOMA, geom, draw);
    REQUIRE(r.jprt.status != OptStatus::infeasible);

    // brute force at the chosen antenna count: power split x rate fractions
    const int n_tx = r.jprt.alloc.n_tx;
    const double nd = static_cast<double>(cfg.total_cus - n_tx);
    const double psi = r.jprt.sinrs.psi;
    const int strong = geom.kappas[0] >= geom.kappas[1] ? 0 : 1;
    const int weak = 1 - strong;
    const double eps_t = cfg.dep_bound * (1.0 - 1e-4);
    double grid_best = -1.0;
    for (int i = 1; i < 160; ++i) {
        const double rho0 = cfg.total_power * i / 160.0;  // strong rank power
        const double rho1 = cfg.total_power - rho0;
        const double g00 = rho0 * geom.kappas[static_cast<std::size_t>(strong)] * psi /
                           (1.0 + 0.0);  // decodes last after cancelling
        const double g11 =
            rho1 * geom.kappas[static_cast<std::size_t>(weak)] * psi /
            (geom.kappas[static_cast<std::size_t>(weak)] * psi * rho0 + 1.0);
        const double g01 = rho1 * geom.kappas[static_cast<std::size_t>(strong)] * psi /
                           (geom.kappas[static_cast<std::size_t>(strong)] * psi * rho0 + 1.0);
        if (g00 <= 0.0 || g11 <= 0.0) continue;
        const double cap0 =
            fbl::achievable_rate(nd, fbl::uniform_sinrs(g00, cfg.rx_antennas), eps_t);
        const double cap1 = std::min(
            fbl::achievable_rate(nd, fbl::uniform_sinrs(g11, cfg.rx_antennas), eps_t),
            fbl::achievable_rate(nd, fbl::uniform_sinrs(g01, cfg.rx_antennas), eps_t));
        if (cap0 < cfg.min_rate || cap1 < cfg.min_rate) continue;
        for (int a = 1; a <= 12; ++a)
            for (int b = 1; b <= 12; ++b) {
                const double r0 = cfg.min_rate + (cap0 - cfg.min_rate) * a / 12.0;
                const double r1 = cfg.min_rate + (cap1 - cfg.min_rate) * b / 12.0;
                const double e00 = fbl::dep(nd, fbl::uniform_sinrs(g00, cfg.rx_antennas), r0);
                const double e11 = fbl::dep(nd, fbl::uniform_sinrs(g11, cfg.rx_antennas), r1);
                const double e01 = fbl::dep(nd, fbl::uniform_sinrs(g01, cfg.rx_antennas), r1);
                const double v = r0 * (1.0 - e00) * (1.0 - e01) + r1 * (1.0 - e11);
                grid_best = std::max(grid_best, v);
            }
    }
    CHECK(r.jprt.objective >= grid_best * (1.0 - 0.01));
}
