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

#include "rsma/channel.hpp"
#include "rsma/numerics.hpp"

using namespace rsma;

TEST_CASE("ring sampling density") {
    SystemConfig cfg;
    Rng rng = make_stream(7, 1);
    const int draws = 1000000;
    cfg.num_users = 1;
    num::RunningStat d2;
    for (int i = 0; i < draws; ++i) {
        const UserGeometry g = sample_geometry(cfg, rng);
        d2.add(g.distances[0] * g.distances[0]);
        REQUIRE(g.distances[0] >= cfg.ring_inner_m);
        REQUIRE(g.distances[0] <= cfg.ring_outer_m);
    }
    const double expect = 0.5 * (cfg.ring_inner_m * cfg.ring_inner_m +
                                 cfg.ring_outer_m * cfg.ring_outer_m);
    CHECK(std::abs(d2.mean() - expect) / expect < 0.005);
}

TEST_CASE("degenerate ring collapses to a point") {
    SystemConfig cfg;
    cfg.ring_outer_m = cfg.ring_inner_m;  // constructed directly; loaders reject this
    Rng rng = make_stream(7, 2);
    cfg.num_users = 8;
    const UserGeometry g = sample_geometry(cfg, rng);
    for (double d : g.distances) CHECK(d == Catch::Approx(cfg.ring_inner_m).margin(1e-9));
}

TEST_CASE("pathloss unit point") {
    SystemConfig cfg;
    cfg.wavelength_m = 0.15;
    cfg.bs_height_m = 0.0;
    const double d = 0.15 / (4.0 * M_PI);
    CHECK(cfg.kappa_at(d) == Catch::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("estimation quality factor") {
    CHECK(ceq(1.0, 1.0, 1.0) == Catch::Approx(0.5).epsilon(1e-15));
    CHECK(ceq(1e-12, 64.0, 0.1) < 1e-10);  // vanishes with the gain
    // independent arithmetic at the example point
    const double k = 1.164e-7, c = 64.0 * 0.1;
    const double expect = std::sqrt(c) * k / (1.0 + c * k);
    CHECK(ceq(k, 64.0, 0.1) == Catch::Approx(expect).epsilon(1e-12));
    CHECK(expect == Catch::Approx(2.945e-7).epsilon(1e-3));
    // decays monotonically once the pilot gain passes unity
    double prev = ceq(1e-7, 1.0, 1e7);
    for (int i = 1; i <= 40; ++i) {
        const double c2 = 1e7 * std::pow(10.0, i / 8.0);
        const double v = ceq(1e-7, 1.0, c2);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("pilot training limits") {
    SystemConfig cfg;
    cfg.num_users = 2;
    Rng rng = make_stream(3, 0);
    const UserGeometry geom = sample_geometry(cfg, rng);

    CHECK_THROWS_AS(pilot_train(geom, 32, 4, 4, 1.0, rng), std::invalid_argument);

    // near-perfect estimation when the pilot gain is enormous (the residual
    // scales as 1/sqrt(pilot gain), so 4e6 sits safely under 1e-3)
    {
        const double rho = 4e6 / (64.0 * geom.kappas[0]);
        const ChannelRealization r = pilot_train(geom, 32, 2, 64, rho, rng);
        const double err = arma::norm(r.est_rows[0] - r.true_rows[0]) / arma::norm(r.true_rows[0]);
        CHECK(err < 1e-3);
    }
    // estimates vanish with the pilot power
    {
        const ChannelRealization r = pilot_train(geom, 32, 2, 64, 1e-30, rng);
        CHECK(arma::norm(r.est_rows[0]) < 1e-10 * arma::norm(r.true_rows[0]));
    }
}

TEST_CASE("linear estimator orthogonality and shrinkage") {
    SystemConfig cfg;
    cfg.num_users = 1;
    Rng rng = make_stream(5, 0);
    const int draws = 100000;
    const int n_tx = 4;
    // fixed-position user so the expectation is conditional on the gain
    UserGeometry geom;
    geom.distances = {60.0};
    geom.kappas = {cfg.kappa_at(60.0)};
    const double c = 64.0 * cfg.pilot_power;
    const double k = geom.kappas[0];

    num::RunningStat ortho_re, ortho_im, var_est, var_true;
    for (int i = 0; i < draws; ++i) {
        const ChannelRealization r = pilot_train(geom, n_tx, 2, 64, cfg.pilot_power, rng);
        for (int n = 0; n < n_tx; ++n) {
            const std::complex<double> g = r.true_rows[0](static_cast<arma::uword>(n));
            const std::complex<double> ge = r.est_rows[0](static_cast<arma::uword>(n));
            const std::complex<double> cross = (g - ge) * std::conj(ge);
            ortho_re.add(cross.real());
            ortho_im.add(cross.imag());
            var_est.add(std::norm(ge));
            var_true.add(std::norm(g));
        }
    }
    // error orthogonal to the estimate within Monte Carlo resolution
    CHECK(std::abs(ortho_re.mean()) < 3.0 * ortho_re.std_error());
    CHECK(std::abs(ortho_im.mean()) < 3.0 * ortho_im.std_error());
    // shrinkage ratio
    const double expect = c * k / (1.0 + c * k);
    CHECK(var_est.mean() / var_true.mean() == Catch::Approx(expect).epsilon(0.02));
}

TEST_CASE("normalization constant") {
    CHECK(theta_closed_form(64, 4, 10.0) ==
          Catch::Approx(std::sqrt(60.0 * 10.0 / (4.0 * 11.0))).epsilon(1e-12));
    CHECK(theta_closed_form(64, 4, 10.0) == Catch::Approx(3.6927).margin(1e-4));

    Rng rng = make_stream(9, 0);
    const double theta = theta_closed_form(64, 4, 10.0);
    const double mc = theta_normalization_mc(64, 4, 10.0, 10000, rng);
    CHECK(std::abs(mc - 1.0 / (theta * theta)) / (1.0 / (theta * theta)) < 0.02);
}

TEST_CASE("zero-forcing structure") {
    SystemConfig cfg;
    cfg.num_users = 3;
    Rng rng = make_stream(21, 0);
    const UserGeometry geom = sample_geometry(cfg, rng);
    const int n_tx = 32;
    const ChannelRealization real = pilot_train(geom, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power, rng);
    const std::vector<double> rho_p(3, cfg.total_power / 6.0);
    const PrecoderSet pre = build_precoders(real, geom, cfg.total_power / 2.0, rho_p, n_tx);

    const double scale = std::sqrt(static_cast<double>(n_tx - cfg.rx_antennas));
    for (int u = 0; u < 3; ++u)
        for (int k = 0; k < 3; ++k) {
            const std::complex<double> v =
                arma::as_scalar(real.est_rows[static_cast<std::size_t>(u)] *
                                pre.priv.col(static_cast<arma::uword>(k)));
            if (u == k)
                CHECK(std::abs(v - scale) < 1e-8 * scale);
            else
                CHECK(std::abs(v) < 1e-8 * scale);
        }
    CHECK(pre.theta == Catch::Approx(theta_closed_form(n_tx, cfg.rx_antennas,
                                                       n_tx * cfg.pilot_power)));
    CHECK(pre.fading_moment2 == 1.0);
    for (double x : pre.xi) CHECK(x > 0.0);

    // matrix accessors expose the replicated rows
    const arma::cx_mat G = real.true_gains(0);
    CHECK(G.n_rows == static_cast<arma::uword>(cfg.rx_antennas));
    CHECK(G.n_cols == static_cast<arma::uword>(n_tx));
    CHECK(arma::norm(G.row(0) - G.row(cfg.rx_antennas - 1)) == 0.0);
}

TEST_CASE("single-user combining weight") {
    SystemConfig cfg;
    cfg.num_users = 1;
    Rng rng = make_stream(22, 0);
    const UserGeometry geom = sample_geometry(cfg, rng);
    const int n_tx = 16;
    const ChannelRealization real = pilot_train(geom, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power, rng);
    const std::vector<double> rho_p{cfg.total_power / 2.0};
    const PrecoderSet pre = build_precoders(real, geom, cfg.total_power / 2.0, rho_p, n_tx);
    CHECK(pre.xi[0] == Catch::Approx(1.0 / std::sqrt(16.0)).epsilon(1e-12));
}

TEST_CASE("statistically equivalent precoder columns") {
    // the alternate model draws the forcing matrix independent of the
    // estimates; its inverse-trace expectation follows the isotropic ensemble
    SystemConfig cfg;
    cfg.num_users = 3;
    Rng rng = make_stream(29, 0);
    const UserGeometry geom = sample_geometry(cfg, rng);
    const int n_tx = 24;
    const ChannelRealization real =
        pilot_train(geom, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power, rng);
    const std::vector<double> rho_p(3, 1.0);
    CHECK_THROWS_AS(build_precoders(real, geom, 1.0, rho_p, n_tx, ZfChannelModel::random),
                    std::invalid_argument);  // rng required
    num::RunningStat tr;
    for (int d = 0; d < 4000; ++d) {
        const PrecoderSet pre =
            build_precoders(real, geom, 1.0, rho_p, n_tx, ZfChannelModel::random, &rng);
        tr.add(std::real(arma::trace(pre.priv.t() * pre.priv)));
    }
    const double expect =
        (n_tx - cfg.rx_antennas) * 3.0 / (n_tx - 3.0);  // isotropic inverse-trace mean
    CHECK(std::abs(tr.mean() - expect) / expect < 0.05);
}

TEST_CASE("degenerate user set is rejected") {
    SystemConfig cfg;
    cfg.num_users = 2;
    Rng rng = make_stream(23, 0);
    const UserGeometry geom = sample_geometry(cfg, rng);
    const int n_tx = 16;
    ChannelRealization real = pilot_train(geom, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power, rng);
    real.est_rows[1] = real.est_rows[0];  // rank-deficient stack
    const std::vector<double> rho_p(2, 1.0);
    CHECK_THROWS_AS(build_precoders(real, geom, 1.0, rho_p, n_tx), DegenerateChannelError);
}

TEST_CASE("ring expectations: exact forms") {
    SystemConfig cfg;
    for (double c : {0.1, 1.0, 10.0, 100.0, 6.4}) {
        const double p1 = ring_moment(1, cfg, 1.0, c, Regime::unity);
        const double o1 = ring_moment_oracle(1, cfg, 1.0, c);
        CHECK(std::abs(p1 - o1) / o1 < 0.01);
        const double p2 = ring_moment(2, cfg, 1.0, c, Regime::unity);
        const double o2 = ring_moment_oracle(2, cfg, 1.0, c);
        CHECK(std::abs(p2 - o2) / o2 < 0.05);
    }
    // integrand is positive, so the expectation is
    CHECK(ring_moment_oracle(2, cfg, 64.0, 0.1) > 0.0);
    // decreasing in the pilot power
    double prev = ring_moment_oracle(1, cfg, 64.0, 0.01);
    for (double rho : {0.1, 1.0, 10.0}) {
        const double v = ring_moment_oracle(1, cfg, 64.0, rho);
        CHECK(v < prev);
        prev = v;
    }
}

TEST_CASE("ring expectations: branch forms in their regimes") {
    SystemConfig cfg;
    const double k_min = cfg.kappa_at(cfg.ring_outer_m);
    const double k_max = cfg.kappa_at(cfg.ring_inner_m);

    const double c_large = 100.0 / k_min;
    const double c_small = 0.01 / k_max;
    for (int which = 3; which <= 5; ++which) {
        const double pl = ring_moment(which, cfg, 1.0, c_large, Regime::large);
        const double ol = ring_moment_oracle(which, cfg, 1.0, c_large);
        CHECK(std::abs(pl - ol) / ol < 0.10);
        const double ps = ring_moment(which, cfg, 1.0, c_small, Regime::small);
        const double os = ring_moment_oracle(which, cfg, 1.0, c_small);
        CHECK(std::abs(ps - os) / os < 0.10);
    }
    // the even-gain branch needs a narrow band around the median radius
    SystemConfig narrow = cfg;
    const double r_med = std::sqrt(0.5 * (cfg.ring_inner_m * cfg.ring_inner_m +
                                          cfg.ring_outer_m * cfg.ring_outer_m));
    narrow.ring_inner_m = 0.9 * r_med;
    narrow.ring_outer_m = 1.1 * r_med;
    const double c_unity = 1.0 / narrow.kappa_at(r_med);
    for (int which = 3; which <= 5; ++which) {
        const double pu = ring_moment(which, narrow, 1.0, c_unity, Regime::unity);
        const double ou = ring_moment_oracle(which, narrow, 1.0, c_unity);
        CHECK(std::abs(pu - ou) / ou < 0.15);
    }
    // deep-regime sanity at a very large pilot gain
    const double c_huge = 1000.0 / k_min;
    const double p3 = ring_moment(3, cfg, 1.0, c_huge, Regime::large);
    const double o3 = ring_moment_oracle(3, cfg, 1.0, c_huge);
    CHECK(std::abs(p3 - o3) / o3 < 0.05);
}

TEST_CASE("regime auto-selection") {
    const std::vector<double> ks{1e-8, 3e-8, 1e-7};
    CHECK(auto_regime(1e10, ks) == Regime::large);
    CHECK(auto_regime(1e4, ks) == Regime::small);
    CHECK(auto_regime(3e7, ks) == Regime::unity);
}
