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

#include "rsma/sinr.hpp"

#include <cmath>
#include <numeric>

namespace rsma {

double psi_assemble(int n_tx, double np_rho_p, double sum_xi_sq, double sum_xi_cross, double pi3,
                    double pi4, double pi2, double pi1_sq_slot, double pi5_sq_slot,
                    double fading_moment2) {
    const double nt = static_cast<double>(n_tx);
    const double h2 = fading_moment2;
    const double diag_block = h2 * np_rho_p * (pi3 + (nt - 1.0) * pi4) + nt * pi2;
    const double cross_block = h2 * np_rho_p * (pi1_sq_slot + (nt - 1.0) * pi5_sq_slot) + nt * pi1_sq_slot;
    return nt * h2 * np_rho_p * (sum_xi_sq * diag_block + sum_xi_cross * cross_block);
}

double psi_value(const SystemConfig& cfg, int n_tx, double n_pilot, double pilot_power,
                 std::span<const double> xi, std::span<const double> kappas) {
    const double c = n_pilot * pilot_power;
    const Regime reg = auto_regime(c, kappas);
    const double p1 = ring_moment(1, cfg, n_pilot, pilot_power, reg);
    const double p2 = ring_moment(2, cfg, n_pilot, pilot_power, reg);
    const double p3 = ring_moment(3, cfg, n_pilot, pilot_power, reg);
    const double p4 = ring_moment(4, cfg, n_pilot, pilot_power, reg);
    const double p5 = ring_moment(5, cfg, n_pilot, pilot_power, reg);
    double s2 = 0.0, s1 = 0.0;
    for (double x : xi) {
        s2 += x * x;
        s1 += x;
    }
    const double cross = s1 * s1 - s2;
    return psi_assemble(n_tx, c, s2, cross, p3, p4, p2, p1 * p1, p5 * p5);
}

SinrProfile closed_form_sinrs(double power_common, std::span<const double> power_private,
                              std::span<const double> kappas, double psi) {
    SinrProfile out;
    out.psi = psi;
    const std::size_t U = power_private.size();
    out.common.resize(U);
    out.priv.resize(U);
    out.priv_fallback.resize(U);
    const double sum_p = std::accumulate(power_private.begin(), power_private.end(), 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        const double kp = kappas[u] * psi;
        const double other = sum_p - power_private[u];
        out.common[u] = power_common * kp / (kp * sum_p + 1.0);
        out.priv[u] = power_private[u] * kp / (kp * other + 1.0);
        out.priv_fallback[u] = power_private[u] * kp / (kp * other + power_common * kp + 1.0);
    }
    return out;
}

SinrProfile ratio_sinrs(double power_common, std::span<const double> power_private) {
    SinrProfile out;
    const std::size_t U = power_private.size();
    out.common.resize(U);
    out.priv.resize(U);
    out.priv_fallback.resize(U);
    const double sum_p = std::accumulate(power_private.begin(), power_private.end(), 0.0);
    for (std::size_t u = 0; u < U; ++u) {
        const double other = sum_p - power_private[u];
        out.common[u] = power_common / sum_p;
        out.priv[u] = power_private[u] / other;
        out.priv_fallback[u] = power_private[u] / (other + power_common);
    }
    return out;
}

namespace {

double sample_ring_kappa(const SystemConfig& cfg, Rng& rng) {
    const double r2i = cfg.ring_inner_m * cfg.ring_inner_m;
    const double r2o = cfg.ring_outer_m * cfg.ring_outer_m;
    const double r = std::sqrt(r2i + rand_uniform(rng) * (r2o - r2i));
    return cfg.kappa_at(r);
}

}  // namespace

SinrOracleResult sinr_oracle(const SystemConfig& cfg, int n_tx, double power_common,
                             std::span<const double> power_private, int trials, Rng& rng) {
    SinrOracleResult res;
    const int U = static_cast<int>(power_private.size());
    const int n_pilot = n_tx;  // training span matches the active antennas
    const double c = static_cast<double>(n_pilot) * cfg.pilot_power;

    Rng probe_rng = make_stream(cfg.seed, 0xBEEF);
    SystemConfig probe_cfg = cfg;
    probe_cfg.num_users = U;
    res.probe = sample_geometry(probe_cfg, probe_rng);

    num::RunningStat psi_acc;
    std::vector<num::RunningStat> xi_acc(static_cast<std::size_t>(U));

    for (int t = 0; t < trials; ++t) {
        // Fresh user constellation with real fading/pilot noise for the
        // combining-weight draw.
        const UserGeometry geom = sample_geometry(probe_cfg, rng);
        const ChannelRealization real =
            pilot_train(geom, n_tx, cfg.rx_antennas, n_pilot, cfg.pilot_power, rng);
        const PrecoderSet pre =
            build_precoders(real, geom, power_common, power_private, n_tx);
        double s2 = 0.0, s1 = 0.0;
        for (int u = 0; u < U; ++u) {
            const double x = pre.xi[static_cast<std::size_t>(u)];
            s2 += x * x;
            s1 += x;
            xi_acc[static_cast<std::size_t>(u)].add(x);
        }
        const double cross = s1 * s1 - s2;

        // Independent position pair for the ring functionals; products of
        // the two draws estimate the squared expectation slots without bias.
        const double ka = sample_ring_kappa(cfg, rng);
        const double kb = sample_ring_kappa(cfg, rng);
        const double p3 = 0.5 * (ring_moment_integrand(3, ka, c) + ring_moment_integrand(3, kb, c));
        const double p4 = 0.5 * (ring_moment_integrand(4, ka, c) + ring_moment_integrand(4, kb, c));
        const double p2 = 0.5 * (ring_moment_integrand(2, ka, c) + ring_moment_integrand(2, kb, c));
        const double p1sq = ring_moment_integrand(1, ka, c) * ring_moment_integrand(1, kb, c);
        const double p5sq = ring_moment_integrand(5, ka, c) * ring_moment_integrand(5, kb, c);

        psi_acc.add(psi_assemble(n_tx, c, s2, cross, p3, p4, p2, p1sq, p5sq));
    }

    res.psi = psi_acc.ci95();
    res.xi_mean.resize(static_cast<std::size_t>(U));
    for (int u = 0; u < U; ++u) res.xi_mean[static_cast<std::size_t>(u)] = xi_acc[static_cast<std::size_t>(u)].mean();

    const double lo_psi = std::max(res.psi.mean - res.psi.ci_half, 0.0);
    const double hi_psi = res.psi.mean + res.psi.ci_half;
    res.mean = closed_form_sinrs(power_common, power_private, res.probe.kappas, res.psi.mean);
    res.lo = closed_form_sinrs(power_common, power_private, res.probe.kappas, lo_psi);
    res.hi = closed_form_sinrs(power_common, power_private, res.probe.kappas, hi_psi);
    return res;
}

}  // namespace rsma
