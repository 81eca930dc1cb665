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

#include "rsma/channel.hpp"

#include <algorithm>
#include <cmath>

#include "rsma/numerics.hpp"

namespace rsma {

namespace {

arma::cx_rowvec random_cn_row(int n, Rng& rng) {
    arma::cx_rowvec v(static_cast<arma::uword>(n));
    for (int i = 0; i < n; ++i) v(static_cast<arma::uword>(i)) = randcn(rng);
    return v;
}

}  // namespace

arma::cx_mat ChannelRealization::true_gains(int u) const {
    arma::cx_mat m(static_cast<arma::uword>(n_rx), true_rows[static_cast<std::size_t>(u)].n_cols);
    m.each_row() = true_rows[static_cast<std::size_t>(u)];
    return m;
}

arma::cx_mat ChannelRealization::est_gains(int u) const {
    arma::cx_mat m(static_cast<arma::uword>(n_rx), est_rows[static_cast<std::size_t>(u)].n_cols);
    m.each_row() = est_rows[static_cast<std::size_t>(u)];
    return m;
}

UserGeometry sample_geometry(const SystemConfig& cfg, Rng& rng) {
    UserGeometry g;
    const double r2_in = cfg.ring_inner_m * cfg.ring_inner_m;
    const double r2_out = cfg.ring_outer_m * cfg.ring_outer_m;
    g.distances.resize(static_cast<std::size_t>(cfg.num_users));
    g.kappas.resize(static_cast<std::size_t>(cfg.num_users));
    for (int u = 0; u < cfg.num_users; ++u) {
        const double t = rand_uniform(rng);
        const double r = std::sqrt(r2_in + t * (r2_out - r2_in));
        g.distances[static_cast<std::size_t>(u)] = r;
        g.kappas[static_cast<std::size_t>(u)] = cfg.kappa_at(r);
    }
    return g;
}

double ceq(double kappa, double n_pilot, double pilot_power) {
    const double c = n_pilot * pilot_power;
    return std::sqrt(c) * kappa / (1.0 + c * kappa);
}

ChannelDraw sample_channel_draw(int num_users, int n_max, Rng& rng) {
    ChannelDraw d;
    d.fading.reserve(static_cast<std::size_t>(num_users));
    d.noise.reserve(static_cast<std::size_t>(num_users));
    for (int u = 0; u < num_users; ++u) {
        d.fading.push_back(random_cn_row(n_max, rng));
        d.noise.push_back(random_cn_row(n_max, rng));
    }
    return d;
}

ChannelRealization realize_channel(const UserGeometry& geom, const ChannelDraw& draw, int n_tx,
                                   int n_rx, int n_pilot, double pilot_power) {
    if (n_tx > draw.n_max()) throw std::invalid_argument("realize_channel: n_tx exceeds the draw");
    ChannelRealization r;
    r.n_rx = n_rx;
    r.pilot_len = n_pilot;
    r.pilot_power = pilot_power;
    const int U = geom.num_users();
    r.true_rows.resize(static_cast<std::size_t>(U));
    r.est_rows.resize(static_cast<std::size_t>(U));
    r.ceq.resize(static_cast<std::size_t>(U));
    const double c = static_cast<double>(n_pilot) * pilot_power;
    for (int u = 0; u < U; ++u) {
        const auto su = static_cast<std::size_t>(u);
        const double k = geom.kappas[su];
        const double shrink = c * k / (1.0 + c * k);        // gain on the true row
        const double noise_gain = std::sqrt(c) * k / (1.0 + c * k);
        r.ceq[su] = noise_gain;
        const arma::cx_rowvec h = draw.fading[su].cols(0, static_cast<arma::uword>(n_tx - 1));
        const arma::cx_rowvec n = draw.noise[su].cols(0, static_cast<arma::uword>(n_tx - 1));
        r.true_rows[su] = std::sqrt(k) * h;
        r.est_rows[su] = shrink * r.true_rows[su] + noise_gain * n;
    }
    return r;
}

ChannelRealization pilot_train(const UserGeometry& geom, int n_tx, int n_rx, int n_pilot,
                               double pilot_power, Rng& rng) {
    if (n_pilot <= n_rx)
        throw std::invalid_argument("pilot_train: pilot length must exceed rx_antennas");
    const ChannelDraw d = sample_channel_draw(geom.num_users(), n_tx, rng);
    return realize_channel(geom, d, n_tx, n_rx, n_pilot, pilot_power);
}

double theta_closed_form(int n_tx, int n_rx, double np_rho_p) {
    return std::sqrt(static_cast<double>(n_tx - n_rx) * np_rho_p /
                     (static_cast<double>(n_rx) * (np_rho_p + 1.0)));
}

double theta_normalization_mc(int n_tx, int n_rx, double np_rho_p, int draws, Rng& rng) {
    // Normalized per-antenna estimate entries carry variance c/(1+c).
    const double sigma = std::sqrt(np_rho_p / (1.0 + np_rho_p));
    num::RunningStat acc;
    arma::cx_mat Z(static_cast<arma::uword>(n_tx), static_cast<arma::uword>(n_rx));
    for (int d = 0; d < draws; ++d) {
        for (arma::uword j = 0; j < Z.n_cols; ++j)
            for (arma::uword i = 0; i < Z.n_rows; ++i) Z(i, j) = sigma * randcn(rng);
        const arma::cx_mat G = Z.st() * arma::conj(Z);
        acc.add(std::real(arma::trace(arma::inv(G))));
    }
    return acc.mean();
}

PrecoderSet build_precoders(const ChannelRealization& real, const UserGeometry& geom,
                            double power_common, std::span<const double> power_private, int n_tx,
                            ZfChannelModel model, Rng* rng) {
    const int U = real.num_users();
    if (n_tx <= U * real.n_rx)
        throw std::invalid_argument("build_precoders: n_tx must exceed num_users * rx_antennas");

    arma::cx_mat Z(static_cast<arma::uword>(n_tx), static_cast<arma::uword>(U));
    if (model == ZfChannelModel::estimated) {
        for (int u = 0; u < U; ++u) Z.col(static_cast<arma::uword>(u)) = real.est_rows[static_cast<std::size_t>(u)].st();
    } else {
        if (rng == nullptr)
            throw std::invalid_argument("build_precoders: random model needs an rng");
        for (arma::uword j = 0; j < Z.n_cols; ++j)
            for (arma::uword i = 0; i < Z.n_rows; ++i) Z(i, j) = randcn(*rng);
    }

    const arma::cx_mat G = Z.st() * arma::conj(Z);
    arma::cx_mat Ginv;
    if (!arma::inv(Ginv, G) || !Ginv.is_finite() || arma::rcond(G) < 1e-12)
        throw DegenerateChannelError("build_precoders: singular user Gram matrix");

    PrecoderSet p;
    p.priv = std::sqrt(static_cast<double>(n_tx - real.n_rx)) * arma::conj(Z) * Ginv;
    const double np_rho_p = static_cast<double>(real.pilot_len) * real.pilot_power;
    p.theta = theta_closed_form(n_tx, real.n_rx, np_rho_p);

    // Per-user private-interference denominators at the supplied powers.
    std::vector<double> den(static_cast<std::size_t>(U), 1.0);
    for (int u = 0; u < U; ++u) {
        double s = 1.0;
        for (int k = 0; k < U; ++k) {
            const std::complex<double> g = arma::as_scalar(
                real.true_rows[static_cast<std::size_t>(u)] * p.priv.col(static_cast<arma::uword>(k)));
            s += power_private[static_cast<std::size_t>(k)] * std::norm(g);
        }
        den[static_cast<std::size_t>(u)] = s;
    }

    p.pi.resize(static_cast<std::size_t>(U));
    p.xi.resize(static_cast<std::size_t>(U));
    double inv_sum = 0.0;
    std::vector<double> sfac(static_cast<std::size_t>(U));
    for (int u = 0; u < U; ++u) {
        const auto su = static_cast<std::size_t>(u);
        p.pi[su] = power_common / den[su];
        const double w = real.ceq[su];
        sfac[su] = (1.0 - w * w) / den[su];
        inv_sum += 1.0 / sfac[su];
    }
    for (int u = 0; u < U; ++u) {
        const auto su = static_cast<std::size_t>(u);
        p.xi[su] = 1.0 / std::sqrt(static_cast<double>(n_tx) * sfac[su] * inv_sum);
    }

    p.common = arma::cx_vec(static_cast<arma::uword>(n_tx), arma::fill::zeros);
    for (int u = 0; u < U; ++u)
        p.common += p.xi[static_cast<std::size_t>(u)] * real.est_rows[static_cast<std::size_t>(u)].t();

    (void)geom;
    return p;
}

// ---- ring expectations -----------------------------------------------------

Regime auto_regime(double np_rho_p, std::span<const double> kappas) {
    std::vector<double> x(kappas.begin(), kappas.end());
    std::sort(x.begin(), x.end());
    const double med = x.empty() ? 0.0 : x[x.size() / 2] * np_rho_p;
    if (med >= 100.0) return Regime::large;
    if (med <= 0.01) return Regime::small;
    return Regime::unity;
}

double ring_moment_integrand(int which, double kappa, double np_rho_p) {
    const double d = 1.0 + np_rho_p * kappa;
    switch (which) {
        case 1: return kappa * kappa / (d * d);
        case 2: return kappa / d;
        case 3: return kappa * kappa * kappa / (d * d);
        case 4: return kappa * kappa * kappa * kappa / (d * d);
        case 5: return kappa * kappa / d;
        default: throw std::invalid_argument("ring_moment_integrand: index must be 1..5");
    }
}

double ring_moment(int which, const SystemConfig& cfg, double n_pilot, double pilot_power,
                 Regime regime) {
    const double a = cfg.pathloss_scale();
    const double c = n_pilot * pilot_power;
    const double h2 = cfg.bs_height_m * cfg.bs_height_m;
    const double r2i = cfg.ring_inner_m * cfg.ring_inner_m;
    const double r2o = cfg.ring_outer_m * cfg.ring_outer_m;
    const double dr2 = r2o - r2i;

    if (dr2 <= 1e-12 * r2o)  // degenerate ring: point mass
        return ring_moment_integrand(which, cfg.kappa_at(cfg.ring_inner_m), c);

    // Substitution variable bounds (height kept; exact for the first two).
    const double x_min = a / (r2o + h2 + a * c);
    const double x_max = a / (r2i + h2 + a * c);

    switch (which) {
        case 1: return a * (x_max - x_min) / dr2;
        case 2: return a * std::log(x_max / x_min) / dr2;
        case 3:
            switch (regime) {
                case Regime::large: return 2.0 * a * std::log(cfg.ring_outer_m / cfg.ring_inner_m) / (c * c * dr2);
                case Regime::small: return a * a * a * (r2o + r2i) / (2.0 * r2i * r2i * r2o * r2o);
                case Regime::unity: return a * a * a * (r2o + r2i) / (8.0 * r2i * r2i * r2o * r2o);
            }
            break;
        case 4:
            switch (regime) {
                case Regime::large: return a * a / (c * c * r2i * r2o);
                case Regime::small:
                    return a * a * a * a / (3.0 * dr2) *
                           (1.0 / (r2i * r2i * r2i) - 1.0 / (r2o * r2o * r2o));
                case Regime::unity:
                    return a * a * a * a / (12.0 * dr2) *
                           (1.0 / (r2i * r2i * r2i) - 1.0 / (r2o * r2o * r2o));
            }
            break;
        case 5:
            switch (regime) {
                case Regime::large: return 2.0 * a * std::log(cfg.ring_outer_m / cfg.ring_inner_m) / (c * dr2);
                case Regime::small: return a * a / (r2i * r2o);
                case Regime::unity: return a * a / (2.0 * r2i * r2o);
            }
            break;
        default: throw std::invalid_argument("ring_moment: index must be 1..5");
    }
    throw std::invalid_argument("ring_moment: bad regime");
}

double ring_moment_oracle(int which, const SystemConfig& cfg, double n_pilot, double pilot_power) {
    const double c = n_pilot * pilot_power;
    const double r_in = cfg.ring_inner_m, r_out = cfg.ring_outer_m;
    const double dr2 = r_out * r_out - r_in * r_in;
    if (dr2 <= 1e-12 * r_out * r_out)
        return ring_moment_integrand(which, cfg.kappa_at(r_in), c);
    const auto f = [&](double r) {
        return ring_moment_integrand(which, cfg.kappa_at(r), c) * 2.0 * r / dr2;
    };
    // Coarse pass for a magnitude estimate, then adaptive refinement.
    double coarse = 0.0;
    const int n0 = 128;
    const double h = (r_out - r_in) / n0;
    for (int i = 0; i < n0; ++i) {
        const double x0 = r_in + i * h;
        coarse += h / 6.0 * (f(x0) + 4.0 * f(x0 + 0.5 * h) + f(x0 + h));
    }
    const double tol = 1e-9 * std::max(std::abs(coarse), 1e-300);
    return num::adaptive_simpson(f, r_in, r_out, tol);
}

}  // namespace rsma
