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

#ifndef RSMA_CHANNEL_HPP
#define RSMA_CHANNEL_HPP

#include <armadillo>
#include <span>
#include <vector>

#include "rsma/config.hpp"
#include "rsma/rng.hpp"

namespace rsma {

struct DegenerateChannelError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct UserGeometry {
    std::vector<double> distances;  // meters from the BS, ring-uniform
    std::vector<double> kappas;     // large-scale gains including BS height
    int num_users() const { return static_cast<int>(distances.size()); }
};

// One uplink training round. The receive antennas of a terminal are
// co-located, so all rows of a user's gain matrix share one channel row;
// the realization stores that row and expands on demand.
struct ChannelRealization {
    std::vector<arma::cx_rowvec> true_rows;  // g_u, length n_tx
    std::vector<arma::cx_rowvec> est_rows;   // estimated rows
    std::vector<double> ceq;                 // estimation-quality factor per user
    int n_rx = 0;
    int pilot_len = 0;
    double pilot_power = 0.0;

    int n_tx() const { return true_rows.empty() ? 0 : static_cast<int>(true_rows[0].n_cols); }
    int num_users() const { return static_cast<int>(true_rows.size()); }
    arma::cx_mat true_gains(int u) const;  // [n_rx x n_tx]
    arma::cx_mat est_gains(int u) const;
};

// Unit-variance fading and de-spread-noise rows of maximal length; a JPRT
// run draws these once and slices the first n_tx entries per antenna probe,
// so the objective varies smoothly with the antenna count.
struct ChannelDraw {
    std::vector<arma::cx_rowvec> fading;
    std::vector<arma::cx_rowvec> noise;
    int n_max() const { return fading.empty() ? 0 : static_cast<int>(fading[0].n_cols); }
};

struct PrecoderSet {
    arma::cx_vec common;  // [n_tx]
    arma::cx_mat priv;    // [n_tx x U]
    double theta = 0.0;   // power-normalization constant, closed form
    std::vector<double> xi;
    std::vector<double> pi;
    double fading_moment2 = 1.0;  // second moment of the small-scale amplitude
};

enum class ZfChannelModel {
    estimated,  // ZF on the stacked estimated per-user rows (default behavior)
    random      // statistically equivalent i.i.d. Gaussian columns
};

// Ring-uniform user positions, p(r) = 2r / (R_out^2 - R_in^2).
UserGeometry sample_geometry(const SystemConfig& cfg, Rng& rng);

// Estimation-quality factor sqrt(Np*rho_p)*kappa / (1 + Np*rho_p*kappa).
double ceq(double kappa, double n_pilot, double pilot_power);

ChannelDraw sample_channel_draw(int num_users, int n_max, Rng& rng);

// Slice a draw at n_tx antennas and apply the linear-MMSE pilot estimate.
ChannelRealization realize_channel(const UserGeometry& geom, const ChannelDraw& draw, int n_tx,
                                   int n_rx, int n_pilot, double pilot_power);

// Fresh draw + estimate in one call. Requires n_pilot > n_rx.
ChannelRealization pilot_train(const UserGeometry& geom, int n_tx, int n_rx, int n_pilot,
                               double pilot_power, Rng& rng);

double theta_closed_form(int n_tx, int n_rx, double np_rho_p);

// Monte Carlo of the expectation defining the normalization constant:
// samples the normalized-estimate ZF ensemble and averages Tr(W^H W).
// Returns the empirical mean (compare against 1/theta^2).
double theta_normalization_mc(int n_tx, int n_rx, double np_rho_p, int draws, Rng& rng);

// ZF private precoders plus the matched-combining common precoder. powers
// enter through the per-user interference denominators that weight the
// combining coefficients. Throws DegenerateChannelError on a singular Gram
// matrix. model=random draws the statistically equivalent Gaussian columns
// instead of the estimated rows (rng required in that case).
PrecoderSet build_precoders(const ChannelRealization& real, const UserGeometry& geom,
                            double power_common, std::span<const double> power_private, int n_tx,
                            ZfChannelModel model = ZfChannelModel::estimated, Rng* rng = nullptr);

// ---- Ring expectations of the large-scale-gain functionals ----------------

enum class Regime { large, small, unity };

// Auto-selection from the median pilot-SNR-times-gain over the user set.
Regime auto_regime(double np_rho_p, std::span<const double> kappas);

// Integrand of the which-th expectation (1..5) at a given kappa.
double ring_moment_integrand(int which, double kappa, double np_rho_p);

// Closed-form value of the which-th expectation. The first two are exact
// (BS height kept); 3..5 use the regime-branch approximations with the
// height dropped. Throws std::invalid_argument on a bad index.
double ring_moment(int which, const SystemConfig& cfg, double n_pilot, double pilot_power,
                 Regime regime);

// Adaptive numeric integration of the defining expectation over the ring
// density, relative error ~1e-8. The independent check of the closed forms.
double ring_moment_oracle(int which, const SystemConfig& cfg, double n_pilot, double pilot_power);

}  // namespace rsma

#endif
