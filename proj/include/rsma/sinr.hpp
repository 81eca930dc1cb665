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

#ifndef RSMA_SINR_HPP
#define RSMA_SINR_HPP

#include <span>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/config.hpp"
#include "rsma/numerics.hpp"
#include "rsma/rng.hpp"

namespace rsma {

// Per-user scalar SINRs. The receive antennas of a user see identical
// statistics, so downstream short-packet math replicates these per antenna.
struct SinrProfile {
    std::vector<double> common;         // decoding the shared stream
    std::vector<double> priv;           // private stream after cancellation
    std::vector<double> priv_fallback;  // private stream when cancellation failed
    double psi = 0.0;
};

// Aggregate precoding/estimation gain factor. Assembled from the five ring
// expectations; exposed with explicit slot values so the closed form and the
// Monte Carlo estimator share one assembly.
double psi_assemble(int n_tx, double np_rho_p, double sum_xi_sq, double sum_xi_cross, double pi3,
                    double pi4, double pi2, double pi1_sq_slot, double pi5_sq_slot,
                    double fading_moment2 = 1.0);

// Closed-form gain factor with branch-approximated ring expectations; the
// regime is auto-selected from the median pilot gain across the user set.
double psi_value(const SystemConfig& cfg, int n_tx, double n_pilot, double pilot_power,
                 std::span<const double> xi, std::span<const double> kappas);

// Exact forms: the "+1" noise floor is always retained.
SinrProfile closed_form_sinrs(double power_common, std::span<const double> power_private,
                              std::span<const double> kappas, double psi);

// Interference-saturated power-ratio approximations (documented mode; the
// allocator's surrogate constraints mirror these).
SinrProfile ratio_sinrs(double power_common, std::span<const double> power_private);

struct SinrOracleResult {
    num::MeanCi psi;               // gain factor estimated from the defining expectations
    std::vector<double> xi_mean;   // average combining weights over the draws
    SinrProfile mean, lo, hi;      // profile at the probe geometry, 95% band
    UserGeometry probe;
};

// Monte Carlo of the defining gain expectations: every trial draws fresh
// user positions, fading and pilot noise, builds the real ZF/matched
// precoders to obtain the combining weights, and samples the five ring
// functionals at independent positions (pair products for the squared
// slots, which keeps them unbiased). Returns the gain with a 95% CI and the
// implied SINR band at the probe geometry. Independent of the closed-form
// branch approximations and of the nominal weight fixed point.
SinrOracleResult sinr_oracle(const SystemConfig& cfg, int n_tx, double power_common,
                             std::span<const double> power_private, int trials, Rng& rng);

}  // namespace rsma

#endif
