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

#ifndef RSMA_FBL_HPP
#define RSMA_FBL_HPP

#include <span>
#include <vector>

// Finite-blocklength coding kernel: Gaussian tail functions, channel
// dispersion, the short-packet rate/error tradeoff and its derivative
// structure. Blocklengths are real-valued here; rounding to channel uses is
// the allocation layer's business.

namespace rsma::fbl {

// Per-receive-antenna linear SINRs.
using SinrVector = std::vector<double>;

SinrVector uniform_sinrs(double gamma, int n_rx);

// P[N(0,1) > x]. Underflows to 0 for x beyond ~39.
double q_tail(double x);

// Inverse of q_tail on (0,1). Rational seed polished by safeguarded Newton
// to ~1e-13 relative; throws std::domain_error outside (0,1).
double q_tail_inv(double p);

// Channel dispersion 1 - (1+gamma)^-2, in [0,1).
double dispersion(double gamma);

// Normalized decoding margin: ln2 * (sum_j log2(1+g_j) - rate) divided by
// sum_j sqrt(V(g_j)/n_data). Throws std::domain_error when every SINR is
// zero (the dispersion sum vanishes).
double g_metric(double n_data, std::span<const double> sinrs, double rate);

// Decoding error probability Q(g_metric(...)).
double dep(double n_data, std::span<const double> sinrs, double rate);

// Maximum short-packet rate at target error eps. May be negative for tiny
// blocklengths; callers clamp where a floor is wanted.
double achievable_rate(double n_data, std::span<const double> sinrs, double eps);

}  // namespace rsma::fbl

#endif
