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

#ifndef RSMA_OPTIMIZER_HPP
#define RSMA_OPTIMIZER_HPP

#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "rsma/channel.hpp"
#include "rsma/config.hpp"
#include "rsma/sinr.hpp"

namespace rsma {

enum class OptStatus { converged, max_iters, infeasible };

struct OptTraceEntry {
    int iteration = 0;
    std::string stage;  // "power" | "rates" | "antenna"
    int n_tx = 0;
    double objective = 0.0;
    std::vector<double> powers;  // [common, private...]
    std::vector<double> rates;   // [common_total, common_user..., private...]
};

struct OptTrace {
    std::vector<OptTraceEntry> entries;
    OptStatus status = OptStatus::converged;
    std::string note;
};

// Auxiliary record of one accepted SCA iterate, stored at the binding
// levels implied by the iterate's powers (the relaxation chain is tight at
// acceptance).
struct ScaState {
    std::vector<double> A, B;  // decoding-margin auxiliaries (common/private)
    std::vector<double> C, D;  // SINR auxiliaries
    std::vector<double> E, F;  // interference-sum auxiliaries
    std::vector<double> powers;
    int iteration = 0;
};

// ---- scoring ---------------------------------------------------------------

// Effective-throughput accounting. Default mode scores each private stream
// with its post-cancellation error only; exact_mode also folds in the
// fallback branch where the shared stream was missed.
EtrReport etr_total(const SystemConfig& cfg, const ResourceAllocation& alloc,
                    const SinrProfile& sinrs, bool exact_mode = false);

// ---- generic SCA power step ------------------------------------------------

// One decoded stream inside the power subproblem: the SINR is
// rho[power_index] / (sum of rho over `interference` + inv_floor).
struct StreamSpec {
    int power_index = 0;
    std::vector<int> interference;
    double inv_floor = 0.0;
    double rate = 0.0;    // fixed transmission rate during the power step
    double weight = 0.0;  // contribution weight in the objective
};

struct PowerProblem {
    int n_powers = 0;
    double budget = 0.0;
    double n_data = 0.0;
    int n_rx = 1;
    double a_min = 0.0;  // decoding-margin floor enforcing the error target
    std::vector<StreamSpec> streams;
};

struct ScaResult {
    bool feasible = false;
    std::vector<double> powers;
    std::vector<ScaState> iterations;
    double objective = -std::numeric_limits<double>::infinity();
    std::string note;
};

// Successive convex approximation around the product constraints, each inner
// problem solved by a primal log-barrier Newton method. init_powers must
// keep every stream's error constraint satisfiable at the given rates.
ScaResult solve_power_sca_generic(const PowerProblem& prob, std::span<const double> init_powers,
                                  double sca_tol, int max_iters);

struct RsmaRates {
    double common_total = 0.0;
    std::vector<double> common_user;
    std::vector<double> priv;
};

// RSMA-facing power step at fixed rates and fixed gain factor.
ScaResult solve_power_sca(const SystemConfig& cfg, const RsmaRates& rates, int n_tx,
                          std::span<const double> kappas, double psi, bool common_enabled,
                          std::span<const double> init_powers);

// ---- rate splitting ---------------------------------------------------------

// Decoding-margin function of a scalar SINR at fixed rate, with derivatives
// (used by the barrier and exposed for the concavity property tests).
struct PhiEval {
    double val = 0.0, d1 = 0.0, d2 = 0.0;
};
PhiEval phi_margin(double gamma, double rate, double n_data, int n_rx);

std::vector<double> rate_cap_private(const SystemConfig& cfg, const SinrProfile& sinrs,
                                     double n_data, double eps);

// Per-user maximizer of rate * (1 - error(rate)) on (0, cap].
std::vector<double> solve_private_rates(const SystemConfig& cfg, const SinrProfile& sinrs,
                                        double n_data, double eps);

struct CommonRateSolution {
    double total = 0.0;
    double cap = 0.0;
    double floor_sum = 0.0;  // sum of per-user top-up needs
    bool floor_feasible = true;
};
CommonRateSolution solve_common_total(const SystemConfig& cfg, const SinrProfile& sinrs,
                                      std::span<const double> private_rates, double n_data,
                                      double eps);

struct FloorInfeasibleError : std::runtime_error {
    double deficit;
    explicit FloorInfeasibleError(double d)
        : std::runtime_error("rate floors infeasible, deficit " + std::to_string(d)), deficit(d) {}
};

// Shares of the total shared-stream rate: every user gets its floor top-up,
// the best-channel user (ties: lowest index) absorbs the surplus.
std::vector<double> allocate_common_rates(const SystemConfig& cfg, double rate_common_total,
                                          const SinrProfile& sinrs,
                                          std::span<const double> private_rates);

// ---- antenna search and the joint loop --------------------------------------

struct AntennaSearchResult {
    int n_tx = 0;
    double objective = -std::numeric_limits<double>::infinity();
    std::vector<std::pair<int, double>> evaluations;  // in evaluation order
    bool used_fallback = false;
};

// Unimodal integer search over [lo, hi] with memoized evaluations; falls
// back to a coarse-then-fine ladder scan when a three-point test detects
// non-unimodality, and certifies a local peak before returning.
AntennaSearchResult select_antennas(int lo, int hi, const std::function<double(int)>& objective);

enum class AllocMode { rsma, sdma };

struct AlternationResult {
    bool feasible = false;
    double objective = -std::numeric_limits<double>::infinity();
    ResourceAllocation alloc;
    SinrProfile sinrs;
    OptTrace trace;
    std::vector<ScaState> sca_states;  // accepted iterates of the last power step
};

// Alternating power / rate-splitting optimization at a fixed antenna count.
AlternationResult optimize_at_antennas(const SystemConfig& cfg, const UserGeometry& geom,
                                       const ChannelDraw& draw, int n_tx, AllocMode mode,
                                       const AlternationResult* warm = nullptr);

struct JprtResult {
    OptStatus status = OptStatus::infeasible;
    double objective = -std::numeric_limits<double>::infinity();
    ResourceAllocation alloc;
    EtrReport report;
    SinrProfile sinrs;
    OptTrace trace;
    UserGeometry geometry;
    AntennaSearchResult antenna_search;
};

// Full joint loop on a given scenario draw. n_tx_pin > 0 skips the search
// and evaluates that antenna count alone.
JprtResult jprt_on(const SystemConfig& cfg, const UserGeometry& geom, const ChannelDraw& draw,
                   AllocMode mode = AllocMode::rsma, int n_tx_pin = 0);

// Samples the scenario from the config seed, then runs the joint loop.
JprtResult jprt(const SystemConfig& cfg, AllocMode mode = AllocMode::rsma);

}  // namespace rsma

#endif
