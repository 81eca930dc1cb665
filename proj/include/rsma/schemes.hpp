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

#ifndef RSMA_SCHEMES_HPP
#define RSMA_SCHEMES_HPP

#include <optional>
#include <string>

#include "rsma/optimizer.hpp"

namespace rsma {

enum class SchemeKind { RSMA, NOMA, SDMA };

std::string to_string(SchemeKind k);
std::optional<SchemeKind> scheme_from_string(const std::string& s);

// Per-stage error probabilities of the ordered-cancellation baseline:
// entry (i, m) is receiver rank i decoding the message of rank m >= i.
struct NomaStageReport {
    std::vector<int> order;                       // user indices, best channel first
    std::vector<std::vector<double>> stage_dep;   // [rank][message rank]
    std::vector<double> chain_success;            // per rank
};

struct SchemeResult {
    SchemeKind scheme = SchemeKind::RSMA;
    JprtResult jprt;
    std::optional<NomaStageReport> noma_stages;
};

// Solve one scheme on a given scenario draw. n_tx_pin > 0 skips the antenna
// search and evaluates that count alone.
SchemeResult solve_scheme(const SystemConfig& cfg, SchemeKind kind, const UserGeometry& geom,
                          const ChannelDraw& draw, int n_tx_pin = 0);

// Convenience entry points sampling the scenario from the config seed.
SchemeResult solve_sdma(const SystemConfig& cfg);
SchemeResult solve_noma(const SystemConfig& cfg);
SchemeResult solve_rsma(const SystemConfig& cfg);

struct SchemeComparison {
    SchemeResult rsma, noma, sdma;
};

// All three schemes on one shared instance. The unrestricted scheme also
// probes the restricted scheme's antenna choice, so its objective dominates
// per instance.
SchemeComparison solve_all_schemes(const SystemConfig& cfg, const UserGeometry& geom,
                                   const ChannelDraw& draw);

}  // namespace rsma

#endif
