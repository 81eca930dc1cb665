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

#include "rsma/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

namespace rsma {

namespace {

constexpr double kFourPi = 4.0 * M_PI;

double dbm_to_normalized(double dbm, double noise_dbm) {
    return std::pow(10.0, (dbm - noise_dbm) / 10.0);
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

}  // namespace

double SystemConfig::pathloss_scale() const {
    const double w = wavelength_m / kFourPi;
    return w * w;
}

double SystemConfig::kappa_at(double distance_m) const {
    const double d2 = distance_m * distance_m + bs_height_m * bs_height_m;
    return pathloss_scale() / d2;
}

SystemConfig SystemConfig::from_text(const std::string& text) {
    SystemConfig cfg;
    bool total_cus_given = false;
    bool wavelength_given = false;
    bool carrier_given = false;

    std::map<std::string, double> dbm_pending;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        // accept "key value" and "key = value"
        std::string key, value;
        const auto eq = line.find('=');
        if (eq != std::string::npos) {
            key = trim(line.substr(0, eq));
            value = trim(line.substr(eq + 1));
        } else {
            const auto sp = line.find_first_of(" \t");
            if (sp == std::string::npos)
                throw ConfigError("config line " + std::to_string(lineno) + ": missing value");
            key = trim(line.substr(0, sp));
            value = trim(line.substr(sp + 1));
        }
        double num = 0.0;
        try {
            std::size_t pos = 0;
            num = std::stod(value, &pos);
            if (pos != value.size()) throw std::invalid_argument(value);
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(lineno) + ": bad number '" + value +
                              "'");
        }

        if (key == "bandwidth_hz") cfg.bandwidth_hz = num;
        else if (key == "carrier_hz") { cfg.carrier_hz = num; carrier_given = true; }
        else if (key == "wavelength_m") { cfg.wavelength_m = num; wavelength_given = true; }
        else if (key == "noise_dbm") cfg.noise_dbm = num;
        else if (key == "latency_bound_s") cfg.latency_bound_s = num;
        else if (key == "dep_bound") cfg.dep_bound = num;
        else if (key == "ring_inner_m") cfg.ring_inner_m = num;
        else if (key == "ring_outer_m") cfg.ring_outer_m = num;
        else if (key == "bs_height_m") cfg.bs_height_m = num;
        else if (key == "total_power") cfg.total_power = num;
        else if (key == "pilot_power") cfg.pilot_power = num;
        else if (key == "total_power_dbm") dbm_pending["total_power"] = num;
        else if (key == "pilot_power_dbm") dbm_pending["pilot_power"] = num;
        else if (key == "num_users") cfg.num_users = static_cast<int>(num);
        else if (key == "rx_antennas") cfg.rx_antennas = static_cast<int>(num);
        else if (key == "total_cus") { cfg.total_cus = static_cast<int>(num); total_cus_given = true; }
        else if (key == "min_rate") cfg.min_rate = num;
        else if (key == "sca_tol") cfg.sca_tol = num;
        else if (key == "jprt_tol") cfg.jprt_tol = num;
        else if (key == "max_iters") cfg.max_iters = static_cast<int>(num);
        else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(num);
        else throw ConfigError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
    }

    // dBm inputs convert once at ingestion; everything downstream is linear
    // and noise-normalized.
    if (dbm_pending.count("total_power"))
        cfg.total_power = dbm_to_normalized(dbm_pending["total_power"], cfg.noise_dbm);
    if (dbm_pending.count("pilot_power"))
        cfg.pilot_power = dbm_to_normalized(dbm_pending["pilot_power"], cfg.noise_dbm);

    if (carrier_given && !wavelength_given) cfg.wavelength_m = 299792458.0 / cfg.carrier_hz;

    if (!total_cus_given) cfg.derive_total_cus();

    const auto errs = cfg.check();
    if (!errs.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errs) msg += "\n  " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

SystemConfig SystemConfig::from_file(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw ConfigError("cannot open config file '" + path + "'");
    std::stringstream ss;
    ss << f.rdbuf();
    return from_text(ss.str());
}

std::vector<std::string> SystemConfig::check() const {
    std::vector<std::string> errs;
    if (!(ring_inner_m > 0.0 && ring_inner_m < ring_outer_m))
        errs.push_back("ring radii must satisfy 0 < ring_inner_m < ring_outer_m");
    if (!(dep_bound > 0.0 && dep_bound < 0.5))
        errs.push_back("dep_bound must lie in (0, 0.5)");
    if (!(latency_bound_s > 0.0)) errs.push_back("latency_bound_s must be positive");
    if (num_users < 1) errs.push_back("num_users must be >= 1");
    if (rx_antennas < 1) errs.push_back("rx_antennas must be >= 1");
    if (!(total_power > 0.0)) errs.push_back("total_power must be positive");
    if (!(pilot_power > 0.0)) errs.push_back("pilot_power must be positive");
    if (!(wavelength_m > 0.0)) errs.push_back("wavelength_m must be positive");
    if (!(min_rate >= 0.0)) errs.push_back("min_rate must be nonnegative");
    const int derived = static_cast<int>(latency_bound_s * bandwidth_hz + 0.5);
    if (total_cus != derived)
        errs.push_back("total_cus must equal round(latency_bound_s * bandwidth_hz) = " +
                       std::to_string(derived));
    return errs;
}

std::vector<std::string> SystemConfig::warnings() const {
    std::vector<std::string> w;
    if (bs_height_m > ring_inner_m / 10.0)
        w.push_back("bs_height_m exceeds ring_inner_m/10; the flat-cell geometry "
                    "approximations degrade");
    return w;
}

double ResourceAllocation::power_sum() const {
    return power_common + std::accumulate(power_private.begin(), power_private.end(), 0.0);
}

std::vector<Violation> validate(const SystemConfig& cfg, const ResourceAllocation& a) {
    std::vector<Violation> v;
    const double ptol = 1e-9 * std::max(1.0, cfg.total_power);
    const double rtol = 1e-9 * std::max(1.0, a.rate_common_total);

    if (a.n_tx > a.n_pilot + a.n_data)
        v.push_back({"antenna-floor", static_cast<double>(a.n_tx - a.n_pilot - a.n_data), -1});
    if (a.n_pilot + a.n_data > cfg.total_cus)
        v.push_back({"cu-budget", static_cast<double>(a.n_pilot + a.n_data - cfg.total_cus), -1});
    if (a.n_pilot < a.n_tx)
        v.push_back({"pilot-floor", static_cast<double>(a.n_tx - a.n_pilot), -1});

    const double psum = a.power_sum();
    if (psum > cfg.total_power + ptol) v.push_back({"power-budget", psum - cfg.total_power, -1});
    if (a.power_common < 0.0) v.push_back({"power-nonneg", -a.power_common, -1});
    for (std::size_t u = 0; u < a.power_private.size(); ++u)
        if (a.power_private[u] < 0.0)
            v.push_back({"power-nonneg", -a.power_private[u], static_cast<int>(u)});

    double csum = 0.0;
    for (std::size_t u = 0; u < a.rate_common_user.size(); ++u) {
        csum += a.rate_common_user[u];
        if (a.rate_common_user[u] < 0.0)
            v.push_back({"rate-nonneg", -a.rate_common_user[u], static_cast<int>(u)});
    }
    for (std::size_t u = 0; u < a.rate_private.size(); ++u)
        if (a.rate_private[u] < 0.0)
            v.push_back({"rate-nonneg", -a.rate_private[u], static_cast<int>(u)});
    if (a.rate_common_total < 0.0) v.push_back({"rate-nonneg", -a.rate_common_total, -1});
    if (std::abs(csum - a.rate_common_total) > rtol)
        v.push_back({"common-rate-sum", std::abs(csum - a.rate_common_total), -1});

    return v;
}

std::string violations_to_string(const std::vector<Violation>& v) {
    std::string s;
    for (const auto& x : v) {
        s += x.constraint;
        if (x.user >= 0) s += "[u" + std::to_string(x.user) + "]";
        s += " residual=" + std::to_string(x.residual) + "; ";
    }
    return s;
}

}  // namespace rsma
