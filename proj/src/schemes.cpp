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

#include "rsma/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "rsma/fbl.hpp"
#include "rsma/numerics.hpp"

namespace rsma {

std::string to_string(SchemeKind k) {
    switch (k) {
        case SchemeKind::RSMA: return "rsma";
        case SchemeKind::NOMA: return "noma";
        case SchemeKind::SDMA: return "sdma";
    }
    return "?";
}

std::optional<SchemeKind> scheme_from_string(const std::string& s) {
    if (s == "rsma") return SchemeKind::RSMA;
    if (s == "noma") return SchemeKind::NOMA;
    if (s == "sdma") return SchemeKind::SDMA;
    return std::nullopt;
}

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double eps_target(const SystemConfig& cfg) { return cfg.dep_bound * (1.0 - 1e-4); }

struct NomaContext {
    const SystemConfig* cfg;
    std::vector<int> order;        // user index by descending large-scale gain
    std::vector<double> kappa;     // by rank
    double psi = 0.0;
    int n_tx = 0;
    double n_data = 0.0;
};

double noma_stage_sinr(const NomaContext& c, std::span<const double> rho, int rx_rank,
                       int msg_rank) {
    double interf = 0.0;
    for (int j = 0; j < msg_rank; ++j) interf += rho[static_cast<std::size_t>(j)];
    return rho[static_cast<std::size_t>(msg_rank)] /
           (interf + 1.0 / (c.kappa[static_cast<std::size_t>(rx_rank)] * c.psi));
}

constexpr double kGammaFloor = 1e-12;  // below this the dispersion underflows

double noma_stage_dep(const NomaContext& c, std::span<const double> rho,
                      std::span<const double> rates, int rx_rank, int msg_rank) {
    const double g = noma_stage_sinr(c, rho, rx_rank, msg_rank);
    if (g <= kGammaFloor) return rates[static_cast<std::size_t>(msg_rank)] > 0.0 ? 1.0 : 0.0;
    return fbl::dep(c.n_data, fbl::uniform_sinrs(g, c.cfg->rx_antennas),
                    rates[static_cast<std::size_t>(msg_rank)]);
}

// Total effective throughput with full cancellation-chain accounting.
double noma_objective(const NomaContext& c, std::span<const double> rho,
                      std::span<const double> rates) {
    const int U = c.cfg->num_users;
    double total = 0.0;
    for (int i = 0; i < U; ++i) {
        double chain = 1.0;
        for (int m = U - 1; m >= i; --m) chain *= 1.0 - noma_stage_dep(c, rho, rates, i, m);
        total += rates[static_cast<std::size_t>(i)] * chain;
    }
    return total;
}

std::vector<double> noma_caps(const NomaContext& c, std::span<const double> rho, double eps) {
    const int U = c.cfg->num_users;
    std::vector<double> caps(static_cast<std::size_t>(U), 0.0);
    for (int m = 0; m < U; ++m) {
        const double g = noma_stage_sinr(c, rho, m, m);
        if (g <= kGammaFloor) continue;
        caps[static_cast<std::size_t>(m)] = std::max(
            fbl::achievable_rate(c.n_data, fbl::uniform_sinrs(g, c.cfg->rx_antennas), eps), 0.0);
    }
    return caps;
}

struct NomaAlternation {
    bool feasible = false;
    double objective = kNegInf;
    std::vector<double> rho;    // by rank
    std::vector<double> rates;  // by rank
    OptTrace trace;
};

NomaAlternation noma_at_antennas(const SystemConfig& cfg, const UserGeometry& geom,
                                 const ChannelDraw& draw, int n_tx) {
    NomaAlternation out;
    const int U = cfg.num_users;
    const int n_data = cfg.total_cus - n_tx;
    if (n_tx <= U * cfg.rx_antennas || n_data < 2 || n_tx > draw.n_max()) {
        out.trace.status = OptStatus::infeasible;
        return out;
    }

    NomaContext ctx;
    ctx.cfg = &cfg;
    ctx.n_tx = n_tx;
    ctx.n_data = static_cast<double>(n_data);
    ctx.order.resize(static_cast<std::size_t>(U));
    std::iota(ctx.order.begin(), ctx.order.end(), 0);
    std::sort(ctx.order.begin(), ctx.order.end(), [&](int a, int b) {
        return geom.kappas[static_cast<std::size_t>(a)] > geom.kappas[static_cast<std::size_t>(b)];
    });
    ctx.kappa.resize(static_cast<std::size_t>(U));
    for (int r = 0; r < U; ++r)
        ctx.kappa[static_cast<std::size_t>(r)] = geom.kappas[static_cast<std::size_t>(ctx.order[static_cast<std::size_t>(r)])];

    // Everything rides the shared-codebook beam; combining weights then only
    // depend on the estimation quality.
    const ChannelRealization real =
        realize_channel(geom, draw, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power);
    const std::vector<double> zero_p(static_cast<std::size_t>(U), 0.0);
    const PrecoderSet pre = build_precoders(real, geom, cfg.total_power, zero_p, n_tx);
    ctx.psi = psi_value(cfg, n_tx, static_cast<double>(n_tx), cfg.pilot_power, pre.xi, geom.kappas);

    const double eps = eps_target(cfg);

    // Phase one over graded splits (weaker ranks take more power).
    double best_slack = kNegInf;
    std::vector<double> rho;
    for (double q : {1.0, 1.4, 1.8, 2.5, 3.5, 0.7}) {
        std::vector<double> cand(static_cast<std::size_t>(U));
        double norm = 0.0;
        for (int r = 0; r < U; ++r) norm += std::pow(q, r);
        for (int r = 0; r < U; ++r)
            cand[static_cast<std::size_t>(r)] =
                cfg.total_power * (1.0 - 1e-9) * std::pow(q, r) / norm;
        const auto caps = noma_caps(ctx, cand, eps);
        double slack = std::numeric_limits<double>::infinity();
        for (int r = 0; r < U; ++r)
            slack = std::min(slack, caps[static_cast<std::size_t>(r)] - cfg.min_rate);
        if (slack > best_slack) {
            best_slack = slack;
            rho = cand;
        }
    }
    if (best_slack < 0.0) {
        out.trace.status = OptStatus::infeasible;
        out.trace.note = "rate floors unreachable at this antenna count";
        return out;
    }

    // Rates stage helper: per-message payoff maximizer on (0, cap], then the
    // floor clamp (caps clear the floors by phase-one / power-step checks).
    const auto rates_for = [&](std::span<const double> r_rho,
                               std::vector<double>& rates) -> bool {
        const auto caps = noma_caps(ctx, r_rho, eps);
        rates.assign(static_cast<std::size_t>(U), 0.0);
        for (int m = 0; m < U; ++m) {
            const auto sm = static_cast<std::size_t>(m);
            if (caps[sm] + 1e-12 < cfg.min_rate) return false;
            const double g = noma_stage_sinr(ctx, r_rho, m, m);
            if (g <= kGammaFloor) return false;
            const auto payoff = [&](double r) {
                if (r <= 0.0) return 0.0;
                return r * (1.0 - fbl::dep(ctx.n_data, fbl::uniform_sinrs(g, cfg.rx_antennas), r));
            };
            double r = num::golden_max(payoff, 0.0, caps[sm], caps[sm] * 1e-11);
            rates[sm] = std::max(r, cfg.min_rate);
        }
        return true;
    };

    std::vector<double> rates;
    if (!rates_for(rho, rates)) {
        out.trace.status = OptStatus::infeasible;
        return out;
    }
    double objective = noma_objective(ctx, rho, rates);
    out.trace.entries.push_back({0, "rates", n_tx, objective, rho, rates});

    bool converged = false;
    for (int round = 1; round <= cfg.max_iters; ++round) {
        const double start = objective;

        // Power stage: same surrogate machinery over the cancellation stages.
        PowerProblem prob;
        prob.n_powers = U;
        prob.budget = cfg.total_power;
        prob.n_data = ctx.n_data;
        prob.n_rx = cfg.rx_antennas;
        prob.a_min = fbl::q_tail_inv(eps);
        for (int m = 0; m < U; ++m) {
            StreamSpec st;
            st.power_index = m;
            for (int j = 0; j < m; ++j) st.interference.push_back(j);
            st.inv_floor = 1.0 / (ctx.kappa[static_cast<std::size_t>(m)] * ctx.psi);
            st.rate = rates[static_cast<std::size_t>(m)];
            st.weight = rates[static_cast<std::size_t>(m)];
            prob.streams.push_back(std::move(st));
        }
        ScaResult sca = solve_power_sca_generic(prob, rho, cfg.sca_tol, 30);
        if (sca.feasible) {
            const double t_new = noma_objective(ctx, sca.powers, rates);
            if (t_new >= objective) {
                rho = sca.powers;
                objective = t_new;
            }
        }
        out.trace.entries.push_back({round, "power", n_tx, objective, rho, rates});

        std::vector<double> rates_new;
        if (rates_for(rho, rates_new)) {
            const double t_new = noma_objective(ctx, rho, rates_new);
            if (t_new >= objective - 1e-12 * std::max(1.0, std::abs(objective))) {
                rates = std::move(rates_new);
                objective = std::max(objective, t_new);
            }
        }
        out.trace.entries.push_back({round, "rates", n_tx, objective, rho, rates});

        if (objective - start < cfg.jprt_tol * std::max(1.0, std::abs(start))) {
            converged = true;
            break;
        }
    }

    out.feasible = true;
    out.objective = objective;
    out.rho = rho;
    out.rates = rates;
    out.trace.status = converged ? OptStatus::converged : OptStatus::max_iters;
    return out;
}

SchemeResult solve_noma_on(const SystemConfig& cfg, const UserGeometry& geom,
                           const ChannelDraw& draw, int n_tx_pin = 0) {
    SchemeResult res;
    res.scheme = SchemeKind::NOMA;
    JprtResult& jr = res.jprt;
    jr.geometry = geom;

    const int U = cfg.num_users;
    int lo = U * cfg.rx_antennas + 1;
    int hi = std::min(cfg.total_cus - 2, draw.n_max());
    if (n_tx_pin > 0) lo = hi = n_tx_pin;
    if (hi < lo) {
        jr.status = OptStatus::infeasible;
        return res;
    }

    std::map<int, NomaAlternation> cache;
    const auto evaluate = [&](int n) {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second.feasible ? it->second.objective : kNegInf;
        NomaAlternation r = noma_at_antennas(cfg, geom, draw, n);
        const double v = r.feasible ? r.objective : kNegInf;
        cache.emplace(n, std::move(r));
        return v;
    };
    jr.antenna_search = select_antennas(lo, hi, evaluate);
    const auto it = cache.find(jr.antenna_search.n_tx);
    if (it == cache.end() || !it->second.feasible) {
        jr.status = OptStatus::infeasible;
        jr.trace.status = OptStatus::infeasible;
        jr.trace.note = "no antenna count admits the rate floors";
        return res;
    }
    const NomaAlternation& best = it->second;

    // Rebuild context pieces for the report at the winning antenna count.
    NomaContext ctx;
    ctx.cfg = &cfg;
    ctx.n_tx = jr.antenna_search.n_tx;
    ctx.n_data = static_cast<double>(cfg.total_cus - ctx.n_tx);
    ctx.order.resize(static_cast<std::size_t>(U));
    std::iota(ctx.order.begin(), ctx.order.end(), 0);
    std::sort(ctx.order.begin(), ctx.order.end(), [&](int a, int b) {
        return geom.kappas[static_cast<std::size_t>(a)] > geom.kappas[static_cast<std::size_t>(b)];
    });
    ctx.kappa.resize(static_cast<std::size_t>(U));
    for (int r = 0; r < U; ++r)
        ctx.kappa[static_cast<std::size_t>(r)] = geom.kappas[static_cast<std::size_t>(ctx.order[static_cast<std::size_t>(r)])];
    const ChannelRealization real =
        realize_channel(geom, draw, ctx.n_tx, cfg.rx_antennas, ctx.n_tx, cfg.pilot_power);
    const std::vector<double> zero_p(static_cast<std::size_t>(U), 0.0);
    const PrecoderSet pre = build_precoders(real, geom, cfg.total_power, zero_p, ctx.n_tx);
    ctx.psi =
        psi_value(cfg, ctx.n_tx, static_cast<double>(ctx.n_tx), cfg.pilot_power, pre.xi, geom.kappas);

    NomaStageReport stages;
    stages.order = ctx.order;
    stages.stage_dep.assign(static_cast<std::size_t>(U), std::vector<double>());
    stages.chain_success.assign(static_cast<std::size_t>(U), 1.0);
    for (int i = 0; i < U; ++i) {
        auto& row = stages.stage_dep[static_cast<std::size_t>(i)];
        row.assign(static_cast<std::size_t>(U), 0.0);
        for (int m = i; m < U; ++m) {
            const double e = noma_stage_dep(ctx, best.rho, best.rates, i, m);
            row[static_cast<std::size_t>(m)] = e;
            stages.chain_success[static_cast<std::size_t>(i)] *= 1.0 - e;
        }
    }
    res.noma_stages = stages;

    // Map rank-ordered quantities back onto user indices.
    ResourceAllocation alloc;
    alloc.n_tx = ctx.n_tx;
    alloc.n_pilot = ctx.n_tx;
    alloc.n_data = cfg.total_cus - ctx.n_tx;
    alloc.power_common = 0.0;
    alloc.power_private.assign(static_cast<std::size_t>(U), 0.0);
    alloc.rate_common_total = 0.0;
    alloc.rate_common_user.assign(static_cast<std::size_t>(U), 0.0);
    alloc.rate_private.assign(static_cast<std::size_t>(U), 0.0);
    EtrReport report;
    report.dep_common.assign(static_cast<std::size_t>(U), 0.0);
    report.dep_private.assign(static_cast<std::size_t>(U), 0.0);
    report.etr_common.assign(static_cast<std::size_t>(U), 0.0);
    report.etr_private.assign(static_cast<std::size_t>(U), 0.0);
    report.slack_dep_common.assign(static_cast<std::size_t>(U), cfg.dep_bound);
    report.slack_dep_private.assign(static_cast<std::size_t>(U), 0.0);
    report.slack_rate_floor.assign(static_cast<std::size_t>(U), 0.0);
    report.total_etr = 0.0;
    for (int r = 0; r < U; ++r) {
        const auto sr = static_cast<std::size_t>(r);
        const auto user = static_cast<std::size_t>(ctx.order[sr]);
        alloc.power_private[user] = best.rho[sr];
        alloc.rate_private[user] = best.rates[sr];
        const double own_dep = stages.stage_dep[sr][sr];
        report.dep_private[user] = own_dep;
        report.slack_dep_private[user] = cfg.dep_bound - own_dep;
        report.etr_private[user] = best.rates[sr] * stages.chain_success[sr];
        report.slack_rate_floor[user] = best.rates[sr] - cfg.min_rate;
        report.total_etr += report.etr_private[user];
    }

    jr.status = best.trace.status;
    jr.objective = best.objective;
    jr.alloc = alloc;
    jr.report = report;
    jr.trace = best.trace;
    for (const auto& [n, f] : jr.antenna_search.evaluations)
        jr.trace.entries.push_back({0, "antenna", n, f, {}, {}});
    jr.sinrs.common.assign(static_cast<std::size_t>(U), 0.0);
    jr.sinrs.priv.assign(static_cast<std::size_t>(U), 0.0);
    jr.sinrs.priv_fallback.assign(static_cast<std::size_t>(U), 0.0);
    jr.sinrs.psi = ctx.psi;
    for (int r = 0; r < U; ++r) {
        const auto user = static_cast<std::size_t>(ctx.order[static_cast<std::size_t>(r)]);
        jr.sinrs.priv[user] = noma_stage_sinr(ctx, best.rho, r, r);
        jr.sinrs.priv_fallback[user] = jr.sinrs.priv[user];
    }
    return res;
}

}  // namespace

SchemeResult solve_scheme(const SystemConfig& cfg, SchemeKind kind, const UserGeometry& geom,
                          const ChannelDraw& draw, int n_tx_pin) {
    SchemeResult res;
    res.scheme = kind;
    switch (kind) {
        case SchemeKind::RSMA:
            res.jprt = jprt_on(cfg, geom, draw, AllocMode::rsma, n_tx_pin);
            break;
        case SchemeKind::SDMA:
            res.jprt = jprt_on(cfg, geom, draw, AllocMode::sdma, n_tx_pin);
            break;
        case SchemeKind::NOMA:
            return solve_noma_on(cfg, geom, draw, n_tx_pin);
    }
    return res;
}

namespace {

void scenario_from_seed(const SystemConfig& cfg, UserGeometry& geom, ChannelDraw& draw) {
    Rng geo_rng = make_stream(cfg.seed, 0xA110C);
    geom = sample_geometry(cfg, geo_rng);
    Rng ch_rng = make_stream(cfg.seed, 0xC4A7);
    draw = sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch_rng);
}

}  // namespace

SchemeResult solve_sdma(const SystemConfig& cfg) {
    UserGeometry g;
    ChannelDraw d;
    scenario_from_seed(cfg, g, d);
    return solve_scheme(cfg, SchemeKind::SDMA, g, d);
}

SchemeResult solve_noma(const SystemConfig& cfg) {
    UserGeometry g;
    ChannelDraw d;
    scenario_from_seed(cfg, g, d);
    return solve_scheme(cfg, SchemeKind::NOMA, g, d);
}

SchemeResult solve_rsma(const SystemConfig& cfg) {
    UserGeometry g;
    ChannelDraw d;
    scenario_from_seed(cfg, g, d);
    return solve_scheme(cfg, SchemeKind::RSMA, g, d);
}

SchemeComparison solve_all_schemes(const SystemConfig& cfg, const UserGeometry& geom,
                                   const ChannelDraw& draw) {
    SchemeComparison cmp;
    cmp.sdma = solve_scheme(cfg, SchemeKind::SDMA, geom, draw);
    cmp.noma = solve_scheme(cfg, SchemeKind::NOMA, geom, draw);
    cmp.rsma = solve_scheme(cfg, SchemeKind::RSMA, geom, draw);

    // The split scheme subsumes the private-only scheme; if the searches
    // landed on different antenna counts, re-probe at the restricted winner
    // so per-instance dominance is certified.
    if (cmp.sdma.jprt.status != OptStatus::infeasible &&
        cmp.rsma.jprt.objective < cmp.sdma.jprt.objective) {
        const int n = cmp.sdma.jprt.alloc.n_tx;
        AlternationResult base = optimize_at_antennas(cfg, geom, draw, n, AllocMode::sdma);
        AlternationResult lifted =
            base.feasible ? optimize_at_antennas(cfg, geom, draw, n, AllocMode::rsma, &base)
                          : AlternationResult{};
        const AlternationResult& pick = lifted.objective >= base.objective ? lifted : base;
        if (pick.feasible && pick.objective > cmp.rsma.jprt.objective) {
            JprtResult& jr = cmp.rsma.jprt;
            jr.status = pick.trace.status;
            jr.objective = pick.objective;
            jr.alloc = pick.alloc;
            jr.sinrs = pick.sinrs;
            jr.trace = pick.trace;
            jr.report = etr_total(cfg, jr.alloc, jr.sinrs, false);
        }
    }
    return cmp;
}

}  // namespace rsma
