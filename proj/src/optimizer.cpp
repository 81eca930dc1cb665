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

#include "rsma/optimizer.hpp"

#include <algorithm>
#include <cmath>

#include "rsma/fbl.hpp"
#include "rsma/numerics.hpp"

namespace rsma {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInvSqrt2Pi = 0.3989422804014327;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double phi_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// The allocator aims a hair inside the error bound so the converged point is
// strictly feasible while staying inside the activity band.
double eps_target(const SystemConfig& cfg) { return cfg.dep_bound * (1.0 - 1e-4); }

// Below this the dispersion term underflows to zero and the margin is
// undefined; such a stream cannot carry anything.
constexpr double kGammaFloor = 1e-12;

double dep_guarded(double n_data, double gamma, int n_rx, double rate) {
    if (gamma <= kGammaFloor) return rate > 0.0 ? 1.0 : 0.0;
    return fbl::dep(n_data, fbl::uniform_sinrs(gamma, n_rx), rate);
}

}  // namespace

// ---- scoring ----------------------------------------------------------------

EtrReport etr_total(const SystemConfig& cfg, const ResourceAllocation& alloc,
                    const SinrProfile& sinrs, bool exact_mode) {
    const int U = cfg.num_users;
    const double nd = static_cast<double>(alloc.n_data);
    EtrReport r;
    r.dep_common.resize(static_cast<std::size_t>(U));
    r.dep_private.resize(static_cast<std::size_t>(U));
    r.etr_common.resize(static_cast<std::size_t>(U));
    r.etr_private.resize(static_cast<std::size_t>(U));
    r.slack_dep_common.resize(static_cast<std::size_t>(U));
    r.slack_dep_private.resize(static_cast<std::size_t>(U));
    r.slack_rate_floor.resize(static_cast<std::size_t>(U));
    r.total_etr = 0.0;
    for (int u = 0; u < U; ++u) {
        const auto su = static_cast<std::size_t>(u);
        const double ec = dep_guarded(nd, sinrs.common[su], cfg.rx_antennas, alloc.rate_common_total);
        const double ep = dep_guarded(nd, sinrs.priv[su], cfg.rx_antennas, alloc.rate_private[su]);
        r.dep_common[su] = ec;
        r.dep_private[su] = ep;
        r.etr_common[su] = alloc.rate_common_user[su] * (1.0 - ec);
        if (exact_mode) {
            const double ef =
                dep_guarded(nd, sinrs.priv_fallback[su], cfg.rx_antennas, alloc.rate_private[su]);
            r.etr_private[su] = alloc.rate_private[su] * (1.0 - ec * ef - (1.0 - ec) * ep);
        } else {
            r.etr_private[su] = alloc.rate_private[su] * (1.0 - ep);
        }
        r.total_etr += r.etr_common[su] + r.etr_private[su];
        r.slack_dep_common[su] = cfg.dep_bound - ec;
        r.slack_dep_private[su] = cfg.dep_bound - ep;
        r.slack_rate_floor[su] =
            alloc.rate_common_user[su] + alloc.rate_private[su] - cfg.min_rate;
    }
    return r;
}

// ---- decoding-margin function ------------------------------------------------

PhiEval phi_margin(double gamma, double rate, double n_data, int n_rx) {
    gamma = std::max(gamma, 1e-14);
    const double nr = static_cast<double>(n_rx);
    const double K = std::sqrt(n_data) * kLn2 / nr;
    const double u = 1.0 + gamma;
    const double V = 1.0 - 1.0 / (u * u);
    const double Vp = 2.0 / (u * u * u);
    const double Vpp = -6.0 / (u * u * u * u);
    const double s = std::sqrt(V);
    const double sp = Vp / (2.0 * s);
    const double spp = Vpp / (2.0 * s) - Vp * Vp / (4.0 * s * s * s);
    const double L = nr * std::log2(u);
    const double Lp = nr / (kLn2 * u);
    const double Lpp = -nr / (kLn2 * u * u);
    const double N = L - rate;
    PhiEval e;
    e.val = K * N / s;
    e.d1 = K * (Lp / s - N * sp / (s * s));
    e.d2 = K * (Lpp / s - 2.0 * Lp * sp / (s * s) - N * spp / (s * s) +
                2.0 * N * sp * sp / (s * s * s));
    return e;
}

// ---- inner barrier solver ----------------------------------------------------

namespace {

// Power subproblem in budget-normalized units.
struct NormalizedProblem {
    int P = 0;
    double n_data = 0.0;
    int n_rx = 1;
    double a_min = 0.0;
    double e_cap = 0.0;
    double c_floor = 1e-12;
    std::vector<StreamSpec> streams;      // inv_floor normalized, rate nudged
    std::vector<double> c_cap;
};

class InnerBarrier {
  public:
    InnerBarrier(const NormalizedProblem& np, std::vector<double> beta)
        : np_(np), beta_(std::move(beta)) {}

    int dim() const { return np_.P + 3 * static_cast<int>(np_.streams.size()); }
    int iA(int s) const { return np_.P + 3 * s; }
    int iC(int s) const { return np_.P + 3 * s + 1; }
    int iE(int s) const { return np_.P + 3 * s + 2; }

    double objective(const arma::vec& x) const {
        double f = 0.0;
        for (std::size_t s = 0; s < np_.streams.size(); ++s)
            f += np_.streams[s].weight * (1.0 - fbl::q_tail(x(static_cast<arma::uword>(iA(static_cast<int>(s))))));
        return f;
    }

    bool feasible(const arma::vec& x) const { return eval(x, 1.0, nullptr, nullptr, nullptr); }

    // Damped-Newton log-barrier; returns false when no strictly feasible
    // progress could be made from x. The Newton system is preconditioned by
    // the current variable magnitudes: noise-limited streams put the SINR
    // auxiliary and its interference sum many decades apart.
    bool solve(arma::vec& x) {
        if (!feasible(x)) return false;
        const int m = num_constraints();
        double t = 10.0;
        const double mu = 25.0;
        const double gap_tol = 1e-8;
        const int n = dim();
        arma::vec grad(static_cast<arma::uword>(n));
        arma::mat hess(static_cast<arma::uword>(n), static_cast<arma::uword>(n));
        while (true) {
            arma::vec scale(static_cast<arma::uword>(n));
            for (int i = 0; i < n; ++i)
                scale(static_cast<arma::uword>(i)) =
                    std::max(std::abs(x(static_cast<arma::uword>(i))), 1e-9);
            for (int it = 0; it < 60; ++it) {
                double phi = 0.0;
                if (!eval(x, t, &phi, &grad, &hess)) return false;
                const arma::vec gs = grad % scale;
                arma::mat hs = hess;
                hs.each_col() %= scale;
                hs.each_row() %= scale.t();
                arma::vec step_y;
                double ridge = 1e-11;
                while (!arma::solve(step_y, hs + ridge * arma::eye(static_cast<arma::uword>(n), static_cast<arma::uword>(n)), -gs,
                                    arma::solve_opts::likely_sympd + arma::solve_opts::no_approx)) {
                    ridge *= 100.0;
                    if (ridge > 1e8) return true;  // numerically stuck; keep current point
                }
                const arma::vec step = step_y % scale;
                const double decrement = -arma::dot(grad, step);
                if (!(decrement > 2e-9)) break;
                // Backtrack into the strictly feasible region with Armijo.
                double alpha = 1.0;
                bool moved = false;
                const double slope = arma::dot(grad, step);
                for (int bt = 0; bt < 60; ++bt) {
                    arma::vec xn = x + alpha * step;
                    double phin = 0.0;
                    if (eval(xn, t, &phin, nullptr, nullptr) && phin <= phi + 0.25 * alpha * slope) {
                        x = xn;
                        moved = true;
                        break;
                    }
                    alpha *= 0.5;
                }
                if (!moved) break;
            }
            if (static_cast<double>(m) / t <= gap_tol) return true;
            t *= mu;
        }
    }

  private:
    int num_constraints() const {
        return np_.P + 1 + 7 * static_cast<int>(np_.streams.size());
    }

    // phi_t = -t * f0 + barrier; grad/hess optional. Returns false when any
    // constraint is violated (or numerics go non-finite).
    bool eval(const arma::vec& x, double t, double* phi, arma::vec* grad, arma::mat* hess) const {
        const int n = dim();
        double acc = 0.0;
        if (grad) grad->zeros(static_cast<arma::uword>(n));
        if (hess) hess->zeros(static_cast<arma::uword>(n), static_cast<arma::uword>(n));

        auto gslack = [&](double v) {  // v = -g > 0 required
            if (!(v > 0.0) || !std::isfinite(v)) return false;
            acc -= std::log(v);
            return true;
        };

        // rho > 0
        for (int i = 0; i < np_.P; ++i) {
            const double v = x(static_cast<arma::uword>(i));
            if (!gslack(v)) return false;
            if (grad) (*grad)(static_cast<arma::uword>(i)) += -1.0 / v;
            if (hess) (*hess)(static_cast<arma::uword>(i), static_cast<arma::uword>(i)) += 1.0 / (v * v);
        }
        // budget
        {
            double sum = 0.0;
            for (int i = 0; i < np_.P; ++i) sum += x(static_cast<arma::uword>(i));
            const double v = 1.0 - sum;
            if (!gslack(v)) return false;
            if (grad)
                for (int i = 0; i < np_.P; ++i) (*grad)(static_cast<arma::uword>(i)) += 1.0 / v;
            if (hess)
                for (int i = 0; i < np_.P; ++i)
                    for (int j = 0; j < np_.P; ++j)
                        (*hess)(static_cast<arma::uword>(i), static_cast<arma::uword>(j)) += 1.0 / (v * v);
        }

        for (std::size_t s = 0; s < np_.streams.size(); ++s) {
            const auto& st = np_.streams[s];
            const int is = static_cast<int>(s);
            const arma::uword a = static_cast<arma::uword>(iA(is));
            const arma::uword c = static_cast<arma::uword>(iC(is));
            const arma::uword e = static_cast<arma::uword>(iE(is));
            const arma::uword p = static_cast<arma::uword>(st.power_index);
            const double A = x(a), C = x(c), E = x(e);
            const double beta = beta_[s];
            const double Et = E + st.inv_floor;

            // objective block
            if (phi) acc += t * st.weight * (fbl::q_tail(A) - 1.0);
            if (grad) (*grad)(a) += -t * st.weight * phi_pdf(A);
            if (hess) (*hess)(a, a) += t * st.weight * A * phi_pdf(A);

            // A >= a_min
            {
                const double v = A - np_.a_min;
                if (!gslack(v)) return false;
                if (grad) (*grad)(a) += -1.0 / v;
                if (hess) (*hess)(a, a) += 1.0 / (v * v);
            }
            // A <= Phi(C)
            {
                const PhiEval pe = phi_margin(C, st.rate, np_.n_data, np_.n_rx);
                const double v = pe.val - A;
                if (!gslack(v)) return false;
                if (grad) {
                    (*grad)(a) += 1.0 / v;
                    (*grad)(c) += -pe.d1 / v;
                }
                if (hess) {
                    (*hess)(a, a) += 1.0 / (v * v);
                    (*hess)(a, c) += -pe.d1 / (v * v);
                    (*hess)(c, a) += -pe.d1 / (v * v);
                    (*hess)(c, c) += pe.d1 * pe.d1 / (v * v) + (-pe.d2) / v;
                }
            }
            // C >= c_floor, C <= c_cap
            {
                const double v = C - np_.c_floor;
                if (!gslack(v)) return false;
                if (grad) (*grad)(c) += -1.0 / v;
                if (hess) (*hess)(c, c) += 1.0 / (v * v);
            }
            {
                const double v = np_.c_cap[s] - C;
                if (!gslack(v)) return false;
                if (grad) (*grad)(c) += 1.0 / v;
                if (hess) (*hess)(c, c) += 1.0 / (v * v);
            }
            // E >= sum of interfering powers; E <= e_cap
            {
                double isum = 0.0;
                for (int k : st.interference) isum += x(static_cast<arma::uword>(k));
                const double v = E - isum;
                if (!gslack(v)) return false;
                if (grad) {
                    (*grad)(e) += -1.0 / v;
                    for (int k : st.interference) (*grad)(static_cast<arma::uword>(k)) += 1.0 / v;
                }
                if (hess) {
                    const double w2 = 1.0 / (v * v);
                    (*hess)(e, e) += w2;
                    for (int k : st.interference) {
                        (*hess)(e, static_cast<arma::uword>(k)) += -w2;
                        (*hess)(static_cast<arma::uword>(k), e) += -w2;
                        for (int l : st.interference)
                            (*hess)(static_cast<arma::uword>(k), static_cast<arma::uword>(l)) += w2;
                    }
                }
            }
            {
                const double v = np_.e_cap - E;
                if (!gslack(v)) return false;
                if (grad) (*grad)(e) += 1.0 / v;
                if (hess) (*hess)(e, e) += 1.0 / (v * v);
            }
            // product surrogate: (beta/2) C^2 + Et^2/(2 beta) <= rho_p
            {
                const double g = 0.5 * beta * C * C + Et * Et / (2.0 * beta) - x(p);
                const double v = -g;
                if (!gslack(v)) return false;
                const double gC = beta * C, gE = Et / beta;
                if (grad) {
                    (*grad)(c) += gC / v;
                    (*grad)(e) += gE / v;
                    (*grad)(p) += -1.0 / v;
                }
                if (hess) {
                    const double w2 = 1.0 / (v * v);
                    const double gl[3] = {gC, gE, -1.0};
                    const arma::uword id[3] = {c, e, p};
                    for (int i = 0; i < 3; ++i)
                        for (int j = 0; j < 3; ++j) (*hess)(id[i], id[j]) += gl[i] * gl[j] * w2;
                    (*hess)(c, c) += beta / v;
                    (*hess)(e, e) += 1.0 / (beta * v);
                }
            }
        }
        if (phi) *phi = acc;
        return std::isfinite(acc);
    }

    const NormalizedProblem& np_;
    std::vector<double> beta_;
};

// Strictly feasible auxiliary block on top of given powers; empty on failure.
bool build_auxiliaries(const NormalizedProblem& np, arma::vec& x) {
    for (std::size_t s = 0; s < np.streams.size(); ++s) {
        const auto& st = np.streams[s];
        const int is = static_cast<int>(s);
        double isum = 0.0;
        for (int k : st.interference) isum += x(static_cast<arma::uword>(k));
        const double E = isum * (1.0 + 1e-9) + 1e-12;
        const double Et = E + st.inv_floor;
        double C = x(static_cast<arma::uword>(st.power_index)) / Et * (1.0 - 1e-9);
        C = std::min(C, np.c_cap[s] * (1.0 - 1e-9));
        if (C <= np.c_floor * 2.0) C = np.c_floor * 2.0;
        const double phi_v = phi_margin(C, st.rate, np.n_data, np.n_rx).val;
        if (!(phi_v > np.a_min + 1e-12)) return false;
        x(static_cast<arma::uword>(np.P + 3 * is)) = np.a_min + 0.5 * (phi_v - np.a_min);
        x(static_cast<arma::uword>(np.P + 3 * is + 1)) = C;
        x(static_cast<arma::uword>(np.P + 3 * is + 2)) = E;
    }
    return true;
}

}  // namespace

// ---- SCA outer loop ----------------------------------------------------------

ScaResult solve_power_sca_generic(const PowerProblem& prob, std::span<const double> init_powers,
                                  double sca_tol, int max_iters) {
    ScaResult res;
    const int P = prob.n_powers;
    const int S = static_cast<int>(prob.streams.size());
    const double scale = prob.budget;

    if (S == 0) {  // nothing to optimize
        res.feasible = true;
        res.powers.assign(init_powers.begin(), init_powers.end());
        res.objective = 0.0;
        res.note = "no active streams";
        return res;
    }

    NormalizedProblem np;
    np.P = P;
    np.n_data = prob.n_data;
    np.n_rx = prob.n_rx;
    np.a_min = prob.a_min;
    np.e_cap = 3.0;
    np.streams = prob.streams;
    np.c_cap.resize(static_cast<std::size_t>(S));
    for (int s = 0; s < S; ++s) {
        auto& st = np.streams[static_cast<std::size_t>(s)];
        st.inv_floor /= scale;
        st.rate = st.rate - 1e-7 * std::max(1.0, st.rate);  // strict-interior nudge
        np.c_cap[static_cast<std::size_t>(s)] = 1.1 / std::max(st.inv_floor, 1e-30) + 1.0;
        // keep the SINR box sane when the noise floor is negligible
        np.c_cap[static_cast<std::size_t>(s)] = std::min(np.c_cap[static_cast<std::size_t>(s)], 1e12);
    }

    arma::vec x(static_cast<arma::uword>(P + 3 * S), arma::fill::zeros);
    {
        double sum = 0.0;
        for (int i = 0; i < P; ++i) {
            const double v = std::max(init_powers[static_cast<std::size_t>(i)] / scale, 1e-10);
            x(static_cast<arma::uword>(i)) = v;
            sum += v;
        }
        if (sum >= 1.0 - 1e-10)
            for (int i = 0; i < P; ++i) x(static_cast<arma::uword>(i)) *= (1.0 - 1e-9) / sum;
    }
    if (!build_auxiliaries(np, x)) {
        res.note = "error target unreachable at the initial powers";
        return res;
    }

    auto canonical_state = [&](const arma::vec& xv, int iter) {
        ScaState st;
        st.iteration = iter;
        st.powers.resize(static_cast<std::size_t>(P));
        for (int i = 0; i < P; ++i) st.powers[static_cast<std::size_t>(i)] = xv(static_cast<arma::uword>(i)) * scale;
        // binding levels implied by the powers, recorded per stream in order
        for (int s = 0; s < S; ++s) {
            const auto& sp = prob.streams[static_cast<std::size_t>(s)];
            double isum = 0.0;
            for (int k : sp.interference) isum += xv(static_cast<arma::uword>(k));
            const double gamma = xv(static_cast<arma::uword>(sp.power_index)) /
                                 (isum + sp.inv_floor / scale);
            const double a = phi_margin(gamma, sp.rate, prob.n_data, prob.n_rx).val;
            st.A.push_back(a);
            st.C.push_back(gamma);
            st.E.push_back(isum * scale);
        }
        return st;
    };
    auto canonical_objective = [&](const ScaState& st) {
        double f = 0.0;
        for (int s = 0; s < S; ++s)
            f += prob.streams[static_cast<std::size_t>(s)].weight *
                 (1.0 - fbl::q_tail(st.A[static_cast<std::size_t>(s)]));
        return f;
    };

    double prev_obj = kNegInf;
    for (int t = 0; t < std::max(1, max_iters); ++t) {
        std::vector<double> beta(static_cast<std::size_t>(S));
        for (int s = 0; s < S; ++s) {
            const double C = x(static_cast<arma::uword>(np.P + 3 * s + 1));
            const double Et = x(static_cast<arma::uword>(np.P + 3 * s + 2)) +
                              np.streams[static_cast<std::size_t>(s)].inv_floor;
            beta[static_cast<std::size_t>(s)] = Et / std::max(C, np.c_floor);
        }
        InnerBarrier solver(np, beta);
        arma::vec x_try = x;
        if (!solver.solve(x_try)) {
            if (t == 0) {
                res.note = "inner solve infeasible";
                return res;
            }
            break;
        }
        ScaState st = canonical_state(x_try, t);
        const double obj = canonical_objective(st);
        if (obj < prev_obj) break;  // keep the previous iterate
        x = x_try;
        res.iterations.push_back(std::move(st));
        if (obj - prev_obj <= sca_tol * std::max(1.0, std::abs(obj)) && t > 0) {
            prev_obj = obj;
            break;
        }
        prev_obj = obj;
    }

    res.feasible = true;
    res.objective = prev_obj;
    res.powers.resize(static_cast<std::size_t>(P));
    for (int i = 0; i < P; ++i) res.powers[static_cast<std::size_t>(i)] = x(static_cast<arma::uword>(i)) * scale;
    return res;
}

ScaResult solve_power_sca(const SystemConfig& cfg, const RsmaRates& rates, int n_tx,
                          std::span<const double> kappas, double psi, bool common_enabled,
                          std::span<const double> init_powers) {
    const int U = cfg.num_users;
    PowerProblem prob;
    prob.n_powers = U + 1;  // index 0 is the shared-stream power
    prob.budget = cfg.total_power;
    prob.n_data = static_cast<double>(cfg.total_cus - n_tx);
    prob.n_rx = cfg.rx_antennas;
    prob.a_min = fbl::q_tail_inv(eps_target(cfg));

    std::vector<int> privates(static_cast<std::size_t>(U));
    for (int u = 0; u < U; ++u) privates[static_cast<std::size_t>(u)] = 1 + u;

    if (common_enabled && rates.common_total > 0.0) {
        for (int u = 0; u < U; ++u) {
            StreamSpec st;
            st.power_index = 0;
            st.interference = privates;
            st.inv_floor = 1.0 / (kappas[static_cast<std::size_t>(u)] * psi);
            st.rate = rates.common_total;
            st.weight = rates.common_user[static_cast<std::size_t>(u)];
            prob.streams.push_back(std::move(st));
        }
    }
    for (int u = 0; u < U; ++u) {
        if (!(rates.priv[static_cast<std::size_t>(u)] > 0.0)) continue;
        StreamSpec st;
        st.power_index = 1 + u;
        st.interference.clear();
        for (int k = 0; k < U; ++k)
            if (k != u) st.interference.push_back(1 + k);
        st.inv_floor = 1.0 / (kappas[static_cast<std::size_t>(u)] * psi);
        st.rate = rates.priv[static_cast<std::size_t>(u)];
        st.weight = rates.priv[static_cast<std::size_t>(u)];
        prob.streams.push_back(std::move(st));
    }

    ScaResult res = solve_power_sca_generic(prob, init_powers, cfg.sca_tol, 30);

    // Remap the per-stream records onto the per-user auxiliary vectors.
    const int n_common = (common_enabled && rates.common_total > 0.0) ? U : 0;
    for (auto& st : res.iterations) {
        ScaState mapped;
        mapped.iteration = st.iteration;
        mapped.powers = st.powers;
        mapped.A.resize(static_cast<std::size_t>(n_common));
        mapped.C.resize(static_cast<std::size_t>(n_common));
        mapped.E.resize(static_cast<std::size_t>(n_common));
        for (int s = 0; s < n_common; ++s) {
            mapped.A[static_cast<std::size_t>(s)] = st.A[static_cast<std::size_t>(s)];
            mapped.C[static_cast<std::size_t>(s)] = st.C[static_cast<std::size_t>(s)];
            mapped.E[static_cast<std::size_t>(s)] = st.E[static_cast<std::size_t>(s)];
        }
        int idx = n_common;
        mapped.B.assign(static_cast<std::size_t>(U), 0.0);
        mapped.D.assign(static_cast<std::size_t>(U), 0.0);
        mapped.F.assign(static_cast<std::size_t>(U), 0.0);
        double psum = 0.0;
        for (int k = 0; k < U; ++k) psum += st.powers[static_cast<std::size_t>(1 + k)];
        for (int u = 0; u < U; ++u) {
            const auto su = static_cast<std::size_t>(u);
            if (rates.priv[su] > 0.0) {
                mapped.B[su] = st.A[static_cast<std::size_t>(idx)];
                mapped.D[su] = st.C[static_cast<std::size_t>(idx)];
                mapped.F[su] = st.E[static_cast<std::size_t>(idx)];
                ++idx;
            } else {
                const double other = psum - st.powers[su + 1];
                const double gamma = st.powers[su + 1] /
                                     (other + 1.0 / (kappas[su] * psi));
                mapped.D[su] = gamma;
                mapped.F[su] = other;
                mapped.B[su] = phi_margin(gamma, 0.0, prob.n_data, prob.n_rx).val;
            }
        }
        st = std::move(mapped);
    }
    return res;
}

// ---- rate splitting -----------------------------------------------------------

std::vector<double> rate_cap_private(const SystemConfig& cfg, const SinrProfile& sinrs,
                                     double n_data, double eps) {
    const int U = cfg.num_users;
    std::vector<double> caps(static_cast<std::size_t>(U), 0.0);
    for (int u = 0; u < U; ++u) {
        const double g = sinrs.priv[static_cast<std::size_t>(u)];
        if (g <= kGammaFloor) continue;
        const double r = fbl::achievable_rate(n_data, fbl::uniform_sinrs(g, cfg.rx_antennas), eps);
        caps[static_cast<std::size_t>(u)] = std::max(r, 0.0);
    }
    return caps;
}

namespace {

// rate * (1 - error(rate)) for a scalar-SINR stream.
double stream_payoff(double rate, double gamma, int n_rx, double n_data) {
    if (rate <= 0.0) return 0.0;
    return rate * (1.0 - dep_guarded(n_data, gamma, n_rx, rate));
}

double maximize_stream_rate(double cap, double gamma, int n_rx, double n_data) {
    if (cap <= 0.0 || gamma <= kGammaFloor) return 0.0;
    const auto f = [&](double r) { return stream_payoff(r, gamma, n_rx, n_data); };
    double r = num::golden_max(f, 0.0, cap, cap * 1e-11);
    // Newton polish on the stationarity condition when the peak is interior.
    if (r < cap * (1.0 - 1e-9)) {
        const double nr = static_cast<double>(n_rx);
        const double denom = nr * std::sqrt(fbl::dispersion(gamma) / n_data);
        for (int it = 0; it < 4; ++it) {
            const double g = fbl::g_metric(n_data, fbl::uniform_sinrs(gamma, n_rx), r);
            const double eps_v = fbl::q_tail(g);
            const double deps = phi_pdf(g) * kLn2 / denom;   // d(error)/d(rate)
            const double d2eps = deps * g * kLn2 / denom;    // second derivative term
            const double h1 = (1.0 - eps_v) - r * deps;
            const double h2 = -2.0 * deps - r * d2eps;
            if (!(h2 < 0.0)) break;
            double rn = r - h1 / h2;
            if (!(rn > 0.0 && rn < cap)) break;
            if (std::abs(rn - r) < 1e-13 * cap) { r = rn; break; }
            r = rn;
        }
    }
    return r;
}

}  // namespace

std::vector<double> solve_private_rates(const SystemConfig& cfg, const SinrProfile& sinrs,
                                        double n_data, double eps) {
    const auto caps = rate_cap_private(cfg, sinrs, n_data, eps);
    std::vector<double> rates(caps.size(), 0.0);
    for (std::size_t u = 0; u < caps.size(); ++u)
        rates[u] = maximize_stream_rate(caps[u], sinrs.priv[u], cfg.rx_antennas, n_data);
    return rates;
}

CommonRateSolution solve_common_total(const SystemConfig& cfg, const SinrProfile& sinrs,
                                      std::span<const double> private_rates, double n_data,
                                      double eps) {
    const int U = cfg.num_users;
    CommonRateSolution sol;
    double cap = std::numeric_limits<double>::infinity();
    for (int u = 0; u < U; ++u) {
        const double g = sinrs.common[static_cast<std::size_t>(u)];
        if (g <= kGammaFloor) { cap = 0.0; break; }
        cap = std::min(cap, fbl::achievable_rate(n_data, fbl::uniform_sinrs(g, cfg.rx_antennas), eps));
    }
    sol.cap = std::max(cap, 0.0);

    std::vector<double> floors(static_cast<std::size_t>(U), 0.0);
    double floor_sum = 0.0;
    for (int u = 0; u < U; ++u) {
        floors[static_cast<std::size_t>(u)] =
            std::max(cfg.min_rate - private_rates[static_cast<std::size_t>(u)], 0.0);
        floor_sum += floors[static_cast<std::size_t>(u)];
    }
    sol.floor_sum = floor_sum;
    if (sol.cap <= 0.0) {
        sol.total = 0.0;
        sol.floor_feasible = floor_sum <= 1e-12;
        return sol;
    }
    if (floor_sum > sol.cap) {
        sol.total = sol.cap;
        sol.floor_feasible = false;
        return sol;
    }

    // Surplus goes to the best-channel user; everyone else sits at its floor.
    int best = 0;
    for (int u = 1; u < U; ++u)
        if (sinrs.common[static_cast<std::size_t>(u)] > sinrs.common[static_cast<std::size_t>(best)]) best = u;
    double floors_other = floor_sum - floors[static_cast<std::size_t>(best)];

    const auto objective = [&](double rc) {
        double v = 0.0;
        for (int u = 0; u < U; ++u) {
            if (u == best) continue;
            const double e = dep_guarded(n_data, sinrs.common[static_cast<std::size_t>(u)],
                                         cfg.rx_antennas, rc);
            v += floors[static_cast<std::size_t>(u)] * (1.0 - e);
        }
        const double eb =
            dep_guarded(n_data, sinrs.common[static_cast<std::size_t>(best)], cfg.rx_antennas, rc);
        v += (rc - floors_other) * (1.0 - eb);
        return v;
    };
    const double lo = std::max(floor_sum, sol.cap * 1e-12);
    sol.total = num::golden_max(objective, lo, sol.cap, sol.cap * 1e-11);
    sol.floor_feasible = true;
    return sol;
}

std::vector<double> allocate_common_rates(const SystemConfig& cfg, double rate_common_total,
                                          const SinrProfile& sinrs,
                                          std::span<const double> private_rates) {
    const int U = cfg.num_users;
    std::vector<double> shares(static_cast<std::size_t>(U), 0.0);
    double floors_sum = 0.0;
    for (int u = 0; u < U; ++u) {
        shares[static_cast<std::size_t>(u)] =
            std::max(cfg.min_rate - private_rates[static_cast<std::size_t>(u)], 0.0);
        floors_sum += shares[static_cast<std::size_t>(u)];
    }
    if (rate_common_total < floors_sum - 1e-12)
        throw FloorInfeasibleError(floors_sum - rate_common_total);
    int best = 0;
    for (int u = 1; u < U; ++u)
        if (sinrs.common[static_cast<std::size_t>(u)] > sinrs.common[static_cast<std::size_t>(best)]) best = u;
    shares[static_cast<std::size_t>(best)] =
        rate_common_total - (floors_sum - shares[static_cast<std::size_t>(best)]);
    return shares;
}

// ---- antenna search ------------------------------------------------------------

namespace {

int count_local_maxima(const std::vector<std::pair<int, double>>& pts) {
    // pts sorted by n; plateaus collapse into one candidate.
    int peaks = 0;
    const int m = static_cast<int>(pts.size());
    for (int i = 0; i < m; ++i) {
        const double f = pts[static_cast<std::size_t>(i)].second;
        if (!std::isfinite(f)) continue;
        bool left_ok = true, right_ok = true;
        for (int j = i - 1; j >= 0; --j) {
            if (pts[static_cast<std::size_t>(j)].second != f) {
                left_ok = pts[static_cast<std::size_t>(j)].second < f;
                break;
            }
        }
        for (int j = i + 1; j < m; ++j) {
            if (pts[static_cast<std::size_t>(j)].second != f) {
                right_ok = pts[static_cast<std::size_t>(j)].second < f;
                break;
            }
        }
        if (left_ok && right_ok) {
            ++peaks;
            // skip the plateau
            while (i + 1 < m && pts[static_cast<std::size_t>(i + 1)].second == f) ++i;
        }
    }
    return peaks;
}

}  // namespace

AntennaSearchResult select_antennas(int lo, int hi, const std::function<double(int)>& objective) {
    AntennaSearchResult res;
    if (hi < lo) return res;

    std::map<int, double> memo;
    const auto F = [&](int n) {
        auto it = memo.find(n);
        if (it != memo.end()) return it->second;
        const double v = objective(n);
        memo.emplace(n, v);
        res.evaluations.emplace_back(n, v);
        return v;
    };

    int a = lo, b = hi;
    if (b - a > 14) {
        const double iphi = 0.6180339887498949;
        int x1 = b - static_cast<int>(std::llround(iphi * (b - a)));
        int x2 = a + static_cast<int>(std::llround(iphi * (b - a)));
        x1 = std::clamp(x1, a + 1, b - 2);
        x2 = std::clamp(x2, x1 + 1, b - 1);
        double f1 = F(x1), f2 = F(x2);
        while (b - a > 6) {
            if (f1 < f2) {
                a = x1;
                x1 = x2;
                f1 = f2;
                x2 = a + static_cast<int>(std::llround(iphi * (b - a)));
                x2 = std::clamp(x2, x1 + 1, b - 1);
                if (x2 == x1) break;
                f2 = F(x2);
            } else {
                b = x2;
                x2 = x1;
                f2 = f1;
                x1 = b - static_cast<int>(std::llround(iphi * (b - a)));
                x1 = std::clamp(x1, a + 1, x2 - 1);
                if (x1 == x2) break;
                f1 = F(x1);
            }
        }
    }
    for (int n = a; n <= b; ++n) F(n);

    auto best_of_memo = [&]() {
        int bn = lo;
        double bf = kNegInf;
        for (const auto& [n, f] : memo)
            if (f > bf) { bf = f; bn = n; }
        return std::make_pair(bn, bf);
    };
    auto [bn, bf] = best_of_memo();

    // local-peak certificate with a bounded uphill walk
    for (int guard = 0; guard < 256; ++guard) {
        bool moved = false;
        if (bn + 1 <= hi && F(bn + 1) > bf) { bn += 1; bf = memo[bn]; moved = true; }
        else if (bn - 1 >= lo && F(bn - 1) > bf) { bn -= 1; bf = memo[bn]; moved = true; }
        if (!moved) break;
    }

    // three-point unimodality test over everything seen so far
    std::vector<std::pair<int, double>> pts(memo.begin(), memo.end());
    if (count_local_maxima(pts) > 1) {
        res.used_fallback = true;
        // coarse-then-fine ladder scan
        int stride = std::max(1, (hi - lo) / 16);
        int center = bn;
        while (true) {
            int s_lo = lo, s_hi = hi;
            if (stride < (hi - lo) / 16) {
                s_lo = std::max(lo, center - 4 * stride);
                s_hi = std::min(hi, center + 4 * stride);
            }
            for (int n = s_lo; n <= s_hi; n += stride) F(n);
            std::tie(bn, bf) = best_of_memo();
            center = bn;
            if (stride == 1) break;
            stride = std::max(1, stride / 4);
        }
    }

    res.n_tx = bn;
    res.objective = bf;
    return res;
}

// ---- alternation and the joint loop ---------------------------------------------

namespace {

struct StageContext {
    const SystemConfig* cfg;
    const UserGeometry* geom;
    const ChannelRealization* real;
    int n_tx = 0;
    double n_data = 0.0;
    bool common_enabled = true;
};

SinrProfile sinrs_at(const StageContext& c, double rho_c, std::span<const double> rho_p) {
    const PrecoderSet pre = build_precoders(*c.real, *c.geom, rho_c, rho_p, c.n_tx);
    const double psi = psi_value(*c.cfg, c.n_tx, static_cast<double>(c.real->pilot_len),
                                 c.real->pilot_power, pre.xi, c.geom->kappas);
    return closed_form_sinrs(rho_c, rho_p, c.geom->kappas, psi);
}

ResourceAllocation make_alloc(const StageContext& c, double rho_c, std::span<const double> rho_p,
                              double rc_total, std::span<const double> rc_user,
                              std::span<const double> rp) {
    ResourceAllocation a;
    a.n_tx = c.n_tx;
    a.n_pilot = c.n_tx;
    a.n_data = c.cfg->total_cus - c.n_tx;
    a.power_common = rho_c;
    a.power_private.assign(rho_p.begin(), rho_p.end());
    a.rate_common_total = rc_total;
    a.rate_common_user.assign(rc_user.begin(), rc_user.end());
    a.rate_private.assign(rp.begin(), rp.end());
    return a;
}

std::vector<double> trace_powers(const ResourceAllocation& a) {
    std::vector<double> p;
    p.push_back(a.power_common);
    p.insert(p.end(), a.power_private.begin(), a.power_private.end());
    return p;
}

std::vector<double> trace_rates(const ResourceAllocation& a) {
    std::vector<double> r;
    r.push_back(a.rate_common_total);
    r.insert(r.end(), a.rate_common_user.begin(), a.rate_common_user.end());
    r.insert(r.end(), a.rate_private.begin(), a.rate_private.end());
    return r;
}

// Rates stage at fixed powers: private maximizers, then the shared-stream
// rate and its split. Returns false when the floors cannot be met.
bool rates_stage(const StageContext& c, const SinrProfile& sinrs, double eps,
                 ResourceAllocation& alloc) {
    std::vector<double> rp = solve_private_rates(*c.cfg, sinrs, c.n_data, eps);
    double rc = 0.0;
    std::vector<double> shares(static_cast<std::size_t>(c.cfg->num_users), 0.0);
    if (c.common_enabled) {
        const CommonRateSolution sol = solve_common_total(*c.cfg, sinrs, rp, c.n_data, eps);
        if (!sol.floor_feasible) return false;
        rc = sol.total;
        if (rc > 0.0)
            shares = allocate_common_rates(*c.cfg, rc, sinrs, rp);
        else if (sol.floor_sum > 1e-12)
            return false;
    } else {
        for (int u = 0; u < c.cfg->num_users; ++u) {
            auto su = static_cast<std::size_t>(u);
            if (rp[su] + 1e-12 < c.cfg->min_rate) {
                // floors must come out of the private caps alone
                const auto caps = rate_cap_private(*c.cfg, sinrs, c.n_data, eps);
                if (caps[su] + 1e-12 < c.cfg->min_rate) return false;
                rp[su] = c.cfg->min_rate;
            }
        }
    }
    alloc.rate_common_total = rc;
    alloc.rate_common_user = shares;
    alloc.rate_private = rp;
    return true;
}

}  // namespace

AlternationResult optimize_at_antennas(const SystemConfig& cfg, const UserGeometry& geom,
                                       const ChannelDraw& draw, int n_tx, AllocMode mode,
                                       const AlternationResult* warm) {
    AlternationResult out;
    const int U = cfg.num_users;
    const int n_data = cfg.total_cus - n_tx;
    if (n_tx <= U * cfg.rx_antennas || n_data < 2 || n_tx > draw.n_max()) {
        out.trace.status = OptStatus::infeasible;
        out.trace.note = "antenna count outside the feasible window";
        return out;
    }

    const ChannelRealization real =
        realize_channel(geom, draw, n_tx, cfg.rx_antennas, n_tx, cfg.pilot_power);
    StageContext ctx{&cfg, &geom, &real, n_tx, static_cast<double>(n_data),
                     mode == AllocMode::rsma};
    const double eps = eps_target(cfg);

    // Phase one: score every power-split candidate through a rate stage and
    // start from the best. Starting at (or above) a warm point's value keeps
    // the ascent certificate against restricted schemes.
    std::vector<std::vector<double>> candidates;
    if (warm && warm->feasible) {
        std::vector<double> w;
        w.push_back(ctx.common_enabled ? std::max(warm->alloc.power_common, cfg.total_power * 1e-9)
                                       : 0.0);
        w.insert(w.end(), warm->alloc.power_private.begin(), warm->alloc.power_private.end());
        candidates.push_back(std::move(w));
    }
    // Near-unit common fractions probe the corner where almost everything
    // rides the shared stream and the private splits only carry the floors'
    // remainder; the alternation cannot walk there on its own because
    // positive private rates pin the private powers.
    std::vector<double> fracs =
        ctx.common_enabled
            ? std::vector<double>{0.5, 0.3, 0.7, 0.9, 0.95, 0.15, 0.05,
                                  1.0 - 1e-3, 1.0 - 1e-6, 1.0 - 1e-9}
            : std::vector<double>{0.0};
    if (warm && warm->feasible && ctx.common_enabled)
        fracs = {0.5, 0.95, 1.0 - 1e-6};  // the warm point carries the rest
    const double budget = cfg.total_power * (1.0 - 1e-9);
    for (double f : fracs) {
        std::vector<double> c(static_cast<std::size_t>(U) + 1, 0.0);
        c[0] = f * budget;
        for (int u = 0; u < U; ++u) c[static_cast<std::size_t>(u) + 1] = (1.0 - f) * budget / U;
        candidates.push_back(std::move(c));
        // gain-weighted private splits explore the asymmetric corners
        for (int pow_k : {1, 2}) {
            std::vector<double> a(static_cast<std::size_t>(U) + 1, 0.0);
            a[0] = f * budget;
            double norm = 0.0;
            for (int u = 0; u < U; ++u)
                norm += std::pow(geom.kappas[static_cast<std::size_t>(u)], pow_k);
            for (int u = 0; u < U; ++u)
                a[static_cast<std::size_t>(u) + 1] =
                    (1.0 - f) * budget *
                    std::pow(geom.kappas[static_cast<std::size_t>(u)], pow_k) / norm;
            candidates.push_back(std::move(a));
        }
        // winner-take-all: the whole private budget on the best-gain user
        // rides above the power-ratio ceiling, everyone else on the floors
        {
            int b = 0;
            for (int u = 1; u < U; ++u)
                if (geom.kappas[static_cast<std::size_t>(u)] > geom.kappas[static_cast<std::size_t>(b)]) b = u;
            std::vector<double> a(static_cast<std::size_t>(U) + 1, 0.0);
            a[0] = f * budget;
            const double priv = (1.0 - f) * budget;
            for (int u = 0; u < U; ++u)
                a[static_cast<std::size_t>(u) + 1] = priv * 1e-12;
            a[static_cast<std::size_t>(b) + 1] = priv * (1.0 - (U - 1) * 1e-12);
            candidates.push_back(std::move(a));
        }
    }

    bool found = false;
    std::vector<double> rho;
    SinrProfile sinrs;
    ResourceAllocation alloc;
    double objective = kNegInf;
    for (const auto& cand : candidates) {
        std::span<const double> rp_span(cand.data() + 1, static_cast<std::size_t>(U));
        SinrProfile s;
        try {
            s = sinrs_at(ctx, cand[0], rp_span);
        } catch (const DegenerateChannelError&) {
            continue;
        }
        ResourceAllocation a =
            make_alloc(ctx, cand[0], rp_span, 0.0,
                       std::vector<double>(static_cast<std::size_t>(U), 0.0),
                       std::vector<double>(static_cast<std::size_t>(U), 0.0));
        if (!rates_stage(ctx, s, eps, a)) continue;
        const double t = etr_total(cfg, a, s, false).total_etr;
        if (t > objective) {
            objective = t;
            rho = cand;
            sinrs = std::move(s);
            alloc = std::move(a);
            found = true;
        }
    }
    if (!found) {
        out.trace.status = OptStatus::infeasible;
        out.trace.note = "rate floors unreachable at this antenna count";
        return out;
    }
    out.trace.entries.push_back({0, "rates", n_tx, objective, trace_powers(alloc), trace_rates(alloc)});

    bool converged = false;
    int round = 1;
    for (; round <= cfg.max_iters; ++round) {
        const double round_start = objective;

        // Power stage at fixed rates.
        RsmaRates rr{alloc.rate_common_total, alloc.rate_common_user, alloc.rate_private};
        std::vector<double> init = trace_powers(alloc);
        ScaResult sca = solve_power_sca(cfg, rr, n_tx, geom.kappas, sinrs.psi, ctx.common_enabled,
                                        init);
        if (sca.feasible) {
            std::span<const double> rp_new(sca.powers.data() + 1, static_cast<std::size_t>(U));
            SinrProfile s_new = sinrs_at(ctx, sca.powers[0], rp_new);
            ResourceAllocation a_new = alloc;
            a_new.power_common = sca.powers[0];
            a_new.power_private.assign(rp_new.begin(), rp_new.end());
            const double t_new = etr_total(cfg, a_new, s_new, false).total_etr;
            if (t_new >= objective) {  // monotone-ascent guard
                alloc = std::move(a_new);
                sinrs = std::move(s_new);
                objective = t_new;
                out.sca_states = std::move(sca.iterations);
            }
        }
        out.trace.entries.push_back(
            {round, "power", n_tx, objective, trace_powers(alloc), trace_rates(alloc)});

        // Rates stage at the (possibly) new powers.
        ResourceAllocation a_rate = alloc;
        if (rates_stage(ctx, sinrs, eps, a_rate)) {
            const double t_new = etr_total(cfg, a_rate, sinrs, false).total_etr;
            if (t_new >= objective - 1e-12 * std::max(1.0, std::abs(objective))) {
                alloc = std::move(a_rate);
                objective = std::max(objective, t_new);
            }
        }
        out.trace.entries.push_back(
            {round, "rates", n_tx, objective, trace_powers(alloc), trace_rates(alloc)});

        if (objective - round_start < cfg.jprt_tol * std::max(1.0, std::abs(round_start))) {
            converged = true;
            break;
        }
    }

    out.feasible = true;
    out.objective = objective;
    out.alloc = alloc;
    out.sinrs = sinrs;
    out.trace.status = converged ? OptStatus::converged : OptStatus::max_iters;
    return out;
}

JprtResult jprt_on(const SystemConfig& cfg, const UserGeometry& geom, const ChannelDraw& draw,
                   AllocMode mode, int n_tx_pin) {
    JprtResult res;
    res.geometry = geom;
    int lo = cfg.num_users * cfg.rx_antennas + 1;
    int hi = std::min(cfg.total_cus - 2, draw.n_max());
    if (n_tx_pin > 0) lo = hi = n_tx_pin;
    if (hi < lo) {
        res.status = OptStatus::infeasible;
        res.trace.status = OptStatus::infeasible;
        res.trace.note = "no feasible antenna count";
        return res;
    }

    std::map<int, AlternationResult> cache;
    AlternationResult last;
    const auto evaluate = [&](int n) -> double {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second.objective;
        AlternationResult r;
        if (mode == AllocMode::sdma) {
            r = optimize_at_antennas(cfg, geom, draw, n, AllocMode::sdma,
                                     last.feasible ? &last : nullptr);
        } else {
            // Ascent from the restricted solution certifies dominance over it;
            // the symmetric start covers the rest of the landscape.
            AlternationResult base = optimize_at_antennas(cfg, geom, draw, n, AllocMode::sdma);
            AlternationResult from_base =
                base.feasible ? optimize_at_antennas(cfg, geom, draw, n, AllocMode::rsma, &base)
                              : AlternationResult{};
            AlternationResult plain = optimize_at_antennas(cfg, geom, draw, n, AllocMode::rsma,
                                                           last.feasible ? &last : nullptr);
            r = (from_base.objective >= plain.objective) ? std::move(from_base) : std::move(plain);
            if (!r.feasible && base.feasible) r = std::move(base);
        }
        if (r.feasible) last = r;
        const double v = r.feasible ? r.objective : kNegInf;
        cache.emplace(n, std::move(r));
        return v;
    };

    res.antenna_search = select_antennas(lo, hi, evaluate);
    const auto it = cache.find(res.antenna_search.n_tx);
    if (it == cache.end() || !it->second.feasible) {
        res.status = OptStatus::infeasible;
        res.trace.status = OptStatus::infeasible;
        res.trace.note = "no antenna count admits the rate floors";
        return res;
    }
    const AlternationResult& best = it->second;
    res.status = best.trace.status;
    res.objective = best.objective;
    res.alloc = best.alloc;
    res.sinrs = best.sinrs;
    res.trace = best.trace;
    for (const auto& [n, f] : res.antenna_search.evaluations)
        res.trace.entries.push_back({0, "antenna", n, f, {}, {}});
    res.report = etr_total(cfg, res.alloc, res.sinrs, false);
    return res;
}

JprtResult jprt(const SystemConfig& cfg, AllocMode mode) {
    Rng geo_rng = make_stream(cfg.seed, 0xA110C);
    const UserGeometry geom = sample_geometry(cfg, geo_rng);
    Rng ch_rng = make_stream(cfg.seed, 0xC4A7);
    const ChannelDraw draw = sample_channel_draw(cfg.num_users, std::max(cfg.total_cus, 8), ch_rng);
    return jprt_on(cfg, geom, draw, mode);
}

}  // namespace rsma
