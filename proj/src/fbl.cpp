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

#include "rsma/fbl.hpp"

#include <cmath>
#include <stdexcept>

namespace rsma::fbl {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kInvSqrt2Pi = 0.3989422804014327;

double phi_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

// Rational approximation for the standard normal quantile (lower-tail
// probability q), max relative error ~1.15e-9. Used only as the Newton seed.
double norm_quantile_seed(double q) {
    static const double a[6] = {-3.969683028665376e+01, 2.209460984245205e+02,
                                -2.759285104469687e+02, 1.383577518672690e+02,
                                -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[5] = {-5.447609879822406e+01, 1.615858368580409e+02,
                                -1.556989798598866e+02, 6.680131188771972e+01,
                                -1.328068155288572e+01};
    static const double c[6] = {-7.784894002430293e-03, -3.223964580411365e-01,
                                -2.400758277161838e+00, -2.549732539343734e+00,
                                4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[4] = {7.784695709041462e-03, 3.224671290700398e-01,
                                2.445134137142996e+00, 3.754408661907416e+00};
    const double p_low = 0.02425;
    if (q < p_low) {
        const double r = std::sqrt(-2.0 * std::log(q));
        return (((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
               ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
    }
    if (q <= 1.0 - p_low) {
        const double r = q - 0.5;
        const double s = r * r;
        return (((((a[0] * s + a[1]) * s + a[2]) * s + a[3]) * s + a[4]) * s + a[5]) * r /
               (((((b[0] * s + b[1]) * s + b[2]) * s + b[3]) * s + b[4]) * s + 1.0);
    }
    const double r = std::sqrt(-2.0 * std::log(1.0 - q));
    return -(((((c[0] * r + c[1]) * r + c[2]) * r + c[3]) * r + c[4]) * r + c[5]) /
           ((((d[0] * r + d[1]) * r + d[2]) * r + d[3]) * r + 1.0);
}

}  // namespace

SinrVector uniform_sinrs(double gamma, int n_rx) {
    return SinrVector(static_cast<std::size_t>(n_rx), gamma);
}

double q_tail(double x) { return 0.5 * std::erfc(x * M_SQRT1_2); }

double q_tail_inv(double p) {
    if (!(p > 0.0 && p < 1.0)) throw std::domain_error("q_tail_inv: p must lie in (0,1)");
    // Upper-tail p maps to lower-tail quantile 1-p; negate for symmetry.
    double x = -norm_quantile_seed(p);
    // Safeguarded Newton on q_tail(x) - p. q_tail is strictly decreasing, so
    // a bracket is easy to maintain. For p below ~1e-290 the residual
    // underflows and the rational seed is already the best we can do.
    double lo = x - 1.0, hi = x + 1.0;
    for (int it = 0; it < 60; ++it) {
        const double f = q_tail(x) - p;
        if (f > 0.0)
            lo = x;
        else
            hi = x;
        const double dpdx = phi_pdf(x);
        if (dpdx <= 0.0) break;
        double step = f / dpdx;  // Q' = -phi, so x_next = x + f/phi
        double xn = x + step;
        if (!(xn > lo && xn < hi)) xn = 0.5 * (lo + hi);
        if (std::abs(xn - x) <= 1e-15 * std::max(1.0, std::abs(x))) {
            x = xn;
            break;
        }
        x = xn;
    }
    return x;
}

double dispersion(double gamma) {
    const double u = 1.0 + gamma;
    return 1.0 - 1.0 / (u * u);
}

double g_metric(double n_data, std::span<const double> sinrs, double rate) {
    if (!(n_data > 0.0)) throw std::invalid_argument("g_metric: n_data must be positive");
    double cap = 0.0, disp = 0.0;
    for (double g : sinrs) {
        cap += std::log2(1.0 + g);
        disp += std::sqrt(dispersion(g) / n_data);
    }
    if (disp <= 0.0) throw std::domain_error("g_metric: zero dispersion (all SINRs are 0)");
    return kLn2 * (cap - rate) / disp;
}

double dep(double n_data, std::span<const double> sinrs, double rate) {
    return q_tail(g_metric(n_data, sinrs, rate));
}

double achievable_rate(double n_data, std::span<const double> sinrs, double eps) {
    if (!(n_data > 0.0)) throw std::invalid_argument("achievable_rate: n_data must be positive");
    const double qi = q_tail_inv(eps);
    double r = 0.0;
    for (double g : sinrs)
        r += std::log2(1.0 + g) - std::sqrt(dispersion(g) / n_data) * qi / kLn2;
    return r;
}

}  // namespace rsma::fbl
