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

#ifndef RSMA_NUMERICS_HPP
#define RSMA_NUMERICS_HPP

#include <cmath>
#include <functional>

namespace rsma::num {

namespace detail {

template <class F>
double simpson_rec(const F& f, double a, double b, double fa, double fm, double fb, double whole,
                   double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double sum = left + right;
    if (depth <= 0 || std::abs(sum - whole) <= 15.0 * tol)
        return sum + (sum - whole) / 15.0;
    return simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

// Adaptive Simpson with Richardson correction. tol is treated as an absolute
// tolerance on the given interval; callers wanting relative accuracy scale it
// by a magnitude estimate first.
template <class F>
double adaptive_simpson(const F& f, double a, double b, double tol, int max_depth = 40) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return detail::simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// Golden-section maximization on [lo, hi]; returns the argmax. Converges to
// an endpoint when the maximum sits there.
template <class F>
double golden_max(const F& f, double lo, double hi, double xtol, int max_iter = 200) {
    const double invphi = 0.6180339887498949;
    double a = lo, b = hi;
    double x1 = b - invphi * (b - a);
    double x2 = a + invphi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < max_iter && (b - a) > xtol; ++i) {
        if (f1 < f2) {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + invphi * (b - a);
            f2 = f(x2);
        } else {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - invphi * (b - a);
            f1 = f(x1);
        }
    }
    const double mid = 0.5 * (a + b);
    // Endpoints can dominate the interior bracket.
    double best = mid, fbest = f(mid);
    if (f(lo) > fbest) { best = lo; fbest = f(lo); }
    if (f(hi) > fbest) { best = hi; fbest = f(hi); }
    return best;
}

struct MeanCi {
    double mean = 0.0;
    double ci_half = 0.0;  // 95% half-width
    long n = 0;
};

// Streaming mean/variance accumulator (Welford).
class RunningStat {
  public:
    void add(double x) {
        ++n_;
        const double d = x - mean_;
        mean_ += d / static_cast<double>(n_);
        m2_ += d * (x - mean_);
    }
    double mean() const { return mean_; }
    double variance() const { return n_ > 1 ? m2_ / static_cast<double>(n_ - 1) : 0.0; }
    double std_error() const { return n_ > 0 ? std::sqrt(variance() / static_cast<double>(n_)) : 0.0; }
    MeanCi ci95() const { return {mean_, 1.959963984540054 * std_error(), n_}; }
    long count() const { return n_; }

  private:
    long n_ = 0;
    double mean_ = 0.0, m2_ = 0.0;
};

}  // namespace rsma::num

#endif
