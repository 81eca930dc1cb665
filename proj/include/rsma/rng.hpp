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

#ifndef RSMA_RNG_HPP
#define RSMA_RNG_HPP

#include <complex>
#include <cstdint>
#include <random>

namespace rsma {

using Rng = std::mt19937_64;

inline std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

// Decorrelated sub-stream for (point, draw, worker) indices. Streams are
// reproducible regardless of execution order, which keeps sweep CSVs
// byte-identical across runs.
inline Rng make_stream(std::uint64_t master, std::uint64_t a = 0, std::uint64_t b = 0,
                       std::uint64_t c = 0) {
    std::uint64_t s = splitmix64(master ^ 0x5851f42d4c957f2dULL);
    s = splitmix64(s ^ splitmix64(a + 0x1000000001ULL));
    s = splitmix64(s ^ splitmix64(b + 0x2000000002ULL));
    s = splitmix64(s ^ splitmix64(c + 0x3000000003ULL));
    return Rng(s);
}

inline double randn(Rng& rng) {
    std::normal_distribution<double> n01(0.0, 1.0);
    return n01(rng);
}

// CN(0,1): unit-variance circularly symmetric complex Gaussian.
inline std::complex<double> randcn(Rng& rng) {
    std::normal_distribution<double> n(0.0, 1.0);
    const double re = n(rng);
    const double im = n(rng);
    return {re * M_SQRT1_2, im * M_SQRT1_2};
}

inline double rand_uniform(Rng& rng) {
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    return u01(rng);
}

}  // namespace rsma

#endif
