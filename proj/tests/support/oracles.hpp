// Copyright 2026 The Annealkit Authors
//
//    Licensed under the Apache License, Version 2.0 (the "License");
//    you may not use this file except in compliance with the License.
//    You may obtain a copy of the License at
//
//        http://www.apache.org/licenses/LICENSE-2.0
//
//    Unless required by applicable law or agreed to in writing, software
//    distributed under the License is distributed on an "AS IS" BASIS,
//    WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
//    See the License for the specific language governing permissions and
//    limitations under the License.

#ifndef ANNEALKIT_TESTS_SUPPORT_ORACLES_HPP_
#define ANNEALKIT_TESTS_SUPPORT_ORACLES_HPP_

// Independent reference results computed the slow, obvious way.

#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

#include "annealkit/lattice.hpp"

namespace annealkit::testing {

// Minimum coupling-only energy over all 2^n configurations.
inline std::pair<double, SpinConfig> brute_force_ground_state(const ProblemGraph& graph) {
    const int n = graph.n_sites();
    if (n < 1 || n > 25) throw std::logic_error("brute force supports 1..25 spins");
    double best = std::numeric_limits<double>::infinity();
    SpinConfig config;
    config.spins.assign(n, -1);
    SpinConfig best_config = config;
    const std::uint64_t total = std::uint64_t{1} << n;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (int i = 0; i < n; ++i)
            config.spins[i] = ((mask >> i) & 1u) ? std::int8_t{1} : std::int8_t{-1};
        const double e = energy(graph, config);
        if (e < best) {
            best = e;
            best_config = config;
        }
    }
    return {best, best_config};
}

// Exact Boltzmann mass per energy value at the given temperature, pooled over
// all 2^n states.  Valid only when equal energies compare equal in doubles
// (integer and half-integer couplings).
inline std::map<double, double> boltzmann_energy_distribution(const ProblemGraph& graph,
                                                              double temperature) {
    const int n = graph.n_sites();
    if (n < 1 || n > 20) throw std::logic_error("enumeration supports 1..20 spins");
    if (!(temperature > 0.0)) throw std::invalid_argument("temperature must be positive");
    SpinConfig config;
    config.spins.assign(n, -1);
    const std::uint64_t total = std::uint64_t{1} << n;
    std::vector<double> energies;
    energies.reserve(total);
    double min_energy = std::numeric_limits<double>::infinity();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (int i = 0; i < n; ++i)
            config.spins[i] = ((mask >> i) & 1u) ? std::int8_t{1} : std::int8_t{-1};
        const double e = energy(graph, config);
        energies.push_back(e);
        min_energy = std::min(min_energy, e);
    }
    std::map<double, double> mass;
    double z = 0.0;
    for (const double e : energies) {
        const double w = std::exp(-(e - min_energy) / temperature);
        mass[e] += w;
        z += w;
    }
    for (auto& [e, w] : mass) {
        (void)e;
        w /= z;
    }
    return mass;
}

// Regularized upper incomplete gamma Q(a, x), series for x < a + 1 and a
// modified Lentz continued fraction otherwise.
inline double gamma_q(double a, double x) {
    if (!(a > 0.0) || x < 0.0) throw std::invalid_argument("gamma_q domain");
    if (x == 0.0) return 1.0;
    const double log_gamma = std::lgamma(a);
    if (x < a + 1.0) {
        double ap = a;
        double term = 1.0 / a;
        double sum = term;
        for (int i = 0; i < 500; ++i) {
            ap += 1.0;
            term *= x / ap;
            sum += term;
            if (std::abs(term) < std::abs(sum) * 1e-15) break;
        }
        return 1.0 - sum * std::exp(-x + a * std::log(x) - log_gamma);
    }
    const double tiny = 1e-300;
    double b = x + 1.0 - a;
    double c = 1.0 / tiny;
    double d = 1.0 / b;
    double h = d;
    for (int i = 1; i <= 500; ++i) {
        const double an = -static_cast<double>(i) * (i - a);
        b += 2.0;
        d = an * d + b;
        if (std::abs(d) < tiny) d = tiny;
        c = b + an / c;
        if (std::abs(c) < tiny) c = tiny;
        d = 1.0 / d;
        const double delta = d * c;
        h *= delta;
        if (std::abs(delta - 1.0) < 1e-15) break;
    }
    return std::exp(-x + a * std::log(x) - log_gamma) * h;
}

// Upper-tail p-value of a chi-square statistic.
inline double chi_square_p_value(double statistic, int dof) {
    if (dof < 1) throw std::invalid_argument("dof must be positive");
    if (statistic < 0.0) return 1.0;
    return gamma_q(dof / 2.0, statistic / 2.0);
}

// Literal |sum_j s_j e^{i q r_j}|^2 / L^2 at q = 2 pi (nx, ny) / L.
inline double structure_factor_oracle(const SpinConfig& config, int L, int nx, int ny) {
    const double two_pi = 2.0 * 3.14159265358979323846;
    double re = 0.0;
    double im = 0.0;
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            const double s = config.spins[y * L + x];
            const double phase =
                two_pi * (static_cast<double>(nx) * x + static_cast<double>(ny) * y) / L;
            re += s * std::cos(phase);
            im += s * std::sin(phase);
        }
    }
    return (re * re + im * im) / (static_cast<double>(L) * L);
}

}  // namespace annealkit::testing

#endif  // ANNEALKIT_TESTS_SUPPORT_ORACLES_HPP_
