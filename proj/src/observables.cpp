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

#include "annealkit/observables.hpp"

#include <cmath>
#include <complex>
#include <cstdlib>
#include <ostream>
#include <stdexcept>

#include "annealkit/text_io.hpp"

namespace annealkit {
namespace {

constexpr double kTwoPi = 6.283185307179586476925286766559;

std::vector<std::complex<double>> twiddle_table(int L) {
    std::vector<std::complex<double>> w(L);
    for (int k = 0; k < L; ++k) {
        const double phase = kTwoPi * k / L;
        w[k] = {std::cos(phase), std::sin(phase)};
    }
    return w;
}

// |F(q)|^2 of one configuration accumulated into grid, via a row transform
// followed by a column transform.
void accumulate_power(const SpinConfig& config, int L,
                      const std::vector<std::complex<double>>& w,
                      std::vector<std::complex<double>>& rows, std::vector<double>& grid) {
    for (int y = 0; y < L; ++y)
        for (int nx = 0; nx < L; ++nx) {
            std::complex<double> sum = 0.0;
            for (int x = 0; x < L; ++x)
                sum += static_cast<double>(config.spins[y * L + x]) * w[(x * nx) % L];
            rows[y * L + nx] = sum;
        }
    for (int ny = 0; ny < L; ++ny)
        for (int nx = 0; nx < L; ++nx) {
            std::complex<double> sum = 0.0;
            for (int y = 0; y < L; ++y) sum += rows[y * L + nx] * w[(y * ny) % L];
            grid[ny * L + nx] += std::norm(sum);
        }
}

}  // namespace

std::pair<int, int> StructureFactorGrid::argmax() const {
    std::pair<int, int> best{0, 0};
    for (int ny = 0; ny < L; ++ny)
        for (int nx = 0; nx < L; ++nx)
            if (value(nx, ny) > value(best.first, best.second)) best = {nx, ny};
    return best;
}

double magnetization(const SpinConfig& config) {
    if (config.spins.empty()) return 0.0;
    long sum = 0;
    for (std::int8_t s : config.spins) sum += s;
    return std::abs(sum) / static_cast<double>(config.spins.size());
}

double susceptibility(const ShotBatch& batch, bool volume_scaled) {
    if (batch.n_shots() < 2)
        throw std::invalid_argument("susceptibility needs at least two shots");
    double mean = 0.0;
    double mean_sq = 0.0;
    for (const Shot& shot : batch.shots) {
        const double m = magnetization(shot.config);
        mean += m;
        mean_sq += m * m;
    }
    mean /= batch.n_shots();
    mean_sq /= batch.n_shots();
    double chi = std::abs(mean_sq - mean * mean);
    if (volume_scaled) chi *= static_cast<double>(batch.shots.front().config.spins.size());
    return chi;
}

StructureFactorGrid structure_factor(const SpinConfig& config, int L) {
    if (config.size() != L * L)
        throw std::invalid_argument("configuration does not match an L x L lattice");
    StructureFactorGrid grid;
    grid.L = L;
    grid.values.assign(static_cast<std::size_t>(L) * L, 0.0);
    const auto w = twiddle_table(L);
    std::vector<std::complex<double>> rows(static_cast<std::size_t>(L) * L);
    accumulate_power(config, L, w, rows, grid.values);
    for (double& v : grid.values) v /= L * L;
    return grid;
}

StructureFactorGrid structure_factor(const ShotBatch& batch, int L) {
    if (batch.n_shots() < 1) throw std::invalid_argument("structure_factor needs shots");
    StructureFactorGrid grid;
    grid.L = L;
    grid.values.assign(static_cast<std::size_t>(L) * L, 0.0);
    const auto w = twiddle_table(L);
    std::vector<std::complex<double>> rows(static_cast<std::size_t>(L) * L);
    for (const Shot& shot : batch.shots) {
        if (shot.config.size() != L * L)
            throw std::invalid_argument("configuration does not match an L x L lattice");
        accumulate_power(shot.config, L, w, rows, grid.values);
    }
    const double norm = static_cast<double>(L) * L * batch.n_shots();
    for (double& v : grid.values) v /= norm;
    return grid;
}

std::map<double, double> m_histogram(const ShotBatch& batch, int bins) {
    if (batch.n_shots() < 1) throw std::invalid_argument("m_histogram needs shots");
    if (bins < 0) throw std::invalid_argument("bins must be non-negative");
    std::map<double, double> histogram;
    const double weight = 1.0 / batch.n_shots();
    for (const Shot& shot : batch.shots) {
        const double m = magnetization(shot.config);
        double key = m;
        if (bins > 0) {
            const int b = std::min(bins - 1, static_cast<int>(m * bins));
            key = (b + 0.5) / bins;
        }
        histogram[key] += weight;
    }
    return histogram;
}

Observables compute_observables(const ProblemGraph& graph, const ShotBatch& batch,
                                bool with_structure_factor) {
    if (batch.n_shots() < 1) throw std::invalid_argument("compute_observables needs shots");
    Observables obs;
    for (const Shot& shot : batch.shots) {
        obs.M += magnetization(shot.config);
        obs.E_per_site += shot.energy;
    }
    obs.M /= batch.n_shots();
    obs.E_per_site /= static_cast<double>(batch.n_shots()) * graph.n_sites();
    obs.chi = batch.n_shots() >= 2 ? susceptibility(batch) : 0.0;
    obs.m_hist = m_histogram(batch);
    if (with_structure_factor && graph.lattice_length() > 0)
        obs.sq = structure_factor(batch, graph.lattice_length());
    return obs;
}

TransitionEstimate detect_transition(const std::vector<std::pair<double, Observables>>& results) {
    if (results.size() < 2) throw std::invalid_argument("detect_transition needs at least two points");
    for (std::size_t i = 1; i < results.size(); ++i)
        if (!(results[i - 1].first < results[i].first))
            throw std::invalid_argument("sweep points must be sorted by ratio");

    TransitionEstimate est;
    std::size_t peak = 0;
    for (std::size_t i = 1; i < results.size(); ++i)
        if (results[i].second.chi > results[peak].second.chi) peak = i;
    est.chi_peak_ratio = results[peak].first;

    for (std::size_t i = 0; i + 1 < results.size(); ++i) {
        const double m0 = results[i].second.M;
        const double m1 = results[i + 1].second.M;
        if (m0 >= 0.5 && m1 < 0.5) {
            const double t = (m0 - 0.5) / (m0 - m1);
            est.critical_ratio =
                results[i].first + t * (results[i + 1].first - results[i].first);
            est.crossing_index = static_cast<int>(i);
            break;
        }
    }
    return est;
}

void write_sq_csv(std::ostream& out, const StructureFactorGrid& grid) {
    out << "nx,ny,value\n";
    for (int ny = 0; ny < grid.L; ++ny)
        for (int nx = 0; nx < grid.L; ++nx)
            out << nx << ',' << ny << ',' << format_double(grid.value(nx, ny)) << '\n';
}

void write_histogram_csv(std::ostream& out, const std::map<double, double>& histogram) {
    out << "M,probability\n";
    for (const auto& [m, p] : histogram) out << format_double(m) << ',' << format_double(p) << '\n';
}

}  // namespace annealkit
