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

#ifndef ANNEALKIT_OBSERVABLES_HPP_
#define ANNEALKIT_OBSERVABLES_HPP_

#include <iosfwd>
#include <map>
#include <optional>
#include <utility>
#include <vector>

#include "annealkit/lattice.hpp"
#include "annealkit/sampler.hpp"

namespace annealkit {

// Structure factor on the discrete reciprocal grid of the L x L torus:
// value(nx, ny) is S(q) at q = (2 pi nx / L, 2 pi ny / L).  Normalized so a
// perfectly ordered configuration peaks at L^2 and the grid sums to L^2 per
// shot (Parseval).
struct StructureFactorGrid {
    int L = 0;
    std::vector<double> values;

    double value(int nx, int ny) const { return values[ny * L + nx]; }
    double& value(int nx, int ny) { return values[ny * L + nx]; }

    // Grid point with the largest value; ties go to the first point in
    // row-major scan order (smallest ny, then smallest nx).
    std::pair<int, int> argmax() const;
};

// |sum of spins| / n, in [0, 1].
double magnetization(const SpinConfig& config);

// |<M^2> - <M>^2| over the batch's shots.  volume_scaled multiplies by the
// site count for the usual extensive convention.
double susceptibility(const ShotBatch& batch, bool volume_scaled = false);

// Row-column discrete transform, O(L^3) per configuration.
StructureFactorGrid structure_factor(const SpinConfig& config, int L);

// Shot average of the per-configuration grids.
StructureFactorGrid structure_factor(const ShotBatch& batch, int L);

// Probability of each observed magnetization value.  bins = 0 keys by the
// exact per-shot M; bins > 0 pools into uniform bins over [0, 1] keyed by bin
// center.  Probabilities sum to 1.
std::map<double, double> m_histogram(const ShotBatch& batch, int bins = 0);

struct Observables {
    double M = 0.0;
    double E_per_site = 0.0;
    double chi = 0.0;
    std::map<double, double> m_hist;
    StructureFactorGrid sq;
};

// M, energy per site, susceptibility, exact histogram and (optionally) the
// structure-factor grid for one batch.
Observables compute_observables(const ProblemGraph& graph, const ShotBatch& batch,
                                bool with_structure_factor = true);

struct TransitionEstimate {
    std::optional<double> critical_ratio;
    double chi_peak_ratio = 0.0;
    int crossing_index = -1;
};

// Scans (ratio, Observables) points sorted by ratio for the first downward
// crossing of M through 0.5 and interpolates the crossing ratio linearly;
// also reports the ratio maximizing chi.  No crossing leaves critical_ratio
// empty.
TransitionEstimate detect_transition(const std::vector<std::pair<double, Observables>>& results);

// CSV emitters: "nx,ny,value" and "M,probability".
void write_sq_csv(std::ostream& out, const StructureFactorGrid& grid);
void write_histogram_csv(std::ostream& out, const std::map<double, double>& histogram);

}  // namespace annealkit

#endif  // ANNEALKIT_OBSERVABLES_HPP_
