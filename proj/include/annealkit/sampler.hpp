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

#ifndef ANNEALKIT_SAMPLER_HPP_
#define ANNEALKIT_SAMPLER_HPP_

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "annealkit/lattice.hpp"

namespace annealkit {

enum class SamplerKind { SA, SQA };

const char* to_string(SamplerKind kind);
SamplerKind sampler_from_string(const std::string& text);

// Anneal parameters for both samplers.  SA reads sweeps/t_start/t_end; SQA
// additionally reads the transverse-field ramp, slice count and slice
// temperature.  sweeps = 0 is allowed and returns the initial random
// configuration untouched.
struct AnnealSchedule {
    SamplerKind kind = SamplerKind::SA;
    int sweeps = 6000;
    double t_start = 2.0;
    double t_end = 0.01;
    double gamma_start = 3.0;
    double gamma_end = 0.01;
    int trotter_slices = 20;
    double slice_temperature = 0.05;
    bool random_site_order = false;

    void validate() const;
};

struct Shot {
    SpinConfig config;
    double energy = 0.0;
    int broken_chains = 0;
};

struct ShotBatch {
    std::vector<Shot> shots;
    std::uint64_t seed = 0;

    int n_shots() const { return static_cast<int>(shots.size()); }
};

// Classical simulated annealing: Metropolis single-spin-flip sweeps with
// geometric temperature decay from t_start to t_end.  Site visit order is
// sequential unless random_site_order is set; zero-cost flips are accepted
// with probability 0.9 so the fixed scan stays ergodic on degenerate
// problems while domain walls keep most of their mobility.  Deterministic
// per seed.
SpinConfig sa_shot(const ProblemGraph& graph, const AnnealSchedule& schedule, std::uint64_t seed);

// Simulated quantum annealing via the standard path-integral mapping:
// trotter_slices replicas coupled along imaginary time with
// J_perp = -(P T_q / 2) ln tanh(Gamma / (P T_q)), Gamma decayed geometrically.
// The tanh argument is clamped to [1e-12, 18] so J_perp stays finite for any
// Gamma >= 0.  Sweeps mix per-slice Metropolis moves with all-slice flips of
// one site, so the locked Gamma -> 0 limit reduces to SA at T_q.  Returns the
// lowest-energy slice.  Deterministic per seed.
SpinConfig sqa_shot(const ProblemGraph& graph, const AnnealSchedule& schedule, std::uint64_t seed);

// n_shots independent anneals; shot i runs on derive_seed(seed, i), so batch
// content does not depend on worker count or execution order.  Stored shot
// energies are coupling-only (fields excluded), even for biased graphs.
ShotBatch run_shots(const ProblemGraph& graph, const AnnealSchedule& schedule, int n_shots,
                    std::uint64_t seed);

// Trace of the iterative constraint refinement: per-site bias g, the best
// configuration and coupling-only energy seen so far, and the bias magnitude
// lambda after decay.  energy_history records best_energy after each round.
struct RefinementState {
    int round = 0;
    std::vector<double> g;
    SpinConfig best_config;
    double best_energy = 0.0;
    double lambda = 0.0;
    std::vector<double> energy_history;
};

// Shot-based search with an auxiliary linear bias: round 0 draws g(i) uniform
// in [-lambda0, lambda0]; each later round biases toward the incumbent best
// configuration via g(i) = -lambda * best(i) with lambda shrunk by decay, and
// stops early once best_energy has not improved for two consecutive rounds.
// Round r samples with base seed derive_seed(seed, r).  Returns the final
// state and the last round's batch.
std::pair<RefinementState, ShotBatch> refine_constraints(const ProblemGraph& graph,
                                                         const AnnealSchedule& schedule, int rounds,
                                                         int shots_per_round, double lambda0,
                                                         double decay, std::uint64_t seed);

// Generic form of the loop above for callers that sample through extra
// machinery (for example an embedded target).  sample(g, round) must return a
// batch whose energies are the coupling-only objective used for incumbent
// selection; g holds the current per-site bias (all zero when unbiased).
std::pair<RefinementState, ShotBatch> refine_constraints(
    int n_sites, const std::function<ShotBatch(const std::vector<double>&, int)>& sample, int rounds,
    double lambda0, double decay, std::uint64_t seed);

// What to do with a chain whose qubits split exactly evenly.
enum class TiePolicy { Coin, Discard };

struct ResolvedShot {
    SpinConfig config;
    int broken_chains = 0;
    bool discarded = false;
};

// Majority-vote unembedding: chains[c] lists the indices into embedded_config
// that represent logical variable c.  A chain is broken when its spins
// disagree; exact ties fall to a fair coin derived from (seed, c), or mark
// the shot discarded under TiePolicy::Discard.
ResolvedShot resolve_chains(const SpinConfig& embedded_config,
                            const std::vector<std::vector<int>>& chains, std::uint64_t seed,
                            TiePolicy policy = TiePolicy::Coin);

// Resolves every shot of a batch sampled on an embedded graph back to logical
// variables, recomputing energies on the source graph.  Shot i uses tie seed
// derive_seed(seed, i); discarded shots are dropped from the output.
ShotBatch resolve_batch(const ShotBatch& embedded_batch,
                        const std::vector<std::vector<int>>& chains, const ProblemGraph& source,
                        std::uint64_t seed, TiePolicy policy = TiePolicy::Coin);

// Fraction of (shot, chain) pairs broken, keyed by chain size.
std::map<int, double> chain_break_rate(const ShotBatch& embedded_batch,
                                       const std::vector<std::vector<int>>& chains);

// CSV "shot,energy,M,broken_chains" with an optional trailing spins column
// (+/- characters in site order).  Reading restores configurations only when
// the spins column is present.
void write_shot_csv(std::ostream& out, const ShotBatch& batch, bool include_spins = true);
ShotBatch read_shot_csv(std::istream& in);

}  // namespace annealkit

#endif  // ANNEALKIT_SAMPLER_HPP_
