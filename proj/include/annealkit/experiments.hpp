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

#ifndef ANNEALKIT_EXPERIMENTS_HPP_
#define ANNEALKIT_EXPERIMENTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "annealkit/embedding.hpp"
#include "annealkit/lattice.hpp"
#include "annealkit/observables.hpp"
#include "annealkit/sampler.hpp"

namespace annealkit {

inline constexpr const char* kToolVersion = "annealkit 0.1.0";

// Flat key = value run configuration shared by all subcommands.  Unknown keys
// are rejected; every run echoes the resolved configuration to
// output_dir/config.txt so a run is reproducible from that file alone.
struct ExperimentConfig {
    int L = 20;
    double j1 = 1.0;
    BoundaryCondition boundary = BoundaryCondition::OBC;

    double ratio_min = 0.20;
    double ratio_max = 0.90;
    double ratio_step = 0.02;
    std::vector<double> ratios;  // overrides the range when non-empty

    int n_shots = 1000;
    SamplerKind sampler = SamplerKind::SA;
    int sweeps = 6000;
    double t_start = 2.0;
    double t_end = 0.01;
    double gamma_start = 3.0;
    double gamma_end = 0.01;
    int trotter_slices = 20;
    double slice_temperature = 0.05;
    bool random_site_order = false;

    int refine_rounds = 0;  // 0 disables constraint refinement
    int refine_shots = 1000;
    double lambda0 = 0.2;
    double lambda_decay = 0.5;

    bool embedded_mode = false;
    int pegasus_m = 16;
    double chain_strength = 0.0;  // 0 selects the default rule
    int embed_tries = 10;
    int embed_max_no_improve = 8;
    TiePolicy tie_policy = TiePolicy::Coin;

    std::vector<double> sq_ratios = {0.38, 0.46, 0.54};
    std::vector<double> hist_ratios = {0.26, 0.46, 0.78};
    int hist_shots = 10000;

    std::vector<int> census_L = {4, 6, 8, 10, 12};
    std::vector<BoundaryCondition> census_boundaries = {BoundaryCondition::OBC,
                                                        BoundaryCondition::PBC};
    int census_seeds = 10;

    double ratio = 0.46;  // single-point subcommands
    std::uint64_t seed = 1;
    std::string output_dir = "out";

    static ExperimentConfig from_stream(std::istream& in);
    static ExperimentConfig from_file(const std::string& path);

    void validate() const;
    std::vector<double> ratio_grid() const;
    AnnealSchedule schedule() const;
    LatticeSpec lattice_at(double ratio_value) const;
    void echo(std::ostream& out) const;
};

struct SweepRow {
    double ratio = 0.0;
    double M = 0.0;
    double E_per_site = 0.0;
    double chi = 0.0;
    int transition_flag = 0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    TransitionEstimate transition;
    std::vector<std::pair<double, std::string>> failures;
};

// Runs the coupling-ratio sweep.  Per-ratio shot batches are sharded under
// output_dir/shards; existing complete shards are reused unless force is set,
// and the final table is byte-identical either way.  Writes sweep.csv
// (ratio,M,E,chi,transition_flag) plus sweep_failures.csv when points fail.
SweepResult run_sweep(const ExperimentConfig& config, bool force);

struct SqMapEntry {
    double ratio = 0.0;
    StructureFactorGrid grid;
    std::pair<int, int> peak{0, 0};
};

struct SqMapResult {
    std::vector<SqMapEntry> entries;
    std::vector<std::pair<double, std::string>> failures;
};

// Structure-factor grids at config.sq_ratios, written as sq_<ratio>.csv.
SqMapResult run_sq_maps(const ExperimentConfig& config, bool force);

struct HistogramEntry {
    double ratio = 0.0;
    std::map<double, double> histogram;
    int modality = 0;  // M values with probability >= 0.02
};

struct HistogramResult {
    std::vector<HistogramEntry> entries;
    std::vector<std::pair<double, std::string>> failures;
};

// Magnetization histograms at config.hist_ratios with config.hist_shots
// shots each, written as hist_<ratio>.csv.
HistogramResult run_m_histograms(const ExperimentConfig& config, bool force);

struct ShotRunResult {
    ShotBatch batch;
    Observables observables;
};

// Single point at config.ratio: config.n_shots logical shots, through
// refinement and/or embedding when enabled, written as shots.csv.
ShotRunResult run_point_shots(const ExperimentConfig& config, bool force);

struct EmbedRunResult {
    Embedding embedding;
    ChainStats stats;
};

// Embeds the configured lattice (topology at config.L and config.boundary)
// into Pegasus P_m and writes embedding.txt plus chain_stats.csv.  Uses the
// same derived seed as embedded-mode sampling, so the written embedding is
// the one those runs sample through.  Throws on embedding failure.
EmbedRunResult run_embed(const ExperimentConfig& config);

struct CensusRow {
    int L = 0;
    BoundaryCondition boundary = BoundaryCondition::OBC;
    int seed_index = 0;
    int chain_size = 0;
    int count = 0;
};

struct CensusFailure {
    int L = 0;
    BoundaryCondition boundary = BoundaryCondition::OBC;
    int seed_index = 0;
    int unplaced = 0;
};

struct CensusResult {
    std::vector<CensusRow> rows;
    std::vector<CensusFailure> failures;
};

// Embeds every (L, boundary, seed) cell into the configured Pegasus graph and
// tabulates chain-size counts; failed cells are recorded, not fatal.  Writes
// census.csv and census_failures.csv.
CensusResult run_chain_census(const ExperimentConfig& config, bool force);

// Run metadata: tool version, command, seed and wall time, stored next to the
// config echo.
void write_manifest(const std::string& output_dir, const ExperimentConfig& config,
                    const std::string& command, double wall_seconds);

}  // namespace annealkit

#endif  // ANNEALKIT_EXPERIMENTS_HPP_
