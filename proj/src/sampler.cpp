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

#include "annealkit/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <istream>
#include <limits>
#include <ostream>
#include <stdexcept>
#include <string_view>

#include "annealkit/parallel.hpp"
#include "annealkit/rng.hpp"
#include "annealkit/text_io.hpp"

namespace annealkit {
namespace {

// Moves costing more than this many units of temperature are rejected without
// evaluating exp; their acceptance probability is below 1e-19.
constexpr double kMaxExpArg = 44.0;

// Seed stream reserved for the refinement bias draw, far above any round index.
constexpr std::uint64_t kBiasStream = 0x8000000000000000ULL;

double sweep_value(double start, double end, int sweep, int sweeps) {
    if (sweeps <= 1) return start;
    return start * std::pow(end / start, sweep / (sweeps - 1.0));
}

void random_spins(SpinConfig& config, int n, Xoshiro256& rng) {
    config.spins.resize(n);
    for (auto& s : config.spins) s = rng.spin();
}

void shuffle_sites(std::vector<int>& sites, Xoshiro256& rng) {
    for (std::size_t i = sites.size(); i > 1; --i)
        std::swap(sites[i - 1], sites[rng.uniform_below(i)]);
}

double local_field(const ProblemGraph& graph, const std::int8_t* spins, int site) {
    double f = graph.fields()[site];
    const int* nbr = graph.neighbors_of(site);
    const double* cpl = graph.couplings_of(site);
    for (int k = 0; k < graph.degree(site); ++k) f += cpl[k] * spins[nbr[k]];
    return f;
}

// Flips spins[site] and keeps the cached local fields of its neighbors
// consistent.
void flip_spin(const ProblemGraph& graph, std::int8_t* spins, double* field, int site) {
    spins[site] = static_cast<std::int8_t>(-spins[site]);
    const double twice = 2.0 * spins[site];
    const int* nbr = graph.neighbors_of(site);
    const double* cpl = graph.couplings_of(site);
    for (int k = 0; k < graph.degree(site); ++k) field[nbr[k]] += twice * cpl[k];
}

// Metropolis acceptance with symmetric tie breaking: downhill always, uphill
// with exp(-delta/t), zero-cost moves with probability kTieAccept.  Accepting
// every tie would leave the fixed site scan with deterministic orbits of
// equal-energy states that never mix (degenerate lattices have closed
// two-sweep cycles), so any acceptance strictly below one is what makes the
// sweep chain irreducible; detailed balance is unaffected because the tie
// rule is symmetric.  The value stays close to one because zero-cost flips
// are domain-wall moves, and their mobility controls how well a finite
// schedule orders large lattices.
constexpr double kTieAccept = 0.9;

bool metropolis_accept(double delta, double inv_t, Xoshiro256& rng) {
    if (delta < 0.0) return true;
    if (delta == 0.0) return rng.uniform() < kTieAccept;
    const double x = delta * inv_t;
    return x <= kMaxExpArg && rng.uniform() < std::exp(-x);
}

}  // namespace

const char* to_string(SamplerKind kind) {
    return kind == SamplerKind::SA ? "SA" : "SQA";
}

SamplerKind sampler_from_string(const std::string& text) {
    if (text == "SA") return SamplerKind::SA;
    if (text == "SQA") return SamplerKind::SQA;
    throw std::invalid_argument("unknown sampler kind: " + text);
}

void AnnealSchedule::validate() const {
    if (sweeps < 0) throw std::invalid_argument("sweeps must be non-negative");
    if (kind == SamplerKind::SA) {
        if (!(t_start >= t_end) || !(t_end > 0.0))
            throw std::invalid_argument("SA schedule requires t_start >= t_end > 0");
    } else {
        if (!(gamma_start >= gamma_end) || !(gamma_end >= 0.0))
            throw std::invalid_argument("SQA schedule requires gamma_start >= gamma_end >= 0");
        if (trotter_slices < 2) throw std::invalid_argument("SQA requires at least 2 slices");
        if (!(slice_temperature > 0.0))
            throw std::invalid_argument("slice_temperature must be positive");
    }
}

SpinConfig sa_shot(const ProblemGraph& graph, const AnnealSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    if (schedule.kind != SamplerKind::SA) throw std::invalid_argument("sa_shot needs an SA schedule");

    Xoshiro256 rng(seed);
    const int n = graph.n_sites();
    SpinConfig config;
    random_spins(config, n, rng);
    if (schedule.sweeps == 0 || n == 0) return config;

    std::vector<double> field(n);
    for (int i = 0; i < n; ++i) field[i] = local_field(graph, config.spins.data(), i);
    std::vector<int> visit(n);
    for (int i = 0; i < n; ++i) visit[i] = i;

    for (int sweep = 0; sweep < schedule.sweeps; ++sweep) {
        const double inv_t = 1.0 / sweep_value(schedule.t_start, schedule.t_end, sweep, schedule.sweeps);
        if (schedule.random_site_order) shuffle_sites(visit, rng);
        for (int site : visit) {
            const double delta = -2.0 * config.spins[site] * field[site];
            if (metropolis_accept(delta, inv_t, rng))
                flip_spin(graph, config.spins.data(), field.data(), site);
        }
    }
    return config;
}

SpinConfig sqa_shot(const ProblemGraph& graph, const AnnealSchedule& schedule, std::uint64_t seed) {
    schedule.validate();
    if (schedule.kind != SamplerKind::SQA)
        throw std::invalid_argument("sqa_shot needs an SQA schedule");

    Xoshiro256 rng(seed);
    const int n = graph.n_sites();
    const int slices = schedule.trotter_slices;
    const double pt = slices * schedule.slice_temperature;
    const double inv_pt = 1.0 / pt;

    std::vector<std::int8_t> spins(static_cast<std::size_t>(slices) * n);
    for (auto& s : spins) s = rng.spin();
    std::vector<double> field(spins.size());
    for (int p = 0; p < slices; ++p)
        for (int i = 0; i < n; ++i)
            field[p * n + i] = local_field(graph, spins.data() + p * n, i);

    std::vector<int> visit(n);
    for (int i = 0; i < n; ++i) visit[i] = i;

    for (int sweep = 0; sweep < schedule.sweeps && n > 0; ++sweep) {
        const double gamma =
            sweep_value(std::max(schedule.gamma_start, 1e-12), std::max(schedule.gamma_end, 1e-12),
                        sweep, schedule.sweeps);
        const double arg = std::clamp(gamma * inv_pt, 1e-12, 18.0);
        const double j_perp = -(pt / 2.0) * std::log(std::tanh(arg));

        for (int p = 0; p < slices; ++p) {
            const int up = (p + 1 == slices) ? 0 : p + 1;
            const int dn = (p == 0) ? slices - 1 : p - 1;
            std::int8_t* slice = spins.data() + p * n;
            double* slice_field = field.data() + p * n;
            if (schedule.random_site_order) shuffle_sites(visit, rng);
            for (int site : visit) {
                const double ring = spins[up * n + site] + spins[dn * n + site];
                const double delta =
                    -2.0 * slice[site] * slice_field[site] + 2.0 * j_perp * slice[site] * ring;
                if (metropolis_accept(delta, inv_pt, rng))
                    flip_spin(graph, slice, slice_field, site);
            }
        }

        // All-slice flips keep the dynamics ergodic once j_perp has locked the
        // replicas together; the imaginary-time coupling cancels exactly.
        for (int site = 0; site < n; ++site) {
            double delta = 0.0;
            for (int p = 0; p < slices; ++p) delta += -2.0 * spins[p * n + site] * field[p * n + site];
            if (!metropolis_accept(delta, inv_pt, rng)) continue;
            for (int p = 0; p < slices; ++p)
                flip_spin(graph, spins.data() + p * n, field.data() + p * n, site);
        }
    }

    SpinConfig best;
    double best_energy = std::numeric_limits<double>::infinity();
    SpinConfig candidate;
    candidate.spins.resize(n);
    for (int p = 0; p < slices; ++p) {
        std::copy(spins.begin() + p * n, spins.begin() + (p + 1) * n, candidate.spins.begin());
        const double e = energy(graph, candidate, graph.has_fields());
        if (e < best_energy) {
            best_energy = e;
            best = candidate;
        }
    }
    return best;
}

ShotBatch run_shots(const ProblemGraph& graph, const AnnealSchedule& schedule, int n_shots,
                    std::uint64_t seed) {
    if (n_shots < 1) throw std::invalid_argument("n_shots must be at least 1");
    schedule.validate();

    ShotBatch batch;
    batch.seed = seed;
    batch.shots.resize(n_shots);
    parallel_for(n_shots, default_workers(), [&](std::size_t i) {
        const std::uint64_t shot_seed = derive_seed(seed, i);
        SpinConfig config = schedule.kind == SamplerKind::SA ? sa_shot(graph, schedule, shot_seed)
                                                             : sqa_shot(graph, schedule, shot_seed);
        const double e = energy(graph, config);
        batch.shots[i] = Shot{std::move(config), e, 0};
    });
    return batch;
}

std::pair<RefinementState, ShotBatch> refine_constraints(
    int n_sites, const std::function<ShotBatch(const std::vector<double>&, int)>& sample, int rounds,
    double lambda0, double decay, std::uint64_t seed) {
    if (n_sites < 1) throw std::invalid_argument("n_sites must be at least 1");
    if (rounds < 1) throw std::invalid_argument("rounds must be at least 1");
    if (lambda0 < 0.0) throw std::invalid_argument("lambda0 must be non-negative");
    if (!(decay > 0.0 && decay <= 1.0)) throw std::invalid_argument("decay must be in (0, 1]");

    RefinementState state;
    state.lambda = lambda0;
    state.g.assign(n_sites, 0.0);
    if (lambda0 > 0.0) {
        Xoshiro256 rng(derive_seed(seed, kBiasStream));
        for (double& g : state.g) g = lambda0 * (2.0 * rng.uniform() - 1.0);
    }

    ShotBatch last;
    double best_energy = std::numeric_limits<double>::infinity();
    SpinConfig best_config;
    int unimproved = 0;
    int completed = 0;

    for (int round = 0; round < rounds; ++round) {
        last = sample(state.g, round);
        completed = round + 1;

        bool improved = false;
        for (const Shot& shot : last.shots) {
            if (shot.energy < best_energy) {
                best_energy = shot.energy;
                best_config = shot.config;
                improved = true;
            }
        }
        state.energy_history.push_back(best_energy);
        unimproved = improved ? 0 : unimproved + 1;
        if (unimproved >= 2) break;

        for (int i = 0; i < n_sites; ++i) state.g[i] = -state.lambda * best_config.spins[i];
        state.lambda *= decay;
    }

    state.round = completed;
    state.best_energy = best_energy;
    state.best_config = std::move(best_config);
    return {std::move(state), std::move(last)};
}

std::pair<RefinementState, ShotBatch> refine_constraints(const ProblemGraph& graph,
                                                         const AnnealSchedule& schedule, int rounds,
                                                         int shots_per_round, double lambda0,
                                                         double decay, std::uint64_t seed) {
    if (shots_per_round < 1) throw std::invalid_argument("shots_per_round must be at least 1");
    auto sample = [&](const std::vector<double>& g, int round) {
        const bool biased = std::any_of(g.begin(), g.end(), [](double b) { return b != 0.0; });
        const ProblemGraph& base = graph;
        return run_shots(biased ? base.with_fields(g) : base, schedule, shots_per_round,
                         derive_seed(seed, round));
    };
    return refine_constraints(graph.n_sites(), sample, rounds, lambda0, decay, seed);
}

ResolvedShot resolve_chains(const SpinConfig& embedded_config,
                            const std::vector<std::vector<int>>& chains, std::uint64_t seed,
                            TiePolicy policy) {
    ResolvedShot out;
    out.config.spins.resize(chains.size());
    for (std::size_t c = 0; c < chains.size(); ++c) {
        const auto& chain = chains[c];
        if (chain.empty()) throw std::invalid_argument("empty chain in resolve_chains");
        int sum = 0;
        for (int q : chain) {
            if (q < 0 || q >= embedded_config.size())
                throw std::out_of_range("chain references spin outside the configuration");
            sum += embedded_config.spins[q];
        }
        if (std::abs(sum) != static_cast<int>(chain.size())) ++out.broken_chains;
        std::int8_t spin;
        if (sum > 0) {
            spin = 1;
        } else if (sum < 0) {
            spin = -1;
        } else if (policy == TiePolicy::Discard) {
            out.discarded = true;
            spin = 1;
        } else {
            spin = (derive_seed(seed, c) & 1) ? std::int8_t{1} : std::int8_t{-1};
        }
        out.config.spins[c] = spin;
    }
    return out;
}

ShotBatch resolve_batch(const ShotBatch& embedded_batch,
                        const std::vector<std::vector<int>>& chains, const ProblemGraph& source,
                        std::uint64_t seed, TiePolicy policy) {
    ShotBatch logical;
    logical.seed = seed;
    logical.shots.reserve(embedded_batch.shots.size());
    for (std::size_t i = 0; i < embedded_batch.shots.size(); ++i) {
        ResolvedShot resolved =
            resolve_chains(embedded_batch.shots[i].config, chains, derive_seed(seed, i), policy);
        if (resolved.discarded) continue;
        const double e = energy(source, resolved.config);
        logical.shots.push_back(Shot{std::move(resolved.config), e, resolved.broken_chains});
    }
    return logical;
}

std::map<int, double> chain_break_rate(const ShotBatch& embedded_batch,
                                       const std::vector<std::vector<int>>& chains) {
    std::map<int, long> broken;
    std::map<int, long> total;
    for (const Shot& shot : embedded_batch.shots) {
        for (const auto& chain : chains) {
            const int size = static_cast<int>(chain.size());
            int sum = 0;
            for (int q : chain) sum += shot.config.spins[q];
            ++total[size];
            if (std::abs(sum) != size) ++broken[size];
        }
    }
    std::map<int, double> rate;
    for (const auto& [size, count] : total)
        rate[size] = static_cast<double>(broken[size]) / static_cast<double>(count);
    return rate;
}

void write_shot_csv(std::ostream& out, const ShotBatch& batch, bool include_spins) {
    out << "shot,energy,M,broken_chains";
    if (include_spins) out << ",spins";
    out << '\n';
    for (std::size_t i = 0; i < batch.shots.size(); ++i) {
        const Shot& shot = batch.shots[i];
        long sum = 0;
        for (std::int8_t s : shot.config.spins) sum += s;
        const double m = shot.config.spins.empty()
                             ? 0.0
                             : std::abs(sum) / static_cast<double>(shot.config.spins.size());
        out << i << ',' << format_double(shot.energy) << ',' << format_double(m) << ','
            << shot.broken_chains;
        if (include_spins) {
            out << ',';
            for (std::int8_t s : shot.config.spins) out << (s > 0 ? '+' : '-');
        }
        out << '\n';
    }
}

ShotBatch read_shot_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::invalid_argument("empty shot CSV");
    const std::string_view header = trim(line);
    bool with_spins;
    if (header == "shot,energy,M,broken_chains,spins") {
        with_spins = true;
    } else if (header == "shot,energy,M,broken_chains") {
        with_spins = false;
    } else {
        throw std::invalid_argument("unrecognized shot CSV header: " + line);
    }

    ShotBatch batch;
    while (std::getline(in, line)) {
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto fields = split(text, ',');
        if (fields.size() != (with_spins ? 5u : 4u))
            throw std::invalid_argument("malformed shot CSV row: " + line);
        Shot shot;
        shot.energy = parse_double(fields[1]);
        shot.broken_chains = parse_int(fields[3]);
        if (with_spins) {
            shot.config.spins.reserve(fields[4].size());
            for (char c : fields[4]) {
                if (c != '+' && c != '-') throw std::invalid_argument("bad spin character in: " + line);
                shot.config.spins.push_back(c == '+' ? std::int8_t{1} : std::int8_t{-1});
            }
        }
        batch.shots.push_back(std::move(shot));
    }
    return batch;
}

}  // namespace annealkit
