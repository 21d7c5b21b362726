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

#ifndef ANNEALKIT_EMBEDDING_HPP_
#define ANNEALKIT_EMBEDDING_HPP_

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "annealkit/lattice.hpp"
#include "annealkit/pegasus.hpp"

namespace annealkit {

// Minor embedding of a logical problem into a Pegasus graph: chain[i] is the
// set of physical qubits representing logical site i.  A valid embedding has
// pairwise disjoint chains, each chain connected in the target graph, and at
// least one physical coupler between chain(a) and chain(b) for every logical
// bond (a, b).
struct Embedding {
    std::vector<std::vector<int>> chains;
    double chain_strength = 0.0;
};

struct ChainStats {
    std::map<int, int> counts;
    int max_chain = 0;
    long total_qubits = 0;
};

struct EmbedParams {
    int tries = 10;
    int max_no_improve = 8;
    std::uint64_t seed = 0;
};

// Failure is a value: unplaced_sites reports the best attempt's shortfall.
struct EmbedResult {
    std::optional<Embedding> embedding;
    int unplaced_sites = 0;

    bool ok() const { return embedding.has_value(); }
};

struct VerifyReport {
    bool ok = true;
    std::string message;
};

// Iterative heuristic embedder: chains are routed between already-placed
// neighbors along vertex-weighted shortest paths, with qubit weights inflated
// exponentially by occupancy; improvement passes re-route one chain at a time
// until (shared qubits, max chain size, total qubits) stops improving.  Every
// returned embedding has passed verify_embedding.  Deterministic per seed.
EmbedResult find_embedding(const ProblemGraph& source, const PegasusGraph& target,
                           const EmbedParams& params);

// Checks the three embedding invariants in order (disjointness, connectivity,
// bond coverage) and reports the first violation found.
VerifyReport verify_embedding(const ProblemGraph& source, const PegasusGraph& target,
                              const Embedding& emb);

// Histogram of chain sizes: counts[N] = number of logical sites whose chain
// uses N qubits.
ChainStats chain_stats(const Embedding& emb);

// 1.5 x the largest per-site sum of |coupling|, the usual rule of thumb that
// keeps chains intact without drowning out the problem couplings.
double default_chain_strength(const ProblemGraph& source);

// Physical problem produced by embed_problem.  Nodes are the used qubits
// relabelled compactly (0..n_used-1, ascending Pegasus index order);
// node_to_qubit maps back and chains are expressed in compact node ids so
// sampler output can be resolved chain by chain.
struct EmbeddedProblem {
    ProblemGraph graph;
    std::vector<std::vector<int>> chains;
    std::vector<int> node_to_qubit;
};

// Builds the physical problem: every target coupler inside a chain gets
// coupling -chain_strength, each logical bond is placed on the
// lexicographically smallest coupler between the two chains, and each logical
// field is split equally across its chain.  Rejects invalid embeddings.
EmbeddedProblem embed_problem(const ProblemGraph& source, const PegasusGraph& target,
                              const Embedding& emb, double chain_strength);

// Text form, one line per site: "site: q1 q2 ... qN".  Chain strength is not
// part of the format; readers assign it separately.
void write_embedding(std::ostream& out, const Embedding& emb);
Embedding read_embedding(std::istream& in);

// CSV "N,count" rows ascending in N.
void write_chain_stats(std::ostream& out, const ChainStats& stats);

}  // namespace annealkit

#endif  // ANNEALKIT_EMBEDDING_HPP_
