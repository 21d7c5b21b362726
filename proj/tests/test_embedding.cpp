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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <set>
#include <sstream>
#include <vector>

#include "annealkit/embedding.hpp"
#include "annealkit/lattice.hpp"
#include "annealkit/pegasus.hpp"
#include "annealkit/sampler.hpp"
#include "support/oracles.hpp"

using namespace annealkit;

namespace {

ProblemGraph lattice(int L, double j2, BoundaryCondition bc) {
    LatticeSpec spec;
    spec.L = L;
    spec.j1 = 1.0;
    spec.j2 = j2;
    spec.bc = bc;
    return build_lattice(spec);
}

ProblemGraph k4_source() {
    std::vector<Bond> bonds;
    for (int a = 0; a < 4; ++a)
        for (int b = a + 1; b < 4; ++b) bonds.push_back({a, b, -1.0});
    return ProblemGraph(4, std::move(bonds));
}

EmbedParams params_with_seed(std::uint64_t seed) {
    EmbedParams params;
    params.seed = seed;
    return params;
}

}  // namespace

TEST_CASE("every successful embedding passes independent verification") {
    const PegasusGraph target = build_pegasus(6);
    int cases = 0;
    for (int L : {3, 4, 5, 6}) {
        for (auto bc : {BoundaryCondition::OBC, BoundaryCondition::PBC}) {
            const ProblemGraph source = lattice(L, 0.4, bc);
            for (std::uint64_t seed = 0; seed < 13 && cases < 100; ++seed, ++cases) {
                const EmbedResult result = find_embedding(source, target, params_with_seed(seed));
                REQUIRE(result.ok());
                const VerifyReport report = verify_embedding(source, target, *result.embedding);
                CHECK(report.ok);
                CHECK(report.message.empty());

                const ChainStats stats = chain_stats(*result.embedding);
                long total = 0;
                int count_sum = 0;
                int max_n = 0;
                for (const auto& [n, count] : stats.counts) {
                    total += static_cast<long>(n) * count;
                    count_sum += count;
                    max_n = std::max(max_n, n);
                }
                CHECK(stats.total_qubits == total);
                CHECK(stats.max_chain == max_n);
                CHECK(count_sum == source.n_sites());
                CHECK(result.embedding->chain_strength ==
                      doctest::Approx(default_chain_strength(source)));
            }
        }
    }
    CHECK(cases == 100);
}

TEST_CASE("same seed reproduces the same embedding") {
    const PegasusGraph target = build_pegasus(6);
    const ProblemGraph source = lattice(4, 0.4, BoundaryCondition::PBC);
    const EmbedResult a = find_embedding(source, target, params_with_seed(11));
    const EmbedResult b = find_embedding(source, target, params_with_seed(11));
    REQUIRE(a.ok());
    REQUIRE(b.ok());
    CHECK(a.embedding->chains == b.embedding->chains);
}

TEST_CASE("K4 embeds into P_2 with all singleton chains") {
    const PegasusGraph target = build_pegasus(2);
    const ProblemGraph source = k4_source();
    for (std::uint64_t seed : {0, 1, 2, 3, 4}) {
        const EmbedResult result = find_embedding(source, target, params_with_seed(seed));
        REQUIRE(result.ok());
        for (const auto& chain : result.embedding->chains) CHECK(chain.size() == 1);
        CHECK(verify_embedding(source, target, *result.embedding).ok);
    }
}

TEST_CASE("more logical sites than qubits fails by pigeonhole") {
    const PegasusGraph target = build_pegasus(2);  // 48 qubits
    const ProblemGraph source = lattice(8, 0.4, BoundaryCondition::OBC);
    const EmbedResult result = find_embedding(source, target, params_with_seed(0));
    CHECK_FALSE(result.ok());
    CHECK(result.unplaced_sites == 64 - 48);
}

TEST_CASE("parameter validation") {
    const PegasusGraph target = build_pegasus(2);
    const ProblemGraph source = k4_source();
    EmbedParams params;
    params.tries = 0;
    CHECK_THROWS_AS(find_embedding(source, target, params), std::invalid_argument);
    params.tries = 1;
    params.max_no_improve = 0;
    CHECK_THROWS_AS(find_embedding(source, target, params), std::invalid_argument);
}

TEST_CASE("verification reports each violation kind") {
    const PegasusGraph target = build_pegasus(4);
    const auto clique = contains_k4(target);
    REQUIRE(clique.has_value());
    const int a = (*clique)[0];
    const int b = (*clique)[1];
    const int c = (*clique)[2];

    std::vector<Bond> pair_bond = {{0, 1, -1.0}};
    const ProblemGraph k2(2, std::move(pair_bond));

    Embedding valid;
    valid.chains = {{a}, {b, c}};
    CHECK(verify_embedding(k2, target, valid).ok);

    Embedding wrong_count;
    wrong_count.chains = {{a}};
    const VerifyReport count_report = verify_embedding(k2, target, wrong_count);
    CHECK_FALSE(count_report.ok);
    CHECK_FALSE(count_report.message.empty());

    Embedding empty_chain;
    empty_chain.chains = {{a}, {}};
    CHECK_FALSE(verify_embedding(k2, target, empty_chain).ok);

    Embedding bad_qubit;
    bad_qubit.chains = {{a}, {target.num_nodes()}};
    CHECK_FALSE(verify_embedding(k2, target, bad_qubit).ok);

    Embedding negative_qubit;
    negative_qubit.chains = {{a}, {-1}};
    CHECK_FALSE(verify_embedding(k2, target, negative_qubit).ok);

    Embedding duplicate_qubit;
    duplicate_qubit.chains = {{a, a}, {b}};
    CHECK_FALSE(verify_embedding(k2, target, duplicate_qubit).ok);

    Embedding overlap;
    overlap.chains = {{a}, {a}};
    const VerifyReport overlap_report = verify_embedding(k2, target, overlap);
    CHECK_FALSE(overlap_report.ok);
    CHECK(overlap_report.message.find("share") != std::string::npos);

    // A qubit with no target edge into the rest of its chain.
    int far = -1;
    for (int node = 0; node < target.num_nodes(); ++node) {
        if (node == a || node == b || node == c) continue;
        if (!target.has_edge(node, b) && !target.has_edge(node, c)) {
            far = node;
            break;
        }
    }
    REQUIRE(far >= 0);
    Embedding disconnected;
    disconnected.chains = {{a}, {b, far}};
    CHECK_FALSE(verify_embedding(k2, target, disconnected).ok);

    int non_neighbor = -1;
    for (int node = 0; node < target.num_nodes(); ++node) {
        if (node != a && !target.has_edge(a, node)) {
            non_neighbor = node;
            break;
        }
    }
    REQUIRE(non_neighbor >= 0);
    Embedding uncovered;
    uncovered.chains = {{a}, {non_neighbor}};
    const VerifyReport coverage_report = verify_embedding(k2, target, uncovered);
    CHECK_FALSE(coverage_report.ok);
    CHECK(coverage_report.message.find("bond") != std::string::npos);
}

TEST_CASE("chain statistics arithmetic") {
    Embedding emb;
    emb.chains = {{7}, {1, 2}, {3, 9}, {4, 5, 6}};
    const ChainStats stats = chain_stats(emb);
    CHECK(stats.counts.at(1) == 1);
    CHECK(stats.counts.at(2) == 2);
    CHECK(stats.counts.at(3) == 1);
    CHECK(stats.max_chain == 3);
    CHECK(stats.total_qubits == 8);
}

TEST_CASE("default chain strength is 1.5x the heaviest site") {
    // Heaviest site is 1 with |−1| + |0.5| = 1.5, so the default is 2.25.
    std::vector<Bond> bonds = {{0, 1, -1.0}, {1, 2, 0.5}};
    ProblemGraph graph(3, std::move(bonds));
    CHECK(default_chain_strength(graph) == 1.5 * 1.5);
    std::vector<double> h = {0.0, 0.25, 0.0};
    CHECK(default_chain_strength(graph.with_fields(h)) == 1.5 * 1.75);
}

TEST_CASE("embedding text form round trips") {
    Embedding emb;
    emb.chains = {{5, 3, 8}, {0}, {2, 1}};
    std::stringstream buffer;
    write_embedding(buffer, emb);
    const Embedding loaded = read_embedding(buffer);
    REQUIRE(loaded.chains.size() == 3);
    CHECK(loaded.chains[0] == std::vector<int>{3, 5, 8});
    CHECK(loaded.chains[1] == std::vector<int>{0});
    CHECK(loaded.chains[2] == std::vector<int>{1, 2});

    std::stringstream dup("0: 1 2\n0: 3\n");
    CHECK_THROWS(read_embedding(dup));
    std::stringstream negative("0: -4\n");
    CHECK_THROWS(read_embedding(negative));
    std::stringstream garbage("not a chain line\n");
    CHECK_THROWS(read_embedding(garbage));
}

TEST_CASE("embed_problem builds the physical graph chain by chain") {
    const PegasusGraph target = build_pegasus(6);
    const ProblemGraph source = lattice(3, 0.2, BoundaryCondition::OBC);
    const EmbedResult found = find_embedding(source, target, params_with_seed(3));
    REQUIRE(found.ok());
    const double strength = 4.0;
    const EmbeddedProblem physical = embed_problem(source, target, *found.embedding, strength);

    CHECK(std::is_sorted(physical.node_to_qubit.begin(), physical.node_to_qubit.end()));
    CHECK(physical.graph.n_sites() == static_cast<int>(physical.node_to_qubit.size()));
    CHECK(physical.chains.size() == found.embedding->chains.size());

    // Compact chains partition the embedded nodes.
    std::set<int> used;
    long chained = 0;
    for (const auto& chain : physical.chains) {
        for (int node : chain) {
            CHECK(node >= 0);
            CHECK(node < physical.graph.n_sites());
            CHECK(used.insert(node).second);
        }
        chained += static_cast<long>(chain.size());
    }
    CHECK(chained == physical.graph.n_sites());

    int chain_bonds = 0;
    int logical_bonds = 0;
    for (const Bond& bond : physical.graph.bonds()) {
        if (bond.coupling == -strength) ++chain_bonds;
        else ++logical_bonds;
    }
    CHECK(logical_bonds == static_cast<int>(source.bonds().size()));
    long min_tree_edges = 0;
    for (const auto& chain : physical.chains)
        min_tree_edges += static_cast<long>(chain.size()) - 1;
    CHECK(chain_bonds >= min_tree_edges);

    CHECK_THROWS_AS(embed_problem(source, target, *found.embedding, 0.0), std::invalid_argument);
    Embedding broken = *found.embedding;
    broken.chains[0].clear();
    CHECK_THROWS_AS(embed_problem(source, target, broken, strength), std::invalid_argument);
}

TEST_CASE("fields are split equally across chains") {
    const PegasusGraph target = build_pegasus(4);
    const auto clique = contains_k4(target);
    REQUIRE(clique.has_value());
    std::vector<Bond> bonds = {{0, 1, -1.0}};
    ProblemGraph source(2, std::move(bonds));
    source = source.with_fields({0.5, -0.9});

    Embedding emb;
    emb.chains = {{(*clique)[0]}, {(*clique)[1], (*clique)[2]}};
    const EmbeddedProblem physical = embed_problem(source, target, emb, 2.0);
    REQUIRE(physical.graph.has_fields());
    double field_site0 = 0.0;
    double field_site1 = 0.0;
    for (std::size_t c = 0; c < physical.chains.size(); ++c)
        for (int node : physical.chains[c])
            (c == 0 ? field_site0 : field_site1) += physical.graph.fields()[node];
    CHECK(field_site0 == doctest::Approx(0.5));
    CHECK(field_site1 == doctest::Approx(-0.9));
    CHECK(physical.graph.fields()[physical.chains[1][0]] == doctest::Approx(-0.45));
}

TEST_CASE("singleton embedding reproduces the source problem") {
    const PegasusGraph target = build_pegasus(2);
    const ProblemGraph source = k4_source();
    const EmbedResult found = find_embedding(source, target, params_with_seed(1));
    REQUIRE(found.ok());
    const EmbeddedProblem physical =
        embed_problem(source, target, *found.embedding, found.embedding->chain_strength);

    REQUIRE(physical.graph.n_sites() == 4);
    CHECK(physical.graph.bonds().size() == source.bonds().size());
    for (const Bond& bond : physical.graph.bonds()) CHECK(bond.coupling == -1.0);

    // Any configuration maps through the singleton chains with equal energy.
    SpinConfig config;
    config.spins = {1, -1, 1, 1};
    SpinConfig logical;
    logical.spins.resize(4);
    for (std::size_t c = 0; c < physical.chains.size(); ++c)
        logical.spins[c] = config.spins[physical.chains[c][0]];
    CHECK(energy(physical.graph, config) == energy(source, logical));
}

TEST_CASE("sampling through an embedding reaches the true ground state") {
    const PegasusGraph target = build_pegasus(6);
    const ProblemGraph source = lattice(3, 0.2, BoundaryCondition::OBC);
    const EmbedResult found = find_embedding(source, target, params_with_seed(5));
    REQUIRE(found.ok());
    const EmbeddedProblem physical =
        embed_problem(source, target, *found.embedding, found.embedding->chain_strength);

    AnnealSchedule schedule;
    schedule.sweeps = 400;
    const ShotBatch raw = run_shots(physical.graph, schedule, 100, 99);
    const ShotBatch resolved = resolve_batch(raw, physical.chains, source, 7);
    REQUIRE(resolved.n_shots() == 100);

    const auto [exact, exact_config] = testing::brute_force_ground_state(source);
    double best = resolved.shots[0].energy;
    for (const Shot& shot : resolved.shots) best = std::min(best, shot.energy);
    CHECK(best == doctest::Approx(exact).epsilon(1e-12));
}

TEST_CASE("L = 6 lattice embeds into P_16 with short chains") {
    const PegasusGraph target = build_pegasus(16);
    const ProblemGraph source = lattice(6, 0.4, BoundaryCondition::OBC);
    const EmbedResult found = find_embedding(source, target, params_with_seed(0));
    REQUIRE(found.ok());
    const ChainStats stats = chain_stats(*found.embedding);
    CHECK(stats.max_chain <= 6);
    CHECK(stats.total_qubits >= 36);
    CHECK(verify_embedding(source, target, *found.embedding).ok);
}
