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
#include <array>
#include <optional>
#include <sstream>
#include <vector>

#include "annealkit/pegasus.hpp"

using namespace annealkit;

namespace {

int max_degree(const PegasusGraph& graph) {
    int best = 0;
    for (const auto& nbrs : graph.adjacency()) best = std::max(best, static_cast<int>(nbrs.size()));
    return best;
}

// Independent lexicographically-first K4 scan over a < b < c < d.
std::optional<std::array<int, 4>> first_k4_by_force(const PegasusGraph& graph) {
    const int n = graph.num_nodes();
    for (int a = 0; a < n; ++a)
        for (int b = a + 1; b < n; ++b) {
            if (!graph.has_edge(a, b)) continue;
            for (int c = b + 1; c < n; ++c) {
                if (!graph.has_edge(a, c) || !graph.has_edge(b, c)) continue;
                for (int d = c + 1; d < n; ++d)
                    if (graph.has_edge(a, d) && graph.has_edge(b, d) && graph.has_edge(c, d))
                        return std::array<int, 4>{a, b, c, d};
            }
        }
    return std::nullopt;
}

}  // namespace

TEST_CASE("node count is 24*m*(m-1)") {
    for (int m : {2, 3, 4, 6}) CHECK(build_pegasus(m).num_nodes() == 24 * m * (m - 1));
    CHECK(build_pegasus(16).num_nodes() == 5760);
    CHECK_THROWS_AS(build_pegasus(1), std::invalid_argument);
}

TEST_CASE("coupler counts per kind match the closed forms") {
    // External: one per (u, w, k) and z in 0..m-3.  Odd: one per (u, w, even
    // k, z).  Internal: (m-1)^2 per ordered offset pair (k, k2).
    for (int m : {2, 3, 4, 6, 16}) {
        const PegasusGraph graph = build_pegasus(m);
        int external = 0;
        int odd = 0;
        int internal = 0;
        for (const Coupler& c : graph.couplers()) {
            switch (c.kind) {
                case CouplerKind::External: ++external; break;
                case CouplerKind::Odd: ++odd; break;
                case CouplerKind::Internal: ++internal; break;
            }
        }
        CHECK(external == 24 * m * (m - 2));
        CHECK(odd == 12 * m * (m - 1));
        CHECK(internal == 144 * (m - 1) * (m - 1));
    }
}

TEST_CASE("adjacency is symmetric, sorted, duplicate-free and matches couplers") {
    const PegasusGraph graph = build_pegasus(4);
    long adjacency_entries = 0;
    for (int a = 0; a < graph.num_nodes(); ++a) {
        const auto& nbrs = graph.neighbors(a);
        adjacency_entries += static_cast<long>(nbrs.size());
        CHECK(std::is_sorted(nbrs.begin(), nbrs.end()));
        CHECK(std::adjacent_find(nbrs.begin(), nbrs.end()) == nbrs.end());
        for (int b : nbrs) {
            CHECK(b != a);
            const auto& back = graph.neighbors(b);
            CHECK(std::binary_search(back.begin(), back.end(), a));
        }
    }
    CHECK(adjacency_entries == 2 * static_cast<long>(graph.couplers().size()));
    for (const Coupler& c : graph.couplers()) {
        CHECK(c.a < c.b);
        CHECK(graph.has_edge(c.a, c.b));
        CHECK(graph.has_edge(c.b, c.a));
    }
    CHECK(std::is_sorted(graph.couplers().begin(), graph.couplers().end(),
                         [](const Coupler& x, const Coupler& y) {
                             return x.a != y.a ? x.a < y.a : x.b < y.b;
                         }));
}

TEST_CASE("maximum degree is 15 from m = 4 upward, 14 at m = 3") {
    CHECK(max_degree(build_pegasus(3)) == 14);
    CHECK(max_degree(build_pegasus(4)) == 15);
    CHECK(max_degree(build_pegasus(6)) == 15);
    CHECK(max_degree(build_pegasus(16)) == 15);
}

TEST_CASE("construction is deterministic") {
    const PegasusGraph a = build_pegasus(4);
    const PegasusGraph b = build_pegasus(4);
    CHECK(a.adjacency() == b.adjacency());
    REQUIRE(a.couplers().size() == b.couplers().size());
    for (std::size_t i = 0; i < a.couplers().size(); ++i) {
        CHECK(a.couplers()[i].a == b.couplers()[i].a);
        CHECK(a.couplers()[i].b == b.couplers()[i].b);
        CHECK(a.couplers()[i].kind == b.couplers()[i].kind);
    }
}

TEST_CASE("coordinate and index are inverse bijections") {
    const int m = 6;
    const PegasusGraph graph = build_pegasus(m);
    for (int node = 0; node < graph.num_nodes(); ++node) {
        const PegasusCoord c = graph.coord(node);
        CHECK(c.u >= 0);
        CHECK(c.u < 2);
        CHECK(c.w >= 0);
        CHECK(c.w < m);
        CHECK(c.k >= 0);
        CHECK(c.k < 12);
        CHECK(c.z >= 0);
        CHECK(c.z < m - 1);
        CHECK(graph.index(c) == node);
    }

    // Hand-evaluated index formula ((u*m + w)*12 + k)*(m-1) + z.
    const PegasusGraph p4 = build_pegasus(4);
    const PegasusCoord sample{1, 2, 7, 1};
    CHECK(p4.index(sample) == ((1 * 4 + 2) * 12 + 7) * 3 + 1);
    CHECK(p4.coord(((1 * 4 + 2) * 12 + 7) * 3 + 1) == sample);
}

TEST_CASE("coupler kinds match their coordinate geometry") {
    const PegasusGraph graph = build_pegasus(4);
    for (const Coupler& c : graph.couplers()) {
        const PegasusCoord a = graph.coord(c.a);
        const PegasusCoord b = graph.coord(c.b);
        switch (c.kind) {
            case CouplerKind::External:
                CHECK(a.u == b.u);
                CHECK(a.w == b.w);
                CHECK(a.k == b.k);
                CHECK(b.z - a.z == 1);
                break;
            case CouplerKind::Odd:
                CHECK(a.u == b.u);
                CHECK(a.w == b.w);
                CHECK(a.z == b.z);
                CHECK(a.k / 2 == b.k / 2);
                CHECK(a.k % 2 == 0);
                CHECK(b.k % 2 == 1);
                break;
            case CouplerKind::Internal:
                CHECK(a.u != b.u);
                break;
        }
    }
}

TEST_CASE("P_2 splits into four isolated odd pairs plus one bulk component") {
    // With m = 2 there are no external couplers and the corner (w, k) combos
    // have no valid internal partner, leaving one odd pair per u at each of
    // (w=0, k=0|1) and (w=1, k=10|11).
    const PegasusGraph graph = build_pegasus(2);
    CHECK(graph.neighbors(0) == std::vector<int>{1});
    CHECK(graph.neighbors(1) == std::vector<int>{0});
    CHECK(graph.neighbors(22) == std::vector<int>{23});
    CHECK(graph.neighbors(24) == std::vector<int>{25});
    CHECK(graph.neighbors(46) == std::vector<int>{47});
    int isolated_endpoints = 0;
    for (int node = 0; node < graph.num_nodes(); ++node)
        if (graph.neighbors(node).size() == 1 &&
            graph.neighbors(graph.neighbors(node)[0]).size() == 1)
            ++isolated_endpoints;
    CHECK(isolated_endpoints == 8);
}

TEST_CASE("contains_k4 returns the lexicographically first clique") {
    for (int m : {2, 3}) {
        const PegasusGraph graph = build_pegasus(m);
        const auto witness = contains_k4(graph);
        REQUIRE(witness.has_value());
        const auto& q = *witness;
        CHECK(q[0] < q[1]);
        CHECK(q[1] < q[2]);
        CHECK(q[2] < q[3]);
        for (int i = 0; i < 4; ++i)
            for (int j = i + 1; j < 4; ++j) CHECK(graph.has_edge(q[i], q[j]));
        CHECK(q == *first_k4_by_force(graph));
    }
}

TEST_CASE("has_edge rejects non-edges and out-of-range nodes") {
    const PegasusGraph graph = build_pegasus(2);
    CHECK_FALSE(graph.has_edge(0, 2));
    CHECK_FALSE(graph.has_edge(0, 24));
    CHECK_FALSE(graph.has_edge(5, 5));
}

TEST_CASE("edge list export has one row per coupler") {
    const PegasusGraph graph = build_pegasus(2);
    std::stringstream buffer;
    write_pegasus_edge_list(buffer, graph);
    int rows = 0;
    std::string line;
    while (std::getline(buffer, line))
        if (!line.empty()) ++rows;
    CHECK(rows == static_cast<int>(graph.couplers().size()));
}

TEST_CASE("coupler kind names") {
    CHECK(to_string(CouplerKind::External) == std::string("external"));
    CHECK(to_string(CouplerKind::Odd) == std::string("odd"));
    CHECK(to_string(CouplerKind::Internal) == std::string("internal"));
}
