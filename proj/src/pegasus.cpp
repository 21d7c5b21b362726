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

#include "annealkit/pegasus.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>

namespace annealkit {
namespace {

// Published Pegasus shift offsets (offsets_index 0 of the reference
// topology definition).  A qubit (u, w, k, z) is a length-12 segment:
// vertical qubits (u = 0) occupy channel 12*w + k and span rows
// [12*z + VERTICAL_OFFSETS[k], 12*(z+1) + VERTICAL_OFFSETS[k]); horizontal
// qubits are the transpose with HORIZONTAL_OFFSETS.  Internal couplers join
// exactly the crossing segment pairs.
constexpr int VERTICAL_OFFSETS[12] = {2, 2, 2, 2, 10, 10, 10, 10, 6, 6, 6, 6};
constexpr int HORIZONTAL_OFFSETS[12] = {6, 6, 6, 6, 2, 2, 2, 2, 10, 10, 10, 10};

}  // namespace

const char* to_string(CouplerKind kind) {
    switch (kind) {
        case CouplerKind::External: return "external";
        case CouplerKind::Odd: return "odd";
        case CouplerKind::Internal: return "internal";
    }
    return "?";
}

bool PegasusGraph::has_edge(int a, int b) const {
    const auto& nbrs = adjacency_[a];
    return std::binary_search(nbrs.begin(), nbrs.end(), b);
}

PegasusCoord PegasusGraph::coord(int node) const {
    const int span = m_ - 1;
    PegasusCoord c;
    c.z = node % span;
    node /= span;
    c.k = node % 12;
    node /= 12;
    c.w = node % m_;
    c.u = node / m_;
    return c;
}

int PegasusGraph::index(const PegasusCoord& c) const {
    return ((c.u * m_ + c.w) * 12 + c.k) * (m_ - 1) + c.z;
}

PegasusGraph build_pegasus(int m) {
    if (m < 2) throw std::invalid_argument("Pegasus size m must be at least 2");

    PegasusGraph graph;
    graph.m_ = m;
    const int span = m - 1;
    const int n = 24 * m * span;
    graph.adjacency_.assign(n, {});

    auto index = [m, span](int u, int w, int k, int z) {
        return ((u * m + w) * 12 + k) * span + z;
    };
    auto add = [&](int a, int b, CouplerKind kind) {
        if (a > b) std::swap(a, b);
        graph.couplers_.push_back({a, b, kind});
        graph.adjacency_[a].push_back(b);
        graph.adjacency_[b].push_back(a);
    };

    for (int u = 0; u < 2; ++u)
        for (int w = 0; w < m; ++w)
            for (int k = 0; k < 12; ++k)
                for (int z = 0; z + 1 < span; ++z)
                    add(index(u, w, k, z), index(u, w, k, z + 1), CouplerKind::External);

    for (int u = 0; u < 2; ++u)
        for (int w = 0; w < m; ++w)
            for (int k = 0; k < 12; k += 2)
                for (int z = 0; z < span; ++z)
                    add(index(u, w, k, z), index(u, w, k + 1, z), CouplerKind::Odd);

    // Internal couplers: vertical (0, w, k, z) crosses horizontal
    // (1, w2, k2, z2) iff the horizontal row 12*w2 + k2 lies in the vertical
    // span and the vertical column 12*w + k lies in the horizontal span.
    for (int w = 0; w < m; ++w)
        for (int k = 0; k < 12; ++k)
            for (int z = 0; z < span; ++z)
                for (int k2 = 0; k2 < 12; ++k2) {
                    const int w2 = z + (k2 < VERTICAL_OFFSETS[k] ? 1 : 0);
                    const int z2 = w - (k < HORIZONTAL_OFFSETS[k2] ? 1 : 0);
                    if (w2 >= m || z2 < 0 || z2 >= span) continue;
                    add(index(0, w, k, z), index(1, w2, k2, z2), CouplerKind::Internal);
                }

    for (auto& nbrs : graph.adjacency_) std::sort(nbrs.begin(), nbrs.end());
    std::sort(graph.couplers_.begin(), graph.couplers_.end(), [](const Coupler& x, const Coupler& y) {
        return std::pair(x.a, x.b) < std::pair(y.a, y.b);
    });
    return graph;
}

std::optional<std::array<int, 4>> contains_k4(const PegasusGraph& graph) {
    const int n = graph.num_nodes();
    std::vector<int> common;
    for (int a = 0; a < n; ++a) {
        for (int b : graph.neighbors(a)) {
            if (b <= a) continue;
            common.clear();
            std::set_intersection(graph.neighbors(a).begin(), graph.neighbors(a).end(),
                                  graph.neighbors(b).begin(), graph.neighbors(b).end(),
                                  std::back_inserter(common));
            for (std::size_t i = 0; i < common.size(); ++i) {
                if (common[i] <= b) continue;
                for (std::size_t j = i + 1; j < common.size(); ++j) {
                    if (graph.has_edge(common[i], common[j]))
                        return std::array<int, 4>{a, b, common[i], common[j]};
                }
            }
        }
    }
    return std::nullopt;
}

void write_pegasus_edge_list(std::ostream& out, const PegasusGraph& graph) {
    for (const Coupler& c : graph.couplers())
        out << c.a << ' ' << c.b << ' ' << to_string(c.kind) << '\n';
}

}  // namespace annealkit
