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

#pragma once

#include <array>
#include <iosfwd>
#include <optional>
#include <vector>

namespace annealkit {

// Pegasus coordinate (u, w, k, z): u is the qubit orientation, w the
// perpendicular tile offset in [0, m), k the qubit offset within a tile in
// [0, 12), z the parallel tile offset in [0, m-1).
struct PegasusCoord {
    int u = 0;
    int w = 0;
    int k = 0;
    int z = 0;

    friend bool operator==(const PegasusCoord&, const PegasusCoord&) = default;
};

enum class CouplerKind { External, Odd, Internal };

const char* to_string(CouplerKind kind);

struct Coupler {
    int a = 0;
    int b = 0;  // a < b
    CouplerKind kind = CouplerKind::Internal;
};

// Ideal Pegasus graph P_m: the full 24*m*(m-1) coordinate set with no
// dead-qubit mask.  Immutable after construction.
class PegasusGraph {
  public:
    PegasusGraph() = default;

    int m() const { return m_; }
    int num_nodes() const { return static_cast<int>(adjacency_.size()); }
    const std::vector<int>& neighbors(int node) const { return adjacency_[node]; }
    const std::vector<std::vector<int>>& adjacency() const { return adjacency_; }
    const std::vector<Coupler>& couplers() const { return couplers_; }

    bool has_edge(int a, int b) const;

    PegasusCoord coord(int node) const;
    int index(const PegasusCoord& c) const;

    friend PegasusGraph build_pegasus(int m);

  private:
    int m_ = 0;
    std::vector<std::vector<int>> adjacency_;  // sorted neighbor lists
    std::vector<Coupler> couplers_;
};

// Builds the ideal P_m.  Throws std::invalid_argument for m < 2.
// Node index = ((u*m + w)*12 + k)*(m-1) + z.
PegasusGraph build_pegasus(int m);

// Finds four mutually adjacent nodes, or nullopt if the graph has none.
// Deterministic: returns the lexicographically first witness.
std::optional<std::array<int, 4>> contains_k4(const PegasusGraph& graph);

// Text export "a b kind" per coupler, for external visualization.
void write_pegasus_edge_list(std::ostream& out, const PegasusGraph& graph);

}  // namespace annealkit
