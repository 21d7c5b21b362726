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
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace annealkit {

enum class BoundaryCondition { OBC, PBC };

const char* to_string(BoundaryCondition bc);
BoundaryCondition boundary_from_string(const std::string& text);

// L x L square lattice with ferromagnetic nearest-neighbor bonds (J1 > 0)
// and antiferromagnetic diagonal bonds (J2 >= 0).
struct LatticeSpec {
    int L = 0;
    double j1 = 1.0;
    double j2 = 0.0;
    BoundaryCondition bc = BoundaryCondition::OBC;
};

struct Bond {
    int a = 0;
    int b = 0;
    double coupling = 0.0;

    friend bool operator==(const Bond&, const Bond&) = default;
};

// One +-1 spin per site.  Owned by exactly one sampler while being mutated.
struct SpinConfig {
    std::vector<std::int8_t> spins;

    int size() const { return static_cast<int>(spins.size()); }

    friend bool operator==(const SpinConfig&, const SpinConfig&) = default;
};

// Weighted coupling graph E(s) = sum_bonds c_ab s_a s_b + sum_i h_i s_i.
// The lattice signs (-J1 nearest neighbor, +J2 diagonal) are baked into the
// bond coefficients at build time, so the same quadratic form serves both
// the bare model and the biased objective used during refinement.
//
// Immutable after construction except for the linear fields h, which
// with_fields() replaces on a copy.  Safe for shared concurrent reads.
class ProblemGraph {
  public:
    ProblemGraph() = default;

    // General constructor; bonds must be simple (a != b, no duplicates).
    ProblemGraph(int n_sites, std::vector<Bond> bonds);

    int n_sites() const { return n_sites_; }
    const std::vector<Bond>& bonds() const { return bonds_; }
    const std::vector<double>& fields() const { return fields_; }
    bool has_fields() const { return has_fields_; }

    // Lattice metadata; L == 0 for graphs not built from a LatticeSpec.
    int lattice_length() const { return L_; }
    BoundaryCondition boundary() const { return bc_; }
    const std::vector<std::array<int, 2>>& site_coords() const { return coords_; }

    // CSR adjacency for O(degree) single-flip updates.
    int degree(int site) const { return offsets_[site + 1] - offsets_[site]; }
    const int* neighbors_of(int site) const { return neighbor_.data() + offsets_[site]; }
    const double* couplings_of(int site) const { return coupling_.data() + offsets_[site]; }

    // Copy of this graph with the per-site linear fields replaced.
    ProblemGraph with_fields(std::vector<double> h) const;

    friend ProblemGraph build_lattice(const LatticeSpec& spec);
    friend ProblemGraph read_edge_list(std::istream& in);

  private:
    int n_sites_ = 0;
    std::vector<Bond> bonds_;
    std::vector<double> fields_;
    bool has_fields_ = false;

    int L_ = 0;
    BoundaryCondition bc_ = BoundaryCondition::OBC;
    std::vector<std::array<int, 2>> coords_;

    std::vector<int> offsets_;
    std::vector<int> neighbor_;
    std::vector<double> coupling_;

    void build_adjacency();
};

// Builds the frustrated square-lattice problem.  Site index i = y*L + x.
// Throws std::invalid_argument for L < 2, non-positive J1, negative J2,
// and for PBC with L < 3 (wrapping a 2-site direction would duplicate
// bonds).
ProblemGraph build_lattice(const LatticeSpec& spec);

// Total energy of a configuration; pure function.
// include_fields adds sum_i h_i s_i on top of the quadratic part.
double energy(const ProblemGraph& graph, const SpinConfig& config, bool include_fields = false);

// Energy change of flipping one site, including the field term.
// Equals energy(flipped) - energy(config) up to roundoff.
double delta_energy(const ProblemGraph& graph, const SpinConfig& config, int site);

// Named reference configurations used by tests and experiments.
SpinConfig all_up_config(int n_sites);
SpinConfig column_stripe_config(int L);

// Text edge-list serialization: header "n_sites L bc", one "a b coupling"
// line per bond, then "i h" lines for nonzero fields.
void write_edge_list(std::ostream& out, const ProblemGraph& graph);
ProblemGraph read_edge_list(std::istream& in);

}  // namespace annealkit
