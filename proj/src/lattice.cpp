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

#include "annealkit/lattice.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "annealkit/text_io.hpp"

namespace annealkit {

const char* to_string(BoundaryCondition bc) {
    return bc == BoundaryCondition::OBC ? "OBC" : "PBC";
}

BoundaryCondition boundary_from_string(const std::string& text) {
    if (text == "OBC" || text == "obc") return BoundaryCondition::OBC;
    if (text == "PBC" || text == "pbc") return BoundaryCondition::PBC;
    throw std::invalid_argument("unknown boundary condition '" + text + "'");
}

ProblemGraph::ProblemGraph(int n_sites, std::vector<Bond> bonds)
        : n_sites_(n_sites), bonds_(std::move(bonds)), fields_(n_sites, 0.0) {
    if (n_sites < 0) throw std::invalid_argument("n_sites must be non-negative");
    std::set<std::pair<int, int>> seen;
    for (const Bond& b : bonds_) {
        if (b.a == b.b) throw std::invalid_argument("self-coupling bond");
        if (b.a < 0 || b.a >= n_sites_ || b.b < 0 || b.b >= n_sites_)
            throw std::invalid_argument("bond endpoint out of range");
        auto key = std::minmax(b.a, b.b);
        if (!seen.insert(key).second) throw std::invalid_argument("duplicate bond");
    }
    build_adjacency();
}

void ProblemGraph::build_adjacency() {
    offsets_.assign(n_sites_ + 1, 0);
    for (const Bond& b : bonds_) {
        ++offsets_[b.a + 1];
        ++offsets_[b.b + 1];
    }
    for (int i = 0; i < n_sites_; ++i) offsets_[i + 1] += offsets_[i];
    neighbor_.resize(bonds_.size() * 2);
    coupling_.resize(bonds_.size() * 2);
    std::vector<int> cursor(offsets_.begin(), offsets_.end() - 1);
    for (const Bond& b : bonds_) {
        neighbor_[cursor[b.a]] = b.b;
        coupling_[cursor[b.a]++] = b.coupling;
        neighbor_[cursor[b.b]] = b.a;
        coupling_[cursor[b.b]++] = b.coupling;
    }
}

ProblemGraph ProblemGraph::with_fields(std::vector<double> h) const {
    if (static_cast<int>(h.size()) != n_sites_)
        throw std::invalid_argument("field vector length mismatch");
    ProblemGraph copy = *this;
    copy.fields_ = std::move(h);
    copy.has_fields_ = false;
    for (double v : copy.fields_)
        if (v != 0.0) copy.has_fields_ = true;
    return copy;
}

ProblemGraph build_lattice(const LatticeSpec& spec) {
    if (spec.L < 2) throw std::invalid_argument("lattice size L must be at least 2");
    if (spec.j1 <= 0.0) throw std::invalid_argument("J1 must be positive");
    if (spec.j2 < 0.0) throw std::invalid_argument("J2 must be non-negative");
    const bool pbc = spec.bc == BoundaryCondition::PBC;
    if (pbc && spec.L < 3)
        throw std::invalid_argument("PBC requires L >= 3; wrapping L = 2 duplicates bonds");

    const int L = spec.L;
    const int n = L * L;
    auto index = [L](int x, int y) { return y * L + x; };

    std::vector<Bond> bonds;
    bonds.reserve(static_cast<std::size_t>(4) * n);
    // Every bond is emitted from its lower-left endpoint exactly once:
    // (+1,0) and (0,+1) for nearest neighbors, (+1,+1) and (-1,+1) for
    // diagonals.  Under PBC the displacements wrap modulo L.
    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            const int i = index(x, y);
            const bool right_ok = pbc || x + 1 < L;
            const bool up_ok = pbc || y + 1 < L;
            const bool left_ok = pbc || x > 0;
            const int xr = (x + 1) % L;
            const int yu = (y + 1) % L;
            const int xl = (x + L - 1) % L;
            if (right_ok) bonds.push_back({i, index(xr, y), -spec.j1});
            if (up_ok) bonds.push_back({i, index(x, yu), -spec.j1});
            if (right_ok && up_ok) bonds.push_back({i, index(xr, yu), spec.j2});
            if (left_ok && up_ok) bonds.push_back({i, index(xl, yu), spec.j2});
        }
    }

    ProblemGraph graph(n, std::move(bonds));
    graph.L_ = L;
    graph.bc_ = spec.bc;
    graph.coords_.resize(n);
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) graph.coords_[index(x, y)] = {x, y};
    return graph;
}

double energy(const ProblemGraph& graph, const SpinConfig& config, bool include_fields) {
    if (config.size() != graph.n_sites())
        throw std::invalid_argument("configuration length does not match graph");
    double total = 0.0;
    for (const Bond& b : graph.bonds())
        total += b.coupling * config.spins[b.a] * config.spins[b.b];
    if (include_fields && graph.has_fields()) {
        const auto& h = graph.fields();
        for (int i = 0; i < graph.n_sites(); ++i) total += h[i] * config.spins[i];
    }
    return total;
}

double delta_energy(const ProblemGraph& graph, const SpinConfig& config, int site) {
    if (config.size() != graph.n_sites())
        throw std::invalid_argument("configuration length does not match graph");
    if (site < 0 || site >= graph.n_sites()) throw std::out_of_range("site index out of range");
    double field = graph.fields()[site];
    const int deg = graph.degree(site);
    const int* nbr = graph.neighbors_of(site);
    const double* cpl = graph.couplings_of(site);
    for (int k = 0; k < deg; ++k) field += cpl[k] * config.spins[nbr[k]];
    return -2.0 * config.spins[site] * field;
}

SpinConfig all_up_config(int n_sites) {
    return SpinConfig{std::vector<std::int8_t>(n_sites, 1)};
}

SpinConfig column_stripe_config(int L) {
    SpinConfig config{std::vector<std::int8_t>(static_cast<std::size_t>(L) * L, 1)};
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) config.spins[y * L + x] = (x % 2 == 0) ? 1 : -1;
    return config;
}

void write_edge_list(std::ostream& out, const ProblemGraph& graph) {
    out << graph.n_sites() << ' ' << graph.lattice_length() << ' ' << to_string(graph.boundary())
        << '\n';
    for (const Bond& b : graph.bonds())
        out << b.a << ' ' << b.b << ' ' << format_double(b.coupling) << '\n';
    const auto& h = graph.fields();
    for (int i = 0; i < graph.n_sites(); ++i)
        if (h[i] != 0.0) out << i << ' ' << format_double(h[i]) << '\n';
}

ProblemGraph read_edge_list(std::istream& in) {
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("edge list: missing header");
    std::istringstream header(line);
    int n_sites = 0, L = 0;
    std::string bc_text;
    if (!(header >> n_sites >> L >> bc_text)) throw std::runtime_error("edge list: bad header");
    BoundaryCondition bc = boundary_from_string(bc_text);

    std::vector<Bond> bonds;
    std::vector<double> fields(n_sites, 0.0);
    while (std::getline(in, line)) {
        auto trimmed = trim(line);
        if (trimmed.empty()) continue;
        std::istringstream row{std::string(trimmed)};
        double first = 0, second = 0, third = 0;
        if (row >> first >> second) {
            if (row >> third) {
                bonds.push_back({static_cast<int>(first), static_cast<int>(second), third});
            } else {
                int site = static_cast<int>(first);
                if (site < 0 || site >= n_sites) throw std::runtime_error("edge list: bad field row");
                fields[site] = second;
            }
        } else {
            throw std::runtime_error("edge list: unparseable row '" + std::string(trimmed) + "'");
        }
    }
    ProblemGraph graph(n_sites, std::move(bonds));
    graph = graph.with_fields(std::move(fields));
    if (L > 0 && L * L == n_sites) {
        graph.L_ = L;
        graph.bc_ = bc;
        graph.coords_.resize(n_sites);
        for (int y = 0; y < L; ++y)
            for (int x = 0; x < L; ++x) graph.coords_[y * L + x] = {x, y};
    }
    return graph;
}

}  // namespace annealkit
