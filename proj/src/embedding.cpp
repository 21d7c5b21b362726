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

#include "annealkit/embedding.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <utility>

#include "annealkit/rng.hpp"
#include "annealkit/text_io.hpp"

namespace annealkit {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Qubit weight grows as penalty^occupancy so routing through a qubit already
// claimed by k other chains costs exponentially more than a free detour.  The
// exponent cap keeps sums well inside double range; above it every path is
// effectively forbidden anyway.
constexpr double kPenalty = 10.0;
constexpr int kPenaltyCap = 14;

double occupancy_weight(int occupancy) {
    static const auto table = [] {
        std::array<double, kPenaltyCap + 1> t{};
        t[0] = 1.0;
        for (int i = 1; i <= kPenaltyCap; ++i) t[i] = t[i - 1] * kPenalty;
        return t;
    }();
    return table[std::min(occupancy, kPenaltyCap)];
}

struct Objective {
    long shared = 0;
    int max_chain = 0;
    long total_qubits = 0;

    friend bool operator<(const Objective& x, const Objective& y) {
        return std::tie(x.shared, x.max_chain, x.total_qubits) <
               std::tie(y.shared, y.max_chain, y.total_qubits);
    }
};

class Router {
public:
    Router(const ProblemGraph& source, const PegasusGraph& target)
        : source_(source),
          target_(target),
          n_vars_(source.n_sites()),
          n_qubits_(target.num_nodes()),
          chains_(n_vars_),
          occupancy_(n_qubits_, 0),
          total_(n_qubits_, 0.0),
          in_new_chain_(n_qubits_, 0) {}

    const std::vector<std::vector<int>>& chains() const { return chains_; }

    // One full restart: random BFS placement order, then improvement passes
    // re-routing every chain until the objective has not improved for
    // max_no_improve consecutive passes.  Returns the number of sites left
    // without a valid private chain (0 on success).
    int run(Xoshiro256& rng, int max_no_improve) {
        for (auto& c : chains_) c.clear();
        std::fill(occupancy_.begin(), occupancy_.end(), 0);

        const std::vector<int> order = placement_order(rng);
        int placed = 0;
        for (int v : order) {
            if (!route(v, rng)) return n_vars_ - placed;
            ++placed;
        }

        auto best_chains = chains_;
        Objective best = objective();
        std::vector<int> perm(n_vars_);
        for (int i = 0; i < n_vars_; ++i) perm[i] = i;

        int stale = 0;
        while (stale < max_no_improve && !(best.shared == 0 && best.max_chain == 1)) {
            shuffle(perm, rng);
            bool stuck = false;
            for (int v : perm) {
                if (!route(v, rng)) {
                    stuck = true;
                    break;
                }
            }
            const Objective now = objective();
            if (!stuck && now < best) {
                best = now;
                best_chains = chains_;
                stale = 0;
            } else {
                ++stale;
            }
        }

        chains_ = std::move(best_chains);
        rebuild_occupancy();
        if (best.shared == 0) return 0;
        return count_conflicted_sites();
    }

    // Drops qubits that are not needed for chain connectivity or bond
    // coverage.  Only called on conflict-free embeddings.
    void shrink() {
        for (int v = 0; v < n_vars_; ++v) {
            bool removed = true;
            while (removed && chains_[v].size() > 1) {
                removed = false;
                for (auto it = chains_[v].rbegin(); it != chains_[v].rend(); ++it) {
                    if (removable(v, *it)) {
                        chains_[v].erase(std::next(it).base());
                        removed = true;
                        break;
                    }
                }
            }
        }
        rebuild_occupancy();
    }

private:
    std::vector<int> placement_order(Xoshiro256& rng) {
        std::vector<int> order;
        order.reserve(n_vars_);
        std::vector<char> seen(n_vars_, 0);
        std::queue<int> frontier;
        if (n_vars_ > 0) {
            const int root = static_cast<int>(rng.uniform_below(n_vars_));
            frontier.push(root);
            seen[root] = 1;
        }
        for (int next = 0; static_cast<int>(order.size()) < n_vars_;) {
            if (frontier.empty()) {
                while (seen[next]) ++next;
                frontier.push(next);
                seen[next] = 1;
            }
            const int v = frontier.front();
            frontier.pop();
            order.push_back(v);
            const int* nbrs = source_.neighbors_of(v);
            for (int i = 0; i < source_.degree(v); ++i) {
                if (!seen[nbrs[i]]) {
                    seen[nbrs[i]] = 1;
                    frontier.push(nbrs[i]);
                }
            }
        }
        return order;
    }

    void shuffle(std::vector<int>& values, Xoshiro256& rng) {
        for (std::size_t i = values.size(); i > 1; --i)
            std::swap(values[i - 1], values[rng.uniform_below(i)]);
    }

    // Occupancy penalty times a per-route multiplicative jitter.  Pegasus
    // path costs are massively degenerate, and deterministic tie-breaking
    // funnels every chain into the same corridors until sharing cannot
    // resolve; the jitter spreads routes across equivalent paths while
    // keeping runs reproducible through the seeded generator.
    double weight(int qubit) const { return occupancy_weight(occupancy_[qubit]) * jitter_[qubit]; }

    void refresh_jitter(Xoshiro256& rng) {
        jitter_.resize(n_qubits_);
        for (double& j : jitter_) j = 1.0 + 0.25 * rng.uniform();
    }

    // Multi-source Dijkstra from an existing chain over the vertex-weighted
    // target graph.  dist[q] excludes the sources' own weights but includes
    // weight(q), so it is the cost of claiming the connecting path up to and
    // including q.
    void shortest_paths(const std::vector<int>& sources, std::vector<double>& dist,
                        std::vector<int>& parent) const {
        dist.assign(n_qubits_, kInf);
        parent.assign(n_qubits_, -1);
        using Item = std::pair<double, int>;
        std::priority_queue<Item, std::vector<Item>, std::greater<>> heap;
        for (int q : sources) {
            dist[q] = 0.0;
            heap.push({0.0, q});
        }
        while (!heap.empty()) {
            const auto [d, x] = heap.top();
            heap.pop();
            if (d > dist[x]) continue;
            for (int y : target_.neighbors(x)) {
                const double nd = d + weight(y);
                if (nd < dist[y]) {
                    dist[y] = nd;
                    parent[y] = x;
                    heap.push({nd, y});
                }
            }
        }
    }

    // (Re)routes the chain for v against its currently embedded neighbors:
    // pick the root minimizing the summed path costs, then claim the paths
    // back to every neighbor chain.  Qubits may end up shared; the objective
    // drives sharing out across improvement passes.
    bool route(int v, Xoshiro256& rng) {
        release(v);
        refresh_jitter(rng);

        std::vector<int> nbrs;
        const int* nv = source_.neighbors_of(v);
        for (int i = 0; i < source_.degree(v); ++i)
            if (!chains_[nv[i]].empty()) nbrs.push_back(nv[i]);

        if (nbrs.empty()) {
            int best_occ = std::numeric_limits<int>::max();
            for (int q = 0; q < n_qubits_; ++q) best_occ = std::min(best_occ, occupancy_[q]);
            std::vector<int> free;
            for (int q = 0; q < n_qubits_; ++q)
                if (occupancy_[q] == best_occ) free.push_back(q);
            claim(v, {free[rng.uniform_below(free.size())]});
            return true;
        }

        std::fill(total_.begin(), total_.end(), 0.0);
        dists_.resize(nbrs.size());
        parents_.resize(nbrs.size());
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            shortest_paths(chains_[nbrs[i]], dists_[i], parents_[i]);
            for (int q = 0; q < n_qubits_; ++q)
                total_[q] = (dists_[i][q] == kInf) ? kInf : total_[q] + dists_[i][q];
            // Rooting inside a neighbor chain means sharing that qubit, which
            // its zero source distance would otherwise make look free.
            for (int q : chains_[nbrs[i]])
                if (total_[q] != kInf) total_[q] += weight(q);
        }

        int root = -1;
        for (int q = 0; q < n_qubits_; ++q)
            if (root < 0 || total_[q] < total_[root]) root = q;
        if (total_[root] == kInf) return false;

        std::vector<int> chain{root};
        in_new_chain_[root] = 1;
        for (std::size_t i = 0; i < nbrs.size(); ++i) {
            for (int cur = parents_[i][root]; cur != -1 && dists_[i][cur] > 0.0;
                 cur = parents_[i][cur]) {
                if (!in_new_chain_[cur]) {
                    in_new_chain_[cur] = 1;
                    chain.push_back(cur);
                }
            }
        }
        for (int q : chain) in_new_chain_[q] = 0;
        std::sort(chain.begin(), chain.end());
        claim(v, std::move(chain));
        return true;
    }

    void release(int v) {
        for (int q : chains_[v]) --occupancy_[q];
        chains_[v].clear();
    }

    void claim(int v, std::vector<int> chain) {
        for (int q : chain) ++occupancy_[q];
        chains_[v] = std::move(chain);
    }

    void rebuild_occupancy() {
        std::fill(occupancy_.begin(), occupancy_.end(), 0);
        for (const auto& c : chains_)
            for (int q : c) ++occupancy_[q];
    }

    Objective objective() const {
        Objective obj;
        for (int q = 0; q < n_qubits_; ++q)
            if (occupancy_[q] > 1) obj.shared += occupancy_[q] - 1;
        for (const auto& c : chains_) {
            obj.max_chain = std::max(obj.max_chain, static_cast<int>(c.size()));
            obj.total_qubits += static_cast<long>(c.size());
        }
        return obj;
    }

    int count_conflicted_sites() const {
        int conflicted = 0;
        for (const auto& c : chains_) {
            bool bad = c.empty();
            for (int q : c) bad = bad || occupancy_[q] > 1;
            conflicted += bad;
        }
        return conflicted;
    }

    bool removable(int v, int qubit) const {
        const auto& chain = chains_[v];
        // Connectivity of chain minus qubit, by BFS inside the chain.
        std::vector<int> rest;
        for (int q : chain)
            if (q != qubit) rest.push_back(q);
        std::vector<char> in_rest_local(rest.size(), 0);
        auto rank = [&](int q) {
            const auto it = std::lower_bound(rest.begin(), rest.end(), q);
            return (it != rest.end() && *it == q) ? static_cast<int>(it - rest.begin()) : -1;
        };
        std::vector<int> stack{0};
        in_rest_local[0] = 1;
        int reached = 1;
        while (!stack.empty()) {
            const int x = rest[stack.back()];
            stack.pop_back();
            for (int y : target_.neighbors(x)) {
                const int r = rank(y);
                if (r >= 0 && !in_rest_local[r]) {
                    in_rest_local[r] = 1;
                    stack.push_back(r);
                    ++reached;
                }
            }
        }
        if (reached != static_cast<int>(rest.size())) return false;

        // Every logical bond at v must keep at least one coupler.
        const int* nv = source_.neighbors_of(v);
        for (int i = 0; i < source_.degree(v); ++i) {
            const auto& other = chains_[nv[i]];
            bool covered = false;
            for (int a : rest) {
                for (int b : other)
                    if (target_.has_edge(a, b)) {
                        covered = true;
                        break;
                    }
                if (covered) break;
            }
            if (!covered) return false;
        }
        return true;
    }

    const ProblemGraph& source_;
    const PegasusGraph& target_;
    int n_vars_;
    int n_qubits_;
    std::vector<std::vector<int>> chains_;
    std::vector<int> occupancy_;
    std::vector<double> total_;
    std::vector<double> jitter_;
    std::vector<char> in_new_chain_;
    std::vector<std::vector<double>> dists_;
    std::vector<std::vector<int>> parents_;
};

}  // namespace

EmbedResult find_embedding(const ProblemGraph& source, const PegasusGraph& target,
                           const EmbedParams& params) {
    if (params.tries < 1) throw std::invalid_argument("tries must be at least 1");
    if (params.max_no_improve < 1) throw std::invalid_argument("max_no_improve must be at least 1");

    EmbedResult result;
    result.unplaced_sites = source.n_sites();
    if (source.n_sites() > target.num_nodes()) {
        result.unplaced_sites = source.n_sites() - target.num_nodes();
        return result;
    }

    Router router(source, target);
    for (int t = 0; t < params.tries; ++t) {
        Xoshiro256 rng(derive_seed(params.seed, static_cast<std::uint64_t>(t)));
        const int unplaced = router.run(rng, params.max_no_improve);
        if (unplaced == 0) {
            router.shrink();
            Embedding emb{router.chains(), default_chain_strength(source)};
            const VerifyReport report = verify_embedding(source, target, emb);
            if (!report.ok) throw std::logic_error("embedder produced invalid embedding: " + report.message);
            result.embedding = std::move(emb);
            result.unplaced_sites = 0;
            return result;
        }
        result.unplaced_sites = std::min(result.unplaced_sites, unplaced);
    }
    return result;
}

VerifyReport verify_embedding(const ProblemGraph& source, const PegasusGraph& target,
                              const Embedding& emb) {
    auto fail = [](std::string message) { return VerifyReport{false, std::move(message)}; };

    if (static_cast<int>(emb.chains.size()) != source.n_sites())
        return fail("embedding has " + std::to_string(emb.chains.size()) + " chains for " +
                    std::to_string(source.n_sites()) + " sites");

    std::vector<int> owner(target.num_nodes(), -1);
    for (int v = 0; v < source.n_sites(); ++v) {
        const auto& chain = emb.chains[v];
        if (chain.empty()) return fail("chain for site " + std::to_string(v) + " is empty");
        for (int q : chain) {
            if (q < 0 || q >= target.num_nodes())
                return fail("chain for site " + std::to_string(v) + " contains invalid qubit " +
                            std::to_string(q));
            if (owner[q] == v)
                return fail("chain for site " + std::to_string(v) + " lists qubit " +
                            std::to_string(q) + " twice");
            if (owner[q] >= 0)
                return fail("sites " + std::to_string(owner[q]) + " and " + std::to_string(v) +
                            " share qubit " + std::to_string(q));
            owner[q] = v;
        }
    }

    for (int v = 0; v < source.n_sites(); ++v) {
        std::vector<int> chain = emb.chains[v];  // sorted copy so rank() can bisect
        std::sort(chain.begin(), chain.end());
        std::vector<int> stack{chain[0]};
        std::vector<char> seen(chain.size(), 0);
        seen[0] = 1;
        std::size_t reached = 1;
        auto rank = [&](int q) {
            const auto it = std::lower_bound(chain.begin(), chain.end(), q);
            return (it != chain.end() && *it == q) ? static_cast<int>(it - chain.begin()) : -1;
        };
        while (!stack.empty()) {
            const int x = stack.back();
            stack.pop_back();
            for (int y : target.neighbors(x)) {
                const int r = rank(y);
                if (r >= 0 && !seen[r]) {
                    seen[r] = 1;
                    stack.push_back(y);
                    ++reached;
                }
            }
        }
        if (reached != chain.size())
            return fail("chain for site " + std::to_string(v) + " is not connected");
    }

    for (const Bond& bond : source.bonds()) {
        bool covered = false;
        for (int a : emb.chains[bond.a]) {
            for (int b : emb.chains[bond.b])
                if (target.has_edge(a, b)) {
                    covered = true;
                    break;
                }
            if (covered) break;
        }
        if (!covered)
            return fail("bond (" + std::to_string(bond.a) + "," + std::to_string(bond.b) +
                        ") has no coupler between its chains");
    }
    return {};
}

ChainStats chain_stats(const Embedding& emb) {
    ChainStats stats;
    for (const auto& chain : emb.chains) {
        const int n = static_cast<int>(chain.size());
        ++stats.counts[n];
        stats.max_chain = std::max(stats.max_chain, n);
        stats.total_qubits += n;
    }
    return stats;
}

double default_chain_strength(const ProblemGraph& source) {
    double worst = 0.0;
    for (int v = 0; v < source.n_sites(); ++v) {
        double sum = std::abs(source.fields()[v]);
        const double* c = source.couplings_of(v);
        for (int i = 0; i < source.degree(v); ++i) sum += std::abs(c[i]);
        worst = std::max(worst, sum);
    }
    return 1.5 * worst;
}

EmbeddedProblem embed_problem(const ProblemGraph& source, const PegasusGraph& target,
                              const Embedding& emb, double chain_strength) {
    if (!(chain_strength > 0.0)) throw std::invalid_argument("chain_strength must be positive");
    const VerifyReport report = verify_embedding(source, target, emb);
    if (!report.ok) throw std::invalid_argument("invalid embedding: " + report.message);

    EmbeddedProblem out;
    for (const auto& chain : emb.chains)
        out.node_to_qubit.insert(out.node_to_qubit.end(), chain.begin(), chain.end());
    std::sort(out.node_to_qubit.begin(), out.node_to_qubit.end());

    std::vector<int> qubit_to_node(target.num_nodes(), -1);
    for (std::size_t i = 0; i < out.node_to_qubit.size(); ++i)
        qubit_to_node[out.node_to_qubit[i]] = static_cast<int>(i);

    std::vector<Bond> bonds;
    out.chains.resize(emb.chains.size());
    for (std::size_t v = 0; v < emb.chains.size(); ++v) {
        const auto& chain = emb.chains[v];
        for (int q : chain) out.chains[v].push_back(qubit_to_node[q]);
        for (std::size_t i = 0; i < chain.size(); ++i)
            for (std::size_t j = i + 1; j < chain.size(); ++j)
                if (target.has_edge(chain[i], chain[j]))
                    bonds.push_back({qubit_to_node[chain[i]], qubit_to_node[chain[j]],
                                     -chain_strength});
    }

    for (const Bond& bond : source.bonds()) {
        std::pair<int, int> best{-1, -1};
        for (int a : emb.chains[bond.a])
            for (int b : emb.chains[bond.b]) {
                if (!target.has_edge(a, b)) continue;
                const auto edge = std::minmax(a, b);
                if (best.first < 0 || std::pair(edge.first, edge.second) < best)
                    best = {edge.first, edge.second};
            }
        bonds.push_back({qubit_to_node[best.first], qubit_to_node[best.second], bond.coupling});
    }

    ProblemGraph graph(static_cast<int>(out.node_to_qubit.size()), std::move(bonds));
    if (source.has_fields()) {
        std::vector<double> h(out.node_to_qubit.size(), 0.0);
        for (int v = 0; v < source.n_sites(); ++v) {
            const double share = source.fields()[v] / static_cast<double>(emb.chains[v].size());
            for (int node : out.chains[v]) h[node] = share;
        }
        graph = graph.with_fields(std::move(h));
    }
    out.graph = std::move(graph);
    return out;
}

void write_embedding(std::ostream& out, const Embedding& emb) {
    for (std::size_t v = 0; v < emb.chains.size(); ++v) {
        out << v << ':';
        for (int q : emb.chains[v]) out << ' ' << q;
        out << '\n';
    }
}

Embedding read_embedding(std::istream& in) {
    std::vector<std::pair<int, std::vector<int>>> rows;
    std::string line;
    int max_site = -1;
    while (std::getline(in, line)) {
        const std::string_view text = trim(line);
        if (text.empty()) continue;
        const auto colon = text.find(':');
        if (colon == std::string_view::npos)
            throw std::invalid_argument("embedding line missing ':': " + line);
        const int site = static_cast<int>(parse_int(trim(text.substr(0, colon))));
        if (site < 0) throw std::invalid_argument("negative site in embedding");
        std::vector<int> chain;
        for (std::string_view token : split(text.substr(colon + 1), ' '))
            if (!token.empty()) {
                const int qubit = static_cast<int>(parse_int(token));
                if (qubit < 0) throw std::invalid_argument("negative qubit in embedding");
                chain.push_back(qubit);
            }
        if (chain.empty())
            throw std::invalid_argument("empty chain for site " + std::to_string(site));
        std::sort(chain.begin(), chain.end());
        if (std::adjacent_find(chain.begin(), chain.end()) != chain.end())
            throw std::invalid_argument("duplicate qubit in chain for site " +
                                        std::to_string(site));
        rows.emplace_back(site, std::move(chain));
        max_site = std::max(max_site, site);
    }
    Embedding emb;
    emb.chains.resize(max_site + 1);
    for (auto& [site, chain] : rows) {
        if (!emb.chains[site].empty()) throw std::invalid_argument("duplicate site in embedding");
        emb.chains[site] = std::move(chain);
    }
    for (std::size_t site = 0; site < emb.chains.size(); ++site)
        if (emb.chains[site].empty())
            throw std::invalid_argument("missing chain for site " + std::to_string(site));
    return emb;
}

void write_chain_stats(std::ostream& out, const ChainStats& stats) {
    out << "N,count\n";
    for (const auto& [n, count] : stats.counts) out << n << ',' << count << '\n';
}

}  // namespace annealkit
