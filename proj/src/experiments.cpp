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

#include "annealkit/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "annealkit/pegasus.hpp"
#include "annealkit/rng.hpp"
#include "annealkit/text_io.hpp"

namespace annealkit {
namespace {

namespace fs = std::filesystem;

// Seed streams.  Values sit far above any shot or round index, and each
// command derives points from its own base so batches at the same ratio stay
// independent across commands.
constexpr std::uint64_t kMeasureStream = 0x8000000000000010ULL;
constexpr std::uint64_t kTieStream = 0x8000000000000011ULL;
constexpr std::uint64_t kEmbedStream = 0x8000000000000012ULL;
constexpr std::uint64_t kSweepStream = 0x8000000000000020ULL;
constexpr std::uint64_t kSqMapStream = 0x8000000000000021ULL;
constexpr std::uint64_t kHistStream = 0x8000000000000022ULL;
constexpr std::uint64_t kCensusStream = 0x8000000000000023ULL;
constexpr std::uint64_t kShotsStream = 0x8000000000000024ULL;

// Ratio grids are built in integer milli-units so labels and spacing stay
// exact for step sizes like 0.02.
long long to_milli(double value) { return std::llround(value * 1000.0); }

bool parse_bool(std::string_view text) {
    if (text == "true") return true;
    if (text == "false") return false;
    throw std::runtime_error("expected true or false, got '" + std::string(text) + "'");
}

int parse_int32(std::string_view text) {
    const long long value = parse_int(text);
    if (value < std::numeric_limits<int>::min() || value > std::numeric_limits<int>::max())
        throw std::runtime_error("integer out of range '" + std::string(text) + "'");
    return static_cast<int>(value);
}

std::vector<double> parse_double_list(std::string_view text) {
    std::vector<double> out;
    for (std::string_view token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) throw std::runtime_error("empty list element");
        out.push_back(parse_double(token));
    }
    return out;
}

std::vector<int> parse_int_list(std::string_view text) {
    std::vector<int> out;
    for (std::string_view token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) throw std::runtime_error("empty list element");
        out.push_back(parse_int32(token));
    }
    return out;
}

std::vector<BoundaryCondition> parse_boundary_list(std::string_view text) {
    std::vector<BoundaryCondition> out;
    for (std::string_view token : split(text, ',')) {
        token = trim(token);
        if (token.empty()) throw std::runtime_error("empty list element");
        out.push_back(boundary_from_string(std::string(token)));
    }
    return out;
}

const char* tie_policy_name(TiePolicy policy) {
    return policy == TiePolicy::Coin ? "coin" : "discard";
}

TiePolicy tie_policy_from_string(std::string_view text) {
    if (text == "coin") return TiePolicy::Coin;
    if (text == "discard") return TiePolicy::Discard;
    throw std::runtime_error("unknown tie policy '" + std::string(text) + "'");
}

std::string join_doubles(const std::vector<double>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += format_double(values[i]);
    }
    return out;
}

std::string join_ints(const std::vector<int>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += std::to_string(values[i]);
    }
    return out;
}

std::string join_boundaries(const std::vector<BoundaryCondition>& values) {
    std::string out;
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (i > 0) out += ',';
        out += to_string(values[i]);
    }
    return out;
}

void apply_key(ExperimentConfig& config, std::string_view key, std::string_view value) {
    if (key == "L") config.L = parse_int32(value);
    else if (key == "j1") config.j1 = parse_double(value);
    else if (key == "boundary") config.boundary = boundary_from_string(std::string(value));
    else if (key == "ratio_min") config.ratio_min = parse_double(value);
    else if (key == "ratio_max") config.ratio_max = parse_double(value);
    else if (key == "ratio_step") config.ratio_step = parse_double(value);
    else if (key == "ratios") config.ratios = parse_double_list(value);
    else if (key == "n_shots") config.n_shots = parse_int32(value);
    else if (key == "sampler") config.sampler = sampler_from_string(std::string(value));
    else if (key == "sweeps") config.sweeps = parse_int32(value);
    else if (key == "t_start") config.t_start = parse_double(value);
    else if (key == "t_end") config.t_end = parse_double(value);
    else if (key == "gamma_start") config.gamma_start = parse_double(value);
    else if (key == "gamma_end") config.gamma_end = parse_double(value);
    else if (key == "trotter_slices") config.trotter_slices = parse_int32(value);
    else if (key == "slice_temperature") config.slice_temperature = parse_double(value);
    else if (key == "random_site_order") config.random_site_order = parse_bool(value);
    else if (key == "refine_rounds") config.refine_rounds = parse_int32(value);
    else if (key == "refine_shots") config.refine_shots = parse_int32(value);
    else if (key == "lambda0") config.lambda0 = parse_double(value);
    else if (key == "lambda_decay") config.lambda_decay = parse_double(value);
    else if (key == "embedded_mode") config.embedded_mode = parse_bool(value);
    else if (key == "pegasus_m") config.pegasus_m = parse_int32(value);
    else if (key == "chain_strength") config.chain_strength = parse_double(value);
    else if (key == "embed_tries") config.embed_tries = parse_int32(value);
    else if (key == "embed_max_no_improve") config.embed_max_no_improve = parse_int32(value);
    else if (key == "tie_policy") config.tie_policy = tie_policy_from_string(value);
    else if (key == "sq_ratios") config.sq_ratios = parse_double_list(value);
    else if (key == "hist_ratios") config.hist_ratios = parse_double_list(value);
    else if (key == "hist_shots") config.hist_shots = parse_int32(value);
    else if (key == "census_L") config.census_L = parse_int_list(value);
    else if (key == "census_boundaries") config.census_boundaries = parse_boundary_list(value);
    else if (key == "census_seeds") config.census_seeds = parse_int32(value);
    else if (key == "ratio") config.ratio = parse_double(value);
    else if (key == "seed") config.seed = parse_uint64(value);
    else if (key == "output_dir") config.output_dir = std::string(value);
    else throw std::runtime_error("unknown config key '" + std::string(key) + "'");
}

void check_ratio_list(const std::vector<double>& values, const char* name) {
    if (values.empty()) throw std::invalid_argument(std::string(name) + " must not be empty");
    for (std::size_t i = 0; i < values.size(); ++i) {
        if (values[i] < 0.0)
            throw std::invalid_argument(std::string(name) + " entries must be non-negative");
        if (i > 0 && !(values[i] > values[i - 1]))
            throw std::invalid_argument(std::string(name) + " must be strictly increasing");
    }
}

void ensure_dir(const fs::path& path) {
    std::error_code ec;
    fs::create_directories(path, ec);
    if (ec)
        throw std::runtime_error("cannot create directory " + path.string() + ": " + ec.message());
}

std::ofstream open_output(const fs::path& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    return out;
}

void write_config_echo(const ExperimentConfig& config) {
    auto out = open_output(fs::path(config.output_dir) / "config.txt");
    config.echo(out);
}

// Commas and newlines inside error messages would corrupt the failure CSVs.
std::string csv_safe(std::string text) {
    for (char& c : text)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return text;
}

// Completed shards are reused on resume.  Discard-policy embedded batches may
// legitimately hold fewer shots than requested, so those accept short files;
// writes go through a temp file + rename so a partial write never looks
// complete.
bool shards_may_be_short(const ExperimentConfig& config) {
    return config.embedded_mode && config.tie_policy == TiePolicy::Discard;
}

std::optional<ShotBatch> load_shard(const fs::path& path, int expected_shots, int n_sites,
                                    bool allow_short) {
    std::ifstream in(path);
    if (!in) return std::nullopt;
    ShotBatch batch;
    try {
        batch = read_shot_csv(in);
    } catch (const std::exception&) {
        return std::nullopt;
    }
    const int n = batch.n_shots();
    if (allow_short ? (n < 1 || n > expected_shots) : (n != expected_shots)) return std::nullopt;
    for (const Shot& shot : batch.shots)
        if (shot.config.size() != n_sites) return std::nullopt;
    return batch;
}

void save_shard(const fs::path& path, const ShotBatch& batch) {
    fs::path tmp = path;
    tmp += ".tmp";
    {
        auto out = open_output(tmp);
        write_shot_csv(out, batch, true);
        out.close();
        if (out.fail()) throw std::runtime_error("failed writing " + tmp.string());
    }
    fs::rename(tmp, path);
}

// Shared per-point sampling: plain shots, refinement, Pegasus embedding, or
// refinement driven through the embedding.  The embedding is found once per
// runner (topology does not depend on the coupling ratio) with a seed derived
// from the config seed alone, so every point and the embed command agree on
// it.
class PointRunner {
  public:
    explicit PointRunner(const ExperimentConfig& config)
        : config_(config), schedule_(config.schedule()) {}

    // Returns n_shots logical shots with coupling-only energies.  Throws when
    // embedding fails or the tie policy discards every shot.
    ShotBatch sample(double ratio_value, int n_shots, std::uint64_t point_seed) {
        const ProblemGraph graph = build_lattice(config_.lattice_at(ratio_value));
        if (!config_.embedded_mode) {
            if (config_.refine_rounds > 0) {
                const auto refined =
                    refine_constraints(graph, schedule_, config_.refine_rounds,
                                       config_.refine_shots, config_.lambda0,
                                       config_.lambda_decay, point_seed);
                return run_shots(apply_bias(graph, refined.first.g), schedule_, n_shots,
                                 derive_seed(point_seed, kMeasureStream));
            }
            return run_shots(graph, schedule_, n_shots, point_seed);
        }

        ensure_embedding(graph);
        ShotBatch batch;
        if (config_.refine_rounds > 0) {
            auto sampler = [&](const std::vector<double>& g, int round) {
                return embedded_batch(graph, g, config_.refine_shots,
                                      derive_seed(point_seed, round));
            };
            const auto refined =
                refine_constraints(graph.n_sites(), sampler, config_.refine_rounds,
                                   config_.lambda0, config_.lambda_decay, point_seed);
            batch = embedded_batch(graph, refined.first.g, n_shots,
                                   derive_seed(point_seed, kMeasureStream));
        } else {
            batch = embedded_batch(graph, {}, n_shots, point_seed);
        }
        if (batch.shots.empty())
            throw std::runtime_error("every shot was discarded by the tie policy");
        return batch;
    }

  private:
    static ProblemGraph apply_bias(const ProblemGraph& graph, const std::vector<double>& g) {
        const bool biased = std::any_of(g.begin(), g.end(), [](double b) { return b != 0.0; });
        return biased ? graph.with_fields(g) : graph;
    }

    void ensure_embedding(const ProblemGraph& graph) {
        if (embed_attempted_) {
            if (!embedding_) throw std::runtime_error(embed_error_);
            return;
        }
        embed_attempted_ = true;
        target_.emplace(build_pegasus(config_.pegasus_m));
        EmbedParams params;
        params.tries = config_.embed_tries;
        params.max_no_improve = config_.embed_max_no_improve;
        params.seed = derive_seed(config_.seed, kEmbedStream);
        EmbedResult found = find_embedding(graph, *target_, params);
        if (!found.ok()) {
            embed_error_ = "embedding failed with " + std::to_string(found.unplaced_sites) +
                           " sites unplaced";
            throw std::runtime_error(embed_error_);
        }
        embedding_ = std::move(*found.embedding);
    }

    ShotBatch embedded_batch(const ProblemGraph& graph, const std::vector<double>& g, int n,
                             std::uint64_t base_seed) {
        const ProblemGraph biased = apply_bias(graph, g);
        const double strength = config_.chain_strength > 0.0 ? config_.chain_strength
                                                             : default_chain_strength(biased);
        const EmbeddedProblem physical = embed_problem(biased, *target_, *embedding_, strength);
        const ShotBatch raw = run_shots(physical.graph, schedule_, n, base_seed);
        return resolve_batch(raw, physical.chains, graph, derive_seed(base_seed, kTieStream),
                             config_.tie_policy);
    }

    const ExperimentConfig& config_;
    AnnealSchedule schedule_;
    bool embed_attempted_ = false;
    std::optional<PegasusGraph> target_;
    std::optional<Embedding> embedding_;
    std::string embed_error_;
};

}  // namespace

ExperimentConfig ExperimentConfig::from_stream(std::istream& in) {
    ExperimentConfig config;
    std::set<std::string, std::less<>> seen;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view text = line;
        if (const auto hash = text.find('#'); hash != std::string_view::npos)
            text = text.substr(0, hash);
        text = trim(text);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": expected key = value");
        const std::string_view key = trim(text.substr(0, eq));
        const std::string_view value = trim(text.substr(eq + 1));
        if (key.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key");
        if (!seen.insert(std::string(key)).second)
            throw std::runtime_error("config line " + std::to_string(line_no) +
                                     ": duplicate key '" + std::string(key) + "'");
        try {
            apply_key(config, key, value);
        } catch (const std::exception& e) {
            throw std::runtime_error("config line " + std::to_string(line_no) + ": " + e.what());
        }
    }
    return config;
}

ExperimentConfig ExperimentConfig::from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file " + path);
    return from_stream(in);
}

void ExperimentConfig::validate() const {
    if (L < 2) throw std::invalid_argument("L must be at least 2");
    if (boundary == BoundaryCondition::PBC && L < 3)
        throw std::invalid_argument("PBC requires L >= 3");
    if (!(j1 > 0.0)) throw std::invalid_argument("j1 must be positive");

    const std::vector<double> grid = ratio_grid();
    if (grid.empty()) throw std::invalid_argument("ratio grid is empty");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] < 0.0) throw std::invalid_argument("ratios must be non-negative");
        if (i > 0 && !(grid[i] > grid[i - 1]))
            throw std::invalid_argument("ratios must be strictly increasing");
    }
    if (ratio < 0.0) throw std::invalid_argument("ratio must be non-negative");

    if (n_shots < 1) throw std::invalid_argument("n_shots must be at least 1");
    schedule().validate();

    if (refine_rounds < 0) throw std::invalid_argument("refine_rounds must be non-negative");
    if (refine_shots < 1) throw std::invalid_argument("refine_shots must be at least 1");
    if (lambda0 < 0.0) throw std::invalid_argument("lambda0 must be non-negative");
    if (!(lambda_decay > 0.0 && lambda_decay <= 1.0))
        throw std::invalid_argument("lambda_decay must be in (0, 1]");

    if (pegasus_m < 2) throw std::invalid_argument("pegasus_m must be at least 2");
    if (chain_strength < 0.0) throw std::invalid_argument("chain_strength must be non-negative");
    if (embed_tries < 1) throw std::invalid_argument("embed_tries must be at least 1");
    if (embed_max_no_improve < 1)
        throw std::invalid_argument("embed_max_no_improve must be at least 1");

    check_ratio_list(sq_ratios, "sq_ratios");
    check_ratio_list(hist_ratios, "hist_ratios");
    if (hist_shots < 1) throw std::invalid_argument("hist_shots must be at least 1");

    if (census_L.empty()) throw std::invalid_argument("census_L must not be empty");
    if (census_boundaries.empty())
        throw std::invalid_argument("census_boundaries must not be empty");
    for (std::size_t i = 0; i < census_boundaries.size(); ++i)
        for (std::size_t j = i + 1; j < census_boundaries.size(); ++j)
            if (census_boundaries[i] == census_boundaries[j])
                throw std::invalid_argument("census_boundaries must be unique");
    const bool census_pbc =
        std::find(census_boundaries.begin(), census_boundaries.end(),
                  BoundaryCondition::PBC) != census_boundaries.end();
    for (const int size : census_L) {
        if (size < 2) throw std::invalid_argument("census_L entries must be at least 2");
        if (census_pbc && size < 3)
            throw std::invalid_argument("census_L entries must be at least 3 with PBC");
    }
    if (census_seeds < 1) throw std::invalid_argument("census_seeds must be at least 1");

    if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
}

std::vector<double> ExperimentConfig::ratio_grid() const {
    if (!ratios.empty()) return ratios;
    const long long step = to_milli(ratio_step);
    if (step <= 0) throw std::invalid_argument("ratio_step must be at least 0.001");
    std::vector<double> grid;
    for (long long r = to_milli(ratio_min); r <= to_milli(ratio_max); r += step)
        grid.push_back(static_cast<double>(r) / 1000.0);
    return grid;
}

AnnealSchedule ExperimentConfig::schedule() const {
    AnnealSchedule s;
    s.kind = sampler;
    s.sweeps = sweeps;
    s.t_start = t_start;
    s.t_end = t_end;
    s.gamma_start = gamma_start;
    s.gamma_end = gamma_end;
    s.trotter_slices = trotter_slices;
    s.slice_temperature = slice_temperature;
    s.random_site_order = random_site_order;
    return s;
}

LatticeSpec ExperimentConfig::lattice_at(double ratio_value) const {
    LatticeSpec spec;
    spec.L = L;
    spec.j1 = j1;
    spec.j2 = ratio_value * j1;
    spec.bc = boundary;
    return spec;
}

void ExperimentConfig::echo(std::ostream& out) const {
    out << "L = " << L << "\n";
    out << "j1 = " << format_double(j1) << "\n";
    out << "boundary = " << to_string(boundary) << "\n";
    out << "ratios = " << join_doubles(ratio_grid()) << "\n";
    out << "n_shots = " << n_shots << "\n";
    out << "sampler = " << to_string(sampler) << "\n";
    out << "sweeps = " << sweeps << "\n";
    out << "t_start = " << format_double(t_start) << "\n";
    out << "t_end = " << format_double(t_end) << "\n";
    out << "gamma_start = " << format_double(gamma_start) << "\n";
    out << "gamma_end = " << format_double(gamma_end) << "\n";
    out << "trotter_slices = " << trotter_slices << "\n";
    out << "slice_temperature = " << format_double(slice_temperature) << "\n";
    out << "random_site_order = " << (random_site_order ? "true" : "false") << "\n";
    out << "refine_rounds = " << refine_rounds << "\n";
    out << "refine_shots = " << refine_shots << "\n";
    out << "lambda0 = " << format_double(lambda0) << "\n";
    out << "lambda_decay = " << format_double(lambda_decay) << "\n";
    out << "embedded_mode = " << (embedded_mode ? "true" : "false") << "\n";
    out << "pegasus_m = " << pegasus_m << "\n";
    out << "chain_strength = " << format_double(chain_strength) << "\n";
    out << "embed_tries = " << embed_tries << "\n";
    out << "embed_max_no_improve = " << embed_max_no_improve << "\n";
    out << "tie_policy = " << tie_policy_name(tie_policy) << "\n";
    out << "sq_ratios = " << join_doubles(sq_ratios) << "\n";
    out << "hist_ratios = " << join_doubles(hist_ratios) << "\n";
    out << "hist_shots = " << hist_shots << "\n";
    out << "census_L = " << join_ints(census_L) << "\n";
    out << "census_boundaries = " << join_boundaries(census_boundaries) << "\n";
    out << "census_seeds = " << census_seeds << "\n";
    out << "ratio = " << format_double(ratio) << "\n";
    out << "seed = " << seed << "\n";
    out << "output_dir = " << output_dir << "\n";
}

SweepResult run_sweep(const ExperimentConfig& config, bool force) {
    config.validate();
    const std::vector<double> grid = config.ratio_grid();
    const fs::path out_dir(config.output_dir);
    const fs::path shard_dir = out_dir / "shards";
    ensure_dir(shard_dir);
    write_config_echo(config);

    PointRunner runner(config);
    const std::uint64_t base = derive_seed(config.seed, kSweepStream);
    const int n_sites = config.L * config.L;
    const bool allow_short = shards_may_be_short(config);

    SweepResult result;
    std::vector<std::pair<double, Observables>> measured;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double ratio_value = grid[i];
        const fs::path shard =
            shard_dir / ("sweep_" + format_double(ratio_value) + ".csv");
        std::optional<ShotBatch> batch;
        if (!force) batch = load_shard(shard, config.n_shots, n_sites, allow_short);
        if (!batch) {
            try {
                batch = runner.sample(ratio_value, config.n_shots, derive_seed(base, i));
            } catch (const std::exception& e) {
                result.failures.emplace_back(ratio_value, e.what());
                continue;
            }
            save_shard(shard, *batch);
        }
        const ProblemGraph graph = build_lattice(config.lattice_at(ratio_value));
        measured.emplace_back(ratio_value, compute_observables(graph, *batch, false));
    }

    if (measured.size() >= 2) result.transition = detect_transition(measured);

    result.rows.reserve(measured.size());
    for (std::size_t i = 0; i < measured.size(); ++i) {
        SweepRow row;
        row.ratio = measured[i].first;
        row.M = measured[i].second.M;
        row.E_per_site = measured[i].second.E_per_site;
        row.chi = measured[i].second.chi;
        row.transition_flag =
            static_cast<int>(i) == result.transition.crossing_index ? 1 : 0;
        result.rows.push_back(row);
    }

    {
        auto out = open_output(out_dir / "sweep.csv");
        out << "ratio,M,E,chi,transition_flag\n";
        for (const SweepRow& row : result.rows)
            out << format_double(row.ratio) << ',' << format_double(row.M) << ','
                << format_double(row.E_per_site) << ',' << format_double(row.chi) << ','
                << row.transition_flag << '\n';
    }
    if (!result.failures.empty()) {
        auto out = open_output(out_dir / "sweep_failures.csv");
        out << "ratio,error\n";
        for (const auto& [ratio_value, message] : result.failures)
            out << format_double(ratio_value) << ',' << csv_safe(message) << '\n';
    }
    return result;
}

SqMapResult run_sq_maps(const ExperimentConfig& config, bool force) {
    config.validate();
    const fs::path out_dir(config.output_dir);
    const fs::path shard_dir = out_dir / "shards";
    ensure_dir(shard_dir);
    write_config_echo(config);

    PointRunner runner(config);
    const std::uint64_t base = derive_seed(config.seed, kSqMapStream);
    const int n_sites = config.L * config.L;
    const bool allow_short = shards_may_be_short(config);

    SqMapResult result;
    for (std::size_t i = 0; i < config.sq_ratios.size(); ++i) {
        const double ratio_value = config.sq_ratios[i];
        const std::string label = format_double(ratio_value);
        const fs::path shard = shard_dir / ("sq_" + label + ".csv");
        std::optional<ShotBatch> batch;
        if (!force) batch = load_shard(shard, config.n_shots, n_sites, allow_short);
        if (!batch) {
            try {
                batch = runner.sample(ratio_value, config.n_shots, derive_seed(base, i));
            } catch (const std::exception& e) {
                result.failures.emplace_back(ratio_value, e.what());
                continue;
            }
            save_shard(shard, *batch);
        }
        SqMapEntry entry;
        entry.ratio = ratio_value;
        entry.grid = structure_factor(*batch, config.L);
        entry.peak = entry.grid.argmax();
        {
            auto out = open_output(out_dir / ("sq_" + label + ".csv"));
            write_sq_csv(out, entry.grid);
        }
        result.entries.push_back(std::move(entry));
    }
    if (!result.failures.empty()) {
        auto out = open_output(out_dir / "sq_failures.csv");
        out << "ratio,error\n";
        for (const auto& [ratio_value, message] : result.failures)
            out << format_double(ratio_value) << ',' << csv_safe(message) << '\n';
    }
    return result;
}

HistogramResult run_m_histograms(const ExperimentConfig& config, bool force) {
    config.validate();
    const fs::path out_dir(config.output_dir);
    const fs::path shard_dir = out_dir / "shards";
    ensure_dir(shard_dir);
    write_config_echo(config);

    PointRunner runner(config);
    const std::uint64_t base = derive_seed(config.seed, kHistStream);
    const int n_sites = config.L * config.L;
    const bool allow_short = shards_may_be_short(config);

    HistogramResult result;
    for (std::size_t i = 0; i < config.hist_ratios.size(); ++i) {
        const double ratio_value = config.hist_ratios[i];
        const std::string label = format_double(ratio_value);
        const fs::path shard = shard_dir / ("hist_" + label + ".csv");
        std::optional<ShotBatch> batch;
        if (!force) batch = load_shard(shard, config.hist_shots, n_sites, allow_short);
        if (!batch) {
            try {
                batch = runner.sample(ratio_value, config.hist_shots, derive_seed(base, i));
            } catch (const std::exception& e) {
                result.failures.emplace_back(ratio_value, e.what());
                continue;
            }
            save_shard(shard, *batch);
        }
        HistogramEntry entry;
        entry.ratio = ratio_value;
        entry.histogram = m_histogram(*batch);
        for (const auto& [m, p] : entry.histogram)
            if (p >= 0.02) ++entry.modality;
        {
            auto out = open_output(out_dir / ("hist_" + label + ".csv"));
            write_histogram_csv(out, entry.histogram);
        }
        result.entries.push_back(std::move(entry));
    }
    if (!result.failures.empty()) {
        auto out = open_output(out_dir / "hist_failures.csv");
        out << "ratio,error\n";
        for (const auto& [ratio_value, message] : result.failures)
            out << format_double(ratio_value) << ',' << csv_safe(message) << '\n';
    }
    return result;
}

CensusResult run_chain_census(const ExperimentConfig& config, bool force) {
    config.validate();
    const fs::path out_dir(config.output_dir);
    const fs::path shard_dir = out_dir / "shards";
    ensure_dir(shard_dir);
    write_config_echo(config);

    const PegasusGraph target = build_pegasus(config.pegasus_m);
    const std::uint64_t base = derive_seed(config.seed, kCensusStream);

    CensusResult result;
    long long cell = 0;
    for (const BoundaryCondition bc : config.census_boundaries) {
        for (const int L : config.census_L) {
            LatticeSpec spec;
            spec.L = L;
            spec.j1 = config.j1;
            spec.j2 = config.ratio * config.j1;
            spec.bc = bc;
            const ProblemGraph source = build_lattice(spec);
            for (int k = 0; k < config.census_seeds; ++k, ++cell) {
                const fs::path shard =
                    shard_dir / ("census_L" + std::to_string(L) + "_" + to_string(bc) + "_" +
                                 std::to_string(k) + ".txt");
                std::optional<Embedding> emb;
                if (!force) {
                    std::ifstream in(shard);
                    if (in) {
                        try {
                            Embedding loaded = read_embedding(in);
                            if (verify_embedding(source, target, loaded).ok)
                                emb = std::move(loaded);
                        } catch (const std::exception&) {
                        }
                    }
                }
                if (!emb) {
                    EmbedParams params;
                    params.tries = config.embed_tries;
                    params.max_no_improve = config.embed_max_no_improve;
                    params.seed = derive_seed(base, cell);
                    EmbedResult found = find_embedding(source, target, params);
                    if (!found.ok()) {
                        CensusFailure failure;
                        failure.L = L;
                        failure.boundary = bc;
                        failure.seed_index = k;
                        failure.unplaced = found.unplaced_sites;
                        result.failures.push_back(failure);
                        continue;
                    }
                    emb = std::move(*found.embedding);
                    fs::path tmp = shard;
                    tmp += ".tmp";
                    {
                        auto out = open_output(tmp);
                        write_embedding(out, *emb);
                        out.close();
                        if (out.fail())
                            throw std::runtime_error("failed writing " + tmp.string());
                    }
                    fs::rename(tmp, shard);
                }
                const ChainStats stats = chain_stats(*emb);
                for (const auto& [chain_size, count] : stats.counts) {
                    CensusRow row;
                    row.L = L;
                    row.boundary = bc;
                    row.seed_index = k;
                    row.chain_size = chain_size;
                    row.count = count;
                    result.rows.push_back(row);
                }
            }
        }
    }

    {
        auto out = open_output(out_dir / "census.csv");
        out << "L,bc,seed,N,count\n";
        for (const CensusRow& row : result.rows)
            out << row.L << ',' << to_string(row.boundary) << ',' << row.seed_index << ','
                << row.chain_size << ',' << row.count << '\n';
    }
    if (!result.failures.empty()) {
        auto out = open_output(out_dir / "census_failures.csv");
        out << "L,bc,seed,unplaced\n";
        for (const CensusFailure& failure : result.failures)
            out << failure.L << ',' << to_string(failure.boundary) << ',' << failure.seed_index
                << ',' << failure.unplaced << '\n';
    }
    return result;
}

ShotRunResult run_point_shots(const ExperimentConfig& config, bool force) {
    config.validate();
    const fs::path out_dir(config.output_dir);
    ensure_dir(out_dir);
    write_config_echo(config);

    const fs::path path = out_dir / "shots.csv";
    const int n_sites = config.L * config.L;
    std::optional<ShotBatch> batch;
    if (!force) batch = load_shard(path, config.n_shots, n_sites, shards_may_be_short(config));
    if (!batch) {
        PointRunner runner(config);
        batch = runner.sample(config.ratio, config.n_shots,
                              derive_seed(config.seed, kShotsStream));
        save_shard(path, *batch);
    }

    ShotRunResult result;
    result.batch = std::move(*batch);
    const ProblemGraph graph = build_lattice(config.lattice_at(config.ratio));
    result.observables = compute_observables(graph, result.batch, true);
    return result;
}

EmbedRunResult run_embed(const ExperimentConfig& config) {
    config.validate();
    const fs::path out_dir(config.output_dir);
    ensure_dir(out_dir);
    write_config_echo(config);

    const ProblemGraph source = build_lattice(config.lattice_at(config.ratio));
    const PegasusGraph target = build_pegasus(config.pegasus_m);
    EmbedParams params;
    params.tries = config.embed_tries;
    params.max_no_improve = config.embed_max_no_improve;
    params.seed = derive_seed(config.seed, kEmbedStream);
    EmbedResult found = find_embedding(source, target, params);
    if (!found.ok())
        throw std::runtime_error("embedding failed with " + std::to_string(found.unplaced_sites) +
                                 " sites unplaced");

    EmbedRunResult result;
    result.embedding = std::move(*found.embedding);
    result.stats = chain_stats(result.embedding);
    {
        auto out = open_output(out_dir / "embedding.txt");
        write_embedding(out, result.embedding);
    }
    {
        auto out = open_output(out_dir / "chain_stats.csv");
        write_chain_stats(out, result.stats);
    }
    return result;
}

void write_manifest(const std::string& output_dir, const ExperimentConfig& config,
                    const std::string& command, double wall_seconds) {
    ensure_dir(output_dir);
    auto out = open_output(fs::path(output_dir) / "manifest.txt");
    out << "tool = " << kToolVersion << "\n";
    out << "command = " << command << "\n";
    out << "seed = " << config.seed << "\n";
    out << "wall_seconds = " << format_double(wall_seconds) << "\n";
    out << "\n[config]\n";
    config.echo(out);
}

}  // namespace annealkit
