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

#include <chrono>
#include <cstdint>
#include <iostream>
#include <map>
#include <string>
#include <utility>

#include <CLI11.hpp>

#include "annealkit/experiments.hpp"
#include "annealkit/text_io.hpp"

namespace {

using namespace annealkit;

struct CommonArgs {
    std::string config_path;
    std::string output_dir;
    std::uint64_t seed = 0;
    bool force = false;
};

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "Run configuration file (key = value lines)");
    cmd->add_option("--seed", args.seed, "Override the configured seed");
    cmd->add_option("--out", args.output_dir, "Override the configured output directory");
    cmd->add_flag("--force", args.force, "Recompute results even when shards exist");
}

ExperimentConfig load_config(const CLI::App* cmd, const CommonArgs& args) {
    ExperimentConfig config;
    if (!args.config_path.empty()) config = ExperimentConfig::from_file(args.config_path);
    if (cmd->count("--seed") > 0) config.seed = args.seed;
    if (!args.output_dir.empty()) config.output_dir = args.output_dir;
    return config;
}

template <typename Fn>
void with_manifest(const ExperimentConfig& config, const std::string& command, Fn&& fn) {
    const auto start = std::chrono::steady_clock::now();
    fn();
    const double wall =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    write_manifest(config.output_dir, config, command, wall);
}

void print_failures(const std::vector<std::pair<double, std::string>>& failures,
                    const char* csv_name) {
    if (failures.empty()) return;
    std::cout << failures.size() << " point(s) failed, see " << csv_name << "\n";
    for (const auto& [ratio_value, message] : failures)
        std::cout << "  ratio " << format_double(ratio_value) << ": " << message << "\n";
}

void run_sweep_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "sweep", [&] {
        const SweepResult result = run_sweep(config, args.force);
        std::cout << "sweep: " << result.rows.size() << " point(s) -> " << config.output_dir
                  << "/sweep.csv\n";
        if (result.transition.critical_ratio) {
            std::cout << "transition estimate: J2/J1 = "
                      << format_double(*result.transition.critical_ratio) << " (chi peak at "
                      << format_double(result.transition.chi_peak_ratio) << ")\n";
        } else {
            std::cout << "no transition detected\n";
        }
        print_failures(result.failures, "sweep_failures.csv");
    });
}

void run_sqmap_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "sqmap", [&] {
        const SqMapResult result = run_sq_maps(config, args.force);
        for (const SqMapEntry& entry : result.entries)
            std::cout << "S(q) at ratio " << format_double(entry.ratio) << ": peak index ("
                      << entry.peak.first << ", " << entry.peak.second << ")\n";
        print_failures(result.failures, "sq_failures.csv");
    });
}

void run_hist_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "hist", [&] {
        const HistogramResult result = run_m_histograms(config, args.force);
        for (const HistogramEntry& entry : result.entries)
            std::cout << "M histogram at ratio " << format_double(entry.ratio) << ": modality "
                      << entry.modality << "\n";
        print_failures(result.failures, "hist_failures.csv");
    });
}

void run_chains_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "chains", [&] {
        const CensusResult result = run_chain_census(config, args.force);

        // Per (boundary, L) summary over seeds.
        struct Agg {
            long chains2 = 0;
            long qubits = 0;
            std::map<int, bool> seeds;
        };
        std::map<std::pair<std::string, int>, Agg> cells;
        for (const CensusRow& row : result.rows) {
            Agg& agg = cells[{to_string(row.boundary), row.L}];
            if (row.chain_size == 2) agg.chains2 += row.count;
            agg.qubits += static_cast<long>(row.chain_size) * row.count;
            agg.seeds[row.seed_index] = true;
        }
        for (const auto& [key, agg] : cells) {
            const double n = static_cast<double>(agg.seeds.size());
            std::cout << "census L=" << key.second << " " << key.first << " over "
                      << agg.seeds.size()
                      << " seed(s): mean 2-chains " << format_double(agg.chains2 / n)
                      << ", mean qubits " << format_double(agg.qubits / n) << "\n";
        }
        if (!result.failures.empty()) {
            std::cout << result.failures.size()
                      << " cell(s) failed to embed, see census_failures.csv\n";
            for (const CensusFailure& failure : result.failures)
                std::cout << "  L=" << failure.L << " " << to_string(failure.boundary) << " seed "
                          << failure.seed_index << ": " << failure.unplaced << " unplaced\n";
        }
    });
}

void run_embed_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "embed", [&] {
        const EmbedRunResult result = run_embed(config);
        std::cout << "embedded " << config.L << "x" << config.L << " "
                  << to_string(config.boundary) << " lattice into P_" << config.pegasus_m << ": "
                  << result.embedding.chains.size() << " chains, " << result.stats.total_qubits
                  << " qubits, max chain " << result.stats.max_chain << ", chain strength "
                  << format_double(result.embedding.chain_strength) << "\n";
    });
}

void run_shots_command(const CLI::App* cmd, const CommonArgs& args) {
    const ExperimentConfig config = load_config(cmd, args);
    with_manifest(config, "shots", [&] {
        const ShotRunResult result = run_point_shots(config, args.force);
        const auto peak = result.observables.sq.argmax();
        std::cout << result.batch.n_shots() << " shot(s) at ratio " << format_double(config.ratio)
                  << ": M = " << format_double(result.observables.M)
                  << ", E/site = " << format_double(result.observables.E_per_site)
                  << ", chi = " << format_double(result.observables.chi) << ", S(q) peak index ("
                  << peak.first << ", " << peak.second << ")\n";
    });
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Frustrated-lattice annealing emulator and Pegasus embedding toolkit"};
    app.require_subcommand(1);

    CommonArgs args;
    CLI::App* sweep_cmd = app.add_subcommand("sweep", "Coupling-ratio sweep with observables");
    CLI::App* sqmap_cmd = app.add_subcommand("sqmap", "Structure-factor maps at fixed ratios");
    CLI::App* hist_cmd = app.add_subcommand("hist", "Magnetization histograms at fixed ratios");
    CLI::App* chains_cmd = app.add_subcommand("chains", "Chain-size census across lattice sizes");
    CLI::App* embed_cmd = app.add_subcommand("embed", "Embed one lattice and write the chains");
    CLI::App* shots_cmd = app.add_subcommand("shots", "Raw shots at a single coupling ratio");
    for (CLI::App* cmd : {sweep_cmd, sqmap_cmd, hist_cmd, chains_cmd, embed_cmd, shots_cmd})
        add_common(cmd, args);

    sweep_cmd->callback([&] { run_sweep_command(sweep_cmd, args); });
    sqmap_cmd->callback([&] { run_sqmap_command(sqmap_cmd, args); });
    hist_cmd->callback([&] { run_hist_command(hist_cmd, args); });
    chains_cmd->callback([&] { run_chains_command(chains_cmd, args); });
    embed_cmd->callback([&] { run_embed_command(embed_cmd, args); });
    shots_cmd->callback([&] { run_shots_command(shots_cmd, args); });

    try {
        CLI11_PARSE(app, argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
