#include "lorma/cli.hpp"

#include <algorithm>
#include <atomic>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "lorma/config.hpp"
#include "lorma/gradients.hpp"
#include "lorma/io.hpp"
#include "lorma/metrics.hpp"
#include "lorma/rng.hpp"
#include "lorma/theory.hpp"

namespace lorma::cli {

namespace {

using nlohmann::json;

struct RunSummary {
    std::string adapter;
    std::string variant;
    std::uint64_t seed = 0;
    double final_loss = 0.0;
    double auc = 0.0;
};

void write_text_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open " + path.string() + " for writing");
    out << text;
    if (!out) throw IoError("write failed for " + path.string());
}

std::string comparison_table(const std::vector<RunSummary>& summaries,
                             const std::vector<AdapterEntry>& adapters) {
    // Seed-averaged AUC and final loss per adapter, plus the percentage AUC
    // reduction against the lora baseline (first adapter if no lora present).
    struct Row {
        std::string name;
        double mean_final = 0.0;
        double mean_auc = 0.0;
        int count = 0;
    };
    std::vector<Row> rows;
    for (const auto& entry : adapters) rows.push_back({entry.name, 0, 0, 0});
    for (const auto& s : summaries) {
        for (auto& row : rows) {
            if (row.name == s.adapter) {
                row.mean_final += s.final_loss;
                row.mean_auc += s.auc;
                row.count += 1;
            }
        }
    }
    for (auto& row : rows) {
        if (row.count > 0) {
            row.mean_final /= row.count;
            row.mean_auc /= row.count;
        }
    }
    const Row* baseline = &rows.front();
    for (std::size_t i = 0; i < adapters.size(); ++i) {
        if (adapters[i].config.variant == AdapterVariant::lora) {
            baseline = &rows[i];
            break;
        }
    }
    std::ostringstream out;
    out << "adapter,mean_final_loss,mean_auc,pct_auc_reduction_vs_" << baseline->name
        << "\n";
    for (const auto& row : rows) {
        out << row.name << ',' << format_double(row.mean_final) << ','
            << format_double(row.mean_auc) << ','
            << format_double(auc_reduction_percent(row.mean_auc, baseline->mean_auc))
            << '\n';
    }
    return out.str();
}

int run_one_config(const std::filesystem::path& path,
                   const std::optional<std::filesystem::path>& output_override,
                   std::ostream& out, std::mutex& out_mutex) {
    const ExperimentConfig config = [&] {
        ExperimentConfig c = load_experiment_config(path);
        if (output_override) c.output_dir = *output_override;
        return c;
    }();

    std::vector<RunSummary> summaries;
    for (const auto& entry : config.adapters) {
        for (int rep = 0; rep < config.num_seeds; ++rep) {
            const std::uint64_t run_seed = config.seed + static_cast<std::uint64_t>(rep);
            const Task task = make_task(config.task, run_seed);

            AdapterConfig adapter_cfg = entry.config;
            if (!entry.seed_pinned) adapter_cfg.seed = run_seed;
            AdapterState state = init_adapter(task.w0, adapter_cfg);

            LrSchedule schedule = config.schedule;
            const long steps_per_epoch =
                (config.task.n_train + config.batch - 1) / config.batch;
            schedule.total_steps = steps_per_epoch * config.epochs;

            TrainOptions options{config.epochs, config.batch, run_seed};
            auto [trained, log] = train(std::move(state), task, config.optimizer,
                                        schedule, options);

            const auto run_dir = config.output_dir / entry.name /
                                 ("seed_" + std::to_string(run_seed));
            std::error_code ec;
            std::filesystem::create_directories(run_dir, ec);
            if (ec) throw IoError("cannot create " + run_dir.string());

            {
                std::ostringstream csv;
                write_loss_csv(log, csv);
                write_text_file(run_dir / "loss.csv", csv.str());
            }
            {
                std::ostringstream csv;
                write_rank_csv(log, csv);
                write_text_file(run_dir / "rank_trace.csv", csv.str());
            }
            save_adapter(trained, run_dir, "adapter");
            save_matrix(delta_w(trained), run_dir / "delta_w.lrma");

            json summary{{"adapter", entry.name},
                         {"variant", to_string(entry.config.variant)},
                         {"side", to_string(entry.config.side)},
                         {"seed", run_seed},
                         {"run_hash", hash_hex(run_hash(config, entry, run_seed))},
                         {"steps", log.step_losses.size()},
                         {"final_loss", final_loss(log)},
                         {"auc", loss_auc(log)},
                         {"wall_seconds", log.wall_seconds}};
            write_text_file(run_dir / "summary.json", summary.dump(2) + "\n");

            summaries.push_back({entry.name, to_string(entry.config.variant),
                                 run_seed, final_loss(log), loss_auc(log)});
        }
    }

    std::string table;
    if (config.adapters.size() > 1) {
        table = comparison_table(summaries, config.adapters);
        write_text_file(config.output_dir / "comparison.csv", table);
    }

    {
        std::scoped_lock lock(out_mutex);
        out << path.string() << ": " << summaries.size() << " run(s) -> "
            << config.output_dir.string() << "\n";
        for (const auto& s : summaries) {
            out << "  " << s.adapter << " seed " << s.seed << ": final_loss "
                << format_double(s.final_loss) << ", auc " << format_double(s.auc)
                << "\n";
        }
        if (!table.empty()) out << table;
    }
    return kExitOk;
}

int classify(const Error& e, std::ostream& out) {
    out.flush();
    std::cerr << "lorma: error: " << e.what() << "\n";
    if (dynamic_cast<const DivergenceError*>(&e)) return kExitDiverged;
    if (dynamic_cast<const IoError*>(&e)) return kExitIo;
    // Parse, config, format, shape and rank problems are usage errors.
    return kExitUsage;
}

}  // namespace

int cmd_run(const std::vector<std::filesystem::path>& config_paths, int jobs,
            std::ostream& out,
            const std::optional<std::filesystem::path>& output_override) {
    if (config_paths.empty()) {
        std::cerr << "lorma: error: no config files given\n";
        return kExitUsage;
    }
    if (output_override && config_paths.size() > 1) {
        std::cerr << "lorma: error: --out needs a single config file\n";
        return kExitUsage;
    }
    std::mutex out_mutex;
    if (jobs <= 1 || config_paths.size() == 1) {
        for (const auto& path : config_paths) {
            try {
                run_one_config(path, output_override, out, out_mutex);
            } catch (const Error& e) {
                return classify(e, out);
            }
        }
        return kExitOk;
    }

    // Fan out over config files only; a single run is always sequential.
    std::atomic<std::size_t> next{0};
    std::atomic<int> worst{kExitOk};
    const std::size_t worker_count =
        std::min<std::size_t>(static_cast<std::size_t>(jobs), config_paths.size());
    std::vector<std::thread> workers;
    workers.reserve(worker_count);
    for (std::size_t w = 0; w < worker_count; ++w) {
        workers.emplace_back([&] {
            for (;;) {
                const std::size_t index = next.fetch_add(1);
                if (index >= config_paths.size()) return;
                try {
                    run_one_config(config_paths[index], output_override, out,
                                   out_mutex);
                } catch (const Error& e) {
                    std::scoped_lock lock(out_mutex);
                    const int code = classify(e, out);
                    int expected = worst.load();
                    while (expected < code &&
                           !worst.compare_exchange_weak(expected, code)) {
                    }
                }
            }
        });
    }
    for (auto& worker : workers) worker.join();
    return worst.load();
}

int cmd_gradcheck(int dim, int r, AdapterVariant variant, MultiplySide side,
                  std::uint64_t seed, std::ostream& out) {
    if (dim <= 0 || dim > 64) {
        std::cerr << "lorma: error: gradcheck dimension must lie in [1, 64]\n";
        return kExitUsage;
    }
    if (r <= 0 || r > dim) {
        std::cerr << "lorma: error: gradcheck rank must lie in [1, dim]\n";
        return kExitUsage;
    }
    try {
        Rng rng(seed);
        const std::size_t d = static_cast<std::size_t>(dim);
        Matrix w0(d, d);
        for (auto& v : w0.data()) v = rng.gaussian();
        Matrix x(d, 3);
        for (auto& v : x.data()) v = rng.gaussian();

        AdapterConfig cfg{variant, side, r, static_cast<double>(r), seed};
        AdapterState state = init_adapter(w0, cfg);
        // Nudge the factors off their structured init so every product term
        // contributes to the checked gradients.
        for (auto& v : state.b.data()) v += 0.05 * rng.gaussian();
        for (auto& v : state.a.data()) v += 0.05 * rng.gaussian();

        const GradCheckReport report = grad_check(state, x, rng.fork_seed());
        out << "gradcheck " << to_string(variant) << " side=" << to_string(side)
            << " d=" << dim << " r=" << r << " seed=" << seed << "\n";
        out << "worst relative error " << format_double(report.max_rel_error)
            << " at " << report.worst_param << "[" << report.worst_row << "]["
            << report.worst_col << "]\n";
        if (report.max_rel_error < 1e-4) {
            out << "PASS (threshold 1e-4)\n";
            return kExitOk;
        }
        out << "FAIL (threshold 1e-4)\n";
        return kExitCheckFailed;
    } catch (const Error& e) {
        return classify(e, out);
    }
}

int cmd_analyze(const std::filesystem::path& ref_path,
                const std::filesystem::path& test_path, int r,
                const std::optional<std::filesystem::path>& csv_out,
                std::uint64_t baseline_seed, std::ostream& out) {
    try {
        const Matrix ref = load_matrix(ref_path);
        const Matrix test = load_matrix(test_path);
        const UpdateComparison cmp = compare_updates(ref, test, r, baseline_seed);
        std::ostringstream csv;
        write_comparison_csv(cmp, csv);
        if (csv_out) write_text_file(*csv_out, csv.str());
        out << csv.str();
        return kExitOk;
    } catch (const Error& e) {
        return classify(e, out);
    }
}

int cmd_theory(std::uint64_t seed, std::ostream& out) {
    const auto results = run_theory_suite(seed);
    bool all_pass = true;
    std::size_t width = 0;
    for (const auto& claim : results) width = std::max(width, claim.name.size());
    for (const auto& claim : results) {
        all_pass = all_pass && claim.pass;
        out << std::left << std::setw(static_cast<int>(width) + 2) << claim.name
            << (claim.pass ? "PASS  " : "FAIL  ") << claim.detail << "\n";
    }
    out << (all_pass ? "all claims hold" : "CLAIM FAILURES PRESENT") << "\n";
    return all_pass ? kExitOk : kExitCheckFailed;
}

int cmd_report(const std::filesystem::path& output_root, std::ostream& out) {
    try {
        std::vector<AdapterEntry> adapters;
        std::vector<RunSummary> summaries;
        std::vector<std::filesystem::path> adapter_dirs;
        for (const auto& entry : std::filesystem::directory_iterator(output_root)) {
            if (entry.is_directory()) adapter_dirs.push_back(entry.path());
        }
        std::sort(adapter_dirs.begin(), adapter_dirs.end());
        for (const auto& dir : adapter_dirs) {
            bool saw_run = false;
            AdapterEntry adapter;
            adapter.name = dir.filename().string();
            std::vector<std::filesystem::path> seed_dirs;
            for (const auto& run : std::filesystem::directory_iterator(dir)) {
                if (run.is_directory()) seed_dirs.push_back(run.path());
            }
            std::sort(seed_dirs.begin(), seed_dirs.end());
            for (const auto& run : seed_dirs) {
                const auto summary_path = run / "summary.json";
                std::ifstream in(summary_path);
                if (!in) continue;
                json summary;
                try {
                    in >> summary;
                } catch (const json::exception& e) {
                    throw IoError("malformed " + summary_path.string() + ": " +
                                  e.what());
                }
                RunSummary s;
                s.adapter = adapter.name;
                s.variant = summary.value("variant", "lora");
                s.seed = summary.value("seed", 0ull);
                s.final_loss = summary.at("final_loss").get<double>();
                s.auc = summary.at("auc").get<double>();
                summaries.push_back(std::move(s));
                saw_run = true;
            }
            if (saw_run) {
                adapter.config.variant = parse_variant(summaries.back().variant);
                adapters.push_back(std::move(adapter));
            }
        }
        if (adapters.empty()) {
            std::cerr << "lorma: error: no run summaries under "
                      << output_root.string() << "\n";
            return kExitUsage;
        }
        out << comparison_table(summaries, adapters);
        return kExitOk;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "lorma: error: " << e.what() << "\n";
        return kExitIo;
    } catch (const Error& e) {
        return classify(e, out);
    }
}

}  // namespace lorma::cli
