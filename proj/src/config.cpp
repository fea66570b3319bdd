#include "lorma/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "lorma/toml.hpp"

namespace lorma {

const char* to_string(OptimizerKind k) {
    return k == OptimizerKind::sgd ? "sgd" : "adamw";
}

const char* to_string(ScheduleKind k) {
    switch (k) {
        case ScheduleKind::constant: return "constant";
        case ScheduleKind::linear_warmup_decay: return "linear_warmup_decay";
        case ScheduleKind::cosine: return "cosine";
    }
    return "?";
}

const char* to_string(TaskKind k) {
    return k == TaskKind::target_recovery ? "target_recovery" : "tiny_attention";
}

const char* to_string(TargetKind k) {
    switch (k) {
        case TargetKind::low_rank_delta: return "low_rank_delta";
        case TargetKind::dense_random: return "dense_random";
        case TargetKind::permuted_scaled: return "permuted_scaled";
    }
    return "?";
}

OptimizerKind parse_optimizer_kind(const std::string& s) {
    if (s == "sgd") return OptimizerKind::sgd;
    if (s == "adamw") return OptimizerKind::adamw;
    throw ConfigError("unknown optimizer kind '" + s + "'");
}

ScheduleKind parse_schedule_kind(const std::string& s) {
    if (s == "constant") return ScheduleKind::constant;
    if (s == "linear_warmup_decay") return ScheduleKind::linear_warmup_decay;
    if (s == "cosine") return ScheduleKind::cosine;
    throw ConfigError("unknown schedule kind '" + s + "'");
}

TaskKind parse_task_kind(const std::string& s) {
    if (s == "target_recovery") return TaskKind::target_recovery;
    if (s == "tiny_attention") return TaskKind::tiny_attention;
    throw ConfigError("unknown task kind '" + s + "'");
}

TargetKind parse_target_kind(const std::string& s) {
    if (s == "low_rank_delta") return TargetKind::low_rank_delta;
    if (s == "dense_random") return TargetKind::dense_random;
    if (s == "permuted_scaled") return TargetKind::permuted_scaled;
    throw ConfigError("unknown target kind '" + s + "'");
}

namespace {

using nlohmann::json;

/// Fetches doc[key] checking the JSON type, or returns the fallback.
template <typename T>
T field(const json& table, const char* key, T fallback) {
    if (!table.contains(key)) return fallback;
    try {
        return table.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("config field '") + key + "' has the wrong type");
    }
}

void reject_unknown_keys(const json& table, const std::set<std::string>& known,
                         const std::string& where) {
    for (const auto& [key, value] : table.items()) {
        (void)value;
        if (!known.contains(key)) {
            throw ConfigError("unknown config key '" + key + "' in " + where);
        }
    }
}

TaskSpec parse_task(const json& doc) {
    TaskSpec spec;
    if (!doc.contains("task")) return spec;
    const json& t = doc.at("task");
    reject_unknown_keys(
        t, {"kind", "d", "k", "target", "target_rank", "n_train", "noise_std"},
        "[task]");
    spec.kind = parse_task_kind(field<std::string>(t, "kind", "target_recovery"));
    spec.d = field<int>(t, "d", spec.d);
    spec.k = field<int>(t, "k", spec.k);
    spec.target_kind =
        parse_target_kind(field<std::string>(t, "target", "low_rank_delta"));
    spec.target_rank = field<int>(t, "target_rank", spec.target_rank);
    spec.n_train = field<int>(t, "n_train", spec.n_train);
    spec.noise_std = field<double>(t, "noise_std", spec.noise_std);
    return spec;
}

OptimizerSpec parse_optimizer(const json& doc) {
    OptimizerSpec spec;
    if (!doc.contains("optimizer")) return spec;
    const json& o = doc.at("optimizer");
    reject_unknown_keys(o, {"kind", "lr", "beta1", "beta2", "eps", "weight_decay"},
                        "[optimizer]");
    spec.kind = parse_optimizer_kind(field<std::string>(o, "kind", "adamw"));
    spec.lr = field<double>(o, "lr", spec.lr);
    spec.beta1 = field<double>(o, "beta1", spec.beta1);
    spec.beta2 = field<double>(o, "beta2", spec.beta2);
    spec.eps = field<double>(o, "eps", spec.eps);
    spec.weight_decay = field<double>(o, "weight_decay", spec.weight_decay);
    if (spec.lr <= 0.0) throw ConfigError("optimizer lr must be positive");
    if (spec.beta1 < 0.0 || spec.beta1 >= 1.0 || spec.beta2 < 0.0 || spec.beta2 >= 1.0) {
        throw ConfigError("optimizer betas must lie in [0, 1)");
    }
    if (spec.eps <= 0.0) throw ConfigError("optimizer eps must be positive");
    if (spec.weight_decay < 0.0) throw ConfigError("weight_decay must be >= 0");
    return spec;
}

LrSchedule parse_schedule(const json& doc) {
    LrSchedule sched;
    if (!doc.contains("schedule")) return sched;
    const json& s = doc.at("schedule");
    reject_unknown_keys(s, {"kind", "warmup_ratio"}, "[schedule]");
    sched.kind = parse_schedule_kind(field<std::string>(s, "kind", "constant"));
    sched.warmup_ratio = field<double>(s, "warmup_ratio", 0.0);
    if (sched.warmup_ratio < 0.0 || sched.warmup_ratio >= 1.0) {
        throw ConfigError("warmup_ratio must lie in [0, 1)");
    }
    return sched;
}

AdapterEntry parse_adapter(const json& a, std::size_t index) {
    reject_unknown_keys(a, {"name", "variant", "side", "r", "alpha", "seed"},
                        "[[adapter]] #" + std::to_string(index));
    AdapterEntry entry;
    entry.config.variant =
        parse_variant(field<std::string>(a, "variant", "lora"));
    entry.config.side = parse_side(field<std::string>(a, "side", "pre"));
    entry.config.r = field<int>(a, "r", entry.config.r);
    entry.config.alpha = field<double>(a, "alpha", static_cast<double>(entry.config.r));
    entry.name = field<std::string>(a, "name", to_string(entry.config.variant));
    if (a.contains("seed")) {
        entry.config.seed = field<std::uint64_t>(a, "seed", 0);
        entry.seed_pinned = true;
    }
    return entry;
}

}  // namespace

ExperimentConfig parse_experiment_config(const json& doc) {
    if (!doc.is_object()) throw ConfigError("config root must be a table");
    reject_unknown_keys(
        doc, {"task", "optimizer", "schedule", "train", "output", "adapter"},
        "config root");

    ExperimentConfig config;
    config.task = parse_task(doc);
    config.optimizer = parse_optimizer(doc);
    config.schedule = parse_schedule(doc);

    if (doc.contains("train")) {
        const json& t = doc.at("train");
        reject_unknown_keys(t, {"epochs", "batch", "seed", "num_seeds"}, "[train]");
        config.epochs = field<int>(t, "epochs", config.epochs);
        config.batch = field<int>(t, "batch", config.batch);
        config.seed = field<std::uint64_t>(t, "seed", config.seed);
        config.num_seeds = field<int>(t, "num_seeds", config.num_seeds);
    }
    if (config.epochs <= 0 || config.batch <= 0) {
        throw ConfigError("epochs and batch must be positive");
    }
    if (config.num_seeds <= 0) throw ConfigError("num_seeds must be positive");

    if (doc.contains("output")) {
        const json& o = doc.at("output");
        reject_unknown_keys(o, {"dir"}, "[output]");
        config.output_dir = field<std::string>(o, "dir", "out");
    }

    if (!doc.contains("adapter")) {
        throw ConfigError("config needs at least one [[adapter]] block");
    }
    const json& adapters = doc.at("adapter");
    if (!adapters.is_array() || adapters.empty()) {
        throw ConfigError("[[adapter]] must be a non-empty array of tables");
    }
    std::set<std::string> names;
    for (std::size_t i = 0; i < adapters.size(); ++i) {
        AdapterEntry entry = parse_adapter(adapters[i], i);
        if (!names.insert(entry.name).second) {
            throw ConfigError("duplicate adapter name '" + entry.name + "'");
        }
        config.adapters.push_back(std::move(entry));
    }
    return config;
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config " + path.string());
    std::stringstream buffer;
    buffer << in.rdbuf();
    const std::string text = buffer.str();

    json doc;
    if (path.extension() == ".json") {
        try {
            doc = json::parse(text);
        } catch (const json::parse_error& e) {
            // nlohmann reports a byte offset; map it to line/column.
            int line = 1, col = 1;
            for (std::size_t i = 0; i < std::min<std::size_t>(e.byte, text.size()); ++i) {
                if (text[i] == '\n') {
                    ++line;
                    col = 1;
                } else {
                    ++col;
                }
            }
            throw ParseError(std::string("json: ") + e.what(), line, col);
        }
    } else {
        doc = parse_toml(text);
    }
    return parse_experiment_config(doc);
}

nlohmann::json canonical_run_json(const ExperimentConfig& config,
                                  const AdapterEntry& adapter,
                                  std::uint64_t run_seed) {
    // nlohmann objects keep keys sorted, which is exactly the canonical form.
    json j;
    j["task"] = {{"kind", to_string(config.task.kind)},
                 {"d", config.task.d},
                 {"k", config.task.k},
                 {"target", to_string(config.task.target_kind)},
                 {"target_rank", config.task.target_rank},
                 {"n_train", config.task.n_train},
                 {"noise_std", config.task.noise_std}};
    j["optimizer"] = {{"kind", to_string(config.optimizer.kind)},
                      {"lr", config.optimizer.lr},
                      {"beta1", config.optimizer.beta1},
                      {"beta2", config.optimizer.beta2},
                      {"eps", config.optimizer.eps},
                      {"weight_decay", config.optimizer.weight_decay}};
    j["schedule"] = {{"kind", to_string(config.schedule.kind)},
                     {"warmup_ratio", config.schedule.warmup_ratio}};
    j["train"] = {{"epochs", config.epochs}, {"batch", config.batch}};
    j["adapter"] = {{"name", adapter.name},
                    {"variant", to_string(adapter.config.variant)},
                    {"side", to_string(adapter.config.side)},
                    {"r", adapter.config.r},
                    {"alpha", adapter.config.alpha}};
    if (adapter.seed_pinned) j["adapter"]["seed"] = adapter.config.seed;
    j["seed"] = run_seed;
    return j;
}

std::uint64_t run_hash(const ExperimentConfig& config, const AdapterEntry& adapter,
                       std::uint64_t run_seed) {
    const std::string dump = canonical_run_json(config, adapter, run_seed).dump();
    std::uint64_t hash = 0xcbf29ce484222325ull;  // FNV-1a
    for (const unsigned char c : dump) {
        hash ^= c;
        hash *= 0x100000001b3ull;
    }
    return hash;
}

std::string hash_hex(std::uint64_t value) {
    static const char* digits = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = digits[value & 0xF];
        value >>= 4;
    }
    return out;
}

}  // namespace lorma
