#include "lorma/adapter.hpp"

#include <cmath>
#include <fstream>
#include <iostream>

#include <json.hpp>

#include "lorma/io.hpp"
#include "lorma/linalg.hpp"
#include "lorma/rng.hpp"

namespace lorma {

namespace {

constexpr double kInitStd = 0.02;  // std-dev of the free Gaussian init entries

struct FactorShapes {
    std::size_t b_rows, b_cols, a_rows, a_cols;
};

FactorShapes factor_shapes(const Matrix& w0, const AdapterConfig& cfg) {
    const std::size_t d = w0.rows(), k = w0.cols();
    const std::size_t r = static_cast<std::size_t>(cfg.r);
    if (cfg.variant == AdapterVariant::lora) return {d, r, r, k};
    if (cfg.side == MultiplySide::pre) return {d, r, r, d};
    return {k, r, r, k};
}

void fill_gaussian(Matrix& m, Rng& rng, double stddev) {
    for (auto& v : m.data()) v = rng.gaussian(0.0, stddev);
}

void check_forward_shape(const AdapterState& s, const Matrix& x) {
    if (x.rows() != s.w0.cols()) {
        throw ShapeError("forward: input has " + std::to_string(x.rows()) +
                         " rows, weight expects " + std::to_string(s.w0.cols()));
    }
}

Matrix scale_counted(double s, const Matrix& m, FlopCounter* counter) {
    if (counter) counter->elementwise_ops += m.size();
    return s * m;
}

Matrix add_counted(const Matrix& a, const Matrix& b, FlopCounter* counter) {
    if (counter) counter->elementwise_ops += a.size();
    return a + b;
}

}  // namespace

const char* to_string(AdapterVariant v) {
    switch (v) {
        case AdapterVariant::lora: return "lora";
        case AdapterVariant::lorma_naive: return "lorma_naive";
        case AdapterVariant::lorma_pi: return "lorma_pi";
        case AdapterVariant::lorma_plus: return "lorma_plus";
    }
    return "?";
}

const char* to_string(MultiplySide s) {
    return s == MultiplySide::pre ? "pre" : "post";
}

AdapterVariant parse_variant(const std::string& s) {
    if (s == "lora") return AdapterVariant::lora;
    if (s == "lorma_naive") return AdapterVariant::lorma_naive;
    if (s == "lorma_pi") return AdapterVariant::lorma_pi;
    if (s == "lorma_plus") return AdapterVariant::lorma_plus;
    throw ConfigError("unknown adapter variant '" + s + "'");
}

MultiplySide parse_side(const std::string& s) {
    if (s == "pre") return MultiplySide::pre;
    if (s == "post") return MultiplySide::post;
    throw ConfigError("unknown multiply side '" + s + "'");
}

InflationKind inflation_of(AdapterVariant v) {
    switch (v) {
        case AdapterVariant::lorma_pi: return InflationKind::permutation;
        case AdapterVariant::lorma_plus: return InflationKind::additive;
        default: return InflationKind::none;
    }
}

AdapterState init_adapter(const Matrix& w0, const AdapterConfig& config) {
    const std::size_t d = w0.rows(), k = w0.cols();
    if (config.r <= 0 ||
        static_cast<std::size_t>(config.r) > std::min(d, k)) {
        throw ConfigError("adapter rank " + std::to_string(config.r) +
                          " out of range for a " + std::to_string(d) + "x" +
                          std::to_string(k) + " weight");
    }
    const double s = config.scaling();
    if (!(std::isfinite(s) && s > 0.0)) {
        throw ConfigError("adapter scaling alpha/r must be finite and positive");
    }
    if (config.variant == AdapterVariant::lora && config.side == MultiplySide::post) {
        std::cerr << "lorma: note: lora is additive and ignores side=post\n";
    }

    const FactorShapes shapes = factor_shapes(w0, config);
    AdapterState state{w0, Matrix(shapes.b_rows, shapes.b_cols),
                       Matrix(shapes.a_rows, shapes.a_cols), config};
    Rng rng(config.seed);

    switch (config.variant) {
        case AdapterVariant::lora: {
            // b stays zero; a ~ uniform(-1/sqrt(fan_in), 1/sqrt(fan_in)).
            const double bound = 1.0 / std::sqrt(static_cast<double>(k));
            for (auto& v : state.a.data()) v = rng.uniform(-bound, bound);
            break;
        }
        case AdapterVariant::lorma_plus:
            // b stays zero, so I_+(s*BA) = I exactly.
            fill_gaussian(state.a, rng, kInitStd);
            break;
        case AdapterVariant::lorma_pi: {
            // Column 0 of b carries 1/s so that s*BA has an all-ones first
            // column; rotating row i right by i then yields I exactly.
            // a = e_1 e_1^T kills the random remainder of b at the start.
            for (std::size_t i = 0; i < state.b.rows(); ++i) {
                for (std::size_t j = 0; j < state.b.cols(); ++j) {
                    state.b(i, j) = (j == 0) ? 1.0 / s : rng.gaussian(0.0, kInitStd);
                }
            }
            state.a(0, 0) = 1.0;
            break;
        }
        case AdapterVariant::lorma_naive:
            fill_gaussian(state.b, rng, kInitStd);
            fill_gaussian(state.a, rng, kInitStd);
            break;
    }
    return state;
}

Matrix forward(const AdapterState& state, const Matrix& x, FlopCounter* counter) {
    check_forward_shape(state, x);
    const double s = state.config.scaling();
    const bool pre = state.config.side == MultiplySide::pre;

    switch (state.config.variant) {
        case AdapterVariant::lora: {
            const Matrix base = matmul(state.w0, x, counter);
            const Matrix low = matmul(state.b, matmul(state.a, x, counter), counter);
            return add_counted(base, scale_counted(s, low, counter), counter);
        }
        case AdapterVariant::lorma_naive: {
            if (pre) {
                const Matrix u = matmul(state.w0, x, counter);
                return matmul(state.b, matmul(state.a, u, counter), counter);
            }
            const Matrix low = matmul(state.b, matmul(state.a, x, counter), counter);
            return matmul(state.w0, low, counter);
        }
        case AdapterVariant::lorma_plus: {
            const Matrix base = matmul(state.w0, x, counter);
            if (pre) {
                const Matrix low =
                    matmul(state.b, matmul(state.a, base, counter), counter);
                return add_counted(base, scale_counted(s, low, counter), counter);
            }
            const Matrix low = matmul(state.b, matmul(state.a, x, counter), counter);
            const Matrix lifted = matmul(state.w0, low, counter);
            return add_counted(base, scale_counted(s, lifted, counter), counter);
        }
        case AdapterVariant::lorma_pi: {
            // The product BA must be formed explicitly: the rotation acts on
            // the product, not on the factors.
            const Matrix ba = matmul(state.b, state.a, counter);
            const Matrix multiplier = inflate_pi(scale_counted(s, ba, counter));
            if (pre) {
                const Matrix u = matmul(state.w0, x, counter);
                return matmul(multiplier, u, counter);
            }
            const Matrix rotated_x = matmul(multiplier, x, counter);
            return matmul(state.w0, rotated_x, counter);
        }
    }
    throw ConfigError("forward: unknown variant");
}

Matrix adapter_transform(const AdapterState& state) {
    const double s = state.config.scaling();
    const Matrix ba = matmul(state.b, state.a);
    switch (state.config.variant) {
        case AdapterVariant::lora: return s * ba;
        case AdapterVariant::lorma_naive: return ba;
        case AdapterVariant::lorma_plus: return inflate_plus(ba, s);
        case AdapterVariant::lorma_pi: return inflate_pi(s * ba);
    }
    throw ConfigError("adapter_transform: unknown variant");
}

Matrix effective_weight(const AdapterState& state) {
    if (state.config.variant == AdapterVariant::lora) {
        return state.w0 + adapter_transform(state);
    }
    const Matrix multiplier = adapter_transform(state);
    if (state.config.side == MultiplySide::pre) {
        return matmul(multiplier, state.w0);
    }
    return matmul(state.w0, multiplier);
}

Matrix delta_w(const AdapterState& state) {
    return effective_weight(state) - state.w0;
}

MergeResult merge(const AdapterState& state) {
    if (state.config.variant == AdapterVariant::lora) {
        return {effective_weight(state), true};
    }
    const Matrix multiplier = adapter_transform(state);
    const bool invertible =
        numerical_rank(multiplier) == static_cast<int>(multiplier.rows());
    return {effective_weight(state), invertible};
}

void save_adapter(const AdapterState& state, const std::filesystem::path& dir,
                  const std::string& stem) {
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    save_matrix(state.w0, dir / (stem + ".w0.lrma"));
    save_matrix(state.b, dir / (stem + ".b.lrma"));
    save_matrix(state.a, dir / (stem + ".a.lrma"));
    nlohmann::json sidecar{{"variant", to_string(state.config.variant)},
                           {"side", to_string(state.config.side)},
                           {"r", state.config.r},
                           {"alpha", state.config.alpha},
                           {"seed", state.config.seed}};
    std::ofstream out(dir / (stem + ".json"), std::ios::binary);
    if (!out) throw IoError("cannot write adapter sidecar for " + stem);
    out << sidecar.dump(2) << "\n";
}

AdapterState load_adapter(const std::filesystem::path& dir, const std::string& stem) {
    std::ifstream in(dir / (stem + ".json"));
    if (!in) throw IoError("cannot read adapter sidecar for " + stem);
    nlohmann::json sidecar;
    try {
        in >> sidecar;
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed adapter sidecar for " + stem + ": " + e.what());
    }
    AdapterConfig cfg;
    cfg.variant = parse_variant(sidecar.at("variant").get<std::string>());
    cfg.side = parse_side(sidecar.at("side").get<std::string>());
    cfg.r = sidecar.at("r").get<int>();
    cfg.alpha = sidecar.at("alpha").get<double>();
    cfg.seed = sidecar.at("seed").get<std::uint64_t>();

    AdapterState state{load_matrix(dir / (stem + ".w0.lrma")),
                       load_matrix(dir / (stem + ".b.lrma")),
                       load_matrix(dir / (stem + ".a.lrma")), cfg};
    const FactorShapes shapes = factor_shapes(state.w0, cfg);
    if (state.b.rows() != shapes.b_rows || state.b.cols() != shapes.b_cols ||
        state.a.rows() != shapes.a_rows || state.a.cols() != shapes.a_cols) {
        throw ShapeError("adapter snapshot " + stem +
                         ": factor shapes do not match the sidecar config");
    }
    return state;
}

}  // namespace lorma
