#include "lorma/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <numeric>
#include <ostream>

#include "lorma/gradients.hpp"
#include "lorma/io.hpp"
#include "lorma/linalg.hpp"
#include "lorma/rng.hpp"

namespace lorma {

namespace {

Matrix gaussian_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                       double stddev = 1.0) {
    Matrix m(rows, cols);
    for (auto& v : m.data()) v = rng.gaussian(0.0, stddev);
    return m;
}

/// Inputs drawn from a one-head attention readout over random token
/// sequences; gives correlated, non-isotropic columns instead of white noise.
Matrix attention_inputs(Rng& rng, std::size_t k, std::size_t n) {
    constexpr std::size_t kTokens = 8;
    const double scale = 1.0 / std::sqrt(static_cast<double>(k));
    const Matrix wq = gaussian_matrix(rng, k, k, scale);
    const Matrix wk = gaussian_matrix(rng, k, k, scale);
    const Matrix wv = gaussian_matrix(rng, k, k, scale);

    Matrix x(k, n);
    for (std::size_t col = 0; col < n; ++col) {
        const Matrix tokens = gaussian_matrix(rng, k, kTokens);
        const Matrix queries = matmul(wq, tokens);
        const Matrix keys = matmul(wk, tokens);
        const Matrix values = matmul(wv, tokens);
        // Attend from the last token to the whole sequence.
        std::vector<double> score(kTokens, 0.0);
        double max_score = -1e300;
        for (std::size_t tok = 0; tok < kTokens; ++tok) {
            double dot = 0.0;
            for (std::size_t row = 0; row < k; ++row)
                dot += queries(row, kTokens - 1) * keys(row, tok);
            score[tok] = dot * scale;
            max_score = std::max(max_score, score[tok]);
        }
        double z = 0.0;
        for (double& sc : score) {
            sc = std::exp(sc - max_score);
            z += sc;
        }
        for (std::size_t row = 0; row < k; ++row) {
            double acc = 0.0;
            for (std::size_t tok = 0; tok < kTokens; ++tok)
                acc += values(row, tok) * score[tok];
            x(row, col) = acc / z;
        }
    }
    return x;
}

Matrix make_target(const TaskSpec& spec, const Matrix& w0, Rng& rng) {
    const std::size_t d = w0.rows(), k = w0.cols();
    switch (spec.target_kind) {
        case TargetKind::low_rank_delta: {
            const std::size_t t = static_cast<std::size_t>(spec.target_rank);
            const Matrix g1 = gaussian_matrix(rng, d, t);
            const Matrix g2 = gaussian_matrix(rng, t, k);
            const double scale = 0.1 / std::sqrt(static_cast<double>(t));
            return w0 + scale * matmul(g1, g2);
        }
        case TargetKind::dense_random:
            return gaussian_matrix(rng, d, k);
        case TargetKind::permuted_scaled: {
            // P*D*w0 where PD differs from the identity on a handful of rows:
            // a random 3-cycle of rows plus one rescaled fixed row. PD itself
            // is full rank (the required multiplicative map has rank d), yet
            // PD - I has at most 4 nonzero rows, so an inflated multiplier
            // I + s*BA can reach the target while a rank-limited product
            // B*A*w0 cannot approximate the full-rank w_star.
            if (d < 4) throw ConfigError("make_task: permuted_scaled needs d >= 4");
            std::vector<std::size_t> pool(d);
            std::iota(pool.begin(), pool.end(), 0);
            for (std::size_t i = 0; i < 4; ++i) {
                std::swap(pool[i], pool[i + rng.below(d - i)]);
            }
            std::vector<std::size_t> perm(d);
            std::iota(perm.begin(), perm.end(), 0);
            perm[pool[0]] = pool[1];
            perm[pool[1]] = pool[2];
            perm[pool[2]] = pool[0];
            std::vector<double> diag(d, 1.0);
            for (int c = 0; c < 3; ++c) diag[pool[c]] = rng.uniform(0.75, 1.25);
            diag[pool[3]] = rng.uniform(1.5, 2.5);
            Matrix target(d, k);
            for (std::size_t i = 0; i < d; ++i)
                for (std::size_t j = 0; j < k; ++j)
                    target(i, j) = diag[perm[i]] * w0(perm[i], j);
            return target;
        }
    }
    throw ConfigError("make_task: unknown target kind");
}

}  // namespace

double LrSchedule::factor(long step) const {
    const long total = std::max<long>(total_steps, 1);
    const long at = std::clamp<long>(step, 0, total);
    switch (kind) {
        case ScheduleKind::constant:
            return 1.0;
        case ScheduleKind::linear_warmup_decay: {
            const long warmup =
                static_cast<long>(warmup_ratio * static_cast<double>(total));
            if (warmup > 0 && at <= warmup)
                return static_cast<double>(at) / static_cast<double>(warmup);
            return static_cast<double>(total - at) /
                   static_cast<double>(total - warmup);
        }
        case ScheduleKind::cosine:
            return 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(at) /
                                         static_cast<double>(total)));
    }
    return 1.0;
}

Task make_task(const TaskSpec& spec, std::uint64_t seed) {
    if (spec.d <= 0 || spec.k <= 0 || spec.n_train <= 0) {
        throw ConfigError("make_task: dimensions and sample count must be positive");
    }
    if (spec.target_kind == TargetKind::low_rank_delta &&
        (spec.target_rank <= 0 || spec.target_rank > std::min(spec.d, spec.k))) {
        throw ConfigError("make_task: target_rank out of range");
    }
    if (spec.target_kind == TargetKind::permuted_scaled && spec.d != spec.k) {
        throw ConfigError("make_task: permuted_scaled needs a square weight");
    }
    if (spec.noise_std < 0.0) throw ConfigError("make_task: negative noise_std");

    const std::size_t d = static_cast<std::size_t>(spec.d);
    const std::size_t k = static_cast<std::size_t>(spec.k);
    const std::size_t n = static_cast<std::size_t>(spec.n_train);
    Rng rng(seed);

    // Frozen base: resample until numerically full rank, mirroring the
    // near-full-rank pretrained matrices the multiplicative route relies on.
    Matrix w0 = gaussian_matrix(rng, d, k);
    while (numerical_rank(w0) != static_cast<int>(std::min(d, k))) {
        w0 = gaussian_matrix(rng, d, k);
    }

    Matrix w_star = make_target(spec, w0, rng);
    Matrix x = spec.kind == TaskKind::tiny_attention ? attention_inputs(rng, k, n)
                                                     : gaussian_matrix(rng, k, n);
    Matrix y = matmul(w_star, x);
    if (spec.noise_std > 0.0) {
        for (auto& v : y.data()) v += rng.gaussian(0.0, spec.noise_std);
    }
    return Task{spec, seed, std::move(w0), std::move(x), std::move(y),
                std::move(w_star)};
}

namespace {

struct MomentPair {
    Matrix m;
    Matrix v;
};

void apply_update(Matrix& param, const Matrix& grad, MomentPair& moments,
                  const OptimizerSpec& opt, double lr, long adam_step) {
    const std::size_t count = param.size();
    auto p = param.data();
    auto g = grad.data();
    if (opt.kind == OptimizerKind::sgd) {
        for (std::size_t i = 0; i < count; ++i) {
            p[i] -= lr * g[i];
            if (opt.weight_decay > 0.0) p[i] -= lr * opt.weight_decay * p[i];
        }
        return;
    }
    auto m = moments.m.data();
    auto v = moments.v.data();
    const double bc1 = 1.0 - std::pow(opt.beta1, static_cast<double>(adam_step));
    const double bc2 = 1.0 - std::pow(opt.beta2, static_cast<double>(adam_step));
    for (std::size_t i = 0; i < count; ++i) {
        m[i] = opt.beta1 * m[i] + (1.0 - opt.beta1) * g[i];
        v[i] = opt.beta2 * v[i] + (1.0 - opt.beta2) * g[i] * g[i];
        const double m_hat = m[i] / bc1;
        const double v_hat = v[i] / bc2;
        p[i] -= lr * m_hat / (std::sqrt(v_hat) + opt.eps);
        if (opt.weight_decay > 0.0) p[i] -= lr * opt.weight_decay * p[i];
    }
}

}  // namespace

std::pair<AdapterState, TrainLog> train(AdapterState state, const Task& task,
                                        const OptimizerSpec& opt,
                                        const LrSchedule& schedule,
                                        const TrainOptions& options) {
    if (task.x.rows() != state.w0.cols() || task.y.rows() != state.w0.rows()) {
        throw ShapeError("train: task and adapter dimensions disagree");
    }
    if (options.epochs <= 0 || options.batch <= 0) {
        throw ConfigError("train: epochs and batch must be positive");
    }
    const auto t_start = std::chrono::steady_clock::now();

    const std::size_t n = task.x.cols();
    const std::size_t batch = std::min<std::size_t>(options.batch, n);
    const long steps_per_epoch = static_cast<long>((n + batch - 1) / batch);
    const long total_steps = steps_per_epoch * options.epochs;

    LrSchedule sched = schedule;
    if (sched.total_steps <= 0) sched.total_steps = total_steps;

    TrainLog log;
    log.step_losses.reserve(total_steps);
    log.epoch_rank_trace.reserve(options.epochs);
    log.epoch_delta_rank.reserve(options.epochs);

    Rng rng(options.seed);
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);

    MomentPair mb{Matrix::zeros(state.b.rows(), state.b.cols()),
                  Matrix::zeros(state.b.rows(), state.b.cols())};
    MomentPair ma{Matrix::zeros(state.a.rows(), state.a.cols()),
                  Matrix::zeros(state.a.rows(), state.a.cols())};

    long step = 0;
    long adam_step = 0;
    for (int epoch = 0; epoch < options.epochs; ++epoch) {
        for (std::size_t i = n; i > 1; --i) {
            const std::size_t j = rng.below(i);
            std::swap(order[i - 1], order[j]);
        }
        for (std::size_t start = 0; start < n; start += batch) {
            const std::size_t bs = std::min(batch, n - start);
            Matrix xb(task.x.rows(), bs), yb(task.y.rows(), bs);
            for (std::size_t col = 0; col < bs; ++col) {
                const std::size_t src = order[start + col];
                for (std::size_t row = 0; row < xb.rows(); ++row)
                    xb(row, col) = task.x(row, src);
                for (std::size_t row = 0; row < yb.rows(); ++row)
                    yb(row, col) = task.y(row, src);
            }

            const Matrix h = forward(state, xb);
            const Matrix diff = h - yb;
            const double loss =
                0.5 * frobenius_inner(diff, diff) / static_cast<double>(bs);
            if (!std::isfinite(loss)) {
                throw DivergenceError(
                    "train: non-finite loss at step " + std::to_string(step), step);
            }
            log.step_losses.push_back(loss);

            const Matrix upstream = (1.0 / static_cast<double>(bs)) * diff;
            const GradientBundle grads = backward(state, xb, upstream);

            const double lr = opt.lr * sched.factor(step);
            ++adam_step;
            apply_update(state.b, grads.d_b, mb, opt, lr, adam_step);
            apply_update(state.a, grads.d_a, ma, opt, lr, adam_step);
            ++step;
        }
        log.epoch_rank_trace.push_back(numerical_rank(adapter_transform(state)));
        log.epoch_delta_rank.push_back(numerical_rank(delta_w(state)));
    }

    log.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start)
            .count();
    return {std::move(state), std::move(log)};
}

double dataset_loss(const AdapterState& state, const Task& task) {
    const Matrix diff = forward(state, task.x) - task.y;
    return 0.5 * frobenius_inner(diff, diff) / static_cast<double>(task.x.cols());
}

double loss_auc(const TrainLog& log) {
    const std::size_t n = log.step_losses.size();
    if (n < 2) throw ConfigError("loss_auc: need at least two recorded steps");
    double area = 0.0;
    for (std::size_t i = 1; i < n; ++i) {
        area += 0.5 * (log.step_losses[i - 1] + log.step_losses[i]);
    }
    return area / static_cast<double>(n - 1);
}

double final_loss(const TrainLog& log) {
    if (log.step_losses.empty()) throw ConfigError("final_loss: empty log");
    return log.step_losses.back();
}

double auc_reduction_percent(double auc_test, double auc_baseline) {
    return (1.0 - auc_test / auc_baseline) * 100.0;
}

void write_loss_csv(const TrainLog& log, std::ostream& out) {
    out << "step,loss\n";
    for (std::size_t i = 0; i < log.step_losses.size(); ++i) {
        out << i << ',' << format_double(log.step_losses[i]) << '\n';
    }
}

void write_rank_csv(const TrainLog& log, std::ostream& out) {
    out << "epoch,rank_inflated,rank_delta\n";
    for (std::size_t i = 0; i < log.epoch_rank_trace.size(); ++i) {
        out << i << ',' << log.epoch_rank_trace[i] << ','
            << log.epoch_delta_rank[i] << '\n';
    }
}

}  // namespace lorma
