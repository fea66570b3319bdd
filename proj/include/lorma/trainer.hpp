#pragma once

#include <cstdint>
#include <iosfwd>
#include <utility>
#include <vector>

#include "lorma/adapter.hpp"
#include "lorma/matrix.hpp"

namespace lorma {

enum class OptimizerKind { sgd, adamw };

struct OptimizerSpec {
    OptimizerKind kind = OptimizerKind::adamw;
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    double weight_decay = 0.0;  // decoupled: applied to parameters, not gradients
};

enum class ScheduleKind { constant, linear_warmup_decay, cosine };

struct LrSchedule {
    ScheduleKind kind = ScheduleKind::constant;
    double warmup_ratio = 0.0;  // fraction of total_steps spent warming up
    long total_steps = 0;       // 0 lets train() fill in the run length

    /// Multiplier in [0, 1] applied to the peak learning rate. The linear
    /// kind climbs from 0 to 1 over the warmup window, peaks exactly at its
    /// end, and decays to 0 at total_steps. Cosine starts at 1 and ends at 0.
    double factor(long step) const;
};

enum class TaskKind { target_recovery, tiny_attention };
enum class TargetKind { low_rank_delta, dense_random, permuted_scaled };

struct TaskSpec {
    TaskKind kind = TaskKind::target_recovery;
    int d = 32;
    int k = 32;
    TargetKind target_kind = TargetKind::low_rank_delta;
    int target_rank = 2;  // only meaningful for low_rank_delta
    int n_train = 256;
    double noise_std = 0.0;
};

/// A generated regression dataset: frozen base w0, inputs x (k x n),
/// targets y = w_star * x + noise, and the hidden target itself.
struct Task {
    TaskSpec spec;
    std::uint64_t seed = 0;
    Matrix w0;
    Matrix x;
    Matrix y;
    Matrix w_star;
};

Task make_task(const TaskSpec& spec, std::uint64_t seed);

struct TrainLog {
    std::vector<double> step_losses;
    std::vector<int> epoch_rank_trace;  // rank of the adapter transform per epoch
    std::vector<int> epoch_delta_rank;  // rank of delta_w per epoch
    double wall_seconds = 0.0;
};

struct TrainOptions {
    int epochs = 125;
    int batch = 16;
    std::uint64_t seed = 0;
};

/// Mini-batch MSE training of the adapter factors; w0 is never touched.
/// Fully deterministic given the seed. Throws DivergenceError (naming the
/// step) if the loss leaves the finite range.
std::pair<AdapterState, TrainLog> train(AdapterState state, const Task& task,
                                        const OptimizerSpec& opt,
                                        const LrSchedule& schedule,
                                        const TrainOptions& options);

/// Mean squared error over the whole dataset: |forward(x) - y|_F^2 / (2n).
double dataset_loss(const AdapterState& state, const Task& task);

/// Normalized trapezoidal area under the loss-vs-step curve. A constant
/// loss c integrates to c. Requires at least two steps.
double loss_auc(const TrainLog& log);

double final_loss(const TrainLog& log);

/// (1 - auc_test / auc_baseline) * 100.
double auc_reduction_percent(double auc_test, double auc_baseline);

// TrainLog exports: "step,loss" and "epoch,rank_inflated,rank_delta".
void write_loss_csv(const TrainLog& log, std::ostream& out);
void write_rank_csv(const TrainLog& log, std::ostream& out);

}  // namespace lorma
