"""Low-rank multiplicative adaptation workbench.

Thin numpy-facing wrapper over the C++ core: dense linear algebra, the two
rank-inflation operators, adapter initialization/forward/merge algebra,
closed-form gradients with a finite-difference checker, desk-scale training,
the weight-comparison metric suite and the existence-theorem constructions.
"""

from ._lorma import (
    AdapterConfig,
    AdapterState,
    ConfigError,
    DivergenceError,
    GradCheckReport,
    NumericalError,
    RankError,
    ShapeError,
    Task,
    TrainLog,
    adapter_transform,
    backward,
    best_postmultiplier,
    compare_updates,
    construct_premultiplier,
    dataset_loss,
    deflate_pi,
    delta_w,
    effective_weight,
    eigenvalues,
    flattened_cosine,
    forward,
    frobenius_distance,
    grad_check,
    inflate_pi,
    inflate_plus,
    init_adapter,
    left_pseudo_inverse,
    load_matrix,
    loss_auc,
    make_task,
    matmul,
    merge,
    numerical_rank,
    principal_angle_theta1,
    qr,
    save_matrix,
    square_both_sides,
    svd,
    top_r_eigen_ssd,
    top_r_singular_ssd,
    train,
)

__all__ = [
    "AdapterConfig",
    "AdapterState",
    "ConfigError",
    "DivergenceError",
    "GradCheckReport",
    "NumericalError",
    "RankError",
    "ShapeError",
    "Task",
    "TrainLog",
    "adapter_transform",
    "backward",
    "best_postmultiplier",
    "compare_updates",
    "construct_premultiplier",
    "dataset_loss",
    "deflate_pi",
    "delta_w",
    "effective_weight",
    "eigenvalues",
    "flattened_cosine",
    "forward",
    "frobenius_distance",
    "grad_check",
    "inflate_pi",
    "inflate_plus",
    "init_adapter",
    "left_pseudo_inverse",
    "load_matrix",
    "loss_auc",
    "make_task",
    "matmul",
    "merge",
    "numerical_rank",
    "principal_angle_theta1",
    "qr",
    "save_matrix",
    "square_both_sides",
    "svd",
    "top_r_eigen_ssd",
    "top_r_singular_ssd",
    "train",
]
