"""Smoke tests for the python bindings: one end-to-end pass over every
exposed surface, with numpy as the reference for the generic linalg."""

import numpy as np
import pytest

import lorma


def rand(rng, *shape):
    return rng.standard_normal(shape)


def test_matmul_matches_numpy():
    rng = np.random.default_rng(0)
    a, b = rand(rng, 5, 7), rand(rng, 7, 3)
    np.testing.assert_allclose(lorma.matmul(a, b), a @ b, atol=1e-12)


def test_matmul_shape_error():
    with pytest.raises(ValueError):
        lorma.matmul(np.zeros((2, 3)), np.zeros((2, 3)))


def test_svd_reconstructs():
    rng = np.random.default_rng(1)
    m = rand(rng, 8, 5)
    u, s, vt = lorma.svd(m)
    np.testing.assert_allclose(u @ np.diag(s) @ vt, m, atol=1e-10)
    np.testing.assert_allclose(sorted(s, reverse=True), s, atol=0)


def test_rank_and_pinv():
    rng = np.random.default_rng(2)
    low = rand(rng, 8, 2) @ rand(rng, 2, 8)
    assert lorma.numerical_rank(low) == 2
    tall = rand(rng, 6, 3)
    pinv = lorma.left_pseudo_inverse(tall)
    np.testing.assert_allclose(pinv @ tall, np.eye(3), atol=1e-8)


def test_eigenvalues_rotation():
    eig = lorma.eigenvalues(np.array([[0.0, -1.0], [1.0, 0.0]]))
    np.testing.assert_allclose(sorted(np.imag(eig)), [-1.0, 1.0], atol=1e-12)


def test_inflations():
    m = np.array([[1.0, 0.0, 0.0], [2.0, 0.0, 0.0], [3.0, 0.0, 0.0]])
    rotated = lorma.inflate_pi(m)
    np.testing.assert_allclose(rotated, np.diag([1.0, 2.0, 3.0]), atol=0)
    np.testing.assert_allclose(lorma.deflate_pi(rotated), m, atol=0)
    np.testing.assert_allclose(
        lorma.inflate_plus(np.zeros((4, 4)), 2.0), np.eye(4), atol=0
    )


def test_adapter_identity_init_and_merge():
    rng = np.random.default_rng(3)
    w0 = rand(rng, 16, 16)
    x = rand(rng, 16, 4)
    for variant in ("lora", "lorma_pi", "lorma_plus"):
        state = lorma.init_adapter(w0, lorma.AdapterConfig(variant, r=4, alpha=4.0, seed=9))
        np.testing.assert_allclose(lorma.forward(state, x), w0 @ x, atol=1e-12)
        weights, invertible = lorma.merge(state)
        np.testing.assert_allclose(weights, w0, atol=1e-12)
        if variant != "lora":
            assert invertible
    naive = lorma.init_adapter(w0, lorma.AdapterConfig("lorma_naive", r=4, seed=9))
    assert lorma.numerical_rank(lorma.effective_weight(naive)) <= 4


def test_backward_matches_gradcheck():
    rng = np.random.default_rng(4)
    w0 = rand(rng, 12, 12)
    state = lorma.init_adapter(w0, lorma.AdapterConfig("lorma_plus", r=2, seed=5))
    state.b = state.b + 0.1 * rand(rng, 12, 2)
    state.a = state.a + 0.1 * rand(rng, 2, 12)
    report = lorma.grad_check(state, rand(rng, 12, 3), probe_seed=7)
    assert report.max_rel_error < 1e-4


def test_training_reduces_loss_deterministically():
    task = lorma.make_task(d=16, k=16, target="low_rank_delta", target_rank=2,
                           n_train=64, seed=21)
    init = lorma.init_adapter(task.w0, lorma.AdapterConfig("lorma_plus", r=2, seed=21))
    before = lorma.dataset_loss(init, task)
    trained1, log1 = lorma.train(init, task, lr=5e-3, epochs=75, batch=16, seed=1)
    trained2, log2 = lorma.train(init, task, lr=5e-3, epochs=75, batch=16, seed=1)
    assert log1.step_losses == log2.step_losses
    assert lorma.dataset_loss(trained1, task) < 0.5 * before
    assert lorma.loss_auc(log1) > 0.0
    assert all(r >= 14 for r in log1.epoch_rank_trace)
    np.testing.assert_allclose(trained1.b, trained2.b, atol=0)


def test_metrics_and_random_baseline():
    rng = np.random.default_rng(5)
    ref = rand(rng, 8, 8)
    assert lorma.frobenius_distance(ref, ref) == 0.0
    assert lorma.flattened_cosine(ref, ref) == pytest.approx(1.0)
    cmp = lorma.compare_updates(ref, ref, r=4)
    assert cmp["vs_test"]["frobenius"] == 0.0
    assert cmp["vs_random"]["frobenius"] > 0.0


def test_theory_certificates():
    rng = np.random.default_rng(6)
    m0 = rand(rng, 8, 3)
    target = rand(rng, 8, 3)
    multiplier, residual, feasible = lorma.construct_premultiplier(m0, target)
    assert feasible and residual < 1e-8
    np.testing.assert_allclose(multiplier @ m0, target, atol=1e-7)

    top = np.vstack([np.eye(2), np.zeros((2, 2))])
    bottom = np.vstack([np.zeros((2, 2)), np.eye(2)])
    _, residual, feasible = lorma.best_postmultiplier(top, bottom)
    assert not feasible
    assert residual == pytest.approx(np.sqrt(2.0), abs=1e-10)


def test_snapshot_roundtrip(tmp_path):
    rng = np.random.default_rng(7)
    m = rand(rng, 5, 7)
    path = tmp_path / "m.lrma"
    lorma.save_matrix(m, path)
    np.testing.assert_allclose(lorma.load_matrix(path), m, atol=0)
