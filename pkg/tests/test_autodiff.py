"""Finite-difference checks for every op in the autodiff core."""

import numpy as np
import pytest

from offlang.autodiff import Tensor, cross_entropy, dropout, rows


def numeric_grad(f, x, eps=1e-6):
    g = np.zeros_like(x)
    flat = x.reshape(-1)
    gf = g.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + eps
        up = f()
        flat[i] = orig - eps
        down = f()
        flat[i] = orig
        gf[i] = (up - down) / (2 * eps)
    return g


def check(build_loss, *arrays, tol=1e-7):
    tensors = [Tensor(a, requires_grad=True) for a in arrays]
    loss = build_loss(*tensors)
    loss.backward()
    for t in tensors:
        num = numeric_grad(lambda: float(build_loss(*tensors).data), t.data)
        np.testing.assert_allclose(t.grad, num, rtol=tol, atol=tol)


RNG = np.random.default_rng(42)


class TestOps:
    def test_add_mul_broadcast(self):
        a = RNG.normal(size=(3, 4))
        b = RNG.normal(size=(4,))
        check(lambda x, y: ((x + y) * (x - y * 2.0)).sum(), a, b)

    def test_matmul_2d(self):
        a = RNG.normal(size=(3, 4))
        b = RNG.normal(size=(4, 5))
        check(lambda x, y: (x @ y).sum(), a, b)

    def test_matmul_batched(self):
        a = RNG.normal(size=(2, 3, 4, 5))
        b = RNG.normal(size=(2, 3, 5, 4))
        check(lambda x, y: ((x @ y) ** 2.0).sum(), a, b)

    def test_pow_div(self):
        a = RNG.random((3, 3)) + 0.5
        check(lambda x: (x ** -0.5).sum() + (1.0 / x).sum(), a)

    def test_nonlinearities(self):
        a = RNG.normal(size=(4, 4))
        check(lambda x: (x.tanh() + x.sigmoid() + x.gelu()).sum(), a)

    def test_exp_log(self):
        a = RNG.random((3, 3)) + 0.5
        check(lambda x: (x.exp().log() * x.log()).sum(), a)

    def test_softmax(self):
        a = RNG.normal(size=(3, 5))
        w = RNG.normal(size=(3, 5))
        check(lambda x: (x.softmax() * Tensor(w)).sum(), a)

    def test_softmax_rows_sum_to_one(self):
        a = Tensor(RNG.normal(size=(6, 7)) * 10)
        np.testing.assert_allclose(a.softmax().data.sum(axis=-1), 1.0, atol=1e-12)

    def test_getitem_slices(self):
        a = RNG.normal(size=(4, 6, 8))
        check(lambda x: (x[:, 2, :] * x[:, 0, 1:3].sum()).sum(), a)

    def test_reshape_transpose(self):
        a = RNG.normal(size=(2, 3, 4))
        check(lambda x: (x.transpose(1, 0, 2).reshape(3, 8) ** 2.0).sum(), a)

    def test_mean_axes(self):
        a = RNG.normal(size=(3, 5))
        check(lambda x: (x.mean(axis=-1, keepdims=True) * x).sum(), a)

    def test_rows_gather_scatter(self):
        table = RNG.normal(size=(7, 4))
        ids = np.array([[0, 3, 3], [6, 0, 1]])
        check(lambda t: (rows(t, ids) ** 2.0).sum(), table)

    def test_cross_entropy_matches_manual(self):
        logits = RNG.normal(size=(5, 3))
        targets = np.array([0, 2, 1, 1, 0])
        weights = np.array([1.0, 1.0, 0.0, 1.0, 1.0])
        loss = cross_entropy(Tensor(logits), targets, weights)
        probs = np.exp(logits) / np.exp(logits).sum(-1, keepdims=True)
        manual = -np.log(probs[np.arange(5), targets])
        expected = (manual * weights).sum() / weights.sum()
        assert abs(float(loss.data) - expected) < 1e-12

    def test_cross_entropy_grad(self):
        logits = RNG.normal(size=(4, 3))
        targets = np.array([0, 2, 1, 1])
        weights = np.ones(4)
        check(lambda x: cross_entropy(x, targets, weights), logits)

    def test_cross_entropy_all_masked_is_zero(self):
        loss = cross_entropy(
            Tensor(RNG.normal(size=(2, 3)), requires_grad=True),
            np.array([0, 1]), np.zeros(2),
        )
        assert float(loss.data) == 0.0


class TestMachinery:
    def test_backward_requires_scalar(self):
        with pytest.raises(ValueError):
            Tensor(np.ones(3), requires_grad=True).backward()

    def test_grad_accumulates_over_reuse(self):
        x = Tensor(np.array(2.0), requires_grad=True)
        y = x * x + x * 3.0
        y.backward()
        assert float(x.grad) == 2 * 2.0 + 3.0

    def test_diamond_graph(self):
        x = Tensor(np.array(1.5), requires_grad=True)
        a = x * 2.0
        b = a + x
        c = a * b
        c.backward()
        # c = 2x * 3x = 6x^2, dc/dx = 12x
        assert abs(float(x.grad) - 12 * 1.5) < 1e-12

    def test_dropout_eval_mode_is_identity(self):
        x = Tensor(RNG.normal(size=(5, 5)))
        assert dropout(x, 0.5, None) is x

    def test_dropout_preserves_expectation(self):
        rng = np.random.default_rng(0)
        x = Tensor(np.ones((200, 200)))
        out = dropout(x, 0.3, rng)
        assert abs(out.data.mean() - 1.0) < 0.01
