"""Differentiable building blocks with explicit forward/backward passes."""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp

BN_EPS = 1e-5
BN_MOMENTUM = 0.1


def init_linear(rng: np.random.Generator, fan_in: int, fan_out: int, dtype) -> tuple[np.ndarray, np.ndarray]:
    bound = 1.0 / np.sqrt(fan_in)
    w = rng.uniform(-bound, bound, size=(fan_in, fan_out)).astype(dtype)
    b = rng.uniform(-bound, bound, size=(fan_out,)).astype(dtype)
    return w, b


def linear(x, w, b):
    return x @ w + b


def linear_backward(x, w, dy):
    """Gradients (dx, dw, db) of ``y = x @ w + b``."""
    return dy @ w.T, x.T @ dy, dy.sum(axis=0)


def relu(x):
    return np.maximum(x, 0)


def relu_backward(x, dy):
    return dy * (x > 0)


def batchnorm_train(x, gamma, beta):
    mu = x.mean(axis=0)
    var = x.var(axis=0)
    inv = 1.0 / np.sqrt(var + BN_EPS)
    xhat = (x - mu) * inv
    return gamma * xhat + beta, (xhat, inv, mu, var)


def batchnorm_eval(x, gamma, beta, running_mean, running_var):
    return gamma * (x - running_mean) / np.sqrt(running_var + BN_EPS) + beta


def batchnorm_backward(cache, gamma, dy):
    xhat, inv, _, _ = cache
    n = dy.shape[0]
    dxhat = dy * gamma
    dx = (inv / n) * (n * dxhat - dxhat.sum(axis=0) - xhat * (dxhat * xhat).sum(axis=0))
    return dx, (dy * xhat).sum(axis=0), dy.sum(axis=0)


def update_running(running_mean, running_var, mu, var, n):
    unbiased = var * n / max(n - 1, 1)
    running_mean *= 1 - BN_MOMENTUM
    running_mean += BN_MOMENTUM * mu
    running_var *= 1 - BN_MOMENTUM
    running_var += BN_MOMENTUM * unbiased


def dropout_mask(rng: np.random.Generator | None, shape, p: float, dtype):
    if rng is None or p <= 0:
        return None
    return (rng.random(shape) >= p).astype(dtype) / (1.0 - p)


def sigmoid(z):
    return 0.5 * (1.0 + np.tanh(0.5 * z))


def bce_with_logits(z, y):
    """Mean binary cross-entropy and its gradient with respect to the logits."""
    loss = np.mean(np.logaddexp(0.0, z) - y * z)
    return float(loss), (sigmoid(z) - y) / len(z)


def symmetric_adjacency(n: int, edges: np.ndarray, dtype) -> sp.csr_matrix:
    if len(edges) == 0:
        return sp.csr_matrix((n, n), dtype=dtype)
    u, v = edges[:, 0], edges[:, 1]
    rows = np.concatenate([u, v])
    cols = np.concatenate([v, u])
    a = sp.coo_matrix((np.ones(len(rows), dtype=dtype), (rows, cols)), shape=(n, n)).tocsr()
    a.sum_duplicates()
    a.data[:] = 1
    return a


def gcn_normalize(a: sp.csr_matrix) -> sp.csr_matrix:
    """D^-1/2 (A + I) D^-1/2."""
    n = a.shape[0]
    a_hat = (a + sp.identity(n, dtype=a.dtype, format="csr")).tocsr()
    deg = np.asarray(a_hat.sum(axis=1)).ravel()
    d = sp.diags((1.0 / np.sqrt(deg)).astype(a.dtype))
    return (d @ a_hat @ d).tocsr()


def mean_pool_matrix(graph_index: np.ndarray, n_graphs: int, dtype) -> sp.csr_matrix:
    counts = np.bincount(graph_index, minlength=n_graphs).astype(dtype)
    data = (1.0 / counts[graph_index]).astype(dtype)
    return sp.csr_matrix(
        (data, (graph_index, np.arange(len(graph_index)))), shape=(n_graphs, len(graph_index))
    )
