"""
KL projections of a transition ``(p, P)`` onto split families of kernels.

A split family is log-linear in the joint ``q(x, x') = p(x) Q(x, x')``:

* ``S1``: ``Q ~ exp(sum_v f_v(x_v, x'_v))``  (per-node temporal factors)
* ``S2``: ``Q ~ exp(f_V(x'))``               (output independent of input)
* ``S3``: ``Q ~ exp(sum_v f_v(x_v, x'_v) + f_V(x'))``

``min_Q D_p(P || Q)`` over such a family is reached by matching the family's
feature marginals, which cyclic iterative scaling does one family at a time.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError, InvalidArgumentError
from .statespace import ProbVector, StochMatrix, SystemShape

LN2 = np.log(2.0)


class SplitManifold(enum.Enum):
    S1 = "S1"
    S2 = "S2"
    S3 = "S3"

    @property
    def node_features(self) -> bool:
        return self in (SplitManifold.S1, SplitManifold.S3)

    @property
    def output_feature(self) -> bool:
        return self in (SplitManifold.S2, SplitManifold.S3)


@dataclass(frozen=True, eq=False)
class ProjectionResult:
    q: StochMatrix
    divergence_bits: float
    iterations: int
    residual: float
    history: tuple[float, ...] = ()


def _node_view(q: np.ndarray, N: int, v: int) -> np.ndarray:
    # splits each state index as (high bits, bit v, low bits)
    hi, lo = 1 << (N - 1 - v), 1 << v
    return q.reshape(hi, 2, lo, hi, 2, lo)


def _node_table(q: np.ndarray, N: int, v: int) -> np.ndarray:
    return _node_view(q, N, v).sum(axis=(0, 2, 3, 5))


def _ratio(target: np.ndarray, current: np.ndarray) -> np.ndarray:
    # 0/0 := 1; a zero target zeroes the cell
    safe = np.where(current > 0, current, 1.0)
    return np.where(current > 0, target / safe, 1.0)


def _divergence_bits(joint: np.ndarray, q: np.ndarray) -> float:
    pos = joint > 0
    with np.errstate(divide="ignore"):
        value = np.sum(joint[pos] * (np.log2(joint[pos]) - np.log2(q[pos])))
    return float(value)


def _restore_rows(q: np.ndarray, p: np.ndarray):
    rows = q.sum(axis=1)
    scale = np.where(rows > 0, p / np.where(rows > 0, rows, 1.0), 0.0)
    q *= scale[:, None]


def project(
    p: ProbVector,
    P: StochMatrix,
    manifold: SplitManifold | str,
    tol: float = 1e-9,
    max_iter: int = 100_000,
    stall_tol: float = 1e-12,
) -> ProjectionResult:
    """KL projection of ``P`` (weighted by ``p``) onto a split family.

    Starts from ``q(x, x') = p(x) 2**-N`` and cycles over the feature
    families (each node pair ``(x_v, x'_v)``, then the output ``x'``),
    rescaling ``q`` to the target marginal and restoring the input marginal
    ``p`` after every step.  Stops when every constrained marginal is within
    ``tol`` of the target, or when a full cycle changes the divergence by less
    than ``stall_tol``.

    Rows with ``p(x) = 0`` do not enter the divergence; ``Q*`` is uniform there.
    """
    manifold = SplitManifold(manifold)
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    if max_iter < 1:
        raise InvalidArgumentError("max_iter must be at least 1")
    if p.shape != P.shape:
        raise InvalidArgumentError("p and P have different shapes")
    shape = p.shape
    N, n = shape.num_nodes, shape.num_states
    probs = p.probs
    joint = probs[:, None] * P.rows

    node_targets = [_node_table(joint, N, v) for v in range(N)] if manifold.node_features else []
    out_target = joint.sum(axis=0) if manifold.output_feature else None

    def residual_of(q):
        res = 0.0
        for v, t in enumerate(node_targets):
            res = max(res, float(np.max(np.abs(_node_table(q, N, v) - t))))
        if out_target is not None:
            res = max(res, float(np.max(np.abs(q.sum(axis=0) - out_target))))
        return res

    q = probs[:, None] * np.full((n, n), 1.0 / n)
    divergence = _divergence_bits(joint, q)
    history = [divergence]
    iterations = 0
    residual = residual_of(q)
    while residual >= tol:
        if iterations >= max_iter:
            raise ConvergenceError(
                f"iterative scaling onto {manifold.value} did not converge", residual, iterations
            )
        for v, t in enumerate(node_targets):
            view = _node_view(q, N, v)
            r = _ratio(t, view.sum(axis=(0, 2, 3, 5)))
            view *= r[None, :, None, None, :, None]
            _restore_rows(q, probs)
        if out_target is not None:
            q *= _ratio(out_target, q.sum(axis=0))[None, :]
            _restore_rows(q, probs)
        iterations += 1
        new_divergence = _divergence_bits(joint, q)
        history.append(new_divergence)
        residual = residual_of(q)
        stalled = abs(divergence - new_divergence) < stall_tol
        divergence = new_divergence
        if stalled:
            break

    Q = np.full((n, n), 1.0 / n)
    support = probs > 0
    Q[support] = q[support] / probs[support, None]
    return ProjectionResult(
        q=StochMatrix(shape, Q),
        divergence_bits=max(divergence, 0.0),
        iterations=iterations,
        residual=residual,
        history=tuple(history),
    )


def phi_g(p: ProbVector, P: StochMatrix, tol: float = 1e-9, max_iter: int = 100_000) -> float:
    """Geometric integrated information: divergence from the S3 family, in bits."""
    return project(p, P, SplitManifold.S3, tol=tol, max_iter=max_iter).divergence_bits


# --- independent oracle -------------------------------------------------------

def _s3_design(shape: SystemShape) -> np.ndarray:
    """One-hot features of every ``(x, x')`` cell: 4 per node, then ``x'``."""
    N, n = shape.num_nodes, shape.num_states
    bits = shape.bits.astype(np.int64)
    cols = []
    for v in range(N):
        cell = 2 * bits[:, v][:, None] + bits[:, v][None, :]
        cols.append(np.eye(4)[cell.ravel()])
    out = np.broadcast_to(np.arange(n)[None, :], (n, n)).ravel()
    cols.append(np.eye(n)[out])
    return np.hstack(cols)


def phi_g_oracle(
    p: ProbVector,
    P: StochMatrix,
    restarts: int = 20,
    max_iter: int = 2000,
    seed: int = 0,
    gtol: float = 1e-8,
) -> float:
    """Brute-force ``min D_p(P || Q)`` over the S3 parameters by gradient descent.

    Minimizes directly over the log-linear parameters ``f_v(x_v, x'_v)`` and
    ``f_V(x')`` with per-row normalization, from ``restarts`` random starts,
    halving the step whenever the divergence would increase.  Meant for
    validating :func:`phi_g` on tiny systems (N <= 3).
    """
    shape = p.shape
    if shape.num_nodes > 3:
        raise InvalidArgumentError("phi_g_oracle is limited to N <= 3")
    n = shape.num_states
    F = _s3_design(shape)
    probs = p.probs
    joint = (probs[:, None] * P.rows).ravel()
    pos = joint > 0
    # sum_x p(x) sum_x' P log P, the Q-independent part of the divergence
    neg_entropy = float(np.sum(joint[pos] * np.log(P.rows.ravel()[pos])))

    def evaluate(theta):
        logits = (F @ theta).reshape(n, n)
        logits -= logits.max(axis=1, keepdims=True)
        log_q = logits - np.log(np.exp(logits).sum(axis=1, keepdims=True))
        value = neg_entropy - float(np.sum(joint[pos] * log_q.ravel()[pos]))
        model = (probs[:, None] * np.exp(log_q)).ravel()
        grad = F.T @ (model - joint)
        return value, grad

    rng = np.random.default_rng(seed)
    best = np.inf
    for _ in range(restarts):
        theta = rng.normal(size=F.shape[1])
        value, grad = evaluate(theta)
        step = 1.0
        for _ in range(max_iter):
            if np.max(np.abs(grad)) < gtol:
                break
            trial = theta - step * grad
            t_value, t_grad = evaluate(trial)
            if t_value <= value:
                theta, value, grad = trial, t_value, t_grad
                step *= 1.5
            else:
                step *= 0.5
                if step < 1e-14:
                    break
        best = min(best, value)
    return max(best / LN2, 0.0)
