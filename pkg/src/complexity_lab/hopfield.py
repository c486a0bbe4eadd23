"""
Hopfield autoassociative memory: Hebbian storage of random patterns,
information flow while learning, and complexity capacity of the
zero-temperature dynamics.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import partial
from pathlib import Path
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize, minimize_scalar

from .dynamics import (
    BoltzmannMachine,
    DeterministicMap,
    attractors,
    deterministic_map,
    stationary_distribution,
    stationary_vertices,
    transition_matrix,
)
from .errors import (
    ComplexityLabError,
    ConvergenceError,
    InvalidArgumentError,
    ParseError,
    PreconditionError,
)
from .measures import FlowObjective, total_information_flow
from .runner import map_trials, trial_rng
from .statespace import JointDist, ProbVector, SystemShape

STATIONARY_CHECK = 1e-9


@dataclass(frozen=True, eq=False)
class PatternSet:
    """``T`` stored patterns, one row of -1/+1 values per pattern."""

    shape: SystemShape
    patterns: np.ndarray

    def __post_init__(self):
        pats = np.array(self.patterns, dtype=np.int64)
        if pats.ndim == 1 and pats.size == 0:
            pats = pats.reshape(0, self.shape.num_nodes)
        if pats.ndim != 2 or pats.shape[1] != self.shape.num_nodes:
            raise InvalidArgumentError(
                f"patterns must have {self.shape.num_nodes} columns, got shape {pats.shape}"
            )
        if not np.all(np.isin(pats, (-1, 1))):
            raise InvalidArgumentError("pattern entries must be -1 or +1")
        pats.flags.writeable = False
        object.__setattr__(self, "patterns", pats)

    def __len__(self):
        return self.patterns.shape[0]

    def first(self, count: int) -> "PatternSet":
        return PatternSet(self.shape, self.patterns[:count])


def random_patterns(shape: SystemShape, count: int, rng: np.random.Generator) -> PatternSet:
    """``count`` i.i.d. uniform patterns; duplicates are allowed."""
    draws = rng.integers(0, 2, size=(count, shape.num_nodes))
    return PatternSet(shape, 2 * draws - 1)


def hebb_outer_sum(ps: PatternSet, zero_diagonal: bool = False) -> np.ndarray:
    """Integer matrix ``sum_mu xi_i xi_j``, i.e. ``T`` times the Hebb weights."""
    if len(ps) == 0:
        raise InvalidArgumentError("Hebb's rule needs at least one pattern")
    s = ps.patterns.T @ ps.patterns
    if zero_diagonal:
        np.fill_diagonal(s, 0)
    return s


def hebb_weights(ps: PatternSet, zero_diagonal: bool = False) -> np.ndarray:
    """``w_ij = (1/T) sum_mu xi_i xi_j``.

    The diagonal is kept (every ``w_ii = 1``) unless ``zero_diagonal``.
    """
    return hebb_outer_sum(ps, zero_diagonal) / len(ps)


def hebb_update(weights, count: int, pattern: Sequence[int], zero_diagonal: bool = False) -> np.ndarray:
    """Weights after storing one more pattern on top of ``count`` stored ones."""
    xi = np.asarray(pattern, dtype=float)
    outer = np.outer(xi, xi)
    if zero_diagonal:
        np.fill_diagonal(outer, 0.0)
    return (count * np.asarray(weights, dtype=float) + outer) / (count + 1)


# --- complexity capacity -----------------------------------------------------

@dataclass(frozen=True, eq=False)
class CapacityResult:
    capacity_bits: float
    argmax_weights: np.ndarray
    iterations: int
    gap: float
    history: tuple[float, ...] = ()


def _push(dynamics, probs):
    if isinstance(dynamics, DeterministicMap):
        return dynamics.push_forward(probs)
    return probs @ dynamics.rows


def _direction_slopes(objective, V, lam, method, h):
    """Directional derivatives of the objective toward every vertex."""
    p = lam @ V
    if method == "analytic":
        g = V @ objective.gradient(p)
        return g - g @ lam
    slopes = np.empty(len(V))
    for k in range(len(V)):
        d = V[k] - p
        back = p - h * d
        if np.all(back >= 0):
            slopes[k] = (objective.value(p + h * d) - objective.value(back)) / (2 * h)
        else:
            slopes[k] = (objective.value(p + h * d) - objective.value(p)) / h
    return slopes


def complexity_capacity(
    dynamics,
    vertices: Sequence[ProbVector],
    tol: float = 1e-6,
    max_iter: int = 10_000,
    gradient: str = "analytic",
    warm_start: bool = True,
    callback: Optional[Callable[[np.ndarray, float], None]] = None,
) -> CapacityResult:
    """Maximize ``IF(p, P)`` over the convex hull of stationary ``vertices``.

    ``dynamics`` is a :class:`StochMatrix` or a :class:`DeterministicMap`.
    The mixture weights start uniform, optionally get an SLSQP warm start,
    and are then refined by away-step Frank-Wolfe with an exact line search
    until the duality gap drops below ``tol``.  IF is concave in the input
    law, so the gap bounds the distance to the global maximum.

    ``gradient="fd"`` swaps the analytic gradient for central differences of
    step 1e-6 along the vertex directions.  ``callback(weights, value)`` is
    called for the start point and after every iteration.
    """
    if not vertices:
        raise InvalidArgumentError("need at least one stationary vertex")
    if gradient not in ("analytic", "fd"):
        raise InvalidArgumentError(f"unknown gradient method {gradient!r}")
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    objective = FlowObjective(dynamics)
    V = np.stack([np.asarray(v.probs, dtype=float) for v in vertices])
    if V.shape[1] != objective.shape.num_states:
        raise InvalidArgumentError("vertex size does not match the dynamics")
    for k, row in enumerate(V):
        residual = float(np.max(np.abs(_push(dynamics, row) - row)))
        if residual > STATIONARY_CHECK:
            raise PreconditionError(f"vertex {k} is not stationary (residual {residual:.3e})")

    K = len(V)

    def f(lam):
        return float(objective.value(lam @ V))

    lam = np.full(K, 1.0 / K)
    value = f(lam)
    history = [value]
    if callback:
        callback(lam.copy(), value)
    if K == 1:
        return CapacityResult(value, lam, 0, 0.0, tuple(history))

    if warm_start:
        res = minimize(
            lambda x: -f(_to_simplex(x)),
            lam,
            jac=lambda x: -(V @ objective.gradient(_to_simplex(x) @ V)),
            method="SLSQP",
            bounds=[(0.0, 1.0)] * K,
            constraints=[{"type": "eq", "fun": lambda x: x.sum() - 1.0, "jac": lambda x: np.ones(K)}],
            options={"ftol": 1e-15, "maxiter": 500},
        )
        cand = _to_simplex(res.x)
        cand_value = f(cand)
        if cand_value > value:
            lam, value = cand, cand_value
            history.append(value)
            if callback:
                callback(lam.copy(), value)

    gap = np.inf
    iterations = 0
    while True:
        slopes = _direction_slopes(objective, V, lam, gradient, 1e-6)
        s = int(np.argmax(slopes))
        gap = float(slopes[s])
        if gap < tol:
            break
        if iterations >= max_iter:
            raise ConvergenceError("Frank-Wolfe did not reach the duality-gap tolerance", gap, iterations)
        support = np.flatnonzero(lam > 0)
        a = int(support[np.argmin(slopes[support])])
        if gap >= -slopes[a] or lam[a] >= 1.0:
            direction = -lam.copy()
            direction[s] += 1.0
            step_max = 1.0
        else:
            direction = lam.copy()
            direction[a] -= 1.0
            step_max = lam[a] / (1.0 - lam[a])
        line = minimize_scalar(
            lambda t: -f(_to_simplex(lam + t * direction)),
            bounds=(0.0, step_max),
            method="bounded",
            options={"xatol": 1e-13},
        )
        cand = _to_simplex(lam + line.x * direction)
        # a full step to a face is tried explicitly; the bounded search never lands on it
        full = _to_simplex(lam + step_max * direction)
        if f(full) > f(cand):
            cand = full
        cand_value = f(cand)
        iterations += 1
        if cand_value >= value:
            lam, value = cand, cand_value
        history.append(value)
        if callback:
            callback(lam.copy(), value)
        if len(history) > 50 and history[-1] - history[-51] <= 0.0:
            raise ConvergenceError("Frank-Wolfe stalled", gap, iterations)
    return CapacityResult(value, lam, iterations, gap, tuple(history))


def _to_simplex(x: np.ndarray) -> np.ndarray:
    lam = np.clip(np.asarray(x, dtype=float), 0.0, None)
    lam[lam < 1e-15] = 0.0
    return lam / lam.sum()


def deterministic_capacity(weights, tol: float = 1e-6, max_iter: int = 10_000) -> CapacityResult:
    """Capacity of the zero-temperature dynamics of ``weights``."""
    d = deterministic_map(weights, tie_atol=0.0)
    return complexity_capacity(d, stationary_vertices(attractors(d)), tol=tol, max_iter=max_iter)


# --- learning experiments ----------------------------------------------------

def error_marker(exc: Exception) -> str:
    return f"error:{type(exc).__name__}"


def _learning_trial(
    trial: int,
    shape: SystemShape,
    num_patterns_max: int,
    beta: float,
    seed: int,
    zero_diagonal: bool,
    tol_stationary: float,
    mark_errors: bool,
) -> list[tuple]:
    rng = trial_rng(seed, trial)
    patterns = random_patterns(shape, num_patterns_max, rng)
    rows = []
    for T in range(1, num_patterns_max + 1):
        try:
            W = hebb_weights(patterns.first(T), zero_diagonal)
            P = transition_matrix(BoltzmannMachine(W, beta))
            p = stationary_distribution(P, tol=tol_stationary)
            value = total_information_flow(JointDist.from_pair(p, P))
        except ComplexityLabError as exc:
            if not mark_errors:
                raise
            value = error_marker(exc)
        rows.append((trial, T, value))
    return rows


def learning_curve(
    shape: SystemShape,
    num_patterns_max: int,
    beta: float,
    trials: int,
    seed: int,
    zero_diagonal: bool = False,
    tol_stationary: float = 1e-13,
    workers: int | None = 1,
    mark_errors: bool = False,
) -> list[tuple]:
    """IF after each of ``1..num_patterns_max`` Hebbian storages.

    Returns ``(trial, T, IF_bits)`` rows ordered by trial then ``T``.  Trial
    ``k`` draws its patterns from ``trial_rng(seed, k)``.
    """
    _check_counts(num_patterns_max, trials)
    if not np.isfinite(beta) or beta <= 0:
        raise InvalidArgumentError("learning_curve needs a finite beta > 0")
    shape.require_dense()
    fn = partial(
        _learning_trial,
        shape=shape,
        num_patterns_max=num_patterns_max,
        beta=float(beta),
        seed=seed,
        zero_diagonal=zero_diagonal,
        tol_stationary=tol_stationary,
        mark_errors=mark_errors,
    )
    return [row for chunk in map_trials(fn, trials, workers) for row in chunk]


def _capacity_trial(
    trial: int,
    shape: SystemShape,
    num_patterns_max: int,
    seed: int,
    zero_diagonal: bool,
    tol: float,
    max_iter: int,
    mark_errors: bool,
) -> list[tuple]:
    rng = trial_rng(seed, trial)
    patterns = random_patterns(shape, num_patterns_max, rng)
    rows = []
    for T in range(1, num_patterns_max + 1):
        try:
            # T * W has integer entries, so sign ties are detected exactly
            outer = hebb_outer_sum(patterns.first(T), zero_diagonal)
            value = deterministic_capacity(outer, tol=tol, max_iter=max_iter).capacity_bits
        except ComplexityLabError as exc:
            if not mark_errors:
                raise
            value = error_marker(exc)
        rows.append((trial, T, value))
    return rows


def capacity_curve(
    shape: SystemShape,
    num_patterns_max: int,
    trials: int,
    seed: int,
    zero_diagonal: bool = False,
    tol: float = 1e-6,
    max_iter: int = 10_000,
    workers: int | None = 1,
    mark_errors: bool = False,
) -> list[tuple]:
    """Complexity capacity of the deterministic network after each storage.

    Returns ``(trial, T, capacity_bits)`` rows ordered by trial then ``T``.
    """
    _check_counts(num_patterns_max, trials)
    fn = partial(
        _capacity_trial,
        shape=shape,
        num_patterns_max=num_patterns_max,
        seed=seed,
        zero_diagonal=zero_diagonal,
        tol=tol,
        max_iter=max_iter,
        mark_errors=mark_errors,
    )
    return [row for chunk in map_trials(fn, trials, workers) for row in chunk]


def _check_counts(num_patterns_max, trials):
    if num_patterns_max < 1:
        raise InvalidArgumentError("num_patterns_max must be at least 1")
    if trials < 1:
        raise InvalidArgumentError("trials must be at least 1")


# --- pattern files -----------------------------------------------------------

def write_patterns(path, ps: PatternSet):
    lines = [",".join(str(int(v)) for v in row) for row in ps.patterns]
    Path(path).write_text("\n".join(lines) + ("\n" if lines else ""))


def read_patterns(path) -> PatternSet:
    rows = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            rows.append([int(tok) for tok in stripped.split(",")])
        except ValueError as exc:
            raise ParseError(f"pattern entries must be -1 or 1: {stripped!r}", path, lineno) from exc
    if not rows:
        raise ParseError("pattern file is empty", path)
    try:
        return PatternSet(SystemShape(len(rows[0])), np.array(rows))
    except (InvalidArgumentError, ValueError) as exc:
        raise ParseError(str(exc), path) from exc
