"""
Boltzmann-machine transition kernels, stationary distributions, and the
deterministic (zero-temperature) dynamics with its attractor cycles.

Every node is updated synchronously:

    Pr(X'_i = +1 | X = x) = sigmoid(2 * beta * sum_j x_j w[j, i])

with ``w[j, i]`` the directed weight from node ``j`` to node ``i``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ConvergenceError,
    InvalidArgumentError,
    InvalidStateError,
    ParseError,
    PreconditionError,
)
from .statespace import ProbVector, StochMatrix, SystemShape


def _as_weights(weights) -> np.ndarray:
    w = np.array(weights, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise InvalidArgumentError(f"weights must be a square matrix, got shape {w.shape}")
    if not np.all(np.isfinite(w)):
        raise InvalidArgumentError("weights must be finite")
    w.flags.writeable = False
    return w


@dataclass(frozen=True, eq=False)
class BoltzmannMachine:
    weights: np.ndarray
    beta: float
    shape: SystemShape = field(init=False)

    def __post_init__(self):
        w = _as_weights(self.weights)
        beta = float(self.beta)
        if not np.isfinite(beta) or beta < 0:
            raise InvalidArgumentError(
                f"beta must be finite and >= 0, got {self.beta!r}; "
                "use deterministic_map for the zero-temperature limit"
            )
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "beta", beta)
        object.__setattr__(self, "shape", SystemShape(w.shape[0]))


@dataclass(frozen=True, eq=False)
class DeterministicMap:
    """Functional graph ``x -> next[x]`` on state indices."""

    shape: SystemShape
    next: np.ndarray

    def __post_init__(self):
        nxt = np.array(self.next, dtype=np.int64).reshape(-1)
        n = self.shape.num_states
        if nxt.size != n:
            raise InvalidArgumentError(f"expected {n} successor indices, got {nxt.size}")
        if np.any((nxt < 0) | (nxt >= n)):
            raise InvalidStateError("successor index out of range")
        nxt.flags.writeable = False
        object.__setattr__(self, "next", nxt)

    def push_forward(self, probs: np.ndarray) -> np.ndarray:
        """Distribution of ``X'`` when ``X`` has law ``probs``."""
        return np.bincount(self.next, weights=probs, minlength=self.shape.num_states)

    def kernel(self) -> StochMatrix:
        """Dense 0/1 stochastic matrix of the map (N <= 12)."""
        self.shape.require_dense()
        n = self.shape.num_states
        rows = np.zeros((n, n))
        rows[np.arange(n), self.next] = 1.0
        return StochMatrix(self.shape, rows)


@dataclass(frozen=True, eq=False)
class AttractorSet:
    """Periodic orbits of a deterministic map and the basin of every state.

    ``cycles[k]`` lists the states of cycle ``k`` in orbit order, starting
    from its smallest index; cycles are sorted by that smallest index.
    ``basin[x]`` is the cycle reached from ``x``.
    """

    shape: SystemShape
    cycles: tuple[tuple[int, ...], ...]
    basin: np.ndarray

    @property
    def basin_sizes(self) -> tuple[int, ...]:
        counts = np.bincount(self.basin, minlength=len(self.cycles))
        return tuple(int(c) for c in counts)

    def __len__(self):
        return len(self.cycles)


def local_fields(weights, shape: SystemShape | None = None) -> np.ndarray:
    """``h[x, i] = sum_j x_j w[j, i]`` for every state ``x``."""
    w = np.asarray(weights, dtype=float)
    shape = shape or SystemShape(w.shape[0])
    return shape.spins.astype(float) @ w


def transition_matrix(m: BoltzmannMachine) -> StochMatrix:
    """Synchronous sigmoid kernel ``P(x, x') = prod_v Pr(X'_v = x'_v | x)``.

    Computed in log space.  Entries are positive for finite ``beta`` until
    they underflow double precision (roughly ``beta * |h| > 350``).
    """
    shape = m.shape
    shape.require_dense()
    t = 2.0 * m.beta * local_fields(m.weights, shape)
    log_up = -np.logaddexp(0.0, -t)
    log_down = -np.logaddexp(0.0, t)
    bits = shape.bits.astype(float)
    log_p = log_up @ bits.T + log_down @ (1.0 - bits).T
    return StochMatrix(shape, np.exp(log_p))


def _gth(rows: np.ndarray) -> np.ndarray:
    # Grassmann-Taksar-Heyman elimination: subtraction-free, so small
    # stationary masses keep full relative accuracy on stiff chains.
    a = np.array(rows, dtype=float)
    n = a.shape[0]
    for k in range(n - 1, 0, -1):
        s = a[k, :k].sum()
        a[:k, k] /= s
        a[:k, :k] += np.outer(a[:k, k], a[k, :k])
    pi = np.empty(n)
    pi[0] = 1.0
    for k in range(1, n):
        pi[k] = pi[:k] @ a[:k, k]
    return pi / pi.sum()


def stationary_residual(p, P: StochMatrix) -> float:
    probs = p.probs if isinstance(p, ProbVector) else np.asarray(p, dtype=float)
    return float(np.max(np.abs(probs @ P.rows - probs)))


def _power(rows, start, tol, max_iter):
    # Besides residual < tol, the distance to the fixed point, estimated as
    # residual / (1 - rate) from the contraction rate over the last 10 steps,
    # must be < tol.  Stops anyway once the residual sits at the rounding floor.
    p = start
    residual = np.inf
    recent = deque(maxlen=11)
    best, stall = np.inf, 0
    for it in range(1, max_iter + 1):
        nxt = p @ rows
        nxt /= nxt.sum()
        residual = float(np.max(np.abs(nxt @ rows - nxt)))
        p = nxt
        if residual == 0.0:
            return p, residual, it
        recent.append(residual)
        if residual < best * (1.0 - 1e-3):
            best, stall = residual, 0
        else:
            stall += 1
        if residual < tol:
            if len(recent) == recent.maxlen:
                rate = (recent[-1] / recent[0]) ** 0.1
                if rate < 1.0 and residual / (1.0 - rate) < tol:
                    return p, residual, it
            if stall >= 100:
                return p, residual, it
    raise ConvergenceError("stationary power iteration did not converge", residual, max_iter)


def stationary_distribution(
    P: StochMatrix,
    tol: float = 1e-13,
    max_iter: int = 1_000_000,
    method: str = "gth",
    start=None,
) -> ProbVector:
    """Unique stationary distribution of a strictly positive kernel.

    ``method="gth"`` solves by GTH elimination and falls back to power
    iteration only if the residual ``max|pP - p|`` is not below ``tol``.
    ``method="power"`` runs power iteration from ``start`` (uniform by
    default).
    """
    if tol <= 0:
        raise InvalidArgumentError("tol must be positive")
    rows = P.rows
    if np.any(rows <= 0):
        raise PreconditionError(
            "stationary_distribution needs a strictly positive kernel; "
            "use attractors/stationary_vertices for deterministic dynamics"
        )
    n = P.shape.num_states
    if method == "gth":
        p = _gth(rows)
        if float(np.max(np.abs(p @ rows - p))) >= tol:
            p, _, _ = _power(rows, p, tol, max_iter)
    elif method == "power":
        if start is None:
            p0 = np.full(n, 1.0 / n)
        else:
            p0 = np.array(start.probs if isinstance(start, ProbVector) else start, dtype=float)
        p, _, _ = _power(rows, p0 / p0.sum(), tol, max_iter)
    else:
        raise InvalidArgumentError(f"unknown method {method!r}")
    return ProbVector(P.shape, p)


def deterministic_map(weights, tie_atol: float = 1e-12) -> DeterministicMap:
    """Zero-temperature update: node ``i`` becomes ``sign(h_i)``.

    A field with ``|h_i| <= tie_atol`` counts as a tie and resolves to +1.
    """
    w = _as_weights(weights)
    shape = SystemShape(w.shape[0])
    h = local_fields(w, shape)
    up = (h >= -tie_atol).astype(np.int64)
    nxt = up @ (np.int64(1) << np.arange(shape.num_nodes, dtype=np.int64))
    return DeterministicMap(shape, nxt)


def attractors(d: DeterministicMap) -> AttractorSet:
    """All periodic orbits of ``d`` with the basin label of every state."""
    nxt = d.next.tolist()
    n = len(nxt)
    status = [0] * n  # 0 unseen, 1 on current walk, 2 resolved
    label = [-1] * n
    raw_cycles = []
    for s in range(n):
        if status[s]:
            continue
        path = []
        x = s
        while status[x] == 0:
            status[x] = 1
            path.append(x)
            x = nxt[x]
        if status[x] == 1:
            start = path.index(x)
            cyc = path[start:]
            cid = len(raw_cycles)
            raw_cycles.append(cyc)
            for y in cyc:
                label[y] = cid
        target = label[x]
        for y in path:
            if label[y] < 0:
                label[y] = target
            status[y] = 2
    order = sorted(range(len(raw_cycles)), key=lambda k: min(raw_cycles[k]))
    remap = {old: new for new, old in enumerate(order)}
    cycles = []
    for old in order:
        cyc = raw_cycles[old]
        i = cyc.index(min(cyc))
        cycles.append(tuple(cyc[i:] + cyc[:i]))
    basin = np.array([remap[c] for c in label], dtype=np.int64)
    basin.flags.writeable = False
    return AttractorSet(d.shape, tuple(cycles), basin)


def stationary_vertices(a: AttractorSet) -> list[ProbVector]:
    """Uniform distribution on each cycle: the extreme stationary laws."""
    vertices = []
    for cyc in a.cycles:
        probs = np.zeros(a.shape.num_states)
        probs[list(cyc)] = 1.0 / len(cyc)
        vertices.append(ProbVector(a.shape, probs))
    return vertices


def energy(x: int, weights) -> float:
    """Hopfield energy ``-1/2 sum_ij w_ij x_i x_j`` of state index ``x``."""
    w = _as_weights(weights)
    shape = SystemShape(w.shape[0])
    if not 0 <= x < shape.num_states:
        raise InvalidStateError(f"state index {x} out of range for N={shape.num_nodes}")
    s = shape.spins[x].astype(float)
    return float(-0.5 * s @ w @ s)


def energies(weights) -> np.ndarray:
    w = _as_weights(weights)
    s = SystemShape(w.shape[0]).spins.astype(float)
    return -0.5 * np.einsum("xi,ij,xj->x", s, w, s)


# --- weight files ----------------------------------------------------------

def write_weights(path, weights):
    """Write ``w[j, i]`` at row ``j``, column ``i`` as plain CSV."""
    w = _as_weights(weights)
    lines = [",".join(repr(float(v)) for v in row) for row in w]
    Path(path).write_text("\n".join(lines) + "\n")


def read_weights(path) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        try:
            row = [float(tok) for tok in stripped.split(",")]
        except ValueError as exc:
            raise ParseError(f"non-numeric weight in {stripped!r}", path, lineno) from exc
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ParseError(f"expected {width} columns, found {len(row)}", path, lineno)
        rows.append(row)
    if not rows:
        raise ParseError("weight file is empty", path)
    if len(rows) != width:
        raise ParseError(f"weight matrix must be square, got {len(rows)}x{width}", path)
    try:
        return _as_weights(rows)
    except InvalidArgumentError as exc:
        raise ParseError(str(exc), path) from exc
