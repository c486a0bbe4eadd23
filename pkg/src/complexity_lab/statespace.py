"""
Binary product state spaces and elementary information quantities.

A system of ``N`` nodes has states ``x in {-1, +1}^N``, stored by index
``i in [0, 2**N)``.  Bit ``v`` of ``i`` is ``(x_v + 1) / 2``, so node 0 is the
least-significant bit.  All information values are in bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import (
    DivergenceInfiniteError,
    InvalidArgumentError,
    InvalidStateError,
    ParseError,
)

MAX_NODES = 20
# dense 2^N x 2^N kernels beyond this size are refused
DENSE_MAX_NODES = 12
PROB_TOL = 1e-12


@lru_cache(maxsize=None)
def _bit_table(num_nodes: int) -> np.ndarray:
    idx = np.arange(2**num_nodes, dtype=np.int64)
    bits = ((idx[:, None] >> np.arange(num_nodes)) & 1).astype(np.int8)
    bits.flags.writeable = False
    return bits


@dataclass(frozen=True)
class SystemShape:
    """Number of binary nodes; fixes the size of the state space."""

    num_nodes: int

    def __post_init__(self):
        n = self.num_nodes
        if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
            raise InvalidArgumentError(f"num_nodes must be an integer, got {n!r}")
        if not 1 <= n <= MAX_NODES:
            raise InvalidArgumentError(f"num_nodes must be in [1, {MAX_NODES}], got {n}")
        object.__setattr__(self, "num_nodes", int(n))

    @property
    def num_states(self) -> int:
        return 1 << self.num_nodes

    @property
    def bits(self) -> np.ndarray:
        """``(2**N, N)`` table of 0/1 bits, row ``i`` is state ``i``."""
        return _bit_table(self.num_nodes)

    @property
    def spins(self) -> np.ndarray:
        """``(2**N, N)`` table of -1/+1 node values."""
        return 2 * self.bits.astype(np.int64) - 1

    def require_dense(self):
        if self.num_nodes > DENSE_MAX_NODES:
            raise InvalidArgumentError(
                f"N={self.num_nodes} needs a dense {self.num_states}x{self.num_states} "
                f"kernel; refusing N > {DENSE_MAX_NODES}"
            )


def encode_state(bits: Sequence[int], shape: SystemShape | None = None) -> int:
    """Index of the state with node values ``bits`` (each -1 or +1).

    When ``shape`` is given the number of values must equal ``N``.
    """
    if shape is not None and len(bits) != shape.num_nodes:
        raise InvalidStateError(f"expected {shape.num_nodes} node values, got {len(bits)}")
    index = 0
    for v, value in enumerate(bits):
        if value not in (-1, 1):
            raise InvalidStateError(f"node {v} has value {value!r}; expected -1 or +1")
        if value == 1:
            index |= 1 << v
    return index


def decode_state(index: int, shape: SystemShape) -> tuple[int, ...]:
    if not 0 <= index < shape.num_states:
        raise InvalidStateError(f"state index {index} out of range for N={shape.num_nodes}")
    return tuple(1 if (index >> v) & 1 else -1 for v in range(shape.num_nodes))


def _normalized(values: np.ndarray, axis=None, what="probabilities") -> np.ndarray:
    if not np.all(np.isfinite(values)):
        raise InvalidArgumentError(f"{what} must be finite")
    if np.any(values < 0):
        raise InvalidArgumentError(f"{what} must be non-negative")
    total = values.sum(axis=axis, keepdims=axis is not None)
    if np.any(np.abs(total - 1.0) > PROB_TOL):
        worst = float(np.max(np.abs(total - 1.0)))
        raise InvalidArgumentError(f"{what} must sum to 1 (off by {worst:.3e})")
    out = values / total
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class ProbVector:
    """A distribution over the ``2**N`` states of ``shape``."""

    shape: SystemShape
    probs: np.ndarray

    def __post_init__(self):
        probs = np.array(self.probs, dtype=float).reshape(-1)
        if probs.size != self.shape.num_states:
            raise InvalidArgumentError(
                f"expected {self.shape.num_states} probabilities, got {probs.size}"
            )
        object.__setattr__(self, "probs", _normalized(probs))

    @classmethod
    def uniform(cls, shape: SystemShape) -> "ProbVector":
        return cls(shape, np.full(shape.num_states, 1.0 / shape.num_states))

    @classmethod
    def dirac(cls, shape: SystemShape, index: int) -> "ProbVector":
        probs = np.zeros(shape.num_states)
        probs[index] = 1.0
        return cls(shape, probs)

    def __len__(self):
        return self.probs.size


@dataclass(frozen=True, eq=False)
class StochMatrix:
    """Row-stochastic transition kernel ``P[x, x']``."""

    shape: SystemShape
    rows: np.ndarray

    def __post_init__(self):
        n = self.shape.num_states
        rows = np.array(self.rows, dtype=float)
        if rows.shape != (n, n):
            raise InvalidArgumentError(f"expected a {n}x{n} matrix, got shape {rows.shape}")
        object.__setattr__(self, "rows", _normalized(rows, axis=1, what="matrix rows"))

    @classmethod
    def uniform(cls, shape: SystemShape) -> "StochMatrix":
        n = shape.num_states
        return cls(shape, np.full((n, n), 1.0 / n))

    @classmethod
    def identity(cls, shape: SystemShape) -> "StochMatrix":
        return cls(shape, np.eye(shape.num_states))


@dataclass(frozen=True, eq=False)
class JointDist:
    """Joint law ``p(x, x') = p(x) P(x, x')`` of one transition."""

    shape: SystemShape
    joint: np.ndarray

    def __post_init__(self):
        n = self.shape.num_states
        joint = np.array(self.joint, dtype=float)
        if joint.shape != (n, n):
            raise InvalidArgumentError(f"expected a {n}x{n} joint, got shape {joint.shape}")
        object.__setattr__(self, "joint", _normalized(joint, what="joint probabilities"))

    @classmethod
    def from_pair(cls, p: ProbVector, P: StochMatrix) -> "JointDist":
        _same_shape(p.shape, P.shape)
        return cls(p.shape, p.probs[:, None] * P.rows)

    @property
    def input_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=1)

    @property
    def output_marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)


def joint_distribution(p: ProbVector, P: StochMatrix) -> JointDist:
    return JointDist.from_pair(p, P)


def _same_shape(a: SystemShape, b: SystemShape):
    if a != b:
        raise InvalidArgumentError(f"shape mismatch: N={a.num_nodes} vs N={b.num_nodes}")


def entropy_bits(values) -> float:
    """Shannon entropy (bits) of an array of probabilities, with 0 log 0 = 0."""
    a = np.asarray(values, dtype=float).ravel()
    a = a[a > 0]
    return float(-np.sum(a * np.log2(a)))


def entropy(p) -> float:
    """Entropy in bits of a :class:`ProbVector` (or any probability array)."""
    if isinstance(p, ProbVector):
        return entropy_bits(p.probs)
    return entropy_bits(p)


def _validate_nodes(nodes: Iterable[int], shape: SystemShape, label: str) -> tuple[int, ...]:
    nodes = tuple(sorted(set(int(v) for v in nodes)))
    for v in nodes:
        if not 0 <= v < shape.num_nodes:
            raise InvalidArgumentError(f"{label} node {v} out of range for N={shape.num_nodes}")
    return nodes


def marginal(j: JointDist, input_nodes: Iterable[int], output_nodes: Iterable[int]) -> np.ndarray:
    """Marginal table of ``(X_A, X'_B)``.

    Returns an array of shape ``(2**|A|, 2**|B|)``.  Sub-states are indexed with
    the same convention as full states: the smallest node of ``A`` (or ``B``)
    is the least-significant bit.
    """
    shape = j.shape
    A = _validate_nodes(input_nodes, shape, "input")
    B = _validate_nodes(output_nodes, shape, "output")
    if not A and not B:
        raise InvalidArgumentError("marginal needs at least one input or output node")
    N = shape.num_nodes
    # C-order reshape puts node N-1 on the first axis of each half
    tensor = j.joint.reshape((2,) * (2 * N))
    in_axes = [N - 1 - v for v in reversed(A)]
    out_axes = [2 * N - 1 - v for v in reversed(B)]
    keep = in_axes + out_axes
    drop = tuple(ax for ax in range(2 * N) if ax not in keep)
    reduced = tensor.sum(axis=drop)
    # remaining axes are in increasing order, which already matches keep
    return reduced.reshape(1 << len(A), 1 << len(B))


def kl_matrices(p: ProbVector, P: StochMatrix, Q: StochMatrix) -> float:
    """``sum_x p(x) sum_x' P(x,x') log2(P(x,x') / Q(x,x'))``."""
    _same_shape(p.shape, P.shape)
    _same_shape(p.shape, Q.shape)
    weight = p.probs[:, None] * P.rows
    support = weight > 0
    bad = support & (Q.rows <= 0)
    if np.any(bad):
        x, xp = np.argwhere(bad)[0]
        raise DivergenceInfiniteError(x, xp)
    ratio = P.rows[support] / Q.rows[support]
    # rounding can leave a -1e-17 residue when P == Q
    return max(float(np.sum(weight[support] * np.log2(ratio))), 0.0)


# --- CSV serialization -----------------------------------------------------

def _header(shape: SystemShape) -> str:
    return f"# shape N={shape.num_nodes}\n"


def _fmt(x: float) -> str:
    return repr(float(x))


def write_prob_vector(path, p: ProbVector):
    lines = [_header(p.shape)] + [_fmt(v) + "\n" for v in p.probs]
    Path(path).write_text("".join(lines))


def write_stoch_matrix(path, P: StochMatrix):
    lines = [_header(P.shape)]
    lines += [",".join(_fmt(v) for v in row) + "\n" for row in P.rows]
    Path(path).write_text("".join(lines))


def _read_shaped_rows(path) -> tuple[SystemShape, list[list[float]]]:
    text = Path(path).read_text().splitlines()
    shape = None
    rows = []
    for lineno, line in enumerate(text, start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            body = stripped.lstrip("#").strip()
            if body.startswith("shape"):
                try:
                    n = int(body.split("N=", 1)[1])
                    shape = SystemShape(n)
                except (IndexError, ValueError) as exc:
                    raise ParseError(f"bad shape header {stripped!r}", path, lineno) from exc
            continue
        try:
            rows.append([float(tok) for tok in stripped.split(",")])
        except ValueError as exc:
            raise ParseError(f"non-numeric entry in {stripped!r}", path, lineno) from exc
    if shape is None:
        raise ParseError("missing '# shape N=<n>' header", path)
    if len(rows) != shape.num_states:
        raise ParseError(f"expected {shape.num_states} rows, found {len(rows)}", path)
    return shape, rows


def read_prob_vector(path) -> ProbVector:
    shape, rows = _read_shaped_rows(path)
    if any(len(r) != 1 for r in rows):
        raise ParseError("probability vector rows must hold a single value", path)
    return ProbVector(shape, np.array([r[0] for r in rows]))


def read_stoch_matrix(path) -> StochMatrix:
    shape, rows = _read_shaped_rows(path)
    if any(len(r) != shape.num_states for r in rows):
        raise ParseError(f"every row must have {shape.num_states} entries", path)
    return StochMatrix(shape, np.array(rows))
