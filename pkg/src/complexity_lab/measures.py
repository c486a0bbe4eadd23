"""
Closed-form information measures of one transition ``X -> X'``.

All functions take the joint law of ``(X, X')``; the input law ``p`` need
not be stationary, which keeps concavity checks and capacity maximization
expressible with the same code.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .dynamics import DeterministicMap
from .errors import InvalidArgumentError
from .infogeo import phi_g as _phi_g
from .statespace import (
    JointDist,
    ProbVector,
    StochMatrix,
    entropy_bits,
    marginal,
)


@dataclass(frozen=True)
class MeasureReport:
    mi: float
    si: float
    if_flow: float
    mutual_info: float
    phi_g: Optional[float] = None

    def as_row(self) -> dict:
        return {
            "MI": self.mi,
            "SI": self.si,
            "IF": self.if_flow,
            "PhiG": self.phi_g,
            "I": self.mutual_info,
        }


def _node_marginals(probs: np.ndarray, bits: np.ndarray) -> np.ndarray:
    up = probs @ bits
    return np.stack([1.0 - up, up], axis=-1)


def multi_information(p: ProbVector) -> float:
    """``sum_v H(X_v) - H(X)``; zero iff the nodes are independent under ``p``."""
    bits = p.shape.bits.astype(float)
    node = _node_marginals(p.probs, bits)
    total = sum(entropy_bits(node[v]) for v in range(p.shape.num_nodes))
    return max(total - entropy_bits(p.probs), 0.0)


def mutual_information(j: JointDist) -> float:
    """``I(X; X') = H(X) + H(X') - H(X, X')``."""
    value = entropy_bits(j.input_marginal) + entropy_bits(j.output_marginal) - entropy_bits(j.joint)
    return max(value, 0.0)


def _node_pair_tables(j: JointDist) -> list[np.ndarray]:
    return [marginal(j, [v], [v]) for v in range(j.shape.num_nodes)]


def _pair_mutual_information(table: np.ndarray) -> float:
    return (
        entropy_bits(table.sum(axis=1))
        + entropy_bits(table.sum(axis=0))
        - entropy_bits(table)
    )


def synergistic_information(j: JointDist) -> float:
    """``I(X; X') - sum_v I(X_v; X'_v)``.  Can be negative."""
    parts = sum(_pair_mutual_information(t) for t in _node_pair_tables(j))
    return mutual_information(j) - parts


def total_information_flow(j: JointDist) -> float:
    """``sum_v H(X'_v | X_v) - H(X' | X)``, the divergence from the split model."""
    node_terms = sum(
        entropy_bits(t) - entropy_bits(t.sum(axis=1)) for t in _node_pair_tables(j)
    )
    h_cond = entropy_bits(j.joint) - entropy_bits(j.input_marginal)
    return max(node_terms - h_cond, 0.0)


def measure_report(
    p: ProbVector,
    P: StochMatrix,
    with_phi: bool = True,
    tol: float = 1e-9,
    max_iter: int = 100_000,
) -> MeasureReport:
    """All measures of the pair ``(p, P)``; ``phi_g`` only if ``with_phi``."""
    j = JointDist.from_pair(p, P)
    phi = _phi_g(p, P, tol=tol, max_iter=max_iter) if with_phi else None
    return MeasureReport(
        mi=multi_information(p),
        si=synergistic_information(j),
        if_flow=total_information_flow(j),
        mutual_info=mutual_information(j),
        phi_g=phi,
    )


def _xlog2x(a: np.ndarray) -> np.ndarray:
    out = np.zeros_like(a)
    pos = a > 0
    out[pos] = a[pos] * np.log2(a[pos])
    return out


class FlowObjective:
    """``p -> IF(p, P)`` for a fixed kernel, evaluated without building joints.

    Only the per-node output laws ``Pr(X'_v = +1 | x)`` and the row entropies
    of the kernel are kept, so deterministic maps with up to 2**20 states are
    cheap.  ``value`` also accepts a 2-D batch with one distribution per
    row; ``gradient`` takes a single distribution.
    """

    def __init__(self, dynamics):
        if isinstance(dynamics, DeterministicMap):
            self.shape = dynamics.shape
            bits = self.shape.bits
            self.node_up = bits[dynamics.next].astype(float)
            self.row_entropy = np.zeros(self.shape.num_states)
        elif isinstance(dynamics, StochMatrix):
            self.shape = dynamics.shape
            self.node_up = dynamics.rows @ self.shape.bits.astype(float)
            self.row_entropy = -_xlog2x(dynamics.rows).sum(axis=1)
        else:
            raise InvalidArgumentError(
                f"expected a StochMatrix or DeterministicMap, got {type(dynamics).__name__}"
            )
        self.bits = self.shape.bits.astype(float)

    def _tables(self, probs):
        # J[..., v, a, b] = Pr(X_v = a, X'_v = b); a, b in {0: -1, 1: +1}
        up = self.node_up
        bits = self.bits
        p = probs[..., :, None]
        j11 = np.sum(p * bits * up, axis=-2)
        j01 = np.sum(p * (1 - bits) * up, axis=-2)
        m1 = probs @ bits
        m0 = probs.sum(axis=-1, keepdims=True) - m1
        j10 = m1 - j11
        j00 = m0 - j01
        return np.clip(j00, 0, None), np.clip(j01, 0, None), np.clip(j10, 0, None), np.clip(j11, 0, None), m0, m1

    def value(self, probs):
        probs = np.asarray(probs.probs if isinstance(probs, ProbVector) else probs, dtype=float)
        j00, j01, j10, j11, m0, m1 = self._tables(probs)
        h_pairs = -(_xlog2x(j00) + _xlog2x(j01) + _xlog2x(j10) + _xlog2x(j11))
        h_in = -(_xlog2x(np.clip(m0, 0, None)) + _xlog2x(np.clip(m1, 0, None)))
        node_terms = np.sum(h_pairs - h_in, axis=-1)
        value = node_terms - probs @ self.row_entropy
        return np.maximum(value, 0.0) if np.ndim(value) else max(float(value), 0.0)

    def gradient(self, probs) -> np.ndarray:
        """Partial derivatives of IF with respect to each ``p(x)``.

        Where a pair cell has zero mass the log is floored, giving a large
        finite slope instead of an infinite one.
        """
        probs = np.asarray(probs.probs if isinstance(probs, ProbVector) else probs, dtype=float)
        j00, j01, j10, j11, m0, m1 = self._tables(probs)
        tiny = 1e-300

        def lg(num, den):
            return np.log2(np.maximum(num, tiny)) - np.log2(np.maximum(den, tiny))

        # log conditional Pr(X'_v = b | X_v = a), shape (N,) each
        l00, l01 = lg(j00, m0), lg(j01, m0)
        l10, l11 = lg(j10, m1), lg(j11, m1)
        up = self.node_up
        bits = self.bits
        cond_up = bits * l11 + (1 - bits) * l01
        cond_down = bits * l10 + (1 - bits) * l00
        grad = -np.sum(up * cond_up + (1 - up) * cond_down, axis=-1)
        return grad - self.row_entropy
