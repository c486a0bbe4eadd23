"""
Seeded experiment runners and their CSV tables.

Every table starts with ``#`` comment lines that carry the full configuration
and the generator identity, followed by a column header and one row per
``(trial, x)`` in that order.  Numeric cells use the shortest decimal that
round-trips; failed cells hold an ``error:<ExceptionName>`` marker.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Iterable, Optional, Sequence

import numpy as np

from . import __version__
from .dynamics import BoltzmannMachine, stationary_distribution, transition_matrix
from .errors import ComplexityLabError, InvalidArgumentError, ParseError
from .hopfield import capacity_curve, error_marker, learning_curve
from .infogeo import phi_g
from .measures import measure_report
from .runner import RNG_NAME, map_trials, trial_rng
from .statespace import DENSE_MAX_NODES, SystemShape

MEASURE_COLUMNS = ("MI", "SI", "IF", "PhiG", "I")
COMMANDS = ("sweep-beta", "hopfield-learn", "hopfield-capacity", "measure")


def default_beta_grid() -> tuple[float, ...]:
    return parse_beta_grid("0:4:0.1")


def parse_beta_grid(text: str) -> tuple[float, ...]:
    """``"start:stop:step"`` (stop inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(t) for t in text.split(":")]
            if len(parts) != 3:
                raise InvalidArgumentError(f"beta grid range must be start:stop:step, got {text!r}")
            start, stop, step = parts
            if not step > 0:
                raise InvalidArgumentError("beta grid step must be positive")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            if count < 1:
                raise InvalidArgumentError(f"empty beta grid {text!r}")
            return tuple(round(start + k * step, 12) for k in range(count))
        return tuple(float(t) for t in text.split(","))
    except ValueError as exc:
        raise InvalidArgumentError(f"cannot parse beta grid {text!r}") from exc


@dataclass(frozen=True)
class ExperimentConfig:
    """Validated settings of one CLI run."""

    command: str
    n_nodes: int = 5
    beta_grid: tuple[float, ...] = field(default_factory=default_beta_grid)
    trials: int = 100
    weight_low: float = -1.0
    weight_high: float = 1.0
    seed: int = 0
    patterns_max: int = 30
    zero_diagonal: bool = False
    tol_projection: float = 1e-9
    tol_stationary: float = 1e-13
    tol_capacity: float = 1e-6
    out: Optional[str] = None

    def __post_init__(self):
        if self.command not in COMMANDS:
            raise InvalidArgumentError(f"unknown command {self.command!r}")
        SystemShape(self.n_nodes)
        if self.command != "hopfield-capacity" and self.n_nodes > DENSE_MAX_NODES:
            raise InvalidArgumentError(
                f"{self.command} builds a dense 2^N x 2^N kernel; N={self.n_nodes} exceeds {DENSE_MAX_NODES}"
            )
        grid = tuple(float(b) for b in self.beta_grid)
        if not grid:
            raise InvalidArgumentError("beta grid is empty")
        if not all(math.isfinite(b) and b >= 0 for b in grid):
            raise InvalidArgumentError("beta values must be finite and >= 0")
        if any(b2 <= b1 for b1, b2 in zip(grid, grid[1:])):
            raise InvalidArgumentError("beta grid must be strictly increasing")
        object.__setattr__(self, "beta_grid", grid)
        if self.trials < 1:
            raise InvalidArgumentError("trials must be at least 1")
        if not (math.isfinite(self.weight_low) and math.isfinite(self.weight_high)):
            raise InvalidArgumentError("weight range must be finite")
        if self.weight_low > self.weight_high:
            raise InvalidArgumentError("weight range needs low <= high")
        if not 0 <= self.seed < 2**64:
            raise InvalidArgumentError("seed must be a 64-bit unsigned integer")
        if self.patterns_max < 1:
            raise InvalidArgumentError("patterns-max must be at least 1")
        for name in ("tol_projection", "tol_stationary", "tol_capacity"):
            if not getattr(self, name) > 0:
                raise InvalidArgumentError(f"{name} must be positive")

    def header_items(self) -> list[tuple[str, object]]:
        items: list[tuple[str, object]] = [("command", self.command), ("nodes", self.n_nodes)]
        if self.command == "sweep-beta":
            items += [
                ("beta_grid", ",".join(format_cell(b) for b in self.beta_grid)),
                ("weights_range", f"{format_cell(self.weight_low)},{format_cell(self.weight_high)}"),
                ("trials", self.trials),
                ("tol_projection", format_cell(self.tol_projection)),
                ("tol_stationary", format_cell(self.tol_stationary)),
            ]
        elif self.command == "hopfield-learn":
            items += [
                ("beta", format_cell(self.beta_grid[0])),
                ("patterns_max", self.patterns_max),
                ("trials", self.trials),
                ("zero_diagonal", self.zero_diagonal),
                ("tol_stationary", format_cell(self.tol_stationary)),
            ]
        elif self.command == "hopfield-capacity":
            items += [
                ("patterns_max", self.patterns_max),
                ("trials", self.trials),
                ("zero_diagonal", self.zero_diagonal),
                ("tol_capacity", format_cell(self.tol_capacity)),
            ]
        else:
            items += [
                ("beta", format_cell(self.beta_grid[0])),
                ("tol_projection", format_cell(self.tol_projection)),
                ("tol_stationary", format_cell(self.tol_stationary)),
            ]
        if self.command != "measure":
            items += [("seed", self.seed), ("rng", RNG_NAME)]
        return items


# --- row producers -----------------------------------------------------------

def measure_cells(
    weights,
    beta: float,
    tol_projection: float = 1e-9,
    tol_stationary: float = 1e-13,
) -> list:
    """``[MI, SI, IF, PhiG, I]`` at the stationary law; failures become markers."""
    try:
        P = transition_matrix(BoltzmannMachine(weights, beta))
        p = stationary_distribution(P, tol=tol_stationary)
        report = measure_report(p, P, with_phi=False)
    except ComplexityLabError as exc:
        return [error_marker(exc)] * len(MEASURE_COLUMNS)
    try:
        phi: object = phi_g(p, P, tol=tol_projection)
    except ComplexityLabError as exc:
        phi = error_marker(exc)
    return [report.mi, report.si, report.if_flow, phi, report.mutual_info]


def random_weights(rng: np.random.Generator, n_nodes: int, low: float, high: float) -> np.ndarray:
    """``N x N`` matrix of i.i.d. uniform weights, diagonal included."""
    return rng.uniform(low, high, size=(n_nodes, n_nodes))


def _sweep_trial(trial: int, cfg: ExperimentConfig) -> list[list]:
    rng = trial_rng(cfg.seed, trial)
    W = random_weights(rng, cfg.n_nodes, cfg.weight_low, cfg.weight_high)
    return [
        [trial, beta] + measure_cells(W, beta, cfg.tol_projection, cfg.tol_stationary)
        for beta in cfg.beta_grid
    ]


def sweep_beta(cfg: ExperimentConfig, workers: int | None = 1) -> list[list]:
    """Rows ``[trial, beta, MI, SI, IF, PhiG, I]`` for every trial and grid point."""
    chunks = map_trials(partial(_sweep_trial, cfg=cfg), cfg.trials, workers)
    return [row for chunk in chunks for row in chunk]


def hopfield_learn(cfg: ExperimentConfig, workers: int | None = 1) -> list[list]:
    rows = learning_curve(
        SystemShape(cfg.n_nodes),
        cfg.patterns_max,
        cfg.beta_grid[0],
        cfg.trials,
        cfg.seed,
        zero_diagonal=cfg.zero_diagonal,
        tol_stationary=cfg.tol_stationary,
        workers=workers,
        mark_errors=True,
    )
    return [list(r) for r in rows]


def hopfield_capacity(cfg: ExperimentConfig, workers: int | None = 1) -> list[list]:
    rows = capacity_curve(
        SystemShape(cfg.n_nodes),
        cfg.patterns_max,
        cfg.trials,
        cfg.seed,
        zero_diagonal=cfg.zero_diagonal,
        tol=cfg.tol_capacity,
        workers=workers,
        mark_errors=True,
    )
    return [list(r) for r in rows]


def measure(cfg: ExperimentConfig, weights) -> list[list]:
    """Single row ``[beta, MI, SI, IF, PhiG, I]`` for the given weights."""
    w = np.asarray(weights, dtype=float)
    if w.shape != (cfg.n_nodes, cfg.n_nodes):
        raise InvalidArgumentError(f"weights are {w.shape}, expected N={cfg.n_nodes}")
    beta = cfg.beta_grid[0]
    return [[beta] + measure_cells(w, beta, cfg.tol_projection, cfg.tol_stationary)]


def columns_for(command: str) -> tuple[str, ...]:
    return {
        "sweep-beta": ("trial", "beta") + MEASURE_COLUMNS,
        "hopfield-learn": ("trial", "T", "IF_bits"),
        "hopfield-capacity": ("trial", "T", "capacity_bits"),
        "measure": ("beta",) + MEASURE_COLUMNS,
    }[command]


# --- CSV ---------------------------------------------------------------------

def format_cell(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if value is None:
        return ""
    v = float(value)
    if v == 0.0:
        v = 0.0  # drop the sign of negative zero
    return repr(v)


def render_table(header: Sequence[tuple[str, object]], columns: Sequence[str], rows: Iterable[Sequence]) -> str:
    lines = [f"# complexity-lab {__version__}"]
    lines += [f"# {key}={format_cell(value)}" for key, value in header]
    lines.append(",".join(columns))
    lines += [",".join(format_cell(c) for c in row) for row in rows]
    return "\n".join(lines) + "\n"


def write_table(path, header, columns, rows):
    Path(path).write_text(render_table(header, columns, rows))


@dataclass
class Table:
    header: dict[str, str]
    columns: tuple[str, ...]
    rows: list[list]


def _parse_cell(text: str):
    if text.startswith("error:"):
        return text
    try:
        return int(text)
    except ValueError:
        pass
    try:
        return float(text)
    except ValueError:
        return text


def read_table(path) -> Table:
    header: dict[str, str] = {}
    columns: tuple[str, ...] | None = None
    rows: list[list] = []
    for lineno, line in enumerate(Path(path).read_text().splitlines(), start=1):
        if not line.strip():
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, _, value = body.partition("=")
                header[key.strip()] = value.strip()
            continue
        cells = line.split(",")
        if columns is None:
            columns = tuple(cells)
            continue
        if len(cells) != len(columns):
            raise ParseError(f"expected {len(columns)} cells, found {len(cells)}", path, lineno)
        rows.append([_parse_cell(c) for c in cells])
    if columns is None:
        raise ParseError("no column header found", path)
    return Table(header, columns, rows)


def count_errors(rows: Iterable[Sequence]) -> int:
    return sum(1 for row in rows for c in row if isinstance(c, str) and c.startswith("error:"))


# --- summaries ---------------------------------------------------------------

def summarize(columns: Sequence[str], rows: Sequence[Sequence]) -> tuple[tuple[str, ...], list[list]]:
    """Trial mean and standard error (ddof=1) of every value column per x.

    ``rows`` are ``[trial, x, values...]``; error cells are left out of the
    statistics, and ``n`` counts the trials that contributed.
    """
    x_name, value_names = columns[1], columns[2:]
    xs: list = []
    groups: dict = {}
    for row in rows:
        x = row[1]
        if x not in groups:
            xs.append(x)
            groups[x] = [[] for _ in value_names]
        for k, cell in enumerate(row[2:]):
            if not isinstance(cell, str):
                groups[x][k].append(float(cell))
    out_cols = (x_name,)
    for name in value_names:
        out_cols += (f"{name}_n", f"{name}_mean", f"{name}_stderr")
    out_rows = []
    for x in xs:
        row: list = [x]
        for values in groups[x]:
            arr = np.asarray(values)
            n = arr.size
            mean = float(arr.mean()) if n else float("nan")
            se = float(arr.std(ddof=1) / math.sqrt(n)) if n > 1 else float("nan")
            row += [n, mean, se]
        out_rows.append(row)
    return out_cols, out_rows


# --- validation --------------------------------------------------------------

BOUND_TOL = 1e-9
POSTULATE_TOL = 1e-6


def validate_rows(command: str, n_nodes: int, columns: Sequence[str], rows: Sequence[Sequence]) -> list[str]:
    """Bound violations of emitted values, one message per offending cell."""
    problems = []
    idx = {c: k for k, c in enumerate(columns)}
    upper = n_nodes + BOUND_TOL

    def num(row, name):
        v = row[idx[name]]
        return None if isinstance(v, str) else float(v)

    for r, row in enumerate(rows):
        for c, cell in zip(columns, row):
            if isinstance(cell, str):
                problems.append(f"row {r}: {c} is {cell}")
        if command in ("sweep-beta", "measure"):
            for name in ("MI", "IF", "I", "PhiG"):
                v = num(row, name)
                if v is not None and not -BOUND_TOL <= v <= upper:
                    problems.append(f"row {r}: {name}={v!r} outside [0, {n_nodes}]")
            si, i_ = num(row, "SI"), num(row, "I")
            if si is not None and i_ is not None and si > i_ + BOUND_TOL:
                problems.append(f"row {r}: SI={si!r} exceeds I={i_!r}")
            phi, if_ = num(row, "PhiG"), num(row, "IF")
            if phi is not None:
                for name, bound in (("IF", if_), ("I", i_)):
                    if bound is not None and phi > bound + POSTULATE_TOL:
                        problems.append(f"row {r}: PhiG={phi!r} exceeds {name}={bound!r}")
        else:
            name = columns[-1]
            v = num(row, name)
            if v is not None and not -BOUND_TOL <= v <= upper:
                problems.append(f"row {r}: {name}={v!r} outside [0, {n_nodes}]")
    return problems


def validate_file(path) -> list[str]:
    table = read_table(path)
    command = table.header.get("command")
    if command not in COMMANDS:
        raise ParseError(f"unknown or missing command in header: {command!r}", path)
    try:
        n_nodes = int(table.header["nodes"])
    except (KeyError, ValueError) as exc:
        raise ParseError("missing or invalid nodes in header", path) from exc
    expected = columns_for(command)
    if table.columns != expected:
        raise ParseError(f"columns {table.columns} do not match {command}", path)
    return validate_rows(command, n_nodes, table.columns, table.rows)

