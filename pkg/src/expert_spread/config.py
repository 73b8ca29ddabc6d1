"""Exact finite configurations for two experts observing a common event.

A configuration models a probability space carved up by two finite partitions:
columns (what the first expert can distinguish) and rows (what the second
expert can distinguish).  Each cell of the resulting grid stores two exact
rational masses: the part of the cell lying inside a distinguished event and
the part lying outside it.  From these masses we derive each expert's
conditional probability of the event (``x`` per column, ``y`` per row) and the
probability that the two opinions differ by at least ``1 - delta``, written
``prob_B`` throughout.

All arithmetic is exact via :class:`fractions.Fraction`.  Floats are not used
anywhere in this module.
"""

from __future__ import annotations

import functools
import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, Mapping, Sequence, Union

__all__ = [
    "Rational",
    "RationalLike",
    "Delta",
    "ExpertSpreadError",
    "ConfigError",
    "DomainError",
    "TransformContractError",
    "InternalStateError",
    "ReduceContradictionError",
    "SearchSpaceError",
    "Cell",
    "Configuration",
    "Stats",
    "validate_delta",
    "make_configuration",
    "replace_cells",
    "compute_stats",
    "normalize",
    "overlap_check",
    "separation_check",
    "pitman_inclusion_violations",
    "overlap_violations",
    "separation_violations",
    "rational_to_str",
    "parse_rational",
    "rational_to_decimal",
    "config_to_json_dict",
    "config_from_json_dict",
    "dump_config",
    "load_config",
]

Rational = Fraction
Delta = Fraction
RationalLike = Union[Fraction, int, str]

EMPTY = Fraction(0)


# ---------------------------------------------------------------------------
# Errors
# ---------------------------------------------------------------------------


class ExpertSpreadError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ExpertSpreadError):
    """Raised for malformed configurations, bad indices, or bad input files."""


class DomainError(ExpertSpreadError):
    """Raised when a numeric argument lies outside its required domain."""


class TransformContractError(ExpertSpreadError):
    """Raised when a transformation would violate one of its guarantees.

    The guarantees are re-checked at runtime (for example, that a mass move
    never removes probability from the spread event).  A failure means the
    requested operation is not sound for the given input and was refused.
    """


class InternalStateError(ExpertSpreadError):
    """Raised when an internal consistency check fails.

    This always indicates an implementation bug, never a property of the
    caller's input.
    """


class ReduceContradictionError(ExpertSpreadError):
    """Raised when the reduction driver reaches a provably impossible state.

    The driver's case analysis contains branches that cannot occur for any
    valid configuration.  Each such branch verifies its premises on the
    current state and raises this error with diagnostics if they hold, so a
    firing always points at an implementation bug rather than looping
    silently.
    """

    def __init__(self, state: str, diagnostics: Mapping[str, object] | None = None):
        self.state = state
        self.diagnostics = dict(diagnostics or {})
        super().__init__(f"impossible reduction state reached at {state}: {self.diagnostics}")


class SearchSpaceError(ExpertSpreadError):
    """Raised when an enumeration request exceeds the configured budget."""


# ---------------------------------------------------------------------------
# Core value types
# ---------------------------------------------------------------------------


def _as_fraction(value: RationalLike, what: str) -> Fraction:
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise ConfigError(f"cannot parse {what} {value!r} as an exact rational") from exc


def validate_delta(value: RationalLike) -> Fraction:
    """Parse and range-check a spread threshold, which must lie in (0, 1)."""
    delta = _as_fraction(value, "delta")
    if not (0 < delta < 1):
        raise DomainError(f"delta must lie strictly between 0 and 1, got {delta}")
    return delta


@dataclass(frozen=True)
class Cell:
    """One grid cell: exact masses inside and outside the tracked event."""

    a_mass: Fraction = EMPTY
    ac_mass: Fraction = EMPTY

    def __post_init__(self) -> None:
        if self.a_mass < 0 or self.ac_mass < 0:
            raise ConfigError(
                f"cell masses must be non-negative, got a={self.a_mass}, ac={self.ac_mass}"
            )

    @property
    def mass(self) -> Fraction:
        return self.a_mass + self.ac_mass

    @property
    def is_empty(self) -> bool:
        return self.a_mass == 0 and self.ac_mass == 0


@dataclass(frozen=True)
class Configuration:
    """An immutable grid of cells with a per-configuration spread threshold.

    ``cells[k - 1][j - 1]`` is the cell in column ``k``, row ``j`` (1-based in
    the public API).  Total mass must be exactly 1.  Zero-mass columns or rows
    are tolerated here so that loaders can accept them; :func:`normalize`
    removes them and :func:`compute_stats` rejects them.
    """

    delta: Fraction
    n_cols: int
    n_rows: int
    cells: tuple[tuple[Cell, ...], ...]

    def __post_init__(self) -> None:
        if not (0 < self.delta < 1):
            raise DomainError(f"delta must lie strictly between 0 and 1, got {self.delta}")
        if self.n_cols < 1 or self.n_rows < 1:
            raise ConfigError(f"grid must be at least 1x1, got {self.n_cols}x{self.n_rows}")
        if len(self.cells) != self.n_cols or any(len(col) != self.n_rows for col in self.cells):
            raise ConfigError("cells array shape does not match n_cols x n_rows")
        total = sum((c.mass for col in self.cells for c in col), EMPTY)
        if total != 1:
            raise ConfigError(f"total mass must be exactly 1, got {total}")

    def cell(self, k: int, j: int) -> Cell:
        """Return the cell in column ``k``, row ``j`` (1-based)."""
        if not (1 <= k <= self.n_cols and 1 <= j <= self.n_rows):
            raise ConfigError(
                f"cell index ({k},{j}) out of range for a {self.n_cols}x{self.n_rows} grid"
            )
        return self.cells[k - 1][j - 1]

    @property
    def dims(self) -> tuple[int, int]:
        return (self.n_cols, self.n_rows)


def make_configuration(
    delta: RationalLike,
    n_cols: int,
    n_rows: int,
    masses: Mapping[tuple[int, int], tuple[RationalLike, RationalLike]],
) -> Configuration:
    """Build a configuration from a sparse ``{(col, row): (a, ac)}`` mapping.

    Cells absent from ``masses`` are empty.  Indices are 1-based.
    """
    delta_f = validate_delta(delta)
    grid = [[Cell() for _ in range(n_rows)] for _ in range(n_cols)]
    for (k, j), (a, ac) in masses.items():
        if not (1 <= k <= n_cols and 1 <= j <= n_rows):
            raise ConfigError(
                f"cell index ({k},{j}) out of range for a {n_cols}x{n_rows} grid"
            )
        grid[k - 1][j - 1] = Cell(_as_fraction(a, "a mass"), _as_fraction(ac, "ac mass"))
    return Configuration(
        delta=delta_f,
        n_cols=n_cols,
        n_rows=n_rows,
        cells=tuple(tuple(col) for col in grid),
    )


def replace_cells(
    cfg: Configuration, updates: Mapping[tuple[int, int], Cell]
) -> Configuration:
    """Return a copy of ``cfg`` with the given cells replaced (1-based keys)."""
    grid = [list(col) for col in cfg.cells]
    for (k, j), cell in updates.items():
        if not (1 <= k <= cfg.n_cols and 1 <= j <= cfg.n_rows):
            raise ConfigError(
                f"cell index ({k},{j}) out of range for a {cfg.n_cols}x{cfg.n_rows} grid"
            )
        grid[k - 1][j - 1] = cell
    return Configuration(
        delta=cfg.delta,
        n_cols=cfg.n_cols,
        n_rows=cfg.n_rows,
        cells=tuple(tuple(col) for col in grid),
    )


# ---------------------------------------------------------------------------
# Statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Stats:
    """Derived quantities of a configuration.

    ``p``/``q`` are column/row masses, ``x``/``y`` the conditional
    probabilities of the tracked event given a column/row.  ``b_mask`` marks
    cells where the two conditionals differ by at least ``1 - delta`` (weak
    inequality).  The four ``m_*`` indices locate the extreme columns and rows
    that participate in such a pair: ``m_minus_G`` is the largest column index
    whose conditional sits far below some row's (0 if none), ``m_plus_G`` the
    smallest column index sitting far above some row's (+inf if none), and
    ``m_minus_H``/``m_plus_H`` are the row-side analogues.  ``d_minus`` and
    ``d_plus`` list the inner corner cells of the two far-apart regions.
    """

    p: tuple[Fraction, ...]
    q: tuple[Fraction, ...]
    x: tuple[Fraction, ...]
    y: tuple[Fraction, ...]
    b_mask: tuple[tuple[bool, ...], ...]
    m_minus_G: int
    m_plus_G: Union[int, float]
    m_minus_H: int
    m_plus_H: Union[int, float]
    d_minus: tuple[tuple[int, int], ...]
    d_plus: tuple[tuple[int, int], ...]
    prob_B: Fraction

    def in_b(self, k: int, j: int) -> bool:
        return self.b_mask[k - 1][j - 1]


@functools.lru_cache(maxsize=8192)
def compute_stats(cfg: Configuration) -> Stats:
    """Compute all derived statistics of a configuration.

    The configuration need not be sorted; values are reported in the given
    column/row order.  Raises :class:`ConfigError` naming the first zero-mass
    column or row, since conditional probabilities are undefined there.

    Configurations are immutable, so results are memoised; repeated queries
    against the same configuration are cheap.
    """
    p = []
    for k in range(1, cfg.n_cols + 1):
        mass = sum((cfg.cells[k - 1][j].mass for j in range(cfg.n_rows)), EMPTY)
        if mass == 0:
            raise ConfigError(f"column {k} has zero mass; conditional probability undefined")
        p.append(mass)
    q = []
    for j in range(1, cfg.n_rows + 1):
        mass = sum((cfg.cells[k][j - 1].mass for k in range(cfg.n_cols)), EMPTY)
        if mass == 0:
            raise ConfigError(f"row {j} has zero mass; conditional probability undefined")
        q.append(mass)

    x = [
        sum((cfg.cells[k][j].a_mass for j in range(cfg.n_rows)), EMPTY) / p[k]
        for k in range(cfg.n_cols)
    ]
    y = [
        sum((cfg.cells[k][j].a_mass for k in range(cfg.n_cols)), EMPTY) / q[j]
        for j in range(cfg.n_rows)
    ]

    threshold = 1 - cfg.delta
    b_mask = tuple(
        tuple(abs(x[k] - y[j]) >= threshold for j in range(cfg.n_rows))
        for k in range(cfg.n_cols)
    )

    cols_low = [k for k in range(cfg.n_cols) if any(y[j] - x[k] >= threshold for j in range(cfg.n_rows))]
    cols_high = [k for k in range(cfg.n_cols) if any(x[k] - y[j] >= threshold for j in range(cfg.n_rows))]
    rows_low = [j for j in range(cfg.n_rows) if any(x[k] - y[j] >= threshold for k in range(cfg.n_cols))]
    rows_high = [j for j in range(cfg.n_rows) if any(y[j] - x[k] >= threshold for k in range(cfg.n_cols))]

    m_minus_G = max(cols_low) + 1 if cols_low else 0
    m_plus_G: Union[int, float] = min(cols_high) + 1 if cols_high else math.inf
    m_minus_H = max(rows_low) + 1 if rows_low else 0
    m_plus_H: Union[int, float] = min(rows_high) + 1 if rows_high else math.inf

    d_minus = []
    d_plus = []
    for k in range(cfg.n_cols):
        for j in range(cfg.n_rows):
            if y[j] - x[k] >= threshold:
                right_off = k + 1 == cfg.n_cols or y[j] - x[k + 1] < threshold
                below_off = j == 0 or y[j - 1] - x[k] < threshold
                if right_off and below_off:
                    d_minus.append((k + 1, j + 1))
            if x[k] - y[j] >= threshold:
                left_off = k == 0 or x[k - 1] - y[j] < threshold
                above_off = j + 1 == cfg.n_rows or x[k] - y[j + 1] < threshold
                if left_off and above_off:
                    d_plus.append((k + 1, j + 1))

    prob_b = sum(
        (
            cfg.cells[k][j].mass
            for k in range(cfg.n_cols)
            for j in range(cfg.n_rows)
            if b_mask[k][j]
        ),
        EMPTY,
    )

    return Stats(
        p=tuple(p),
        q=tuple(q),
        x=tuple(x),
        y=tuple(y),
        b_mask=b_mask,
        m_minus_G=m_minus_G,
        m_plus_G=m_plus_G,
        m_minus_H=m_minus_H,
        m_plus_H=m_plus_H,
        d_minus=tuple(sorted(d_minus)),
        d_plus=tuple(sorted(d_plus)),
        prob_B=prob_b,
    )


def normalize(cfg: Configuration) -> Configuration:
    """Drop zero-mass columns/rows and sort by ascending conditionals.

    Sorting is stable, so equal-valued columns keep their input order; merging
    equal-valued lines is a transformation, not a normalization.  The spread
    probability is unchanged because sorting merely permutes cells.
    """
    total = sum((c.mass for col in cfg.cells for c in col), EMPTY)
    if total != 1:
        raise ConfigError(f"total mass must be exactly 1, got {total}")

    keep_cols = [
        k
        for k in range(cfg.n_cols)
        if sum((cfg.cells[k][j].mass for j in range(cfg.n_rows)), EMPTY) > 0
    ]
    keep_rows = [
        j
        for j in range(cfg.n_rows)
        if sum((cfg.cells[k][j].mass for k in range(cfg.n_cols)), EMPTY) > 0
    ]
    grid = [[cfg.cells[k][j] for j in keep_rows] for k in keep_cols]
    n_cols, n_rows = len(keep_cols), len(keep_rows)

    def col_x(col: Sequence[Cell]) -> Fraction:
        return sum((c.a_mass for c in col), EMPTY) / sum((c.mass for c in col), EMPTY)

    def row_y(j: int, cols: Sequence[Sequence[Cell]]) -> Fraction:
        return sum((col[j].a_mass for col in cols), EMPTY) / sum(
            (col[j].mass for col in cols), EMPTY
        )

    col_order = sorted(range(n_cols), key=lambda k: col_x(grid[k]))
    grid = [grid[k] for k in col_order]
    row_order = sorted(range(n_rows), key=lambda j: row_y(j, grid))
    grid = [[col[j] for j in row_order] for col in grid]

    return Configuration(
        delta=cfg.delta,
        n_cols=n_cols,
        n_rows=n_rows,
        cells=tuple(tuple(col) for col in grid),
    )


def overlap_check(cfg: Configuration, k: int, j: int) -> dict:
    """Check the column/row intersection bound at one cell.

    When the cell's conditionals are at least ``1 - delta`` apart, the mass
    shared by its column and row cannot exceed ``delta/(1+delta)`` times the
    sum of the column and row masses.  Returns ``lhs`` (the cell mass),
    ``rhs`` (the bound), ``applicable`` and ``holds``; the check holds
    vacuously when not applicable.
    """
    if not (1 <= k <= cfg.n_cols and 1 <= j <= cfg.n_rows):
        raise ConfigError(
            f"cell index ({k},{j}) out of range for a {cfg.n_cols}x{cfg.n_rows} grid"
        )
    s = compute_stats(cfg)
    applicable = abs(s.x[k - 1] - s.y[j - 1]) >= 1 - cfg.delta
    lhs = cfg.cells[k - 1][j - 1].mass
    rhs = cfg.delta / (1 + cfg.delta) * (s.p[k - 1] + s.q[j - 1])
    return {
        "lhs": lhs,
        "rhs": rhs,
        "applicable": applicable,
        "holds": (not applicable) or lhs <= rhs,
    }


def separation_check(cfg: Configuration, k: int, j: int) -> dict:
    """Check that a column and row overlap little when their values differ.

    The probability that exactly one of "in column k" / "in row j" occurs,
    conditioned on at least one occurring, is at least ``|x_k - y_j|``.  This
    holds for every pair of positive-mass lines, with no threshold condition.
    """
    if not (1 <= k <= cfg.n_cols and 1 <= j <= cfg.n_rows):
        raise ConfigError(
            f"cell index ({k},{j}) out of range for a {cfg.n_cols}x{cfg.n_rows} grid"
        )
    s = compute_stats(cfg)
    c = cfg.cells[k - 1][j - 1].mass
    union = s.p[k - 1] + s.q[j - 1] - c
    lhs = (s.p[k - 1] + s.q[j - 1] - 2 * c) / union
    rhs = abs(s.x[k - 1] - s.y[j - 1])
    return {"lhs": lhs, "rhs": rhs, "holds": lhs >= rhs}


def pitman_inclusion_violations(cfg: Configuration) -> list[tuple[int, int]]:
    """List cells breaking the far-apart inclusion, empty when all pass.

    For ``delta < 1/2``, every cell whose conditionals differ by at least
    ``1 - delta`` must have one expert at or below ``delta`` and the other at
    or above ``1 - delta``.  For ``delta >= 1/2`` the property is not claimed
    and the check passes vacuously.
    """
    if cfg.delta >= Fraction(1, 2):
        return []
    s = compute_stats(cfg)
    threshold = 1 - cfg.delta
    bad = []
    for k in range(1, cfg.n_cols + 1):
        for j in range(1, cfg.n_rows + 1):
            if not s.b_mask[k - 1][j - 1]:
                continue
            xk, yj = s.x[k - 1], s.y[j - 1]
            low_high = xk <= cfg.delta and yj >= threshold
            high_low = yj <= cfg.delta and xk >= threshold
            if not (low_high or high_low):
                bad.append((k, j))
    return bad


def overlap_violations(cfg: Configuration) -> list[tuple[int, int]]:
    """List cells where the intersection bound fails, empty when all pass."""
    s = compute_stats(cfg)
    rate = cfg.delta / (1 + cfg.delta)
    bad = []
    for k in range(1, cfg.n_cols + 1):
        for j in range(1, cfg.n_rows + 1):
            if not s.b_mask[k - 1][j - 1]:
                continue
            if cfg.cells[k - 1][j - 1].mass > rate * (s.p[k - 1] + s.q[j - 1]):
                bad.append((k, j))
    return bad


def separation_violations(cfg: Configuration) -> list[tuple[int, int]]:
    """List pairs where the separation inequality fails, empty when all pass."""
    s = compute_stats(cfg)
    bad = []
    for k in range(1, cfg.n_cols + 1):
        for j in range(1, cfg.n_rows + 1):
            c = cfg.cells[k - 1][j - 1].mass
            union = s.p[k - 1] + s.q[j - 1] - c
            if (s.p[k - 1] + s.q[j - 1] - 2 * c) < abs(s.x[k - 1] - s.y[j - 1]) * union:
                bad.append((k, j))
    return bad


# ---------------------------------------------------------------------------
# Rational string and decimal rendering
# ---------------------------------------------------------------------------


def rational_to_str(value: Fraction) -> str:
    """Render an exact rational as a canonical reduced string like "3/5"."""
    return str(Fraction(value))


def parse_rational(text: RationalLike) -> Fraction:
    """Parse "p/q", integer, or decimal strings into an exact rational."""
    return _as_fraction(text, "rational")


def rational_to_decimal(value: Fraction, sig_digits: int = 15) -> str:
    """Render a rational as a decimal string via exact long division.

    Terminating expansions are emitted exactly ("0.4" for 2/5).  Otherwise the
    expansion is truncated after ``sig_digits`` significant digits, counted
    from the first non-zero digit.
    """
    value = Fraction(value)
    if value < 0:
        return "-" + rational_to_decimal(-value, sig_digits)
    num, den = value.numerator, value.denominator
    whole, rem = divmod(num, den)
    digits = str(whole)
    significant = len(digits) if whole > 0 else 0
    if rem == 0:
        return digits
    out = [digits, "."]
    while rem != 0 and significant < sig_digits:
        rem *= 10
        d, rem = divmod(rem, den)
        out.append(str(d))
        if significant > 0 or d != 0:
            significant += 1
    return "".join(out)


# ---------------------------------------------------------------------------
# Configuration files
# ---------------------------------------------------------------------------


def config_to_json_dict(cfg: Configuration) -> dict:
    """Serialize to the configuration file schema (empty cells omitted)."""
    cells = []
    for k in range(1, cfg.n_cols + 1):
        for j in range(1, cfg.n_rows + 1):
            cell = cfg.cells[k - 1][j - 1]
            if cell.is_empty:
                continue
            cells.append(
                {
                    "col": k,
                    "row": j,
                    "a": rational_to_str(cell.a_mass),
                    "ac": rational_to_str(cell.ac_mass),
                }
            )
    return {
        "delta": rational_to_str(cfg.delta),
        "cols": cfg.n_cols,
        "rows": cfg.n_rows,
        "cells": cells,
    }


def config_from_json_dict(data: Mapping) -> Configuration:
    """Load a configuration from the file schema, validating shape and mass."""
    try:
        delta = data["delta"]
        n_cols = int(data["cols"])
        n_rows = int(data["rows"])
        raw_cells: Iterable[Mapping] = data["cells"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed configuration document: {exc}") from exc
    masses: dict[tuple[int, int], tuple[Fraction, Fraction]] = {}
    for entry in raw_cells:
        try:
            key = (int(entry["col"]), int(entry["row"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed cell entry {entry!r}") from exc
        if key in masses:
            raise ConfigError(f"duplicate cell entry for {key}")
        masses[key] = (
            parse_rational(entry.get("a", 0)),
            parse_rational(entry.get("ac", 0)),
        )
    return make_configuration(delta, n_cols, n_rows, masses)


def dump_config(cfg: Configuration, fp: IO[str]) -> None:
    json.dump(config_to_json_dict(cfg), fp, indent=2)
    fp.write("\n")


def load_config(fp: IO[str]) -> Configuration:
    try:
        data = json.load(fp)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"configuration file is not valid JSON: {exc}") from exc
    return config_from_json_dict(data)
