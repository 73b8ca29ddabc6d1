"""Sharpness searches over configuration space.

The closed form for the largest spread probability is attacked here from
below, without assuming it: enumerate every configuration on a small
rational grid, or hill-climb through mass space with random restarts, and
report the best value found. Every single evaluation is compared against
the closed form, so the searches double as a falsification harness: a
configuration beating the bound would surface as a hard error, not a
silently kept "discovery".

The module also hosts the transformation fuzzer, which generates seeded
random configurations, runs the whole transformation toolbox plus the full
reduction on each, and collects every contract violation as data.
"""

from __future__ import annotations

import math
import os
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Optional

from .config import (
    Configuration,
    ConfigError,
    DomainError,
    ExpertSpreadError,
    InternalStateError,
    RationalLike,
    SearchSpaceError,
    compute_stats,
    make_configuration,
    normalize,
    rational_to_str,
    validate_delta,
)
from .bounds import certify_upper_bound, lambda_sharp
from . import transforms
from .transforms import TransformTrace, make_trace

DEFAULT_ENUM_CAP = 10**8
ENUM_CAP_ENV = "EXPERT_SPREAD_ENUM_CAP"

HALF = Fraction(1, 2)


# ---------------------------------------------------------------------------
# Results
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchResult:
    """Outcome of one search run.

    ``best_prob_B`` always equals the exact spread probability of
    ``best_config``, and never exceeds the closed-form bound for the run's
    threshold parameter; both facts are enforced at construction time by
    the search functions. ``seed`` is ``None`` for deterministic methods.
    """

    delta: Fraction
    best_prob_B: Fraction
    best_config: Configuration
    configs_evaluated: int
    method: str
    seed: Optional[int]


def search_result_to_json_dict(result: SearchResult) -> dict:
    """Serialize a result as an envelope around the standard config format."""
    from .config import config_to_json_dict

    return {
        "method": result.method,
        "seed": result.seed,
        "delta": rational_to_str(result.delta),
        "best_prob_B": rational_to_str(result.best_prob_B),
        "configs_evaluated": result.configs_evaluated,
        "best_config": config_to_json_dict(result.best_config),
    }


# ---------------------------------------------------------------------------
# Shared integer-grid evaluation
# ---------------------------------------------------------------------------
#
# Both searches represent a configuration as a flat tuple of non-negative
# integers over a common denominator: the slots run over cells in
# column-major order, with the complement share first and the event share
# second in each cell. The species order matters only through the
# lexicographic tie-break on maximizers; complement-first makes the
# reported small-grid witnesses line up with the canonical extremal
# configuration rather than its event-complement mirror image. All
# spread-probability evaluations happen in integer arithmetic via
# cross-multiplication; a Configuration object is only built for the
# winner.


def _prob_b_of_parts(
    parts: tuple[int, ...] | list[int],
    n_cols: int,
    n_rows: int,
    denom: int,
    th_num: int,
    th_den: int,
) -> Fraction:
    """Exact spread probability of an integer mass vector.

    Zero-mass columns and rows carry no probability and no conditional
    value, so their cells are simply skipped; this matches evaluating the
    configuration with its zero lines dropped.
    """
    col_t = [0] * n_cols
    col_a = [0] * n_cols
    row_t = [0] * n_rows
    row_a = [0] * n_rows
    i = 0
    for k in range(n_cols):
        for j in range(n_rows):
            c, a = parts[i], parts[i + 1]
            i += 2
            col_t[k] += a + c
            col_a[k] += a
            row_t[j] += a + c
            row_a[j] += a
    b_num = 0
    i = 0
    for k in range(n_cols):
        ct, ca = col_t[k], col_a[k]
        for j in range(n_rows):
            c, a = parts[i], parts[i + 1]
            i += 2
            rt = row_t[j]
            if ct == 0 or rt == 0:
                continue
            if abs(ca * rt - row_a[j] * ct) * th_den >= th_num * ct * rt:
                b_num += a + c
    return Fraction(b_num, denom)


def _parts_to_config(
    parts: tuple[int, ...] | list[int],
    delta: Fraction,
    n_cols: int,
    n_rows: int,
    denom: int,
) -> Configuration:
    masses = {}
    i = 0
    for k in range(1, n_cols + 1):
        for j in range(1, n_rows + 1):
            c, a = parts[i], parts[i + 1]
            i += 2
            if a or c:
                masses[(k, j)] = (Fraction(a, denom), Fraction(c, denom))
    return normalize(make_configuration(delta, n_cols, n_rows, masses))


def _checked_eval(
    parts: tuple[int, ...] | list[int],
    n_cols: int,
    n_rows: int,
    denom: int,
    th_num: int,
    th_den: int,
    lam: Fraction,
) -> Fraction:
    prob = _prob_b_of_parts(parts, n_cols, n_rows, denom, th_num, th_den)
    if prob > lam:
        raise InternalStateError(
            f"evaluated spread probability {prob} exceeds the closed-form "
            f"bound {lam}; the evaluator or the bound is broken"
        )
    return prob


def _validate_dims(n_cols: int, n_rows: int) -> None:
    if n_cols < 1 or n_rows < 1:
        raise DomainError(
            f"grid dimensions must be at least 1x1, got {n_cols}x{n_rows}"
        )


# ---------------------------------------------------------------------------
# Exhaustive enumeration
# ---------------------------------------------------------------------------


def enumeration_cap() -> int:
    """Configured ceiling on exhaustive enumeration size."""
    raw = os.environ.get(ENUM_CAP_ENV)
    if raw is None:
        return DEFAULT_ENUM_CAP
    try:
        return int(raw)
    except ValueError as exc:
        raise ConfigError(
            f"{ENUM_CAP_ENV} must be an integer, got {raw!r}"
        ) from exc


def _compositions(total: int, slots: int) -> Iterator[tuple[int, ...]]:
    """All weak compositions of ``total`` into ``slots`` parts.

    Lexicographically ascending in the flat slot order, so a search that
    updates its argmax only on strict improvement reports the
    lexicographically smallest maximizer. The same order also makes a
    partition of the space by first-slot value trivially deterministic,
    which is what a parallel reduction over disjoint chunks would merge.
    """
    if slots == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, slots - 1):
            yield (first,) + rest


def exhaustive_search(
    delta: RationalLike, n_cols: int, n_rows: int, denom: int
) -> SearchResult:
    """Evaluate every configuration with cell masses in units of 1/denom.

    The number of mass vectors is C(denom + 2mn - 1, denom); it is computed
    and compared against :func:`enumeration_cap` before any work happens,
    and a :class:`SearchSpaceError` naming the count refuses oversized
    requests. The returned witness is the lexicographically smallest
    maximizer in column-major (complement, event) slot order, with zero
    lines dropped.
    """
    d = validate_delta(delta)
    _validate_dims(n_cols, n_rows)
    if denom < 1:
        raise DomainError(f"denominator must be at least 1, got {denom}")
    slots = 2 * n_cols * n_rows
    count = math.comb(denom + slots - 1, denom)
    cap = enumeration_cap()
    if count > cap:
        raise SearchSpaceError(
            f"exhaustive enumeration would evaluate {count} configurations, "
            f"above the cap of {cap}; lower denom or the grid, or raise "
            f"{ENUM_CAP_ENV}"
        )
    lam = lambda_sharp(d)
    th = 1 - d
    best_prob = Fraction(-1)
    best_parts: Optional[tuple[int, ...]] = None
    evaluated = 0
    for parts in _compositions(denom, slots):
        evaluated += 1
        prob = _checked_eval(
            parts, n_cols, n_rows, denom, th.numerator, th.denominator, lam
        )
        if prob > best_prob:
            best_prob = prob
            best_parts = parts
    assert best_parts is not None
    cfg = _parts_to_config(best_parts, d, n_cols, n_rows, denom)
    if compute_stats(cfg).prob_B != best_prob:
        raise InternalStateError(
            "fast integer evaluation disagrees with configuration statistics"
        )
    return SearchResult(
        delta=d,
        best_prob_B=best_prob,
        best_config=cfg,
        configs_evaluated=evaluated,
        method="exhaustive",
        seed=None,
    )


# ---------------------------------------------------------------------------
# Hill climbing
# ---------------------------------------------------------------------------

_CLIMB_DENOM = 1024
_CLIMB_START_QUANTUM = 128


def _random_parts(rng: random.Random, total: int, slots: int) -> list[int]:
    """Uniform weak composition of ``total`` into ``slots`` via stars and bars."""
    if slots == 1:
        return [total]
    cuts = sorted(rng.sample(range(total + slots - 1), slots - 1))
    parts = []
    prev = -1
    for c in cuts:
        parts.append(c - prev - 1)
        prev = c
    parts.append(total + slots - 2 - prev)
    return parts


def hill_climb(
    delta: RationalLike, n_cols: int, n_rows: int, iters: int, seed: int
) -> SearchResult:
    """Randomized ascent through mass space, deterministic given the seed.

    The run is split into up to eight restarts, each starting from a fresh
    uniform random composition over a denominator of 1024. A move transfers
    a quantum of mass between two uniformly chosen slots; the quantum
    shrinks geometrically from 1/8 to 1/1024 over each restart, and a move
    is kept exactly when the spread probability does not decrease. ``iters``
    counts evaluations, so ``iters=1`` scores the initial configuration and
    stops.
    """
    d = validate_delta(delta)
    _validate_dims(n_cols, n_rows)
    if iters < 1:
        raise DomainError(f"iters must be at least 1, got {iters}")
    rng = random.Random(seed)
    slots = 2 * n_cols * n_rows
    lam = lambda_sharp(d)
    th = 1 - d
    th_num, th_den = th.numerator, th.denominator

    restarts = max(1, min(8, iters // 1250))
    base = iters // restarts
    leftover = iters - base * restarts

    best_prob = Fraction(-1)
    best_parts: Optional[tuple[int, ...]] = None
    evaluated = 0
    for r in range(restarts):
        budget = base + (leftover if r == 0 else 0)
        if budget == 0:
            continue
        parts = _random_parts(rng, _CLIMB_DENOM, slots)
        cur = _checked_eval(parts, n_cols, n_rows, _CLIMB_DENOM, th_num, th_den, lam)
        evaluated += 1
        if cur > best_prob:
            best_prob = cur
            best_parts = tuple(parts)
        moves = budget - 1
        for step in range(moves):
            quantum = max(1, _CLIMB_START_QUANTUM >> ((8 * step) // max(1, moves)))
            positive = [i for i in range(slots) if parts[i] > 0]
            src = rng.choice(positive)
            dst = rng.randrange(slots - 1)
            if dst >= src:
                dst += 1
            amt = min(quantum, parts[src])
            parts[src] -= amt
            parts[dst] += amt
            prob = _checked_eval(
                parts, n_cols, n_rows, _CLIMB_DENOM, th_num, th_den, lam
            )
            evaluated += 1
            if prob >= cur:
                cur = prob
                if prob > best_prob:
                    best_prob = prob
                    best_parts = tuple(parts)
            else:
                parts[src] += amt
                parts[dst] -= amt
    assert best_parts is not None
    cfg = _parts_to_config(best_parts, d, n_cols, n_rows, _CLIMB_DENOM)
    if compute_stats(cfg).prob_B != best_prob:
        raise InternalStateError(
            "fast integer evaluation disagrees with configuration statistics"
        )
    return SearchResult(
        delta=d,
        best_prob_B=best_prob,
        best_config=cfg,
        configs_evaluated=evaluated,
        method="hill_climb",
        seed=seed,
    )


# ---------------------------------------------------------------------------
# Transformation fuzzing
# ---------------------------------------------------------------------------


def random_configuration(
    rng: random.Random, delta: Fraction, max_dim: int = 4
) -> Configuration:
    """One seeded random configuration, normalized.

    Dimensions are uniform on 1..max_dim, masses are a uniform integer
    composition over a power-of-two denominator between 2^4 and 2^10, so
    degenerate shapes (empty cells, pure cells, zero lines before the
    normalize) appear with substantial probability.
    """
    n_cols = rng.randint(1, max_dim)
    n_rows = rng.randint(1, max_dim)
    denom = 2 ** rng.randint(4, 10)
    parts = _random_parts(rng, denom, 2 * n_cols * n_rows)
    return _parts_to_config(parts, delta, n_cols, n_rows, denom)


def _corners_positive(cfg: Configuration) -> bool:
    s = compute_stats(cfg)
    th = 1 - cfg.delta
    low = high = False
    for k in range(1, cfg.n_cols + 1):
        for j in range(1, cfg.n_rows + 1):
            if cfg.cell(k, j).is_empty:
                continue
            if s.y[j - 1] - s.x[k - 1] >= th:
                low = True
            if s.x[k - 1] - s.y[j - 1] >= th:
                high = True
    return low and high


class _FuzzRun:
    """Single-configuration battery; appends violating traces to ``out``."""

    def __init__(self, cfg: Configuration, rng: random.Random, out: list) -> None:
        self.cfg = cfg
        self.rng = rng
        self.out = out

    def _error_trace(self, name: str, exc: Exception) -> None:
        trace = make_trace(
            f"{name}:{type(exc).__name__}", (str(exc),), self.cfg, self.cfg
        )
        self.out.append(trace)

    def _judge(
        self,
        name: str,
        params: tuple,
        after: Configuration,
        *,
        dims_exempt: bool = False,
        prob_exact: bool = False,
    ) -> Optional[Configuration]:
        trace = make_trace(name, params, self.cfg, after)
        ok = trace.prob_b_nondecreasing and trace.corners_preserved
        if not dims_exempt:
            ok = ok and trace.dims_nonincreasing
        if prob_exact:
            ok = ok and trace.prob_B_after == trace.prob_B_before
        if not ok:
            self.out.append(trace)
            return None
        return after

    def run(self) -> None:
        try:
            self._basic_ops()
            self._swap_op()
            self._normal_forms()
            self._reduction()
        except ExpertSpreadError as exc:
            self._error_trace("battery", exc)

    def _basic_ops(self) -> None:
        cfg = self.cfg
        self._judge("transpose", (), transforms.transpose(cfg), dims_exempt=True,
                    prob_exact=True)
        self._judge("complement_reflect", (), transforms.complement_reflect(cfg),
                    prob_exact=True)
        if cfg.n_cols >= 2:
            k = self.rng.randint(1, cfg.n_cols - 1)
            self._judge("merge_columns", (k,), transforms.merge_columns(cfg, k))
        if cfg.n_rows >= 2:
            j = self.rng.randint(1, cfg.n_rows - 1)
            self._judge("merge_rows", (j,), transforms.merge_rows(cfg, j))
        s = compute_stats(cfg)
        for k, j in list(s.d_minus) + list(s.d_plus):
            cell = cfg.cell(k, j)
            if cell.a_mass > 0 and cell.ac_mass > 0:
                self._judge(
                    "purify_border_cell", (k, j),
                    transforms.purify_border_cell(cfg, k, j),
                )
                break

    def _swap_op(self) -> None:
        cfg = self.cfg
        if cfg.n_cols < 2 or cfg.n_rows < 2:
            return
        k1 = self.rng.randint(1, cfg.n_cols - 1)
        k2 = self.rng.randint(k1 + 1, cfg.n_cols)
        j2 = self.rng.randint(1, cfg.n_rows - 1)
        j1 = self.rng.randint(j2 + 1, cfg.n_rows)
        complement = self.rng.random() < 0.5
        after = transforms.diagonal_swap(cfg, (k1, j1), (k2, j2), complement)
        sb, sa = compute_stats(cfg), compute_stats(after)
        vectors_kept = (
            sa.prob_B == sb.prob_B
            and sa.x == sb.x
            and sa.y == sb.y
            and sa.p == sb.p
            and sa.q == sb.q
        )
        corners_ok = cfg.delta >= HALF or (
            not _corners_positive(cfg) or _corners_positive(after)
        )
        if not (vectors_kept and corners_ok):
            self.out.append(
                make_trace("diagonal_swap", (k1, j1, k2, j2, complement), cfg, after)
            )

    def _normal_forms(self) -> None:
        cfg = self.cfg
        self._judge("zigzag_normalize", (), transforms.zigzag_normalize(cfg))
        self._judge("ensure_positive_border", (),
                    transforms.ensure_positive_border(cfg))
        self._judge("purify_all_borders", (), transforms.purify_all_borders(cfg))
        self._judge("corner_fill", (), transforms.corner_fill(cfg))
        if compute_stats(cfg).prob_B == 0:
            return
        eps = Fraction(1, self.rng.choice([50, 100, 1000]))
        grown = transforms.augment(cfg, eps)
        trace = make_trace("augment", (eps,), cfg, grown)
        if trace.prob_B_after <= trace.prob_B_before - eps or not _corners_positive(
            grown
        ):
            self.out.append(trace)
            return
        canon = transforms.canonicalize(grown)
        trace = make_trace("canonicalize", (), grown, canon)
        ok = (
            trace.prob_b_nondecreasing
            and trace.corners_preserved
            and transforms.is_canonical(canon)
        )
        if not ok:
            self.out.append(trace)

    def _reduction(self) -> None:
        cfg = self.cfg
        if cfg.delta >= HALF or compute_stats(cfg).prob_B == 0:
            return
        eps = Fraction(1, 1000)
        result = transforms.reduce(cfg, eps)
        out = result["out"]
        problem = reduced_shape_problem(out)
        sb, sa = compute_stats(cfg), compute_stats(out)
        cert = certify_upper_bound(out)
        ok = (
            sa.prob_B > sb.prob_B - eps
            and problem is None
            and sa.prob_B <= cert <= lambda_sharp(cfg.delta)
        )
        if not ok:
            self.out.append(make_trace("reduce", (eps, problem), cfg, out))


def reduced_shape_problem(cfg: Configuration) -> Optional[str]:
    """Check the reduction's two output conditions, literally.

    Returns ``None`` when the low-side count of the column family is at
    most 1, or equals 2 with an empty top-left deep cell, and the
    transposed condition holds for the row family; otherwise a short
    description of the first failure.
    """
    s = compute_stats(cfg)
    if not (
        s.m_minus_G <= 1
        or (s.m_minus_G == 2 and cfg.cell(1, cfg.n_rows).is_empty)
    ):
        return f"column low-side count {s.m_minus_G} with occupied deep cell"
    if not (
        s.m_minus_H <= 1
        or (s.m_minus_H == 2 and cfg.cell(cfg.n_cols, 1).is_empty)
    ):
        return f"row low-side count {s.m_minus_H} with occupied deep cell"
    return None


def fuzz_transforms(delta: RationalLike, n_configs: int, seed: int) -> dict:
    """Run the toolbox over seeded random configurations, collect violations.

    The first exercised configuration is always the known extremal witness
    for the given threshold parameter (a deterministic canary); the rest
    are drawn by :func:`random_configuration`. Contract breaches and
    unexpected toolbox errors are returned as trace records under the
    ``"violations"`` key, never raised.
    """
    from .bounds import extremal_config

    d = validate_delta(delta)
    if n_configs < 1:
        raise DomainError(f"n_configs must be at least 1, got {n_configs}")
    rng = random.Random(seed)
    violations: list[TransformTrace] = []
    for i in range(n_configs):
        if i == 0:
            cfg = extremal_config(d)
        else:
            cfg = random_configuration(rng, d)
        _FuzzRun(cfg, rng, violations).run()
    return {"violations": violations}
