"""Statistics, validation, and serialization of grid configurations."""

import json
import math
import random
from fractions import Fraction

import pytest

from expert_spread.config import (
    Cell,
    ConfigError,
    DomainError,
    compute_stats,
    config_from_json_dict,
    config_to_json_dict,
    dump_config,
    load_config,
    make_configuration,
    normalize,
    overlap_check,
    overlap_violations,
    parse_rational,
    pitman_inclusion_violations,
    rational_to_decimal,
    rational_to_str,
    replace_cells,
    separation_check,
    separation_violations,
    validate_delta,
)

F = Fraction


def quarter_witness():
    """The sharp two-by-two witness at threshold gap 1/4, built by hand."""
    return make_configuration(
        F(1, 4),
        2,
        2,
        {(1, 1): (0, F(3, 5)), (1, 2): (F(1, 5), 0), (2, 1): (F(1, 5), 0)},
    )


def worked_example():
    """Two-by-two with colliding conditionals and no spread at gap 1/4."""
    return make_configuration(
        F(1, 4),
        2,
        2,
        {(1, 1): (0, F(1, 2)), (1, 2): (F(1, 4), 0), (2, 1): (F(1, 4), 0)},
    )


def test_witness_statistics():
    s = compute_stats(quarter_witness())
    assert s.p == (F(4, 5), F(1, 5))
    assert s.q == (F(4, 5), F(1, 5))
    assert s.x == (F(1, 4), F(1))
    assert s.y == (F(1, 4), F(1))
    assert s.prob_B == F(2, 5)
    assert s.b_mask == ((False, True), (True, False))
    assert s.m_minus_G == 1
    assert s.m_plus_G == 2
    assert s.m_minus_H == 1
    assert s.m_plus_H == 2
    assert s.d_minus == ((1, 2),)
    assert s.d_plus == ((2, 1),)


def test_worked_example_statistics():
    s = compute_stats(worked_example())
    assert s.x == (F(1, 3), F(1))
    assert s.y == (F(1, 3), F(1))
    assert s.prob_B == 0
    assert all(not flag for col in s.b_mask for flag in col)


def test_sentinels_when_no_spread():
    s = compute_stats(worked_example())
    assert s.m_minus_G == 0
    assert s.m_plus_G == math.inf
    assert s.m_minus_H == 0
    assert s.m_plus_H == math.inf
    assert s.d_minus == ()
    assert s.d_plus == ()


def test_stats_are_cached():
    cfg = quarter_witness()
    assert compute_stats(cfg) is compute_stats(cfg)


def test_overlap_equality_on_witness():
    cfg = quarter_witness()
    low = overlap_check(cfg, 1, 2)
    assert low["applicable"]
    assert low["holds"]
    assert low["lhs"] == F(1, 5)
    assert low["rhs"] == F(1, 5)
    high = overlap_check(cfg, 2, 1)
    assert high["applicable"]
    assert high["lhs"] == high["rhs"] == F(1, 5)
    # cells outside the spread set carry no overlap constraint
    assert not overlap_check(cfg, 1, 1)["applicable"]


def test_separation_equality_on_witness():
    cfg = quarter_witness()
    d = separation_check(cfg, 1, 2)
    assert d["lhs"] == F(3, 4)
    assert d["rhs"] == F(3, 4)
    assert d["holds"]


def test_violation_scans_empty_on_sound_inputs():
    for cfg in (quarter_witness(), worked_example()):
        assert overlap_violations(cfg) == []
        assert separation_violations(cfg) == []
        assert pitman_inclusion_violations(cfg) == []


def test_pitman_scan_vacuous_above_one_half():
    cfg = make_configuration(
        F(3, 4), 1, 2, {(1, 1): (0, F(1, 2)), (1, 2): (F(1, 2), 0)}
    )
    assert pitman_inclusion_violations(cfg) == []


def test_delta_validation():
    assert validate_delta(F(1, 4)) == F(1, 4)
    assert validate_delta("2/5") == F(2, 5)
    for bad in (0, 1, F(3, 2), F(-1, 4)):
        with pytest.raises(DomainError):
            validate_delta(bad)
    with pytest.raises(ConfigError):
        validate_delta("not a number")


def test_parse_rational():
    assert parse_rational("2/5") == F(2, 5)
    assert parse_rational("0.25") == F(1, 4)
    assert parse_rational(3) == F(3)
    assert parse_rational(F(1, 7)) == F(1, 7)
    for bad in ("", "x", "1/0", None):
        with pytest.raises(ConfigError):
            parse_rational(bad)


def test_construction_validation():
    with pytest.raises(ConfigError):
        make_configuration(F(1, 4), 0, 1, {})
    with pytest.raises(ConfigError):
        make_configuration(F(1, 4), 1, 1, {(2, 1): (1, 0)})
    with pytest.raises(ConfigError):
        make_configuration(F(1, 4), 1, 1, {(1, 1): (F(-1, 2), F(3, 2))})
    with pytest.raises(ConfigError):
        make_configuration(F(1, 4), 1, 1, {(1, 1): (0, F(1, 2))})
    with pytest.raises((ConfigError, DomainError)):
        make_configuration(0, 1, 1, {(1, 1): (0, 1)})


def test_stats_reject_empty_lines():
    cfg = quarter_witness()
    hollow = replace_cells(
        cfg,
        {
            (1, 1): Cell(F(0), F(1)),
            (1, 2): Cell(F(0), F(0)),
            (2, 1): Cell(F(0), F(0)),
        },
    )
    with pytest.raises(ConfigError):
        compute_stats(hollow)
    dropped = normalize(hollow)
    assert (dropped.n_cols, dropped.n_rows) == (1, 1)


def test_normalize_sorts_columns_and_rows():
    cfg = make_configuration(
        F(1, 4), 2, 1, {(1, 1): (F(1, 2), 0), (2, 1): (0, F(1, 2))}
    )
    assert compute_stats(cfg).x == (F(1), F(0))
    sorted_cfg = normalize(cfg)
    assert compute_stats(sorted_cfg).x == (F(0), F(1))
    assert compute_stats(sorted_cfg).prob_B == compute_stats(cfg).prob_B


def test_normalize_fixed_point_on_sorted_input():
    cfg = quarter_witness()
    assert normalize(cfg) == cfg


def test_decimal_rendering():
    assert rational_to_decimal(F(2, 5)) == "0.4"
    assert rational_to_decimal(F(1, 8)) == "0.125"
    assert rational_to_decimal(F(1, 3)) == "0." + "3" * 15
    assert rational_to_decimal(F(2, 11)) == "0.181818181818181"
    assert rational_to_decimal(F(4, 7)) == "0.571428571428571"
    assert rational_to_decimal(F(1)) == "1"
    assert rational_to_decimal(F(0)) == "0"


def test_rational_to_str():
    assert rational_to_str(F(2, 5)) == "2/5"
    assert rational_to_str(F(3)) == "3"
    assert rational_to_str(F(0)) == "0"


def test_json_round_trip_is_exact():
    cfg = quarter_witness()
    wire = json.loads(json.dumps(config_to_json_dict(cfg)))
    assert config_from_json_dict(wire) == cfg


def test_file_round_trip_is_exact(tmp_path):
    cfg = worked_example()
    path = tmp_path / "cfg.json"
    with open(path, "w") as fh:
        dump_config(cfg, fh)
    with open(path) as fh:
        again = load_config(fh)
    assert again == cfg


def test_json_dict_rejects_garbage():
    with pytest.raises(ConfigError):
        config_from_json_dict({"delta": "1/4"})
    with pytest.raises(ConfigError):
        config_from_json_dict(
            {"delta": "1/4", "cols": 1, "rows": 1, "cells": [{"col": 1}]}
        )


def test_random_round_trips():
    rng = random.Random(20240817)
    for _ in range(50):
        n_cols = rng.randint(1, 3)
        n_rows = rng.randint(1, 3)
        denom = 2 ** rng.randint(3, 6)
        slots = 2 * n_cols * n_rows
        cuts = sorted(rng.randint(0, denom) for _ in range(slots - 1))
        parts = [b - a for a, b in zip([0] + cuts, cuts + [denom])]
        masses = {}
        idx = 0
        for k in range(1, n_cols + 1):
            for j in range(1, n_rows + 1):
                a, ac = parts[idx], parts[idx + 1]
                idx += 2
                masses[(k, j)] = (F(a, denom), F(ac, denom))
        try:
            cfg = make_configuration(F(1, 4), n_cols, n_rows, masses)
        except ConfigError:
            continue  # a random draw may leave some line empty
        wire = json.loads(json.dumps(config_to_json_dict(cfg)))
        assert config_from_json_dict(wire) == cfg
