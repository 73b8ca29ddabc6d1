"""Mass-moving transformations: contracts, hand oracles, and regressions."""

import json
import random
from fractions import Fraction

import pytest

from expert_spread.bounds import (
    certify_upper_bound,
    extremal_config,
    halfpoint_example,
    lambda_sharp,
)
from expert_spread.config import (
    ConfigError,
    DomainError,
    compute_stats,
    make_configuration,
)
from expert_spread.search import random_configuration, reduced_shape_problem
from expert_spread.transforms import (
    absorb_empty_border_cell,
    augment,
    canonicalize,
    complement_reflect,
    diagonal_swap,
    is_canonical,
    merge_columns,
    merge_rows,
    purify_all_borders,
    purify_border_cell,
    reduce,
    trace_to_json_dict,
    transpose,
    zigzag_normalize,
)

F = Fraction


def no_spread_square():
    """Two-by-two with tied column values and no spread at gap 1/4."""
    return make_configuration(
        F(1, 4),
        2,
        2,
        {
            (1, 1): (0, F(1, 4)),
            (2, 1): (0, F(1, 4)),
            (1, 2): (F(1, 4), 0),
            (2, 2): (F(1, 4), 0),
        },
    )


def impure_border_example():
    """Hand-built gap 2/5 square whose low border cell holds both species."""
    return make_configuration(
        F(2, 5),
        2,
        2,
        {
            (1, 1): (0, F(1, 2)),
            (1, 2): (F(1, 20), F(1, 20)),
            (2, 2): (F(2, 5), 0),
        },
    )


def absorb_trap():
    """Gap 1/4 square where merging away the empty border cell kills spread."""
    return make_configuration(
        F(1, 4),
        2,
        2,
        {(1, 1): (0, F(1, 2)), (2, 1): (0, F(1, 16)), (2, 2): (F(7, 16), 0)},
    )


def test_transpose_is_an_involution():
    rng = random.Random(11)
    for _ in range(40):
        cfg = random_configuration(rng, F(1, 4))
        flipped = transpose(cfg)
        assert transpose(flipped) == cfg
        s, t = compute_stats(cfg), compute_stats(flipped)
        assert t.prob_B == s.prob_B
        assert (flipped.n_cols, flipped.n_rows) == (cfg.n_rows, cfg.n_cols)
        assert t.x == s.y and t.y == s.x


def test_complement_reflect_is_an_involution():
    rng = random.Random(12)
    for _ in range(40):
        cfg = random_configuration(rng, F(1, 3))
        mirrored = complement_reflect(cfg)
        assert complement_reflect(mirrored) == cfg
        assert compute_stats(mirrored).prob_B == compute_stats(cfg).prob_B


def test_merges_refuse_to_destroy_spread():
    ext = extremal_config(F(1, 4))
    assert merge_columns(ext, 1) is ext
    assert merge_rows(ext, 1) is ext


def test_merge_of_spread_free_lines():
    cfg = no_spread_square()
    merged = merge_columns(cfg, 1)
    assert (merged.n_cols, merged.n_rows) == (1, 2)
    assert merged.cells[0][0].ac_mass == F(1, 2)
    assert merged.cells[0][1].a_mass == F(1, 2)
    assert compute_stats(merged).prob_B == 0


def test_merge_out_of_range_raises():
    cfg = no_spread_square()
    with pytest.raises(ConfigError):
        merge_columns(cfg, 2)
    with pytest.raises(ConfigError):
        merge_rows(cfg, 0)


def test_merge_respects_opposite_side_pairs_above_one_half():
    # both rows sit in the spread set on opposite sides of the single
    # column, so merging them would erase all spread; the transformation
    # must decline and return its input
    hp = halfpoint_example(F(3, 4))
    assert compute_stats(hp).prob_B == 1
    assert merge_rows(hp, 1) is hp


def test_zigzag_fixes_the_extremal_witness():
    ext = extremal_config(F(1, 4))
    assert zigzag_normalize(ext) == ext


def test_zigzag_collapses_spread_free_ties():
    out = zigzag_normalize(no_spread_square())
    assert (out.n_cols, out.n_rows) == (1, 1)
    assert compute_stats(out).prob_B == 0


def test_zigzag_contract_on_random_inputs():
    rng = random.Random(13)
    for delta in (F(1, 10), F(1, 4), F(2, 5)):
        for _ in range(30):
            cfg = random_configuration(rng, delta)
            out = zigzag_normalize(cfg)
            s, t = compute_stats(cfg), compute_stats(out)
            assert t.prob_B >= s.prob_B
            assert out.n_cols <= cfg.n_cols and out.n_rows <= cfg.n_rows
            assert all(a < b for a, b in zip(t.x, t.x[1:]))
            assert all(a < b for a, b in zip(t.y, t.y[1:]))


def test_zigzag_keeps_full_spread_above_one_half():
    hp = halfpoint_example(F(3, 4))
    out = zigzag_normalize(hp)
    assert compute_stats(out).prob_B == 1


def test_purify_border_oracle():
    cfg = impure_border_example()
    s = compute_stats(cfg)
    assert s.x == (F(1, 12), F(1))
    assert s.y == (F(0), F(9, 10))
    assert s.d_minus == ((1, 2),)
    out = purify_border_cell(cfg, 1, 2)
    cell = out.cells[0][1]
    assert cell.a_mass == F(1, 10)
    assert cell.ac_mass == 0
    t = compute_stats(out)
    assert t.x[0] == F(1, 6)
    assert t.y[1] == F(1)
    assert t.prob_B >= s.prob_B


def test_purify_identity_on_pure_cell():
    ext = extremal_config(F(1, 4))
    assert purify_border_cell(ext, 1, 2) is ext


def test_purify_rejects_non_border_cell():
    cfg = impure_border_example()
    with pytest.raises(ConfigError):
        purify_border_cell(cfg, 1, 1)
    with pytest.raises(ConfigError):
        purify_border_cell(cfg, 3, 1)


def test_purify_all_borders_leaves_positive_borders_pure():
    out = purify_all_borders(impure_border_example())
    s = compute_stats(out)
    assert s.prob_B == F(1, 10)
    for k, j in s.d_minus + s.d_plus:
        cell = out.cells[k - 1][j - 1]
        assert cell.a_mass == 0 or cell.ac_mass == 0


def test_purify_all_borders_random_postcondition():
    rng = random.Random(14)
    for delta in (F(1, 4), F(2, 5)):
        for _ in range(25):
            cfg = zigzag_normalize(random_configuration(rng, delta))
            out = purify_all_borders(cfg)
            s = compute_stats(out)
            assert s.prob_B >= compute_stats(cfg).prob_B
            for k, j in s.d_minus + s.d_plus:
                cell = out.cells[k - 1][j - 1]
                assert cell.a_mass == 0 or cell.ac_mass == 0


def test_absorb_declines_the_trap():
    cfg = absorb_trap()
    s = compute_stats(cfg)
    assert s.x == (F(0), F(7, 8))
    assert s.y == (F(0), F(1))
    assert s.prob_B == F(1, 16)
    # cell (1, 2) is an empty spread-border cell, but every neighboring
    # merge would drop the spread probability, so nothing happens
    assert absorb_empty_border_cell(cfg, 1, 2) is cfg


def test_reduce_still_certifies_the_trap():
    cfg = absorb_trap()
    before = compute_stats(cfg).prob_B
    result = reduce(cfg, F(1, 1000))
    after = compute_stats(result["out"]).prob_B
    assert before - after < F(1, 1000)
    assert reduced_shape_problem(result["out"]) is None
    cert = certify_upper_bound(result["out"])
    assert after <= cert <= lambda_sharp(F(1, 4))


def test_diagonal_swap_orientation_contract():
    cfg = extremal_config(F(1, 4))
    with pytest.raises(ConfigError):
        diagonal_swap(cfg, (2, 1), (1, 2))
    with pytest.raises(ConfigError):
        diagonal_swap(cfg, (1, 1), (2, 2))
    with pytest.raises(ConfigError):
        diagonal_swap(cfg, (0, 2), (2, 1))


def swap_rectangle():
    """Every cell mixed and inside the spread set at gap 3/4."""
    return make_configuration(
        F(3, 4),
        2,
        2,
        {
            (1, 1): (F(1, 16), F(3, 16)),
            (1, 2): (F(1, 16), F(3, 16)),
            (2, 1): (F(3, 16), F(1, 16)),
            (2, 2): (F(3, 16), F(1, 16)),
        },
    )


def test_diagonal_swap_moves_mass_on_the_full_rectangle():
    cfg = swap_rectangle()
    s = compute_stats(cfg)
    assert s.b_mask == ((True, True), (True, True))
    out = diagonal_swap(cfg, (1, 2), (2, 1), complement=False)
    assert out is not cfg
    # one sixteenth of event mass leaves each source for the cell above
    # or below it in the same column
    assert out.cells[0][0].a_mass == F(1, 8)
    assert out.cells[0][1].a_mass == F(0)
    t = compute_stats(out)
    assert t.prob_B == s.prob_B
    assert t.x == s.x and t.y == s.y
    assert t.p == s.p and t.q == s.q
    mirrored = diagonal_swap(cfg, (1, 2), (2, 1), complement=True)
    assert mirrored is not cfg
    u = compute_stats(mirrored)
    assert u.x == s.x and u.y == s.y and u.prob_B == s.prob_B


def test_diagonal_swap_preserves_every_marginal():
    rng = random.Random(15)
    for _ in range(300):
        cfg = random_configuration(rng, F(1, 4))
        if cfg.n_cols < 2 or cfg.n_rows < 2:
            continue
        k1 = rng.randint(1, cfg.n_cols - 1)
        k2 = rng.randint(k1 + 1, cfg.n_cols)
        j2 = rng.randint(1, cfg.n_rows - 1)
        j1 = rng.randint(j2 + 1, cfg.n_rows)
        out = diagonal_swap(
            cfg, (k1, j1), (k2, j2), complement=bool(rng.getrandbits(1))
        )
        if out is cfg:
            continue
        s, t = compute_stats(cfg), compute_stats(out)
        assert t.prob_B == s.prob_B
        assert t.x == s.x and t.y == s.y
        assert t.p == s.p and t.q == s.q


def test_augment_oracle():
    cfg = make_configuration(
        F(1, 4), 1, 2, {(1, 1): (0, F(4, 5)), (1, 2): (F(1, 5), 0)}
    )
    assert compute_stats(cfg).prob_B == F(1, 5)
    out = augment(cfg, F(1, 100))
    assert (out.n_cols, out.n_rows) == (2, 3)
    assert compute_stats(out).prob_B == F(79, 400)
    assert compute_stats(out).prob_B > F(1, 5) - F(1, 100)
    # the grown configuration now satisfies the corner precondition
    assert is_canonical(canonicalize(out))


def test_augment_needs_positive_spread():
    with pytest.raises(DomainError):
        augment(no_spread_square(), F(1, 100))


def test_canonicalize_requires_corners_below_one_half():
    one_sided = make_configuration(
        F(1, 4), 1, 2, {(1, 1): (0, F(4, 5)), (1, 2): (F(1, 5), 0)}
    )
    with pytest.raises(ConfigError):
        canonicalize(one_sided)


def test_canonicalize_fixes_the_extremal_witness():
    ext = extremal_config(F(1, 4))
    assert canonicalize(ext) == ext
    assert is_canonical(ext)


def test_is_canonical_rejects_unsorted_values():
    cfg = make_configuration(
        F(1, 4), 2, 1, {(1, 1): (F(1, 2), 0), (2, 1): (0, F(1, 2))}
    )
    assert not is_canonical(cfg)


def test_canonicalize_contract_below_one_half():
    rng = random.Random(16)
    done = 0
    while done < 40:
        cfg = random_configuration(rng, F(1, 4))
        if compute_stats(cfg).prob_B == 0:
            continue
        grown = augment(cfg, F(1, 100))
        out = canonicalize(grown)
        assert is_canonical(out)
        assert compute_stats(out).prob_B >= compute_stats(grown).prob_B
        assert out.n_cols <= grown.n_cols and out.n_rows <= grown.n_rows
        done += 1


def test_canonicalize_contract_above_one_half():
    # the corner precondition applies at every gap, so grow first; from
    # one half on the canonical form is just the sorted merge fixpoint
    rng = random.Random(17)
    done = 0
    while done < 40:
        cfg = random_configuration(rng, F(3, 4))
        if compute_stats(cfg).prob_B == 0:
            continue
        grown = augment(cfg, F(1, 100))
        out = canonicalize(grown)
        assert out == zigzag_normalize(grown)
        assert is_canonical(out)
        done += 1


def test_reduce_keeps_the_extremal_witness():
    ext = extremal_config(F(1, 4))
    result = reduce(ext, F(1, 1000))
    out = result["out"]
    assert compute_stats(out).prob_B == F(2, 5)
    assert certify_upper_bound(out) == F(2, 5)
    assert reduced_shape_problem(out) is None
    assert result["trace"]
    assert result["trace"][0].name == "augment"
    for trace in result["trace"]:
        assert trace.prob_b_nondecreasing


def test_reduce_domain_errors():
    ext = extremal_config(F(1, 4))
    with pytest.raises(DomainError):
        reduce(ext, 0)
    with pytest.raises(DomainError):
        reduce(extremal_config(F(1, 2)), F(1, 100))
    with pytest.raises(DomainError):
        reduce(no_spread_square(), F(1, 100))


def test_reduce_contract_on_random_inputs():
    rng = random.Random(18)
    eps = F(1, 1000)
    done = 0
    while done < 40:
        cfg = random_configuration(rng, F(1, 4))
        before = compute_stats(cfg).prob_B
        if before == 0:
            continue
        result = reduce(cfg, eps)
        after = compute_stats(result["out"]).prob_B
        assert before - after < eps
        assert reduced_shape_problem(result["out"]) is None
        cert = certify_upper_bound(result["out"])
        assert after <= cert <= lambda_sharp(F(1, 4))
        done += 1


def test_trace_serialization():
    result = reduce(extremal_config(F(1, 4)), F(1, 100))
    for trace in result["trace"]:
        wire = trace_to_json_dict(trace)
        assert set(wire) == {
            "name",
            "params",
            "prob_B_before",
            "prob_B_after",
            "dims_before",
            "dims_after",
            "prob_b_nondecreasing",
            "dims_nonincreasing",
            "corners_preserved",
        }
        json.dumps(wire)
