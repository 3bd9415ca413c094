import json

import numpy as np
import pytest

from weqlab.action import (
    FiniteAction,
    action_from_json,
    action_to_json,
    orbits,
    oz_partition,
    product_action,
    toy_action,
    translate_point,
    translation_action,
    trivial_action,
)
from weqlab.group import BudgetExceededError


def test_translation_mod3_transitive(a3):
    assert a3.size == 24
    assert a3.transitive
    assert orbits(a3).count == 1


def test_translation_mod2_trivial_image(g2, sanov):
    act = translation_action(g2, sanov)
    assert not act.transitive
    ident = np.arange(6)
    for lab in act.labels:
        assert np.array_equal(act.perm(lab), ident)


def test_inverse_pairing_perms(a3, a5):
    for act in (a3, a5):
        ident = np.arange(act.size)
        for lab in act.labels:
            assert np.array_equal(act.perm(lab)[act.inverse_perm(lab)], ident)


def test_translate_point_matches_dense(g3, sanov, a3):
    rng = np.random.default_rng(0)
    for _ in range(50):
        x = int(rng.integers(24))
        lab = sanov.labels[int(rng.integers(4))]
        assert translate_point(g3, sanov, lab, x) == int(a3.perm(lab)[x])


def test_product_sizes(a3):
    prod = product_action(a3, a3)
    assert prod.size == 576


def test_product_with_trivial_point(a3):
    one = trivial_action(a3.labels, a3.inverse_label, size=1)
    prod = product_action(a3, one)
    for lab in a3.labels:
        assert np.array_equal(prod.perm(lab), a3.perm(lab))


def test_product_coordinatewise_random(a3, a5):
    prod = product_action(a3, a5)
    rng = np.random.default_rng(1)
    for _ in range(100):
        x = int(rng.integers(a3.size))
        y = int(rng.integers(a5.size))
        for lab in a3.labels:
            got = prod.perm(lab)[x * a5.size + y]
            want = a3.perm(lab)[x] * a5.size + a5.perm(lab)[y]
            assert got == want


def test_symbol_mismatch_rejected(a3):
    renamed = a3.relabeled({"a": "x", "A": "X", "b": "y", "B": "Y"})
    with pytest.raises(ValueError):
        product_action(a3, renamed)


def test_orbits_transitive(a5):
    part = orbits(a5)
    assert part.count == 1
    assert part.sizes == (120,)


def test_orbits_product(a3):
    part = orbits(product_action(a3, a3))
    assert part.count == 24
    assert set(part.sizes) == {24}


def test_orbits_identity_toy():
    part = orbits(toy_action("identity10"))
    assert part.count == 10
    assert part.sizes == tuple([1] * 10)


def test_oz_matches_union_find_33(g3, sanov, a3):
    oz = oz_partition(g3, g3, sanov)
    uf = orbits(product_action(a3, a3))
    assert oz.same_blocks(uf)


def test_oz_39_counts(g3, g9, sanov):
    oz = oz_partition(g3, g9, sanov)
    assert oz.count == 24
    assert set(oz.sizes) == {648}


def test_oz_39_matches_union_find(g3, g9, sanov):
    act3 = translation_action(g3, sanov)
    act9 = translation_action(g9, sanov)
    uf = orbits(product_action(act3, act9))
    assert oz_partition(g3, g9, sanov).same_blocks(uf)


def test_oz_identity_block(pair33):
    # points with reduce(y)^{-1} x = identity form a single block
    oz = pair33.oz_flat()
    ident = pair33.group_n.identity_index
    block = np.nonzero(oz == ident)[0]
    assert block.shape[0] == pair33.order_m
    part = orbits(pair33.product())
    ids = part.orbit_of[block]
    assert len(set(ids.tolist())) == 1


def test_oz_requires_divisibility(g3, g5, sanov):
    with pytest.raises(ValueError):
        oz_partition(g3, g5, sanov)


def test_oz_requires_transitivity(g2, sanov):
    with pytest.raises(ValueError, match="mod 2"):
        oz_partition(g2, g2, sanov)


def test_orbits_invariant_under_relabeling(a3):
    prod = product_action(a3, a3)
    renamed = prod.relabeled({"a": "p", "A": "P", "b": "q", "B": "Q"})
    assert orbits(prod).same_blocks(orbits(renamed))


def test_dense_budget_guard(g3, sanov):
    with pytest.raises(BudgetExceededError):
        translation_action(g3, sanov, budget=10)


def test_toy_registry():
    assert toy_action("cycle5").size == 5
    assert toy_action("complete4").labels == ("s1", "s2", "s3")
    assert not toy_action("twocycles6").transitive
    with pytest.raises(ValueError):
        toy_action("nonsense3")


def test_action_json_round_trip(tmp_path):
    act = toy_action("cycle5")
    path = tmp_path / "toy.json"
    path.write_text(json.dumps(action_to_json(act)))
    loaded = action_from_json(path)
    assert loaded.size == act.size
    assert loaded.labels == act.labels
    for lab in act.labels:
        assert np.array_equal(loaded.perm(lab), act.perm(lab))


def test_bad_perm_rejected():
    with pytest.raises(ValueError):
        FiniteAction(3, ("a",), {"a": "a"}, {"a": [0, 0, 2]})
    with pytest.raises(ValueError):
        FiniteAction(
            3, ("a", "A"), {"a": "A", "A": "a"},
            {"a": [1, 2, 0], "A": [1, 2, 0]},
        )
