"""Finite actions as labeled permutation tuples.

Covers translation actions on enumerated congruence quotients, small
hand-built toy actions, products acting coordinatewise, and orbit structure
(including the coupled-quotient orbit labeling across a reduction map).
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from .group import (
    BudgetExceededError,
    FiniteGroup,
    GeneratorSet,
    mat_mul,
    reduce_mod,
    subgroup_closure,
)

# Dense permutation storage is refused above this many point-symbol cells.
DENSE_CELL_BUDGET = 200_000_000


class FiniteAction:
    """Ground set [0, size) with one permutation per generator label.

    Each label's inverse pair must act by the inverse permutation.  Instances
    are immutable after construction; permutation arrays are read-only.
    """

    __slots__ = ("size", "labels", "inverse_label", "provenance", "transitive", "_perms")

    def __init__(
        self,
        size: int,
        labels: Sequence[str],
        inverse_label: Mapping[str, str],
        perms: Mapping[str, Sequence[int]],
        provenance: str = "custom",
        transitive: bool | None = None,
        validate: bool = True,
    ) -> None:
        if size < 1:
            raise ValueError("ground set must be nonempty")
        labels = tuple(labels)
        if len(labels) != len(set(labels)):
            raise ValueError("duplicate symbol labels")
        arrs: dict[str, np.ndarray] = {}
        for lab in labels:
            arr = np.asarray(perms[lab], dtype=np.int32)
            if validate:
                if arr.shape != (size,):
                    raise ValueError(f"permutation for {lab!r} has wrong length")
                counts = np.bincount(arr, minlength=size)
                if counts.max(initial=0) != 1 or arr.min(initial=0) < 0:
                    raise ValueError(f"symbol {lab!r} does not act by a bijection")
            arr.setflags(write=False)
            arrs[lab] = arr
        inv = dict(inverse_label)
        if validate:
            ident = np.arange(size, dtype=np.int32)
            for lab in labels:
                partner = inv.get(lab)
                if partner is None or partner not in arrs or inv.get(partner) != lab:
                    raise ValueError(f"broken inverse pairing for {lab!r}")
                if not np.array_equal(arrs[partner][arrs[lab]], ident):
                    raise ValueError(
                        f"perm of {partner!r} is not inverse to perm of {lab!r}"
                    )
        self.size = size
        self.labels = labels
        self.inverse_label = inv
        self.provenance = provenance
        self.transitive = transitive
        self._perms = arrs

    def perm(self, label: str) -> np.ndarray:
        return self._perms[label]

    def inverse_perm(self, label: str) -> np.ndarray:
        return self._perms[self.inverse_label[label]]

    @property
    def cells(self) -> int:
        return self.size * len(self.labels)

    def relabeled(self, mapping: Mapping[str, str]) -> "FiniteAction":
        """Same permutations under renamed symbols."""
        labels = tuple(mapping[lab] for lab in self.labels)
        inverse = {mapping[a]: mapping[b] for a, b in self.inverse_label.items()}
        perms = {mapping[lab]: self._perms[lab] for lab in self.labels}
        return FiniteAction(
            self.size, labels, inverse, perms,
            provenance=self.provenance, transitive=self.transitive, validate=False,
        )


def translation_action(
    group: FiniteGroup, gens: GeneratorSet, budget: int = DENSE_CELL_BUDGET
) -> FiniteAction:
    """Left translation by the reduced generators on the enumerated quotient.

    The transitivity flag records whether the reduced set generates the whole
    group; a non-generating image is allowed and simply flagged.
    """
    if gens.d != group.d:
        raise ValueError("generator dimension does not match the group")
    if group.order * len(gens) > budget:
        raise BudgetExceededError(
            "dense permutation storage exceeds the cell budget; "
            "use translate_point for implicit per-query evaluation"
        )
    reduced = gens.reduced(group.n)
    perms = {lab: group.left_action_perm(reduced[lab]) for lab in gens.labels}
    closure = subgroup_closure(group, [reduced[lab] for lab in gens.labels])
    return FiniteAction(
        group.order,
        gens.labels,
        gens.inverse_pairing,
        perms,
        provenance=f"translation(d={group.d},n={group.n})",
        transitive=(len(closure) == group.order),
        validate=False,
    )


def translate_point(
    group: FiniteGroup, gens: GeneratorSet, label: str, x: int
) -> int:
    """Implicit single-point translation for groups too large for dense perms."""
    mat = reduce_mod(gens.matrix(label), group.n)
    return group.index_of(mat_mul(mat, group.element(x)))


def trivial_action(
    labels: Sequence[str], inverse_label: Mapping[str, str], size: int = 1
) -> FiniteAction:
    perms = {lab: np.arange(size, dtype=np.int32) for lab in labels}
    return FiniteAction(
        size, labels, inverse_label, perms,
        provenance=f"toy(trivial{size})", transitive=(size == 1), validate=False,
    )


def product_action(a: FiniteAction, b: FiniteAction, budget: int = DENSE_CELL_BUDGET) -> FiniteAction:
    """Coordinatewise action on pairs, indexed row-major as x * |Y| + y."""
    if a.labels != b.labels or a.inverse_label != b.inverse_label:
        raise ValueError("actions must share their symbol set")
    size = a.size * b.size
    if size * len(a.labels) > budget:
        raise BudgetExceededError("product action exceeds the dense cell budget")
    perms = {}
    for lab in a.labels:
        pa = a.perm(lab).astype(np.int64) * b.size
        perms[lab] = (pa[:, None] + b.perm(lab)[None, :]).ravel().astype(np.int32)
    return FiniteAction(
        size, a.labels, a.inverse_label, perms,
        provenance=f"product({a.provenance},{b.provenance})", validate=False,
    )


@dataclass(frozen=True)
class OrbitPartition:
    """Orbit id per point; ids are contiguous and ordered by least member."""

    orbit_of: np.ndarray
    count: int
    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        self.orbit_of.setflags(write=False)
        if sum(self.sizes) != len(self.orbit_of):
            raise ValueError("orbit sizes must sum to the ground-set size")

    def same_blocks(self, other: "OrbitPartition") -> bool:
        if len(self.orbit_of) != len(other.orbit_of):
            return False
        return np.array_equal(
            _canonical_labels(self.orbit_of), _canonical_labels(other.orbit_of)
        )


def _canonical_labels(labels: np.ndarray) -> np.ndarray:
    out = np.empty_like(labels)
    mapping: dict[int, int] = {}
    for i, lab in enumerate(labels.tolist()):
        out[i] = mapping.setdefault(lab, len(mapping))
    return out


def partition_from_labels(labels: Sequence[int]) -> OrbitPartition:
    arr = _canonical_labels(np.asarray(labels, dtype=np.int32))
    sizes = np.bincount(arr)
    return OrbitPartition(arr, int(sizes.shape[0]), tuple(int(s) for s in sizes))


class _UnionFind:
    __slots__ = ("parent", "rank")

    def __init__(self, n: int) -> None:
        self.parent = list(range(n))
        self.rank = [0] * n

    def find(self, x: int) -> int:
        parent = self.parent
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(self, x: int, y: int) -> None:
        rx, ry = self.find(x), self.find(y)
        if rx == ry:
            return
        if self.rank[rx] < self.rank[ry]:
            rx, ry = ry, rx
        elif self.rank[rx] == self.rank[ry]:
            self.rank[rx] += 1
        self.parent[ry] = rx


def orbits(action: FiniteAction) -> OrbitPartition:
    """Connected components of the union of symbol permutations."""
    uf = _UnionFind(action.size)
    for lab in action.labels:
        perm = action.perm(lab)
        for x in range(action.size):
            uf.union(x, int(perm[x]))
    roots = np.fromiter(
        (uf.find(x) for x in range(action.size)), dtype=np.int32, count=action.size
    )
    return partition_from_labels(roots)


def oz_partition(
    group_n: FiniteGroup, group_m: FiniteGroup, gens: GeneratorSet
) -> OrbitPartition:
    """Orbit labeling of the coupled product by z = reduce(y)^{-1} x.

    Requires the larger quotient's translation action to be transitive; the
    resulting blocks coincide with the product action's orbits.
    """
    if group_m.n % group_n.n != 0:
        raise ValueError(f"{group_n.n} does not divide {group_m.n}")
    reduced_m = gens.reduced(group_m.n)
    closure = subgroup_closure(group_m, [reduced_m[lab] for lab in gens.labels])
    if len(closure) != group_m.order:
        raise ValueError(
            f"translation action mod {group_m.n} is not transitive "
            f"(generated subgroup has order {len(closure)})"
        )
    pn = group_m.reduction_indices(group_n)
    table = group_n.left_division_table
    labels = np.ascontiguousarray(table[pn].T).ravel()
    return partition_from_labels(labels)


_TOY_PATTERN = re.compile(r"^(identity|cycle|complete|twocycles)(\d+)$")


def toy_action(name: str) -> FiniteAction:
    """Small named fixtures: identity<k>, cycle<k>, complete<k>, twocycles<k>."""
    m = _TOY_PATTERN.match(name)
    if not m:
        raise ValueError(f"unknown toy action {name!r}")
    kind, k = m.group(1), int(m.group(2))
    if kind == "identity":
        if k < 1:
            raise ValueError("identity toy needs at least 1 point")
        return trivial_action(("a",), {"a": "a"}, size=k)
    if kind == "cycle":
        if k < 2:
            raise ValueError("cycle toy needs at least 2 points")
        fwd = (np.arange(k, dtype=np.int32) + 1) % k
        back = (np.arange(k, dtype=np.int32) - 1) % k
        return FiniteAction(
            k, ("a", "A"), {"a": "A", "A": "a"}, {"a": fwd, "A": back},
            provenance=f"toy(cycle{k})", transitive=True,
        )
    if kind == "complete":
        if k < 2:
            raise ValueError("complete toy needs at least 2 points")
        labels = tuple(f"s{i}" for i in range(1, k))
        inverse = {f"s{i}": f"s{k - i}" for i in range(1, k)}
        perms = {
            f"s{i}": (np.arange(k, dtype=np.int32) + i) % k for i in range(1, k)
        }
        return FiniteAction(
            k, labels, inverse, perms, provenance=f"toy(complete{k})", transitive=True
        )
    if kind == "twocycles":
        if k < 4 or k % 2:
            raise ValueError("twocycles toy needs an even size of at least 4")
        half = k // 2
        idx = np.arange(k, dtype=np.int32)
        fwd = np.where(idx < half, (idx + 1) % half, half + (idx - half + 1) % half)
        back = np.where(idx < half, (idx - 1) % half, half + (idx - half - 1) % half)
        return FiniteAction(
            k, ("a", "A"), {"a": "A", "A": "a"},
            {"a": fwd.astype(np.int32), "A": back.astype(np.int32)},
            provenance=f"toy(twocycles{k})", transitive=False,
        )
    raise ValueError(f"unknown toy action {name!r}")


def action_to_json(action: FiniteAction) -> dict:
    return {
        "size": action.size,
        "symbols": [
            {
                "label": lab,
                "inverse": action.inverse_label[lab],
                "perm": action.perm(lab).tolist(),
            }
            for lab in action.labels
        ],
    }


def action_from_json(source: dict | str | Path) -> FiniteAction:
    if not isinstance(source, dict):
        source = json.loads(Path(source).read_text())
    labels = [sym["label"] for sym in source["symbols"]]
    inverse = {sym["label"]: sym["inverse"] for sym in source["symbols"]}
    perms = {sym["label"]: sym["perm"] for sym in source["symbols"]}
    return FiniteAction(
        int(source["size"]), labels, inverse, perms, provenance="toy(json)"
    )
