"""Exact joint-occupancy statistics of finite actions.

For a partition f of the ground set into k classes and a symbol gamma, the
statistic W(gamma, i, j) is the fraction of points x with f(x) = i and
f(gamma . x) = j.  Everything here is exact: vectors are integer counts over a
common denominator, the metrics compare cross-multiplied integers, and the
block-map convolution reproduces product statistics without tolerance.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .action import FiniteAction, product_action


class Partition:
    """Map from a ground set into k classes, stored as a read-only label array."""

    __slots__ = ("labels", "k")

    def __init__(self, labels: Sequence[int], k: int | None = None) -> None:
        arr = np.asarray(labels, dtype=np.int16)
        if arr.ndim != 1 or arr.size == 0:
            raise ValueError("labels must be a nonempty 1-d sequence")
        lo = int(arr.min())
        hi = int(arr.max())
        if lo < 0:
            raise ValueError("labels must be nonnegative")
        k = hi + 1 if k is None else int(k)
        if k < 1 or hi >= k:
            raise ValueError(f"labels must lie in [0, {k})")
        arr.setflags(write=False)
        self.labels = arr
        self.k = k

    @property
    def size(self) -> int:
        return int(self.labels.shape[0])

    @classmethod
    def constant(cls, size: int, k: int, value: int = 0) -> "Partition":
        return cls(np.full(size, value, dtype=np.int16), k)

    @classmethod
    def random(cls, size: int, k: int, rng: np.random.Generator) -> "Partition":
        return cls(rng.integers(0, k, size=size, dtype=np.int16), k)

    def __eq__(self, other: object) -> bool:
        return (
            isinstance(other, Partition)
            and self.k == other.k
            and np.array_equal(self.labels, other.labels)
        )

    def __hash__(self) -> int:
        return hash((self.k, self.labels.tobytes()))


def dist_mu(f: Partition, g: Partition) -> Fraction:
    """Fraction of points on which the two partitions disagree."""
    if f.size != g.size:
        raise ValueError("partitions live on different ground sets")
    return Fraction(int(np.count_nonzero(f.labels != g.labels)), f.size)


Counts = tuple[tuple[tuple[int, ...], ...], ...]


@dataclass(frozen=True)
class WVector:
    """Exact statistic vector: integer counts over a common denominator.

    Shape is symbols x k x k.  Construction enforces the marginal laws: the
    per-symbol total is the denominator, and row/column sums (the class
    masses) agree across symbols and with each other.
    """

    labels: tuple[str, ...]
    k: int
    den: int
    counts: Counts

    def __post_init__(self) -> None:
        if self.den < 1 or self.k < 1 or not self.labels:
            raise ValueError("invalid shape")
        counts = tuple(
            tuple(tuple(int(c) for c in row) for row in block)
            for block in self.counts
        )
        object.__setattr__(self, "counts", counts)
        if len(counts) != len(self.labels):
            raise ValueError("one count block per symbol required")
        rows0 = cols0 = None
        for block in counts:
            if len(block) != self.k or any(len(row) != self.k for row in block):
                raise ValueError("count blocks must be k x k")
            if any(c < 0 or c > self.den for row in block for c in row):
                raise ValueError("counts must lie in [0, den]")
            total = sum(c for row in block for c in row)
            if total != self.den:
                raise ValueError(f"block total {total} != denominator {self.den}")
            rows = tuple(sum(row) for row in block)
            cols = tuple(sum(block[i][j] for i in range(self.k)) for j in range(self.k))
            if rows0 is None:
                rows0, cols0 = rows, cols
            elif rows != rows0 or cols != cols0:
                raise ValueError("class masses must not depend on the symbol")
        if rows0 != cols0:
            raise ValueError("row and column class masses must agree")

    def entry(self, symbol: str | int, i: int, j: int) -> Fraction:
        s = symbol if isinstance(symbol, int) else self.labels.index(symbol)
        return Fraction(self.counts[s][i][j], self.den)

    def class_masses(self) -> tuple[Fraction, ...]:
        return tuple(
            Fraction(sum(self.counts[0][i][j] for j in range(self.k)), self.den)
            for i in range(self.k)
        )

    def cube_key(self) -> tuple[Fraction, ...]:
        """Canonical value tuple, denominator-independent (for deduplication)."""
        return tuple(
            Fraction(c, self.den)
            for block in self.counts
            for row in block
            for c in row
        )


def w_vector(
    action: FiniteAction, f: Partition, labels: Sequence[str] | None = None
) -> WVector:
    """Exact joint-occupancy counts of f against each requested symbol."""
    if f.size != action.size:
        raise ValueError("partition size does not match the action")
    use = tuple(labels) if labels is not None else action.labels
    k = f.k
    base = f.labels.astype(np.int64) * k
    blocks = []
    for lab in use:
        joint = np.bincount(base + f.labels[action.perm(lab)], minlength=k * k)
        blocks.append(tuple(tuple(int(c) for c in row) for row in joint.reshape(k, k)))
    return WVector(use, k, action.size, tuple(blocks))


def dist_inf(u: WVector, v: WVector) -> Fraction:
    """Exact sup-metric over the shared symbols x k x k grid."""
    if u.labels != v.labels or u.k != v.k:
        raise ValueError("vectors have different shapes")
    worst = 0
    for bu, bv in zip(u.counts, v.counts):
        for ru, rv in zip(bu, bv):
            for cu, cv in zip(ru, rv):
                diff = abs(cu * v.den - cv * u.den)
                if diff > worst:
                    worst = diff
    return Fraction(worst, u.den * v.den)


def wvec_equal(u: WVector, v: WVector) -> bool:
    return dist_inf(u, v) == 0


def _vectors_of(sample: "WSetSample | Sequence[WVector]") -> tuple[WVector, ...]:
    if isinstance(sample, WSetSample):
        return sample.vectors
    return tuple(sample)


def hausdorff(a: "WSetSample | Sequence[WVector]", b: "WSetSample | Sequence[WVector]") -> Fraction:
    """Max of the two directed sup-inf distances; exact."""
    va, vb = _vectors_of(a), _vectors_of(b)
    if not va or not vb:
        raise ValueError("samples must be nonempty")

    def directed(xs: tuple[WVector, ...], ys: tuple[WVector, ...]) -> Fraction:
        return max(min(dist_inf(x, y) for y in ys) for x in xs)

    return max(directed(va, vb), directed(vb, va))


PhiTable = tuple[tuple[int, ...], ...]


def normalize_phi(phi: Sequence[Sequence[int]], k: int) -> PhiTable:
    table = tuple(tuple(int(v) for v in row) for row in phi)
    n = len(table)
    if n < 1 or any(len(row) != n for row in table):
        raise ValueError("phi must be a square table")
    if any(not (0 <= v < k) for row in table for v in row):
        raise ValueError(f"phi values must lie in [0, {k})")
    return table


def phi_preimages(phi: PhiTable, k: int) -> list[list[tuple[int, int]]]:
    pre: list[list[tuple[int, int]]] = [[] for _ in range(k)]
    for a, row in enumerate(phi):
        for b, v in enumerate(row):
            pre[v].append((a, b))
    return pre


def phi_convolution(u: WVector, v: WVector, phi: Sequence[Sequence[int]], k: int) -> WVector:
    """Bilinear contraction of two statistic vectors along a block map.

    Entry (gamma, i, j) sums u(gamma, a, c) * v(gamma, b, d) over preimage
    pairs (a, b) of i and (c, d) of j.  Exact; the result denominator is the
    product of the input denominators.
    """
    if u.labels != v.labels:
        raise ValueError("vectors have different symbol lists")
    table = normalize_phi(phi, k)
    n = len(table)
    if u.k != n or v.k != n:
        raise ValueError("phi side length must match the vectors' class count")
    pre = phi_preimages(table, k)
    blocks = []
    for bu, bv in zip(u.counts, v.counts):
        block = [[0] * k for _ in range(k)]
        for i in range(k):
            for j in range(k):
                acc = 0
                for a, b in pre[i]:
                    for c, d in pre[j]:
                        acc += bu[a][c] * bv[b][d]
                block[i][j] = acc
        blocks.append(tuple(tuple(row) for row in block))
    return WVector(u.labels, k, u.den * v.den, tuple(blocks))


def step_partition(g: Partition, h: Partition, phi: Sequence[Sequence[int]], k: int) -> Partition:
    """Assemble the product-space partition (x, y) -> phi(g(x), h(y))."""
    table = normalize_phi(phi, k)
    if len(table) != g.k or len(table) != h.k:
        raise ValueError("phi side length must match both factor partitions")
    arr = np.asarray(table, dtype=np.int16)
    labels = arr[g.labels[:, None], h.labels[None, :]].ravel()
    return Partition(labels, k)


@dataclass(frozen=True)
class WSetSample:
    """Finite stand-in for the closed statistic set of an action.

    The exhaustive flag is set only when every one of the k^size partitions
    was enumerated; sampled runs never claim set equality.
    """

    vectors: tuple[WVector, ...]
    strategy: str
    exhaustive: bool
    pool_size: int

    def __post_init__(self) -> None:
        if self.strategy not in ("exhaustive", "random", "local-search"):
            raise ValueError(f"unknown strategy tag {self.strategy!r}")
        if self.exhaustive and self.strategy != "exhaustive":
            raise ValueError("exhaustive flag requires the exhaustive strategy")


def _structured_partitions(size: int, k: int) -> list[Partition]:
    out = [Partition.constant(size, k, value=c) for c in range(k)]
    if size > 1 and k > 1:
        half = np.zeros(size, dtype=np.int16)
        half[size // 2 :] = 1
        out.append(Partition(half, k))
        out.append(Partition(np.arange(size, dtype=np.int16) % k, k))
    return out


def sample_wset(
    action: FiniteAction,
    k: int,
    labels: Sequence[str] | None = None,
    strategy: str = "auto",
    budget: int = 2048,
    max_size: int = 64,
    seed: int = 0,
) -> WSetSample:
    """Collect distinct statistic vectors of k-class partitions.

    Exhausts all k^size partitions when that count fits the budget; otherwise
    evaluates the structured seeds plus random partitions and keeps a
    spread-maximizing subset (farthest-point insertion under the sup metric).
    Deterministic for a fixed seed.
    """
    if k < 1:
        raise ValueError("k must be positive")
    total = k**action.size
    want_exhaustive = strategy == "exhaustive" or (strategy == "auto" and total <= budget)
    if strategy not in ("auto", "exhaustive", "random"):
        raise ValueError(f"unknown strategy {strategy!r}")
    if strategy == "exhaustive" and total > budget:
        raise ValueError(f"exhaustive sampling needs budget >= {total}")

    seen: dict[tuple, WVector] = {}
    if want_exhaustive:
        for assign in itertools.product(range(k), repeat=action.size):
            vec = w_vector(action, Partition(np.array(assign, dtype=np.int16), k), labels)
            seen.setdefault(vec.cube_key(), vec)
        return WSetSample(tuple(seen.values()), "exhaustive", True, total)

    rng = np.random.default_rng(seed)
    pool: list[WVector] = []
    for part in _structured_partitions(action.size, k):
        vec = w_vector(action, part, labels)
        if vec.cube_key() not in seen:
            seen[vec.cube_key()] = vec
            pool.append(vec)
    n_structured = len(pool)
    draws = max(0, budget - n_structured)
    for _ in range(draws):
        vec = w_vector(action, Partition.random(action.size, k, rng), labels)
        if vec.cube_key() not in seen:
            seen[vec.cube_key()] = vec
            pool.append(vec)

    if len(pool) <= max_size:
        return WSetSample(tuple(pool), "random", False, budget)

    # Farthest-point insertion, keeping every structured seed.
    selected = pool[:n_structured] if n_structured else pool[:1]
    remaining = pool[len(selected) :]
    min_dist = [min(dist_inf(v, s) for s in selected) for v in remaining]
    while len(selected) < max_size and remaining:
        best = max(range(len(remaining)), key=lambda i: (min_dist[i], -i))
        chosen = remaining.pop(best)
        min_dist.pop(best)
        selected.append(chosen)
        for i, v in enumerate(remaining):
            d = dist_inf(v, chosen)
            if d < min_dist[i]:
                min_dist[i] = d
    return WSetSample(tuple(selected), "local-search", False, budget)


def _growth_strings(size: int, max_classes: int):
    """Class assignments up to relabeling: restricted growth strings."""
    labels = [0] * size

    def rec(i: int, used: int):
        if i == size:
            yield tuple(labels)
            return
        top = min(used + 1, max_classes)
        for c in range(top):
            labels[i] = c
            yield from rec(i + 1, max(used, c + 1))

    yield from rec(0, 0)


@dataclass(frozen=True)
class NetIndexEstimate:
    """Smallest step complexity whose statistic vectors cover the target set.

    `certified` only when both the target set and the candidate step vectors
    were exhaustively enumerated; otherwise the value is a budgeted estimate
    and `witness` carries an uncovered target when coverage failed outright.
    """

    n_steps: int | None
    certified: bool
    eps: Fraction
    target_exhaustive: bool
    witness: WVector | None
    detail: tuple[tuple[int, int, bool], ...]  # (N, candidate count, exhaustive)


def net_index_estimate(
    a: FiniteAction,
    b: FiniteAction,
    k: int,
    eps: Fraction | int | str,
    labels: Sequence[str] | None = None,
    budget: int = 100_000,
    target_budget: int = 4096,
    max_steps: int | None = None,
    seed: int = 0,
    extra_targets: Sequence[WVector] = (),
) -> NetIndexEstimate:
    """Estimate the cover index of a product action by step-function vectors.

    Coverage uses the strict inequality dist < eps.  Candidate step functions
    of complexity N are enumerated exhaustively when N^(|X|+|Y|) * k^(N^2)
    fits the budget, else sampled at random (budget draws per complexity).
    """
    eps = Fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    prod = product_action(a, b)
    target = sample_wset(prod, k, labels=labels, budget=target_budget, seed=seed)
    # Caller-supplied known members are checked first, so an uncovered one is
    # reported as the witness ahead of sampled targets.
    targets = list(extra_targets)
    for vec in target.vectors:
        if all(dist_inf(vec, t) != 0 for t in targets):
            targets.append(vec)
    cap = max_steps if max_steps is not None else max(a.size, b.size)
    rng = np.random.default_rng(seed)
    detail = []
    witness = None
    for n_steps in range(1, cap + 1):
        raw = (n_steps ** (a.size + b.size)) * (k ** (n_steps * n_steps))
        exhaustive = raw <= budget
        cands: dict[tuple, WVector] = {}
        if exhaustive:
            gs = [
                w_vector(a, Partition(np.array(s, dtype=np.int16), n_steps), labels)
                for s in _growth_strings(a.size, n_steps)
            ]
            hs = [
                w_vector(b, Partition(np.array(s, dtype=np.int16), n_steps), labels)
                for s in _growth_strings(b.size, n_steps)
            ]
            tables = [
                tuple(
                    tuple(flat[r * n_steps + c] for c in range(n_steps))
                    for r in range(n_steps)
                )
                for flat in itertools.product(range(k), repeat=n_steps * n_steps)
            ]
            for wg in gs:
                for wh in hs:
                    for table in tables:
                        vec = phi_convolution(wg, wh, table, k)
                        cands.setdefault(vec.cube_key(), vec)
        else:
            for _ in range(budget):
                g = Partition.random(a.size, n_steps, rng)
                h = Partition.random(b.size, n_steps, rng)
                table = rng.integers(0, k, size=(n_steps, n_steps))
                wg = w_vector(a, g, labels)
                wh = w_vector(b, h, labels)
                vec = phi_convolution(wg, wh, table.tolist(), k)
                cands.setdefault(vec.cube_key(), vec)
        cand_list = list(cands.values())
        detail.append((n_steps, len(cand_list), exhaustive))
        witness = None
        for t in targets:
            if all(dist_inf(t, c) >= eps for c in cand_list):
                witness = t
                break
        if witness is None:
            return NetIndexEstimate(
                n_steps,
                target.exhaustive and exhaustive,
                eps,
                target.exhaustive,
                None,
                tuple(detail),
            )
    return NetIndexEstimate(
        None, False, eps, target.exhaustive, witness, tuple(detail)
    )
