"""Vertex-boundary expansion of finite actions.

The boundary of a set A is the subset of A whose image under some symbol
leaves A.  The Cheeger constant minimizes |boundary| / |A| over nonempty sets
of at most half the points: computed exactly by a bitmask scan on small ground
sets, bounded from above by randomized sweep cuts plus local moves otherwise,
and accompanied by a power-iteration spectral gap diagnostic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .action import FiniteAction, orbits, translation_action
from .group import (
    DEFAULT_ENUMERATION_BUDGET,
    BudgetExceededError,
    GeneratorSet,
    enumerate_group,
)

EXHAUSTIVE_CHEEGER_LIMIT = 26


def boundary(points: Iterable[int], action: FiniteAction) -> frozenset[int]:
    """Members of the set moved outside it by at least one symbol."""
    mask = np.zeros(action.size, dtype=bool)
    idx = np.fromiter((int(p) for p in points), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= action.size:
            raise ValueError("point outside the ground set")
        mask[idx] = True
    leaves = np.zeros(action.size, dtype=bool)
    for lab in action.labels:
        leaves |= ~mask[action.perm(lab)]
    return frozenset(int(i) for i in np.nonzero(mask & leaves)[0])


def _unique_perms(action: FiniteAction) -> list[np.ndarray]:
    seen = set()
    out = []
    for lab in action.labels:
        perm = action.perm(lab)
        key = perm.tobytes()
        if key not in seen:
            seen.add(key)
            out.append(perm)
    return out


def _cheeger_scan(action: FiniteAction, chunk: int = 1 << 20):
    """Scan all subsets as bitmasks; returns (num, den, witness_mask)."""
    size = action.size
    perms = _unique_perms(action)
    total = 1 << size
    half = size // 2
    best_num, best_den, best_mask = size + 1, 1, 0  # ratio > 1 sentinel
    best_ratio = float("inf")
    for lo in range(0, total, chunk):
        hi = min(lo + chunk, total)
        masks = np.arange(lo, hi, dtype=np.uint32)
        sizes = np.bitwise_count(masks)
        valid = (sizes >= 1) & (sizes <= half)
        if not valid.any():
            continue
        interior = np.full(masks.shape, (1 << size) - 1, dtype=np.uint32)
        for perm in perms:
            stays = np.zeros(masks.shape, dtype=np.uint32)
            for a in range(size):
                stays |= ((masks >> np.uint32(perm[a])) & np.uint32(1)) << np.uint32(a)
            interior &= stays
        bnd = np.bitwise_count(masks & ~interior)
        ratios = np.where(valid, bnd / np.maximum(sizes, 1), np.inf)
        pos = int(np.argmin(ratios))
        if ratios[pos] < best_ratio:
            best_ratio = float(ratios[pos])
            best_num = int(bnd[pos])
            best_den = int(sizes[pos])
            best_mask = int(masks[pos])
    return best_num, best_den, best_mask


def cheeger_exact(
    action: FiniteAction, limit: int = EXHAUSTIVE_CHEEGER_LIMIT
) -> Fraction:
    """Exact Cheeger constant by exhaustive subset scan (small ground sets)."""
    if action.size < 2:
        raise ValueError("need at least two points")
    if action.size > limit:
        raise BudgetExceededError(
            f"ground set of size {action.size} exceeds the exhaustive limit {limit}; "
            "use cheeger_search or the spectral diagnostic"
        )
    num, den, _ = _cheeger_scan(action)
    return Fraction(num, den)


def cheeger_witness(
    action: FiniteAction, limit: int = EXHAUSTIVE_CHEEGER_LIMIT
) -> tuple[Fraction, frozenset[int]]:
    if action.size < 2:
        raise ValueError("need at least two points")
    if action.size > limit:
        raise BudgetExceededError("ground set too large for the exhaustive scan")
    num, den, mask = _cheeger_scan(action)
    members = frozenset(i for i in range(action.size) if (mask >> i) & 1)
    return Fraction(num, den), members


@dataclass(frozen=True)
class CheegerBound:
    """A candidate set's exact ratio: always an upper bound on the constant."""

    ratio: Fraction
    witness: frozenset[int]
    evaluations: int


def _ratio_of(mask: np.ndarray, action: FiniteAction) -> Fraction:
    leaves = np.zeros(action.size, dtype=bool)
    for lab in action.labels:
        leaves |= ~mask[action.perm(lab)]
    return Fraction(int(np.count_nonzero(mask & leaves)), int(np.count_nonzero(mask)))


def cheeger_search(
    action: FiniteAction,
    budget: int = 50_000,
    seed: int | tuple = 0,
    sweeps: int = 4,
) -> CheegerBound:
    """Randomized upper bound: orbit candidates, diffusion sweep cuts, local moves.

    Deterministic for a fixed seed; the returned ratio is exact for the
    returned witness set.
    """
    size = action.size
    if size < 2:
        raise ValueError("need at least two points")
    half = size // 2
    rng = np.random.default_rng(seed)
    evaluations = 0
    best_ratio: Fraction | None = None
    best_mask: np.ndarray | None = None

    def consider(mask: np.ndarray) -> None:
        nonlocal best_ratio, best_mask, evaluations
        count = int(np.count_nonzero(mask))
        if count < 1 or count > half:
            return
        evaluations += 1
        ratio = _ratio_of(mask, action)
        if best_ratio is None or ratio < best_ratio:
            best_ratio = ratio
            best_mask = mask.copy()

    part = orbits(action)
    for orbit_id in range(part.count):
        if part.sizes[orbit_id] <= half:
            consider(part.orbit_of == orbit_id)
            if best_ratio == 0:
                return CheegerBound(best_ratio, frozenset(np.nonzero(best_mask)[0].tolist()), evaluations)

    steps = max(3, int(math.log2(size)) + 3)
    for _ in range(sweeps):
        if evaluations >= budget:
            break
        v = np.zeros(size)
        v[int(rng.integers(size))] = 1.0
        for _ in range(steps):
            acc = np.zeros(size)
            for lab in action.labels:
                acc += v[action.perm(lab)]
            v = acc / len(action.labels)
        order = np.argsort(-v, kind="stable")
        mask = np.zeros(size, dtype=bool)
        for rank in range(half):
            mask[order[rank]] = True
            consider(mask)
            if evaluations >= budget:
                break

    if best_mask is None:
        mask = np.zeros(size, dtype=bool)
        mask[: max(1, half)] = True
        consider(mask)

    # Local moves: single-point swaps in shuffled order, first improvement.
    improved = True
    while improved and evaluations < budget:
        improved = False
        for point in rng.permutation(size):
            if evaluations >= budget:
                break
            candidate = best_mask.copy()
            candidate[point] = not candidate[point]
            count = int(np.count_nonzero(candidate))
            if count < 1 or count > half:
                continue
            evaluations += 1
            ratio = _ratio_of(candidate, action)
            if ratio < best_ratio:
                best_ratio = ratio
                best_mask = candidate
                improved = True
    return CheegerBound(
        best_ratio, frozenset(int(i) for i in np.nonzero(best_mask)[0]), evaluations
    )


@dataclass(frozen=True)
class SpectralGap:
    """Extreme nontrivial eigenvalue of the averaged symbol operator.

    `value` is the second-largest-by-magnitude eigenvalue with its sign (the
    positive one when both signs attain the magnitude); `magnitude` is its
    absolute value, the mixing-relevant diagnostic stored in reports.
    """

    value: float
    magnitude: float
    converged: bool
    iterations: int
    residual: float
    method: str


def spectral_gap(
    action: FiniteAction,
    tol: float = 1e-10,
    max_iter: int = 200_000,
    seed: int | tuple = 0,
) -> SpectralGap:
    """Power iteration on the squared operator, deflated against constants.

    Squaring avoids oscillation when the positive and negative extremes tie in
    magnitude; the sign is recovered afterwards by projecting one application
    of the operator.  A disconnected action has eigenvalue 1 with multiplicity
    and returns 1.0 directly.  Non-convergence is reported (with the residual
    bounding the squared-eigenvalue error), never raised.
    """
    size = action.size
    if size < 2:
        raise ValueError("need at least two points")
    if orbits(action).count > 1:
        return SpectralGap(1.0, 1.0, True, 0, 0.0, "disconnected")
    perms = [action.perm(lab) for lab in action.labels]

    def matvec(v: np.ndarray) -> np.ndarray:
        acc = np.zeros_like(v)
        for perm in perms:
            acc += v[perm]
        acc /= len(perms)
        acc -= acc.mean()
        return acc

    rng = np.random.default_rng(seed)
    v = rng.standard_normal(size)
    v -= v.mean()
    v /= math.sqrt(float(v @ v))
    sq = 0.0
    residual = math.inf
    converged = False
    iterations = max_iter
    for iteration in range(1, max_iter + 1):
        w = matvec(matvec(v))
        sq = float(v @ w)
        residual = float(np.linalg.norm(w - sq * v))
        if residual <= tol:
            converged = True
            iterations = iteration
            break
        norm = math.sqrt(float(w @ w))
        if norm == 0.0:
            return SpectralGap(0.0, 0.0, True, iteration, 0.0, "power")
        v = w / norm
    magnitude = math.sqrt(max(sq, 0.0))
    if magnitude == 0.0:
        return SpectralGap(0.0, 0.0, converged, iterations, residual, "power")
    image = matvec(v)
    positive_part = float(np.linalg.norm(image + magnitude * v))
    threshold = max(1e-6, 10.0 * residual)
    value = magnitude if positive_part > threshold else -magnitude
    return SpectralGap(value, magnitude, converged, iterations, residual, "power")


@dataclass(frozen=True)
class ExpansionRow:
    """Per-modulus expansion report for one generator set."""

    n: int
    order: int
    generates: bool
    cheeger_kind: str  # "exact" | "upper"
    cheeger: Fraction
    lambda2: float
    spectral_converged: bool
    spectral_method: str

    def __post_init__(self) -> None:
        if self.cheeger_kind not in ("exact", "upper"):
            raise ValueError("cheeger kind must be exact or upper")
        if not (-1e-9 <= self.lambda2 <= 1.0 + 1e-9):
            raise ValueError("lambda2 outside [0, 1] beyond tolerance")


def bv_scan(
    gens: GeneratorSet,
    moduli: Sequence[int],
    d: int = 2,
    exact_limit: int = EXHAUSTIVE_CHEEGER_LIMIT,
    search_budget: int = 50_000,
    seed: int = 0,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    tol: float = 1e-10,
    max_iter: int = 200_000,
) -> list[ExpansionRow]:
    """Expansion survey across moduli; flags non-generating reductions."""
    rows = []
    for n in moduli:
        group = enumerate_group(d, n, enumeration_budget)
        act = translation_action(group, gens)
        if group.order <= exact_limit:
            kind, value = "exact", cheeger_exact(act, limit=exact_limit)
        else:
            kind, value = "upper", cheeger_search(
                act, budget=search_budget, seed=(seed, n)
            ).ratio
        gap = spectral_gap(act, tol=tol, max_iter=max_iter, seed=(seed, n))
        rows.append(
            ExpansionRow(
                n=n,
                order=group.order,
                generates=bool(act.transitive),
                cheeger_kind=kind,
                cheeger=value,
                lambda2=gap.magnitude,
                spectral_converged=gap.converged,
                spectral_method=gap.method,
            )
        )
    return rows
