"""Coupled-quotient experiment: invariant partitions against step functions.

A pair of nested quotients (n dividing m) carries the coupled orbit labeling
z(x, y) = reduce(y)^{-1} x.  Subsets Z of the small quotient induce invariant
two-class partitions f_Z of the product; a half-size Z realizes the target
statistic u (all diagonal entries 1/2) exactly.  The search machinery asks how
closely statistics of bounded-complexity step functions phi(g(x), h(y)) can
approach u, with exact integer bookkeeping throughout.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .action import FiniteAction, product_action, translation_action
from .expansion import (
    EXHAUSTIVE_CHEEGER_LIMIT,
    cheeger_exact,
    cheeger_search,
    spectral_gap,
)
from .group import (
    DEFAULT_ENUMERATION_BUDGET,
    FiniteGroup,
    GeneratorSet,
    enumerate_group,
    is_prime,
    sanov_generators,
    smallest_prime_factor,
)
from .wstat import (
    Partition,
    WVector,
    _growth_strings,
    dist_inf,
    step_partition,
    w_vector,
)


def _as_fraction(value) -> Fraction:
    # Floats are read as their decimal literal so 0.1 means 1/10, not the
    # nearest binary double.
    if isinstance(value, float):
        return Fraction(str(value))
    return Fraction(value)


def target_u(labels: Sequence[str]) -> WVector:
    """Two-class target statistic: every diagonal entry 1/2, off-diagonal 0."""
    block = ((1, 0), (0, 1))
    return WVector(tuple(labels), 2, 2, tuple(block for _ in labels))


def delta(labels: Sequence[str], eps) -> Fraction:
    """Distance threshold eps / (32 |S|), exact."""
    eps = _as_fraction(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    return eps / (32 * len(labels))


class ProductPair:
    """Translation actions on nested quotients with the coupled orbit labeling."""

    def __init__(
        self,
        group_n: FiniteGroup,
        group_m: FiniteGroup,
        gens: GeneratorSet,
        require_transitive: bool = True,
    ) -> None:
        if group_m.n % group_n.n != 0:
            raise ValueError(f"{group_n.n} does not divide {group_m.n}")
        if group_n.d != group_m.d:
            raise ValueError("dimension mismatch")
        self.group_n = group_n
        self.group_m = group_m
        self.gens = gens
        self.action_n = translation_action(group_n, gens)
        self.action_m = translation_action(group_m, gens)
        if require_transitive and not self.action_m.transitive:
            raise ValueError(
                f"translation action mod {group_m.n} is not transitive; "
                "the coupled orbit labeling needs a generating image"
            )
        self._product: FiniteAction | None = None
        self._oz_flat: np.ndarray | None = None

    @classmethod
    def build(
        cls,
        n: int,
        m: int,
        d: int = 2,
        gens: GeneratorSet | None = None,
        budget: int = DEFAULT_ENUMERATION_BUDGET,
    ) -> "ProductPair":
        gens = gens or sanov_generators()
        group_n = enumerate_group(d, n, budget)
        group_m = group_n if m == n else enumerate_group(d, m, budget)
        return cls(group_n, group_m, gens)

    @property
    def order_n(self) -> int:
        return self.group_n.order

    @property
    def order_m(self) -> int:
        return self.group_m.order

    @property
    def total(self) -> int:
        return self.order_n * self.order_m

    @property
    def labels(self) -> tuple[str, ...]:
        return self.action_n.labels

    def product(self) -> FiniteAction:
        if self._product is None:
            self._product = product_action(self.action_n, self.action_m)
        return self._product

    def oz_flat(self) -> np.ndarray:
        """z index per product point (row-major x * |G_m| + y)."""
        if self._oz_flat is None:
            pn = self.group_m.reduction_indices(self.group_n)
            table = self.group_n.left_division_table
            self._oz_flat = np.ascontiguousarray(table[pn].T).ravel()
        return self._oz_flat


def fz_partition(pair: ProductPair, z_members: Sequence[int]) -> Partition:
    """Invariant two-class partition: label 1 where z(x, y) lands in Z."""
    mask = np.zeros(pair.order_n, dtype=bool)
    idx = np.asarray(list(z_members), dtype=np.int64)
    if idx.size:
        if idx.min() < 0 or idx.max() >= pair.order_n:
            raise ValueError("Z members outside the small quotient")
        mask[idx] = True
    return Partition(mask[pair.oz_flat()].astype(np.int16), 2)


@dataclass(frozen=True)
class UMembership:
    z_indices: tuple[int, ...]
    exact: bool


def u_membership_witness(pair: ProductPair) -> UMembership:
    """Half-size Z (first half in canonical order) realizing u, verified exactly."""
    if pair.order_n % 2:
        raise RuntimeError(
            "odd quotient order: this cannot happen for these groups and "
            "indicates a broken enumeration"
        )
    z = tuple(range(pair.order_n // 2))
    vec = w_vector(pair.product(), fz_partition(pair, z))
    exact = dist_inf(vec, target_u(pair.labels)) == 0
    return UMembership(z, exact)


@dataclass(frozen=True)
class InvarianceDefect:
    total: Fraction
    per_symbol: tuple[tuple[str, Fraction], ...]


def invariance_defect(pair: ProductPair, f: Partition) -> InvarianceDefect:
    """Fraction of product points moved across classes by some symbol.

    The per-symbol defect equals the sum of that symbol's two off-diagonal
    statistic entries; the total uses the union over symbols.
    """
    prod = pair.product()
    if f.size != prod.size:
        raise ValueError("partition does not live on the product")
    moved_any = np.zeros(prod.size, dtype=bool)
    per = []
    for lab in prod.labels:
        diff = f.labels != f.labels[prod.perm(lab)]
        per.append((lab, Fraction(int(np.count_nonzero(diff)), prod.size)))
        moved_any |= diff
    return InvarianceDefect(
        Fraction(int(np.count_nonzero(moved_any)), prod.size), tuple(per)
    )


@dataclass(frozen=True)
class NearestInvariant:
    z_indices: tuple[int, ...]
    dist: Fraction


def nearest_fz(pair: ProductPair, f: Partition) -> NearestInvariant:
    """Closest invariant partition by per-orbit majority vote.

    A point z joins Z only on a strict majority of ones over its orbit; exact
    half-half orbits vote zero.  Per-orbit the majority choice is optimal, so
    the returned distance is the minimum over all Z.
    """
    if f.k > 2:
        raise ValueError("nearest invariant search expects a two-class partition")
    oz = pair.oz_flat()
    if f.size != oz.shape[0]:
        raise ValueError("partition does not live on the product")
    ones = np.bincount(oz[f.labels == 1], minlength=pair.order_n)
    in_z = ones * 2 > pair.order_m
    mismatched = int(np.where(in_z, pair.order_m - ones, ones).sum())
    return NearestInvariant(
        tuple(int(i) for i in np.nonzero(in_z)[0]),
        Fraction(mismatched, pair.total),
    )


@dataclass(frozen=True)
class InvariantGapCheck:
    defect: Fraction
    nearest_dist: Fraction
    expansion_floor: Fraction
    bound: Fraction
    satisfied: bool


def claim1_gap_check(
    pair: ProductPair, f: Partition, expansion_floor: Fraction
) -> InvariantGapCheck:
    """Distance to the nearest invariant partition against defect / floor.

    The floor must be a true lower bound on the large quotient's expansion
    (e.g. its exact Cheeger constant); the comparison is exact.
    """
    if expansion_floor <= 0:
        raise ValueError("expansion floor must be positive")
    defect = invariance_defect(pair, f).total
    nearest = nearest_fz(pair, f).dist
    bound = defect / expansion_floor
    return InvariantGapCheck(defect, nearest, expansion_floor, bound, nearest <= bound)


@dataclass(frozen=True)
class StepApproxBound:
    """Value and applicability of the quarter-minus-spread distance bound."""

    p: int
    n_steps: int
    bound: float
    status: str  # "active" (> 1/8, exact integer test) | "vacuous"


def claim3_bound(n: int, n_steps: int) -> StepApproxBound:
    """Bound 1/4 - N * sqrt(8 / (p - 1)) with p the smallest prime divisor.

    The float value is reported; the active/vacuous status is decided exactly:
    the bound exceeds 1/8 iff 512 N^2 < p - 1.
    """
    if n_steps < 1:
        raise ValueError("step count must be at least 1")
    p = smallest_prime_factor(n)
    value = 0.25 - n_steps * math.sqrt(8.0 / (p - 1))
    status = "active" if 512 * n_steps * n_steps < p - 1 else "vacuous"
    return StepApproxBound(p, n_steps, value, status)


@dataclass(frozen=True)
class ExperimentConfig:
    """Search configuration for one coupled-quotient instance."""

    n: int
    m: int
    step_classes: int
    d: int = 2
    k: int = 2
    gens: GeneratorSet | None = None
    eps_assumed: Fraction | None = None
    seed: int = 0
    restarts: int = 32
    moves_per_restart: int = 100_000
    plateau_moves: int = 40
    exhaustive_budget: int = 200_000
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET

    def __post_init__(self) -> None:
        if self.m % self.n != 0:
            raise ValueError(f"{self.n} does not divide {self.m}")
        if self.step_classes < 1:
            raise ValueError("step complexity must be at least 1")
        if self.k != 2:
            raise ValueError("the target statistic is two-class; k must be 2")
        if self.eps_assumed is not None and self.eps_assumed <= 0:
            raise ValueError("assumed expansion constant must be positive")


@dataclass(frozen=True)
class ProductStepFunction:
    """Step function on a product: class maps on both factors and a pair table.

    The assembled partition sends (x, y) to phi[g(x)][h(y)].
    """

    g: Partition
    h: Partition
    phi: tuple[tuple[int, ...], ...]
    k: int = 2

    def __post_init__(self) -> None:
        n_classes = len(self.phi)
        if self.g.k != n_classes or self.h.k != n_classes:
            raise ValueError("factor class counts must match the table side")
        if any(len(row) != n_classes for row in self.phi):
            raise ValueError("pair table must be square")
        if any(not (0 <= v < self.k) for row in self.phi for v in row):
            raise ValueError(f"table values must lie in [0, {self.k})")

    @property
    def n_steps(self) -> int:
        return len(self.phi)

    def assemble(self) -> Partition:
        return step_partition(self.g, self.h, self.phi, self.k)


@dataclass(frozen=True)
class RestartTrace:
    restart: int
    start_dist: Fraction
    final_dist: Fraction
    accepted_moves: int
    plateau_moves: int


@dataclass(frozen=True)
class StepSearchResult:
    best_g: tuple[int, ...]
    best_h: tuple[int, ...]
    best_phi: tuple[tuple[int, ...], ...]
    best_dist: Fraction
    mode: str  # "exhaustive" | "local-search"
    evaluations: int
    trace: tuple[RestartTrace, ...]

    def best_step_function(self) -> ProductStepFunction:
        n_steps = len(self.best_phi)
        return ProductStepFunction(
            Partition(np.asarray(self.best_g, dtype=np.int16), n_steps),
            Partition(np.asarray(self.best_h, dtype=np.int16), n_steps),
            self.best_phi,
        )


def _pair_counts(action: FiniteAction, labels_arr: np.ndarray, n_classes: int) -> np.ndarray:
    """counts[s, a, c] = #{x : label(x) = a, label(s . x) = c}; int64."""
    out = np.empty((len(action.labels), n_classes, n_classes), dtype=np.int64)
    base = labels_arr.astype(np.int64) * n_classes
    for s, lab in enumerate(action.labels):
        joint = np.bincount(
            base + labels_arr[action.perm(lab)], minlength=n_classes * n_classes
        )
        out[s] = joint.reshape(n_classes, n_classes)
    return out


def _all_tables_onehot(n_classes: int, k: int) -> tuple[np.ndarray, list[tuple[int, ...]]]:
    flats = list(itertools.product(range(k), repeat=n_classes * n_classes))
    onehot = np.zeros((len(flats), k, n_classes, n_classes), dtype=np.int64)
    for t, flat in enumerate(flats):
        for pos, value in enumerate(flat):
            onehot[t, value, pos // n_classes, pos % n_classes] = 1
    return onehot, flats


def _scaled_dist(w_counts: np.ndarray, total: int) -> np.ndarray:
    """Distance to the half-diagonal target, scaled by 2 * total (int64)."""
    diag0 = np.abs(2 * w_counts[..., 0, 0] - total)
    diag1 = np.abs(2 * w_counts[..., 1, 1] - total)
    off = 2 * np.maximum(w_counts[..., 0, 1], w_counts[..., 1, 0])
    per_symbol = np.maximum(np.maximum(diag0, diag1), off)
    return per_symbol.max(axis=-1)


def _table_tuple(flat: tuple[int, ...], n_classes: int) -> tuple[tuple[int, ...], ...]:
    return tuple(
        tuple(flat[r * n_classes + c] for c in range(n_classes))
        for r in range(n_classes)
    )


def _move_context(action: FiniteAction, labels_arr: np.ndarray):
    """Per symbol and point: image label, preimage label, self-loop mask."""
    n_sym = len(action.labels)
    size = labels_arr.shape[0]
    out_lab = np.empty((n_sym, size), dtype=np.int64)
    in_lab = np.empty((n_sym, size), dtype=np.int64)
    loop = np.empty((n_sym, size), dtype=bool)
    points = np.arange(size)
    for s, lab in enumerate(action.labels):
        fwd = action.perm(lab)
        out_lab[s] = labels_arr[fwd]
        in_lab[s] = labels_arr[action.inverse_perm(lab)]
        loop[s] = fwd == points
    return out_lab, in_lab, loop


def _flip_dists(
    labels_arr: np.ndarray,
    coeff: np.ndarray,
    w_base: np.ndarray,
    context,
    n_classes: int,
    total: int,
) -> np.ndarray:
    """Objective after each single-point relabel, via linearity of the
    convolution in one factor's counts.

    `coeff[s, a, c]` is the k x k contribution of one unit of count (a, c)
    under symbol s; relabeling a point touches at most two count cells per
    symbol (one when the symbol fixes the point).
    """
    out_lab, in_lab, loop = context
    n_sym, size = out_lab.shape
    s_idx = np.arange(n_sym)[:, None]
    cur = labels_arr.astype(np.int64)[None, :]
    old_out = coeff[s_idx, cur, out_lab]
    old_in = coeff[s_idx, in_lab, cur]
    old_loop = coeff[s_idx, cur, cur]
    mask = loop[:, :, None, None]
    dists = np.full((size, n_classes), np.iinfo(np.int64).max, dtype=np.int64)
    if n_classes == 2:
        # Binary labels: the only real move per point is the flip.
        new = 1 - cur
        plain = coeff[s_idx, new, out_lab] - old_out + coeff[s_idx, in_lab, new] - old_in
        fixed = coeff[s_idx, new, new] - old_loop
        w_cand = w_base[:, None] + np.where(mask, fixed, plain)
        flip = _scaled_dist(np.moveaxis(w_cand, 0, 1), total)
        pts = np.arange(size)
        dists[pts, 1 - labels_arr.astype(np.int64)] = flip
        return dists
    for new in range(n_classes):
        plain = coeff[s_idx, new, out_lab] - old_out + coeff[s_idx, in_lab, new] - old_in
        fixed = coeff[s_idx, new, new] - old_loop
        w_cand = w_base[:, None] + np.where(mask, fixed, plain)
        dists[:, new] = _scaled_dist(np.moveaxis(w_cand, 0, 1), total)
    return dists


def _exhaustive_step_search(
    action_x: FiniteAction, action_y: FiniteAction, n_steps: int, k: int
) -> StepSearchResult:
    total = action_x.size * action_y.size
    onehot, flats = _all_tables_onehot(n_steps, k)
    best = None
    evaluations = 0
    for gl in _growth_strings(action_x.size, n_steps):
        g_arr = np.asarray(gl, dtype=np.int16)
        cg = _pair_counts(action_x, g_arr, n_steps)
        for hl in _growth_strings(action_y.size, n_steps):
            h_arr = np.asarray(hl, dtype=np.int16)
            ch = _pair_counts(action_y, h_arr, n_steps)
            w_all = np.einsum(
                "tiab,tjcd,sac,sbd->tsij", onehot, onehot, cg, ch, optimize=True
            )
            dists = _scaled_dist(w_all, total)
            evaluations += len(flats)
            t = int(np.argmin(dists))
            if best is None or int(dists[t]) < best[0]:
                best = (int(dists[t]), gl, hl, flats[t])
    scaled, gl, hl, flat = best
    return StepSearchResult(
        best_g=gl,
        best_h=hl,
        best_phi=_table_tuple(flat, n_steps),
        best_dist=Fraction(scaled, 2 * total),
        mode="exhaustive",
        evaluations=evaluations,
        trace=(),
    )


def _local_step_search(
    action_x: FiniteAction,
    action_y: FiniteAction,
    n_steps: int,
    k: int,
    seed,
    restarts: int,
    moves_per_restart: int,
    plateau_moves: int,
) -> StepSearchResult:
    total = action_x.size * action_y.size
    onehot, flats = _all_tables_onehot(n_steps, k)
    n_tables = len(flats)
    sentinel = np.iinfo(np.int64).max
    evaluations = 0
    best_state = None
    traces = []

    seed_key = seed if isinstance(seed, tuple) else (seed,)
    for restart in range(restarts):
        rng = np.random.default_rng((*seed_key, restart))
        gl = rng.integers(0, n_steps, size=action_x.size).astype(np.int16)
        hl = rng.integers(0, n_steps, size=action_y.size).astype(np.int16)
        cg = _pair_counts(action_x, gl, n_steps)
        ch = _pair_counts(action_y, hl, n_steps)

        table_dists = _scaled_dist(
            np.einsum("tiab,tjcd,sac,sbd->tsij", onehot, onehot, cg, ch, optimize=True),
            total,
        )
        evaluations += n_tables
        t_idx = int(np.argmin(table_dists))
        current = int(table_dists[t_idx])
        start_dist = Fraction(current, 2 * total)

        context_g = _move_context(action_x, gl)
        context_h = _move_context(action_y, hl)
        accepted = 0
        plateau_used = 0
        while accepted < moves_per_restart:
            phi = onehot[t_idx]
            coeff_g = np.einsum("iab,jcd,sbd->sacij", phi, phi, ch)
            w_base = np.einsum("sac,sacij->sij", cg, coeff_g)
            dist_g = _flip_dists(gl, coeff_g, w_base, context_g, n_steps, total)
            dist_g[np.arange(action_x.size), gl] = sentinel  # no-op moves
            coeff_h = np.einsum("iab,jcd,sac->sbdij", phi, phi, cg)
            dist_h = _flip_dists(hl, coeff_h, w_base, context_h, n_steps, total)
            dist_h[np.arange(action_y.size), hl] = sentinel
            table_dists = _scaled_dist(
                np.einsum("tiab,tjcd,sac,sbd->tsij", onehot, onehot, cg, ch),
                total,
            )
            table_dists[t_idx] = sentinel
            evaluations += dist_g.size + dist_h.size + n_tables

            g_pos = int(np.argmin(dist_g))
            h_pos = int(np.argmin(dist_h))
            t_pos = int(np.argmin(table_dists))
            moves = [
                (int(dist_g.flat[g_pos]), 0, g_pos),
                (int(dist_h.flat[h_pos]), 1, h_pos),
                (int(table_dists[t_pos]), 2, t_pos),
            ]
            best_dist, best_class, best_pos = min(moves)

            if best_dist > current or (
                best_dist == current and plateau_used >= plateau_moves
            ):
                break
            if best_dist == current:
                # Plateau escape: seeded-uniform choice among zero-gain moves.
                options = []
                for z, lab in zip(*np.nonzero(dist_g == current)):
                    options.append((0, int(z) * n_steps + int(lab)))
                for z, lab in zip(*np.nonzero(dist_h == current)):
                    options.append((1, int(z) * n_steps + int(lab)))
                for t in np.nonzero(table_dists == current)[0]:
                    options.append((2, int(t)))
                best_class, best_pos = options[int(rng.integers(len(options)))]
                plateau_used += 1

            if best_class == 0:
                z, lab = divmod(best_pos, n_steps)
                gl = gl.copy()
                gl[z] = lab
                cg = _pair_counts(action_x, gl, n_steps)
                context_g = _move_context(action_x, gl)
            elif best_class == 1:
                z, lab = divmod(best_pos, n_steps)
                hl = hl.copy()
                hl[z] = lab
                ch = _pair_counts(action_y, hl, n_steps)
                context_h = _move_context(action_y, hl)
            else:
                t_idx = best_pos
            accepted += 1
            current = min(best_dist, current)

        traces.append(
            RestartTrace(
                restart=restart,
                start_dist=start_dist,
                final_dist=Fraction(current, 2 * total),
                accepted_moves=accepted,
                plateau_moves=plateau_used,
            )
        )
        if best_state is None or current < best_state[0]:
            best_state = (current, gl.copy(), hl.copy(), t_idx)

    scaled, gl, hl, t_idx = best_state
    return StepSearchResult(
        best_g=tuple(int(v) for v in gl),
        best_h=tuple(int(v) for v in hl),
        best_phi=_table_tuple(flats[t_idx], n_steps),
        best_dist=Fraction(scaled, 2 * total),
        mode="local-search",
        evaluations=evaluations,
        trace=tuple(traces),
    )


def step_search_actions(
    action_x: FiniteAction,
    action_y: FiniteAction,
    n_steps: int,
    k: int = 2,
    seed=0,
    restarts: int = 32,
    moves_per_restart: int = 100_000,
    plateau_moves: int = 40,
    exhaustive_budget: int = 200_000,
) -> StepSearchResult:
    """Minimize the sup distance to the target u over complexity-N step functions.

    Exhausts all (g, h, phi) up to class relabeling when the raw count
    N^(|X|+|Y|) k^(N^2) fits the budget, else runs multi-restart steepest
    descent over single-point label moves and table swaps with seeded plateau
    escapes.  Exact integer objective; deterministic for fixed seed.
    """
    if action_x.labels != action_y.labels:
        raise ValueError("factor actions must share their symbol set")
    if n_steps < 1:
        raise ValueError("step complexity must be at least 1")
    if k != 2:
        raise ValueError("the target statistic is two-class; k must be 2")
    raw = (n_steps ** (action_x.size + action_y.size)) * (k ** (n_steps * n_steps))
    if raw <= exhaustive_budget:
        return _exhaustive_step_search(action_x, action_y, n_steps, k)
    return _local_step_search(
        action_x,
        action_y,
        n_steps,
        k,
        seed,
        restarts,
        moves_per_restart,
        plateau_moves,
    )


def step_search(cfg: ExperimentConfig, pair: ProductPair | None = None) -> StepSearchResult:
    if pair is None:
        pair = ProductPair.build(
            cfg.n, cfg.m, d=cfg.d, gens=cfg.gens, budget=cfg.enumeration_budget
        )
    return step_search_actions(
        pair.action_n,
        pair.action_m,
        cfg.step_classes,
        k=cfg.k,
        seed=cfg.seed,
        restarts=cfg.restarts,
        moves_per_restart=cfg.moves_per_restart,
        plateau_moves=cfg.plateau_moves,
        exhaustive_budget=cfg.exhaustive_budget,
    )


@dataclass(frozen=True)
class DiscontinuityRow:
    p: int
    order_n: int | None = None
    order_m: int | None = None
    u_member: bool | None = None
    u_witness_size: int | None = None  # the stored witness is the canonical first half
    best_step_dist: Fraction | None = None
    invariance_defect_best: Fraction | None = None
    nearest_fz_dist: Fraction | None = None
    claim_bound_value: float | None = None
    claim_bound_status: str | None = None
    lambda2: float | None = None
    spectral_converged: bool | None = None
    cheeger: Fraction | None = None
    cheeger_kind: str | None = None
    delta_measured: Fraction | None = None
    floor_consistent: bool | None = None
    search_mode: str | None = None
    search_evaluations: int | None = None
    error: str | None = None


@dataclass(frozen=True)
class DiscontinuityReport:
    step_classes: int
    seed: int
    generator_labels: tuple[str, ...]
    rows: tuple[DiscontinuityRow, ...]


def discontinuity_report(
    primes: Sequence[int],
    step_classes: int,
    gens: GeneratorSet | None = None,
    d: int = 2,
    seed: int = 0,
    restarts: int = 32,
    moves_per_restart: int = 100_000,
    plateau_moves: int = 40,
    exhaustive_budget: int = 200_000,
    enumeration_budget: int = DEFAULT_ENUMERATION_BUDGET,
    cheeger_limit: int = EXHAUSTIVE_CHEEGER_LIMIT,
    cheeger_budget: int = 50_000,
    spectral_tol: float = 1e-10,
    spectral_max_iter: int = 200_000,
) -> DiscontinuityReport:
    """Per-prime survey on the (p, p) instances.

    Each row records the exact membership witness for u, the best step
    distance found at the configured complexity, the invariance diagnostics of
    the best step function, the distance-floor threshold relative to the
    measured expansion of the instance, and spectral data.  Row failures are
    recorded and the run continues.
    """
    if step_classes < 1:
        raise ValueError("step complexity must be at least 1")
    ps = sorted(set(int(p) for p in primes))
    for p in ps:
        if not is_prime(p):
            raise ValueError(f"{p} is not prime")
    gens = gens or sanov_generators()
    rows = []
    for p in ps:
        try:
            rows.append(
                _discontinuity_row(
                    p,
                    step_classes,
                    gens,
                    d,
                    seed,
                    restarts,
                    moves_per_restart,
                    plateau_moves,
                    exhaustive_budget,
                    enumeration_budget,
                    cheeger_limit,
                    cheeger_budget,
                    spectral_tol,
                    spectral_max_iter,
                )
            )
        except Exception as exc:  # per-row failure: record and continue
            rows.append(DiscontinuityRow(p=p, error=str(exc)))
    return DiscontinuityReport(
        step_classes=step_classes,
        seed=seed,
        generator_labels=gens.labels,
        rows=tuple(rows),
    )


def _discontinuity_row(
    p: int,
    step_classes: int,
    gens: GeneratorSet,
    d: int,
    seed: int,
    restarts: int,
    moves_per_restart: int,
    plateau_moves: int,
    exhaustive_budget: int,
    enumeration_budget: int,
    cheeger_limit: int,
    cheeger_budget: int,
    spectral_tol: float,
    spectral_max_iter: int,
) -> DiscontinuityRow:
    group = enumerate_group(d, p, enumeration_budget)
    pair = ProductPair(group, group, gens)
    gap = spectral_gap(
        pair.action_m, tol=spectral_tol, max_iter=spectral_max_iter, seed=(seed, p)
    )
    if group.order <= cheeger_limit:
        cheeger_kind = "exact"
        cheeger_value = cheeger_exact(pair.action_m, limit=cheeger_limit)
    else:
        cheeger_kind = "upper"
        cheeger_value = cheeger_search(
            pair.action_m, budget=cheeger_budget, seed=(seed, p)
        ).ratio
    membership = u_membership_witness(pair)
    search = step_search_actions(
        pair.action_n,
        pair.action_m,
        step_classes,
        seed=(seed, p),
        restarts=restarts,
        moves_per_restart=moves_per_restart,
        plateau_moves=plateau_moves,
        exhaustive_budget=exhaustive_budget,
    )
    best_f = search.best_step_function().assemble()
    defect = invariance_defect(pair, best_f)
    nearest = nearest_fz(pair, best_f)
    bound = claim3_bound(p, step_classes)
    # Threshold relative to the measured expansion value of this instance; for
    # "upper" rows the measurement is itself only an upper bound.
    delta_measured = cheeger_value / (32 * len(gens.labels))
    return DiscontinuityRow(
        p=p,
        order_n=pair.order_n,
        order_m=pair.order_m,
        u_member=membership.exact,
        u_witness_size=len(membership.z_indices),
        best_step_dist=search.best_dist,
        invariance_defect_best=defect.total,
        nearest_fz_dist=nearest.dist,
        claim_bound_value=bound.bound,
        claim_bound_status=bound.status,
        lambda2=gap.magnitude,
        spectral_converged=gap.converged,
        cheeger=cheeger_value,
        cheeger_kind=cheeger_kind,
        delta_measured=delta_measured,
        floor_consistent=search.best_dist >= delta_measured,
        search_mode=search.mode,
        search_evaluations=search.evaluations,
    )
