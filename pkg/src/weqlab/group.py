"""Exact arithmetic in SL_d(Z) and its congruence quotients SL_d(Z/nZ).

Matrices are immutable tuples of row tuples.  Enumerated groups carry a
canonical element order (lexicographic on the flattened entry vector) so that
indices, witnesses, and serialized reports are reproducible bit for bit.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

DEFAULT_ENUMERATION_BUDGET = 5_000_000

# Beyond this many cells an order x order index table would dominate memory.
TABLE_CELL_BUDGET = 250_000_000


class BudgetExceededError(RuntimeError):
    """An enumeration or table build would exceed its configured budget."""


Rows = tuple[tuple[int, ...], ...]


def _as_rows(entries: Iterable[Iterable[int]]) -> Rows:
    rows = tuple(tuple(int(x) for x in row) for row in entries)
    if not rows or any(len(row) != len(rows) for row in rows):
        raise ValueError("matrix entries must form a square array")
    if len(rows) < 2:
        raise ValueError("dimension must be at least 2")
    return rows


def det_int(rows: Sequence[Sequence[int]]) -> int:
    """Exact integer determinant by Laplace expansion (small dimensions only)."""
    d = len(rows)
    if d == 1:
        return rows[0][0]
    if d == 2:
        return rows[0][0] * rows[1][1] - rows[0][1] * rows[1][0]
    total = 0
    for j in range(d):
        a = rows[0][j]
        if a == 0:
            continue
        minor = [list(r[:j]) + list(r[j + 1 :]) for r in rows[1:]]
        total += (-1) ** j * a * det_int(minor)
    return total


def adjugate_int(rows: Sequence[Sequence[int]]) -> list[list[int]]:
    """Integer adjugate; for a determinant-one matrix this is the inverse."""
    d = len(rows)
    if d == 2:
        (a, b), (c, e) = rows
        return [[e, -b], [-c, a]]
    adj = [[0] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            minor = [
                [rows[r][c] for c in range(d) if c != j]
                for r in range(d)
                if r != i
            ]
            adj[j][i] = (-1) ** (i + j) * det_int(minor)
    return adj


@dataclass(frozen=True)
class IntMatrix:
    """Integer matrix of determinant one (an element of SL_d(Z))."""

    entries: Rows

    def __post_init__(self) -> None:
        rows = _as_rows(self.entries)
        object.__setattr__(self, "entries", rows)
        det = det_int(rows)
        if det != 1:
            raise ValueError(f"determinant must be 1, got {det}")

    @property
    def d(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, d: int) -> "IntMatrix":
        return cls(tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))

    def mul(self, other: "IntMatrix") -> "IntMatrix":
        if self.d != other.d:
            raise ValueError("dimension mismatch")
        d = self.d
        a, b = self.entries, other.entries
        return IntMatrix(
            tuple(
                tuple(sum(a[i][k] * b[k][j] for k in range(d)) for j in range(d))
                for i in range(d)
            )
        )

    def inverse(self) -> "IntMatrix":
        return IntMatrix(tuple(tuple(row) for row in adjugate_int(self.entries)))


def parse_matrix(text: str) -> IntMatrix:
    """Parse row-major semicolon/comma notation, e.g. "1,2;0,1"."""
    rows = []
    for chunk in text.strip().split(";"):
        row = [int(v.strip()) for v in chunk.split(",") if v.strip() != ""]
        if not row:
            raise ValueError(f"empty matrix row in {text!r}")
        rows.append(row)
    return IntMatrix(tuple(tuple(r) for r in rows))


def format_matrix(entries: Rows) -> str:
    return ";".join(",".join(str(v) for v in row) for row in entries)


@dataclass(frozen=True)
class ModMatrix:
    """Element of SL_d(Z/nZ): reduced entries, determinant 1 mod n."""

    n: int
    entries: Rows

    def __post_init__(self) -> None:
        if self.n < 2:
            raise ValueError("modulus must be at least 2")
        rows = _as_rows(self.entries)
        if any(not (0 <= v < self.n) for row in rows for v in row):
            raise ValueError("entries must be reduced into [0, n)")
        object.__setattr__(self, "entries", rows)
        if det_int(rows) % self.n != 1:
            raise ValueError(f"determinant must be 1 mod {self.n}")

    @property
    def d(self) -> int:
        return len(self.entries)


def identity_mod(d: int, n: int) -> ModMatrix:
    return ModMatrix(n, tuple(tuple(int(i == j) for j in range(d)) for i in range(d)))


def mat_mul(a: ModMatrix, b: ModMatrix) -> ModMatrix:
    if a.d != b.d or a.n != b.n:
        raise ValueError("dimension or modulus mismatch")
    d, n = a.d, a.n
    x, y = a.entries, b.entries
    return ModMatrix(
        n,
        tuple(
            tuple(sum(x[i][k] * y[k][j] for k in range(d)) % n for j in range(d))
            for i in range(d)
        ),
    )


def mat_inv(a: ModMatrix) -> ModMatrix:
    """Inverse via the integer adjugate of any lift (determinant is 1 mod n)."""
    adj = adjugate_int(a.entries)
    return ModMatrix(a.n, tuple(tuple(v % a.n for v in row) for row in adj))


def reduce_mod(mat: IntMatrix | ModMatrix, n: int) -> ModMatrix:
    if n < 2:
        raise ValueError("modulus must be at least 2")
    if isinstance(mat, ModMatrix):
        if mat.n % n != 0:
            raise ValueError(f"{n} does not divide source modulus {mat.n}")
    return ModMatrix(n, tuple(tuple(v % n for v in row) for row in mat.entries))


class GeneratorSet:
    """Finite symmetric subset of SL_d(Z): labeled matrices closed under inversion."""

    __slots__ = ("labels", "_matrices", "_inverse")

    def __init__(
        self,
        labels: Sequence[str],
        matrices: Sequence[IntMatrix],
        inverse_label: dict[str, str],
    ) -> None:
        labels = tuple(labels)
        if len(labels) != len(set(labels)):
            raise ValueError("duplicate generator labels")
        if len(labels) != len(matrices):
            raise ValueError("labels and matrices must align")
        mats = dict(zip(labels, matrices))
        dims = {m.d for m in matrices}
        if len(dims) != 1:
            raise ValueError("generators must share a dimension")
        for lab in labels:
            inv = inverse_label.get(lab)
            if inv is None or inv not in mats:
                raise ValueError(f"no inverse pairing for label {lab!r}")
            if inverse_label.get(inv) != lab:
                raise ValueError("inverse pairing must be an involution")
            if mats[inv].entries != mats[lab].inverse().entries:
                raise ValueError(f"matrix of {inv!r} is not the inverse of {lab!r}")
        seen = {}
        for lab in labels:
            key = mats[lab].entries
            if key in seen:
                raise ValueError(f"duplicate matrices for {seen[key]!r} and {lab!r}")
            seen[key] = lab
        self.labels = labels
        self._matrices = mats
        self._inverse = dict(inverse_label)

    @property
    def d(self) -> int:
        return self._matrices[self.labels[0]].d

    def __len__(self) -> int:
        return len(self.labels)

    def matrix(self, label: str) -> IntMatrix:
        return self._matrices[label]

    def inverse_label(self, label: str) -> str:
        return self._inverse[label]

    @property
    def inverse_pairing(self) -> dict[str, str]:
        return dict(self._inverse)

    def reduced(self, n: int) -> dict[str, ModMatrix]:
        return {lab: reduce_mod(self._matrices[lab], n) for lab in self.labels}

    def describe(self) -> dict[str, str]:
        return {lab: format_matrix(self._matrices[lab].entries) for lab in self.labels}

    @classmethod
    def symmetrized(cls, named: Sequence[tuple[str, IntMatrix]]) -> "GeneratorSet":
        """Close a list of (label, matrix) pairs under inversion.

        A matrix equal to its own inverse is self-paired; if two listed
        matrices are mutually inverse they are paired with each other.
        """
        labels: list[str] = []
        matrices: list[IntMatrix] = []
        pairing: dict[str, str] = {}
        by_entries: dict[Rows, str] = {}
        for lab, mat in named:
            if lab in pairing:
                raise ValueError(f"duplicate label {lab!r}")
            if mat.entries in by_entries:
                raise ValueError(f"duplicate matrix for label {lab!r}")
            labels.append(lab)
            matrices.append(mat)
            by_entries[mat.entries] = lab
            pairing[lab] = ""
        for lab, mat in list(zip(labels, matrices)):
            if pairing[lab]:
                continue
            inv = mat.inverse()
            partner = by_entries.get(inv.entries)
            if partner is not None:
                pairing[lab] = partner
                pairing[partner] = lab
                continue
            inv_lab = lab.upper() if lab.islower() and lab.isalpha() else f"{lab}_inv"
            if inv_lab in pairing:
                raise ValueError(f"label clash generating inverse for {lab!r}")
            labels.append(inv_lab)
            matrices.append(inv)
            by_entries[inv.entries] = inv_lab
            pairing[lab] = inv_lab
            pairing[inv_lab] = lab
        return cls(labels, matrices, pairing)


def sanov_generators() -> GeneratorSet:
    """The default rank-2 generator pair [[1,2],[0,1]], [[1,0],[2,1]] plus inverses."""
    a = IntMatrix(((1, 2), (0, 1)))
    b = IntMatrix(((1, 0), (2, 1)))
    return GeneratorSet.symmetrized([("a", a), ("b", b)])


def parse_generators(spec: str) -> GeneratorSet:
    """Parse a generator preset name or pipe-separated matrix literals."""
    spec = spec.strip()
    if spec.lower() == "sanov":
        return sanov_generators()
    named = []
    for i, chunk in enumerate(spec.split("|")):
        named.append((f"g{i}", parse_matrix(chunk)))
    if not named:
        raise ValueError("empty generator specification")
    return GeneratorSet.symmetrized(named)


def _mul_rows(a: Rows, b: Rows, n: int, d: int) -> Rows:
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(d)) % n for j in range(d))
        for i in range(d)
    )


def elementary_matrices(d: int, n: int) -> list[ModMatrix]:
    """E_ij(+1) and E_ij(-1) for all off-diagonal positions (their powers give
    every elementary matrix, so closure under these reaches all of SL_d(Z/nZ))."""
    out = []
    for i in range(d):
        for j in range(d):
            if i == j:
                continue
            for v in {1, (n - 1) % n}:
                rows = [[int(r == c) for c in range(d)] for r in range(d)]
                rows[i][j] = v
                out.append(ModMatrix(n, tuple(tuple(r) for r in rows)))
    return out


class FiniteGroup:
    """Fully enumerated SL_d(Z/nZ) with canonical lexicographic element order."""

    def __init__(self, d: int, n: int, elements: Sequence[ModMatrix]) -> None:
        if any(m.d != d or m.n != n for m in elements):
            raise ValueError("elements must share dimension and modulus")
        elems = tuple(sorted(elements, key=lambda m: m.entries))
        self.d = d
        self.n = n
        self.elements = elems
        self.index = {m.entries: i for i, m in enumerate(elems)}
        if len(self.index) != len(elems):
            raise ValueError("duplicate elements")
        self.identity_index = self.index[identity_mod(d, n).entries]
        mats = np.array([m.entries for m in elems], dtype=np.int64)
        self._mats = mats
        self._place = np.array(
            [n ** (d * d - 1 - i) for i in range(d * d)], dtype=np.int64
        )
        keys = mats.reshape(len(elems), d * d) @ self._place
        if not np.all(np.diff(keys) > 0):
            raise AssertionError("lexicographic order must match key order")
        self._keys = keys
        self._inv_idx: np.ndarray | None = None
        self._left_div: np.ndarray | None = None
        self._right_mul: np.ndarray | None = None

    @property
    def order(self) -> int:
        return len(self.elements)

    def element(self, i: int) -> ModMatrix:
        return self.elements[i]

    def index_of(self, mat: ModMatrix) -> int:
        try:
            return self.index[mat.entries]
        except KeyError:
            raise ValueError("matrix is not an element of this group") from None

    def _encode(self, mats: np.ndarray) -> np.ndarray:
        flat = mats.reshape(mats.shape[0], self.d * self.d)
        return flat @ self._place

    def _lookup(self, mats: np.ndarray) -> np.ndarray:
        keys = self._encode(mats)
        pos = np.searchsorted(self._keys, keys)
        if pos.max(initial=-1) >= self.order or not np.array_equal(
            self._keys[pos], keys
        ):
            raise ValueError("product left the enumerated element set")
        return pos.astype(np.int32)

    def left_action_perm(self, mat: ModMatrix) -> np.ndarray:
        """Permutation x -> index(mat * element[x])."""
        if mat.d != self.d or mat.n != self.n:
            raise ValueError("dimension or modulus mismatch")
        m = np.array(mat.entries, dtype=np.int64)
        prod = np.einsum("ij,xjk->xik", m, self._mats) % self.n
        return self._lookup(prod)

    def right_action_perm(self, mat: ModMatrix) -> np.ndarray:
        """Permutation x -> index(element[x] * mat)."""
        if mat.d != self.d or mat.n != self.n:
            raise ValueError("dimension or modulus mismatch")
        m = np.array(mat.entries, dtype=np.int64)
        prod = np.einsum("xij,jk->xik", self._mats, m) % self.n
        return self._lookup(prod)

    @property
    def inverse_indices(self) -> np.ndarray:
        if self._inv_idx is None:
            if self.d == 2:
                a = self._mats
                inv = np.empty_like(a)
                inv[:, 0, 0] = a[:, 1, 1]
                inv[:, 0, 1] = -a[:, 0, 1]
                inv[:, 1, 0] = -a[:, 1, 0]
                inv[:, 1, 1] = a[:, 0, 0]
                self._inv_idx = self._lookup(inv % self.n)
            else:
                self._inv_idx = np.array(
                    [self.index[mat_inv(m).entries] for m in self.elements],
                    dtype=np.int32,
                )
        return self._inv_idx

    def _table_guard(self) -> None:
        if self.order * self.order > TABLE_CELL_BUDGET:
            raise BudgetExceededError(
                f"index table for order {self.order} exceeds the cell budget"
            )

    @property
    def left_division_table(self) -> np.ndarray:
        """T[a, x] = index(inverse(a) * x)."""
        if self._left_div is None:
            self._table_guard()
            inv = self.inverse_indices
            table = np.empty((self.order, self.order), dtype=np.int32)
            for a in range(self.order):
                table[a] = self.left_action_perm(self.elements[inv[a]])
            self._left_div = table
        return self._left_div

    @property
    def right_multiplication_table(self) -> np.ndarray:
        """R[c, x] = index(x * c)."""
        if self._right_mul is None:
            self._table_guard()
            table = np.empty((self.order, self.order), dtype=np.int32)
            for c in range(self.order):
                table[c] = self.right_action_perm(self.elements[c])
            self._right_mul = table
        return self._right_mul

    def reduction_indices(self, target: "FiniteGroup") -> np.ndarray:
        """Indices in `target` of each element reduced mod target.n."""
        if self.d != target.d:
            raise ValueError("dimension mismatch")
        if self.n % target.n != 0:
            raise ValueError(f"{target.n} does not divide {self.n}")
        return target._lookup(self._mats % target.n)


def enumerate_group(
    d: int, n: int, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> FiniteGroup:
    """BFS closure of the elementary matrices of SL_d(Z/nZ)."""
    if d < 2 or n < 2:
        raise ValueError("require d >= 2 and n >= 2")
    gens = [m.entries for m in elementary_matrices(d, n)]
    start = identity_mod(d, n).entries
    seen = {start}
    queue = deque([start])
    while queue:
        cur = queue.popleft()
        for g in gens:
            nxt = _mul_rows(cur, g, n, d)
            if nxt not in seen:
                if len(seen) >= budget:
                    raise BudgetExceededError(
                        f"SL_{d}(Z/{n}) enumeration exceeded budget {budget}; "
                        "use implicit per-query translation instead"
                    )
                seen.add(nxt)
                queue.append(nxt)
    return FiniteGroup(d, n, [ModMatrix(n, rows) for rows in seen])


def subgroup_closure(group: FiniteGroup, gens: Sequence[ModMatrix]) -> frozenset[int]:
    """Index set of the subgroup generated by `gens` (which must lie in the group)."""
    perms = [group.right_action_perm(g) for g in gens]
    for g in gens:
        group.index_of(g)  # membership check with a clear error
    seen = {group.identity_index}
    queue = deque(seen)
    while queue:
        x = queue.popleft()
        for perm in perms:
            y = int(perm[x])
            if y not in seen:
                seen.add(y)
                queue.append(y)
    return frozenset(seen)


def generates(group: FiniteGroup, gens: Sequence[ModMatrix]) -> bool:
    return len(subgroup_closure(group, gens)) == group.order


def prime_factorization(n: int) -> list[tuple[int, int]]:
    if n < 2:
        raise ValueError("n must be at least 2")
    out = []
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            k = 0
            while m % p == 0:
                m //= p
                k += 1
            out.append((p, k))
        p += 1
    if m > 1:
        out.append((m, 1))
    return out


def smallest_prime_factor(n: int) -> int:
    return prime_factorization(n)[0][0]


def is_prime(n: int) -> bool:
    return n >= 2 and prime_factorization(n) == [(n, 1)]


@dataclass(frozen=True)
class CrtReport:
    """Consistency of a quotient with its prime-power factor quotients."""

    n: int
    factors: tuple[tuple[int, int], ...]
    factor_orders: tuple[int, ...]
    order: int
    order_matches_product: bool
    reduction_injective: bool

    @property
    def passed(self) -> bool:
        return self.order_matches_product and self.reduction_injective


def crt_check(
    group: FiniteGroup, budget: int = DEFAULT_ENUMERATION_BUDGET
) -> CrtReport:
    factors = tuple(prime_factorization(group.n))
    orders = []
    columns = []
    for p, k in factors:
        q = p**k
        factor_group = group if q == group.n else enumerate_group(group.d, q, budget)
        orders.append(factor_group.order)
        columns.append(group.reduction_indices(factor_group))
    product = 1
    for o in orders:
        product *= o
    stacked = np.stack(columns, axis=1)
    distinct = np.unique(stacked, axis=0).shape[0]
    return CrtReport(
        n=group.n,
        factors=factors,
        factor_orders=tuple(orders),
        order=group.order,
        order_matches_product=(group.order == product),
        reduction_injective=(distinct == group.order),
    )
