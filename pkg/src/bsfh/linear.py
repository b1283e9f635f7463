"""Exact linear algebra over F2 and F2[U], and homology of graded complexes.

F2 matrices store each row as a bitmask int over the columns.  F2[U]
matrices store packed polynomials (see :mod:`bsfh.f2poly`).  Alexander
gradings are half-integers kept as doubled ints so all arithmetic stays
exact; multiplication by U lowers the doubled grading by 2 and preserves
the Z/2 Maslov label, while every differential entry flips it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import f2poly


class NotAComplexError(ValueError):
    """The given differential does not square to zero."""


class GradingError(ValueError):
    """Differential entries violate the grading rules."""


# ---------------------------------------------------------------------------
# F2 matrices (rows are bitmask ints over columns)


class F2Matrix:
    """Dense matrix over F2 with bitmask rows."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[int] | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [0] * rows
        if len(data) != rows:
            raise ValueError("row count mismatch")
        mask = (1 << cols) - 1
        self.data = [r & mask for r in data]

    @classmethod
    def from_entries(cls, entries: list[list[int]]) -> "F2Matrix":
        rows = len(entries)
        cols = len(entries[0]) if rows else 0
        data = []
        for row in entries:
            acc = 0
            for j, v in enumerate(row):
                if v & 1:
                    acc |= 1 << j
            data.append(acc)
        return cls(rows, cols, data)

    @classmethod
    def identity(cls, n: int) -> "F2Matrix":
        return cls(n, n, [1 << i for i in range(n)])

    def entry(self, i: int, j: int) -> int:
        return (self.data[i] >> j) & 1

    def set_entry(self, i: int, j: int, v: int) -> None:
        if v & 1:
            self.data[i] |= 1 << j
        else:
            self.data[i] &= ~(1 << j)

    def copy(self) -> "F2Matrix":
        return F2Matrix(self.rows, self.cols, list(self.data))

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, F2Matrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def __hash__(self):
        return hash((self.rows, self.cols, tuple(self.data)))

    def is_zero(self) -> bool:
        return all(r == 0 for r in self.data)

    def transpose(self) -> "F2Matrix":
        out = F2Matrix(self.cols, self.rows)
        for i, row in enumerate(self.data):
            while row:
                low = row & -row
                j = low.bit_length() - 1
                out.data[j] |= 1 << i
                row ^= low
        return out

    def mul(self, other: "F2Matrix") -> "F2Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = F2Matrix(self.rows, other.cols)
        for i, row in enumerate(self.data):
            acc = 0
            r = row
            while r:
                low = r & -r
                acc ^= other.data[low.bit_length() - 1]
                r ^= low
            out.data[i] = acc
        return out

    def apply(self, vec: int) -> int:
        """Matrix times column vector (vector = bitmask over self.cols)."""
        acc = 0
        for i, row in enumerate(self.data):
            if (row & vec).bit_count() & 1:
                acc |= 1 << i
        return acc

    def column(self, j: int) -> int:
        acc = 0
        for i, row in enumerate(self.data):
            if (row >> j) & 1:
                acc |= 1 << i
        return acc

    def rank(self) -> int:
        return len(row_reduce(list(self.data))[0])

    def __repr__(self):
        lines = [
            "".join(str(self.entry(i, j)) for j in range(self.cols))
            for i in range(self.rows)
        ]
        return "F2Matrix[\n  " + "\n  ".join(lines) + "\n]"


def row_reduce(rows: list[int]) -> tuple[list[int], list[int]]:
    """Row-echelon form of bitmask rows.

    Returns (basis, pivots): independent rows with distinct leading bits,
    and their pivot positions (highest set bit of each basis row).
    """
    basis: list[int] = []
    pivots: list[int] = []
    for row in rows:
        for b, p in zip(basis, pivots):
            if (row >> p) & 1:
                row ^= b
        if row:
            p = row.bit_length() - 1
            # Insert keeping pivots sorted descending.
            k = 0
            while k < len(pivots) and pivots[k] > p:
                k += 1
            basis.insert(k, row)
            pivots.insert(k, p)
    return basis, pivots


def reduce_against(vec: int, basis: list[int], pivots: list[int]) -> int:
    for b, p in zip(basis, pivots):
        if (vec >> p) & 1:
            vec ^= b
    return vec


def in_span(vec: int, basis: list[int], pivots: list[int]) -> bool:
    return reduce_against(vec, basis, pivots) == 0


def solve_f2(matrix: F2Matrix, target: int) -> int | None:
    """One solution x of M x = target (bitmask vectors), or None."""
    # Gaussian elimination on the augmented system, columns as unknowns.
    rows = []
    for i in range(matrix.rows):
        rows.append((matrix.data[i] << 1) | ((target >> i) & 1))
    basis, pivots = row_reduce(rows)
    # Any row reduced to just the augmented bit means inconsistency.
    for b in basis:
        if b == 1:
            return None
    x = 0
    # Back-substitute in ascending pivot order: a row's non-pivot bits
    # are all below its pivot, hence already fixed.
    for b, p in reversed(list(zip(basis, pivots))):
        # p >= 1 here since b != 1; unknown index is p - 1.
        rhs = b & 1
        row = b >> 1
        val = rhs ^ ((row & x).bit_count() & 1) ^ ((x >> (p - 1)) & 1)
        if val:
            x |= 1 << (p - 1)
    if matrix.apply(x) != target:
        return None
    return x


def nullspace(matrix: F2Matrix) -> list[int]:
    """Basis of the kernel of M (column vectors as bitmasks)."""
    m, n = matrix.rows, matrix.cols
    # Reduce the transpose augmented with identity to track combinations.
    rows = []
    for j in range(n):
        rows.append((matrix.column(j) << n) | (1 << j))
    basis: list[int] = []
    pivots: list[int] = []
    out: list[int] = []
    for row in rows:
        for b, p in zip(basis, pivots):
            if (row >> p) & 1 and p >= n:
                row ^= b
        if row >> n:
            p = row.bit_length() - 1
            k = 0
            while k < len(pivots) and pivots[k] > p:
                k += 1
            basis.insert(k, row)
            pivots.insert(k, p)
        else:
            out.append(row & ((1 << n) - 1))
    return out


# ---------------------------------------------------------------------------
# F2[U] matrices and Smith normal form


class F2UMatrix:
    """Dense matrix over F2[U]; entries are packed polynomials."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data: list[list[int]] | None = None):
        self.rows = rows
        self.cols = cols
        if data is None:
            data = [[0] * cols for _ in range(rows)]
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("shape mismatch")
        self.data = [list(r) for r in data]

    @classmethod
    def identity(cls, n: int) -> "F2UMatrix":
        out = cls(n, n)
        for i in range(n):
            out.data[i][i] = 1
        return out

    def copy(self) -> "F2UMatrix":
        return F2UMatrix(self.rows, self.cols, self.data)

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, F2UMatrix)
            and self.rows == other.rows
            and self.cols == other.cols
            and self.data == other.data
        )

    def is_zero(self) -> bool:
        return all(all(e == 0 for e in r) for r in self.data)

    def mul(self, other: "F2UMatrix") -> "F2UMatrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = F2UMatrix(self.rows, other.cols)
        for i in range(self.rows):
            row = self.data[i]
            orow = out.data[i]
            for k in range(self.cols):
                a = row[k]
                if a == 0:
                    continue
                brow = other.data[k]
                for j in range(other.cols):
                    if brow[j]:
                        orow[j] ^= f2poly.pmul(a, brow[j])
        return out

    def specialize(self, value: int) -> F2Matrix:
        """Evaluate U at an F2 scalar (0 or 1), giving an F2 matrix."""
        out = F2Matrix(self.rows, self.cols)
        for i in range(self.rows):
            for j in range(self.cols):
                p = self.data[i][j]
                bit = (p & 1) if value == 0 else (p.bit_count() & 1)
                if bit:
                    out.data[i] |= 1 << j
        return out

    def __repr__(self):
        lines = [
            " ".join(f2poly.pstr(e) for e in row) for row in self.data
        ]
        return "F2UMatrix[\n  " + "\n  ".join(lines) + "\n]"


@dataclass(frozen=True)
class SmithForm:
    """Diagonal invariant factors d1 | d2 | ... with the transforms.

    P and Q are unimodular with P * A * Q diagonal; Pinv and Qinv are
    their inverses, maintained alongside so invertibility is witnessed
    by explicit recomposition rather than a determinant computation.
    """

    factors: tuple[int, ...]
    p: F2UMatrix
    q: F2UMatrix
    p_inv: F2UMatrix
    q_inv: F2UMatrix

    def diagonal_matrix(self, rows: int, cols: int) -> F2UMatrix:
        out = F2UMatrix(rows, cols)
        for t, d in enumerate(self.factors):
            out.data[t][t] = d
        return out


def snf_over_f2u(matrix: F2UMatrix) -> SmithForm:
    """Smith normal form over F2[U] by Euclidean reduction.

    Pivots are chosen as the lowest-degree nonzero entry, ties broken by
    smallest (row, col).  The returned factors satisfy the divisibility
    chain d1 | d2 | ...; trailing zero rows/columns are not listed.
    """
    a = matrix.copy()
    m, n = a.rows, a.cols
    p = F2UMatrix.identity(m)
    p_inv = F2UMatrix.identity(m)
    q = F2UMatrix.identity(n)
    q_inv = F2UMatrix.identity(n)

    def row_op(dst: int, src: int, c: int) -> None:
        # row[dst] += c * row[src] on A and P; inverse op on Pinv.
        for j in range(n):
            if a.data[src][j]:
                a.data[dst][j] ^= f2poly.pmul(c, a.data[src][j])
        for j in range(m):
            if p.data[src][j]:
                p.data[dst][j] ^= f2poly.pmul(c, p.data[src][j])
            # (P_inv gets the inverse column op)
        for i in range(m):
            if p_inv.data[i][dst]:
                p_inv.data[i][src] ^= f2poly.pmul(c, p_inv.data[i][dst])

    def col_op(dst: int, src: int, c: int) -> None:
        for i in range(m):
            if a.data[i][src]:
                a.data[i][dst] ^= f2poly.pmul(c, a.data[i][src])
        for i in range(n):
            if q.data[i][src]:
                q.data[i][dst] ^= f2poly.pmul(c, q.data[i][src])
        for j in range(n):
            if q_inv.data[dst][j]:
                q_inv.data[src][j] ^= f2poly.pmul(c, q_inv.data[dst][j])

    def row_swap(i1: int, i2: int) -> None:
        a.data[i1], a.data[i2] = a.data[i2], a.data[i1]
        p.data[i1], p.data[i2] = p.data[i2], p.data[i1]
        for r in p_inv.data:
            r[i1], r[i2] = r[i2], r[i1]

    def col_swap(j1: int, j2: int) -> None:
        for r in a.data:
            r[j1], r[j2] = r[j2], r[j1]
        for r in q.data:
            r[j1], r[j2] = r[j2], r[j1]
        q_inv.data[j1], q_inv.data[j2] = q_inv.data[j2], q_inv.data[j1]

    factors: list[int] = []
    t = 0
    while True:
        # Find the lowest-degree nonzero pivot in the trailing block.
        best = None
        for i in range(t, m):
            for j in range(t, n):
                e = a.data[i][j]
                if e and (best is None or f2poly.deg(e) < f2poly.deg(a.data[best[0]][best[1]])):
                    best = (i, j)
        if best is None:
            break
        i0, j0 = best
        if i0 != t:
            row_swap(t, i0)
        if j0 != t:
            col_swap(t, j0)
        while True:
            pivot = a.data[t][t]
            done = True
            for i in range(t + 1, m):
                if a.data[i][t]:
                    quot, rem = f2poly.pdivmod(a.data[i][t], pivot)
                    row_op(i, t, quot)
                    if rem:
                        row_swap(t, i)
                        done = False
                        break
            if not done:
                continue
            for j in range(t + 1, n):
                if a.data[t][j]:
                    quot, rem = f2poly.pdivmod(a.data[t][j], pivot)
                    col_op(j, t, quot)
                    if rem:
                        col_swap(t, j)
                        done = False
                        break
            if done:
                break
        pivot = a.data[t][t]
        # Enforce divisibility of the remaining block by the pivot.
        offender = None
        for i in range(t + 1, m):
            for j in range(t + 1, n):
                if not f2poly.divides(pivot, a.data[i][j]):
                    offender = i
                    break
            if offender is not None:
                break
        if offender is not None:
            row_op(t, offender, 1)
            continue
        factors.append(pivot)
        t += 1

    form = SmithForm(tuple(factors), p, q, p_inv, q_inv)
    # Recomposition check: P * A * Q must be the diagonal, and the
    # tracked inverses must invert P and Q.
    if p.mul(matrix).mul(q) != form.diagonal_matrix(m, n):
        raise AssertionError("SNF recomposition failed")
    if p.mul(p_inv) != F2UMatrix.identity(m) or q.mul(q_inv) != F2UMatrix.identity(n):
        raise AssertionError("SNF transform inverses failed")
    return form


# ---------------------------------------------------------------------------
# Graded chain complexes


RING_F2 = "F2"
RING_F2U = "F2U"


@dataclass(frozen=True)
class GradedChainComplex:
    """Free complex with (Alexander, Z/2 Maslov) labels per generator.

    ``alex2`` stores doubled Alexander gradings.  Column j of ``diff``
    is the differential of generator j.  Entries must preserve the
    total Alexander grading (a U^k coefficient from g_j to g_i needs
    alex2[j] == alex2[i] - 2k) and flip the Maslov parity.  Complexes
    built with graded=False (pairings against the U=1 modules, where no
    Alexander grading survives) skip the Alexander checks and store 0.
    """

    ring: str
    gens: tuple[str, ...]
    alex2: tuple[int, ...]
    maslov: tuple[int, ...]
    diff: F2Matrix | F2UMatrix
    graded: bool = True
    name: str = ""

    def __post_init__(self):
        n = len(self.gens)
        if len(self.alex2) != n or len(self.maslov) != n:
            raise ValueError("label count mismatch")
        if not self.graded:
            object.__setattr__(self, "alex2", tuple(0 for _ in range(n)))
        if self.diff.rows != n or self.diff.cols != n:
            raise ValueError("differential shape mismatch")
        if self.ring == RING_F2:
            if not isinstance(self.diff, F2Matrix):
                raise ValueError("F2 complex needs an F2 matrix")
            for j in range(n):
                col = self.diff.column(j)
                c = col
                while c:
                    low = c & -c
                    i = low.bit_length() - 1
                    c ^= low
                    if self.graded and self.alex2[i] != self.alex2[j]:
                        raise GradingError(
                            f"d({self.gens[j]}) hits {self.gens[i]} across Alexander gradings"
                        )
                    if self.maslov[i] == self.maslov[j]:
                        raise GradingError(
                            f"d({self.gens[j]}) -> {self.gens[i]} does not flip Maslov parity"
                        )
            if not self.diff.mul(self.diff).is_zero():
                raise NotAComplexError("d^2 != 0")
        elif self.ring == RING_F2U:
            if not isinstance(self.diff, F2UMatrix):
                raise ValueError("F2U complex needs an F2U matrix")
            for j in range(n):
                for i in range(n):
                    poly = self.diff.data[i][j]
                    k = 0
                    while poly:
                        if poly & 1:
                            if self.graded and self.alex2[j] != self.alex2[i] - 2 * k:
                                raise GradingError(
                                    f"U^{k} term {self.gens[j]} -> {self.gens[i]} breaks the Alexander grading"
                                )
                            if self.maslov[i] == self.maslov[j]:
                                raise GradingError(
                                    f"d({self.gens[j]}) -> {self.gens[i]} does not flip Maslov parity"
                                )
                        poly >>= 1
                        k += 1
            if not self.diff.mul(self.diff).is_zero():
                raise NotAComplexError("d^2 != 0 over F2[U]")
        else:
            raise ValueError(f"unknown ring {self.ring!r}")

    @property
    def size(self) -> int:
        return len(self.gens)

    def alexander(self, j: int) -> Fraction:
        return Fraction(self.alex2[j], 2)


def _fmt_alex2(a2: int) -> str:
    return str(Fraction(a2, 2))


@dataclass(frozen=True)
class HomologyTable:
    """F2 homology ranks indexed by (doubled Alexander, Maslov parity)."""

    ranks: tuple[tuple[int, int, int], ...]  # (alex2, maslov, rank), sorted

    @classmethod
    def from_dict(cls, d: dict[tuple[int, int], int]) -> "HomologyTable":
        items = tuple(sorted((a, m, r) for (a, m), r in d.items() if r))
        return cls(items)

    def rank_at(self, alex2: int, maslov: int | None = None) -> int:
        return sum(
            r for (a, m, r) in self.ranks if a == alex2 and (maslov is None or m == maslov)
        )

    def total_rank(self) -> int:
        return sum(r for (_, _, r) in self.ranks)

    def by_alexander(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for a, _, r in self.ranks:
            out[a] = out.get(a, 0) + r
        return out

    def __str__(self):
        if not self.ranks:
            return "0"
        return " ".join(
            f"A={_fmt_alex2(a)},M={m}:F^{r}" for a, m, r in self.ranks
        )


def f2_homology(complex_: GradedChainComplex) -> HomologyTable:
    """Homology ranks of an F2 complex, per (Alexander, Maslov) grading."""
    if complex_.ring != RING_F2:
        raise ValueError("f2_homology expects an F2 complex")
    n = complex_.size
    gradings = sorted(set(zip(complex_.alex2, complex_.maslov)))
    ranks: dict[tuple[int, int], int] = {}
    for a, m in gradings:
        idx = [j for j in range(n) if complex_.alex2[j] == a and complex_.maslov[j] == m]
        # d restricted to this grading lands in (a, 1-m).
        cols_in = [complex_.diff.column(j) for j in idx]
        rank_out = len(row_reduce(cols_in)[0])
        tgt = [
            complex_.diff.column(j)
            for j in range(n)
            if complex_.alex2[j] == a and complex_.maslov[j] == 1 - m
        ]
        # Rank of the image inside this grading.
        mask = 0
        for j in idx:
            mask |= 1 << j
        imgs = [c & mask for c in tgt if c & mask]
        rank_in = len(row_reduce(imgs)[0])
        h = len(idx) - rank_out - rank_in
        if h:
            ranks[(a, m)] = h
    return HomologyTable.from_dict(ranks)


@dataclass(frozen=True)
class GradedFUModule:
    """Finitely presented graded F2[U]-module.

    ``towers`` lists (alex2_of_generator, maslov, count) for free F[U]
    summands; the generator grading is the top of a downward tower (U
    lowers Alexander by 1).  ``torsion`` lists (alex2_top, maslov,
    order, count) for F[U]/U^order summands, orders ascending in the
    canonical sort.
    """

    towers: tuple[tuple[int, int, int], ...]
    torsion: tuple[tuple[int, int, int, int], ...]

    @classmethod
    def build(
        cls,
        towers: list[tuple[int, int]],
        torsion: list[tuple[int, int, int]],
    ) -> "GradedFUModule":
        tw: dict[tuple[int, int], int] = {}
        for a, m in towers:
            tw[(a, m)] = tw.get((a, m), 0) + 1
        to: dict[tuple[int, int, int], int] = {}
        for a, m, k in torsion:
            if k < 1:
                raise ValueError("torsion order must be >= 1")
            to[(a, m, k)] = to.get((a, m, k), 0) + 1
        towers_t = tuple(sorted((a, m, c) for (a, m), c in tw.items()))
        torsion_t = tuple(
            sorted(((a, m, k, c) for (a, m, k), c in to.items()), key=lambda t: (t[0], t[2], t[1]))
        )
        return cls(towers_t, torsion_t)

    def is_zero(self) -> bool:
        return not self.towers and not self.torsion

    def free_rank(self) -> int:
        return sum(c for _, _, c in self.towers)

    def torsion_orders(self) -> list[int]:
        out: list[int] = []
        for _, _, k, c in self.torsion:
            out.extend([k] * c)
        return sorted(out)

    def tower_tops(self) -> list[tuple[int, int]]:
        out = []
        for a, m, c in self.towers:
            out.extend([(a, m)] * c)
        return out

    def rank_at_alexander(self, alex2: int, maslov: int | None = None) -> int:
        """F2-dimension of the module in one (Alexander, parity) grading."""
        total = 0
        for a, m, c in self.towers:
            if alex2 <= a and (a - alex2) % 2 == 0 and (maslov is None or m == maslov):
                total += c
        for a, m, k, c in self.torsion:
            if (
                alex2 <= a
                and (a - alex2) % 2 == 0
                and (a - alex2) // 2 < k
                and (maslov is None or m == maslov)
            ):
                total += c
        return total

    def __str__(self):
        if self.is_zero():
            return "0"
        parts = []
        for a, m, c in self.towers:
            s = f"F[U](A_top={_fmt_alex2(a)},M={m})"
            parts.append(s if c == 1 else f"{s}^{c}")
        for a, m, k, c in self.torsion:
            s = f"F[U]/U^{k}(A_top={_fmt_alex2(a)},M={m})"
            parts.append(s if c == 1 else f"{s}^{c}")
        return " + ".join(parts)


def _slice_basis(
    complex_: GradedChainComplex, alex2: int, maslov: int
) -> list[tuple[int, int]]:
    """Generators (gen index, U power) of the slice at one grading."""
    out = []
    for j in range(complex_.size):
        k2 = complex_.alex2[j] - alex2
        if k2 >= 0 and k2 % 2 == 0 and complex_.maslov[j] == maslov:
            out.append((j, k2 // 2))
    return out


def _slice_differential(
    complex_: GradedChainComplex,
    src: list[tuple[int, int]],
    tgt: list[tuple[int, int]],
) -> F2Matrix:
    """Matrix of d from one (Alexander, Maslov) slice to the opposite parity."""
    index = {gk: i for i, gk in enumerate(tgt)}
    mat = F2Matrix(len(tgt), len(src))
    d = complex_.diff
    for col, (j, k) in enumerate(src):
        for i in range(complex_.size):
            poly = d.data[i][j]
            kk = 0
            while poly:
                if poly & 1:
                    row = index.get((i, k + kk))
                    if row is not None:
                        mat.data[row] |= 1 << col
                poly >>= 1
                kk += 1
    return mat


def f2u_module_homology(complex_: GradedChainComplex) -> GradedFUModule:
    """Homology of an F2[U] complex as a graded F[U]-module.

    Works slice by slice in the (Alexander, Maslov) bigrading (each
    slice is a finite F2 vector space, d maps it to the opposite
    parity), then classifies the degree -1 U-action into free towers
    and U-power torsion.  The ungraded invariant factors are recomputed
    through :func:`snf_over_f2u` as an independent cross-check.
    """
    if complex_.ring != RING_F2U:
        raise ValueError("f2u_module_homology expects an F2[U] complex")
    if complex_.size == 0:
        return GradedFUModule.build([], [])

    amax = max(complex_.alex2)
    amin = min(complex_.alex2)
    # Below every generator the U-translation is a bijection on slice
    # bases commuting with d, so homology is U-periodic: one slice below
    # the lowest generator per lattice class is a stable floor.
    lattice = sorted(set(range(amin - 2, amax + 1, 2)) | set(range(amin - 1, amax + 1, 2)))
    lattice = [a for a in lattice if a >= amin - 2]

    slices: dict[tuple[int, int], list[tuple[int, int]]] = {}
    for a in lattice:
        for m in (0, 1):
            slices[(a, m)] = _slice_basis(complex_, a, m)

    hom_bases: dict[tuple[int, int], list[int]] = {}
    bdry_data: dict[tuple[int, int], tuple[list[int], list[int]]] = {}
    for a in lattice:
        for m in (0, 1):
            d_out = _slice_differential(complex_, slices[(a, m)], slices[(a, 1 - m)])
            d_in = _slice_differential(complex_, slices[(a, 1 - m)], slices[(a, m)])
            cycles = nullspace(d_out)
            bbasis, bpiv = row_reduce([d_in.column(j) for j in range(d_in.cols)])
            bdry_data[(a, m)] = (bbasis, bpiv)
            hbasis: list[int] = []
            span, piv = list(bbasis), list(bpiv)
            for c in cycles:
                r = reduce_against(c, span, piv)
                if r:
                    hbasis.append(r)
                    p = r.bit_length() - 1
                    k = 0
                    while k < len(piv) and piv[k] > p:
                        k += 1
                    span.insert(k, r)
                    piv.insert(k, p)
            hom_bases[(a, m)] = hbasis

    def u_matrix(a: int, m: int) -> F2Matrix:
        """Induced map on homology from slice (a, m) to (a-2, m)."""
        src = hom_bases[(a, m)]
        tgt_basis = hom_bases.get((a - 2, m), [])
        tgt_slice = slices.get((a - 2, m), [])
        index = {gk: i for i, gk in enumerate(tgt_slice)}
        bbasis, bpiv = bdry_data.get((a - 2, m), ([], []))
        mat = F2Matrix(len(tgt_basis), len(src))
        for col, vec in enumerate(src):
            shifted = 0
            v = vec
            while v:
                low = v & -v
                i = low.bit_length() - 1
                v ^= low
                j, k = slices[(a, m)][i]
                shifted |= 1 << index[(j, k + 1)]
            coords = _express_in_homology(shifted, tgt_basis, bbasis, bpiv)
            for r in range(len(tgt_basis)):
                if (coords >> r) & 1:
                    mat.data[r] |= 1 << col
        return mat

    u_maps = {
        (a, m): u_matrix(a, m)
        for a in lattice
        for m in (0, 1)
        if (a - 2, m) in hom_bases
    }

    towers: list[tuple[int, int]] = []
    torsion: list[tuple[int, int, int]] = []

    for par in (0, 1):
        lat = [a for a in lattice if a & 1 == par]
        if not lat:
            continue
        floor = min(lat)
        for m in (0, 1):
            def rank_u_power(a: int, steps: int) -> int:
                # Below the floor U is a slice bijection, hence injective
                # on homology: extra steps do not change the rank.
                steps = min(steps, max((a - floor) // 2, 0))
                if steps <= 0:
                    return len(hom_bases.get((a, m), []))
                mat = None
                cur = a
                for _ in range(steps):
                    if (cur, m) not in u_maps:
                        return 0
                    step = u_maps[(cur, m)]
                    mat = step if mat is None else step.mul(mat)
                    cur -= 2
                return mat.rank()

            through = {a: rank_u_power(a, (a - floor) // 2) for a in lat}
            for a in lat:
                for _ in range(max(through[a] - through.get(a + 2, 0), 0)):
                    towers.append((a, m))
            maxlen = (max(lat) - floor) // 2 + 1
            d_rank = {(a, j): rank_u_power(a, j) for a in lat for j in range(maxlen + 2)}

            def e(a: int, j: int) -> int:
                # Torsion-only rank of U^j out of grading a: towers
                # contribute their full count to every power of U.
                return d_rank.get((a, j), 0) - through.get(a, 0)

            for a in lat:
                for j in range(maxlen):
                    n_blocks = (e(a, j) - e(a, j + 1)) - (e(a + 2, j + 1) - e(a + 2, j + 2))
                    for _ in range(max(n_blocks, 0)):
                        torsion.append((a, m, j + 1))

    result = GradedFUModule.build(towers, torsion)
    _crosscheck_with_snf(complex_, result)
    return result


def _express_in_homology(
    vec: int, hom_basis: list[int], bbasis: list[int], bpiv: list[int]
) -> int:
    """Coordinates of a cycle in a homology basis (mod boundaries)."""
    span = list(bbasis)
    piv = list(bpiv)
    tags: list[int] = [0] * len(span)
    for idx, h in enumerate(hom_basis):
        r, t = h, 1 << idx
        for b, p, tg in zip(span, piv, tags):
            if r and (r >> p) & 1:
                r ^= b
                t ^= tg
        if r:
            p = r.bit_length() - 1
            k = 0
            while k < len(piv) and piv[k] > p:
                k += 1
            span.insert(k, r)
            piv.insert(k, p)
            tags.insert(k, t)
    out = 0
    r, t = vec, 0
    for b, p, tg in zip(span, piv, tags):
        if r and (r >> p) & 1:
            r ^= b
            t ^= tg
    if r:
        raise ValueError("vector is not a cycle modulo boundaries")
    return t


def _crosscheck_with_snf(complex_: GradedChainComplex, result: GradedFUModule) -> None:
    """Ungraded oracle: invariant factors of the homology via SNF."""
    n = complex_.size
    d = complex_.diff
    form = snf_over_f2u(d)
    # Kernel basis: columns Q e_t for zero factors plus the free tail.
    kernel_cols = []
    for t in range(n):
        if t >= len(form.factors) or form.factors[t] == 0:
            kernel_cols.append([form.q.data[i][t] for i in range(n)])
    # Image generators: d applied to the standard basis.
    img_cols = [[d.data[i][j] for i in range(n)] for j in range(n)]
    # Express image columns in the kernel basis: solve K x = img over F2[U].
    # K has full column rank; use SNF of K.
    k = len(kernel_cols)
    kmat = F2UMatrix(n, k, [[kernel_cols[c][i] for c in range(k)] for i in range(n)])
    kform = snf_over_f2u(kmat)
    rel_cols = []
    for col in img_cols:
        if all(e == 0 for e in col):
            continue
        # Solve K x = col:  P K Q = D  =>  x = Q y with D y = P col.
        pcol = [0] * n
        for i in range(n):
            acc = 0
            for j in range(n):
                if kform.p.data[i][j] and col[j]:
                    acc ^= f2poly.pmul(kform.p.data[i][j], col[j])
            pcol[i] = acc
        y = [0] * k
        for t in range(k):
            dt = kform.factors[t] if t < len(kform.factors) else 0
            if dt == 0:
                if pcol[t] != 0:
                    raise AssertionError("image not contained in kernel")
                continue
            y[t] = f2poly.pdiv(pcol[t], dt)
        for t in range(k, n):
            if pcol[t] != 0:
                raise AssertionError("image not contained in kernel")
        x = [0] * k
        for i in range(k):
            acc = 0
            for j in range(k):
                if kform.q.data[i][j] and y[j]:
                    acc ^= f2poly.pmul(kform.q.data[i][j], y[j])
            x[i] = acc
        rel_cols.append(x)
    if rel_cols:
        rel = F2UMatrix(k, len(rel_cols), [[c[i] for c in rel_cols] for i in range(k)])
        rform = snf_over_f2u(rel)
        factors = [f for f in rform.factors if f != 0]
    else:
        factors = []
    free_rank = k - len(factors)
    orders = []
    for f in factors:
        if f == 1:
            continue
        # Graded homology of these complexes only has monomial factors.
        if f != f2poly.umono(f2poly.u_order(f)):
            raise AssertionError("non-monomial invariant factor in graded homology")
        orders.append(f2poly.u_order(f))
    if free_rank != result.free_rank() or sorted(orders) != result.torsion_orders():
        raise AssertionError(
            "graded homology disagrees with SNF oracle: "
            f"free {result.free_rank()} vs {free_rank}, "
            f"torsion {result.torsion_orders()} vs {sorted(orders)}"
        )
