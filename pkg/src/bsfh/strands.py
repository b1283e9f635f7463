"""Arc diagrams and their strands DG-algebras over F2.

An arc diagram is a collection of oriented arcs carrying 2k marked
points with a 2-to-1 matching.  The associated algebra has a canonical
basis of constrained strand pictures a(rho, s): a set of upward-moving
chords rho plus a sum over all horizontal placements ("sections") of a
completion set s of matched indices.  Multiplication concatenates
strands when inversion counts add; the differential resolves one
crossing at a time.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

from .report import Report


class BadMatchingError(ValueError):
    pass


class ClosedComponentError(ValueError):
    pass


class BadSubsetError(ValueError):
    pass


class IncompatibleChordsError(ValueError):
    pass


class AlgebraMismatchError(ValueError):
    pass


@dataclass(frozen=True)
class ArcDiagram:
    """Oriented arcs with marked points and a 2-to-1 matching.

    ``arcs`` lists the point names along each arc in its orientation
    order; ``matching`` maps point names onto {1..k}.  Construction
    validates the matching and the no-closed-component condition for
    surgery on the matched 0-spheres.
    """

    arcs: tuple[tuple[str, ...], ...]
    matching: tuple[tuple[str, int], ...]

    def __post_init__(self):
        match = dict(self.matching)
        points = [p for arc in self.arcs for p in arc]
        if len(set(points)) != len(points):
            raise BadMatchingError("duplicate point names")
        if set(match) != set(points):
            raise BadMatchingError("matching must cover the points exactly")
        counts: dict[int, int] = {}
        for v in match.values():
            counts[v] = counts.get(v, 0) + 1
        if sorted(counts) != list(range(1, len(counts) + 1)) or any(
            c != 2 for c in counts.values()
        ):
            raise BadMatchingError("matching must be 2-to-1 onto {1..k}")
        if len(points) != 2 * len(counts):
            raise BadMatchingError("need exactly 2k points")
        self._check_no_closed_components(match)

    def _check_no_closed_components(self, match: dict[str, int]) -> None:
        # Each arc with points p_1..p_m has segments s_0..s_m; oriented
        # 0-surgery on a matched pair {p, q} reconnects the segment
        # entering p to the one leaving q and vice versa.  Trace all
        # successor chains; any cycle is a closed component.
        seg_in: dict[str, tuple[int, int]] = {}
        seg_out: dict[str, tuple[int, int]] = {}
        starts = []
        n_segments: dict[int, int] = {}
        for a, arc in enumerate(self.arcs):
            n_segments[a] = len(arc) + 1
            starts.append((a, 0))
            for i, p in enumerate(arc):
                seg_in[p] = (a, i)
                seg_out[p] = (a, i + 1)
        successor: dict[tuple[int, int], tuple[int, int]] = {}
        pairs: dict[int, list[str]] = {}
        for p, v in match.items():
            pairs.setdefault(v, []).append(p)
        for p, q in pairs.values():
            successor[seg_in[p]] = seg_out[q]
            successor[seg_in[q]] = seg_out[p]
        visited = set()
        for start in starts:
            seg = start
            while True:
                if seg in visited:
                    raise ClosedComponentError(
                        "surgery on the matching produces a closed component"
                    )
                visited.add(seg)
                if seg not in successor:
                    break
                seg = successor[seg]
        total = sum(n_segments.values())
        if len(visited) != total:
            raise ClosedComponentError(
                "surgery on the matching produces a closed component"
            )

    @property
    def k(self) -> int:
        return sum(len(a) for a in self.arcs) // 2

    @property
    def points(self) -> tuple[str, ...]:
        return tuple(p for arc in self.arcs for p in arc)

    def arc_of(self, p: str) -> int:
        for a, arc in enumerate(self.arcs):
            if p in arc:
                return a
        raise KeyError(p)

    def position(self, p: str) -> tuple[int, int]:
        for a, arc in enumerate(self.arcs):
            if p in arc:
                return (a, arc.index(p))
        raise KeyError(p)

    def match_of(self, p: str) -> int:
        return dict(self.matching)[p]

    def chords(self) -> tuple[tuple[str, str], ...]:
        """All Reeb chords: ordered same-arc point pairs (start, end)."""
        out = []
        for arc in self.arcs:
            for i in range(len(arc)):
                for j in range(i + 1, len(arc)):
                    out.append((arc[i], arc[j]))
        return tuple(out)


def make_arc_diagram(
    arcs: list[list[str]] | tuple, matching: dict[str, int]
) -> ArcDiagram:
    """Validated construction from plain containers."""
    return ArcDiagram(
        tuple(tuple(a) for a in arcs), tuple(sorted(matching.items()))
    )


@dataclass(frozen=True, order=True)
class StrandDiagram:
    """One basis strand picture (S, T, phi) of the extended algebra.

    ``pairing`` lists (source, target) point pairs sorted by source
    position; horizontal strands are the pairs with source == target.
    """

    pairing: tuple[tuple[str, str], ...]

    @property
    def source(self) -> frozenset[str]:
        return frozenset(s for s, _ in self.pairing)

    @property
    def target(self) -> frozenset[str]:
        return frozenset(t for _, t in self.pairing)

    def moving(self) -> tuple[tuple[str, str], ...]:
        return tuple((s, t) for s, t in self.pairing if s != t)

    def horizontals(self) -> tuple[str, ...]:
        return tuple(s for s, t in self.pairing if s == t)


class StrandsAlgebra:
    """The bordered strands algebra of an arc diagram.

    The basis of summand i consists of the elements a(rho, s) for every
    i-compatible chord collection rho and completion s.  Elements are
    F2-sums of strand diagrams; all operations canonicalize back into
    the a(rho, s) basis.
    """

    def __init__(self, diagram: ArcDiagram, name: str, chord_names: dict[tuple[str, str], str] | None = None):
        self.diagram = diagram
        self.name = name
        self._pos = {p: diagram.position(p) for p in diagram.points}
        self._match = dict(diagram.matching)
        self.k = diagram.k
        self.chord_names = dict(chord_names or {})
        self._chord_by_name = {v: k for k, v in self.chord_names.items()}
        self._build_basis()

    # -- basis construction -------------------------------------------------

    def _sections(self, s: frozenset[int]) -> list[frozenset[str]]:
        choices = []
        for v in sorted(s):
            pts = sorted(p for p, m in self._match.items() if m == v)
            choices.append(pts)
        return [frozenset(c) for c in itertools.product(*choices)] if s else [frozenset()]

    def _chord_ok(self, chords: tuple[tuple[str, str], ...]) -> bool:
        starts = [c[0] for c in chords]
        ends = [c[1] for c in chords]
        mstarts = [self._match[p] for p in starts]
        mends = [self._match[p] for p in ends]
        return len(set(mstarts)) == len(mstarts) and len(set(mends)) == len(mends)

    def _diagrams_for(self, chords, section) -> StrandDiagram:
        pairing = [(s, t) for s, t in chords] + [(p, p) for p in section]
        pairing.sort(key=lambda st: self._pos[st[0]])
        return StrandDiagram(tuple(pairing))

    def _build_basis(self) -> None:
        diag = self.diagram
        all_chords = diag.chords()
        self.basis: dict[int, list["AlgebraElement"]] = {}
        self._by_key: dict[tuple, "AlgebraElement"] = {}
        self._names: dict[tuple, str] = {}
        for i in range(self.k + 1):
            elements = []
            for n in range(0, i + 1):
                for chords in itertools.combinations(all_chords, n):
                    if not self._chord_ok(chords):
                        continue
                    used = {self._match[c[0]] for c in chords} | {
                        self._match[c[1]] for c in chords
                    }
                    if len(used) > self.k - (i - n):
                        continue
                    avail = sorted(set(range(1, self.k + 1)) - used)
                    for s in itertools.combinations(avail, i - n):
                        el = self._make_basis_element(chords, frozenset(s))
                        elements.append(el)
            self.basis[i] = elements
        self._install_names()

    def _key(self, chords: tuple[tuple[str, str], ...], s: frozenset[int]) -> tuple:
        return (tuple(sorted(chords)), tuple(sorted(s)))

    def _make_basis_element(self, chords, s: frozenset[int]) -> "AlgebraElement":
        chords = tuple(sorted(chords))
        diagrams = frozenset(
            self._diagrams_for(chords, sec) for sec in self._sections(s)
        )
        el = AlgebraElement(self, diagrams)
        self._by_key[self._key(chords, s)] = el
        return el

    def _install_names(self) -> None:
        for (chords, s), el in list(self._by_key.items()):
            if not chords:
                name = "I_" + "".join(str(v) for v in s)
            else:
                parts = [self.chord_name(c) for c in sorted(chords, key=lambda c: self._pos[c[0]], reverse=True)]
                name = "*".join(parts)
                if s:
                    name += ":" + "".join(str(v) for v in s)
            self._names[(chords, s)] = name

    def chord_name(self, chord: tuple[str, str]) -> str:
        if chord in self.chord_names:
            return self.chord_names[chord]
        return f"c[{chord[0]}-{chord[1]}]"

    def chord_by_name(self, name: str) -> tuple[str, str]:
        if name in self._chord_by_name:
            return self._chord_by_name[name]
        raise KeyError(f"unknown chord {name!r} in algebra {self.name}")

    # -- elements ------------------------------------------------------------

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, frozenset())

    def element(self, diagrams: frozenset[StrandDiagram]) -> "AlgebraElement":
        """Canonicalize an F2-sum of diagrams, checking membership."""
        groups: dict[tuple, set[StrandDiagram]] = {}
        for d in diagrams:
            src, tgt = d.source, d.target
            msrc = [self._match[p] for p in src]
            mtgt = [self._match[p] for p in tgt]
            if len(set(msrc)) != len(msrc) or len(set(mtgt)) != len(mtgt):
                raise AlgebraMismatchError(
                    "diagram source or target is not a section (not in the sandwich algebra)"
                )
            key = self._key(d.moving(), frozenset(self._match[p] for p in d.horizontals()))
            groups.setdefault(key, set()).add(d)
        for key, ds in groups.items():
            expected = self._by_key.get(key)
            if expected is None or ds != set(expected.diagrams):
                raise AlgebraMismatchError(
                    "diagram sum is not a combination of a(rho, s) basis elements"
                )
        return AlgebraElement(self, frozenset(diagrams))

    def basis_keys(self, el: "AlgebraElement") -> list[tuple]:
        """Decompose an element into canonical basis keys."""
        groups: dict[tuple, set[StrandDiagram]] = {}
        for d in el.diagrams:
            key = self._key(d.moving(), frozenset(self._match[p] for p in d.horizontals()))
            groups.setdefault(key, set()).add(d)
        return sorted(groups)

    def element_name(self, el: "AlgebraElement") -> str:
        if not el.diagrams:
            return "0"
        return "+".join(self._names[k] for k in self.basis_keys(el))

    def summand_of(self, el: "AlgebraElement") -> int:
        sizes = {len(d.pairing) for d in el.diagrams}
        if len(sizes) != 1:
            raise ValueError("element is not homogeneous in a single summand")
        return sizes.pop()

    def left_idempotent_set(self, el: "AlgebraElement") -> frozenset[int]:
        sets = {
            frozenset(self._match[p] for p in d.source) for d in el.diagrams
        }
        if len(sets) != 1:
            raise ValueError("element has no single left idempotent")
        return sets.pop()

    def right_idempotent_set(self, el: "AlgebraElement") -> frozenset[int]:
        sets = {
            frozenset(self._match[p] for p in d.target) for d in el.diagrams
        }
        if len(sets) != 1:
            raise ValueError("element has no single right idempotent")
        return sets.pop()

    def is_idempotent_element(self, el: "AlgebraElement") -> bool:
        return all(not d.moving() for d in el.diagrams)

    # -- named accessors -----------------------------------------------------

    def idempotent_for(self, s) -> "AlgebraElement":
        s = frozenset(s)
        if not s <= set(range(1, self.k + 1)):
            raise BadSubsetError(f"subset {sorted(s)} not within 1..{self.k}")
        return self._by_key[self._key((), s)]

    def one(self, i: int) -> "AlgebraElement":
        """Unit of summand i: the sum of I_s over |s| = i."""
        total = self.zero()
        for s in itertools.combinations(range(1, self.k + 1), i):
            total = total + self.idempotent_for(frozenset(s))
        return total

    def chord_element(self, chords, i: int) -> "AlgebraElement":
        """The element a_i(rho): sum of a(rho, s) over all i-completions."""
        chords = tuple(sorted(tuple(c) for c in chords))
        for s, t in chords:
            if s == t:
                raise IncompatibleChordsError("constant chord")
            (a1, p1) = self._pos[s]
            (a2, p2) = self._pos[t]
            if a1 != a2 or p2 <= p1:
                raise IncompatibleChordsError(f"({s},{t}) is not an upward chord")
        if not self._chord_ok(chords):
            raise IncompatibleChordsError("matched endpoints collide")
        used = {self._match[c[0]] for c in chords} | {self._match[c[1]] for c in chords}
        n = len(chords)
        if len(used) > self.k - (i - n) or i < n:
            raise IncompatibleChordsError(f"chords are not {i}-compatible")
        avail = sorted(set(range(1, self.k + 1)) - used)
        total = self.zero()
        for s in itertools.combinations(avail, i - n):
            total = total + self._by_key[self._key(chords, frozenset(s))]
        return total

    def named(self, name: str) -> "AlgebraElement":
        for key, nm in self._names.items():
            if nm == name:
                return self._by_key[key]
        raise KeyError(f"no basis element named {name!r} in {self.name}")

    def all_basis(self) -> list["AlgebraElement"]:
        return [el for i in sorted(self.basis) for el in self.basis[i]]

    def __repr__(self):
        dims = {i: len(b) for i, b in self.basis.items()}
        return f"StrandsAlgebra({self.name}, k={self.k}, dims={dims})"


@dataclass(frozen=True)
class AlgebraElement:
    """F2-linear combination of strand diagrams in a fixed algebra."""

    algebra: StrandsAlgebra
    diagrams: frozenset[StrandDiagram]

    def __eq__(self, other):
        return (
            isinstance(other, AlgebraElement)
            and self.algebra.name == other.algebra.name
            and self.diagrams == other.diagrams
        )

    def __hash__(self):
        return hash((self.algebra.name, self.diagrams))

    def is_zero(self) -> bool:
        return not self.diagrams

    def __add__(self, other: "AlgebraElement") -> "AlgebraElement":
        if self.algebra is not other.algebra:
            raise AlgebraMismatchError("sum across different algebras")
        return AlgebraElement(self.algebra, self.diagrams ^ other.diagrams)

    def __mul__(self, other: "AlgebraElement") -> "AlgebraElement":
        return multiply(self, other)

    def __str__(self):
        return self.algebra.element_name(self)

    __repr__ = __str__


def _inv(pos, pairing) -> int:
    count = 0
    pts = list(pairing)
    for (s1, t1), (s2, t2) in itertools.combinations(pts, 2):
        a1, p1 = pos[s1]
        a2, p2 = pos[s2]
        if a1 != a2:
            continue
        if p1 > p2:
            (s1, t1), (s2, t2) = (s2, t2), (s1, t1)
        if pos[t1][1] > pos[t2][1]:
            count += 1
    return count


def _compose_diagrams(pos, x: StrandDiagram, y: StrandDiagram) -> StrandDiagram | None:
    if x.target != y.source:
        return None
    follow = dict(y.pairing)
    pairing = tuple(sorted(((s, follow[t]) for s, t in x.pairing), key=lambda st: pos[st[0]]))
    composed = StrandDiagram(pairing)
    if _inv(pos, x.pairing) + _inv(pos, y.pairing) != _inv(pos, composed.pairing):
        return None
    return composed


def multiply(x: AlgebraElement, y: AlgebraElement) -> AlgebraElement:
    """Bilinear extension of strand concatenation."""
    if x.algebra is not y.algebra:
        raise AlgebraMismatchError(
            f"cannot multiply across algebras {x.algebra.name} and {y.algebra.name}"
        )
    alg = x.algebra
    pos = alg._pos
    acc: set[StrandDiagram] = set()
    for dx in x.diagrams:
        for dy in y.diagrams:
            z = _compose_diagrams(pos, dx, dy)
            if z is not None:
                acc ^= {z}
    return alg.element(frozenset(acc))


def differentiate(x: AlgebraElement) -> AlgebraElement:
    """Sum over single-crossing resolutions dropping inv by exactly one."""
    alg = x.algebra
    pos = alg._pos
    acc: set[StrandDiagram] = set()
    for d in x.diagrams:
        base_inv = _inv(pos, d.pairing)
        pairs = list(d.pairing)
        for i, j in itertools.combinations(range(len(pairs)), 2):
            (s1, t1), (s2, t2) = pairs[i], pairs[j]
            if pos[s1][0] != pos[s2][0]:
                continue
            # Order by source position and test for an inversion.
            if pos[s1][1] > pos[s2][1]:
                (s1, t1), (s2, t2) = (s2, t2), (s1, t1)
            if pos[t1][1] <= pos[t2][1]:
                continue
            resolved = list(pairs)
            resolved[i] = (pairs[i][0], pairs[j][1])
            resolved[j] = (pairs[j][0], pairs[i][1])
            resolved.sort(key=lambda st: pos[st[0]])
            nd = StrandDiagram(tuple(resolved))
            if _inv(pos, nd.pairing) == base_inv - 1:
                acc ^= {nd}
    return alg.element(frozenset(acc))


def verify_dg_algebra(alg: StrandsAlgebra) -> Report:
    """Exhaustive DG-algebra check over the full finite basis."""
    failures: list[str] = []
    basis = alg.all_basis()

    for a in basis:
        dda = differentiate(differentiate(a))
        if not dda.is_zero():
            failures.append(f"d^2 != 0 on {a}")
            break

    for a in basis:
        for b in basis:
            lhs = differentiate(multiply(a, b))
            rhs = multiply(differentiate(a), b) + multiply(a, differentiate(b))
            if lhs != rhs:
                failures.append(f"Leibniz fails on ({a})({b})")
                break
        else:
            continue
        break

    for a in basis:
        for b in basis:
            ab = multiply(a, b)
            if ab.is_zero():
                continue
            for c in basis:
                if multiply(ab, c) != multiply(a, multiply(b, c)):
                    failures.append(f"associativity fails on ({a})({b})({c})")
                    break
            else:
                continue
            break
        else:
            continue
        break

    for i in sorted(alg.basis):
        unit = alg.one(i)
        for a in alg.basis[i]:
            if multiply(unit, a) != a or multiply(a, unit) != a:
                failures.append(f"unit of summand {i} fails on {a}")
                break

    # Orthogonality of idempotents.
    for s in _subsets(alg.k):
        for t in _subsets(alg.k):
            prod = multiply(alg.idempotent_for(s), alg.idempotent_for(t))
            if s == t:
                if prod != alg.idempotent_for(s):
                    failures.append(f"I_{sorted(s)} is not idempotent")
            elif not prod.is_zero():
                failures.append(f"I_{sorted(s)} I_{sorted(t)} != 0")

    return Report(f"dg-algebra {alg.name}", tuple(failures))


def _subsets(k: int):
    out = []
    for i in range(k + 1):
        out.extend(frozenset(c) for c in itertools.combinations(range(1, k + 1), i))
    return out


# ---------------------------------------------------------------------------
# The three named algebras


@lru_cache(maxsize=None)
def algebra_wd() -> StrandsAlgebra:
    """Sutured-disk algebra: one chord rho between a2 and a3."""
    diagram = make_arc_diagram(
        [["a1"], ["a2", "a3"], ["a4"]],
        {"a1": 2, "a2": 2, "a3": 1, "a4": 1},
    )
    return StrandsAlgebra(diagram, "WD", {("a2", "a3"): "rho"})


@lru_cache(maxsize=None)
def algebra_wa() -> StrandsAlgebra:
    """Sutured-annulus algebra: chords rho_1, rho_2, rho_12."""
    diagram = make_arc_diagram(
        [["a1"], ["a2", "a3", "a4"]],
        {"a1": 2, "a2": 1, "a3": 2, "a4": 1},
    )
    return StrandsAlgebra(
        diagram,
        "WA",
        {("a2", "a3"): "rho_1", ("a3", "a4"): "rho_2", ("a2", "a4"): "rho_12"},
    )


@lru_cache(maxsize=None)
def algebra_wt() -> StrandsAlgebra:
    """Punctured-torus algebra: six chords, equivalent to the torus algebra."""
    diagram = make_arc_diagram(
        [["a1", "a2", "a3", "a4"]],
        {"a1": 2, "a2": 1, "a3": 2, "a4": 1},
    )
    return StrandsAlgebra(
        diagram,
        "WT",
        {
            ("a1", "a2"): "rho_1",
            ("a2", "a3"): "rho_2",
            ("a3", "a4"): "rho_3",
            ("a1", "a3"): "rho_12",
            ("a2", "a4"): "rho_23",
            ("a1", "a4"): "rho_123",
        },
    )


_NAMED = {"WD": algebra_wd, "WA": algebra_wa, "WT": algebra_wt}


def named_algebra(name: str) -> StrandsAlgebra:
    try:
        return _NAMED[name.upper()]()
    except KeyError:
        raise KeyError(f"unknown algebra {name!r}; expected WD, WA or WT") from None
