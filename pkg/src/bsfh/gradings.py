"""Alexander offsets and Z/2 Maslov bookkeeping for the named algebras.

Alexander weights are uniform: every elementary chord segment weighs
1/2 (stored doubled, so 1), making w(rho_2) = w(rho_3) = 1/2 and
w(rho_23) = 1.  A Type-D term y -> U^u a (x) x satisfies

    A(y) = A(x) - u + w(a),

so multiplication by U lowers Alexander by one and the self-loop of
the K-minus tower is homogeneous.

The Z/2 Maslov grading assigns each elementary segment a parity weight
g; a differential term flips parity after accounting for g, a chain
map preserves it.  The weights below are the lexicographically least
solution of the constraint system generated by the whole catalog (the
U-towers force g(rho_23) = g(rho_12 in WA) = 1); consistency of every
entry against them is the machine-checked 2-coloring.
"""

from __future__ import annotations

from .strands import AlgebraElement

# Parity weight of each elementary segment (consecutive marked points
# on one arc), per named algebra.
_PARITY_SEGMENTS = {
    "WT": {("a1", "a2"): 0, ("a2", "a3"): 0, ("a3", "a4"): 1},
    "WA": {("a2", "a3"): 1, ("a3", "a4"): 0},
    "WD": {("a2", "a3"): 0},
}


def _segments_of_chord(alg, chord: tuple[str, str]) -> list[tuple[str, str]]:
    arc = alg.diagram.arcs[alg.diagram.arc_of(chord[0])]
    i, j = arc.index(chord[0]), arc.index(chord[1])
    return [(arc[t], arc[t + 1]) for t in range(i, j)]


def alexander_weight2(el: AlgebraElement) -> int:
    """Doubled Alexander weight: number of elementary segments spanned."""
    keys = el.algebra.basis_keys(el)
    weights = set()
    for chords, _ in keys:
        w = sum(len(_segments_of_chord(el.algebra, c)) for c in chords)
        weights.add(w)
    if len(weights) != 1:
        raise ValueError(f"element {el} is not Alexander homogeneous")
    return weights.pop()


def parity_weight(el: AlgebraElement) -> int:
    """Z/2 Maslov weight of a basis element (sum over segments)."""
    table = _PARITY_SEGMENTS.get(el.algebra.name)
    if table is None:
        raise ValueError(f"no parity weights for algebra {el.algebra.name}")
    keys = el.algebra.basis_keys(el)
    weights = set()
    for chords, _ in keys:
        g = 0
        for c in chords:
            for seg in _segments_of_chord(el.algebra, c):
                g ^= table[seg]
        weights.add(g)
    if len(weights) != 1:
        raise ValueError(f"element {el} is not parity homogeneous")
    return weights.pop()


# ---------------------------------------------------------------------------
# Validation of stored labels


def check_type_d_gradings(n, check_alexander: bool = True) -> list[str]:
    """Grading consistency of a labeled Type-D structure.

    Every delta term must flip Maslov parity (with the chord weight
    counted) and, when Alexander labels are present, drop Alexander by
    its chord weight minus the U-power.
    """
    problems = []
    for g in n.generators:
        for coef, u, tgt in n.terms(g):
            if check_alexander and g in n.alex2 and tgt in n.alex2:
                expect = n.alex2[tgt] - 2 * u + alexander_weight2(coef)
                if n.alex2[g] != expect:
                    problems.append(
                        f"Alexander: delta({g}) term {coef} (x) {tgt} off by "
                        f"{(n.alex2[g] - expect) / 2}"
                    )
            if g in n.maslov and tgt in n.maslov:
                if n.maslov[tgt] != (n.maslov[g] ^ 1 ^ parity_weight(coef)):
                    problems.append(
                        f"Maslov: delta({g}) term {coef} (x) {tgt} does not flip parity"
                    )
    return problems


def morphism_alexander_degree2(phi) -> int | None:
    """Doubled Alexander degree of a labeled morphism; None if unlabeled."""
    degrees = set()
    for g in phi.source.generators:
        for coef, u, tgt in phi.terms(g):
            if g in phi.source.alex2 and tgt in phi.target.alex2:
                deg = phi.target.alex2[tgt] - 2 * u + alexander_weight2(coef) - phi.source.alex2[g]
                degrees.add(deg)
    if not degrees:
        return None
    if len(degrees) != 1:
        raise ValueError(f"morphism {phi.name} is not Alexander homogeneous: {degrees}")
    return degrees.pop()


def check_morphism_parity(phi, degree: int = 0) -> list[str]:
    """Morphism terms must shift Z/2 Maslov by the stated degree.

    Stabilization, SV, 2-handle and inverse-tower maps are all degree
    0 (basic slices have even contact-invariant grading); the cone
    inclusion of the bypass triangle shifts by 1.
    """
    problems = []
    for g in phi.source.generators:
        for coef, _, tgt in phi.terms(g):
            if g in phi.source.maslov and tgt in phi.target.maslov:
                if phi.target.maslov[tgt] != (phi.source.maslov[g] ^ parity_weight(coef) ^ (degree & 1)):
                    problems.append(
                        f"{phi.name}({g}) term {coef} (x) {tgt} has wrong Z/2 Maslov degree"
                    )
    return problems


def check_ainf_gradings(m) -> list[str]:
    """Fixture rule: each m_k term changes A by the summed chord weights
    and flips parity once (through the box pairing bookkeeping)."""
    problems = []
    for (g, inputs), outs in m.ops.items():
        w2 = sum(alexander_weight2(a) for a in inputs)
        gpar = 0
        for a in inputs:
            gpar ^= parity_weight(a)
        flip = (1 + len(inputs) + gpar) & 1
        for out in outs:
            if g in m.alex2 and out in m.alex2:
                if m.alex2[out] != m.alex2[g] + w2:
                    problems.append(
                        f"Alexander: m({g}; {', '.join(map(str, inputs))}) -> {out}"
                    )
            if g in m.maslov and out in m.maslov:
                if m.maslov[out] != (m.maslov[g] ^ flip):
                    problems.append(
                        f"Maslov: m({g}; {', '.join(map(str, inputs))}) -> {out}"
                    )
    return problems


def check_da_parities(b, left_parity: dict, right_parity_module=None) -> list[str]:
    """DA-term parity rule against a chosen generator 2-coloring."""
    problems = []
    for (g, inputs), terms in b.ops.items():
        gpar = 0
        for a in inputs:
            gpar ^= parity_weight(a)
        for coef, out in terms:
            delta = (1 + len(inputs) + gpar + parity_weight(coef)) & 1
            if left_parity[out] != (left_parity[g] ^ delta):
                problems.append(
                    f"DA parity: m(({g}; {', '.join(map(str, inputs))})) -> {coef} (x) {out}"
                )
    return problems


def two_coloring(n) -> dict | None:
    """A parity assignment satisfying every delta-term flip, or None.

    BFS 2-coloring of the delta graph with chord-weighted edges; the
    existence of a solution is the Z/2 consistency of the entry.
    """
    color: dict[str, int] = {}
    for start in n.generators:
        if start in color:
            continue
        color[start] = n.maslov.get(start, 0)
        queue = [start]
        while queue:
            g = queue.pop()
            for coef, _, tgt in n.terms(g):
                want = color[g] ^ 1 ^ parity_weight(coef)
                if tgt not in color:
                    color[tgt] = want
                    queue.append(tgt)
                elif color[tgt] != want:
                    return None
            for src in n.generators:
                for coef, _, tgt in n.terms(src):
                    if tgt != g or src in color:
                        continue
                    color[src] = color[g] ^ 1 ^ parity_weight(coef)
                    queue.append(src)
    return color
