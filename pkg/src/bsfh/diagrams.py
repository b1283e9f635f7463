"""Nice-diagram engine: Type-D structures from counted regions.

Diagram files list the combinatorial regions of a bordered sutured
Heegaard diagram explicitly: cyclic words of alpha, beta, Reeb and
suture edges with their corner intersections.  The engine classifies
every region (suture-adjacent, small disk, extended polygon, or a
positive region behind a Reeb orbit) and assembles the differential
from the bigon, rectangle and boundary-rectangle counting rules, with
the extended rule multiplying consecutive negatively traversed chords.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .strands import AlgebraElement, multiply, named_algebra
from .structures import TypeDStructure, verify_type_d


class DiagramParseError(ValueError):
    pass


class NotNiceError(ValueError):
    pass


class DisconnectedError(ValueError):
    pass


@dataclass(frozen=True)
class Edge:
    kind: str           # alpha | beta | reeb | suture
    on: str | None      # alpha object ("arc<i>" or circle name) or beta circle
    start: str | None
    end: str | None
    through: tuple[str, ...] = ()

    def key(self):
        ends = frozenset(e for e in (self.start, self.end) if e is not None)
        return (self.kind, self.on, ends)


@dataclass
class Region:
    edges: list[Edge]
    extended: bool = False
    index: int = 0

    def has_suture(self) -> bool:
        return any(e.kind == "suture" for e in self.edges)

    def reeb_edges(self) -> list[Edge]:
        return [e for e in self.edges if e.kind == "reeb"]


@dataclass
class NiceDiagram:
    """Validated diagram: algebra reference, curves, generators, regions."""

    name: str
    algebra_name: str
    alpha_arcs: dict[int, tuple[str, str]]   # matched index -> endpoints on Z
    alpha_circles: tuple[str, ...]
    beta_circles: tuple[str, ...]
    intersections: dict[str, tuple[str, str]]  # name -> (alpha object, beta circle)
    regions: list[Region] = field(default_factory=list)

    @property
    def algebra(self):
        return named_algebra(self.algebra_name)


def parse_diagram(path_or_data) -> NiceDiagram:
    """Load, structurally validate and classify a diagram file."""
    if isinstance(path_or_data, dict):
        data = path_or_data
    else:
        try:
            with open(path_or_data, "r", encoding="utf-8") as fh:
                data = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise DiagramParseError(f"cannot read diagram: {exc}") from exc
    if data.get("kind") != "nice_diagram":
        raise DiagramParseError("expected a nice_diagram file")
    algebra = named_algebra(data["algebra"])
    match = dict(algebra.diagram.matching)
    arcs = {}
    for idx, pts in data["alpha_arcs"].items():
        idx = int(idx)
        if {match[p] for p in pts} != {idx} or len(pts) != 2:
            raise DiagramParseError(
                f"alpha arc {idx} must end on the two points matched to {idx}"
            )
        arcs[idx] = tuple(pts)
    if set(arcs) != set(range(1, algebra.k + 1)):
        raise DiagramParseError("need one alpha arc per matched pair")
    inters = {}
    for rec in data["intersections"]:
        inters[rec["name"]] = (rec["alpha"], rec["beta"])
    diagram = NiceDiagram(
        name=data.get("name", "diagram"),
        algebra_name=algebra.name,
        alpha_arcs=arcs,
        alpha_circles=tuple(data.get("alpha_circles", ())),
        beta_circles=tuple(data["beta_circles"]),
        intersections=inters,
    )
    marked = set(algebra.diagram.points)
    for i, rec in enumerate(data["regions"]):
        edges = []
        for e in rec["edges"]:
            edge = Edge(
                kind=e["type"],
                on=e.get("on"),
                start=e.get("from"),
                end=e.get("to"),
                through=tuple(e.get("through", ())),
            )
            if edge.kind not in ("alpha", "beta", "reeb", "suture"):
                raise DiagramParseError(f"unknown edge type {edge.kind!r}")
            if edge.kind == "reeb":
                if edge.start not in marked or edge.end not in marked:
                    raise DiagramParseError("reeb edges run between marked points")
            edges.append(edge)
        region = Region(edges=edges, extended=bool(rec.get("extended", False)), index=i)
        _validate_region(diagram, region)
        diagram.regions.append(region)
    _classify_all(diagram)
    _check_connectivity(diagram)
    return diagram


def _validate_region(diagram: NiceDiagram, region: Region) -> None:
    edges = region.edges
    if not edges:
        raise DiagramParseError(f"region {region.index} is empty")
    n = len(edges)
    for i, e in enumerate(edges):
        nxt = edges[(i + 1) % n]
        if e.end is not None and nxt.start is not None and e.end != nxt.start:
            raise DiagramParseError(
                f"region {region.index}: edge chain breaks at {e.end} -> {nxt.start}"
            )
        # Interior alpha/beta edges must alternate at generator corners.
        if (
            e.kind in ("alpha", "beta")
            and nxt.kind == e.kind
            and e.end in diagram.intersections
        ):
            raise NotNiceError(
                f"region {region.index}: {e.kind} edges meet at an intersection"
            )


def _corners(diagram: NiceDiagram, region: Region, mirror: bool = False):
    """(from corners, to corners): generator points where beta turns to
    alpha and vice versa.  With ``mirror`` the roles swap, which is the
    corner rule matching a reversed (opposite orientation) word."""
    eff = region.edges
    n = len(eff)
    from_c, to_c = [], []
    for i, e in enumerate(eff):
        nxt = eff[(i + 1) % n]
        pt = e.end
        if pt is None or pt not in diagram.intersections:
            continue
        first, second = ("beta", "alpha") if not mirror else ("alpha", "beta")
        if e.kind == first and nxt.kind == second:
            from_c.append(pt)
        elif e.kind == second and nxt.kind == first:
            to_c.append(pt)
    return from_c, to_c


def _z_position(algebra, point: str):
    return algebra.diagram.position(point)


def _reeb_direction(algebra, edge: Edge) -> str:
    """'negative' when traversed against the arc orientation."""
    (arc1, p1) = _z_position(algebra, edge.start)
    (arc2, p2) = _z_position(algebra, edge.end)
    if arc1 != arc2:
        raise DiagramParseError("reeb edge spans two different arcs")
    if p1 == p2:
        raise DiagramParseError("reeb edge is constant")
    return "negative" if p1 > p2 else "positive"


def _classify_region(diagram: NiceDiagram, region: Region) -> str:
    """suture | positive | disk | extended; raises NotNiceError otherwise."""
    alg = diagram.algebra
    if region.has_suture():
        return "suture"
    reebs = region.reeb_edges()
    if any(_reeb_direction(alg, e) == "positive" for e in reebs):
        return "positive"
    from_c, to_c = _corners(diagram, region)
    corners = from_c + to_c
    if region.extended:
        if len(from_c) != 1 or len(to_c) != 1:
            raise NotNiceError(
                f"region {region.index}: extended regions need exactly two generator corners"
            )
        if len(reebs) > 2:
            raise NotNiceError(
                f"region {region.index}: extended regions allow at most two Reeb edges"
            )
        chords = sorted(
            (tuple(sorted((e.start, e.end), key=lambda p: _z_position(alg, p))) for e in reebs),
            key=lambda c: _z_position(alg, c[0]),
        )
        for c1, c2 in zip(chords, chords[1:]):
            if c1[1] != c2[0]:
                raise NotNiceError(
                    f"region {region.index}: extended Reeb chords are not consecutive along Z"
                )
        return "extended"
    if len(region.edges) <= 4 and len(corners) <= 4:
        if len(reebs) > 1:
            raise NotNiceError(
                f"region {region.index}: a small disk may carry at most one Reeb edge"
            )
        if len(set(corners)) < len(corners):
            raise NotNiceError(
                f"region {region.index}: repeated corner point (immersed domains are rejected)"
            )
        return "disk"
    raise NotNiceError(
        f"region {region.index}: disk with more than four vertices and no suture or tag"
    )


def _classify_all(diagram: NiceDiagram) -> None:
    for region in diagram.regions:
        _classify_region(diagram, region)


def _check_connectivity(diagram: NiceDiagram) -> None:
    """Every declared component must reach a suture-adjacent region."""
    n = len(diagram.regions)
    parent = list(range(n))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    by_key: dict = {}
    for i, region in enumerate(diagram.regions):
        for e in region.edges:
            if e.kind in ("alpha", "beta"):
                by_key.setdefault(e.key(), []).append(i)
    for members in by_key.values():
        for a, b in zip(members, members[1:]):
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[ra] = rb
    anchored = set()
    for i, region in enumerate(diagram.regions):
        if region.has_suture():
            anchored.add(find(i))
    for i in range(n):
        if find(i) not in anchored:
            raise DisconnectedError(
                f"region component containing region {i} never meets the sutured boundary"
            )


# ---------------------------------------------------------------------------
# Generators


def enumerate_generators(diagram: NiceDiagram) -> list[frozenset[str]]:
    """One point per beta and alpha circle, at most one per alpha arc."""
    import itertools

    by_beta: dict[str, list[str]] = {b: [] for b in diagram.beta_circles}
    for name, (alpha, beta) in diagram.intersections.items():
        by_beta[beta].append(name)
    out = []
    for combo in itertools.product(*[sorted(by_beta[b]) for b in diagram.beta_circles]):
        pts = frozenset(combo)
        if len(pts) != len(diagram.beta_circles):
            continue
        alphas = [diagram.intersections[p][0] for p in pts]
        if len(set(alphas)) != len(alphas):
            continue
        circles_hit = [a for a in alphas if a in diagram.alpha_circles]
        if sorted(circles_hit) != sorted(diagram.alpha_circles):
            continue
        out.append(pts)
    return sorted(out, key=sorted)


def _occupied_arcs(diagram: NiceDiagram, gen: frozenset[str]) -> frozenset[int]:
    occ = set()
    for p in gen:
        alpha = diagram.intersections[p][0]
        if alpha.startswith("arc"):
            occ.add(int(alpha[3:]))
    return frozenset(occ)


def generator_idempotent(diagram: NiceDiagram, gen: frozenset[str]) -> frozenset[int]:
    """BSD convention: the idempotent of the complementary arc set."""
    k = diagram.algebra.k
    return frozenset(range(1, k + 1)) - _occupied_arcs(diagram, gen)


# ---------------------------------------------------------------------------
# The differential


def _region_contribution(diagram: NiceDiagram, region: Region, reverse: bool = False):
    """(from points, to points, chords ascending) or None."""
    alg = diagram.algebra
    if region.has_suture():
        return None
    edges = region.edges
    if reverse:
        edges = [
            Edge(e.kind, e.on, e.end, e.start, tuple(reversed(e.through)))
            for e in reversed(edges)
        ]
        work = Region(edges=edges, extended=region.extended, index=region.index)
    else:
        work = region
    reebs = work.reeb_edges()
    directions = {(_reeb_direction(alg, e)) for e in reebs}
    if "positive" in directions:
        return None
    from_c, to_c = _corners(diagram, work)
    if region.extended or reebs:
        if len(from_c) != 1 or len(to_c) != 1:
            return None
    else:
        if len(from_c) not in (1, 2) or len(from_c) != len(to_c):
            return None
        pts = from_c + to_c
        if len(set(pts)) != len(pts):
            return None
    chords = sorted(
        (
            tuple(sorted((e.start, e.end), key=lambda p: _z_position(alg, p)))
            for e in reebs
        ),
        key=lambda c: _z_position(alg, c[0]),
    )
    return (tuple(from_c), tuple(to_c), tuple(chords))


def type_d_from_nice_diagram(
    diagram: NiceDiagram, reverse_conventions: bool = False
) -> TypeDStructure:
    """Assemble the Type-D structure from the counting rules.

    Rule (1)/(2) regions contribute idempotent coefficients between
    generators differing at the corner points; boundary rectangles and
    extended regions contribute the product of their negatively
    traversed chords, sandwiched between the complementary-occupancy
    idempotents.  The output always passes the structure verifier.
    """
    alg = diagram.algebra
    gens = enumerate_generators(diagram)
    names = {g: "{" + ",".join(sorted(g)) + "}" for g in gens}
    idem = {names[g]: generator_idempotent(diagram, g) for g in gens}
    delta: dict[str, list] = {names[g]: [] for g in gens}

    for region in diagram.regions:
        contrib = _region_contribution(diagram, region, reverse=reverse_conventions)
        if contrib is None:
            continue
        from_pts, to_pts, chords = contrib
        for x in gens:
            if not set(from_pts) <= x:
                continue
            if set(to_pts) & (x - set(from_pts)):
                continue
            y = frozenset((x - set(from_pts)) | set(to_pts))
            if y not in names:
                continue
            sx = generator_idempotent(diagram, x)
            sy = generator_idempotent(diagram, y)
            coef = alg.idempotent_for(sx)
            ok = True
            for chord in chords:
                try:
                    coef = multiply(coef, alg.chord_element([chord], len(sx)))
                except Exception:
                    ok = False
                    break
            if not ok:
                continue
            coef = multiply(coef, alg.idempotent_for(sy))
            if coef.is_zero():
                continue
            delta[names[x]].append((coef, 0, names[y]))

    out = TypeDStructure(
        alg,
        [names[g] for g in gens],
        idem,
        delta,
        name=f"BSD({diagram.name})",
    )
    verify_type_d(out).require()
    return out


def convention_independence_report(diagram: NiceDiagram):
    """Rerunning with reversed region orientations must give the same delta."""
    from .report import Report

    forward = type_d_from_nice_diagram(diagram)
    backward = type_d_from_nice_diagram(diagram, reverse_conventions=True)
    if forward.table_equal(backward):
        return Report(f"orientation conventions for {diagram.name}")
    return Report(
        f"orientation conventions for {diagram.name}",
        ("forward and reversed conventions disagree",),
    )
