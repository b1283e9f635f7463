"""Towers of Type-D structures and their direct and inverse limits.

Limits are realized by explicit thread presentations: a thread is a
chain of generators carried into each other by identity coefficients
of the connecting maps.  The stable thread structure is extracted from
the materialized stages, verified for stage independence, and compared
against the printed one-generator U-tower presentations.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import catalog
from .linear import F2Matrix, GradedChainComplex, f2_homology, nullspace, reduce_against, row_reduce
from .report import Report
from .structures import (
    AInfModule,
    TypeDMorphism,
    TypeDStructure,
    U_ANNIHILATE,
    U_COLLAPSE,
    box_map,
    box_tensor,
    compose_morphisms,
    find_homotopy,
    find_table_isomorphism,
    is_type_d_morphism,
)


class NotEventuallyStableError(ValueError):
    pass


class FamilyNotCompatibleError(ValueError):
    pass


class NoStabilizationError(ValueError):
    pass


DIRECT = "direct"
INVERSE = "inverse"


@dataclass
class Tower:
    """Stages with connecting morphisms and the commuting U-family.

    Direct towers connect stage n to n+1; inverse towers connect n+1
    to n (both lists are indexed by n).  Construction verifies every
    map and the commutation squares, recording a homotopy witness when
    a square only commutes up to homotopy.
    """

    direction: str
    stages: list[TypeDStructure]
    connecting: list[TypeDMorphism]
    u_family: list[TypeDMorphism]
    square_witnesses: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.stages)
        if len(self.connecting) != n - 1 or len(self.u_family) != n - 1:
            raise ValueError("need one connecting and one U map per step")
        for phi in list(self.connecting) + list(self.u_family):
            is_type_d_morphism(phi).require()
        for i in range(n - 2):
            if self.direction == DIRECT:
                a = compose_morphisms(self.u_family[i], self.connecting[i + 1])
                b = compose_morphisms(self.connecting[i], self.u_family[i + 1])
            else:
                a = compose_morphisms(self.u_family[i + 1], self.connecting[i])
                b = compose_morphisms(self.connecting[i + 1], self.u_family[i])
            if a.table_equal(b):
                self.square_witnesses.append(("exact", i))
            else:
                h = find_homotopy(a, b)
                if h is None:
                    raise FamilyNotCompatibleError(
                        f"U-family square at stage {i} does not commute"
                    )
                self.square_witnesses.append(("homotopy", i, h))

    @property
    def depth(self) -> int:
        return len(self.stages) - 1


def catalog_direct_tower(depth: int) -> Tower:
    """The (K_n, eta_n) tower with the eta_p U-family."""
    stages = [catalog.torus_module(n) for n in range(depth + 1)]
    conn = [catalog.stabilization_map("-", n, "torus") for n in range(depth)]
    ufam = [catalog.stabilization_map("+", n, "torus") for n in range(depth)]
    return Tower(DIRECT, stages, conn, ufam)


def catalog_inverse_tower(depth: int) -> Tower:
    """The (K_n^+, negative) tower with the positive U-family."""
    stages = [catalog.inverse_torus_module(n) for n in range(depth + 1)]
    conn = [catalog.inverse_tower_map("-", n) for n in range(depth)]
    ufam = [catalog.inverse_tower_map("+", n) for n in range(depth)]
    return Tower(INVERSE, stages, conn, ufam)


def constant_tower(module: TypeDStructure, depth: int) -> Tower:
    from .structures import identity_morphism

    stages = [module] * (depth + 1)
    ids = [identity_morphism(module) for _ in range(depth)]
    return Tower(DIRECT, stages, ids, list(ids))


# ---------------------------------------------------------------------------
# Thread extraction


def _identity_arrows(phi: TypeDMorphism) -> dict[str, str]:
    """src gen -> tgt gen for the pure identity-coefficient arrows."""
    out = {}
    alg = phi.source.algebra
    for g in phi.source.generators:
        terms = phi.terms(g)
        if len(terms) != 1:
            continue
        coef, u, tgt = terms[0]
        if u == 0 and coef == alg.idempotent_for(phi.source.idempotents[g]):
            out[g] = tgt
    return out


@dataclass
class Thread:
    """A stable generator chain through the tower stages."""

    name: str
    members: dict[int, str]  # stage index -> generator

    def at(self, stage: int) -> str | None:
        return self.members.get(stage)


@dataclass
class LimitPresentation:
    """Explicit limit of a tower: threads, delta and U tables.

    ``presentation`` is the finitely presented comparison object: the
    U-decorated single-generator tower for direct limits (K-minus
    shape) and the reindexed U^{-1} tower pattern for inverse limits.
    """

    tower: Tower
    threads: list[Thread]
    delta_table: dict[str, list]   # thread -> [(coef, thread')]
    u_table: dict[str, str | None]
    presentation: TypeDStructure
    comparison: dict  # (stage, generator) -> thread name

    def thread_names(self) -> list[str]:
        return [t.name for t in self.threads]


def _extract_threads(t: Tower) -> list[Thread]:
    steps = []
    for i, phi in enumerate(t.connecting):
        arrows = _identity_arrows(phi)
        if t.direction == DIRECT:
            steps.append(((i, i + 1), arrows))
        else:
            steps.append(((i + 1, i), arrows))
    chains: list[dict[int, str]] = []
    used: set[tuple[int, str]] = set()
    order = range(t.depth, -1, -1) if t.direction == DIRECT else range(t.depth + 1)
    # Walk maximal identity chains starting from the newest stage.
    for start in order:
        for g in t.stages[start].generators:
            if (start, g) in used:
                continue
            chain = {start: g}
            if t.direction == DIRECT:
                s, cur = start, g
                while s < t.depth:
                    arrows = _identity_arrows(t.connecting[s])
                    if cur not in arrows:
                        break
                    cur = arrows[cur]
                    s += 1
                    chain[s] = cur
                s, cur = start, g
                while s > 0:
                    prev = [
                        p
                        for p, q in _identity_arrows(t.connecting[s - 1]).items()
                        if q == cur
                    ]
                    if len(prev) != 1:
                        break
                    cur = prev[0]
                    s -= 1
                    chain[s] = cur
            else:
                s, cur = start, g
                while s > 0:
                    arrows = _identity_arrows(t.connecting[s - 1])
                    if cur not in arrows:
                        break
                    cur = arrows[cur]
                    s -= 1
                    chain[s] = cur
                s, cur = start, g
                while s < t.depth:
                    prev = [
                        p
                        for p, q in _identity_arrows(t.connecting[s]).items()
                        if q == cur
                    ]
                    if len(prev) != 1:
                        break
                    cur = prev[0]
                    s += 1
                    chain[s] = cur
            for s, gg in chain.items():
                used.add((s, gg))
            chains.append(chain)
    # Threads are the chains alive at the final two stages (direct) or
    # at every sufficiently deep stage pair (inverse: stages 0 and 1
    # onward exist, deep stages keep extending).
    final = t.depth
    threads = []
    for chain in chains:
        if t.direction == DIRECT:
            if final in chain and final - 1 in chain:
                threads.append(chain)
        else:
            if final in chain and final - 1 in chain:
                threads.append(chain)
    return [Thread(f"delta{i}", c) for i, c in enumerate(threads)]


def _order_threads(t: Tower, threads: list[Thread]) -> list[Thread]:
    # Stable Alexander label of a thread (stage independent).
    def alex(th: Thread):
        stage, gen = max(th.members.items())
        a = t.stages[stage].alex2.get(gen)
        if a is None:
            raise NotEventuallyStableError("threads need Alexander labels to order")
        return a

    reverse = t.direction == DIRECT
    ordered = sorted(threads, key=alex, reverse=reverse)
    out = []
    for i, th in enumerate(ordered):
        out.append(Thread(f"delta{i}", th.members))
    return out


def _thread_delta(t: Tower, threads: list[Thread]):
    """Thread-level delta table plus the set of unresolved threads.

    A stage resolves a thread's delta when every target lies on a
    thread; stages near the frontier of the tower (where the next
    thread has not materialized yet) are skipped.  Resolved stages must
    agree; threads with no resolved stage are reported as unresolved
    and may only appear as non-root generators of the presentation.
    """
    by_member = {}
    for th in threads:
        for s, g in th.members.items():
            by_member[(s, g)] = th.name
    table: dict[str, list] = {}
    unresolved: set[str] = set()
    for th in threads:
        resolved = {}
        for s, g in th.members.items():
            terms = []
            ok = True
            for coef, u, tgt in t.stages[s].terms(g):
                if u:
                    raise NotEventuallyStableError("U-decorated stages unsupported")
                target_thread = by_member.get((s, tgt))
                if target_thread is None:
                    ok = False
                    break
                terms.append((coef, target_thread))
            if ok:
                resolved[s] = tuple(sorted(terms, key=lambda ct: (ct[1], str(ct[0]))))
        values = set(resolved.values())
        if len(values) > 1:
            raise NotEventuallyStableError(
                f"thread {th.name} has stage-dependent delta structure"
            )
        if values:
            table[th.name] = list(values.pop())
        else:
            unresolved.add(th.name)
            table[th.name] = []
    return table, unresolved


def _thread_u_action(t: Tower, threads: list[Thread]) -> dict[str, str | None]:
    by_member = {}
    for th in threads:
        for s, g in th.members.items():
            by_member[(s, g)] = th.name
    out: dict[str, str | None] = {}
    for th in threads:
        images = set()
        for s, g in th.members.items():
            if t.direction == DIRECT:
                if s >= len(t.u_family):
                    continue
                phi = t.u_family[s]
                terms = phi.terms(g)
                tgt_stage = s + 1
            else:
                if s == 0:
                    continue
                phi = t.u_family[s - 1]
                terms = phi.terms(g)
                tgt_stage = s - 1
            if not terms:
                images.add(None)
                continue
            if len(terms) != 1:
                raise NotEventuallyStableError("U-family is not thread diagonal")
            coef, u, tgt = terms[0]
            alg = phi.source.algebra
            if coef != alg.idempotent_for(phi.source.idempotents[g]) or u:
                raise NotEventuallyStableError("U-family has non-identity thread action")
            images.add(by_member.get((tgt_stage, tgt)))
        # None can mean "zero" or "target thread not materialized"; a
        # resolved image wins over frontier misses.
        if len(images) > 1:
            images.discard(None)
        if len(images) != 1:
            raise NotEventuallyStableError(f"U-action on {th.name} is stage dependent")
        out[th.name] = images.pop()
    return out


def _build_presentation(
    t: Tower, threads, delta_table, unresolved, u_table
) -> TypeDStructure:
    """Finite presentation on the U-orbit roots."""
    names = [th.name for th in threads]
    image = {v for v in u_table.values() if v is not None}
    roots = [n for n in names if n not in image]
    # Express every thread as U^k of a root.
    power: dict[str, tuple[str, int]] = {}
    for r in roots:
        cur, k = r, 0
        while cur is not None:
            power[cur] = (r, k)
            cur = u_table.get(cur)
            k += 1
            if k > len(names):
                raise NotEventuallyStableError("U-orbit does not terminate")
    if len(power) != len(names):
        raise NotEventuallyStableError("threads are not covered by U-orbits")
    algebra = t.stages[-1].algebra
    by_name = {th.name: th for th in threads}

    def labels(th_name):
        th = by_name[th_name]
        s, g = max(th.members.items())
        stg = t.stages[s]
        return stg.idempotents[g], stg.alex2.get(g), stg.maslov.get(g)

    if t.direction == DIRECT:
        idem = {}
        delta = {}
        alex2 = {}
        maslov = {}
        for r in roots:
            if r in unresolved:
                raise NotEventuallyStableError(
                    f"root thread {r} has no resolved delta structure; deepen the tower"
                )
            idem[r], alex2[r], maslov[r] = labels(r)
            terms = []
            for coef, target in delta_table[r]:
                root, k = power[target]
                if root != r:
                    raise NotEventuallyStableError("delta leaves the U-orbit")
                terms.append((coef, k, root))
            delta[r] = terms
        return TypeDStructure(
            algebra,
            tuple(roots),
            idem,
            delta,
            u_decorated=True,
            alex2=alex2,
            maslov=maslov,
            name="direct-limit",
        )
    # Inverse limits: materialize the thread pattern directly (a
    # K-plus style upward tower with U acting by left translation).
    if unresolved:
        raise NotEventuallyStableError(
            f"inverse threads {sorted(unresolved)} have no resolved delta structure"
        )
    idem = {}
    delta = {}
    alex2 = {}
    maslov = {}
    for th in threads:
        idem[th.name], alex2[th.name], maslov[th.name] = labels(th.name)
        delta[th.name] = [(coef, 0, target) for coef, target in delta_table[th.name]]
    return TypeDStructure(
        algebra,
        tuple(th.name for th in threads),
        idem,
        delta,
        alex2=alex2,
        maslov=maslov,
        name="inverse-limit",
    )


def _limit_of(t: Tower) -> LimitPresentation:
    threads = _order_threads(t, _extract_threads(t))
    delta_table, unresolved = _thread_delta(t, threads)
    u_table = _thread_u_action(t, threads)
    pres = _build_presentation(t, threads, delta_table, unresolved, u_table)
    comparison = {}
    for th in threads:
        for s, g in th.members.items():
            comparison[(s, g)] = th.name
    return LimitPresentation(t, threads, delta_table, u_table, pres, comparison)


def direct_limit(t: Tower) -> LimitPresentation:
    if t.direction != DIRECT:
        raise ValueError("direct_limit needs a direct tower")
    return _limit_of(t)


def inverse_limit(t: Tower) -> LimitPresentation:
    if t.direction != INVERSE:
        raise ValueError("inverse_limit needs an inverse tower")
    return _limit_of(t)


def compare_direct_limit_with_k_minus(limit: LimitPresentation) -> Report:
    """Generator bijection and table equality with the K-minus tower."""
    model = catalog.u_module("minus")
    iso = find_table_isomorphism(limit.presentation, model)
    if iso is None:
        return Report("direct limit vs K_minus", ("presentations differ",))
    # U on the limit is the thread shift delta_i -> delta_{i+1}.
    for name, img in limit.u_table.items():
        i = int(name.replace("delta", ""))
        if img != f"delta{i+1}" and img is not None:
            return Report(
                "direct limit vs K_minus", (f"U sends {name} to {img}",)
            )
    return Report("direct limit vs K_minus")


def compare_inverse_limit_with_k_plus(limit: LimitPresentation) -> Report:
    """Pattern equality with the K-plus tower and its left-translation U."""
    model = catalog.u_module("plus").materialize(len(limit.threads) - 1)
    mapping = {f"delta{i}": f"g{i}" for i in range(len(limit.threads))}
    relabeled = limit.presentation.relabeled(mapping, name=model.name)
    ok = (
        relabeled.idempotents == model.idempotents
        and relabeled.delta == model.delta
    )
    if not ok:
        return Report("inverse limit vs K_plus", ("presentations differ",))
    for name, img in limit.u_table.items():
        i = int(name.replace("delta", ""))
        want = None if i == 0 else f"delta{i-1}"
        if img != want:
            return Report("inverse limit vs K_plus", (f"U sends {name} to {img}",))
    return Report("inverse limit vs K_plus")


# ---------------------------------------------------------------------------
# Induced maps on limits


@dataclass
class InducedLimitMap:
    """A limit-level map induced by a compatible family of stage maps."""

    thread_table: dict[str, tuple]
    morphism: TypeDMorphism | None
    description: str


def induced_limit_map(t: Tower, limit: LimitPresentation, family: list[TypeDMorphism]):
    """Push a commuting family of stage maps to the limit threads.

    Direct towers take families of maps stage_n -> F; inverse towers
    take F -> stage_n.  Compatibility with the connecting maps is
    verified square by square with a witness on failure.
    """
    if len(family) != len(t.stages):
        raise ValueError("need one family map per stage")
    if t.direction == DIRECT:
        for i in range(len(family) - 1):
            comp = compose_morphisms(t.connecting[i], family[i + 1])
            if not comp.table_equal(family[i]):
                raise FamilyNotCompatibleError(
                    f"family square at stage {i}: f_{i} != f_{i+1} . c_{i}"
                )
        fixed = family[0].target
        thread_table: dict[str, tuple] = {}
        for th in limit.threads:
            images = set()
            for s, g in th.members.items():
                images.add(tuple(family[s].terms(g)))
            if len(images) != 1:
                raise FamilyNotCompatibleError(
                    f"family is not constant on thread {th.name}"
                )
            thread_table[th.name] = images.pop()
        morphism = _limit_morphism_from_threads(limit, fixed, thread_table)
        return InducedLimitMap(thread_table, morphism, "limit -> " + fixed.name)
    # Inverse towers: F -> lim, described by the image threads.
    for i in range(len(family) - 1):
        comp = compose_morphisms(family[i + 1], t.connecting[i])
        if not comp.table_equal(family[i]):
            raise FamilyNotCompatibleError(
                f"family square at stage {i}: f_{i} != c_{i} . f_{i+1}"
            )
    fixed = family[0].source
    by_member = {}
    for th in limit.threads:
        for s, g in th.members.items():
            by_member[(s, g)] = th.name
    thread_table = {}
    for g in fixed.generators:
        images = set()
        for s in range(1, len(family)):
            terms = []
            for coef, u, tgt in family[s].terms(g):
                target = by_member.get((s, tgt))
                if target is None:
                    raise FamilyNotCompatibleError(
                        f"family image at stage {s} misses the threads"
                    )
                terms.append((coef, u, target))
            images.add(tuple(sorted(terms, key=str)))
        if len(images) != 1:
            raise FamilyNotCompatibleError(f"family image of {g} is stage dependent")
        thread_table[g] = images.pop()
    return InducedLimitMap(thread_table, None, fixed.name + " -> limit")


def _limit_morphism_from_threads(limit, fixed, thread_table) -> TypeDMorphism:
    """Classify the thread table as a U-mode morphism on the presentation."""
    pres = limit.presentation
    names = limit.thread_names()
    # Express threads as U-powers of roots.
    u_power = {}
    for root in pres.generators:
        cur, k = root, 0
        while cur is not None:
            u_power[cur] = (root, k)
            cur = limit.u_table.get(cur)
            k += 1
    by_root: dict[str, dict[int, tuple]] = {}
    for name in names:
        root, k = u_power[name]
        by_root.setdefault(root, {})[k] = thread_table[name]
    table = {}
    mode = None
    for root, images in by_root.items():
        base = images.get(0, ())
        higher = [images[k] for k in sorted(images) if k > 0]
        if all(not h for h in higher):
            this_mode = U_ANNIHILATE
        elif all(h == base for h in higher):
            this_mode = U_COLLAPSE
        else:
            raise FamilyNotCompatibleError(
                "family does not induce a U-equivariant limit map"
            )
        mode = mode or this_mode
        if mode != this_mode and higher:
            raise FamilyNotCompatibleError("mixed U-modes in the induced map")
        table[root] = list(base)
    phi = TypeDMorphism(pres, fixed, table, u_mode=mode or U_ANNIHILATE, name="induced")
    is_type_d_morphism(phi).require()
    return phi


# ---------------------------------------------------------------------------
# Stabilized pairing homology


@dataclass
class StabilizedHomology:
    """Per-grading stable ranks with their first stable stage."""

    table: dict[tuple[int, int], tuple[int, int]]  # (alex2, maslov) -> (rank, stage)
    depth: int

    def rank_at(self, alex2: int, maslov: int | None = None) -> int:
        return sum(
            r
            for (a, m), (r, _) in self.table.items()
            if a == alex2 and (maslov is None or m == maslov)
        )

    def first_stable_stage(self) -> int:
        return max((s for _, s in self.table.values()), default=0)

    def by_alexander(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for (a, _), (r, _) in self.table.items():
            out[a] = out.get(a, 0) + r
        return out


def _homology_slices(cx: GradedChainComplex):
    """Per (alex2, maslov): indices, homology basis, boundary data."""
    from .linear import nullspace

    n = cx.size
    out = {}
    gradings = sorted(set(zip(cx.alex2, cx.maslov)))
    for a, m in gradings:
        idx = [j for j in range(n) if cx.alex2[j] == a and cx.maslov[j] == m]
        tgt = [j for j in range(n) if cx.alex2[j] == a and cx.maslov[j] == 1 - m]
        pos = {j: i for i, j in enumerate(idx)}
        d_out = F2Matrix(len(tgt), len(idx))
        for c, j in enumerate(idx):
            col = cx.diff.column(j)
            for i, jj in enumerate(tgt):
                if (col >> jj) & 1:
                    d_out.data[i] |= 1 << c
        d_in = F2Matrix(len(idx), len(tgt))
        for c, j in enumerate(tgt):
            col = cx.diff.column(j)
            for i, jj in enumerate(idx):
                if (col >> jj) & 1:
                    d_in.data[i] |= 1 << c
        cycles = nullspace(d_out)
        bbasis, bpiv = row_reduce([d_in.column(j) for j in range(d_in.cols)])
        hom = []
        span, piv = list(bbasis), list(bpiv)
        for cvec in cycles:
            r = reduce_against(cvec, span, piv)
            if r:
                hom.append(r)
                p = r.bit_length() - 1
                k = 0
                while k < len(piv) and piv[k] > p:
                    k += 1
                span.insert(k, r)
                piv.insert(k, p)
        out[(a, m)] = {
            "indices": idx,
            "pos": pos,
            "hom": hom,
            "bdry": (bbasis, bpiv),
        }
    return out


def induced_map_on_slices(src_cx, tgt_cx, matrix: F2Matrix):
    """Per-grading homology matrices of a degree-0 chain map."""
    from .linear import _express_in_homology

    src = _homology_slices(src_cx)
    tgt = _homology_slices(tgt_cx)
    out = {}
    for key, sdata in src.items():
        tdata = tgt.get(key)
        cols = len(sdata["hom"])
        rows = len(tdata["hom"]) if tdata else 0
        mat = F2Matrix(rows, cols)
        for c, vec in enumerate(sdata["hom"]):
            total = 0
            v = vec
            while v:
                low = v & -v
                i = low.bit_length() - 1
                v ^= low
                j = sdata["indices"][i]
                col = matrix.column(j)
                total ^= col
            if tdata is None:
                if total:
                    raise ValueError("chain map image misses the target grading")
                continue
            image = 0
            tv = total
            while tv:
                low = tv & -tv
                jj = low.bit_length() - 1
                tv ^= low
                if jj not in tdata["pos"]:
                    raise ValueError("chain map is not grading preserving")
                image |= 1 << tdata["pos"][jj]
            coords = _express_in_homology(image, tdata["hom"], *tdata["bdry"])
            for r in range(rows):
                if (coords >> r) & 1:
                    mat.data[r] |= 1 << c
        out[key] = mat
    return out, src, tgt


def stabilized_pair_homology(
    a: AInfModule, t: Tower, max_extra: int = 0
) -> StabilizedHomology:
    """Homology of a (box) stage_n until consecutive stages agree.

    Stability at a grading means equal ranks at stages n and n+1 with
    the connecting map inducing a bijection there.  The bottom two
    lattice gradings of the final stage are still growing and are
    excluded; everything else must be certified or the bound fails.
    """
    if t.direction != DIRECT:
        raise ValueError("stabilized pairing needs a direct tower")
    complexes = [box_tensor(a, s) for s in t.stages]
    stable: dict[tuple[int, int], tuple[int, int]] = {}
    unstable: set[tuple[int, int]] = set()
    pending: dict[tuple[int, int], int] = {}
    for i, phi in enumerate(t.connecting):
        pm = box_map(a, phi)
        mats, src, tgt = induced_map_on_slices(
            complexes[i], complexes[i + 1], pm.f2_matrix()
        )
        keys = set(src) | set(tgt)
        for key in keys:
            r1 = len(src[key]["hom"]) if key in src else 0
            r2 = len(tgt[key]["hom"]) if key in tgt else 0
            mat = mats.get(key)
            bijective = r1 == r2 and mat is not None and mat.rank() == r1
            if key in src and bijective:
                if key not in pending:
                    pending[key] = i
            else:
                pending.pop(key, None)
                unstable.add(key)
        unstable -= set(pending)
    final_slices = _homology_slices(complexes[-1])
    floor = min(complexes[-1].alex2) if complexes[-1].size else 0
    for key, first in pending.items():
        # The bottom two Alexander units of the final stage are still
        # growing (new tower classes arrive there later); certifying
        # them would freeze a transient value.
        if complexes[-1].size and key[0] <= floor + 4:
            continue
        r = len(final_slices.get(key, {"hom": []})["hom"])
        stable[key] = (r, first)
    # Gradings still moving at the end must stay near the growing
    # bottom of the final stage.
    if complexes[-1].size:
        for key in unstable:
            if key in stable:
                continue
            if key[0] > floor + 4:
                raise NoStabilizationError(
                    f"grading {key} did not stabilize by stage {t.depth}"
                )
    return StabilizedHomology(stable, t.depth)
