"""The pairing pipeline: HFK flavors and the natural maps p*, pi*, iota*.

A knot fixture is a Type-A module over the torus algebra with absolute
(Alexander, Z/2 Maslov) labels.  Pairing it with the K-minus, K-hat
and K-plus modules from the catalog gives the minus, hat and plus
knot Floer homologies; the natural maps are computed twice, once
through the limit-theoretic morphisms (Phi_SV, Phi_2h, Phi_dSV) and
once by the chain-level U = 0 / U = 1 / bottom-inclusion definitions,
and the two routes are asserted equal.
"""

from __future__ import annotations

import importlib.resources as resources
import json
import os
from dataclasses import dataclass

from . import catalog
from .gradings import check_ainf_gradings
from .linear import (
    F2Matrix,
    GradedChainComplex,
    GradedFUModule,
    HomologyTable,
    RING_F2,
    RING_F2U,
    _express_in_homology,
    f2_homology,
    f2u_module_homology,
    nullspace,
    reduce_against,
    row_reduce,
)
from .report import Report
from .serialize import ParseError, ainf_from_dict, load_file
from .structures import (
    AInfModule,
    TypeDMorphism,
    U_ANNIHILATE,
    U_COLLAPSE,
    box_map,
    box_tensor,
    verify_ainf_module,
)


class FailsVerificationError(ValueError):
    pass


class GradingInconsistentError(ValueError):
    pass


class NotACycleError(ValueError):
    pass


DEFAULT_TRUNCATION = 12


def truncation_bound() -> int:
    value = os.environ.get("BSFH_TRUNCATION")
    return int(value) if value else DEFAULT_TRUNCATION


@dataclass
class KnotFixture:
    """A verified Type-A module with graded generators and class markers."""

    module: AInfModule
    provenance: str = ""
    eh_generator: str | None = None
    loss_generator: str | None = None

    @property
    def name(self) -> str:
        return self.module.name

    @property
    def algebra(self):
        return self.module.algebra


def fixture_from_dict(data: dict) -> KnotFixture:
    module = ainf_from_dict(data)
    report = verify_ainf_module(module)
    if not report.passed:
        raise FailsVerificationError(str(report))
    problems = check_ainf_gradings(module)
    if problems:
        raise GradingInconsistentError("; ".join(problems))
    missing = [
        g
        for g in module.generators
        if g not in module.alex2 or g not in module.maslov
    ]
    if missing:
        raise GradingInconsistentError(f"generators without gradings: {missing}")
    classes = data.get("classes", {})
    return KnotFixture(
        module,
        provenance=data.get("provenance", ""),
        eh_generator=classes.get("eh_generator"),
        loss_generator=classes.get("loss_generator"),
    )


def load_type_a(path: str) -> KnotFixture:
    return fixture_from_dict(load_file(path))


BUNDLED = ("unknot", "trefoil", "ot_unknot", "disk_one", "disk_two")


def bundled_fixture(name: str) -> KnotFixture:
    if name not in BUNDLED:
        raise KeyError(f"unknown bundled fixture {name!r}; have {BUNDLED}")
    text = (
        resources.files("bsfh").joinpath(f"data/fixtures/{name}.json").read_text()
    )
    return fixture_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# Homology helpers


def total_homology(cx: GradedChainComplex):
    """Global cycles-mod-boundaries data for an F2 complex."""
    if cx.ring != RING_F2:
        raise ValueError("total_homology expects an F2 complex")
    d = cx.diff
    cycles = nullspace(d)
    bbasis, bpiv = row_reduce([d.column(j) for j in range(d.cols)])
    hom = []
    span, piv = list(bbasis), list(bpiv)
    for c in cycles:
        r = reduce_against(c, span, piv)
        if r:
            hom.append(r)
            p = r.bit_length() - 1
            k = 0
            while k < len(piv) and piv[k] > p:
                k += 1
            span.insert(k, r)
            piv.insert(k, p)
    return {"hom": hom, "bdry": (bbasis, bpiv)}


def induced_total_matrix(matrix: F2Matrix, src_data, tgt_data) -> F2Matrix:
    rows = len(tgt_data["hom"])
    cols = len(src_data["hom"])
    out = F2Matrix(rows, cols)
    for c, vec in enumerate(src_data["hom"]):
        image = 0
        v = vec
        while v:
            low = v & -v
            j = low.bit_length() - 1
            v ^= low
            image ^= matrix.column(j)
        coords = _express_in_homology(image, tgt_data["hom"], *tgt_data["bdry"])
        for r in range(rows):
            if (coords >> r) & 1:
                out.data[r] |= 1 << c
    return out


def _space_span(vectors):
    return row_reduce(list(vectors))


def image_space(mat: F2Matrix):
    return _space_span(mat.column(j) for j in range(mat.cols))


def kernel_space(mat: F2Matrix):
    return _space_span(nullspace(mat))


def spaces_equal(a, b) -> bool:
    basis_a, piv_a = a
    basis_b, piv_b = b
    if len(basis_a) != len(basis_b):
        return False
    return all(reduce_against(v, basis_a, piv_a) == 0 for v in basis_b)


# ---------------------------------------------------------------------------
# Slice homology of U-decorated pairings


def u_slice_homology(cx: GradedChainComplex, gradings):
    """Per (alex2, maslov) homology of an F2[U] complex on chosen slices."""
    out = {}
    for a, m in gradings:
        basis = [
            (j, (cx.alex2[j] - a) // 2)
            for j in range(cx.size)
            if cx.maslov[j] == m and cx.alex2[j] >= a and (cx.alex2[j] - a) % 2 == 0
        ]
        other = [
            (j, (cx.alex2[j] - a) // 2)
            for j in range(cx.size)
            if cx.maslov[j] == 1 - m and cx.alex2[j] >= a and (cx.alex2[j] - a) % 2 == 0
        ]
        pos = {gk: i for i, gk in enumerate(basis)}
        opos = {gk: i for i, gk in enumerate(other)}

        def mat_between(src, tgt_pos, rows):
            mat = F2Matrix(rows, len(src))
            for c, (j, k) in enumerate(src):
                for i in range(cx.size):
                    poly = cx.diff.data[i][j]
                    kk = 0
                    while poly:
                        if poly & 1 and (i, k + kk) in tgt_pos:
                            mat.data[tgt_pos[(i, k + kk)]] |= 1 << c
                        poly >>= 1
                        kk += 1
            return mat

        d_out = mat_between(basis, opos, len(other))
        d_in = mat_between(other, pos, len(basis))
        cycles = nullspace(d_out)
        bbasis, bpiv = row_reduce([d_in.column(j) for j in range(d_in.cols)])
        hom = []
        span, piv = list(bbasis), list(bpiv)
        for c in cycles:
            r = reduce_against(c, span, piv)
            if r:
                hom.append(r)
                p = r.bit_length() - 1
                kk = 0
                while kk < len(piv) and piv[kk] > p:
                    kk += 1
                span.insert(kk, r)
                piv.insert(kk, p)
        out[(a, m)] = {"basis": basis, "pos": pos, "hom": hom, "bdry": (bbasis, bpiv)}
    return out


# ---------------------------------------------------------------------------
# The three HFK flavors


def hfk(variant: str, fixture: KnotFixture):
    """HFK of a fixture: 'minus' and 'plus' as U-module data, 'hat' as ranks."""
    if variant == "minus":
        cx = box_tensor(fixture.module, catalog.u_module("minus"))
        return f2u_module_homology(cx)
    if variant == "hat":
        cx = box_tensor(fixture.module, catalog.u_module("infinity"))
        return f2_homology(cx)
    if variant == "plus":
        return hfk_plus(fixture)
    raise ValueError("variant must be minus, hat or plus")


@dataclass
class PlusHomology:
    """HFK-plus presentation on a truncation window with a certificate.

    ``towers`` lists (alex2_base, maslov, count) of upward U^{-1}
    towers (U kills the base); ``torsion`` lists (alex2_top, maslov,
    order, count) of finite pieces.  ``window_hi`` is the largest
    doubled grading certified stable at truncation depth ``depth``.
    """

    towers: tuple
    torsion: tuple
    ranks: dict
    window_hi: int
    depth: int

    def rank_at(self, alex2: int, maslov: int | None = None) -> int:
        return sum(
            r
            for (a, m), r in self.ranks.items()
            if a == alex2 and (maslov is None or m == maslov)
        )


def _plus_rank_table(fixture: KnotFixture, depth: int):
    cx = box_tensor(fixture.module, catalog.u_module("plus").materialize(depth))
    data = {}
    gradings = sorted(set(zip(cx.alex2, cx.maslov)))
    sliced = _f2_slices(cx)
    for key in gradings:
        data[key] = sliced[key]
    return cx, data


def _f2_slices(cx: GradedChainComplex):
    from .limits import _homology_slices

    return _homology_slices(cx)


def hfk_plus(fixture: KnotFixture) -> PlusHomology:
    """Per-grading plus homology, stable under growing the truncation.

    Computed at the configured depth and at depth-1; the window where
    both agree is certified.  The U-action classifies the window into
    upward towers and finite torsion blocks.
    """
    depth = truncation_bound()
    cx1, slices1 = _plus_rank_table(fixture, depth - 1)
    cx, slices = _plus_rank_table(fixture, depth)
    gen_amax = max(fixture.module.alex2.values())
    window_hi = gen_amax + 2 * (depth - 1) - 2 * 2
    ranks = {}
    for key, data in slices.items():
        if key[0] > window_hi:
            continue
        r = len(data["hom"])
        r1 = len(slices1.get(key, {"hom": []})["hom"])
        if r != r1:
            raise GradingInconsistentError(
                f"plus homology unstable at {key} between depths {depth-1}, {depth}"
            )
        if r:
            ranks[key] = r

    # U-action on the plus pairing: p (x) g_i -> p (x) g_{i-1}.
    index = {g: i for i, g in enumerate(cx.gens)}

    def u_matrix_entries():
        mat = F2Matrix(cx.size, cx.size)
        for j, g in enumerate(cx.gens):
            p, y = g.split("|")
            i = int(y[1:])
            if i > 0:
                mat.data[index[f"{p}|g{i-1}"]] |= 1 << j
        return mat

    umat = u_matrix_entries()

    def u_power_rank(a: int, m: int, j: int) -> int:
        src = slices.get((a, m))
        if src is None or not src["hom"]:
            return 0
        tgt = slices.get((a - 2 * j, m))
        if tgt is None:
            return 0
        mat = F2Matrix(len(tgt["hom"]), len(src["hom"]))
        for c, vec in enumerate(src["hom"]):
            image = 0
            v = vec
            while v:
                low = v & -v
                ii = low.bit_length() - 1
                v ^= low
                col = 1 << src["indices"][ii]
                for _ in range(j):
                    nxt = 0
                    w = col
                    while w:
                        lo = w & -w
                        jj = lo.bit_length() - 1
                        w ^= lo
                        nxt ^= umat.column(jj)
                    col = nxt
                image ^= col
            packed = 0
            v = image
            while v:
                low = v & -v
                jj = low.bit_length() - 1
                v ^= low
                packed |= 1 << tgt["pos"][jj]
            coords = _express_in_homology(packed, tgt["hom"], *tgt["bdry"])
            for r in range(len(tgt["hom"])):
                if (coords >> r) & 1:
                    mat.data[r] |= 1 << c
        return mat.rank()

    towers = []
    torsion = []
    for par0 in (0, 1):
        for m in (0, 1):
            lat = sorted(
                a for (a, mm) in ranks if mm == m and a % 2 == par0
            )
            if not lat:
                continue
            lo, hi = min(lat), max(lat)
            lattice = list(range(lo, hi + 1, 2))
            maxj = (hi - lo) // 2 + 1

            def rank_from_above(a: int, j: int) -> int:
                if a + 2 * j > window_hi:
                    j = max((window_hi - a) // 2, 0)
                return u_power_rank(a + 2 * j, m, j)

            t = {}
            for a in lattice:
                jmax = (window_hi - a) // 2
                t[a] = rank_from_above(a, jmax)
            for a in lattice:
                f = t.get(a, 0) - t.get(a - 2, 0)
                for _ in range(max(f, 0)):
                    towers.append((a, m, 1))
            d_rank = {
                (a, j): u_power_rank(a, m, j)
                for a in lattice
                for j in range(maxj + 2)
            }
            lattice_set = set(lattice)

            def e(a: int, j: int) -> int:
                # Torsion-only rank of U^j out of grading a; gradings
                # outside the window carry nothing.
                if a not in lattice_set:
                    return 0
                return d_rank.get((a, j), 0) - t.get(a - 2 * j, 0)

            for a in lattice:
                for j in range(maxj):
                    n_blocks = (e(a, j) - e(a, j + 1)) - (
                        e(a + 2, j + 1) - e(a + 2, j + 2)
                    )
                    for _ in range(max(n_blocks, 0)):
                        torsion.append((a, m, j + 1, 1))
    return PlusHomology(tuple(towers), tuple(torsion), ranks, window_hi, depth)


def sfh_pair(a: AInfModule, d) -> HomologyTable:
    """Ranks per grading of the pairing complex (the SFH of the gluing)."""
    cx = box_tensor(a, d)
    return f2_homology(cx)


# ---------------------------------------------------------------------------
# Natural maps


@dataclass
class NaturalMaps:
    """Homology matrices of p*, pi*, iota* with their cross-checks."""

    minus: GradedFUModule
    hat: HomologyTable
    p_star: dict
    pi_star: F2Matrix
    iota_star: dict
    cross_checks: Report
    minus_slices: dict
    hat_slices: dict
    plus_slices: dict
    fill_data: dict


def _phi_sv_on_k_minus() -> TypeDMorphism:
    """Phi_SV transported to the K-minus presentation: kill U, keep x."""
    wt = catalog.algebra_wt()
    return TypeDMorphism(
        catalog.u_module("minus"),
        catalog.u_module("infinity"),
        {"x": [(wt.idempotent_for({1}), 0, "x")]},
        u_mode=U_ANNIHILATE,
        name="Phi_SV",
    )


def _phi_2h_on_k_minus() -> TypeDMorphism:
    wt = catalog.algebra_wt()
    return TypeDMorphism(
        catalog.u_module("minus"),
        catalog.two_handle_module("K_fill"),
        {"x": [(wt.idempotent_for({1}), 0, "x")]},
        u_mode=U_COLLAPSE,
        name="Phi_2h",
    )


def _phi_dsv_to_plus(depth: int) -> TypeDMorphism:
    wt = catalog.algebra_wt()
    return TypeDMorphism(
        catalog.u_module("infinity"),
        catalog.u_module("plus").materialize(depth),
        {"x": [(wt.idempotent_for({1}), 0, "g0")]},
        name="Phi_dSV",
    )


def natural_maps(fixture: KnotFixture) -> NaturalMaps:
    failures = []
    module = fixture.module
    minus_cx = box_tensor(module, catalog.u_module("minus"))
    hat_cx = box_tensor(module, catalog.u_module("infinity"))
    fill_cx = box_tensor(module, catalog.two_handle_module("K_fill"))

    # p*: the Phi_SV route...
    pm_sv = box_map(module, _phi_sv_on_k_minus())
    # ... must be the chain-level U = 0 truncation.
    for col, rows in pm_sv.terms.items():
        for row, poly in rows.items():
            src = pm_sv.source_pairs[col]
            tgt = pm_sv.target_pairs[row]
            if poly != 1 or src[0] != tgt[0]:
                failures.append("p* is not the U = 0 truncation on the chain level")

    # pi*: the Phi_2h route must be the U = 1 specialization.
    pm_2h = box_map(module, _phi_2h_on_k_minus())
    spec1 = minus_cx.diff.specialize(1)
    if spec1 != fill_cx.diff:
        failures.append("pairing with K_fill differs from the U = 1 specialization")
    for col, rows in pm_2h.terms.items():
        src = pm_2h.source_pairs[col]
        expect = {pm_2h.target_pairs.index((src[0], "x")): 1}
        if rows != expect:
            failures.append("pi* is not the identity collapse on generators")
            break

    # iota*: the Phi_dSV route must be the bottom inclusion.
    depth = truncation_bound()
    pm_dsv = box_map(module, _phi_dsv_to_plus(depth))
    plus_cx = pm_dsv.target_cx
    for col, rows in pm_dsv.terms.items():
        src = pm_dsv.source_pairs[col]
        expect = {pm_dsv.target_pairs.index((src[0], "g0")): 1}
        if rows != expect:
            failures.append("iota* is not the bottom inclusion on the chain level")

    hat_gradings = sorted(set(zip(hat_cx.alex2, hat_cx.maslov)))
    minus_slices = u_slice_homology(minus_cx, hat_gradings)
    hat_slices = _f2_slices(hat_cx)
    plus_slices = _f2_slices(plus_cx)

    # Homology matrices of p* per hat grading.
    p_star = {}
    for key in hat_gradings:
        src = minus_slices[key]
        tgt = hat_slices.get(key)
        rows = len(tgt["hom"]) if tgt else 0
        mat = F2Matrix(rows, len(src["hom"]))
        hat_index = {g: i for i, g in enumerate(hat_cx.gens)}
        for c, vec in enumerate(src["hom"]):
            image = 0
            v = vec
            while v:
                low = v & -v
                i = low.bit_length() - 1
                v ^= low
                j, k = src["basis"][i]
                if k == 0:
                    image ^= 1 << hat_index[minus_cx.gens[j]]
            packed = 0
            v = image
            while v:
                low = v & -v
                jj = low.bit_length() - 1
                v ^= low
                packed |= 1 << tgt["pos"][jj]
            coords = _express_in_homology(packed, tgt["hom"], *tgt["bdry"])
            for r in range(rows):
                if (coords >> r) & 1:
                    mat.data[r] |= 1 << c
        p_star[key] = mat

    # pi* on total homology (the target is ungraded).
    fill_data = total_homology(fill_cx)
    pi_star = _pi_star_matrix(minus_cx, fill_cx, minus_slices, fill_data)

    # iota* per hat grading into the plus slices.
    iota_star = {}
    plus_index = {g: i for i, g in enumerate(plus_cx.gens)}
    for key, tdata in hat_slices.items():
        src = tdata
        tkey = plus_slices.get(key)
        rows = len(tkey["hom"]) if tkey else 0
        mat = F2Matrix(rows, len(src["hom"]))
        for c, vec in enumerate(src["hom"]):
            image = 0
            v = vec
            while v:
                low = v & -v
                i = low.bit_length() - 1
                v ^= low
                j = src["indices"][i]
                p, _ = hat_cx.gens[j].split("|")
                image |= 1 << plus_index[f"{p}|g0"]
            packed = 0
            v = image
            while v:
                low = v & -v
                jj = low.bit_length() - 1
                v ^= low
                packed |= 1 << tkey["pos"][jj]
            coords = _express_in_homology(packed, tkey["hom"], *tkey["bdry"])
            for r in range(rows):
                if (coords >> r) & 1:
                    mat.data[r] |= 1 << c
        iota_star[key] = mat

    return NaturalMaps(
        minus=f2u_module_homology(minus_cx),
        hat=f2_homology(hat_cx),
        p_star=p_star,
        pi_star=pi_star,
        iota_star=iota_star,
        cross_checks=Report(f"natural maps of {fixture.name}", tuple(failures)),
        minus_slices=minus_slices,
        hat_slices=hat_slices,
        plus_slices=plus_slices,
        fill_data=fill_data,
    )


def _pi_star_matrix(minus_cx, fill_cx, minus_slices, fill_data) -> F2Matrix:
    fill_index = {g: i for i, g in enumerate(fill_cx.gens)}
    cols = []
    for key in sorted(minus_slices):
        src = minus_slices[key]
        for vec in src["hom"]:
            image = 0
            v = vec
            while v:
                low = v & -v
                i = low.bit_length() - 1
                v ^= low
                j, _k = src["basis"][i]
                image ^= 1 << fill_index[minus_cx.gens[j]]
            coords = _express_in_homology(image, fill_data["hom"], *fill_data["bdry"])
            cols.append(coords)
    rows = len(fill_data["hom"])
    mat = F2Matrix(rows, len(cols))
    for c, coords in enumerate(cols):
        for r in range(rows):
            if (coords >> r) & 1:
                mat.data[r] |= 1 << c
    return mat


# ---------------------------------------------------------------------------
# Distinguished classes


@dataclass
class ClassImages:
    """Vanishing verdicts for a tracked cycle class."""

    pairing: str
    nonzero: bool
    tower_images: list
    hat_image_nonzero: bool | None
    iota_image_nonzero: bool | None
    pi_image_nonzero: bool | None


def distinguished_class_image(
    fixture: KnotFixture, cycle_gens: list[str], stages: int = 4
) -> ClassImages:
    """Track a cycle of fixture (box) K_0 through the tower and the maps.

    The class is pushed through Id (box) eta_n stage by stage; at each
    stage the hat image (through phi_SV) is also evaluated.  Reports
    where the class dies, if it does.
    """
    cx0 = box_tensor(fixture.module, catalog.torus_module(0))
    index = {g: i for i, g in enumerate(cx0.gens)}
    vec = 0
    for g in cycle_gens:
        if g not in index:
            raise NotACycleError(f"{g} is not a generator of the K_0 pairing")
        vec |= 1 << index[g]
    if cx0.diff.apply(vec):
        raise NotACycleError("the given chain is not a cycle")
    nonzero = not _is_boundary_vec(cx0, vec)
    tower_images = []
    cur_cx, cur_vec = cx0, vec
    hat_nonzero = None
    for n in range(stages):
        pm = box_map(fixture.module, catalog.stabilization_map("-", n, "torus"))
        nxt_vec = 0
        v = cur_vec
        mat = pm.f2_matrix()
        while v:
            low = v & -v
            j = low.bit_length() - 1
            v ^= low
            nxt_vec ^= mat.column(j)
        nxt_cx = pm.target_cx
        dead = _is_boundary_vec(nxt_cx, nxt_vec)
        tower_images.append((n + 1, not dead))
        # Hat image at this stage through phi_SV.
        pm_sv = box_map(fixture.module, catalog.sv_map(n + 1, "torus"))
        hat_vec = 0
        v = nxt_vec
        msv = pm_sv.f2_matrix()
        while v:
            low = v & -v
            j = low.bit_length() - 1
            v ^= low
            hat_vec ^= msv.column(j)
        hat_cx = pm_sv.target_cx
        hat_nonzero = bool(hat_vec) and not _is_boundary_vec(hat_cx, hat_vec)
        cur_cx, cur_vec = nxt_cx, nxt_vec
        if dead:
            break
    # iota* and pi* verdicts for the loss generator when present.
    iota_nonzero = None
    pi_nonzero = None
    if fixture.loss_generator is not None:
        nm = natural_maps(fixture)
        hat_cx = box_tensor(fixture.module, catalog.u_module("infinity"))
        hidx = {g: i for i, g in enumerate(hat_cx.gens)}
        gen = f"{fixture.loss_generator}|x"
        if gen in hidx:
            key = (hat_cx.alex2[hidx[gen]], hat_cx.maslov[hidx[gen]])
            sl = nm.hat_slices[key]
            packed = 1 << sl["pos"][hidx[gen]]
            coords = _express_in_homology(packed, sl["hom"], *sl["bdry"])
            if coords == 0:
                iota_nonzero = False
            else:
                img = 0
                mat = nm.iota_star[key]
                for r in range(mat.rows):
                    bits = 0
                    for c in range(mat.cols):
                        if (coords >> c) & 1 and mat.entry(r, c):
                            bits ^= 1
                    if bits:
                        img |= 1 << r
                iota_nonzero = img != 0
    return ClassImages(
        pairing="K_0",
        nonzero=nonzero,
        tower_images=tower_images,
        hat_image_nonzero=hat_nonzero,
        iota_image_nonzero=iota_nonzero,
        pi_image_nonzero=pi_nonzero,
    )


def _is_boundary_vec(cx: GradedChainComplex, vec: int) -> bool:
    if vec == 0:
        return True
    bbasis, bpiv = row_reduce([cx.diff.column(j) for j in range(cx.size)])
    return reduce_against(vec, bbasis, bpiv) == 0


# ---------------------------------------------------------------------------
# The bypass exact triangle on a disk fixture


def triangle_report(fixture: KnotFixture) -> Report:
    """Exactness of the paired triangle at all three vertices."""
    module = fixture.module
    if module.algebra.name != "WD":
        raise ValueError("the triangle pairs disk fixtures")
    ca = box_tensor(module, catalog.disk_module("A"))
    cb = box_tensor(module, catalog.disk_module("B"))
    cc = box_tensor(module, catalog.disk_module("C"))
    fa = box_map(module, catalog.disk_bypass_map("A"))
    fb = box_map(module, catalog.disk_bypass_map("B"))
    fc = box_map(module, catalog.disk_bypass_map("C"))
    ha, hb, hc = total_homology(ca), total_homology(cb), total_homology(cc)
    ma = induced_total_matrix(fa.f2_matrix(), ha, hb)
    mb = induced_total_matrix(fb.f2_matrix(), hb, hc)
    mc = induced_total_matrix(fc.f2_matrix(), hc, ha)
    failures = []
    checks = [
        ("im(phi_A*) = ker(phi_B*)", ma, mb),
        ("im(phi_B*) = ker(phi_C*)", mb, mc),
        ("im(phi_C*) = ker(phi_A*)", mc, ma),
    ]
    for label, first, second in checks:
        if not spaces_equal(image_space(first), kernel_space(second)):
            failures.append(label + " fails")
    # Rank identity of the three-periodic exact sequence.
    dims = (len(ha["hom"]), len(hb["hom"]), len(hc["hom"]))
    ranks = (ma.rank(), mb.rank(), mc.rank())
    if dims[1] != ranks[0] + ranks[1] or dims[2] != ranks[1] + ranks[2] or dims[0] != ranks[2] + ranks[0]:
        failures.append(f"rank identity fails: dims {dims}, ranks {ranks}")
    return Report(f"exact triangle on {fixture.name}", tuple(failures))
