"""Type-D structures, A-infinity modules, DA-bimodules and box tensors.

All operation tables are finite and store canonical basis elements of
the underlying strands algebras.  Structure equations are verified
exhaustively; the A-infinity relations are checked up to twice the
table arity plus two, beyond which every term vanishes over a DG
algebra with a finite table.
"""

from __future__ import annotations

import itertools

from . import f2poly
from .linear import (
    F2Matrix,
    F2UMatrix,
    GradedChainComplex,
    RING_F2,
    RING_F2U,
    solve_f2,
)
from .report import Report
from .strands import AlgebraElement, AlgebraMismatchError, StrandsAlgebra, differentiate, multiply


class UnboundedError(ValueError):
    pass


class NotAMorphismError(ValueError):
    pass


class PairingError(ValueError):
    pass


def _expand_basis(el: AlgebraElement) -> list[AlgebraElement]:
    """Split an element into its canonical basis summands."""
    alg = el.algebra
    return [alg._by_key[k] for k in alg.basis_keys(el)]


def _canonical_dterms(terms) -> tuple[tuple[AlgebraElement, int, str], ...]:
    acc: set[tuple[AlgebraElement, int, str]] = set()
    for coef, u, gen in terms:
        if coef.is_zero():
            continue
        for b in _expand_basis(coef):
            acc ^= {(b, u, gen)}
    return tuple(sorted(acc, key=lambda t: (t[2], t[1], str(t[0]))))


# ---------------------------------------------------------------------------
# Type-D structures


class TypeDStructure:
    """Left Type-D structure over a strands algebra.

    ``idempotents`` maps each generator to the subset s with
    I_s . x = x.  ``delta`` maps a generator to a tuple of terms
    (coefficient, U-power, target generator); the U-power is only
    meaningful when ``u_decorated`` (the K-minus style towers).
    """

    def __init__(
        self,
        algebra: StrandsAlgebra,
        generators,
        idempotents: dict,
        delta: dict,
        u_decorated: bool = False,
        alex2: dict | None = None,
        maslov: dict | None = None,
        name: str = "",
    ):
        self.algebra = algebra
        self.generators = tuple(generators)
        self.idempotents = {g: frozenset(idempotents[g]) for g in self.generators}
        self.delta = {
            g: _canonical_dterms(delta.get(g, ())) for g in self.generators
        }
        self.u_decorated = bool(u_decorated)
        self.alex2 = dict(alex2 or {})
        self.maslov = dict(maslov or {})
        self.name = name or "D-structure"
        self._validate()

    def _validate(self):
        for g, terms in self.delta.items():
            for coef, u, tgt in terms:
                if tgt not in self.idempotents:
                    raise ValueError(f"unknown target generator {tgt!r}")
                if u and not self.u_decorated:
                    raise ValueError("U-power on an undecorated structure")
                left = self.algebra.idempotent_for(self.idempotents[g])
                right = self.algebra.idempotent_for(self.idempotents[tgt])
                if multiply(multiply(left, coef), right) != coef or coef.is_zero():
                    raise ValueError(
                        f"term {coef} of delta({g}) is not idempotent compatible"
                    )

    def terms(self, gen: str):
        return self.delta[gen]

    def table_equal(self, other: "TypeDStructure") -> bool:
        return (
            self.algebra.name == other.algebra.name
            and self.generators == other.generators
            and self.idempotents == other.idempotents
            and self.delta == other.delta
            and self.u_decorated == other.u_decorated
        )

    def relabeled(self, mapping: dict, name: str = "") -> "TypeDStructure":
        """Rename generators through a bijection."""
        gens = tuple(mapping[g] for g in self.generators)
        return TypeDStructure(
            self.algebra,
            gens,
            {mapping[g]: s for g, s in self.idempotents.items()},
            {
                mapping[g]: [(c, u, mapping[t]) for c, u, t in ts]
                for g, ts in self.delta.items()
            },
            self.u_decorated,
            {mapping[g]: v for g, v in self.alex2.items()},
            {mapping[g]: v for g, v in self.maslov.items()},
            name or self.name,
        )

    def __repr__(self):
        return f"TypeDStructure({self.name}, {len(self.generators)} generators over {self.algebra.name})"


def verify_type_d(n: TypeDStructure) -> Report:
    """Check the structure equation (mu1 x Id) delta + (mu2 x Id)(Id x delta) delta = 0."""
    failures = []
    for g in n.generators:
        acc: set[tuple[AlgebraElement, int, str]] = set()
        for coef, u, tgt in n.terms(g):
            d = differentiate(coef)
            if not d.is_zero():
                for b in _expand_basis(d):
                    acc ^= {(b, u, tgt)}
            for coef2, u2, tgt2 in n.terms(tgt):
                prod = multiply(coef, coef2)
                if not prod.is_zero():
                    for b in _expand_basis(prod):
                        acc ^= {(b, u + u2, tgt2)}
        if acc:
            coef, u, tgt = sorted(acc, key=lambda t: (t[2], t[1], str(t[0])))[0]
            upart = f" U^{u}" if u else ""
            failures.append(
                f"structure equation fails at {g}: witness {coef}{upart} (x) {tgt}"
            )
    return Report(f"type-D {n.name}", tuple(failures))


# ---------------------------------------------------------------------------
# A-infinity modules


class AInfModule:
    """Right A-infinity module with a finite operation table.

    ``ops`` maps (generator, tuple of non-idempotent basis elements) to
    an F2 set of generators; m_2 with an idempotent input and all unital
    values are forced and never stored.
    """

    def __init__(
        self,
        algebra: StrandsAlgebra,
        generators,
        idempotents: dict,
        ops: dict,
        alex2: dict | None = None,
        maslov: dict | None = None,
        name: str = "",
    ):
        self.algebra = algebra
        self.generators = tuple(generators)
        self.idempotents = {g: frozenset(idempotents[g]) for g in self.generators}
        self.ops: dict[tuple[str, tuple[AlgebraElement, ...]], frozenset[str]] = {}
        for (g, inputs), outs in ops.items():
            key_inputs = []
            for el in inputs:
                parts = _expand_basis(el)
                if len(parts) != 1:
                    raise ValueError("table inputs must be single basis elements")
                if el.algebra.is_idempotent_element(el):
                    raise ValueError("idempotent inputs are forced, not stored")
                key_inputs.append(parts[0])
            outs = frozenset(outs)
            if outs:
                self.ops[(g, tuple(key_inputs))] = outs
        self.alex2 = dict(alex2 or {})
        self.maslov = dict(maslov or {})
        self.name = name or "A-inf module"
        for (g, inputs), outs in self.ops.items():
            if g not in self.idempotents:
                raise ValueError(f"unknown generator {g!r}")
            idem = self.idempotents[g]
            for el in inputs:
                if self.algebra.left_idempotent_set(el) != idem:
                    raise ValueError(
                        f"input chain of m(({g}; ...)) breaks idempotent compatibility"
                    )
                idem = self.algebra.right_idempotent_set(el)
            for o in outs:
                if o not in self.idempotents:
                    raise ValueError(f"unknown output generator {o!r}")
                if self.idempotents[o] != idem:
                    raise ValueError(
                        f"output {o} of m(({g}; ...)) has wrong idempotent"
                    )

    @property
    def max_arity(self) -> int:
        if not self.ops:
            return 1
        return max(1 + len(inputs) for _, inputs in self.ops)

    def m_eval(self, gen: str, inputs: tuple[AlgebraElement, ...]) -> frozenset[str]:
        """Evaluate m_{1+len(inputs)} on basis-element inputs.

        Idempotent inputs follow the unital rules: m_2(x, I_s) = x . I_s
        and every higher operation with an idempotent input vanishes.
        """
        alg = self.algebra
        if any(el.is_zero() for el in inputs):
            return frozenset()
        if any(alg.is_idempotent_element(el) for el in inputs):
            if len(inputs) != 1:
                return frozenset()
            el = inputs[0]
            if alg.left_idempotent_set(el) == self.idempotents[gen] and el == alg.idempotent_for(
                self.idempotents[gen]
            ):
                return frozenset({gen})
            return frozenset()
        return self.ops.get((gen, tuple(inputs)), frozenset())

    def __repr__(self):
        return f"AInfModule({self.name}, {len(self.generators)} generators over {self.algebra.name})"


def _nonidempotent_basis(alg: StrandsAlgebra) -> list[AlgebraElement]:
    return [b for b in alg.all_basis() if not alg.is_idempotent_element(b)]


def _chained_sequences(alg: StrandsAlgebra, start: frozenset[int], length: int):
    """Idempotent-chained sequences of non-idempotent basis elements."""
    if length == 0:
        yield ()
        return
    for b in _nonidempotent_basis(alg):
        if alg.left_idempotent_set(b) != start:
            continue
        for rest in _chained_sequences(alg, alg.right_idempotent_set(b), length - 1):
            yield (b,) + rest


def verify_ainf_module(m: AInfModule) -> Report:
    """All A-infinity relations up to the finite-table arity bound."""
    failures = []
    alg = m.algebra
    bound = 2 * m.max_arity + 2
    for g in m.generators:
        for seqlen in range(0, bound):
            for seq in _chained_sequences(alg, m.idempotents[g], seqlen):
                acc: set[str] = set()
                # mu_1 on one input.
                for i, a in enumerate(seq):
                    da = differentiate(a)
                    for b in _expand_basis(da):
                        for out in m.m_eval(g, seq[:i] + (b,) + seq[i + 1 :]):
                            acc ^= {out}
                # mu_2 on adjacent inputs.
                for i in range(len(seq) - 1):
                    prod = multiply(seq[i], seq[i + 1])
                    for b in _expand_basis(prod):
                        for out in m.m_eval(g, seq[:i] + (b,) + seq[i + 2 :]):
                            acc ^= {out}
                # m-after-m splittings.
                for i in range(0, len(seq) + 1):
                    for mid in m.m_eval(g, seq[:i]):
                        for out in m.m_eval(mid, seq[i:]):
                            acc ^= {out}
                if acc:
                    failures.append(
                        f"A-infinity relation fails at ({g}; {', '.join(map(str, seq))}): "
                        f"residue {sorted(acc)}"
                    )
                    return Report(f"A-inf {m.name}", tuple(failures))
    return Report(f"A-inf {m.name}", tuple(failures))


# ---------------------------------------------------------------------------
# DA-bimodules


class DABimodule:
    """Type-DA bimodule: left Type-D output, right A-infinity inputs."""

    def __init__(
        self,
        left_algebra: StrandsAlgebra,
        right_algebra: StrandsAlgebra,
        generators,
        left_idempotents: dict,
        right_idempotents: dict,
        ops: dict,
        name: str = "",
    ):
        self.left_algebra = left_algebra
        self.right_algebra = right_algebra
        self.generators = tuple(generators)
        self.left_idempotents = {g: frozenset(left_idempotents[g]) for g in self.generators}
        self.right_idempotents = {g: frozenset(right_idempotents[g]) for g in self.generators}
        self.ops: dict[tuple[str, tuple[AlgebraElement, ...]], frozenset] = {}
        for (g, inputs), terms in ops.items():
            key_inputs = []
            for el in inputs:
                if el.algebra.is_idempotent_element(el):
                    raise ValueError("idempotent inputs are forced, not stored")
                parts = _expand_basis(el)
                if len(parts) != 1:
                    raise ValueError("table inputs must be single basis elements")
                key_inputs.append(parts[0])
            acc: set[tuple[AlgebraElement, str]] = set()
            for coef, out in terms:
                for b in _expand_basis(coef):
                    acc ^= {(b, out)}
            if acc:
                self.ops[(g, tuple(key_inputs))] = frozenset(acc)
        self.name = name or "DA-bimodule"
        self._validate()

    def _validate(self):
        for (g, inputs), terms in self.ops.items():
            idem = self.right_idempotents[g]
            for el in inputs:
                if self.right_algebra.left_idempotent_set(el) != idem:
                    raise ValueError(
                        f"input chain of m(({g}; ...)) breaks idempotent compatibility"
                    )
                idem = self.right_algebra.right_idempotent_set(el)
            for coef, out in terms:
                if self.right_idempotents[out] != idem:
                    raise ValueError(
                        f"output {out} of m(({g}; ...)) has wrong right idempotent"
                    )
                left = self.left_algebra.idempotent_for(self.left_idempotents[g])
                right = self.left_algebra.idempotent_for(self.left_idempotents[out])
                if multiply(multiply(left, coef), right) != coef or coef.is_zero():
                    raise ValueError(
                        f"coefficient {coef} of m(({g}; ...)) is not idempotent compatible"
                    )

    @property
    def max_arity(self) -> int:
        if not self.ops:
            return 1
        return max(1 + len(inputs) for _, inputs in self.ops)

    def m_eval(self, gen: str, inputs: tuple[AlgebraElement, ...]) -> frozenset:
        """Evaluate m_{1+len(inputs)}: a set of (left coefficient, generator)."""
        ralg = self.right_algebra
        if any(el.is_zero() for el in inputs):
            return frozenset()
        if any(ralg.is_idempotent_element(el) for el in inputs):
            if len(inputs) != 1:
                return frozenset()
            el = inputs[0]
            if el == ralg.idempotent_for(self.right_idempotents[gen]):
                unit = self.left_algebra.idempotent_for(self.left_idempotents[gen])
                return frozenset({(unit, gen)})
            return frozenset()
        return self.ops.get((gen, tuple(inputs)), frozenset())

    def iterated(self, gen: str, inputs: tuple[AlgebraElement, ...], i: int) -> frozenset:
        """The iterate m^i: a set of (tuple of i left coefficients, generator)."""
        if i == 0:
            if inputs:
                return frozenset()
            return frozenset({((), gen)})
        acc: set = set()
        k1 = len(inputs) + 1  # arity of the full operation
        for j in range(0, k1):
            head, tail = inputs[: len(inputs) - j], inputs[len(inputs) - j :]
            for seq, mid in self.iterated(gen, head, i - 1):
                for coef, out in self.m_eval(mid, tail):
                    acc ^= {(seq + (coef,), out)}
        return frozenset(acc)

    def __repr__(self):
        return (
            f"DABimodule({self.name}, {len(self.generators)} generators, "
            f"{self.left_algebra.name} / {self.right_algebra.name})"
        )


def verify_da_bimodule(b: DABimodule) -> Report:
    """The DA structure equation on all chained input sequences."""
    failures = []
    ralg = b.right_algebra
    bound = 2 * b.max_arity + 2
    for g in b.generators:
        for seqlen in range(0, bound):
            for seq in _chained_sequences(ralg, b.right_idempotents[g], seqlen):
                acc: set[tuple[AlgebraElement, str]] = set()
                # Composition of two operations, left coefficients multiplied.
                for i in range(0, len(seq) + 1):
                    for coef1, mid in b.m_eval(g, seq[:i]):
                        for coef2, out in b.m_eval(mid, seq[i:]):
                            prod = multiply(coef1, coef2)
                            for p in _expand_basis(prod):
                                acc ^= {(p, out)}
                # Differential of the output coefficient.
                for coef, out in b.m_eval(g, seq):
                    for p in _expand_basis(differentiate(coef)):
                        acc ^= {(p, out)}
                # Differential of one input.
                for i, a in enumerate(seq):
                    for p in _expand_basis(differentiate(a)):
                        for coef, out in b.m_eval(g, seq[:i] + (p,) + seq[i + 1 :]):
                            for q in _expand_basis(coef):
                                acc ^= {(q, out)}
                # Product of two adjacent inputs.
                for i in range(len(seq) - 1):
                    for p in _expand_basis(multiply(seq[i], seq[i + 1])):
                        for coef, out in b.m_eval(g, seq[:i] + (p,) + seq[i + 2 :]):
                            for q in _expand_basis(coef):
                                acc ^= {(q, out)}
                if acc:
                    coef, out = sorted(acc, key=lambda t: (t[1], str(t[0])))[0]
                    failures.append(
                        f"DA relation fails at ({g}; {', '.join(map(str, seq))}): "
                        f"witness {coef} (x) {out}"
                    )
                    return Report(f"DA {b.name}", tuple(failures))
    return Report(f"DA {b.name}", tuple(failures))


# ---------------------------------------------------------------------------
# Morphisms of Type-D structures

U_PRESERVE = "preserve"
U_ANNIHILATE = "annihilate"  # kills every positive U-power (setting U = 0)
U_COLLAPSE = "collapse"      # forgets U-powers (setting U = 1)


class TypeDMorphism:
    """Map of Type-D structures given by a finite term table."""

    def __init__(
        self,
        source: TypeDStructure,
        target: TypeDStructure,
        table: dict,
        u_mode: str = U_PRESERVE,
        name: str = "",
    ):
        if source.algebra is not target.algebra:
            raise AlgebraMismatchError("morphism across different algebras")
        self.source = source
        self.target = target
        self.table = {g: _canonical_dterms(table.get(g, ())) for g in source.generators}
        self.u_mode = u_mode
        self.name = name or "phi"
        for g, terms in self.table.items():
            for coef, u, tgt in terms:
                left = source.algebra.idempotent_for(source.idempotents[g])
                right = source.algebra.idempotent_for(target.idempotents[tgt])
                if multiply(multiply(left, coef), right) != coef:
                    raise ValueError(
                        f"term {coef} of {self.name}({g}) is not idempotent compatible"
                    )

    def terms(self, gen: str):
        return self.table[gen]

    def apply_with_u(self, gen: str, u_in: int):
        """Terms of the morphism applied to U^{u_in} . gen."""
        if self.u_mode == U_ANNIHILATE and u_in > 0:
            return ()
        if self.u_mode == U_COLLAPSE:
            u_in = 0
        return tuple((c, u + u_in, t) for c, u, t in self.table[gen])

    def is_zero(self) -> bool:
        return all(not t for t in self.table.values())

    def table_equal(self, other: "TypeDMorphism") -> bool:
        return self.table == other.table and self.u_mode == other.u_mode

    def __repr__(self):
        parts = []
        for g, terms in self.table.items():
            for coef, u, tgt in terms:
                umark = f"U^{u}." if u else ""
                parts.append(f"{g} -> {umark}{coef} (x) {tgt}")
        return f"{self.name}: " + ("0" if not parts else "; ".join(parts))


def is_type_d_morphism(phi: TypeDMorphism) -> Report:
    """Check the three-term D-morphism relation on every generator."""
    failures = []
    src, tgt = phi.source, phi.target
    for g in src.generators:
        acc: set[tuple[AlgebraElement, int, str]] = set()
        # (mu2 x Id)(Id x phi) delta
        for c1, u1, mid in src.terms(g):
            for c2, u2, out in phi.apply_with_u(mid, u1):
                prod = multiply(c1, c2)
                for b in _expand_basis(prod):
                    acc ^= {(b, u2, out)}
        # (mu2 x Id)(Id x delta') phi
        for c1, u1, mid in phi.apply_with_u(g, 0):
            for c2, u2, out in tgt.terms(mid):
                prod = multiply(c1, c2)
                for b in _expand_basis(prod):
                    acc ^= {(b, u1 + u2, out)}
        # (mu1 x Id) phi
        for c1, u1, mid in phi.apply_with_u(g, 0):
            for b in _expand_basis(differentiate(c1)):
                acc ^= {(b, u1, mid)}
        if acc:
            coef, u, tgtg = sorted(acc, key=lambda t: (t[2], t[1], str(t[0])))[0]
            upart = f" U^{u}" if u else ""
            failures.append(
                f"morphism relation fails at {g}: witness {coef}{upart} (x) {tgtg}"
            )
    return Report(f"morphism {phi.name}", tuple(failures))


def identity_morphism(n: TypeDStructure) -> TypeDMorphism:
    table = {
        g: [(n.algebra.idempotent_for(n.idempotents[g]), 0, g)] for g in n.generators
    }
    return TypeDMorphism(n, n, table, name=f"id_{n.name}")


def compose_morphisms(phi: TypeDMorphism, psi: TypeDMorphism) -> TypeDMorphism:
    """(mu2 x Id)(Id x psi) phi, from source(phi) to target(psi)."""
    if phi.target is not psi.source:
        raise ValueError("morphisms are not composable")
    if U_COLLAPSE in (phi.u_mode, psi.u_mode):
        mode = U_COLLAPSE
    elif U_ANNIHILATE in (phi.u_mode, psi.u_mode):
        mode = U_ANNIHILATE
    else:
        mode = U_PRESERVE
    table: dict[str, list] = {g: [] for g in phi.source.generators}
    for g in phi.source.generators:
        for c1, u1, mid in phi.terms(g):
            for c2, u2, out in psi.apply_with_u(mid, u1):
                prod = multiply(c1, c2)
                if not prod.is_zero():
                    table[g].append((prod, u2, out))
    return TypeDMorphism(
        phi.source, psi.target, table, u_mode=mode, name=f"{psi.name}.{phi.name}"
    )


def find_homotopy(phi: TypeDMorphism, psi: TypeDMorphism):
    """Solve for h with dh + hd + mu1 h = psi - phi; None when infeasible.

    The solve is an exact F2 linear system over all idempotent
    compatible table entries; a found witness is re-verified by
    substitution before being returned.
    """
    if phi.source is not psi.source or phi.target is not psi.target:
        raise ValueError("homotopy requires parallel morphisms")
    if phi.u_mode != U_PRESERVE or psi.u_mode != U_PRESERVE:
        raise ValueError("homotopies are only solved for plain morphisms")
    src, tgt = phi.source, phi.target
    alg = src.algebra

    variables: list[tuple[str, AlgebraElement, str]] = []
    for g in src.generators:
        left = alg.idempotent_for(src.idempotents[g])
        for x in tgt.generators:
            right = alg.idempotent_for(tgt.idempotents[x])
            for b in alg.all_basis():
                if multiply(multiply(left, b), right) == b:
                    variables.append((g, b, x))
    var_index = {v: i for i, v in enumerate(variables)}

    equations: dict[tuple[str, AlgebraElement, str], int] = {}

    def eq_row(key):
        return equations.setdefault(key, 0)

    for idx, (g, b, x) in enumerate(variables):
        # (mu2 x Id)(Id x h) delta: h applied after delta of some g0.
        for g0 in src.generators:
            for c1, _, mid in src.terms(g0):
                if mid != g:
                    continue
                prod = multiply(c1, b)
                for p in _expand_basis(prod):
                    key = (g0, p, x)
                    equations[key] = eq_row(key) ^ (1 << idx)
        # (mu2 x Id)(Id x delta') h.
        for c2, _, out in tgt.terms(x):
            prod = multiply(b, c2)
            for p in _expand_basis(prod):
                key = (g, p, out)
                equations[key] = eq_row(key) ^ (1 << idx)
        # (mu1 x Id) h.
        for p in _expand_basis(differentiate(b)):
            key = (g, p, x)
            equations[key] = eq_row(key) ^ (1 << idx)

    rhs: dict[tuple[str, AlgebraElement, str], int] = {}
    for g in src.generators:
        acc: set[tuple[AlgebraElement, str]] = set()
        for c, _, t in psi.terms(g):
            for p in _expand_basis(c):
                acc ^= {(p, t)}
        for c, _, t in phi.terms(g):
            for p in _expand_basis(c):
                acc ^= {(p, t)}
        for p, t in acc:
            rhs[(g, p, t)] = 1

    keys = sorted(set(equations) | set(rhs), key=lambda k: (k[0], k[2], str(k[1])))
    mat = F2Matrix(len(keys), len(variables), [equations.get(k, 0) for k in keys])
    target_vec = 0
    for i, k in enumerate(keys):
        if rhs.get(k):
            target_vec |= 1 << i
    sol = solve_f2(mat, target_vec)
    if sol is None:
        return None
    table: dict[str, list] = {g: [] for g in src.generators}
    for i, (g, b, x) in enumerate(variables):
        if (sol >> i) & 1:
            table[g].append((b, 0, x))
    h = {g: _canonical_dterms(ts) for g, ts in table.items()}
    _check_homotopy(phi, psi, h)
    return h


def _check_homotopy(phi, psi, h) -> None:
    src, tgt = phi.source, phi.target
    for g in src.generators:
        acc: set[tuple[AlgebraElement, str]] = set()
        for c1, _, mid in src.terms(g):
            for c2, _, out in h.get(mid, ()):
                for p in _expand_basis(multiply(c1, c2)):
                    acc ^= {(p, out)}
        for c1, _, mid in h.get(g, ()):
            for c2, _, out in tgt.terms(mid):
                for p in _expand_basis(multiply(c1, c2)):
                    acc ^= {(p, out)}
            for p in _expand_basis(differentiate(c1)):
                acc ^= {(p, mid)}
        for c, _, t in psi.terms(g):
            for p in _expand_basis(c):
                acc ^= {(p, t)}
        for c, _, t in phi.terms(g):
            for p in _expand_basis(c):
                acc ^= {(p, t)}
        if acc:
            raise AssertionError("homotopy witness failed substitution check")


def mapping_cone(phi: TypeDMorphism, name: str = "") -> TypeDStructure:
    """Cone of a verified Type-D morphism: target + shifted source."""
    is_type_d_morphism(phi).require()
    src, tgt = phi.source, phi.target
    collisions = set(src.generators) & set(tgt.generators)
    sname = {g: (f"s.{g}" if g in collisions else g) for g in src.generators}
    tname = {g: (f"t.{g}" if g in collisions else g) for g in tgt.generators}
    gens = [tname[g] for g in tgt.generators] + [sname[g] for g in src.generators]
    idem = {}
    delta = {}
    maslov = {}
    alex2 = {}
    for g in tgt.generators:
        idem[tname[g]] = tgt.idempotents[g]
        delta[tname[g]] = [(c, u, tname[t]) for c, u, t in tgt.terms(g)]
        if g in tgt.maslov:
            maslov[tname[g]] = tgt.maslov[g]
        if g in tgt.alex2:
            alex2[tname[g]] = tgt.alex2[g]
    for g in src.generators:
        idem[sname[g]] = src.idempotents[g]
        delta[sname[g]] = [(c, u, sname[t]) for c, u, t in src.terms(g)] + [
            (c, u, tname[t]) for c, u, t in phi.terms(g)
        ]
        if g in src.maslov:
            maslov[sname[g]] = src.maslov[g] ^ 1
        if g in src.alex2:
            alex2[sname[g]] = src.alex2[g]
    cone = TypeDStructure(
        src.algebra,
        gens,
        idem,
        delta,
        u_decorated=src.u_decorated or tgt.u_decorated,
        alex2=alex2,
        maslov=maslov,
        name=name or f"Cone({phi.name})",
    )
    verify_type_d(cone).require()
    return cone


def find_table_isomorphism(n1: TypeDStructure, n2: TypeDStructure):
    """A generator bijection matching idempotents and delta tables exactly.

    Only identity-coefficient relabelings are searched; this is the
    notion of equality used for the printed catalog identifications.
    """
    if n1.algebra is not n2.algebra or len(n1.generators) != len(n2.generators):
        return None
    buckets: dict[frozenset, list[str]] = {}
    for g in n2.generators:
        buckets.setdefault(n2.idempotents[g], []).append(g)
    candidates = []
    for g in n1.generators:
        candidates.append(buckets.get(n1.idempotents[g], []))
    for assignment in itertools.product(*candidates):
        if len(set(assignment)) != len(assignment):
            continue
        mapping = dict(zip(n1.generators, assignment))
        ok = True
        for g in n1.generators:
            t1 = {(c, u, mapping[t]) for c, u, t in n1.terms(g)}
            t2 = set(n2.terms(mapping[g]))
            if t1 != t2:
                ok = False
                break
        if ok:
            return mapping
    return None


# ---------------------------------------------------------------------------
# Boundedness


def boundedness_status(x) -> str:
    """'bounded' / 'unbounded' for structures, by delta-graph acyclicity.

    For Type-D structures delta_k is a sum over length-k paths in the
    delta graph whose coefficient tensors never vanish (consecutive
    idempotents match by construction), so boundedness is exactly
    acyclicity.  Finite A-infinity and DA tables are always bounded.
    """
    if isinstance(x, (AInfModule, DABimodule)):
        return "bounded"
    if not isinstance(x, TypeDStructure):
        raise TypeError("boundedness_status expects a structure")
    adj = {g: {t for _, _, t in x.terms(g)} for g in x.generators}
    color: dict[str, int] = {}

    def dfs(v: str) -> bool:
        color[v] = 1
        for w in adj[v]:
            if color.get(w, 0) == 1:
                return False
            if color.get(w, 0) == 0 and not dfs(w):
                return False
        color[v] = 2
        return True

    for g in x.generators:
        if color.get(g, 0) == 0 and not dfs(g):
            return "unbounded"
    return "bounded"


# ---------------------------------------------------------------------------
# Box tensor products


def _delta_paths(n: TypeDStructure, gen: str, max_len: int):
    """All delta-paths from gen of length <= max_len.

    Yields (coefficients tuple, total U-power, end generator); length 0
    is the empty path.
    """
    frontier = [((), 0, gen)]
    yield ((), 0, gen)
    for _ in range(max_len):
        nxt = []
        for coefs, u, g in frontier:
            for c, du, t in n.terms(g):
                item = (coefs + (c,), u + du, t)
                nxt.append(item)
                yield item
        frontier = nxt
        if not frontier:
            break


def _pair_generators(m: AInfModule, n: TypeDStructure) -> list[tuple[str, str]]:
    return [
        (p, y)
        for p in m.generators
        for y in n.generators
        if m.idempotents[p] == n.idempotents[y]
    ]


def box_tensor(m: AInfModule, n: TypeDStructure, name: str = "") -> GradedChainComplex:
    """The pairing complex with differential sum m_{k+1} (x) delta_k.

    Output is an F2 complex, or an F2[U] complex when the Type-D side is
    U-decorated.  Generators are idempotent-matched pairs "p|y".
    """
    if m.algebra is not n.algebra:
        raise AlgebraMismatchError("box tensor across different algebras")
    if boundedness_status(m) != "bounded" and boundedness_status(n) != "bounded":
        raise UnboundedError("box tensor needs one bounded factor")
    pairs = _pair_generators(m, n)
    index = {pq: i for i, pq in enumerate(pairs)}
    size = len(pairs)
    u_dec = n.u_decorated

    terms: dict[int, dict[int, int]] = {}
    for col, (p, y) in enumerate(pairs):
        for coefs, u, yend in _delta_paths(n, y, m.max_arity - 1):
            for q in m.m_eval(p, coefs):
                row = index.get((q, yend))
                if row is None:
                    raise PairingError(
                        f"differential leaves the idempotent-matched pairs at {q}|{yend}"
                    )
                cur = terms.setdefault(col, {})
                cur[row] = cur.get(row, 0) ^ f2poly_monomial(u)

    gnames = tuple(f"{p}|{y}" for p, y in pairs)
    alex2 = []
    maslov = []
    graded = True
    for p, y in pairs:
        if p in m.alex2 and y in n.alex2:
            alex2.append(m.alex2[p] + n.alex2[y])
        else:
            graded = False
            alex2.append(0)
        mp = m.maslov.get(p)
        my = n.maslov.get(y)
        if mp is None or my is None:
            raise PairingError(f"missing Maslov label on {p}|{y}")
        maslov.append(mp ^ my)

    if u_dec:
        mat = F2UMatrix(size, size)
        for col, rows in terms.items():
            for row, poly in rows.items():
                mat.data[row][col] = poly
    else:
        mat = F2Matrix(size, size)
        for col, rows in terms.items():
            for row, poly in rows.items():
                if poly not in (0, 1):
                    raise PairingError("U-power in an undecorated pairing")
                if poly:
                    mat.data[row] |= 1 << col
    return GradedChainComplex(
        RING_F2U if u_dec else RING_F2,
        gnames,
        tuple(alex2),
        tuple(maslov),
        mat,
        graded=graded,
        name=name or f"{m.name} (box) {n.name}",
    )


def f2poly_monomial(u: int) -> int:
    return 1 << u


class PairingMap:
    """Chain map between two pairing complexes, term by term.

    ``terms`` maps a source pair index to a dict target index ->
    F2[U] polynomial.  ``u_mode`` records how the inducing morphism
    treated U-powers so slice evaluation can respect it.
    """

    def __init__(self, source_cx, target_cx, source_pairs, target_pairs, terms, u_mode):
        self.source_cx = source_cx
        self.target_cx = target_cx
        self.source_pairs = source_pairs
        self.target_pairs = target_pairs
        self.terms = terms
        self.u_mode = u_mode

    def f2_matrix(self) -> F2Matrix:
        if self.source_cx.ring != RING_F2 or self.target_cx.ring != RING_F2:
            raise ValueError("f2_matrix needs F2 complexes on both sides")
        mat = F2Matrix(len(self.target_pairs), len(self.source_pairs))
        for col, rows in self.terms.items():
            for row, poly in rows.items():
                if poly not in (0, 1):
                    raise ValueError("unexpected U-power")
                if poly:
                    mat.data[row] |= 1 << col
        return mat

    def verify_chain_map(self) -> Report:
        """d_target . F = F . d_source with exact U bookkeeping."""
        failures = []
        src_d = self.source_cx.diff
        tgt_d = self.target_cx.diff
        ns, nt = len(self.source_pairs), len(self.target_pairs)

        def d_entry(d, i, j):
            if isinstance(d, F2UMatrix):
                return d.data[i][j]
            return (d.data[i] >> j) & 1

        def f_entry(i, j):
            return self.terms.get(j, {}).get(i, 0)

        for j in range(ns):
            for i in range(nt):
                acc = 0
                for k in range(nt):
                    a, b = d_entry(tgt_d, i, k), f_entry(k, j)
                    if a and b:
                        acc ^= _poly_combine(a, b, self.u_mode)
                for k in range(ns):
                    a, b = f_entry(i, k), d_entry(src_d, k, j)
                    if a and b:
                        acc ^= _poly_combine(b, a, self.u_mode)
                if acc:
                    failures.append(
                        f"chain map fails at {self.source_pairs[j]} -> {self.target_pairs[i]}"
                    )
                    return Report("pairing chain map", tuple(failures))
        return Report("pairing chain map", tuple(failures))


def _poly_combine(first: int, second: int, u_mode: str) -> int:
    """Compose U-polynomials of a differential step and a map step."""
    if u_mode == U_PRESERVE:
        return f2poly.pmul(first, second)
    if u_mode == U_COLLAPSE:
        # All U-powers are identified; only the mod-2 term count matters.
        return (first.bit_count() & 1) * (second.bit_count() & 1)
    if u_mode == U_ANNIHILATE:
        # Positive powers die before the map is applied; composing a
        # U-positive differential step with the map gives zero.
        a0 = first & 1
        return f2poly.pmul(a0, second) if a0 else 0
    raise ValueError(u_mode)


def box_map(m: AInfModule, phi: TypeDMorphism, name: str = "") -> PairingMap:
    """Id_m (box) phi, as a verified chain map of pairing complexes."""
    if m.algebra is not phi.source.algebra:
        raise AlgebraMismatchError("box map across different algebras")
    src_cx = box_tensor(m, phi.source)
    tgt_cx = box_tensor(m, phi.target)
    src_pairs = _pair_generators(m, phi.source)
    tgt_pairs = _pair_generators(m, phi.target)
    tindex = {pq: i for i, pq in enumerate(tgt_pairs)}

    terms: dict[int, dict[int, int]] = {}
    for col, (p, y) in enumerate(src_pairs):
        # Paths: delta_i in the source, one phi step, delta_j in the target.
        for coefs1, u1, mid in _delta_paths(phi.source, y, m.max_arity - 1):
            for cphi, u2, mid2 in phi.apply_with_u(mid, u1):
                room = m.max_arity - 1 - len(coefs1) - 1
                if room < 0:
                    continue
                for coefs2, u3, yend in _delta_paths(phi.target, mid2, room):
                    seq = coefs1 + (cphi,) + coefs2
                    for q in m.m_eval(p, seq):
                        row = tindex[(q, yend)]
                        cur = terms.setdefault(col, {})
                        cur[row] = cur.get(row, 0) ^ f2poly_monomial(u2 + u3)

    pm = PairingMap(src_cx, tgt_cx, src_pairs, tgt_pairs, terms, phi.u_mode)
    pm.verify_chain_map().require()
    return pm


# ---------------------------------------------------------------------------
# DA box tensor products


def da_box_d(b: DABimodule, n: TypeDStructure, name: str = "") -> TypeDStructure:
    """Box tensor of a DA-bimodule with a Type-D structure (a Type-D)."""
    if b.right_algebra is not n.algebra:
        raise AlgebraMismatchError("middle algebras do not match")
    if boundedness_status(b) != "bounded" and boundedness_status(n) != "bounded":
        raise UnboundedError("da box needs one bounded factor")
    pairs = [
        (p, y)
        for p in b.generators
        for y in n.generators
        if b.right_idempotents[p] == n.idempotents[y]
    ]
    gens = [f"{p}|{y}" for p, y in pairs]
    idem = {f"{p}|{y}": b.left_idempotents[p] for p, y in pairs}
    delta: dict[str, list] = {g: [] for g in gens}
    for p, y in pairs:
        for coefs, u, yend in _delta_paths(n, y, b.max_arity - 1):
            for coef, q in b.m_eval(p, coefs):
                delta[f"{p}|{y}"].append((coef, u, f"{q}|{yend}"))
    out = TypeDStructure(
        b.left_algebra,
        gens,
        idem,
        delta,
        u_decorated=n.u_decorated,
        name=name or f"{b.name} (box) {n.name}",
    )
    verify_type_d(out).require()
    return out


def da_box_da(b: DABimodule, n: DABimodule, name: str = "") -> DABimodule:
    """Box tensor of two DA-bimodules: (m (box) n)_k = sum (m_j x Id)(Id x n_k^{j-1})."""
    if b.right_algebra is not n.left_algebra:
        raise AlgebraMismatchError("middle algebras do not match")
    pairs = [
        (p, q)
        for p in b.generators
        for q in n.generators
        if b.right_idempotents[p] == n.left_idempotents[q]
    ]
    gens = [f"{p}|{q}" for p, q in pairs]
    left_idem = {f"{p}|{q}": b.left_idempotents[p] for p, q in pairs}
    right_idem = {f"{p}|{q}": n.right_idempotents[q] for p, q in pairs}
    kmax = b.max_arity * max(n.max_arity, 2) + 2
    ops: dict[tuple[str, tuple], list] = {}
    ralg = n.right_algebra
    for p, q in pairs:
        for seqlen in range(0, kmax):
            for seq in _chained_sequences(ralg, n.right_idempotents[q], seqlen):
                acc: set[tuple[AlgebraElement, str]] = set()
                for j in range(1, b.max_arity + 1):
                    for bcoefs, qend in n.iterated(q, seq, j - 1):
                        for coef, pend in b.m_eval(p, bcoefs):
                            acc ^= {(coef, f"{pend}|{qend}")}
                key = (f"{p}|{q}", seq)
                if acc:
                    ops[key] = [(c, g) for c, g in acc]
    out = DABimodule(
        b.left_algebra,
        n.right_algebra,
        gens,
        left_idem,
        right_idem,
        ops,
        name=name or f"{b.name} (box) {n.name}",
    )
    verify_da_bimodule(out).require()
    return out


def da_box(b: DABimodule, n, name: str = ""):
    if isinstance(n, TypeDStructure):
        return da_box_d(b, n, name)
    if isinstance(n, DABimodule):
        return da_box_da(b, n, name)
    raise TypeError("da_box pairs a DA-bimodule with a Type-D structure or DA-bimodule")


def da_box_morphism(
    b: DABimodule, phi: TypeDMorphism, name: str = ""
) -> TypeDMorphism:
    """Id_b (box) phi as a morphism of the box Type-D structures."""
    if b.right_algebra is not phi.source.algebra:
        raise AlgebraMismatchError("middle algebras do not match")
    src = da_box_d(b, phi.source)
    tgt = da_box_d(b, phi.target)
    table: dict[str, list] = {g: [] for g in src.generators}
    src_pairs = [
        (p, y)
        for p in b.generators
        for y in phi.source.generators
        if b.right_idempotents[p] == phi.source.idempotents[y]
    ]
    for p, y in src_pairs:
        for coefs1, u1, mid in _delta_paths(phi.source, y, b.max_arity - 1):
            for cphi, u2, mid2 in phi.apply_with_u(mid, u1):
                room = b.max_arity - 1 - len(coefs1) - 1
                if room < 0:
                    continue
                for coefs2, u3, yend in _delta_paths(phi.target, mid2, room):
                    seq = coefs1 + (cphi,) + coefs2
                    for coef, q in b.m_eval(p, seq):
                        table[f"{p}|{y}"].append((coef, u2 + u3, f"{q}|{yend}"))
    out = TypeDMorphism(src, tgt, table, u_mode=phi.u_mode, name=name or f"Id (box) {phi.name}")
    is_type_d_morphism(out).require()
    return out
