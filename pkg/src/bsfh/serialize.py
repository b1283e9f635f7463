"""Text formats: algebra elements, module files, and catalog dumps.

Module and bimodule files are JSON with algebra elements written in
the strands syntax: idempotents ``I_``, ``I_1``, ``I_12``; chords
``rho``, ``rho_23``; completions ``rho_12:2``; registered product
names like ``rho_2*rho_1``; sums with ``+``.  An algebra qualifier
``WT:``/``WA:``/``WD:`` may prefix an element in CLI contexts.
"""

from __future__ import annotations

import json
from fractions import Fraction

from .strands import AlgebraElement, StrandsAlgebra, multiply, named_algebra
from .structures import AInfModule, DABimodule, TypeDMorphism, TypeDStructure


class ParseError(ValueError):
    pass


def parse_element(alg_or_text: StrandsAlgebra | str, text: str | None = None) -> AlgebraElement:
    """Parse an algebra element, with an optional WT:/WA:/WD: qualifier."""
    if text is None:
        text = str(alg_or_text)
        if ":" in text and text.split(":", 1)[0].upper() in ("WT", "WA", "WD"):
            prefix, rest = text.split(":", 1)
            return parse_element(named_algebra(prefix), rest)
        raise ParseError(f"element {text!r} needs an algebra qualifier")
    alg = alg_or_text
    text = text.strip()
    if ":" in text.split("*")[0] and text.split(":", 1)[0].upper() in ("WT", "WA", "WD"):
        prefix, rest = text.split(":", 1)
        return parse_element(named_algebra(prefix), rest)
    if not text or text == "0":
        return alg.zero()
    total = alg.zero()
    for term in text.split("+"):
        total = total + _parse_term(alg, term.strip())
    return total


def _parse_term(alg: StrandsAlgebra, term: str) -> AlgebraElement:
    if not term:
        raise ParseError("empty term")
    # Registered basis names (including product-style names) win.
    try:
        return alg.named(term)
    except KeyError:
        pass
    factors = [f.strip() for f in term.split("*")]
    out = None
    for f in factors:
        try:
            el = alg.named(f)
        except KeyError:
            raise ParseError(f"unknown element {f!r} in algebra {alg.name}") from None
        out = el if out is None else multiply(out, el)
    return out


def _parse_alex2(value) -> int | None:
    if value is None:
        return None
    frac = Fraction(str(value))
    doubled = frac * 2
    if doubled.denominator != 1:
        raise ParseError(f"Alexander grading {value!r} is not a half integer")
    return int(doubled)


def _alex2_str(a2: int | None):
    if a2 is None:
        return None
    return str(Fraction(a2, 2))


# ---------------------------------------------------------------------------
# Type-A modules (knot fixtures)


def ainf_from_dict(data: dict) -> AInfModule:
    if data.get("kind") != "type_a":
        raise ParseError("expected a type_a module file")
    alg = named_algebra(data["algebra"])
    gens = []
    idem = {}
    alex2 = {}
    maslov = {}
    for g in data["generators"]:
        name = g["name"]
        gens.append(name)
        idem[name] = frozenset(g["idempotent"])
        a2 = _parse_alex2(g.get("alexander"))
        if a2 is not None:
            alex2[name] = a2
        if g.get("maslov") is not None:
            maslov[name] = int(g["maslov"]) & 1
    ops = {}
    for op in data.get("operations", ()):
        inputs = tuple(parse_element(alg, s) for s in op["inputs"])
        key = (op["gen"], inputs)
        outs = frozenset(op["outputs"])
        if key in ops:
            raise ParseError(f"duplicate operation key for {op['gen']}")
        ops[key] = outs
    return AInfModule(
        alg, gens, idem, ops, alex2=alex2, maslov=maslov, name=data.get("name", "fixture")
    )


def ainf_to_dict(m: AInfModule, extra: dict | None = None) -> dict:
    data = {
        "kind": "type_a",
        "algebra": m.algebra.name,
        "name": m.name,
        "generators": [
            {
                "name": g,
                "idempotent": sorted(m.idempotents[g]),
                "alexander": _alex2_str(m.alex2.get(g)),
                "maslov": m.maslov.get(g),
            }
            for g in m.generators
        ],
        "operations": [
            {
                "gen": g,
                "inputs": [str(a) for a in inputs],
                "outputs": sorted(outs),
            }
            for (g, inputs), outs in sorted(m.ops.items(), key=lambda kv: (kv[0][0], len(kv[0][1])))
        ],
    }
    if extra:
        data.update(extra)
    return data


# ---------------------------------------------------------------------------
# Type-D structures and morphisms


def type_d_from_dict(data: dict) -> TypeDStructure:
    if data.get("kind") != "type_d":
        raise ParseError("expected a type_d module file")
    alg = named_algebra(data["algebra"])
    gens = []
    idem = {}
    alex2 = {}
    maslov = {}
    for g in data["generators"]:
        gens.append(g["name"])
        idem[g["name"]] = frozenset(g["idempotent"])
        a2 = _parse_alex2(g.get("alexander"))
        if a2 is not None:
            alex2[g["name"]] = a2
        if g.get("maslov") is not None:
            maslov[g["name"]] = int(g["maslov"]) & 1
    delta: dict[str, list] = {}
    for term in data.get("delta", ()):
        coef = parse_element(alg, term["coef"])
        delta.setdefault(term["gen"], []).append(
            (coef, int(term.get("u", 0)), term["target"])
        )
    return TypeDStructure(
        alg,
        gens,
        idem,
        delta,
        u_decorated=bool(data.get("u_decorated", False)),
        alex2=alex2,
        maslov=maslov,
        name=data.get("name", "module"),
    )


def type_d_to_dict(n: TypeDStructure) -> dict:
    return {
        "kind": "type_d",
        "algebra": n.algebra.name,
        "name": n.name,
        "u_decorated": n.u_decorated,
        "generators": [
            {
                "name": g,
                "idempotent": sorted(n.idempotents[g]),
                "alexander": _alex2_str(n.alex2.get(g)),
                "maslov": n.maslov.get(g),
            }
            for g in n.generators
        ],
        "delta": [
            {"gen": g, "coef": str(c), "u": u, "target": t}
            for g in n.generators
            for c, u, t in n.terms(g)
        ],
    }


def morphism_to_dict(phi: TypeDMorphism) -> dict:
    return {
        "kind": "type_d_morphism",
        "name": phi.name,
        "algebra": phi.source.algebra.name,
        "source": phi.source.name,
        "target": phi.target.name,
        "u_mode": phi.u_mode,
        "table": [
            {"gen": g, "coef": str(c), "u": u, "target": t}
            for g in phi.source.generators
            for c, u, t in phi.terms(g)
        ],
    }


def da_bimodule_to_dict(b: DABimodule) -> dict:
    return {
        "kind": "da_bimodule",
        "name": b.name,
        "left_algebra": b.left_algebra.name,
        "right_algebra": b.right_algebra.name,
        "generators": [
            {
                "name": g,
                "left_idempotent": sorted(b.left_idempotents[g]),
                "right_idempotent": sorted(b.right_idempotents[g]),
            }
            for g in b.generators
        ],
        "operations": [
            {
                "gen": g,
                "inputs": [str(a) for a in inputs],
                "terms": [{"coef": str(c), "target": t} for c, t in sorted(terms, key=str)],
            }
            for (g, inputs), terms in sorted(b.ops.items(), key=lambda kv: (kv[0][0], len(kv[0][1])))
        ],
    }


def dump_entry(entry) -> str:
    """Serialize a catalog entry or structure to deterministic JSON."""
    if isinstance(entry, TypeDStructure):
        data = type_d_to_dict(entry)
    elif isinstance(entry, AInfModule):
        data = ainf_to_dict(entry)
    elif isinstance(entry, TypeDMorphism):
        data = morphism_to_dict(entry)
    elif isinstance(entry, DABimodule):
        data = da_bimodule_to_dict(entry)
    elif hasattr(entry, "materialize"):
        data = type_d_to_dict(entry.materialize(3))
        data["note"] = "U^-1 tower truncated at depth 3; the pattern repeats"
    else:
        raise TypeError(f"cannot dump {type(entry).__name__}")
    return json.dumps(data, indent=2, sort_keys=True)


def load_file(path: str) -> dict:
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
