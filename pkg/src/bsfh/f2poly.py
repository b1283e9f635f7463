"""Polynomials over F2 in one variable U, packed into Python ints.

Bit k of the int is the coefficient of U^k, so 0 is the zero polynomial,
1 is the constant 1, and ``1 << k`` is U^k.  Addition is xor; the
representation is canonical by construction.
"""

from __future__ import annotations

ZERO = 0
ONE = 1


def umono(k: int) -> int:
    """The monomial U^k."""
    if k < 0:
        raise ValueError("negative U-power")
    return 1 << k


def deg(p: int) -> int:
    """Degree of p, with deg(0) = -1."""
    return p.bit_length() - 1


def padd(p: int, q: int) -> int:
    return p ^ q


def pmul(p: int, q: int) -> int:
    """Carry-less multiplication."""
    out = 0
    while q:
        low = q & -q
        out ^= p << (low.bit_length() - 1)
        q ^= low
    return out


def pdivmod(p: int, q: int) -> tuple[int, int]:
    """Euclidean division p = quot*q + rem with deg(rem) < deg(q)."""
    if q == 0:
        raise ZeroDivisionError("division by the zero polynomial")
    dq = deg(q)
    quot = 0
    while deg(p) >= dq:
        shift = deg(p) - dq
        quot ^= 1 << shift
        p ^= q << shift
    return quot, p


def pdiv(p: int, q: int) -> int:
    quot, rem = pdivmod(p, q)
    if rem:
        raise ValueError("not divisible")
    return quot


def divides(q: int, p: int) -> bool:
    if q == 0:
        return p == 0
    return pdivmod(p, q)[1] == 0


def pgcd(p: int, q: int) -> int:
    while q:
        p, q = q, pdivmod(p, q)[1]
    return p


def u_order(p: int) -> int:
    """Largest k with U^k dividing p (p nonzero)."""
    if p == 0:
        raise ValueError("zero polynomial")
    return (p & -p).bit_length() - 1


def pstr(p: int) -> str:
    if p == 0:
        return "0"
    parts = []
    k = 0
    while p:
        if p & 1:
            parts.append("1" if k == 0 else ("U" if k == 1 else f"U^{k}"))
        p >>= 1
        k += 1
    return "+".join(parts)
