"""Serialization helpers shared by the command line and the notebooks."""

from __future__ import annotations

import json
import math
from fractions import Fraction

# constants with a known closed form, as (value, factor string)
_PI = math.pi
KNOWN_CONSTANTS = [
    (2**3 * 3**-1.5, "2^3 * 3^-3/2"),
    (2**3 * 3**-1.5 * _PI**0.5, "2^3 * 3^-3/2 * pi^1/2"),
    (2**16 * 3**-4.5 / 5 * 11**-1.5, "2^16 * 3^-9/2 * 5^-1 * 11^-3/2"),
    (2**11 * 3**-4.5 / 5 * _PI, "2^11 * 3^-9/2 * 5^-1 * pi"),
    (2**10 * 3**-1.5 / 5 * 11**-1.5, "2^10 * 3^-3/2 * 5^-1 * 11^-3/2"),
    (2**5 * 3**-1.5 / 5, "2^5 * 3^-3/2 * 5^-1"),
    (2**-7.5 * 3**7 * 5**-1.5, "2^-15/2 * 3^7 * 5^-3/2"),
    (2**-22 * 3**28 / 5 * 11**3, "2^-22 * 3^28 * 5^-1 * 11^3"),
    (2**-16 * 3**18 * 5**2, "2^-16 * 3^18 * 5^2"),
]


def symbolic(value: float, rtol: float = 1e-9) -> str | None:
    for v, s in KNOWN_CONSTANTS:
        if abs(value - v) <= rtol * abs(v):
            return s
    return None


def exact(x: Fraction | int) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def real(x: float) -> str:
    return f"{x:.15g}"


def constant(x: float) -> dict:
    out = {"value": real(x)}
    s = symbolic(x)
    if s is not None:
        out["symbolic"] = s
    return out


def factorize(n: int) -> str:
    """``2^14 * 3^5 * 5^3`` style factorization of a positive integer."""
    if n == 1:
        return "1"
    parts, p = [], 2
    while p * p <= n:
        k = 0
        while n % p == 0:
            n //= p
            k += 1
        if k:
            parts.append(f"{p}^{k}" if k > 1 else str(p))
        p += 1
    if n > 1:
        parts.append(str(n))
    return " * ".join(parts)


def dumps(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"
