"""Exact rational helpers: simplest-rational search and string formatting."""

from __future__ import annotations

from fractions import Fraction
from math import floor


def simplest_in(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with smallest denominator (then smallest numerator
    magnitude) strictly inside the open interval (lo, hi)."""
    if not lo < hi:
        raise ValueError(f"empty interval ({lo}, {hi})")
    n = floor(lo) + 1
    if n < hi:
        return Fraction(n)
    k = floor(lo)
    a, b = lo - k, hi - k  # 0 <= a < b <= 1, no integer strictly inside
    if a == 0:
        # simplest in (0, b) is 1/m for the smallest workable m
        m = floor(1 / b) + 1
        return k + Fraction(1, m)
    inner = simplest_in(1 / b, 1 / a)
    return k + 1 / inner


def parse_rational(s) -> Fraction:
    if isinstance(s, int):
        return Fraction(s)
    if isinstance(s, Fraction):
        return s
    return Fraction(str(s))


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"
