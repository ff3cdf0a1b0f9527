"""Rational linear functionals over subset-indexed variables f(A)."""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable


class LinearExpr:
    """sum_A coef_A * f(A) + constant, with A given as a bitmask.

    Zero coefficients are never stored, so two expressions are equal exactly
    when their term maps and constants agree.
    """

    __slots__ = ("terms", "constant")

    def __init__(self, terms=None, constant=0):
        self.terms: dict[int, Fraction] = {}
        if terms:
            for mask, coef in dict(terms).items():
                coef = Fraction(coef)
                if coef:
                    self.terms[int(mask)] = coef
        self.constant = Fraction(constant)

    @classmethod
    def of(cls, *pairs: tuple[int, int], constant=0) -> "LinearExpr":
        """Build from ``(mask, coef)`` pairs, merging repeated masks."""
        acc: dict[int, Fraction] = {}
        for mask, coef in pairs:
            acc[mask] = acc.get(mask, 0) + Fraction(coef)
        return cls(acc, constant)

    def add_to(self, acc: dict, scale=1) -> None:
        for mask, coef in self.terms.items():
            v = acc.get(mask, 0) + scale * coef
            if v:
                acc[mask] = v
            else:
                acc.pop(mask, None)

    def __add__(self, other: "LinearExpr") -> "LinearExpr":
        acc = dict(self.terms)
        other.add_to(acc)
        return LinearExpr(acc, self.constant + other.constant)

    def __neg__(self) -> "LinearExpr":
        return LinearExpr({k: -v for k, v in self.terms.items()}, -self.constant)

    def __sub__(self, other: "LinearExpr") -> "LinearExpr":
        return self + (-other)

    def scale(self, k) -> "LinearExpr":
        k = Fraction(k)
        return LinearExpr({m: k * v for m, v in self.terms.items()}, k * self.constant)

    def __eq__(self, other) -> bool:
        if not isinstance(other, LinearExpr):
            return NotImplemented
        return self.terms == other.terms and self.constant == other.constant

    def __hash__(self):
        return hash((frozenset(self.terms.items()), self.constant))

    def is_zero(self) -> bool:
        return not self.terms and not self.constant

    def evaluate(self, f) -> Fraction:
        """Value under a set function given as a mapping or callable."""
        get = f if callable(f) else f.__getitem__
        return sum((c * get(m) for m, c in self.terms.items()), Fraction(0)) + self.constant

    def __repr__(self):
        if not self.terms:
            return f"LinearExpr({self.constant})"
        parts = [f"{c}*f[{m:#x}]" for m, c in sorted(self.terms.items())]
        if self.constant:
            parts.append(str(self.constant))
        return "LinearExpr(" + " + ".join(parts) + ")"


def f_sum(masks: Iterable[int], coef=1) -> LinearExpr:
    return LinearExpr.of(*((m, coef) for m in masks))
