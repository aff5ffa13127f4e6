"""Truncated bivariate Puiseux series in x^(1/3) and xbar^(1/3).

A :class:`Puiseux2` stores coefficients ``c[m, n]`` of the monomials
``x^(m/3) xbar^(n/3)`` for ``0 <= m, n <= order``.  The two variables are
independent formal symbols; conjugation only enters when a series is
evaluated.  Exponents are kept as integer thirds so that the 1/3-spaced
spectrum is tracked exactly.
"""
from __future__ import annotations

import math
from typing import Iterable

import numpy as np

from . import specfun

__all__ = [
    "Puiseux2",
    "OrderMismatchError",
    "series_mul",
    "series_exp",
    "series_log1p",
    "binomial",
    "binomial_pow_third",
    "integer_power_series",
    "a_series",
    "A_PREFACTOR",
    "DEFAULT_ORDER",
]

DEFAULT_ORDER = 12

# 2 * 2^(1/3) pi^2 / (sqrt(3) Gamma(1/6)^2 Gamma(4/3)^2)
A_PREFACTOR = (
    2.0
    * 2.0 ** (1.0 / 3.0)
    * math.pi**2
    / (math.sqrt(3.0) * specfun.gamma(1.0 / 6.0).real ** 2 * specfun.gamma(4.0 / 3.0).real ** 2)
)


class OrderMismatchError(ValueError):
    """Two series with different truncation orders were combined."""


class Puiseux2:
    """Bivariate series ``sum c[m, n] x^(m/3) xbar^(n/3)``.

    Instances are treated as immutable: arithmetic returns new objects and
    the coefficient array is marked read-only.
    """

    __slots__ = ("_c",)

    def __init__(self, coeffs):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError("coefficient array must be square")
        c.setflags(write=False)
        self._c = c

    # constructors ---------------------------------------------------------
    @classmethod
    def zero(cls, order: int) -> "Puiseux2":
        return cls(np.zeros((order + 1, order + 1), complex))

    @classmethod
    def one(cls, order: int) -> "Puiseux2":
        return cls.monomial(order, 0, 0)

    @classmethod
    def monomial(cls, order: int, m: int, n: int, coeff: complex = 1.0) -> "Puiseux2":
        c = np.zeros((order + 1, order + 1), complex)
        if m <= order and n <= order:
            c[m, n] = coeff
        return cls(c)

    @classmethod
    def from_dict(cls, order: int, coeffs: dict) -> "Puiseux2":
        c = np.zeros((order + 1, order + 1), complex)
        for (m, n), v in coeffs.items():
            if m < 0 or n < 0:
                raise ValueError("exponents must be non-negative")
            if m <= order and n <= order:
                c[m, n] = v
        return cls(c)

    # accessors ------------------------------------------------------------
    @property
    def order(self) -> int:
        return self._c.shape[0] - 1

    @property
    def coeffs(self) -> np.ndarray:
        """Read-only view of the coefficient array, indexed ``[m, n]``."""
        return self._c

    def __getitem__(self, mn) -> complex:
        m, n = mn
        if m > self.order or n > self.order:
            raise IndexError("exponent beyond truncation order")
        return complex(self._c[m, n])

    def items(self, tol: float = 0.0) -> Iterable[tuple[tuple[int, int], complex]]:
        for m, n in zip(*np.nonzero(np.abs(self._c) > tol)):
            yield (int(m), int(n)), complex(self._c[m, n])

    def __repr__(self) -> str:
        nz = sum(1 for _ in self.items())
        return f"Puiseux2(order={self.order}, nonzero={nz})"

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "Puiseux2") -> None:
        if other.order != self.order:
            raise OrderMismatchError(f"orders differ: {self.order} vs {other.order}")

    def __add__(self, other):
        if isinstance(other, Puiseux2):
            self._check(other)
            return Puiseux2(self._c + other._c)
        c = self._c.copy()
        c[0, 0] += other
        return Puiseux2(c)

    __radd__ = __add__

    def __neg__(self):
        return Puiseux2(-self._c)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, Puiseux2):
            return series_mul(self, other)
        return Puiseux2(self._c * other)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return Puiseux2(self._c / scalar)

    def __pow__(self, k: int):
        if k < 0 or int(k) != k:
            raise ValueError("only non-negative integer powers are supported")
        out = Puiseux2.one(self.order)
        base = self
        k = int(k)
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def conj_swap(self) -> "Puiseux2":
        """Series with coefficients ``conj(c[n, m])`` (formal conjugation)."""
        return Puiseux2(np.conj(self._c.T))

    def allclose(self, other: "Puiseux2", atol: float = 1e-12) -> bool:
        self._check(other)
        return bool(np.allclose(self._c, other._c, rtol=0.0, atol=atol))

    # evaluation -----------------------------------------------------------
    def evaluate(self, x: complex, xbar: complex | None = None) -> complex:
        """Evaluate with principal cube roots of ``x`` and ``xbar``.

        ``xbar`` defaults to ``conj(x)``.
        """
        x = complex(x)
        xbar = x.conjugate() if xbar is None else complex(xbar)
        k = np.arange(self.order + 1)
        px = x ** (k / 3.0) if x != 0 else (k == 0).astype(complex)
        pb = xbar ** (k / 3.0) if xbar != 0 else (k == 0).astype(complex)
        return complex(px @ self._c @ pb)


def series_mul(a: Puiseux2, b: Puiseux2) -> Puiseux2:
    """Cauchy product truncated at the common order."""
    a._check(b)
    N = a.order + 1
    ca, cb = a.coeffs, b.coeffs
    out = np.zeros((N, N), complex)
    rows_a = np.nonzero(np.any(ca != 0, axis=1))[0]
    rows_b = np.nonzero(np.any(cb != 0, axis=1))[0]
    for i in rows_a:
        for j in rows_b:
            if i + j >= N:
                continue
            # convolution along the second variable, truncated
            conv = np.convolve(ca[i], cb[j])[:N]
            out[i + j] += conv
    return Puiseux2(out)


def _leading_total_degree(a: Puiseux2) -> int:
    nz = np.nonzero(a.coeffs)
    if len(nz[0]) == 0:
        return 10**9
    return int(min(nz[0] + nz[1]))


def series_exp(a: Puiseux2) -> Puiseux2:
    """exp(a) for a series with vanishing constant term."""
    if abs(a[0, 0]) != 0.0:
        raise ValueError("series_exp requires a zero constant term")
    order = a.order
    out = Puiseux2.one(order)
    lead = _leading_total_degree(a)
    if lead > 2 * order:
        return out
    kmax = (2 * order) // lead
    term = Puiseux2.one(order)
    for k in range(1, kmax + 1):
        term = term * a / k
        out = out + term
    return out


def series_log1p(a: Puiseux2) -> Puiseux2:
    """log(1 + a) for a series with vanishing constant term."""
    if abs(a[0, 0]) != 0.0:
        raise ValueError("series_log1p requires a zero constant term")
    order = a.order
    out = Puiseux2.zero(order)
    lead = _leading_total_degree(a)
    if lead > 2 * order:
        return out
    kmax = (2 * order) // lead
    power = Puiseux2.one(order)
    for k in range(1, kmax + 1):
        power = power * a
        out = out + power * ((-1) ** (k + 1) / k)
    return out


_KINDS = ("x", "one_minus_x", "xbar", "one_minus_xbar")


def integer_power_series(coeffs, order: int, variable: str = "x") -> Puiseux2:
    """Embed an ordinary power series ``sum coeffs[k] v^k`` (v = x or xbar)."""
    c = np.zeros((order + 1, order + 1), complex)
    for k, v in enumerate(coeffs):
        m = 3 * k
        if m > order:
            break
        if variable == "x":
            c[m, 0] = v
        elif variable == "xbar":
            c[0, m] = v
        else:
            raise ValueError(f"unknown variable {variable!r}")
    return Puiseux2(c)


def binomial(exponent: float, order: int, variable: str = "x") -> Puiseux2:
    """Binomial series of ``(1 - v)^exponent`` in integer powers of v."""
    kmax = order // 3
    coeffs = [1.0]
    for k in range(1, kmax + 1):
        coeffs.append(coeffs[-1] * (k - 1 - exponent) / k)
    return integer_power_series(coeffs, order, variable)


def binomial_pow_third(kind: str, order: int = DEFAULT_ORDER) -> Puiseux2:
    """Series of one of the four cube-root factors of ``|x(1-x)|^(2/3)``.

    ``kind`` is one of ``"x"``, ``"one_minus_x"``, ``"xbar"`` or
    ``"one_minus_xbar"``.
    """
    if kind == "x":
        return Puiseux2.monomial(order, 1, 0)
    if kind == "xbar":
        return Puiseux2.monomial(order, 0, 1)
    if kind == "one_minus_x":
        return binomial(1.0 / 3.0, order, "x")
    if kind == "one_minus_xbar":
        return binomial(1.0 / 3.0, order, "xbar")
    raise ValueError(f"kind must be one of {_KINDS}")


def _hyp_coeffs(num, den, n):
    """Taylor coefficients of pFq(num; den; x) up to x^(n-1)."""
    out = [1.0]
    for k in range(1, n):
        t = out[-1] / k
        for a in num:
            t *= a + k - 1
        for b in den:
            t /= b + k - 1
        out.append(t)
    return out


def a_series(order: int = DEFAULT_ORDER) -> Puiseux2:
    """Puiseux expansion of A(x) about x = 0.

    ``A = (x F3(x) + xbar F3(xbar))/4 - k x^(1/3) xbar^(1/3) (1-x)^(1/3)
    (1-xbar)^(1/3) 2F1(x) 2F1(xbar)``, with ``F3 = 3F2(1,1,4/3;2,5/3;.)``,
    ``2F1 = 2F1(2/3,1;4/3;.)`` and ``k`` = :data:`A_PREFACTOR`.
    """
    if order < 2:
        raise ValueError("a_series needs order >= 2")
    nk = order // 3 + 1
    f3 = _hyp_coeffs((1.0, 1.0, 4.0 / 3.0), (2.0, 5.0 / 3.0), nk)
    xf3 = [0.0] + f3  # x * F3(x)
    first = integer_power_series(xf3, order, "x") + integer_power_series(xf3, order, "xbar")
    f21 = _hyp_coeffs((2.0 / 3.0, 1.0), (4.0 / 3.0,), nk)
    prod = (
        binomial_pow_third("x", order)
        * binomial_pow_third("xbar", order)
        * binomial_pow_third("one_minus_x", order)
        * binomial_pow_third("one_minus_xbar", order)
        * integer_power_series(f21, order, "x")
        * integer_power_series(f21, order, "xbar")
    )
    return first * 0.25 - prod * A_PREFACTOR
