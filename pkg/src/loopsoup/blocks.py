"""Virasoro block coefficients and extraction of three-point products.

Block coefficients ``F_K`` are computed numerically from the level-K Gram
matrix of the Verma module and the descendant three-point vectors.  The
reduced four-point series (the G function with ``|x|^(2(Delta_12 - Delta_3
- Delta_4))`` stripped) is then matched against the block expansion
monomial by monomial to extract the products ``C34^(p,p') C12^(p,p')``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .correlators import ChargeVector, _require_conservation, dims
from .series import Puiseux2, a_series, binomial, series_exp

__all__ = [
    "NullStateError",
    "BlockContext",
    "CProductTable",
    "partitions",
    "gram_matrix",
    "block_coefficients",
    "f1_closed_form",
    "f2_closed_form",
    "reduced_series",
    "extract_c_products",
    "special_case_tables",
    "special_case_charges",
    "null_state_scan",
    "null_states",
    "K_MAX",
    "COND_LIMIT",
]

K_MAX = 3
COND_LIMIT = 1e12
_DECOUPLE_TOL = 1e-9


class NullStateError(ArithmeticError):
    """The Gram matrix at some level is singular and the null state couples."""

    def __init__(self, level: int, c: float, h: float, where=None):
        self.level, self.c, self.h, self.where = level, c, h, where
        msg = f"null state at level {level} (c={c:.12g}, h={h:.12g})"
        if where is not None:
            msg += f" while extracting {where}"
        super().__init__(msg)


@dataclass(frozen=True)
class BlockContext:
    """Central charge, external dimensions (Delta_1..Delta_4) and Delta_P."""

    c: float
    external_dims: tuple
    internal_dim: float

    @classmethod
    def from_lambda(cls, lam: float, external_dims, internal_dim: float) -> "BlockContext":
        return cls(2.0 * lam, tuple(external_dims), internal_dim)


@dataclass
class CProductTable:
    """Extracted products keyed by ``(p, p')``."""

    entries: dict = field(default_factory=dict)
    max_level: int = 0

    def __getitem__(self, key) -> float:
        return self.entries[key]

    def nonzero(self, tol: float = 1e-9) -> dict:
        return {k: v for k, v in self.entries.items() if abs(v) > tol}

    def rows(self, tol: float = 1e-9):
        """``(p, p', value)`` rows with ``|value| > tol`` sorted by (p, p')."""
        return [(p, q, v) for (p, q), v in sorted(self.nonzero(tol).items())]


# ---------------------------------------------------------------------------
# Verma module
# ---------------------------------------------------------------------------


def partitions(n: int):
    """Partitions of n as non-increasing tuples, in reverse-lexicographic order."""
    out = []

    def rec(rem, mx, cur):
        if rem == 0:
            out.append(tuple(cur))
            return
        for k in range(min(rem, mx), 0, -1):
            rec(rem - k, k, cur + [k])

    rec(n, n, [])
    return out


@lru_cache(maxsize=None)
def _vac(ops: tuple, h: float, c: float) -> float:
    """<h| L_{ops[0]} ... L_{ops[-1]} |h> by commuting annihilators right."""
    if not ops:
        return 1.0
    if ops[-1] > 0 or ops[0] < 0:
        return 0.0
    # rightmost non-negative mode
    i = max(k for k, m in enumerate(ops) if m >= 0)
    a = ops[i]
    if i == len(ops) - 1:
        return h * _vac(ops[:-1], h, c) if a == 0 else 0.0
    b = ops[i + 1]
    head, tail = ops[:i], ops[i + 2 :]
    val = _vac(head + (b, a) + tail, h, c)
    if a - b != 0:
        val += (a - b) * _vac(head + (a + b,) + tail, h, c)
    if a + b == 0:
        val += c / 12.0 * (a**3 - a) * _vac(head + tail, h, c)
    return val


def gram_matrix(level: int, h: float, c: float) -> np.ndarray:
    basis = partitions(level)
    n = len(basis)
    G = np.empty((n, n))
    for i, pa in enumerate(basis):
        bra = tuple(reversed(pa))
        for j, pb in enumerate(basis):
            G[i, j] = _vac(bra + tuple(-k for k in pb), float(h), float(c))
    return G


def _vertex(part, h: float, d_near: float, d_far: float) -> float:
    """prod_i (h + k_i d_near - d_far + sum_{j>i} k_j) for L_{-k1}...L_{-kn}."""
    val = 1.0
    for i, k in enumerate(part):
        val *= h + k * d_near - d_far + sum(part[i + 1 :])
    return val


def _level_coefficient(level: int, ctx: BlockContext) -> float:
    d1, d2, d3, d4 = ctx.external_dims
    h, c = ctx.internal_dim, ctx.c
    basis = partitions(level)
    G = gram_matrix(level, h, c)
    vl = np.array([_vertex(p, h, d2, d1) for p in basis])
    vr = np.array([_vertex(p, h, d3, d4) for p in basis])
    w, U = np.linalg.eigh(G)
    scale = max(np.max(np.abs(w)), 1e-300)
    small = np.abs(w) <= scale / COND_LIMIT
    if not small.any():
        return float(vl @ np.linalg.solve(G, vr))
    # singular Gram: allowed only when the null directions decouple
    pl, pr = U.T @ vl, U.T @ vr
    ref_l = max(np.linalg.norm(vl), 1.0)
    ref_r = max(np.linalg.norm(vr), 1.0)
    if np.any(np.abs(pl[small]) > _DECOUPLE_TOL * ref_l) or np.any(
        np.abs(pr[small]) > _DECOUPLE_TOL * ref_r
    ):
        raise NullStateError(level, c, h)
    keep = ~small
    return float(np.sum(pl[keep] * pr[keep] / w[keep]))


def block_coefficients(ctx: BlockContext, k_max: int = K_MAX) -> list:
    """``[F_0, ..., F_{k_max}]`` for the block with internal dimension Delta_P.

    A singular Gram matrix (condition number above :data:`COND_LIMIT`) is
    accepted only when the null states decouple from both three-point
    vectors, as for the identity module; otherwise :class:`NullStateError`
    is raised.
    """
    if not 0 <= k_max <= K_MAX:
        raise ValueError(f"k_max must lie in [0, {K_MAX}]")
    return [1.0] + [_level_coefficient(k, ctx) for k in range(1, k_max + 1)]


def f1_closed_form(ctx: BlockContext) -> float:
    d1, d2, d3, d4 = ctx.external_dims
    h = ctx.internal_dim
    return (h + d2 - d1) * (h + d3 - d4) / (2.0 * h)


def f2_closed_form(ctx: BlockContext) -> float:
    """Level-two coefficient from the closed-form A, B, C combination.

    The denominator is the level-two Kac determinant, which is the ``B``
    expression; the quotient is therefore ``(A + C) / B``.
    """
    d1, d2, d3, d4 = ctx.external_dims
    h, c = ctx.internal_dim, ctx.c
    A = (h + d2 - d1) * (h + d2 - d1 + 1.0) * (
        (h + d3 - d4) * (h + d3 - d4 + 1.0) * (4.0 * h + c / 2.0) - 6.0 * h * (h + 2.0 * d3 - d4)
    )
    B = 4.0 * h * (2.0 * h + 1.0) * (4.0 * h + c / 2.0) - 36.0 * h**2
    C = (h + 2.0 * d2 - d1) * (
        4.0 * h * (2.0 * h + 1.0) * (h + 2.0 * d3 - d4)
        - 6.0 * h * (h + d3 - d4) * (h + d3 - d4 + 1.0)
    )
    return (A + C) / B


# ---------------------------------------------------------------------------
# Series and extraction
# ---------------------------------------------------------------------------


def reduced_series(c: ChargeVector, order: int = 12) -> Puiseux2:
    """Series of ``|x|^(-2(Delta_12 - Delta_3 - Delta_4)) G21_34(x)``.

    Equal to ``(1-x)^e (1-xbar)^e exp(2 Delta~ A)`` with
    ``e = Delta_14 - Delta_2 - Delta_3``; its constant term is 1.
    """
    if len(c) != 4:
        raise ValueError("four charges required")
    _require_conservation(c)
    d, dij, dt = dims(c)
    e = dij[0, 3] - d[1] - d[2]
    pref = binomial(e, order, "x") * binomial(e, order, "xbar")
    return pref * series_exp(a_series(order) * (2.0 * dt))


def extract_c_products(c: ChargeVector, max_p: int = 11, order: int | None = None) -> CProductTable:
    """Triangular solve for the products C34^(p,p') C12^(p,p').

    Entries are solved in increasing (p, p').  A ``NullStateError`` raised
    by any block carries the offending (p, p') in its ``where`` field.
    """
    if len(c) != 4:
        raise ValueError("four charges required")
    _require_conservation(c)
    if not 0 <= max_p <= 3 * K_MAX + 2:
        raise ValueError(f"max_p must lie in [0, {3 * K_MAX + 2}] with blocks up to level {K_MAX}")
    order = max_p if order is None else order
    if order < max(max_p, 2):
        raise ValueError("series order must be at least max_p")
    d, dij, _ = dims(c)
    lam = c.lam
    r = reduced_series(c, max(order, 2)).coeffs.real
    ext = tuple(d)
    h0 = dij[0, 1]

    @lru_cache(maxsize=None)
    def blk(q: int) -> list:
        ctx = BlockContext.from_lambda(lam, ext, h0 + q / 3.0)
        return block_coefficients(ctx, min(K_MAX, (max_p - q) // 3))

    entries: dict = {}
    for p in range(max_p + 1):
        for pp in range(max_p + 1):
            acc = r[p, pp]
            try:
                for q in range(p % 3, p + 1, 3):
                    fq = blk(q)[(p - q) // 3]
                    for qq in range(pp % 3, pp + 1, 3):
                        if (q, qq) == (p, pp):
                            continue
                        acc -= entries[(q, qq)] * fq * blk(qq)[(pp - qq) // 3]
            except NullStateError as exc:
                raise NullStateError(exc.level, exc.c, exc.h, where=(p, pp)) from None
            entries[(p, pp)] = float(acc)
    return CProductTable(entries, max_level=K_MAX)


_CASES = {
    "all_pi": (math.pi,) * 4,
    "all_half_pi": (math.pi / 2.0,) * 4,
}


def special_case_charges(case: str, lam: float) -> ChargeVector:
    if case not in _CASES:
        raise ValueError(f"case must be one of {sorted(_CASES)}")
    return ChargeVector(_CASES[case], lam)


def special_case_tables(case: str, lam: float, max_p: int = 11) -> CProductTable:
    """Table at equal charges pi or pi/2; entries equal (C^(p,p'))^2."""
    return extract_c_products(special_case_charges(case, lam), max_p)


def null_state_scan(case: str, lam_grid, max_p: int = 11, entry=(7, 1), jump: float = 10.0):
    """Locate poles of one extracted entry along a grid of intensities.

    A pole is reported between consecutive grid points where the entry
    changes sign with magnitude above ``jump`` times its median size on the
    grid, or where a null state is hit directly.  Returns a list of
    ``(lambda_star, entry, (lam_lo, lam_hi))`` with lambda_star the bracket
    midpoint.
    """
    grid = sorted(float(v) for v in lam_grid)
    vals = []
    for lam in grid:
        try:
            vals.append(special_case_tables(case, lam, max_p)[entry])
        except NullStateError:
            vals.append(math.nan)
    finite = [abs(v) for v in vals if math.isfinite(v)]
    typical = float(np.median(finite)) if finite else 0.0
    found = []
    for i in range(len(grid) - 1):
        a, b = vals[i], vals[i + 1]
        if not math.isfinite(a) or not math.isfinite(b):
            if not math.isfinite(a):
                found.append((grid[i], entry, (grid[i], grid[i])))
            continue
        if a * b < 0 and max(abs(a), abs(b)) > jump * typical:
            found.append((0.5 * (grid[i] + grid[i + 1]), entry, (grid[i], grid[i + 1])))
    if vals and not math.isfinite(vals[-1]):
        found.append((grid[-1], entry, (grid[-1], grid[-1])))
    return found


def null_states(c: ChargeVector, max_p: int = 11, rel_tol: float = 1e-8) -> list:
    """Internal modules whose Gram matrix is (nearly) singular.

    For every internal dimension ``Delta_12 + q/3`` with ``q <= max_p`` and
    every level used by the extraction, the smallest Gram eigenvalue is
    compared with the largest.  Each hit is a dict with ``q``, ``level``,
    ``h``, ``c``, the relative eigenvalue and whether the null direction
    couples to the three-point vectors (a coupled null state is a pole of
    the extracted coefficients).
    """
    if len(c) != 4:
        raise ValueError("four charges required")
    d, dij, _ = dims(c)
    cc = 2.0 * c.lam
    out = []
    for q in range(max_p + 1):
        h = dij[0, 1] + q / 3.0
        for level in range(1, min(K_MAX, (max_p - q) // 3) + 1):
            w, U = np.linalg.eigh(gram_matrix(level, h, cc))
            scale = max(np.max(np.abs(w)), 1e-300)
            i = int(np.argmin(np.abs(w)))
            rel = float(abs(w[i]) / scale)
            if rel > rel_tol:
                continue
            basis = partitions(level)
            vl = np.array([_vertex(b, h, d[1], d[0]) for b in basis])
            vr = np.array([_vertex(b, h, d[2], d[3]) for b in basis])
            tl = _DECOUPLE_TOL * max(np.linalg.norm(vl), 1.0)
            tr = _DECOUPLE_TOL * max(np.linalg.norm(vr), 1.0)
            coupled = bool(abs(U[:, i] @ vl) > tl or abs(U[:, i] @ vr) > tr)
            out.append({"q": q, "level": level, "h": float(h), "c": cc, "relative_eigenvalue": rel,
                        "coupled": coupled})
    return out
