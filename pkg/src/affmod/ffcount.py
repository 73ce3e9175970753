"""Brute-force point counts over prime fields.

Enumeration is vectorized with numpy: the points of ``F_q^n`` are laid out
as an integer grid, chunked along the first variable so memory stays
bounded, and each polynomial is evaluated modulo ``q`` on the whole chunk.
"""

from __future__ import annotations

import os
from functools import lru_cache
from dataclasses import asdict, dataclass
from typing import Optional, Sequence

import numpy as np

from .errors import BudgetExceeded
from .fields import GF, Mod
from .poly import Poly, VarContext, diff

DEFAULT_MAX_CELLS = 10**8
MAX_Q = 251
CHUNK_CELLS = 1 << 20


def max_cells() -> int:
    """Enumeration budget, overridable through ``AFFMOD_MAX_CELLS``."""
    raw = os.environ.get("AFFMOD_MAX_CELLS")
    if raw is None:
        return DEFAULT_MAX_CELLS
    try:
        value = int(raw)
    except ValueError:
        raise ValueError(f"AFFMOD_MAX_CELLS must be an integer, got {raw!r}") from None
    if value < 1:
        raise ValueError("AFFMOD_MAX_CELLS must be positive")
    return value


def _residue(c, q: int) -> int:
    if isinstance(c, Mod):
        if c.q != q:
            raise ValueError(f"coefficient lives in F_{c.q}, not F_{q}")
        return c.value
    num, den = c.numerator, c.denominator
    if den % q == 0:
        raise ValueError(f"coefficient {c} has a denominator divisible by {q}")
    return num * pow(den, -1, q) % q


def _check_inputs(eqs: Sequence[Poly], q: int):
    GF(q)  # validates primality
    if q > MAX_Q:
        raise ValueError(f"q = {q} exceeds {MAX_Q}")
    if not eqs:
        raise ValueError("need at least one polynomial (or pass a context)")
    ctx = eqs[0].ctx
    for e in eqs:
        if e.ctx != ctx:
            raise ValueError("all polynomials must share a context")
    return ctx


@lru_cache(maxsize=1024)
def _power_table(q: int, e: int) -> np.ndarray:
    table = np.asarray([pow(a, e, q) for a in range(q)], dtype=np.int64)
    table.flags.writeable = False
    return table


def _eval_grid(f: Poly, cols: list, q: int, shape) -> np.ndarray:
    """Values of ``f`` mod q on a grid given per-variable coordinate arrays."""
    out = np.zeros(shape, dtype=np.int64)
    powers: dict = {}
    for exps, c in f.terms.items():
        r = _residue(c, q)
        if not r:
            continue
        term = None
        for i, e in enumerate(exps):
            if e:
                key = (i, e)
                if key not in powers:
                    powers[key] = _power_table(q, e)[cols[i]]
                term = powers[key] if term is None else term * powers[key] % q
        out += r if term is None else r * term
        out %= q
    return out


@lru_cache(maxsize=64)
def _small_grid(n: int, q: int):
    cols = [g.ravel() for g in np.meshgrid(*[np.arange(q, dtype=np.int64)] * n, indexing="ij")]
    for c in cols:
        c.flags.writeable = False
    return cols, (q**n,)


def _chunks(n: int, q: int):
    """Yield coordinate arrays covering ``F_q^n`` in blocks of leading-variable values."""
    if n == 0:
        yield [], ()
        return
    if q**n <= CHUNK_CELLS:
        yield _small_grid(n, q)
        return
    inner = q ** (n - 1)
    per = max(1, CHUNK_CELLS // max(1, inner))
    for start in range(0, q, per):
        lead = np.arange(start, min(q, start + per), dtype=np.int64)
        grids = np.meshgrid(lead, *[np.arange(q, dtype=np.int64)] * (n - 1), indexing="ij")
        yield [g.ravel() for g in grids], (grids[0].size,)


def _budget(n: int, q: int):
    cells = q**n
    cap = max_cells()
    if cells > cap:
        raise BudgetExceeded(f"search space {q}^{n} = {cells} exceeds the budget of {cap} cells")


def count_points(eqs: Sequence[Poly], q: int, ctx: VarContext = None) -> int:
    """Number of common zeros of ``eqs`` in ``F_q^n`` with ``n`` the number of variables."""
    if ctx is None:
        ctx = _check_inputs(eqs, q)
    else:
        GF(q)
        if any(e.ctx != ctx for e in eqs):
            raise ValueError("all polynomials must share the given context")
    n = len(ctx)
    _budget(n, q)
    total = 0
    for cols, shape in _chunks(n, q):
        if n == 0:
            ok = all(not _residue(e.constant_value(), q) for e in eqs)
            return int(ok)
        mask = np.ones(shape, dtype=bool)
        for e in eqs:
            mask &= _eval_grid(e, cols, q, shape) == 0
        total += int(mask.sum())
    return total


@dataclass(frozen=True)
class CountReport:
    q: int
    k: int
    N_X: int
    N_0: int
    predicted: int
    match: bool

    def to_dict(self) -> dict:
        return asdict(self)


def uv_identity(p: Poly, q: int, u: str = "u", v: str = "v") -> CountReport:
    """Count ``uv = p`` and ``p = 0`` over ``F_q`` and compare with ``q^k (q-1) + N_0 q``."""
    k = len(p.ctx)
    ctx = p.ctx.extend(u, v)
    F = Poly.var(ctx, u, p.field) * Poly.var(ctx, v, p.field) - p.embed(ctx)
    n_x = count_points([F], q)
    n_0 = count_points([p], q)
    predicted = q**k * (q - 1) + n_0 * q
    return CountReport(q, k, n_x, n_0, predicted, n_x == predicted)


@lru_cache(maxsize=64)
def uv_fiber_table(q: int) -> np.ndarray:
    """``T[c]`` = number of ``(u, v)`` in ``F_q^2`` with ``uv = c``, by enumeration (read-only, cached)."""
    u, v = np.meshgrid(np.arange(q), np.arange(q), indexing="ij")
    table = np.bincount((u * v % q).ravel(), minlength=q)
    table.flags.writeable = False
    return table


def value_histogram(p: Poly, q: int) -> np.ndarray:
    """``H[c]`` = number of points of ``F_q^k`` where ``p`` takes the value ``c``."""
    n = len(p.ctx)
    _budget(n, q)
    hist = np.zeros(q, dtype=np.int64)
    for cols, shape in _chunks(n, q):
        if n == 0:
            hist[_residue(p.constant_value(), q) if p else 0] += 1
            return hist
        hist += np.bincount(_eval_grid(p, cols, q, shape).ravel(), minlength=q)
    return hist


def uv_identity_fast(p: Poly, q: int) -> CountReport:
    """Same report as :func:`uv_identity`, counting ``uv = p`` fiberwise over the values of ``p``."""
    hist = value_histogram(p, q)
    n_x = int(hist @ uv_fiber_table(q))
    n_0 = int(hist[0])
    k = len(p.ctx)
    predicted = q**k * (q - 1) + n_0 * q
    return CountReport(q, k, n_x, n_0, predicted, n_x == predicted)


def singular_witness(eqs: Sequence[Poly], q: int, sample_budget: int = 10**5) -> Optional[tuple]:
    """A point of ``F_q^n`` where every equation and every partial derivative vanishes.

    Points are visited in lexicographic order up to ``sample_budget``.
    Returning ``None`` only means that no such point was seen.
    """
    if sample_budget < 1:
        raise ValueError("sample_budget must be at least 1")
    if not eqs:
        return None
    ctx = _check_inputs(eqs, q)
    n = len(ctx)
    system = list(eqs) + [diff(e, name) for e in eqs for name in ctx.names]
    system = [s for s in system if s]
    if n == 0:
        return () if not system else None
    seen = 0
    for cols, shape in _chunks(n, q):
        take = min(shape[0], sample_budget - seen)
        if take <= 0:
            break
        cols = [c[:take] for c in cols]
        mask = np.ones((take,), dtype=bool)
        for s in system:
            mask &= _eval_grid(s, cols, q, (take,)) == 0
        hits = np.flatnonzero(mask)
        if hits.size:
            i = int(hits[0])
            return tuple(int(c[i]) for c in cols)
        seen += take
    return None


__all__ = [
    "CountReport",
    "count_points",
    "max_cells",
    "singular_witness",
    "uv_fiber_table",
    "uv_identity",
    "uv_identity_fast",
    "value_histogram",
]
