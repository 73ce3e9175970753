"""Derivations, their exponential flows, and words of elementary automorphisms.

Two kinds of words are handled:

* words on affine space ``K^k`` made of :class:`Shear` steps
  ``x_d -> x_d + t*h`` with ``h`` free of ``x_d``;
* words on the hypersurface ``X: u*v = p(x)`` made of :class:`XGenerator`
  steps (``LIFT1``, ``LIFT2``, ``EPS``).

Words are stored in application order: ``steps[0]`` acts on a point first.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Optional, Sequence

from .errors import (
    ContextMismatchError,
    NoInverseWithinDegree,
    NotDivisibleError,
    NotNilpotentWithin,
    OffVarietyError,
    ShapeMismatchError,
    WordFormatError,
)
from .fields import QQ, Field
from .linalg import det, solve_sparse
from .modification import AffineTriple, ModPresentation, modify
from .parsing import parse
from .poly import (
    Poly,
    PolyMap,
    VarContext,
    as_context,
    compose,
    diff,
    divides,
    exact_divide,
    reduce_mod_X,
    substitute,
)

# ---------------------------------------------------------------------------
# derivations


@dataclass(frozen=True)
class Derivation:
    ctx: VarContext
    images: tuple

    def __post_init__(self):
        object.__setattr__(self, "images", tuple(self.images))
        if len(self.images) != len(self.ctx):
            raise ValueError("one image per variable required")
        for im in self.images:
            if im.ctx != self.ctx:
                raise ContextMismatchError(f"image {im} not over {self.ctx.names}")

    @classmethod
    def from_mapping(cls, ctx, images: dict, field: Field = QQ):
        ctx = as_context(ctx)
        out = []
        for n in ctx.names:
            im = images.get(n, 0)
            if isinstance(im, str):
                im = parse(im, ctx, field)
            elif isinstance(im, Poly):
                im = im.embed(ctx)
            else:
                im = Poly.const(ctx, im, field)
            out.append(im)
        return cls(ctx, tuple(out))

    @classmethod
    def shear(cls, ctx, d: str, h: Poly):
        """The derivation ``h * d/dx_d``; ``h`` must not involve ``x_d``."""
        ctx = as_context(ctx)
        h = h.embed(ctx)
        if not h.free_of(d):
            raise ValueError(f"shear coefficient {h} involves {d}")
        return cls.from_mapping(ctx, {d: h}, h.field)

    @property
    def field(self):
        return self.images[0].field

    def __getitem__(self, name):
        return self.images[self.ctx.index(name)]

    def __call__(self, f: Poly) -> Poly:
        return apply_derivation(self, f)

    def embed(self, ctx) -> "Derivation":
        """Extend to a larger context, killing the new variables."""
        ctx = as_context(ctx)
        return Derivation.from_mapping(
            ctx, {n: self[n].embed(ctx) for n in self.ctx.names}, self.field
        )


def apply_derivation(d: Derivation, f: Poly) -> Poly:
    if f.ctx != d.ctx:
        raise ContextMismatchError(f"derivation over {d.ctx.names}, polynomial over {f.ctx.names}")
    out = Poly.zero(f.ctx, f.field)
    for n, im in zip(d.ctx.names, d.images):
        if im:
            df = diff(f, n)
            if df:
                out = out + df * im
    return out


@dataclass(frozen=True)
class NilpotencyCertificate:
    orders: dict
    bound: int

    def recheck(self, d: Derivation) -> bool:
        for n, k in self.orders.items():
            a = Poly.var(d.ctx, n, d.field)
            for _ in range(k):
                a = apply_derivation(d, a)
            if a:
                return False
        return True


def check_lnd(d: Derivation, max_iter: int = 64) -> NilpotencyCertificate:
    """Orders ``n_i`` with ``d^n_i(x_i) == 0``; nilpotence on generators gives local nilpotence."""
    if max_iter < 1:
        raise ValueError("max_iter must be positive")
    orders = {}
    for n in d.ctx.names:
        a = Poly.var(d.ctx, n, d.field)
        k = 0
        while a:
            if k >= max_iter:
                raise NotNilpotentWithin(max_iter, n)
            a = apply_derivation(d, a)
            k += 1
        orders[n] = k
    return NilpotencyCertificate(orders, max(orders.values()))


def _time_poly(t, ctx: VarContext, field: Field):
    """Return (extended context, time as a Poly in it)."""
    if isinstance(t, str):
        ext = ctx if t in ctx else ctx.extend(t)
        return ext, Poly.var(ext, t, field)
    if isinstance(t, Poly):
        ext = ctx
        for n in t.ctx.names:
            if n not in ext:
                ext = ext.extend(n)
        return ext, t.embed(ext)
    return ctx, Poly.const(ctx, t, field)


def exp_flow(d: Derivation, cert: NilpotencyCertificate = None, t=1) -> PolyMap:
    """``exp(t*d)`` as a map of the context to itself (extended by the time symbol if needed)."""
    if cert is None:
        cert = check_lnd(d)
    ext, T = _time_poly(t, d.ctx, d.field)
    de = d.embed(ext) if ext != d.ctx else d
    comps = []
    for n in ext.names:
        if n not in d.ctx:
            comps.append(Poly.var(ext, n, d.field))
            continue
        a = Poly.var(ext, n, d.field)
        total = a
        tp = Poly.const(ext, 1, d.field)
        for j in range(1, cert.orders[n]):
            a = apply_derivation(de, a)
            tp = tp * T
            total = total + (a * tp).scale(Fraction(1, math.factorial(j)))
        comps.append(total)
    return PolyMap(ext, ext, comps)


# ---------------------------------------------------------------------------
# inversion by undetermined coefficients


def _monomials_upto(n: int, D: int):
    out = []
    for deg in range(D + 1):
        for combo in combinations_with_replacement(range(n), deg):
            e = [0] * n
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


def invert_by_degree_bound(m: PolyMap, D: int = None) -> PolyMap:
    """The inverse of a square map with components of degree at most ``D``.

    Solves the linear system ``G_i(m) = x_i`` for the unknown coefficients of
    ``G`` and then checks both composites.  The default bound is
    ``(max degree)^(n-1)``.
    """
    if m.source != m.target:
        raise ValueError("inversion needs a square map")
    ctx, field = m.source, m.field
    n = len(ctx)
    if D is None:
        D = max(1, m.max_degree()) ** (n - 1)
    monos = _monomials_upto(n, D)
    # pulled-back monomials, built incrementally
    images = {tuple([0] * n): Poly.const(ctx, 1, field)}
    for e in monos[1:]:
        i = next(j for j, k in enumerate(e) if k)
        prev = e[:i] + (e[i] - 1,) + e[i + 1:]
        images[e] = images[prev] * m.components[i]
    row_index = {}
    rows = []
    for col, e in enumerate(monos):
        for exp, c in images[e].terms.items():
            r = row_index.get(exp)
            if r is None:
                r = row_index[exp] = len(rows)
                rows.append({})
            rows[r][col] = c
    for i in range(n):
        exp = tuple(1 if j == i else 0 for j in range(n))
        if exp not in row_index:
            row_index[exp] = len(rows)
            rows.append({})
    rhs = [[field.zero] * n for _ in rows]
    for i in range(n):
        exp = tuple(1 if j == i else 0 for j in range(n))
        rhs[row_index[exp]][i] = field.one
    sol = solve_sparse(rows, rhs, len(monos), field)
    if sol is None:
        raise NoInverseWithinDegree(f"no inverse of degree <= {D}")
    comps = [Poly(ctx, {e: c for e, c in zip(monos, vec) if c}, field) for vec in sol]
    inv = PolyMap(ctx, ctx, comps)
    ident = PolyMap.identity(ctx, field)
    if compose([inv, m]) != ident or compose([m, inv]) != ident:
        raise NoInverseWithinDegree(f"degree-{D} candidate is only a one-sided inverse")
    return inv


# ---------------------------------------------------------------------------
# lifting through modifications


def in_presentation_ideal(pres: ModPresentation, g: Poly) -> bool:
    """Whether ``g`` vanishes on the modification (``y_i := b_i/f``, denominators cleared)."""
    t = pres.triple
    amb = t.ambient
    f, bs = t.f, t.center_gens
    ys = [pres.context.index(y) for y in pres.new_vars]
    xs = [pres.context.index(n) for n in amb.names]
    if not g:
        return True
    D = max(sum(e[i] for i in ys) for e in g.terms)
    fpow = [Poly.const(amb, 1, t.field)]
    for _ in range(D):
        fpow.append(fpow[-1] * f)
    total = Poly.zero(amb, t.field)
    for e, c in g.terms.items():
        xe = tuple(e[i] for i in xs)
        term = Poly(amb, {xe: c}, t.field)
        k = 0
        for b, i in zip(bs, ys):
            if e[i]:
                term = term * b ** e[i]
                k += e[i]
        total = total + term * fpow[D - k]
    if t.relation is None:
        return not total
    return not total or divides(t.relation, total)


def _divide_by_list(a: Poly, divisors: Sequence[Poly]):
    """Multivariate division; returns (quotients, remainder)."""
    qs = [Poly.zero(a.ctx, a.field) for _ in divisors]
    r = a
    rem = Poly.zero(a.ctx, a.field)
    leads = [d.lead() for d in divisors]
    while r:
        e, c = r.lead()
        for i, (ed, cd) in enumerate(leads):
            diffe = tuple(x - y for x, y in zip(e, ed))
            if all(k >= 0 for k in diffe):
                t = Poly(a.ctx, {diffe: c / cd}, a.field)
                qs[i] = qs[i] + t
                r = r - t * divisors[i]
                break
        else:
            lt = Poly(a.ctx, {e: c}, a.field)
            rem = rem + lt
            r = r - lt
    return qs, rem


def lift_derivation(t: AffineTriple, d: Derivation, pres: ModPresentation = None) -> Derivation:
    """The derivation of the modification that agrees with ``d`` on the ambient variables.

    Needs ``d(f) == 0`` and ``d(b_i)`` in the center ideal; the image of ``y_i``
    is ``d(b_i)/f`` read through ``b_j = f*y_j``.
    """
    if pres is None:
        pres = modify(t, assume_prime=True)
    if d.ctx != t.ambient:
        raise ContextMismatchError("derivation and triple use different contexts")
    if apply_derivation(d, t.f):
        if t.relation is None or not divides(t.relation, apply_derivation(d, t.f)):
            raise NotDivisibleError("the derivation does not kill f")
    ext = pres.context
    field = t.field
    images = {n: d[n].embed(ext) for n in t.ambient.names}
    divisors = [t.f, *t.center_gens] + ([t.relation] if t.relation is not None else [])
    for y, b in zip(pres.new_vars, t.center_gens):
        db = apply_derivation(d, b)
        try:
            img = exact_divide(db, t.f).embed(ext)
        except NotDivisibleError:
            qs, rem = _divide_by_list(db, divisors)
            if rem:
                raise NotDivisibleError(f"d({b}) = {db} is not visibly in the center ideal") from None
            img = qs[0].embed(ext)
            for qj, yj in zip(qs[1:], pres.new_vars):
                img = img + qj.embed(ext) * Poly.var(ext, yj, field)
        images[y] = img
    lifted = Derivation.from_mapping(ext, images, field)
    for eq in pres.equations:
        if not in_presentation_ideal(pres, apply_derivation(lifted, eq)):
            raise NotDivisibleError("lifted derivation does not preserve the presentation ideal")
    return lifted


def check_lift_intertwines(t: AffineTriple, d: Derivation, lifted: Derivation, pres: ModPresentation) -> bool:
    """``sigma^* o d == d' o sigma^*`` on ambient generators, and ``d'`` preserves the equations."""
    for n in t.ambient.names:
        x = Poly.var(t.ambient, n, t.field)
        lhs = substitute(apply_derivation(d, x), pres.blowdown)
        rhs = apply_derivation(lifted, substitute(x, pres.blowdown))
        if lhs != rhs:
            return False
    return all(in_presentation_ideal(pres, apply_derivation(lifted, eq)) for eq in pres.equations)


def lift_through_blowdown(mu: PolyMap, a=0, names=("x", "y", "z")) -> PolyMap:
    """Lift ``mu`` through ``sigma_a: (x, y, z) -> (x, y, (x-a)*z)``.

    ``mu`` must fix ``x`` and map ``{x=a, z=0}`` into ``{z=0}``; the lift is
    ``(x, mu_2 o sigma_a, (mu_3 o sigma_a)/(x-a))`` and satisfies
    ``mu o sigma_a == sigma_a o lift``.
    """
    ctx = mu.source
    if mu.target != ctx or len(ctx) != 3:
        raise ShapeMismatchError("expected a self-map of a three-variable space")
    xn, yn, zn = names
    field = mu.field
    X, Y, Z = (Poly.var(ctx, n, field) for n in names)
    if mu[xn] != X:
        raise ShapeMismatchError("the map must fix x")
    xa = X - a
    sigma = PolyMap.from_mapping(ctx, ctx, {zn: xa * Z}, field)
    m3 = substitute(mu[zn], sigma)
    try:
        third = exact_divide(m3, xa)
    except NotDivisibleError:
        raise ShapeMismatchError("the map does not preserve the blowdown center") from None
    lifted = PolyMap.from_mapping(ctx, ctx, {yn: substitute(mu[yn], sigma), zn: third}, field)
    if compose([mu, sigma]) != compose([sigma, lifted]):
        raise ShapeMismatchError("lift identity failed")
    return lifted


def lift_auto_G(mu: PolyMap, names=("x", "y", "z")) -> PolyMap:
    """Lift a map of shape ``(x, g1*y + x*g_1, g2*z + x*g_2)`` through ``(x, y, x*z)``."""
    ctx = mu.source
    xn, yn, zn = names
    field = mu.field
    Y, Z = Poly.var(ctx, yn, field), Poly.var(ctx, zn, field)
    r2 = mu[yn].specialize({xn: 0})
    r3 = mu[zn].specialize({xn: 0})
    g1 = r2.coeff(Y.lead()[0])
    g2 = r3.coeff(Z.lead()[0])
    if not g1 or r2 != Y.scale(g1) or not g2 or r3 != Z.scale(g2):
        raise ShapeMismatchError("map is not of the form (x, c1*y + x*g1, c2*z + x*g2)")
    return lift_through_blowdown(mu, 0, names)


# ---------------------------------------------------------------------------
# elementary steps and words


@dataclass(frozen=True)
class Shear:
    """``x_d -> x_d + t*h`` with ``h`` free of ``x_d``."""

    d: str
    h: Poly
    t: object = Fraction(1)

    def __post_init__(self):
        if not self.h.free_of(self.d):
            raise ValueError(f"shear coefficient {self.h} involves {self.d}")
        object.__setattr__(self, "t", self.h.field(self.t))

    def inverse(self) -> "Shear":
        return Shear(self.d, self.h, -self.t)

    def polymap(self, ctx=None) -> PolyMap:
        ctx = self.h.ctx if ctx is None else as_context(ctx)
        h = self.h.embed(ctx)
        return PolyMap.from_mapping(ctx, ctx, {self.d: Poly.var(ctx, self.d, h.field) + h.scale(self.t)}, h.field)

    def apply(self, point: Sequence) -> tuple:
        ctx = self.h.ctx
        i = ctx.index(self.d)
        pt = list(point)
        pt[i] = pt[i] + self.t * self.h.evaluate(point)
        return tuple(pt)

    def is_trivial(self) -> bool:
        return not self.h or not self.t


@dataclass(frozen=True)
class XPoint:
    xs: tuple
    u: object
    v: object

    def __post_init__(self):
        object.__setattr__(self, "xs", tuple(self.xs))

    def as_tuple(self) -> tuple:
        return self.xs + (self.u, self.v)

    @classmethod
    def from_tuple(cls, coords: Sequence):
        coords = tuple(coords)
        return cls(coords[:-2], coords[-2], coords[-1])


@dataclass(frozen=True)
class HypersurfaceX:
    """The hypersurface ``u*v = p(x)`` with ``p`` over its own context of ``k`` variables."""

    p: Poly
    u: str = "u"
    v: str = "v"

    def __post_init__(self):
        if self.p.is_constant():
            raise ValueError("p must be nonconstant")
        if self.u in self.p.ctx or self.v in self.p.ctx or self.u == self.v:
            raise ValueError("u and v must be fresh variable names")

    @property
    def k(self) -> int:
        return len(self.p.ctx)

    @property
    def xctx(self) -> VarContext:
        return self.p.ctx

    @property
    def ctx(self) -> VarContext:
        return self.p.ctx.extend(self.u, self.v)

    @property
    def field(self):
        return self.p.field

    @property
    def F(self) -> Poly:
        ctx = self.ctx
        return Poly.var(ctx, self.u, self.field) * Poly.var(ctx, self.v, self.field) - self.p.embed(ctx)

    def contains(self, P: XPoint) -> bool:
        return P.u * P.v == self.p.evaluate(P.xs)

    def point(self, xs, u=None, v=None) -> XPoint:
        """Point over ``xs`` completing the missing coordinate (the given one must be nonzero)."""
        f = self.field
        xs = tuple(f(c) for c in xs)
        val = self.p.evaluate(xs)
        if u is None and v is None:
            raise ValueError("give u or v")
        if u is None:
            v = f(v)
            if not v:
                raise ValueError("cannot solve for u when v = 0")
            u = val / v
        elif v is None:
            u = f(u)
            if not u:
                raise ValueError("cannot solve for v when u = 0")
            v = val / u
        P = XPoint(xs, f(u), f(v))
        if not self.contains(P):
            raise OffVarietyError(f"{P} is not on X")
        return P


Z_CTX = VarContext(["z"])


def _q_tilde(q: Poly) -> Poly:
    """``(q - q(0))/z``; equals ``q/z`` when ``q(0) == 0``."""
    return exact_divide(q - q.constant_value(), Poly.var(q.ctx, q.ctx.names[0], q.field))


@dataclass(frozen=True)
class XGenerator:
    """One of ``LIFT1``, ``LIFT2``, ``EPS`` on ``u*v = p(x)``.

    ``LIFT1`` moves ``x_d`` by ``s = t*q(v)*h(x)`` and corrects ``u``; ``LIFT2`` is
    the same with the roles of ``u`` and ``v`` swapped.  ``q`` is univariate in
    ``z`` and must vanish at 0 (use :meth:`raw` to bypass that check).
    """

    kind: str
    d: Optional[str] = None
    h: Optional[Poly] = None
    q: Optional[Poly] = None
    t: object = None

    def __post_init__(self):
        self._validate(check_q=True)

    def _validate(self, check_q):
        if self.kind == "EPS":
            return
        if self.kind not in ("LIFT1", "LIFT2"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.h is None or self.q is None or self.d is None:
            raise ValueError("LIFT generators need d, h and q")
        if not self.h.free_of(self.d):
            raise ValueError(f"h = {self.h} involves {self.d}")
        if len(self.q.ctx) != 1:
            raise ValueError("q must be univariate")
        object.__setattr__(self, "t", self.h.field(1 if self.t is None else self.t))
        if check_q and self.q.constant_value():
            raise ValueError("q(0) must be 0")

    @classmethod
    def raw(cls, kind, d=None, h=None, q=None, t=None) -> "XGenerator":
        """Construct without the ``q(0) == 0`` check (for negative tests)."""
        obj = object.__new__(cls)
        for name, val in (("kind", kind), ("d", d), ("h", h), ("q", q), ("t", t)):
            object.__setattr__(obj, name, val)
        obj._validate(check_q=False)
        return obj

    @classmethod
    def lift1(cls, d, h, q, t=1):
        return cls("LIFT1", d, h, q, t)

    @classmethod
    def lift2(cls, d, h, q, t=1):
        return cls("LIFT2", d, h, q, t)

    @classmethod
    def eps(cls):
        return cls("EPS")

    def inverse(self) -> "XGenerator":
        if self.kind == "EPS":
            return self
        return XGenerator.raw(self.kind, self.d, self.h, self.q, -self.t)

    def is_trivial(self) -> bool:
        return self.kind != "EPS" and (not self.h or not self.q or not self.t)


def _delta(p: Poly, d: str, w: str = "w_"):
    """``(p(x + w*e_d) - p(x))/w`` as a polynomial over ``x`` and a fresh ``w``."""
    while w in p.ctx:
        w += "_"
    ext = p.ctx.extend(w)
    W = Poly.var(ext, w, p.field)
    pe = p.embed(ext)
    shift = PolyMap.from_mapping(ext, ext, {d: Poly.var(ext, d, p.field) + W}, p.field)
    return exact_divide(substitute(pe, shift) - pe, W), ext, w


def xgen_polymap(X: HypersurfaceX, g: XGenerator, t=None) -> PolyMap:
    """The generator as a polynomial self-map of ``(x, u, v)`` space.

    With ``t`` a variable name the time becomes symbolic and the context is
    extended by it; otherwise the generator's own time is used.
    """
    field = X.field
    base = X.ctx
    if g.kind == "EPS":
        ctx = _time_poly(t, base, field)[0] if t is not None else base
        return PolyMap.from_mapping(ctx, ctx, {X.u: Poly.var(ctx, X.v, field), X.v: Poly.var(ctx, X.u, field)}, field)
    ctx, T = _time_poly(g.t if t is None else t, base, field)
    moving, fixed = (X.u, X.v) if g.kind == "LIFT1" else (X.v, X.u)
    Fv = Poly.var(ctx, fixed, field)
    to_fixed = PolyMap(g.q.ctx, ctx, [Fv])
    qv = substitute(g.q, to_fixed)
    qt = substitute(_q_tilde(g.q), to_fixed)
    h = g.h.embed(ctx)
    s = T * qv * h
    delta, dctx, w = _delta(X.p, g.d)
    images = {n: Poly.var(ctx, n, field) for n in X.xctx.names}
    images[w] = s
    dmap = PolyMap(dctx, ctx, [images[n] for n in dctx.names])
    dval = substitute(delta, dmap)
    new_moving = Poly.var(ctx, moving, field) + T * h * qt * dval
    return PolyMap.from_mapping(
        ctx, ctx, {g.d: Poly.var(ctx, g.d, field) + s, moving: new_moving}, field
    )


def apply_xgen(X: HypersurfaceX, g: XGenerator, P: XPoint, check: bool = True) -> XPoint:
    """Apply one generator to a point by direct evaluation."""
    if check and not X.contains(P):
        raise OffVarietyError(f"{P} is not on X")
    if g.kind == "EPS":
        return XPoint(P.xs, P.v, P.u)
    field = X.field
    if g.kind == "LIFT1":
        mv, fx = P.u, P.v
    else:
        mv, fx = P.v, P.u
    q0 = g.q.constant_value()
    qval = g.q.evaluate([fx])
    hval = g.h.evaluate(P.xs)
    s = g.t * qval * hval
    i = X.xctx.index(g.d)
    xs2 = list(P.xs)
    xs2[i] = xs2[i] + s
    if fx:
        qt = (qval - q0) / fx
    else:
        qt = diff(g.q, g.q.ctx.names[0]).evaluate([field.zero])
    if s:
        delta = (X.p.evaluate(xs2) - X.p.evaluate(P.xs)) / s
    else:
        delta = diff(X.p, g.d).evaluate(P.xs)
    mv2 = mv + g.t * hval * qt * delta
    if g.kind == "LIFT1":
        return XPoint(tuple(xs2), mv2, fx)
    return XPoint(tuple(xs2), fx, mv2)


@dataclass(frozen=True)
class AutoWord:
    """A word in application order, either on ``K^k`` (shears) or on ``X`` (generators)."""

    ctx: VarContext
    steps: tuple = ()
    space: str = "affine"  # "affine" or "X"

    def __post_init__(self):
        object.__setattr__(self, "steps", tuple(self.steps))
        object.__setattr__(self, "ctx", as_context(self.ctx))
        kind = Shear if self.space == "affine" else XGenerator
        if self.space not in ("affine", "X"):
            raise ValueError(f"unknown word space {self.space!r}")
        for s in self.steps:
            if not isinstance(s, kind):
                raise TypeError(f"{type(s).__name__} step in a {self.space} word")

    def __len__(self):
        return len(self.steps)

    def __add__(self, other: "AutoWord") -> "AutoWord":
        if other.ctx != self.ctx or other.space != self.space:
            raise ContextMismatchError("cannot concatenate words over different spaces")
        return AutoWord(self.ctx, self.steps + other.steps, self.space)

    def then(self, *steps) -> "AutoWord":
        return AutoWord(self.ctx, self.steps + tuple(steps), self.space)

    def pruned(self) -> "AutoWord":
        return AutoWord(self.ctx, tuple(s for s in self.steps if not s.is_trivial()), self.space)

    def apply(self, point, X: HypersurfaceX = None):
        if self.space == "affine":
            pt = tuple(point)
            for s in self.steps:
                pt = s.apply(pt)
            return pt
        if X is None:
            raise ValueError("applying an X word needs the hypersurface")
        P = point
        for g in self.steps:
            P = apply_xgen(X, g, P, check=False)
        return P

    def polymap(self, X: HypersurfaceX = None) -> PolyMap:
        """Point map of the whole word (first step innermost)."""
        if self.space == "affine":
            maps = [s.polymap(self.ctx) for s in self.steps]
            ident = PolyMap.identity(self.ctx)
        else:
            maps = [xgen_polymap(X, g) for g in self.steps]
            ident = PolyMap.identity(X.ctx, X.field)
        if not maps:
            return ident
        return compose(list(reversed(maps)))


def invert_word(w: AutoWord) -> AutoWord:
    """Reverse the steps and negate every time (``EPS`` is its own inverse)."""
    return AutoWord(w.ctx, tuple(s.inverse() for s in reversed(w.steps)), w.space)


def verify_preserves_X(X: HypersurfaceX, w, compose_limit: int = 4, time_var: str = "t_") -> bool:
    """Each generator maps ``X`` into ``X`` identically in a symbolic time.

    ``w`` may be a word or a single generator.  Short words are also checked
    as one composite with their actual times.
    """
    steps = [w] if isinstance(w, XGenerator) else list(w.steps)
    while time_var in X.ctx:
        time_var += "_"
    for g in steps:
        m = xgen_polymap(X, g, t=time_var)
        F = X.F.embed(m.source)
        if reduce_mod_X(substitute(F, m), X.p, X.u, X.v):
            return False
    if isinstance(w, AutoWord) and 0 < len(steps) <= compose_limit:
        m = w.polymap(X)
        if reduce_mod_X(substitute(X.F, m), X.p, X.u, X.v):
            return False
    return True


# ---------------------------------------------------------------------------
# SL decomposition into transvections


def _transvection(ctx: VarContext, i: int, j: int, c, field: Field) -> Shear:
    return Shear(ctx.names[i], Poly.var(ctx, ctx.names[j], field), c)


def sl_decompose(M, ctx=None, field: Field = QQ) -> AutoWord:
    """Word of transvections ``x_i -> x_i + c*x_j`` whose point map is ``x -> M x``."""
    n = len(M)
    A = [[field(v) for v in row] for row in M]
    if any(len(r) != n for r in A):
        raise ValueError("matrix must be square")
    if det(A, field) != field.one:
        raise ValueError("matrix must have determinant 1")
    ctx = VarContext([f"x{i}" for i in range(1, n + 1)]) if ctx is None else as_context(ctx)
    ops = []  # (i, j, c): row_i += c * row_j

    def rowop(i, j, c):
        if c:
            for k in range(n):
                A[i][k] = A[i][k] + c * A[j][k]
            ops.append((i, j, c))

    for col in range(n):
        if A[col][col] != field.one:
            r = next((r for r in range(col + 1, n) if A[r][col]), None)
            if r is None and col + 1 < n:
                rowop(col + 1, col, field.one)
                r = col + 1
            if r is not None:
                rowop(col, r, (field.one - A[col][col]) / A[r][col])
        for r in range(n):
            if r != col:
                rowop(r, col, -A[r][col])
    steps = [_transvection(ctx, i, j, -c, field) for (i, j, c) in reversed(ops)]
    word = AutoWord(ctx, tuple(steps))
    if not _word_matrix_matches(word, M, field):
        raise ArithmeticError("transvection word does not reproduce the matrix")
    return word


def linear_matrix(w: AutoWord, field: Field = QQ):
    """Matrix of a word of linear shears acting on column vectors."""
    n = len(w.ctx)
    m = w.polymap()
    out = []
    for comp in m.components:
        row = []
        for j in range(n):
            e = tuple(1 if k == j else 0 for k in range(n))
            row.append(comp.coeff(e))
        out.append(row)
    return out


def _word_matrix_matches(w: AutoWord, M, field) -> bool:
    return linear_matrix(w, field) == [[field(v) for v in row] for row in M]


# ---------------------------------------------------------------------------
# text format

_KV = re.compile(r"(\w+)=(.*?)(?=\s+\w+=|$)")


def _fmt_scalar(c) -> str:
    return str(c)


def _parse_scalar(text: str, field: Field):
    try:
        return field(Fraction(text.strip()))
    except (ValueError, ZeroDivisionError) as exc:
        raise WordFormatError(f"bad scalar {text!r}") from exc


def serialize_step(s) -> str:
    if isinstance(s, Shear):
        return f"SHEAR d={s.d} h={s.h} t={_fmt_scalar(s.t)}"
    if s.kind == "EPS":
        return "EPS"
    return f"{s.kind} d={s.d} h={s.h} q={s.q} t={_fmt_scalar(s.t)}"


def serialize_word(w: AutoWord) -> str:
    head = "VARS " + " ".join(w.ctx.names)
    if w.space == "X":
        head = "XVARS " + " ".join(w.ctx.names)
    return "\n".join([head] + [serialize_step(s) for s in w.steps]) + "\n"


def _kv(line: str, lineno: int) -> dict:
    parts = line.split(None, 1)
    rest = parts[1] if len(parts) > 1 else ""
    out = {}
    for m in _KV.finditer(rest):
        if m.group(1) in out:
            raise WordFormatError(f"line {lineno}: repeated field {m.group(1)!r}")
        out[m.group(1)] = m.group(2).strip()
    if rest.strip() and not out:
        raise WordFormatError(f"line {lineno}: cannot read fields in {line!r}")
    return out


def parse_step(line: str, ctx: VarContext, field: Field = QQ, lineno: int = 0):
    line = line.strip()
    op = line.split(None, 1)[0] if line else ""
    try:
        if op == "EPS":
            if line != "EPS":
                raise WordFormatError(f"line {lineno}: EPS takes no fields")
            return XGenerator.eps()
        kv = _kv(line, lineno)
        if op == "SHEAR":
            if set(kv) != {"d", "h", "t"}:
                raise WordFormatError(f"line {lineno}: SHEAR needs d, h, t")
            return Shear(kv["d"], parse(kv["h"], ctx, field), _parse_scalar(kv["t"], field))
        if op in ("LIFT1", "LIFT2"):
            if set(kv) != {"d", "h", "q", "t"}:
                raise WordFormatError(f"line {lineno}: {op} needs d, h, q, t")
            return XGenerator(
                op, kv["d"], parse(kv["h"], ctx, field), parse(kv["q"], Z_CTX, field), _parse_scalar(kv["t"], field)
            )
    except WordFormatError:
        raise
    except Exception as exc:  # parse errors, validation errors
        raise WordFormatError(f"line {lineno}: {exc}") from exc
    raise WordFormatError(f"line {lineno}: unknown step {op!r}")


def parse_word(text: str, ctx=None, field: Field = QQ) -> AutoWord:
    """Read a word; a leading ``VARS``/``XVARS`` line fixes the context and space."""
    lines = [(i + 1, ln.strip()) for i, ln in enumerate(text.splitlines()) if ln.strip() and not ln.strip().startswith("#")]
    space = None
    if lines and lines[0][1].split()[0] in ("VARS", "XVARS"):
        head = lines[0][1].split()
        space = "affine" if head[0] == "VARS" else "X"
        ctx = VarContext(head[1:])
        lines = lines[1:]
    if ctx is None:
        raise WordFormatError("no VARS header and no context given")
    ctx = as_context(ctx)
    steps = [parse_step(ln, ctx, field, no) for no, ln in lines]
    if space is None:
        space = "X" if any(isinstance(s, XGenerator) for s in steps) else "affine"
    try:
        return AutoWord(ctx, tuple(steps), space)
    except TypeError as exc:
        raise WordFormatError(str(exc)) from exc


def word_stats(w: AutoWord) -> dict:
    """Length and the largest bit size of any rational appearing in the word."""
    bits = 0
    for s in w.steps:
        vals = []
        if isinstance(s, Shear):
            vals = [s.t, *s.h.terms.values()]
        elif s.kind != "EPS":
            vals = [s.t, *s.h.terms.values(), *s.q.terms.values()]
        for c in vals:
            if isinstance(c, Fraction):
                bits = max(bits, c.numerator.bit_length(), c.denominator.bit_length())
    return {"length": len(w), "max_coefficient_bits": bits}
