"""Seeded random instances for the property and acceptance suites."""

import random
from fractions import Fraction

from affmod.flows import AutoWord, HypersurfaceX, Shear, XGenerator, XPoint
from affmod.poly import Poly, PolyMap, VarContext

Z = VarContext(["z"])


def rand_frac(rng: random.Random, bound: int = 5, nonzero: bool = False) -> Fraction:
    while True:
        c = Fraction(rng.randint(-bound, bound), rng.randint(1, 3))
        if c or not nonzero:
            return c


def rand_poly(rng, ctx, names=None, max_deg=2, max_terms=3, nonzero=False) -> Poly:
    """Random polynomial in ``names`` (default: all of ``ctx``)."""
    names = list(ctx.names if names is None else names)
    idx = [ctx.index(n) for n in names]
    while True:
        terms = {}
        for _ in range(rng.randint(1, max_terms)):
            exp = [0] * len(ctx)
            budget = rng.randint(0, max_deg)
            for _ in range(budget):
                if idx:
                    exp[rng.choice(idx)] += 1
            terms[tuple(exp)] = rand_frac(rng)
        p = Poly(ctx, terms)
        if p or not nonzero:
            return p


def rand_q(rng, max_deg=3) -> Poly:
    """Random univariate ``q`` in ``z`` with ``q(0) = 0`` and ``q != 0``."""
    while True:
        q = Poly(Z, {(i,): rand_frac(rng) for i in range(1, rng.randint(1, max_deg) + 1)})
        if q:
            return q


def xctx(k: int) -> VarContext:
    return VarContext(["x", "y", "z"][:k] if k <= 3 else [f"x{i}" for i in range(1, k + 1)])


def rand_hypersurface(rng, k=None) -> HypersurfaceX:
    k = k or rng.randint(1, 2)
    ctx = xctx(k)
    while True:
        p = rand_poly(rng, ctx, max_deg=3, max_terms=3)
        if not p.is_constant():
            return HypersurfaceX(p)


def rand_lift(rng, X: HypersurfaceX, kind=None, need_dependence=False) -> XGenerator:
    """Random LIFT generator; with ``need_dependence`` the direction is a variable of ``p`` and ``h != 0``."""
    ctx = X.xctx
    used = list(X.p.vars_used())
    d = rng.choice(used if need_dependence else list(ctx.names))
    others = [n for n in ctx.names if n != d]
    h = rand_poly(rng, ctx, others, max_deg=2, max_terms=2, nonzero=need_dependence)
    kind = kind or rng.choice(["LIFT1", "LIFT2"])
    return XGenerator(kind, d, h, rand_q(rng), rand_frac(rng, 3, nonzero=True))


def rand_shear(rng, ctx, max_deg=2) -> Shear:
    d = rng.choice(list(ctx.names))
    others = [n for n in ctx.names if n != d]
    h = rand_poly(rng, ctx, others, max_deg=max_deg, max_terms=2)
    return Shear(d, h, rand_frac(rng, 3, nonzero=True))


def rand_affine_word(rng, k=None, max_len=6) -> AutoWord:
    ctx = xctx(k or rng.randint(2, 3))
    return AutoWord(ctx, tuple(rand_shear(rng, ctx) for _ in range(rng.randint(1, max_len))))


def rand_x_word(rng, X: HypersurfaceX, max_len=5) -> AutoWord:
    steps = []
    for _ in range(rng.randint(1, max_len)):
        steps.append(XGenerator.eps() if rng.random() < 0.2 else rand_lift(rng, X))
    return AutoWord(X.xctx, tuple(steps), "X")


def rand_point(rng, n: int, bound: int = 6) -> tuple:
    return tuple(rand_frac(rng, bound) for _ in range(n))


def rand_x_point(rng, X: HypersurfaceX) -> XPoint:
    xs = rand_point(rng, X.k)
    u = rand_frac(rng, 4, nonzero=True)
    val = X.p.evaluate(xs)
    if rng.random() < 0.5:
        return XPoint(xs, u, val / u)
    return XPoint(xs, val / u, u)


def rand_triangular_word(rng, max_len=3) -> AutoWord:
    """Word in ``(x, y)`` alternating directions so that composites stay triangular-tame."""
    ctx = xctx(2)
    steps = []
    d = rng.choice(["x", "y"])
    for _ in range(rng.randint(1, max_len)):
        other = "y" if d == "x" else "x"
        h = rand_poly(rng, ctx, [other], max_deg=2, max_terms=2, nonzero=True)
        steps.append(Shear(d, h, rand_frac(rng, 3, nonzero=True)))
        d = other
    return AutoWord(ctx, tuple(steps))


def rand_chart_map(rng) -> PolyMap:
    """``(x, g1*y + x*a(x, z), g2*z + x*b(x))`` with nonzero constants ``g1, g2``."""
    ctx = VarContext(["x", "y", "z"])
    x, y, z = ctx.gens()
    a = rand_poly(rng, ctx, ["x", "z"], max_deg=2)
    b = rand_poly(rng, ctx, ["x"], max_deg=2)
    g1, g2 = rand_frac(rng, 3, nonzero=True), rand_frac(rng, 3, nonzero=True)
    return PolyMap(ctx, ctx, [x, y.scale(g1) + x * a, z.scale(g2) + x * b])
