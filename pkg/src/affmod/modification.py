"""Affine modifications of affine space (or of one hypersurface in it).

The modification of ``A = K[x_1..x_r]/(relation)`` along ``f`` with center
``(f, b_1, ..., b_s)`` is presented by adjoining new variables ``y_i`` subject
to ``f*y_i - b_i``.  The blowdown map forgets the ``y_i``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import CertificationError, InvalidTripleError
from .fields import QQ
from .parsing import parse
from .poly import (
    Poly,
    PolyMap,
    VarContext,
    compose,
    divide_out_power,
    divides,
    exact_divide,
    gcd,
    substitute,
)


def _as_poly(p, ctx, field=QQ) -> Poly:
    if isinstance(p, Poly):
        return p.embed(ctx)
    if isinstance(p, str):
        return parse(p, ctx, field)
    return Poly.const(ctx, p, field)


@dataclass(frozen=True)
class AffineTriple:
    ambient: VarContext
    f: Poly
    center_gens: tuple
    relation: Optional[Poly] = None

    def __post_init__(self):
        object.__setattr__(self, "center_gens", tuple(self.center_gens))
        if not self.f:
            raise InvalidTripleError("f must be nonzero")
        for p in (self.f, *self.center_gens, *([self.relation] if self.relation is not None else [])):
            if p.ctx != self.ambient:
                raise InvalidTripleError(f"{p} is not over {self.ambient.names}")
            if p.field != self.f.field:
                raise InvalidTripleError("mixed fields in triple")
        if self.relation is not None:
            if not self.relation or self.relation.is_constant():
                raise InvalidTripleError("relation must be a nonconstant polynomial")
            if divides(self.relation, self.f):
                raise InvalidTripleError("f vanishes on the hypersurface")

    @classmethod
    def build(cls, ambient, f, center_gens=(), relation=None, field=QQ):
        ctx = ambient if isinstance(ambient, VarContext) else VarContext(ambient)
        rel = None if relation is None else _as_poly(relation, ctx, field)
        return cls(ctx, _as_poly(f, ctx, field), tuple(_as_poly(b, ctx, field) for b in center_gens), rel)

    @property
    def field(self):
        return self.f.field

    @property
    def s(self) -> int:
        return len(self.center_gens)


@dataclass(frozen=True)
class ModPresentation:
    triple: AffineTriple
    context: VarContext
    new_vars: tuple
    equations: tuple
    relation: Optional[Poly]
    blowdown: PolyMap
    exceptional_eqs: tuple
    certificate: str = "asserted"

    @property
    def all_equations(self) -> tuple:
        return ((self.relation,) if self.relation is not None else ()) + self.equations


def _certify(t: AffineTriple) -> Optional[str]:
    if t.s == 0:
        return "trivial"
    if t.relation is None and t.s == 1:
        g = gcd(t.f, t.center_gens[0])
        if g.is_constant():
            return "coprime"
    if t.relation is None:
        fv = t.f.vars_used()
        if len(t.f) == 1 and len(fv) == 1 and t.f.total_degree() == 1:
            seen = set(fv)
            ok = True
            for b in t.center_gens:
                bv = b.vars_used()
                if not (len(b) == 1 and len(bv) == 1 and b.total_degree() == 1) or bv[0] in seen:
                    ok = False
                    break
                seen.add(bv[0])
            if ok:
                return "point-center"
    return None


def default_new_vars(ambient: VarContext, s: int) -> tuple:
    if s == 1:
        for cand in ("y", "z", "w", "y1"):
            if cand not in ambient:
                return (cand,)
    names = []
    i = 1
    while len(names) < s:
        cand = f"y{i}"
        if cand not in ambient:
            names.append(cand)
        i += 1
    return tuple(names)


def modify(t: AffineTriple, new_vars: Sequence[str] = None, assume_prime: bool = False) -> ModPresentation:
    """Presentation ``f*y_i - b_i`` of the modification of ``t``.

    Primality of the presentation ideal is certified automatically when
    ``s == 0``, when ``s == 1`` with ``gcd(f, b_1) == 1`` on affine space, and
    when ``f`` and the ``b_i`` are distinct coordinate variables.  Other
    triples require ``assume_prime=True``.
    """
    cert = _certify(t)
    if cert is None:
        if not assume_prime:
            raise CertificationError(
                "cannot certify that the presentation ideal is prime; pass assume_prime=True"
            )
        cert = "asserted"
    new_vars = tuple(new_vars) if new_vars is not None else default_new_vars(t.ambient, t.s)
    if len(new_vars) != t.s:
        raise InvalidTripleError(f"{len(new_vars)} new variable names for {t.s} center generators")
    ctx = t.ambient.extend(*new_vars)
    f = t.f.embed(ctx)
    eqs = tuple(f * Poly.var(ctx, y, t.field) - b.embed(ctx) for y, b in zip(new_vars, t.center_gens))
    blowdown = PolyMap(t.ambient, ctx, [Poly.var(ctx, n, t.field) for n in t.ambient.names])
    exc = (f,) + tuple(b.embed(ctx) for b in t.center_gens)
    rel = t.relation.embed(ctx) if t.relation is not None else None
    return ModPresentation(t, ctx, new_vars, eqs, rel, blowdown, exc, cert)


def check_presentation(pres: ModPresentation) -> bool:
    """Each equation vanishes under ``y_i := b_i / f``.

    Realized with a fresh symbol ``w`` standing for ``1/f``: after the substitution
    ``y_i -> b_i*w`` the equation must be a multiple of ``f*w - 1``.
    """
    t = pres.triple
    w = "w_"
    while w in pres.context:
        w += "_"
    ctx = pres.context.extend(w)
    W = Poly.var(ctx, w, t.field)
    f = t.f.embed(ctx)
    images = {}
    for y, b in zip(pres.new_vars, t.center_gens):
        images[y] = b.embed(ctx) * W
    m = PolyMap.from_mapping(pres.context, ctx, images, t.field)
    unit = f * W - 1
    for y, b, eq in zip(pres.new_vars, t.center_gens, pres.equations):
        if eq != t.f.embed(pres.context) * Poly.var(pres.context, y, t.field) - b.embed(pres.context):
            return False
        if not divides(unit, substitute(eq, m)):
            return False
    return True


def strict_transform(g: Poly, blowdown: PolyMap, exc_var: str):
    """``(mu, g1)`` with ``g o blowdown == exc_var^mu * g1`` and ``g1`` prime to ``exc_var``."""
    h = substitute(g, blowdown)
    if not h:
        raise ValueError("the pulled-back polynomial is zero")
    return divide_out_power(h, exc_var)


def modify_at_point(p: Poly, new_var: str = "z") -> Poly:
    """``(p(y*x_1, ..., y*x_k) - y) / y`` for ``p`` vanishing at the origin, ``y = new_var``."""
    if p.is_constant():
        raise ValueError("p must be nonconstant")
    if p.constant_value():
        raise ValueError("p must vanish at the origin")
    ctx = p.ctx.extend(new_var)
    y = Poly.var(ctx, new_var, p.field)
    bd = PolyMap(p.ctx, ctx, [y * Poly.var(ctx, n, p.field) for n in p.ctx.names])
    return exact_divide(substitute(p, bd) - y, y)


def decompose_ci(f1: Poly, f2: Poly, g: Poly, new_var: str = "z"):
    """Split the modification along ``f1*f2`` with center ``(f1*f2, g)`` into two stages.

    Returns ``(stage1, stage2, check)`` where ``stage1`` presents ``f1*z = g``,
    ``stage2`` is ``(x, y, z) -> (x, y, f2*z)`` and ``check`` confirms that
    pulling ``f1*z - g`` back through ``stage2`` gives ``f1*f2*z - g`` and that the
    blowdowns compose to the projection.
    """
    ctx = f1.ctx
    if not gcd(f1 * f2, g).is_constant():
        raise InvalidTripleError("g shares a factor with f1*f2")
    stage1 = modify(AffineTriple(ctx, f1, (g,)), new_vars=(new_var,))
    ext = stage1.context
    z = Poly.var(ext, new_var, f1.field)
    stage2 = PolyMap.from_mapping(ext, ext, {new_var: f2.embed(ext) * z}, f1.field)
    eq1 = stage1.equations[0]
    composite = f1.embed(ext) * f2.embed(ext) * z - g.embed(ext)
    ok_eq = substitute(eq1, stage2) == composite
    projection = PolyMap(ctx, ext, [Poly.var(ext, n, f1.field) for n in ctx.names])
    ok_bd = compose([stage1.blowdown, stage2]) == projection
    return stage1, stage2, ok_eq and ok_bd


def present_birational(fractions: Sequence) -> AffineTriple:
    """Triple ``(f, b_1..b_k)`` with ``f = prod f_i`` and ``b_i = f*a_i/f_i``."""
    fractions = [(a, f) for a, f in fractions]
    if not fractions:
        raise InvalidTripleError("need at least one fraction")
    ctx = fractions[0][1].ctx
    f = Poly.const(ctx, 1, fractions[0][1].field)
    for _, fi in fractions:
        if not fi:
            raise InvalidTripleError("zero denominator")
        f = f * fi
    bs = tuple(exact_divide(f * a, fi) for a, fi in fractions)
    return AffineTriple(ctx, f, bs)


# ---------------------------------------------------------------------------
# gallery


@dataclass(frozen=True)
class GalleryItem:
    name: str
    params: dict
    equations: tuple
    golden_numerators: tuple
    golden_denominator: str
    unit: Fraction
    presentation: Optional[ModPresentation] = dc_field(default=None, compare=False)

    @property
    def poly(self) -> Poly:
        return self.equations[0]

    @property
    def golden(self) -> tuple:
        """Closed forms parsed and divided, in the same context as the equations."""
        out = []
        for num in self.golden_numerators:
            ctx = self.equations[0].ctx
            n = parse(num, ctx)
            d = parse(self.golden_denominator, ctx)
            out.append(exact_divide(n, d))
        return tuple(out)

    @property
    def matches(self) -> bool:
        ctx = self.equations[0].ctx
        d = parse(self.golden_denominator, ctx)
        for eq, num in zip(self.equations, self.golden_numerators):
            if eq * d != parse(num, ctx).scale(self.unit):
                return False
        return len(self.equations) == len(self.golden_numerators)


def _russell():
    t = AffineTriple.build("x z t", "-x^2", ["x + z^2 + t^3"])
    pres = modify(t, new_vars=("y",))
    eq = pres.equations[0].embed(VarContext("x y z t"))
    return (eq,), ("x + x^2*y + z^2 + t^3",), "1", Fraction(-1), pres


def _russell_shifted():
    t = AffineTriple.build("x z t", "x^2", ["x - (z+1)^2 + (t+1)^3"])
    pres = modify(t, new_vars=("y",))
    eq = pres.equations[0].embed(VarContext("x y z t"))
    return (eq,), ("-x + x^2*y + (z+1)^2 - (t+1)^3",), "1", Fraction(1), pres


def _cone():
    t = AffineTriple.build("x y", "x", ["y^2"])
    pres = modify(t, new_vars=("z",))
    return pres.equations, ("x*z - y^2",), "1", Fraction(1), pres


def _tdp(k: int, l: int):
    if k < 1 or l < 1:
        raise ValueError("k and l must be positive")
    base = parse(f"(x+1)^{k} - (y+1)^{l}", VarContext("x y"))
    eq = modify_at_point(base, "z")
    return (eq,), (f"(x*z+1)^{k} - (y*z+1)^{l} - z",), "z", Fraction(1), None


def _tdp_general(k: int, l: int, s: int, m: int):
    if not (0 <= m <= s) or k < 1 or l < 1 or s < 1:
        raise ValueError("need k, l, s >= 1 and 0 <= m <= s")
    ctx = VarContext("x y z")
    g = parse(f"(x+1)^{k} - (y+1)^{l} - z^{s}", ctx)
    bd = PolyMap.from_mapping(ctx, ctx, {"x": "x*z", "y": "y*z"})
    for _ in range(m):
        mu, g = strict_transform(g, bd, "z")
        if mu != 1:
            raise ArithmeticError(f"unexpected multiplicity {mu} in the strict transform chain")
    return (g,), (f"(x*z^{m}+1)^{k} - (y*z^{m}+1)^{l} - z^{s}",), f"z^{m}", Fraction(1), None


def _russell_chart():
    (g,), *_ = _russell_shifted()
    ctx = g.ctx
    bd = PolyMap.from_mapping(ctx, ctx, {"y": "x*y", "z": "x*z", "t": "x*t"})
    mu, g1 = strict_transform(g, bd, "x")
    if mu != 1:
        raise ArithmeticError(f"unexpected multiplicity {mu}")
    return (g1,), ("-x + x^3*y + (x*z+1)^2 - (x*t+1)^3",), "x", Fraction(1), None


def _uv_system(ps: Sequence, xvars: Sequence[str] = None):
    if not ps:
        raise ValueError("need at least one p_i")
    if xvars is None:
        xvars = []
        for p in ps:
            for n in (p.ctx.names if isinstance(p, Poly) else parse(p).ctx.names):
                if n not in xvars:
                    xvars.append(n)
        xvars = sorted(xvars)
    base = VarContext(list(xvars) + ["u"])
    bs = [_as_poly(p, base) for p in ps]
    for b in bs:
        if not b.free_of("u") or b.is_constant():
            raise ValueError("each p_i must be a nonconstant polynomial in the x variables")
    m = len(bs)
    new = ("v",) if m == 1 else tuple(f"v{i}" for i in range(1, m + 1))
    t = AffineTriple(base, Poly.var(base, "u"), tuple(bs))
    pres = modify(t, new_vars=new, assume_prime=True)
    goldens = tuple(f"u*{v} - ({b})" for v, b in zip(new, bs))
    return pres.equations, goldens, "1", Fraction(1), pres


def _uv_cover(ps: Sequence, s0: int, s: Sequence, xvars: Sequence[str] = None):
    eqs, goldens, _, _, pres = _uv_system(ps, xvars)
    s = list(s)
    if len(s) != len(eqs) or s0 < 1 or any(si < 1 for si in s):
        raise ValueError("need positive exponents, one per equation")
    ctx = pres.context
    images = {"u": f"u^{s0}"}
    for v, si in zip(pres.new_vars, s):
        images[v] = f"{v}^{si}"
    cover = PolyMap.from_mapping(ctx, ctx, images)
    out = tuple(substitute(e, cover) for e in eqs)
    goldens = tuple(
        f"u^{s0}*{v}^{si} - ({b})" for v, si, b in zip(pres.new_vars, s, pres.triple.center_gens)
    )
    return out, goldens, "1", Fraction(1), pres


_BUILDERS = {
    "russell": _russell,
    "russell_shifted": _russell_shifted,
    "cone": _cone,
    "tdp": _tdp,
    "tdp_general": _tdp_general,
    "russell_chart": _russell_chart,
    "uv_system": _uv_system,
    "uv_cover": _uv_cover,
}

GALLERY_NAMES = tuple(_BUILDERS)


def gallery(name: str, **params) -> GalleryItem:
    """Build a named example through the modification pipeline and attach its closed form."""
    try:
        builder = _BUILDERS[name]
    except KeyError:
        raise KeyError(f"unknown gallery entry {name!r}; known: {', '.join(GALLERY_NAMES)}") from None
    eqs, nums, den, unit, pres = builder(**params)
    return GalleryItem(name, dict(params), tuple(eqs), tuple(nums), den, unit, pres)


__all__ = [
    "AffineTriple",
    "ModPresentation",
    "GalleryItem",
    "GALLERY_NAMES",
    "check_presentation",
    "decompose_ci",
    "gallery",
    "modify",
    "modify_at_point",
    "present_birational",
    "strict_transform",
]
