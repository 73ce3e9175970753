"""Rectifying surfaces ``p(x)*z = g(x, y)`` in three-space.

The main entry point :func:`rectify_n1` returns an automorphism ``Phi`` of
``(x, y, z)``-space (with its inverse ``A``) such that ``F o A`` is a nonzero
constant times ``y - c``, where ``F = p(x)*z - g``.  Thus ``A`` maps the
plane ``{y = c}`` onto the surface and ``Phi`` maps the surface back.

The recursion peels one root ``a`` of ``p`` at a time: the surface with
``p = (x - a)*q`` is the pull-back of ``q*z = g`` along
``sigma_a: (x, y, z) -> (x, y, (x - a)*z)``, and an automorphism for the
smaller surface that keeps the line ``{x = a, z = 0}`` in place lifts through
``sigma_a``.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Optional, Sequence

from .errors import (
    FiberPointsNotFound,
    NoInverseWithinDegree,
    NotDivisibleError,
    RootOutsideField,
    ShapeMismatchError,
    TransversalityViolated,
    WordFormatError,
)
from .fields import GF, QQ, ApproxComplexField, Field
from .flows import invert_by_degree_bound, lift_through_blowdown
from .linalg import det
from .parsing import parse
from .poly import (
    Poly,
    PolyMap,
    VarContext,
    compose,
    diff,
    divides,
    exact_divide,
    gcd,
    substitute,
)
from .transitivity import _approx_roots, fiber_points, interpolate, rational_roots

XYZ = VarContext(["x", "y", "z"])
XY = VarContext(["x", "y"])
T_CTX = VarContext(["t"])


@dataclass(frozen=True)
class BinomialSurface:
    """The surface ``f*z^n + g = 0`` with ``f, g`` in ``(x, y)``."""

    f: Poly
    g: Poly
    n: int = 1

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("n must be positive")
        if self.f.ctx != self.g.ctx:
            raise ValueError("f and g must share a context")
        if self.f.is_constant() or self.g.is_constant():
            raise ValueError("f and g must both be nonconstant")
        if self.f.field.exact and not gcd(self.f, self.g).is_constant():
            raise ValueError("f and g must be coprime")

    @property
    def F(self) -> Poly:
        names = self.f.ctx.names
        if "z" in names and self.f.free_of("z") and self.g.free_of("z"):
            ctx = self.f.ctx
        else:
            ctx = self.f.ctx.extend("z" if "z" not in names else "z_")
        zname = ctx.names[-1] if ctx is not self.f.ctx else "z"
        return self.f.embed(ctx) * Poly.var(ctx, zname, self.f.field) ** self.n + self.g.embed(ctx)

    @classmethod
    def from_pz_g(cls, p: Poly, g: Poly) -> "BinomialSurface":
        """The surface ``p*z = g``."""
        return cls(p, -g, 1)


# ---------------------------------------------------------------------------
# smoothness


@dataclass(frozen=True)
class Smooth:
    status: str = "smooth"


@dataclass(frozen=True)
class SingularWitness:
    point: Optional[tuple]
    reason: str
    status: str = "singular"


@dataclass(frozen=True)
class Undecided:
    reason: str
    status: str = "undecided"


def _univariate_coeffs(f: Poly, name: str, env: dict) -> dict:
    spec = f.specialize(env) if env else f
    return {i: c.constant_value() for i, c in spec.coefficients_in(name).items()}


def resultant(f: Poly, g: Poly, elim: str = "y", keep: str = "x") -> Poly:
    """``Res_elim(f, g)`` as a polynomial in ``keep`` (two-variable inputs).

    Sylvester determinants at enough integer values of ``keep`` are
    interpolated; formal degrees are kept so evaluation commutes with the
    determinant.
    """
    field = f.field
    m, n = f.degree(elim), g.degree(elim)
    if m < 0 or n < 0:
        raise ValueError("resultant of the zero polynomial")
    fc = f.coefficients_in(elim)
    gc = g.coefficients_in(elim)
    bound = max(1, f.total_degree()) * max(1, g.total_degree())
    nodes, values = [], []
    for x0 in range(bound + 1):
        env = {keep: x0}
        a = [fc[i].specialize(env).constant_value() if i in fc else field.zero for i in range(m, -1, -1)]
        b = [gc[i].specialize(env).constant_value() if i in gc else field.zero for i in range(n, -1, -1)]
        size = m + n
        if size == 0:
            val = field.one
        else:
            rows = []
            for i in range(n):
                rows.append([field.zero] * i + a + [field.zero] * (size - m - 1 - i))
            for i in range(m):
                rows.append([field.zero] * i + b + [field.zero] * (size - n - 1 - i))
            val = det(rows, field)
        nodes.append(x0)
        values.append(val)
    r = interpolate(nodes, values, field, var=keep)
    return r


def _roots_with_split_check(coeffs: dict):
    """Rational roots and whether they account for every root (with multiplicity)."""
    coeffs = {i: c for i, c in coeffs.items() if c}
    if not coeffs:
        return None, False
    deg = max(coeffs)
    roots = rational_roots(coeffs)
    ctx = T_CTX
    P = Poly(ctx, {(i,): c for i, c in coeffs.items()})
    T = Poly.var(ctx, "t")
    count = 0
    for r in roots:
        while True:
            try:
                P = exact_divide(P, T - r)
            except NotDivisibleError:
                break
            count += 1
    return roots, count == deg


def smoothness_check(s: BinomialSurface, screen_primes: Sequence[int] = (5, 7, 11)):
    """Decide smoothness of ``f*z^n + g = 0`` when the curves ``f = 0`` and ``g = 0`` meet in rational points.

    A point is singular iff it lies over ``D_f`` and ``D_g`` and some ``z``
    satisfies ``z^n grad f = -grad g``, or (for ``n > 1``) it is a singular
    point of ``D_g`` with ``z = 0``.  When intersection points cannot be
    listed exactly the answer is :class:`Undecided`, with a finite-field
    screen reported in the reason.
    """
    f, g, n = s.f, s.g, s.n
    field = f.field
    if f.ctx != XY and len(f.ctx) != 2:
        raise ValueError("f and g must be bivariate")
    xn, yn = f.ctx.names
    if not gcd(f, g).is_constant():
        raise ValueError("f and g share a factor")
    if field != QQ:
        return Undecided("exact smoothness test needs rational coefficients")
    fx, fy, gx, gy = diff(f, xn), diff(f, yn), diff(g, xn), diff(g, yn)

    def singular_at(pt):
        gv = (gx.evaluate(pt), gy.evaluate(pt))
        if not gv[0] and not gv[1]:
            return Fraction(0)
        fv = (fx.evaluate(pt), fy.evaluate(pt))
        if fv[0] * gv[1] - fv[1] * gv[0]:
            return None
        # grad g = -w grad f with w = z^n
        w = -(gv[0] / fv[0]) if fv[0] else -(gv[1] / fv[1])
        return w

    def points_of(a: Poly, b: Poly):
        """Common zeros of two coprime bivariate polynomials, or None if not all rational."""
        res = resultant(a, b, yn, xn)
        if not res:
            return None
        xs, split = _roots_with_split_check({e[0]: c for e, c in res.terms.items()})
        if not split:
            return None
        pts = []
        for x0 in xs:
            ua = _univariate_coeffs(a, yn, {xn: x0})
            ub = _univariate_coeffs(b, yn, {xn: x0})
            pa = Poly(T_CTX, {(i,): c for i, c in ua.items()})
            pb = Poly(T_CTX, {(i,): c for i, c in ub.items()})
            common = gcd(pa, pb)
            if not common:
                return None
            if common.is_constant():
                continue
            ys, ok = _roots_with_split_check({e[0]: c for e, c in common.terms.items()})
            if not ok:
                return None
            pts.extend((x0, y0) for y0 in ys)
        return pts

    reasons = []
    pts = points_of(f, g)
    if pts is None:
        reasons.append("the curves f = 0 and g = 0 meet outside the rational points")
    else:
        for pt in pts:
            w = singular_at(pt)
            if w is not None:
                z0 = _nth_root(w, n)
                point = (pt[0], pt[1], z0) if z0 is not None else (pt[0], pt[1], None)
                return SingularWitness(point, f"gradient condition holds over ({pt[0]}, {pt[1]}) with z^{n} = {w}")
    if n > 1:
        sq = gcd(g, gcd(gx, gy)) if (gx or gy) else g
        if not sq.is_constant():
            return SingularWitness(None, f"g has the repeated factor {sq}")
        other = gy if gy else gx
        spts = points_of(g, other)
        if spts is None:
            reasons.append("singular points of g = 0 are not all rational")
        else:
            for pt in spts:
                if not gx.evaluate(pt) and not gy.evaluate(pt):
                    return SingularWitness((pt[0], pt[1], Fraction(0)), "singular point of g = 0 at z = 0")
    if reasons:
        from .ffcount import singular_witness

        screen = []
        for q in screen_primes:
            F = s.F.convert(GF(q))
            hit = singular_witness([F], q, sample_budget=q ** 3)
            screen.append(f"F_{q}: {'singular point ' + str(hit) if hit else 'none'}")
        return Undecided("; ".join(reasons) + " (screen: " + ", ".join(screen) + ")")
    return Smooth()


def _nth_root(w: Fraction, n: int):
    if w == 0:
        return Fraction(0)
    if n == 1:
        return w
    sign = 1
    if w < 0:
        if n % 2 == 0:
            return None
        sign = -1
        w = -w
    num = _int_root(w.numerator, n)
    den = _int_root(w.denominator, n)
    if num is None or den is None:
        return None
    return sign * Fraction(num, den)


def _int_root(a: int, n: int):
    r = round(a ** (1.0 / n))
    for c in (r - 1, r, r + 1):
        if c >= 0 and c ** n == a:
            return c
    return None


# ---------------------------------------------------------------------------
# normal form


@dataclass(frozen=True)
class NormalForm:
    root: object
    gamma: object
    c: object
    h: Poly
    translation: PolyMap  # x -> x + root

    def reconstruct(self, ctx) -> Poly:
        f = self.h.field
        X = Poly.var(ctx, ctx.names[0], f)
        Y = Poly.var(ctx, ctx.names[1], f)
        return (Y - self.c).scale(self.gamma) + (X - self.root) * self.h.embed(ctx)


def split_roots(p: Poly, name: str = "x") -> list:
    """All roots of a one-variable ``p`` with multiplicity, sorted; raises if some root is outside the field."""
    field = p.field
    coeffs = {e[p.ctx.index(name)]: c for e, c in p.terms.items()}
    if any(sum(e) != e[p.ctx.index(name)] for e in p.terms):
        raise ValueError("p must involve only x")
    deg = max(coeffs) if coeffs else -1
    if deg < 1:
        raise ValueError("p must be nonconstant")
    if isinstance(field, ApproxComplexField):
        return sorted(_approx_roots(coeffs, field), key=lambda c: (c.z.real, c.z.imag))
    if field != QQ:
        raise RootOutsideField("root finding is implemented over Q and the approximate complex field")
    out = []
    P = Poly(T_CTX, {(i,): c for i, c in coeffs.items()})
    T = Poly.var(T_CTX, "t")
    for r in rational_roots(coeffs):
        while True:
            try:
                P = exact_divide(P, T - r)
            except NotDivisibleError:
                break
            out.append(r)
    if len(out) != deg:
        raise RootOutsideField(f"p = {p} does not split over Q")
    return out


def _linear_in_y(g: Poly, a, ctx) -> tuple:
    xn, yn = ctx.names[0], ctx.names[1]
    ga = g.specialize({xn: a})
    if any(e[ctx.index(n)] for e in ga.terms for n in ctx.names if n != yn):
        raise TransversalityViolated(f"g(x = {a}) still involves other variables")
    if ga.degree(yn) != 1:
        raise TransversalityViolated(f"g({a}, y) = {ga} is not of the form gamma*(y - c)")
    coeffs = ga.coefficients_in(yn)
    gamma = coeffs[1].constant_value()
    delta = coeffs[0].constant_value() if 0 in coeffs else g.field.zero
    return gamma, -delta / gamma


def normal_form(p: Poly, g: Poly, root=None) -> NormalForm:
    """Write ``g = gamma*(y - c) + (x - a)*h`` at a root ``a`` of ``p``.

    Every root of ``p`` is checked: ``g(a_i, y)`` must be a nonzero multiple of
    ``y - c_i``.  The distinguished root is ``root`` or the smallest one.
    """
    ctx = g.ctx
    xn = ctx.names[0]
    roots = split_roots(p.embed(ctx), xn)
    for a in roots:
        _linear_in_y(g, a, ctx)
    a = roots[0] if root is None else p.field(root)
    if all(a != r for r in roots):
        raise ValueError(f"{root} is not a root of p")
    gamma, c = _linear_in_y(g, a, ctx)
    X = Poly.var(ctx, xn, g.field)
    Y = Poly.var(ctx, ctx.names[1], g.field)
    h = exact_divide(g - (Y - c).scale(gamma), X - a)
    translation = PolyMap.from_mapping(ctx, ctx, {xn: X + a}, g.field)
    nf = NormalForm(a, gamma, c, h, translation)
    if nf.reconstruct(ctx) != g:
        raise ArithmeticError("normal form does not reproduce g")
    return nf


# ---------------------------------------------------------------------------
# rectification


@dataclass
class RectifyWord:
    """``forward`` maps the surface to the plane ``{y = c}``; ``inverse`` maps it back.

    ``pieces`` lists (map, inverse) pairs in the order they act on points
    when ``forward`` is applied.
    """

    ctx: VarContext
    forward: PolyMap
    inverse: PolyMap
    c: object
    kappa: object
    pieces: list = dc_field(default_factory=list)


def _xyz(field):
    return tuple(Poly.var(XYZ, n, field) for n in XYZ.names)


def _base_case(p: Poly, g: Poly, a):
    """``p = lam*(x - a)``: returns ``(A, A_inv, kappa, c, pieces)`` with ``F o A = kappa*(y - c)``."""
    field = g.field
    X, Y, Z = _xyz(field)
    lam = exact_divide(p, X - a)
    if not lam.is_constant():
        raise ValueError("base case needs a linear p")
    lam = lam.constant_value()
    gamma, c = _linear_in_y(g, a, XYZ)
    h = exact_divide(g - (Y - c).scale(gamma), X - a)
    alpha = PolyMap(XYZ, XYZ, [X, Y, Z + h.scale(field.one / lam)])
    alpha_inv = PolyMap(XYZ, XYZ, [X, Y, Z - h.scale(field.one / lam)])
    shift = ((X - a) * Z).scale(lam / gamma)
    beta = PolyMap(XYZ, XYZ, [X, Y + shift, Z])
    beta_inv = PolyMap(XYZ, XYZ, [X, Y - shift, Z])
    A = compose([alpha, beta])
    A_inv = compose([beta_inv, alpha_inv])
    return A, A_inv, -gamma, c, [(alpha_inv, alpha), (beta_inv, beta)]


def _rectify(p: Poly, g: Poly, roots: list):
    field = g.field
    X, Y, Z = _xyz(field)
    a = roots[0]
    if len(roots) == 1:
        return _base_case(p, g, a)
    q = exact_divide(p, X - a)
    A_Y, A_Y_inv, kappa, c, _ = _rectify(q, g, roots[1:])
    gamma_a, c_a = _linear_in_y(g, a, XYZ)
    # B = (x, y, z + r(y)) makes A_Y o B keep the line {x = a, z = 0}
    W = Poly.var(XYZ, "y", field)
    w_line = substitute(A_Y_inv["z"], PolyMap(XYZ, XYZ, [Poly.const(XYZ, a, field), W, Poly.zero(XYZ, field)]))
    y_of = Poly.const(XYZ, c_a, field) - (Y - c).scale(kappa / gamma_a)
    r = substitute(w_line, PolyMap(XYZ, XYZ, [X, y_of, Z]))
    B = PolyMap(XYZ, XYZ, [X, Y, Z + r])
    B_inv = PolyMap(XYZ, XYZ, [X, Y, Z - r])
    A_Yn = compose([A_Y, B])
    A_Yn_inv = compose([B_inv, A_Y_inv])
    try:
        A = lift_through_blowdown(A_Yn, a)
        A_inv = lift_through_blowdown(A_Yn_inv, a)
    except ShapeMismatchError as exc:  # pragma: no cover - guarded by the normalization
        raise ArithmeticError(f"lift failed: {exc}") from exc
    return A, A_inv, kappa, c, [(A_inv, A)]


def rectify_n1(p: Poly, g: Poly) -> RectifyWord:
    """Rectify ``p(x)*z = g(x, y)``; polynomials are read in the context ``(x, y, z)``.

    Needs every root of ``p`` in the coefficient field (or the approximate
    complex field) and ``g(a, y)`` a nonzero multiple of ``y - c_a`` at each
    root ``a``.
    """
    field = g.field
    p = p.embed(XYZ) if p.ctx != XYZ else p
    g = g.embed(XYZ) if g.ctx != XYZ else g
    roots = split_roots(p, "x")
    for a in roots:
        _linear_in_y(g, a, XYZ)
    if not g.free_of("z"):
        raise ValueError("g must not involve z")
    A, A_inv, kappa, c, pieces = _rectify(p, g, roots)
    word = RectifyWord(XYZ, A_inv, A, c, kappa, pieces)
    s = BinomialSurface.from_pz_g(p, g)
    if field.exact and not verify_rectified(s, word):
        raise ArithmeticError("rectification failed its own verification")
    return word


def verify_rectified(s: BinomialSurface, w: RectifyWord) -> bool:
    """``F o w.inverse`` is a nonzero constant times ``y - c`` and the two maps are mutually inverse."""
    if s.n != 1:
        return False
    F = s.F
    if F.ctx != w.ctx:
        try:
            F = F.embed(w.ctx)
        except Exception:
            return False
    field = F.field
    ident = PolyMap.identity(w.ctx, field)
    if compose([w.forward, w.inverse]) != ident or compose([w.inverse, w.forward]) != ident:
        return False
    G = substitute(F, w.inverse)
    Y = Poly.var(w.ctx, w.ctx.names[1], field)
    coeffs = G.coefficients_in(w.ctx.names[1])
    if set(coeffs) - {0, 1} or 1 not in coeffs:
        return False
    k = coeffs[1]
    if not k.is_constant() or not k:
        return False
    kappa = k.constant_value()
    return G == (Y - w.c).scale(kappa)


# ---------------------------------------------------------------------------
# pairs (f, g) in the plane


def _f1_adic(f: Poly, f1: Poly):
    """Coefficients ``a_i`` (scalars) with ``f = sum a_i f1^i``, or None."""
    try:
        zero = fiber_points(f1, 0, 1)[0]
    except (FiberPointsNotFound, ValueError):
        return None
    coeffs = {}
    r = f
    i = 0
    while r:
        a = r.evaluate(zero)
        if a:
            coeffs[i] = a
        r0 = r - a
        if not r0:
            break
        if not divides(f1, r0):
            return None
        r = exact_divide(r0, f1)
        i += 1
        if i > f.total_degree() + 1:
            return None
    return coeffs


def approximate_root(f: Poly, name: str, d: int):
    """The monic ``g`` in ``name`` with ``deg(f/lc - g^d) < deg f - deg g``, or None.

    Requires the leading coefficient of ``f`` in ``name`` to be a scalar and
    ``d`` to divide the degree.
    """
    n = f.degree(name)
    if n <= 0 or n % d:
        return None
    coeffs = f.coefficients_in(name)
    lead = coeffs[n]
    if not lead.is_constant():
        return None
    field = f.field
    fm = f.scale(field.one / lead.constant_value())
    e = n // d
    V = Poly.var(f.ctx, name, field)
    g = V**e
    inv_d = field.one / field(d)
    for j in range(1, e + 1):
        r = (fm - g**d).coefficients_in(name).get(n - j)
        if r is not None:
            g = g + (r * V ** (e - j)).scale(inv_d)
    return g


def _detected_candidates(f: Poly) -> list:
    out = []
    for name in f.ctx.names:
        n = f.degree(name)
        for d in range(n, 1, -1):
            if n % d == 0:
                g = approximate_root(f, name, d)
                if g is not None:
                    out.append(g - g.specialize({nm: 0 for nm in f.ctx.names}))
    return out


def rectify_pair(f: Poly, g: Poly, candidates: Sequence = (), degree_bound: int = None):
    """Find ``alpha`` with ``f o alpha = p(x)`` and ``g o alpha = y``.

    Tries ``f1`` among the given candidates, the coordinates, approximate
    roots of ``f`` in each variable and ``f`` itself,
    requiring ``f = p(f1)`` and ``(f1, g)`` invertible within the degree bound.
    Returns ``(alpha, p)`` with ``p`` a polynomial in ``t``.
    """
    ctx = f.ctx
    field = f.field
    cands = [c if isinstance(c, Poly) else parse(c, ctx, field) for c in candidates]
    cands += [Poly.var(ctx, n, field) for n in ctx.names] + _detected_candidates(f) + [f]
    X, Y = (Poly.var(ctx, n, field) for n in ctx.names[:2])
    tried = []
    for f1 in cands:
        if f1.is_constant() or f1 in tried:
            continue
        tried.append(f1)
        coeffs = _f1_adic(f, f1)
        if coeffs is None:
            continue
        M = PolyMap(ctx, ctx, [f1, g])
        try:
            alpha = invert_by_degree_bound(M, degree_bound)
        except NoInverseWithinDegree:
            continue
        P = Poly(T_CTX, {(i,): c for i, c in coeffs.items()}, field)
        px = substitute(P, PolyMap(T_CTX, ctx, [X]))
        if substitute(f, alpha) == px and substitute(g, alpha) == Y:
            return alpha, P
    raise NoInverseWithinDegree("no candidate f1 gives an invertible pair (f1, g)")


# ---------------------------------------------------------------------------
# one-coordinate triangular maps and the four-variable golden case


def elementary_inverse(m: PolyMap) -> PolyMap:
    """Inverse of a map changing one coordinate to ``c*x_i + r`` with ``r`` free of ``x_i``."""
    ctx = m.source
    field = m.field
    changed = [n for n, comp in zip(ctx.names, m.components) if comp != Poly.var(ctx, n, field)]
    if not changed:
        return m
    if len(changed) != 1:
        raise ShapeMismatchError("more than one coordinate changes")
    n = changed[0]
    comp = m[n]
    coeffs = comp.coefficients_in(n)
    if set(coeffs) - {0, 1} or 1 not in coeffs or not coeffs[1].is_constant():
        raise ShapeMismatchError(f"component {comp} is not c*{n} + (terms free of {n})")
    c = coeffs[1].constant_value()
    rest = coeffs.get(0, Poly.zero(ctx, field))
    inv = PolyMap.from_mapping(ctx, ctx, {n: (Poly.var(ctx, n, field) - rest).scale(field.one / c)}, field)
    return inv


def russell_chart_rectifying_maps():
    """The three triangular maps of the four-variable example and their composite ``gamma o beta o alpha``."""
    ctx = VarContext(["x", "y", "z", "t"])
    alpha = PolyMap.from_mapping(ctx, ctx, {"z": "z - 1/2*x*t^2*(x*t + 3)"})
    beta = PolyMap.from_mapping(ctx, ctx, {"y": "y + z*t^2*(x*t + 3) + 1/4*x*t^4*(x*t + 3)^2"})
    gamma = PolyMap.from_mapping(ctx, ctx, {"t": "-3*t + x^2*y + x*z^2 + 2*z - 1"})
    phi = compose([gamma, beta, alpha])
    phi_inv = compose([elementary_inverse(alpha), elementary_inverse(beta), elementary_inverse(gamma)])
    return alpha, beta, gamma, phi, phi_inv


# ---------------------------------------------------------------------------
# text format for rectifying words


def serialize_rectify_word(w: RectifyWord) -> str:
    lines = ["VARS " + " ".join(w.ctx.names)]
    for fwd, inv in w.pieces:
        lines.append("MAP " + " ".join(f"{n}={c}" for n, c in zip(w.ctx.names, fwd.components)))
        lines.append("INV " + " ".join(f"{n}={c}" for n, c in zip(w.ctx.names, inv.components)))
    lines.append(f"PLANE c={w.c}")
    lines.append(f"KAPPA k={w.kappa}")
    return "\n".join(lines) + "\n"


def parse_rectify_word(text: str, field: Field = QQ) -> RectifyWord:
    from .flows import _KV

    lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("VARS "):
        raise WordFormatError("missing VARS header")
    ctx = VarContext(lines[0].split()[1:])
    pieces = []
    pending = None
    c = kappa = None

    def read_map(line):
        kv = {m.group(1): m.group(2).strip() for m in _KV.finditer(line.split(None, 1)[1])}
        if set(kv) != set(ctx.names):
            raise WordFormatError(f"map line needs one entry per variable: {line!r}")
        try:
            return PolyMap(ctx, ctx, [parse(kv[n], ctx, field) for n in ctx.names])
        except Exception as exc:
            raise WordFormatError(str(exc)) from exc

    for line in lines[1:]:
        op = line.split()[0]
        if op == "MAP":
            if pending is not None:
                raise WordFormatError("MAP without INV")
            pending = read_map(line)
        elif op == "INV":
            if pending is None:
                raise WordFormatError("INV without MAP")
            pieces.append((pending, read_map(line)))
            pending = None
        elif op == "PLANE":
            c = field(Fraction(line.split("c=", 1)[1].strip()))
        elif op == "KAPPA":
            kappa = field(Fraction(line.split("k=", 1)[1].strip()))
        else:
            raise WordFormatError(f"unknown line {line!r}")
    if pending is not None or c is None:
        raise WordFormatError("incomplete rectifying word")
    ident = PolyMap.identity(ctx, field)
    forward = compose([fwd for fwd, _ in reversed(pieces)]) if pieces else ident
    inverse = compose([inv for _, inv in pieces]) if pieces else ident
    return RectifyWord(ctx, forward, inverse, c, kappa, pieces)


__all__ = [
    "BinomialSurface",
    "NormalForm",
    "RectifyWord",
    "Smooth",
    "SingularWitness",
    "Undecided",
    "approximate_root",
    "elementary_inverse",
    "russell_chart_rectifying_maps",
    "normal_form",
    "parse_rectify_word",
    "rectify_n1",
    "rectify_pair",
    "resultant",
    "serialize_rectify_word",
    "smoothness_check",
    "split_roots",
    "verify_rectified",
]
