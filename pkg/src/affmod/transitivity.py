"""Constructive m-transitivity on the smooth locus of ``X: u*v = p(x_1..x_k)``.

The solver moves any ``m`` distinct smooth points to any other ``m`` distinct
smooth points with a word of lifted shear flows:

1. :func:`move_off_hypersurface` pushes every point off ``{v = 0}``;
2. :func:`gather_into_U1` moves points, one ``v``-level at a time, into
   ``{u = 1}`` using shears that are switched off on every other level;
3. inside ``{u = 1}`` the ``x`` coordinates are free, so a word of affine
   shears (:func:`g0_transitive`) lifted through the ``u`` side finishes the job.

All arithmetic is exact over the rationals (or prime fields); the approximate
complex field is supported where root finding needs it.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import (
    DuplicatePointError,
    FiberPointsNotFound,
    OffVarietyError,
    SingularPointError,
)
from .fields import QQ, Approx, ApproxComplexField, Field
from .flows import (
    Z_CTX,
    AutoWord,
    HypersurfaceX,
    Shear,
    XGenerator,
    XPoint,
    apply_xgen,
    invert_word,
    word_stats,
)
from .poly import Poly, PolyMap, VarContext, diff, substitute

T_CTX = VarContext(["t"])


# ---------------------------------------------------------------------------
# small helpers


def time_sequence():
    """1, -1, 1/2, -1/2, 1/3, -1/3, ..."""
    n = 1
    while True:
        yield Fraction(1, n)
        yield Fraction(-1, n)
        n += 1


def integer_sequence():
    """0, 1, -1, 2, -2, ..."""
    yield 0
    n = 1
    while True:
        yield n
        yield -n
        n += 1


def _sort_key(c):
    if isinstance(c, Approx):
        return (c.z.real, c.z.imag)
    if isinstance(c, Fraction):
        return (c, 0)
    return (getattr(c, "value", c), 0)


def _all_distinct(values) -> bool:
    values = list(values)
    for i in range(len(values)):
        for j in range(i + 1, len(values)):
            if values[i] == values[j]:
                return False
    return True


def _check_distinct(points, what="points"):
    if not _all_distinct([tuple(p) for p in points]):
        raise DuplicatePointError(f"{what} are not pairwise distinct")


def is_smooth_point(X: HypersurfaceX, P: XPoint) -> bool:
    """Smooth unless ``u = v = 0`` and the gradient of ``p`` vanishes."""
    if not X.contains(P):
        raise OffVarietyError(f"{P} is not on X")
    if P.u or P.v:
        return True
    return any(diff(X.p, n).evaluate(P.xs) for n in X.xctx.names)


def interpolate(nodes: Sequence, values: Sequence, field: Field = QQ, var: str = "t") -> Poly:
    """Lagrange interpolant of degree below ``len(nodes)`` in one variable ``var``."""
    nodes = [field(a) for a in nodes]
    values = [field(b) for b in values]
    if len(nodes) != len(values):
        raise ValueError("nodes and values differ in length")
    if not _all_distinct(nodes):
        raise DuplicatePointError("interpolation nodes are not distinct")
    ctx = T_CTX if var == "t" else VarContext([var])
    T = Poly.var(ctx, var, field)
    # Newton divided differences
    n = len(nodes)
    coef = list(values)
    for j in range(1, n):
        for i in range(n - 1, j - 1, -1):
            coef[i] = (coef[i] - coef[i - 1]) / (nodes[i] - nodes[i - j])
    result = Poly.const(ctx, coef[-1] if n else 0, field)
    for i in range(n - 2, -1, -1):
        result = result * (T - nodes[i]) + coef[i]
    return result


# ---------------------------------------------------------------------------
# affine shear group on K^k


def _xctx(k: int) -> VarContext:
    return VarContext([f"x{i}" for i in range(1, k + 1)])


def _transvection(ctx, i, j, c, field):
    return Shear(ctx.names[i], Poly.var(ctx, ctx.names[j], field), c)


@dataclass
class SeparationReport:
    first_form: tuple  # coefficients c_j with x_1 -> x_1 + sum c_j x_j
    second_shift: object  # c with x_2 -> x_2 + c*x_1
    attempts: int


def separating_shear_setup(points: Sequence, targets: Sequence = None, ctx=None, field: Field = QQ):
    """Transvection word after which the points have distinct first and second coordinates.

    With ``targets`` given, the first coordinate must separate the points
    and (separately) the targets, and the second coordinate must separate
    the points.  The word is found by a deterministic search over small
    integer shear parameters.
    """
    points = [tuple(field(c) for c in p) for p in points]
    targets = None if targets is None else [tuple(field(c) for c in p) for p in targets]
    k = len(points[0]) if points else 0
    ctx = _xctx(k) if ctx is None else ctx
    _check_distinct(points)
    if targets is not None:
        _check_distinct(targets, "targets")
    groups = [points] + ([targets] if targets is not None else [])
    if k == 1:
        return AutoWord(ctx, ()), SeparationReport((), 0, 0)
    attempts = 0
    chosen = None
    seq = list(itertools.islice(integer_sequence(), 64))
    for size in range(len(seq)):
        for combo in itertools.product(range(size + 1), repeat=k - 1):
            if max(combo) != size:
                continue
            attempts += 1
            cs = [field(seq[i]) for i in combo]
            ok = True
            for grp in groups:
                vals = [p[0] + sum((c * p[j + 1] for j, c in enumerate(cs)), field.zero) for p in grp]
                if not _all_distinct(vals):
                    ok = False
                    break
            if ok:
                chosen = cs
                break
        if chosen is not None:
            break
    if chosen is None:  # pragma: no cover - bad parameters form a finite set
        raise RuntimeError("no separating linear form found")
    steps = [_transvection(ctx, 0, j + 1, c, field) for j, c in enumerate(chosen) if c]
    word = AutoWord(ctx, tuple(steps))
    moved = [word.apply(p) for p in points]
    shift = field.zero
    for c in integer_sequence():
        attempts += 1
        c = field(c)
        if _all_distinct([p[1] + c * p[0] for p in moved]):
            shift = c
            break
    if shift:
        word = word.then(_transvection(ctx, 1, 0, shift, field))
    return word, SeparationReport(tuple(chosen), shift, attempts)


def _coordinate_shear(ctx, d: int, src: int, nodes, values, field) -> Shear:
    q = interpolate(nodes, values, field)
    h = substitute(q, PolyMap(T_CTX, ctx, [Poly.var(ctx, ctx.names[src], field)]))
    return Shear(ctx.names[d], h, field.one)


def g0_transitive(sources: Sequence, targets: Sequence, ctx=None, field: Field = QQ) -> AutoWord:
    """Word of shears on ``K^k`` sending ``sources[i]`` to ``targets[i]``.

    Coordinates are first made generic by a transvection word ``L``; then
    the coordinates ``x_3..x_k`` are set by shears in ``x_1``, and finally
    ``x_1`` by a shear in ``x_2`` and ``x_2`` by a shear in ``x_1``.  The
    result is ``L``, the core, ``L^-1``.
    """
    sources = [tuple(field(c) for c in p) for p in sources]
    targets = [tuple(field(c) for c in p) for p in targets]
    if len(sources) != len(targets):
        raise ValueError("sources and targets differ in number")
    if not sources:
        raise ValueError("need at least one point")
    k = len(sources[0])
    ctx = _xctx(k) if ctx is None else ctx
    _check_distinct(sources, "sources")
    _check_distinct(targets, "targets")
    if sources == targets:
        return AutoWord(ctx, ())
    if k == 1:
        if len(sources) != 1:
            raise ValueError("on the line only single points can be moved by shears")
        h = Poly.const(ctx, targets[0][0] - sources[0][0], field)
        return AutoWord(ctx, (Shear(ctx.names[0], h, field.one),)).pruned()
    L, _ = separating_shear_setup(sources, targets, ctx, field)
    src = [L.apply(p) for p in sources]
    tgt = [L.apply(p) for p in targets]
    core = []
    cur = list(src)
    for j in range(2, k):
        s = _coordinate_shear(ctx, j, 0, [p[0] for p in cur], [t[j] - p[j] for p, t in zip(cur, tgt)], field)
        core.append(s)
        cur = [s.apply(p) for p in cur]
    s1 = _coordinate_shear(ctx, 0, 1, [p[1] for p in cur], [t[0] - p[0] for p, t in zip(cur, tgt)], field)
    core.append(s1)
    cur = [s1.apply(p) for p in cur]
    s2 = _coordinate_shear(ctx, 1, 0, [p[0] for p in cur], [t[1] - p[1] for p, t in zip(cur, tgt)], field)
    core.append(s2)
    word = (L + AutoWord(ctx, tuple(core)) + invert_word(L)).pruned()
    images = [word.apply(p) for p in sources]
    if images != targets:
        raise ArithmeticError("shear word does not reach the targets")
    return word


# ---------------------------------------------------------------------------
# fiber points


def _value_list(bound: int, field: Field):
    return [field(v) for v in list(range(0, bound + 1)) + list(range(-1, -bound - 1, -1))]


def _assignments(nvars: int, values: list, limit: int):
    """Index tuples in cube shells of increasing size, at most ``limit`` of them."""
    if nvars == 0:
        yield ()
        return
    count = 0
    for size in range(len(values)):
        for combo in itertools.product(range(size + 1), repeat=nvars):
            if max(combo) != size:
                continue
            yield tuple(values[i] for i in combo)
            count += 1
            if count >= limit:
                return


def _divisors(n: int, cap: int = 10**6):
    n = abs(n)
    if n == 0 or n > cap:
        return None
    out = []
    for d in range(1, int(math.isqrt(n)) + 1):
        if n % d == 0:
            out.append(d)
            out.append(n // d)
    return sorted(set(out))


def rational_roots(coeffs: dict) -> list:
    """Rational roots of ``sum coeffs[i] t^i`` (Fraction coefficients) by the rational root test."""
    coeffs = {i: Fraction(c) for i, c in coeffs.items() if c}
    if not coeffs:
        return []
    low = min(coeffs)
    roots = [Fraction(0)] if low > 0 else []
    coeffs = {i - low: c for i, c in coeffs.items()}
    deg = max(coeffs)
    if deg == 0:
        return roots
    den = 1
    for c in coeffs.values():
        den = den * c.denominator // math.gcd(den, c.denominator)
    ints = {i: int(c * den) for i, c in coeffs.items()}
    a0, an = ints.get(0, 0), ints[deg]
    ps, qs = _divisors(a0), _divisors(an)
    if ps is None or qs is None:
        return roots
    seen = set()
    for p_ in ps:
        for q_ in qs:
            for sign in (1, -1):
                r = Fraction(sign * p_, q_)
                if r in seen:
                    continue
                seen.add(r)
                if sum(c * r ** i for i, c in ints.items()) == 0:
                    roots.append(r)
    return sorted(roots)


def _approx_roots(poly_coeffs: dict, field: ApproxComplexField) -> list:
    deg = max(poly_coeffs)
    arr = [complex(poly_coeffs.get(i, 0).z if isinstance(poly_coeffs.get(i, 0), Approx) else poly_coeffs.get(i, 0))
           for i in range(deg, -1, -1)]
    roots = np.roots(arr)
    out = []
    for r in roots:
        z = complex(r)
        for _ in range(50):  # Newton refinement
            val = sum(a * z ** (deg - i) for i, a in enumerate(arr))
            der = sum(a * (deg - i) * z ** (deg - i - 1) for i, a in enumerate(arr[:-1]))
            if der == 0:
                break
            step = val / der
            z -= step
            if abs(step) < 1e-15:
                break
        out.append(field(z))
    return out


def fiber_points(p: Poly, c, m: int, avoid: Sequence = (), bound: int = 12, limit: int = 2000) -> list:
    """``m`` distinct points with ``p(x) = c``, none of them in ``avoid``.

    Tries, in order: a variable in which ``p`` is linear (sweeping the other
    coordinates over small integers), rational roots of one-variable
    specializations, and, over the approximate complex field, numerical roots.
    """
    field = p.field
    c = field(c)
    if p.is_constant():
        raise ValueError("p must be nonconstant")
    avoid = {tuple(field(v) for v in a) for a in avoid} if field.exact else [tuple(a) for a in avoid]
    names = p.ctx.names
    found = []

    def accept(pt):
        pt = tuple(pt)
        if pt in found:
            return False
        if field.exact:
            if pt in avoid:
                return False
        elif any(pt == a for a in avoid):
            return False
        found.append(pt)
        return len(found) >= m

    values = _value_list(bound, field)
    g = p - c
    # heuristic 1: linear in some variable
    for j, name in enumerate(names):
        if g.degree(name) != 1:
            continue
        coeffs = g.coefficients_in(name)
        a, b = coeffs[1], coeffs.get(0, Poly.zero(p.ctx, field))
        others = [n for n in names if n != name]
        for assignment in _assignments(len(others), values, limit):
            env = dict(zip(others, assignment))
            av = a.specialize(env).constant_value()
            if not av:
                continue
            bv = b.specialize(env).constant_value()
            env[name] = -bv / av
            if accept(env[n] for n in names):
                return found
    # heuristic 2: roots of one-variable specializations
    for j, name in enumerate(names):
        if g.degree(name) < 1:
            continue
        others = [n for n in names if n != name]
        for assignment in _assignments(len(others), values, limit // max(1, len(names))):
            env = dict(zip(others, assignment))
            spec = g.specialize(env)
            if spec.degree(name) < 1:
                continue
            uc = {i: q.constant_value() for i, q in spec.coefficients_in(name).items()}
            if isinstance(field, ApproxComplexField):
                roots = _approx_roots(uc, field)
            elif field == QQ:
                roots = rational_roots(uc)
            else:
                roots = [field(r) for r in range(field.q) if sum(cf * field(r) ** i for i, cf in uc.items()) == 0]
            for r in roots:
                env2 = dict(env)
                env2[name] = r
                if accept(env2[n] for n in names):
                    return found
    raise FiberPointsNotFound(f"found only {len(found)} of {m} points with p = {c}")


# ---------------------------------------------------------------------------
# moving points on X


def _shear_h(X: HypersurfaceX, value) -> Poly:
    return Poly.const(X.xctx, value, X.field)


def _directions(X: HypersurfaceX, xs):
    """Candidate directions at ``xs``: coordinate vectors, then small integer vectors."""
    k = X.k
    field = X.field
    for i in range(k):
        yield tuple(field.one if j == i else field.zero for j in range(k))
    vals = list(itertools.islice(integer_sequence(), 7))
    for combo in itertools.product(vals, repeat=k):
        if sum(1 for c in combo if c) >= 2:
            yield tuple(field(c) for c in combo)


def _line_nonconstant(X: HypersurfaceX, xs, w) -> bool:
    """Whether ``p(xs + lam*w)`` is a nonconstant function of ``lam``."""
    field = X.field
    ctx = T_CTX
    T = Poly.var(ctx, "t", field)
    m = PolyMap(X.xctx, ctx, [T.scale(wi) + xi for xi, wi in zip(xs, w)])
    return not substitute(X.p, m).is_constant()


def move_off_hypersurface(X: HypersurfaceX, points: Sequence[XPoint], side: str = "U0"):
    """Word making ``u != 0`` (side ``U0``) or ``v != 0`` (side ``V0``) at every point.

    Points are fixed one at a time; each time parameter comes from
    :func:`time_sequence`, skipping values that would put an already
    treated point back on the hypersurface.  Returns ``(word, images)``.
    """
    if side not in ("U0", "V0"):
        raise ValueError("side must be 'U0' or 'V0'")
    field = X.field
    points = list(points)
    for P in points:
        if not is_smooth_point(X, P):
            raise SingularPointError(f"{P} is a singular point of X")
    _check_distinct([P.as_tuple() for P in points])
    kind = "LIFT1" if side == "U0" else "LIFT2"
    qz = Poly.var(Z_CTX, "z", field)

    def coord(P):  # the coordinate that must become nonzero
        return P.u if side == "U0" else P.v

    def other(P):
        return P.v if side == "U0" else P.u

    steps = []
    cur = list(points)
    done = []
    for idx in range(len(cur)):
        P = cur[idx]
        if coord(P):
            done.append(idx)
            continue
        candidates = []
        if not other(P):
            for i, n in enumerate(X.xctx.names):
                if diff(X.p, n).evaluate(P.xs):
                    w = tuple(field.one if j == i else field.zero for j in range(X.k))
                    candidates.append(w)
                    break
        else:
            for w in _directions(X, P.xs):
                if _line_nonconstant(X, P.xs, w):
                    candidates.append(w)
                    break
        if not candidates:  # pragma: no cover - excluded by smoothness
            raise SingularPointError(f"no direction moves {P}")
        w = candidates[0]
        for t in time_sequence():
            gens = [
                XGenerator(kind, X.xctx.names[i], _shear_h(X, wi), qz, t)
                for i, wi in enumerate(w)
                if wi
            ]
            trial = list(cur)
            for g in gens:
                trial = [apply_xgen(X, g, Q, check=False) for Q in trial]
            if coord(trial[idx]) and all(coord(trial[j]) for j in done):
                steps.extend(gens)
                cur = trial
                done.append(idx)
                break
    return AutoWord(X.xctx, tuple(steps), "X"), cur


def stabilizing_q(c0, others: Sequence, field: Field) -> Poly:
    """``q(z) = z^2 * prod(z - c_j)``, scaled so that ``q(c0) = 1``.

    It vanishes at 0 (to second order, so ``{v = 0}`` is fixed pointwise) and at
    every ``c_j``, so lifted flows are trivial on those ``v``-levels.
    """
    z = Poly.var(Z_CTX, "z", field)
    q = z * z
    for cj in others:
        q = q * (z - cj)
    val = q.evaluate([c0])
    if not val:
        raise ValueError("c0 must be nonzero and differ from the other levels")
    return q.scale(field.one / val)


@dataclass
class GroupMove:
    level: object
    others: tuple
    q: Poly
    word: AutoWord


@dataclass
class GatherResult:
    word: AutoWord
    images: list
    pre_word: AutoWord
    groups: list = dc_field(default_factory=list)


def _lift_word(X: HypersurfaceX, w: AutoWord, kind: str, q: Poly) -> AutoWord:
    gens = []
    for s in w.steps:
        h = s.h.scale(s.t)
        gens.append(XGenerator(kind, s.d, h, q, X.field.one))
    return AutoWord(X.xctx, tuple(gens), "X")


def gather_into_U1(X: HypersurfaceX, points: Sequence[XPoint]) -> GatherResult:
    """Word moving every point into ``{u = 1}``, keeping them distinct.

    First all points leave ``{v = 0}``.  Then, level by level in increasing
    order of ``v``, the points of one level are moved along the fiber
    ``p = v`` by lifted shears that are trivial on every other level and on
    ``{v = 0}``.
    """
    field = X.field
    pre, cur = move_off_hypersurface(X, points, "V0")
    steps = list(pre.steps)
    levels = sorted({P.v for P in cur}, key=_sort_key) if field.exact else _approx_levels(cur)
    groups = []
    for c0 in levels:
        idxs = [i for i, P in enumerate(cur) if P.v == c0]
        if all(cur[i].u == field.one for i in idxs):
            continue
        others = tuple(c for c in levels if c != c0)
        fixed = [cur[i].xs for i in idxs if cur[i].u == field.one]
        moving = [i for i in idxs if cur[i].u != field.one]
        new_targets = fiber_points(X.p, c0, len(moving), avoid=fixed)
        sources = [cur[i].xs for i in idxs]
        targets = []
        it = iter(new_targets)
        for i in idxs:
            targets.append(cur[i].xs if cur[i].u == field.one else next(it))
        if X.k == 1 and len(idxs) > 1:
            raise FiberPointsNotFound("one x coordinate cannot separate several points on a level")
        w0 = g0_transitive(sources, targets, X.xctx, field)
        q = stabilizing_q(c0, others, field)
        lifted = _lift_word(X, w0, "LIFT1", q)
        groups.append(GroupMove(c0, others, q, lifted))
        cur = [lifted.apply(P, X) for P in cur]
        steps.extend(lifted.steps)
    word = AutoWord(X.xctx, tuple(steps), "X")
    return GatherResult(word, cur, pre, groups)


def _approx_levels(points):
    levels = []
    for P in points:
        if not any(P.v == c for c in levels):
            levels.append(P.v)
    return sorted(levels, key=_sort_key)


# ---------------------------------------------------------------------------
# the solver


@dataclass
class TransitivityPlan:
    word: AutoWord
    trace: list  # (stage name, number of steps applied so far, points)
    stats: dict

    def to_json(self) -> dict:
        from .flows import serialize_word

        return {
            "word": serialize_word(self.word),
            "trace": [
                {"stage": name, "steps": n, "points": [[str(c) for c in P.as_tuple()] for P in pts]}
                for name, n, pts in self.trace
            ],
            "stats": self.stats,
        }


def _validate_points(X: HypersurfaceX, pts: Sequence[XPoint], what: str):
    for P in pts:
        if not X.contains(P):
            raise OffVarietyError(f"{what} point {P} is not on X")
        if not is_smooth_point(X, P):
            raise SingularPointError(f"{what} point {P} is singular")
    _check_distinct([P.as_tuple() for P in pts], what)


def solve(X: HypersurfaceX, sources: Sequence[XPoint], targets: Sequence[XPoint]) -> TransitivityPlan:
    """A word sending ``sources[i]`` to ``targets[i]`` for every ``i``."""
    if X.k < 2:
        raise ValueError("the solver needs k >= 2")
    sources, targets = list(sources), list(targets)
    if len(sources) != len(targets):
        raise ValueError("sources and targets differ in number")
    _validate_points(X, sources, "source")
    _validate_points(X, targets, "target")
    field = X.field
    gp = gather_into_U1(X, sources)
    gq = gather_into_U1(X, targets)
    qz = Poly.var(Z_CTX, "z", field)
    w0 = g0_transitive([P.xs for P in gp.images], [P.xs for P in gq.images], X.xctx, field)
    mid = _lift_word(X, w0, "LIFT2", qz)
    word = gp.word + mid + invert_word(gq.word)
    trace = [("sources", 0, list(sources))]
    n = len(gp.word)
    trace.append(("gathered", n, list(gp.images)))
    after_mid = [mid.apply(P, X) for P in gp.images]
    n += len(mid)
    trace.append(("matched", n, after_mid))
    final = [invert_word(gq.word).apply(P, X) for P in after_mid]
    n += len(gq.word)
    trace.append(("targets", n, final))
    stats = word_stats(word)
    stats["gather_sources"] = len(gp.word)
    stats["midgame"] = len(mid)
    stats["gather_targets"] = len(gq.word)
    plan = TransitivityPlan(word, trace, stats)
    if final != targets:
        raise ArithmeticError("assembled word does not reach the targets")
    return plan


def verify_plan(X: HypersurfaceX, plan: TransitivityPlan, sources: Sequence[XPoint], targets: Sequence[XPoint]) -> bool:
    """Replay the word exactly; every intermediate point must stay on ``X``."""
    cur = list(sources)
    if len(cur) != len(targets):
        return False
    if any(not X.contains(P) for P in cur):
        return False
    checkpoints = {n: pts for _, n, pts in plan.trace}
    for i, g in enumerate(plan.word.steps):
        if i in checkpoints and checkpoints[i] != cur:
            return False
        try:
            cur = [apply_xgen(X, g, P, check=False) for P in cur]
        except (ZeroDivisionError, ValueError):
            return False
        if any(not X.contains(P) for P in cur):
            return False
    n = len(plan.word)
    if n in checkpoints and checkpoints[n] != cur:
        return False
    return cur == list(targets)
