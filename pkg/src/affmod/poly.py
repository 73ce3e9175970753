"""Sparse multivariate polynomials over the fields of :mod:`affmod.fields`.

A :class:`Poly` is an immutable dictionary from exponent tuples to nonzero
coefficients, tied to a :class:`VarContext` that fixes the variable order.
Monomials are ordered graded-lexicographically with the first declared
variable largest; that order is used for printing and for choosing leading
terms in division, nothing else depends on it.

A :class:`PolyMap` lists one image polynomial per source variable.  Read as a
ring map it pulls back ``f`` to ``f(m_1, ..., m_n)``; read as a map of points it
sends ``P`` to ``(m_1(P), ..., m_n(P))``.
"""

from __future__ import annotations

import keyword
from fractions import Fraction
from types import MappingProxyType
from typing import Iterable, Mapping, Sequence

from .errors import (
    ContextMismatchError,
    FieldMismatchError,
    NotDivisibleError,
    UnknownVariableError,
    UnsupportedFieldError,
)
from .fields import QQ, Approx, ApproxComplexField, Field, Mod


class VarContext:
    """An ordered tuple of distinct variable names."""

    __slots__ = ("names", "_index")

    def __init__(self, names: Iterable[str]):
        if isinstance(names, str):
            names = names.replace(",", " ").split()
        names = tuple(names)
        if not names:
            raise ValueError("a variable context needs at least one variable")
        for n in names:
            if not isinstance(n, str) or not n.isidentifier() or keyword.iskeyword(n):
                raise ValueError(f"invalid variable name {n!r}")
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate variable names in {names}")
        self.names = names
        self._index = {n: i for i, n in enumerate(names)}

    def __len__(self):
        return len(self.names)

    def __iter__(self):
        return iter(self.names)

    def __contains__(self, name):
        return name in self._index

    def index(self, name: str) -> int:
        try:
            return self._index[name]
        except KeyError:
            raise UnknownVariableError(name) from None

    def extend(self, *names: str) -> "VarContext":
        return VarContext(self.names + tuple(names))

    def gen(self, name: str, field: Field = QQ) -> "Poly":
        return Poly.var(self, name, field)

    def gens(self, field: Field = QQ) -> tuple:
        return tuple(Poly.var(self, n, field) for n in self.names)

    def __eq__(self, other):
        return isinstance(other, VarContext) and other.names == self.names

    def __hash__(self):
        return hash(self.names)

    def __repr__(self):
        return f"VarContext({list(self.names)})"


def as_context(ctx) -> VarContext:
    if isinstance(ctx, VarContext):
        return ctx
    if isinstance(ctx, str):
        return VarContext(ctx.replace(",", " ").split())
    return VarContext(ctx)


def _grlex_key(exp):
    return (sum(exp), exp)


def _add_exp(a, b):
    return tuple(i + j for i, j in zip(a, b))


class Poly:
    """Immutable sparse polynomial.  Use the classmethods or :func:`parse` to build one."""

    __slots__ = ("ctx", "_terms", "field", "_hash")

    def __init__(self, ctx, terms: Mapping = None, field: Field = QQ):
        ctx = as_context(ctx)
        n = len(ctx)
        clean = {}
        for exp, c in (terms or {}).items():
            exp = tuple(int(e) for e in exp)
            if len(exp) != n or any(e < 0 for e in exp):
                raise ValueError(f"bad exponent vector {exp} for {ctx}")
            c = field(c)
            if c:
                if exp in clean:
                    c = clean[exp] + c
                    if not c:
                        del clean[exp]
                        continue
                clean[exp] = c
        self.ctx = ctx
        self._terms = clean
        self.field = field
        self._hash = None

    @classmethod
    def _raw(cls, ctx, terms, field):
        obj = object.__new__(cls)
        obj.ctx = ctx
        obj._terms = terms
        obj.field = field
        obj._hash = None
        return obj

    # constructors -------------------------------------------------------
    @classmethod
    def zero(cls, ctx, field: Field = QQ):
        return cls._raw(as_context(ctx), {}, field)

    @classmethod
    def const(cls, ctx, c, field: Field = QQ):
        ctx = as_context(ctx)
        c = field(c)
        return cls._raw(ctx, {(0,) * len(ctx): c} if c else {}, field)

    @classmethod
    def var(cls, ctx, name: str, field: Field = QQ):
        ctx = as_context(ctx)
        i = ctx.index(name)
        exp = tuple(1 if j == i else 0 for j in range(len(ctx)))
        return cls._raw(ctx, {exp: field.one}, field)

    @classmethod
    def monomial(cls, ctx, exp, c=1, field: Field = QQ):
        return cls(ctx, {tuple(exp): c}, field)

    @classmethod
    def from_univariate(cls, ctx, name: str, coeffs: Mapping, field: Field = QQ):
        """Build ``sum coeffs[i] * name^i`` where coefficients are scalars or polys in ``ctx``."""
        x = cls.var(ctx, name, field)
        out = cls.zero(ctx, field)
        for i, c in coeffs.items():
            if not isinstance(c, Poly):
                c = cls.const(ctx, c, field)
            out = out + c * x ** i
        return out

    # basic accessors ----------------------------------------------------
    @property
    def terms(self):
        return MappingProxyType(self._terms)

    def __len__(self):
        return len(self._terms)

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self):
        return bool(self._terms)

    def is_constant(self) -> bool:
        return not self._terms or (len(self._terms) == 1 and not any(next(iter(self._terms))))

    def constant_value(self):
        """The constant coefficient."""
        return self._terms.get((0,) * len(self.ctx), self.field.zero)

    def coeff(self, exp):
        return self._terms.get(tuple(exp), self.field.zero)

    def total_degree(self) -> int:
        if not self._terms:
            return -1
        return max(sum(e) for e in self._terms)

    def degree(self, name: str = None) -> int:
        """Degree in ``name``, or total degree when no name is given; -1 for zero."""
        if name is None:
            return self.total_degree()
        if not self._terms:
            return -1
        i = self.ctx.index(name)
        return max(e[i] for e in self._terms)

    def vars_used(self) -> tuple:
        used = set()
        for e in self._terms:
            for i, k in enumerate(e):
                if k:
                    used.add(i)
        return tuple(self.ctx.names[i] for i in sorted(used))

    def free_of(self, name: str) -> bool:
        i = self.ctx.index(name)
        return all(e[i] == 0 for e in self._terms)

    def lead(self):
        """Leading (exponent, coefficient) in graded lex order."""
        if not self._terms:
            raise ValueError("zero polynomial has no leading term")
        e = max(self._terms, key=_grlex_key)
        return e, self._terms[e]

    def sorted_terms(self):
        return sorted(self._terms.items(), key=lambda kv: _grlex_key(kv[0]), reverse=True)

    # compatibility ------------------------------------------------------
    def _check(self, other: "Poly"):
        if other.field != self.field:
            raise FieldMismatchError(f"polynomials over {self.field} and {other.field}")
        if other.ctx != self.ctx:
            raise ContextMismatchError(f"contexts {self.ctx.names} and {other.ctx.names} differ")

    def _coerce(self, other) -> "Poly":
        if isinstance(other, Poly):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, Mod, Approx)):
            return Poly.const(self.ctx, other, self.field)
        return NotImplemented

    # arithmetic ---------------------------------------------------------
    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self._terms)
        for e, c in other._terms.items():
            s = out.get(e)
            if s is None:
                out[e] = c
            else:
                s = s + c
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(self.ctx, out, self.field)

    __radd__ = __add__

    def __neg__(self):
        return Poly._raw(self.ctx, {e: -c for e, c in self._terms.items()}, self.field)

    def __pos__(self):
        return self

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return other + (-self)

    def scale(self, c) -> "Poly":
        c = self.field(c)
        if not c:
            return Poly.zero(self.ctx, self.field)
        return Poly._raw(self.ctx, {e: v * c for e, v in self._terms.items()}, self.field)

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Mod, Approx)):
            return self.scale(other)
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        a, b = self._terms, other._terms
        if len(a) < len(b):
            a, b = b, a
        out = {}
        for eb, cb in b.items():
            for ea, ca in a.items():
                e = tuple(i + j for i, j in zip(ea, eb))
                s = out.get(e)
                out[e] = ca * cb if s is None else s + ca * cb
        return Poly._raw(self.ctx, {e: c for e, c in out.items() if c}, self.field)

    __rmul__ = __mul__

    def __pow__(self, n):
        if not isinstance(n, int) or isinstance(n, bool):
            raise TypeError("polynomial exponent must be an int")
        if n < 0:
            raise ValueError("negative exponent")
        result = Poly.const(self.ctx, 1, self.field)
        if n == 0:
            return result
        if len(self._terms) == 1:
            (e, c), = self._terms.items()
            return Poly._raw(self.ctx, {tuple(k * n for k in e): c ** n}, self.field)
        base = self
        while True:
            if n & 1:
                result = result * base
            n >>= 1
            if not n:
                return result
            base = base * base

    def __truediv__(self, other):
        """Division by a nonzero scalar.  Use :func:`exact_divide` for polynomials."""
        if isinstance(other, Poly):
            return exact_divide(self, other)
        c = self.field(other)
        if not c:
            raise ZeroDivisionError("division by zero scalar")
        return self.scale(self.field.one / c)

    def __eq__(self, other):
        if isinstance(other, Poly):
            return self.ctx == other.ctx and self.field == other.field and self._terms == other._terms
        if isinstance(other, (int, Fraction, Mod, Approx)):
            return self == Poly.const(self.ctx, other, self.field)
        return NotImplemented

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.ctx, frozenset(self._terms.items())))
        return self._hash

    # evaluation ---------------------------------------------------------
    def _point(self, point) -> list:
        if isinstance(point, Mapping):
            missing = [n for n in self.vars_used() if n not in point]
            if missing:
                raise UnknownVariableError(missing[0])
            return [self.field(point[n]) if n in point else self.field.zero for n in self.ctx.names]
        point = list(point)
        if len(point) != len(self.ctx):
            raise ContextMismatchError(f"point of length {len(point)} for {len(self.ctx)} variables")
        return [self.field(v) for v in point]

    def evaluate(self, point):
        """Value at a point given as a sequence in context order or a name mapping."""
        vals = self._point(point)
        total = self.field.zero
        cache = [dict() for _ in vals]
        for e, c in self._terms.items():
            t = c
            for i, k in enumerate(e):
                if k:
                    pw = cache[i].get(k)
                    if pw is None:
                        pw = vals[i] ** k
                        cache[i][k] = pw
                    t = t * pw
            total = total + t
        return total

    def specialize(self, values: Mapping) -> "Poly":
        """Replace the named variables by scalars, keeping the context."""
        idx = [(self.ctx.index(n), self.field(v)) for n, v in values.items()]
        out = {}
        for e, c in self._terms.items():
            e = list(e)
            for i, v in idx:
                if e[i]:
                    c = c * v ** e[i]
                    e[i] = 0
            e = tuple(e)
            s = out.get(e)
            out[e] = c if s is None else s + c
        return Poly._raw(self.ctx, {e: c for e, c in out.items() if c}, self.field)

    # views ----------------------------------------------------------------
    def coefficients_in(self, name: str) -> dict:
        """Map ``i -> coefficient of name^i`` with coefficients in the same context."""
        i = self.ctx.index(name)
        out = {}
        for e, c in self._terms.items():
            k = e[i]
            e2 = e[:i] + (0,) + e[i + 1:]
            out.setdefault(k, {})[e2] = c
        return {k: Poly._raw(self.ctx, t, self.field) for k, t in out.items()}

    def embed(self, ctx) -> "Poly":
        """Same polynomial in a context containing every variable it uses."""
        ctx = as_context(ctx)
        if ctx == self.ctx:
            return self
        used = self.vars_used()
        pos = [(self.ctx.index(n), ctx.index(n)) for n in used]
        n = len(ctx)
        out = {}
        for e, c in self._terms.items():
            e2 = [0] * n
            for i, j in pos:
                e2[j] = e[i]
            out[tuple(e2)] = c
        return Poly._raw(ctx, out, self.field)

    def rename(self, mapping: Mapping) -> "Poly":
        """Rename variables of the context; the result lives in the renamed context."""
        ctx = VarContext(mapping.get(n, n) for n in self.ctx.names)
        return Poly._raw(ctx, dict(self._terms), self.field)

    def convert(self, field: Field) -> "Poly":
        """Map coefficients into another field (e.g. rationals into F_q)."""
        out = {}
        for e, c in self._terms.items():
            v = field(c)
            if v:
                out[e] = v
        return Poly._raw(self.ctx, out, field)

    def monic(self) -> "Poly":
        if not self._terms:
            return self
        return self.scale(self.field.one / self.lead()[1])

    # printing -------------------------------------------------------------
    def __str__(self):
        return format_poly(self)

    def __repr__(self):
        return f"Poly({format_poly(self)!r}, {list(self.ctx.names)})"


# ---------------------------------------------------------------------------
# printing


def _format_monomial(ctx, exp) -> str:
    parts = []
    for name, k in zip(ctx.names, exp):
        if k == 1:
            parts.append(name)
        elif k > 1:
            parts.append(f"{name}^{k}")
    return "*".join(parts)


def _split_sign(c):
    """Return (negative?, magnitude text) for a coefficient."""
    if isinstance(c, Fraction):
        if c < 0:
            return True, str(-c)
        return False, str(c)
    if isinstance(c, Mod):
        return False, str(c.value)
    if isinstance(c, Approx):
        z = c.z
        if abs(z.imag) <= c.eps:
            r = z.real
            return (r < 0), repr(abs(r))
        sign = "+" if z.imag >= 0 else "-"
        return False, f"({z.real!r}{sign}{abs(z.imag)!r}j)"
    return False, str(c)


def format_poly(f: Poly) -> str:
    """Canonical text: graded lex descending, ``x^2``, ``3/2*y``, unit coefficients omitted."""
    if not f._terms:
        return "0"
    out = []
    for i, (exp, c) in enumerate(f.sorted_terms()):
        neg, mag = _split_sign(c)
        mono = _format_monomial(f.ctx, exp)
        if mono:
            body = mono if mag == "1" else f"{mag}*{mono}"
        else:
            body = mag
        if i == 0:
            out.append(f"-{body}" if neg else body)
        else:
            out.append(f" - {body}" if neg else f" + {body}")
    return "".join(out)


# ---------------------------------------------------------------------------
# maps


class PolyMap:
    """Images of the source variables as polynomials over the target context."""

    __slots__ = ("source", "target", "components", "field")

    def __init__(self, source, target, components: Sequence[Poly]):
        source = as_context(source)
        target = as_context(target)
        components = tuple(components)
        if len(components) != len(source):
            raise ValueError(f"{len(components)} components for {len(source)} source variables")
        if not components:
            raise ValueError("empty map")
        field = components[0].field
        for c in components:
            if c.ctx != target:
                raise ContextMismatchError(f"component {c} is not over {target.names}")
            if c.field != field:
                raise FieldMismatchError("components over different fields")
        self.source = source
        self.target = target
        self.components = components
        self.field = field

    @classmethod
    def identity(cls, ctx, field: Field = QQ):
        ctx = as_context(ctx)
        return cls(ctx, ctx, ctx.gens(field))

    @classmethod
    def from_mapping(cls, source, target, images: Mapping, field: Field = QQ):
        """Build from ``{name: Poly or str}``; unlisted source variables map to the same-named target variable."""
        from .parsing import parse

        source = as_context(source)
        target = as_context(target)
        comps = []
        for n in source.names:
            img = images.get(n)
            if img is None:
                img = Poly.var(target, n, field)
            elif isinstance(img, str):
                img = parse(img, target, field)
            elif not isinstance(img, Poly):
                img = Poly.const(target, img, field)
            else:
                img = img.embed(target)
            comps.append(img)
        return cls(source, target, comps)

    def __getitem__(self, name: str) -> Poly:
        return self.components[self.source.index(name)]

    def __call__(self, point) -> tuple:
        """Act on a point of the target space, returning a point of the source space."""
        return tuple(c.evaluate(point) for c in self.components)

    def is_identity(self) -> bool:
        return self.source == self.target and all(
            c == Poly.var(self.target, n, self.field) for n, c in zip(self.source.names, self.components)
        )

    def max_degree(self) -> int:
        return max(c.total_degree() for c in self.components)

    def __eq__(self, other):
        return (
            isinstance(other, PolyMap)
            and self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )

    def __hash__(self):
        return hash((self.source, self.target, self.components))

    def __str__(self):
        return "(" + ", ".join(str(c) for c in self.components) + ")"

    def __repr__(self):
        return f"PolyMap({list(self.source.names)} <- {list(self.target.names)}: {self})"


def substitute(f: Poly, m: PolyMap) -> Poly:
    """Pull ``f`` back along ``m``: replace each source variable by its image."""
    if f.ctx != m.source:
        raise ContextMismatchError(f"polynomial over {f.ctx.names}, map source {m.source.names}")
    if f.field != m.field:
        raise FieldMismatchError(f"polynomial over {f.field}, map over {m.field}")
    target = m.target
    one = Poly.const(target, 1, f.field)
    powers = [{0: one, 1: c} for c in m.components]

    def power(i, k):
        cache = powers[i]
        p = cache.get(k)
        if p is None:
            half = power(i, k // 2)
            p = half * half
            if k % 2:
                p = p * cache[1]
            cache[k] = p
        return p

    acc = {}
    for e, c in f._terms.items():
        term = None
        for i, k in enumerate(e):
            if k:
                pk = power(i, k)
                term = pk if term is None else term * pk
        if term is None:
            items = ((tuple([0] * len(target)), f.field.one),)
        else:
            items = term._terms.items()
        for e2, c2 in items:
            s = acc.get(e2)
            acc[e2] = c * c2 if s is None else s + c * c2
    return Poly._raw(target, {e: c for e, c in acc.items() if c}, f.field)


def compose(maps: Sequence[PolyMap]) -> PolyMap:
    """Point-action composition: ``compose([phi, psi])`` is ``phi o psi``, i.e. ``P -> phi(psi(P))``.

    As ring maps this pulls back through ``phi`` first, then ``psi``.
    """
    maps = list(maps)
    if not maps:
        raise ValueError("compose needs at least one map")
    result = maps[0]
    for nxt in maps[1:]:
        if result.target != nxt.source:
            raise ContextMismatchError(
                f"cannot chain map into {result.target.names} after map from {nxt.source.names}"
            )
        result = PolyMap(result.source, nxt.target, [substitute(c, nxt) for c in result.components])
    return result


def diff(f: Poly, name: str) -> Poly:
    """Formal partial derivative with respect to ``name``."""
    i = f.ctx.index(name)
    out = {}
    for e, c in f._terms.items():
        k = e[i]
        if k:
            v = c * k
            if v:
                out[e[:i] + (k - 1,) + e[i + 1:]] = v
    return Poly._raw(f.ctx, out, f.field)


def _divide(a: Poly, b: Poly):
    """Grlex division of ``a`` by ``b``; returns (quotient, remainder-or-None on failure)."""
    if not b._terms:
        raise ZeroDivisionError("division by the zero polynomial")
    eb, cb = b.lead()
    inv = a.field.one / cb
    r = dict(a._terms)
    q = {}
    bt = list(b._terms.items())
    while r:
        er = max(r, key=_grlex_key)
        d = tuple(i - j for i, j in zip(er, eb))
        if any(k < 0 for k in d):
            return None, Poly._raw(a.ctx, r, a.field)
        t = r[er] * inv
        q[d] = t
        for e2, c2 in bt:
            e3 = _add_exp(e2, d)
            v = r.get(e3)
            v = -(t * c2) if v is None else v - t * c2
            if v:
                r[e3] = v
            else:
                r.pop(e3, None)
        # the leading term cancels exactly in exact fields; force it for approximate ones
        r.pop(er, None)
    return Poly._raw(a.ctx, q, a.field), None


def exact_divide(a: Poly, b: Poly) -> Poly:
    """The polynomial ``q`` with ``a == b*q``; raises :class:`NotDivisibleError` if none exists."""
    a._check(b)
    q, rem = _divide(a, b)
    if q is None:
        raise NotDivisibleError(f"{b} does not divide {a} (stuck at remainder {rem})")
    if a.field.exact and q * b != a:
        raise NotDivisibleError(f"re-multiplication check failed dividing {a} by {b}")
    return q


def divides(b: Poly, a: Poly) -> bool:
    a._check(b)
    q, _ = _divide(a, b)
    return q is not None


def divide_out_power(g: Poly, name: str):
    """Return ``(mu, g1)`` with ``g == name^mu * g1`` and ``g1`` not divisible by ``name``."""
    if not g._terms:
        raise ValueError("cannot divide a power out of the zero polynomial")
    i = g.ctx.index(name)
    mu = min(e[i] for e in g._terms)
    if mu == 0:
        return 0, g
    out = {e[:i] + (e[i] - mu,) + e[i + 1:]: c for e, c in g._terms.items()}
    return mu, Poly._raw(g.ctx, out, g.field)


# ---------------------------------------------------------------------------
# gcd


def _main_var(a: Poly, b: Poly):
    used = set(a.vars_used()) | set(b.vars_used())
    for n in a.ctx.names:
        if n in used:
            return n
    return None


def _prem(a: Poly, b: Poly, v: str) -> Poly:
    """Pseudo-remainder of ``a`` by ``b`` in the variable ``v``."""
    db = b.degree(v)
    lb = b.coefficients_in(v)[db]
    x = Poly.var(a.ctx, v, a.field)
    r = a
    while r and r.degree(v) >= db:
        dr = r.degree(v)
        lr = r.coefficients_in(v)[dr]
        r = lb * r - lr * x ** (dr - db) * b
    return r


def _content(a: Poly, v: str) -> Poly:
    g = Poly.zero(a.ctx, a.field)
    for c in a.coefficients_in(v).values():
        g = gcd(g, c)
        if g.is_constant():
            break
    return g


def _normalize(a: Poly) -> Poly:
    return a.monic()


def gcd(a: Poly, b: Poly) -> Poly:
    """Greatest common divisor, normalized to have leading coefficient 1.

    Works recursively: content and primitive part in the first variable present,
    then a primitive pseudo-remainder sequence.
    """
    a._check(b)
    if isinstance(a.field, ApproxComplexField):
        raise UnsupportedFieldError("gcd needs an exact field")
    if not a:
        return _normalize(b)
    if not b:
        return _normalize(a)
    if a.is_constant() or b.is_constant():
        return Poly.const(a.ctx, 1, a.field)
    v = _main_var(a, b)
    if a.free_of(v):
        return gcd(a, _content(b, v))
    if b.free_of(v):
        return gcd(_content(a, v), b)
    ca, cb = _content(a, v), _content(b, v)
    pa, pb = _divide(a, ca)[0], _divide(b, cb)[0]
    c = gcd(ca, cb)
    if pa.degree(v) < pb.degree(v):
        pa, pb = pb, pa
    while True:
        r = _prem(pa, pb, v)
        if not r:
            g = pb
            break
        if r.free_of(v):
            g = Poly.const(a.ctx, 1, a.field)
            break
        pa, pb = pb, _divide(r, _content(r, v))[0]
    g = _divide(g, _content(g, v))[0] if not g.is_constant() else g
    return _normalize(c * g)


# ---------------------------------------------------------------------------
# the relation uv = p


def reduce_mod_X(f: Poly, p: Poly, u: str = "u", v: str = "v") -> Poly:
    """Normal form of ``f`` modulo ``uv - p``: no monomial keeps both ``u`` and ``v``.

    ``p`` must not involve ``u`` or ``v``; it is embedded into the context of ``f``.
    """
    ctx = f.ctx
    pp = p.embed(ctx)
    if not pp.free_of(u) or not pp.free_of(v):
        raise ValueError("p must not involve u or v")
    iu, iv = ctx.index(u), ctx.index(v)
    powers = {0: Poly.const(ctx, 1, f.field), 1: pp}
    acc = {}
    for e, c in f._terms.items():
        k = min(e[iu], e[iv])
        if k == 0:
            s = acc.get(e)
            acc[e] = c if s is None else s + c
            continue
        if k not in powers:
            powers[k] = pp ** k
        e0 = list(e)
        e0[iu] -= k
        e0[iv] -= k
        e0 = tuple(e0)
        for e2, c2 in powers[k]._terms.items():
            e3 = _add_exp(e0, e2)
            s = acc.get(e3)
            acc[e3] = c * c2 if s is None else s + c * c2
    return Poly._raw(ctx, {e: c for e, c in acc.items() if c}, f.field)
