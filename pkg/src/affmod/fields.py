"""Scalar fields for polynomial coefficients.

Rationals are plain :class:`fractions.Fraction` values (always reduced, positive
denominator).  Prime-field elements and approximate complex numbers are small
immutable wrappers so that mixing two different fields raises instead of
silently coercing.
"""

from __future__ import annotations

import cmath
import functools
from fractions import Fraction
from numbers import Rational

from .errors import FieldMismatchError, UnsupportedFieldError

MAX_PRIME = 1 << 16


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


class Field:
    name = "?"
    exact = True

    def __call__(self, value):
        raise NotImplementedError

    @property
    def zero(self):
        return self(0)

    @property
    def one(self):
        return self(1)

    def __repr__(self):
        return self.name


class RationalField(Field):
    name = "Q"

    def __call__(self, value):
        if isinstance(value, Fraction):
            return value
        if isinstance(value, (int, Rational)):
            return Fraction(value)
        if isinstance(value, str):
            return Fraction(value)
        if isinstance(value, (Mod, Approx)):
            raise FieldMismatchError(f"cannot coerce {value!r} into Q")
        raise TypeError(f"cannot coerce {type(value).__name__} into Q")

    def __eq__(self, other):
        return isinstance(other, RationalField)

    def __hash__(self):
        return hash("Q")

    def __reduce__(self):
        return (RationalField, ())


class Mod:
    """Element of the prime field F_q."""

    __slots__ = ("value", "q")

    def __init__(self, value: int, q: int):
        self.q = q
        self.value = value % q

    def _other(self, other):
        if isinstance(other, Mod):
            if other.q != self.q:
                raise FieldMismatchError(f"F_{self.q} vs F_{other.q}")
            return other.value
        if isinstance(other, int):
            return other
        if isinstance(other, Fraction):
            return other.numerator * pow(other.denominator, -1, self.q)
        raise FieldMismatchError(f"cannot combine F_{self.q} with {type(other).__name__}")

    def __add__(self, other):
        return Mod(self.value + self._other(other), self.q)

    __radd__ = __add__

    def __sub__(self, other):
        return Mod(self.value - self._other(other), self.q)

    def __rsub__(self, other):
        return Mod(self._other(other) - self.value, self.q)

    def __mul__(self, other):
        return Mod(self.value * self._other(other), self.q)

    __rmul__ = __mul__

    def __neg__(self):
        return Mod(-self.value, self.q)

    def __pos__(self):
        return self

    def inverse(self):
        if self.value == 0:
            raise ZeroDivisionError("inverse of zero in F_q")
        return Mod(pow(self.value, -1, self.q), self.q)

    def __truediv__(self, other):
        o = self._other(other) % self.q
        if o == 0:
            raise ZeroDivisionError("division by zero in F_q")
        return Mod(self.value * pow(o, -1, self.q), self.q)

    def __rtruediv__(self, other):
        return Mod(self._other(other), self.q) / self

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        return Mod(pow(self.value, n, self.q), self.q)

    def __eq__(self, other):
        if isinstance(other, Mod):
            if other.q != self.q:
                raise FieldMismatchError(f"F_{self.q} vs F_{other.q}")
            return self.value == other.value
        if isinstance(other, int):
            return self.value == other % self.q
        return NotImplemented

    def __hash__(self):
        return hash((self.value, self.q))

    def __bool__(self):
        return self.value != 0

    def __repr__(self):
        return f"Mod({self.value}, {self.q})"

    def __str__(self):
        return str(self.value)


class PrimeField(Field):
    def __init__(self, q: int):
        if not _is_prime(q) or q > MAX_PRIME:
            raise ValueError(f"F_q needs a prime q <= 2^16, got {q}")
        self.q = q
        self.name = f"F{q}"

    def __call__(self, value):
        if isinstance(value, Mod):
            if value.q != self.q:
                raise FieldMismatchError(f"F_{self.q} vs F_{value.q}")
            return value
        if isinstance(value, int):
            return Mod(value, self.q)
        if isinstance(value, (Fraction, str)):
            fr = Fraction(value)
            if fr.denominator % self.q == 0:
                raise ZeroDivisionError(f"denominator of {fr} vanishes mod {self.q}")
            return Mod(fr.numerator * pow(fr.denominator, -1, self.q), self.q)
        raise FieldMismatchError(f"cannot coerce {value!r} into F_{self.q}")

    def __eq__(self, other):
        return isinstance(other, PrimeField) and other.q == self.q

    def __hash__(self):
        return hash(("F", self.q))

    def __reduce__(self):
        return (GF, (self.q,))


@functools.lru_cache(maxsize=None)
def GF(q: int) -> PrimeField:
    return PrimeField(q)


class Approx:
    """Complex number compared with a fixed absolute tolerance."""

    __slots__ = ("z", "eps")

    def __init__(self, z, eps: float):
        self.z = complex(z)
        self.eps = eps

    def _other(self, other):
        if isinstance(other, Approx):
            if other.eps != self.eps:
                raise FieldMismatchError("approximate fields with different tolerances")
            return other.z
        if isinstance(other, (int, float, complex, Fraction)):
            return complex(other)
        raise FieldMismatchError(f"cannot combine C~ with {type(other).__name__}")

    def __add__(self, other):
        return Approx(self.z + self._other(other), self.eps)

    __radd__ = __add__

    def __sub__(self, other):
        return Approx(self.z - self._other(other), self.eps)

    def __rsub__(self, other):
        return Approx(self._other(other) - self.z, self.eps)

    def __mul__(self, other):
        return Approx(self.z * self._other(other), self.eps)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._other(other)
        if abs(o) <= self.eps:
            raise ZeroDivisionError("division by an approximate zero")
        return Approx(self.z / o, self.eps)

    def __rtruediv__(self, other):
        return Approx(self._other(other), self.eps) / self

    def __neg__(self):
        return Approx(-self.z, self.eps)

    def __pos__(self):
        return self

    def __pow__(self, n: int):
        return Approx(self.z ** n, self.eps)

    def __abs__(self):
        return abs(self.z)

    def __bool__(self):
        return abs(self.z) > self.eps

    def __eq__(self, other):
        try:
            return abs(self.z - self._other(other)) <= self.eps
        except FieldMismatchError:
            raise
        except TypeError:
            return NotImplemented

    def __hash__(self):
        # tolerance equality is not transitive; hash coarsely so equal values collide
        return hash("approx")

    def __repr__(self):
        return f"Approx({self.z!r})"

    def __str__(self):
        z = self.z
        if abs(z.imag) <= self.eps:
            return repr(round(z.real, 12))
        return f"({z.real!r}{z.imag:+}j)"

    def sqrt(self):
        return Approx(cmath.sqrt(self.z), self.eps)


class ApproxComplexField(Field):
    exact = False

    def __init__(self, eps: float = 1e-9):
        self.eps = eps
        self.name = "Capprox"

    def __call__(self, value):
        if isinstance(value, Approx):
            return Approx(value.z, self.eps)
        if isinstance(value, Mod):
            raise FieldMismatchError("cannot coerce F_q element into C~")
        if isinstance(value, str):
            return Approx(complex(Fraction(value)), self.eps)
        return Approx(complex(value), self.eps)

    def __eq__(self, other):
        return isinstance(other, ApproxComplexField) and other.eps == self.eps

    def __hash__(self):
        return hash(("C", self.eps))


QQ = RationalField()
CC = ApproxComplexField()


def field_from_spec(spec: str) -> Field:
    """Parse the textual field names used in job files: ``Q``, ``Fq(7)``/``F7``, ``Capprox``."""
    s = spec.strip()
    if s in ("Q", "QQ"):
        return QQ
    if s in ("Capprox", "C", "CC"):
        return CC
    if s.startswith("Fq(") and s.endswith(")"):
        return GF(int(s[3:-1]))
    if s.startswith("F") and s[1:].isdigit():
        return GF(int(s[1:]))
    raise UnsupportedFieldError(f"unknown field {spec!r}")
