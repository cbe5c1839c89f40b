"""Exact arithmetic in Q(sqrt 5) and 3-vectors over it.

Every incidence and congruence decision in the package goes through these
types, so comparisons are exact rather than tolerance-based.
"""

from __future__ import annotations

from fractions import Fraction
from typing import NamedTuple, Union

Rational = Union[int, Fraction]


class FieldElement:
    """``a + b*sqrt(5)`` with rational ``a`` and ``b``.

    ``Fraction`` keeps both parts reduced with a positive denominator, so
    the representation is unique and hashing by ``(a, b)`` is sound.
    Comparison operators order by value; use :attr:`lex_key` when a cheap
    structural ordering is enough.
    """

    __slots__ = ("a", "b")

    def __init__(self, a: Rational = 0, b: Rational = 0):
        self.a = Fraction(a)
        self.b = Fraction(b)

    @classmethod
    def coerce(cls, x) -> "FieldElement":
        if isinstance(x, FieldElement):
            return x
        if isinstance(x, (int, Fraction)):
            return cls(x, 0)
        raise TypeError(f"cannot coerce {type(x).__name__} to FieldElement")

    def __repr__(self) -> str:
        return f"FieldElement({self.a}, {self.b})"

    def __str__(self) -> str:
        if self.b == 0:
            return str(self.a)
        if self.a == 0:
            return f"{self.b}*sqrt5"
        sign = "+" if self.b > 0 else "-"
        return f"{self.a} {sign} {abs(self.b)}*sqrt5"

    @property
    def lex_key(self) -> tuple[Fraction, Fraction]:
        return (self.a, self.b)

    def __hash__(self) -> int:
        return hash((self.a, self.b))

    def __eq__(self, other) -> bool:
        try:
            other = FieldElement.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __add__(self, other) -> "FieldElement":
        other = FieldElement.coerce(other)
        return FieldElement(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other) -> "FieldElement":
        other = FieldElement.coerce(other)
        return FieldElement(self.a - other.a, self.b - other.b)

    def __rsub__(self, other) -> "FieldElement":
        return FieldElement.coerce(other) - self

    def __neg__(self) -> "FieldElement":
        return FieldElement(-self.a, -self.b)

    def __mul__(self, other) -> "FieldElement":
        other = FieldElement.coerce(other)
        a, b, c, d = self.a, self.b, other.a, other.b
        return FieldElement(a * c + 5 * b * d, a * d + b * c)

    __rmul__ = __mul__

    def conjugate(self) -> "FieldElement":
        return FieldElement(self.a, -self.b)

    def norm(self) -> Fraction:
        """Field norm ``a^2 - 5 b^2``; zero only for the zero element."""
        return self.a * self.a - 5 * self.b * self.b

    def inverse(self) -> "FieldElement":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("inverse of zero in Q(sqrt5)")
        return FieldElement(self.a / n, -self.b / n)

    def __truediv__(self, other) -> "FieldElement":
        return self * FieldElement.coerce(other).inverse()

    def __rtruediv__(self, other) -> "FieldElement":
        return FieldElement.coerce(other) * self.inverse()

    def sign(self) -> int:
        return sign(self)

    def __bool__(self) -> bool:
        return bool(self.a) or bool(self.b)

    def __lt__(self, other) -> bool:
        return sign(self - other) < 0

    def __le__(self, other) -> bool:
        return sign(self - other) <= 0

    def __gt__(self, other) -> bool:
        return sign(self - other) > 0

    def __ge__(self, other) -> bool:
        return sign(self - other) >= 0

    def __float__(self) -> float:
        return float(self.a) + float(self.b) * SQRT5_FLOAT


SQRT5_FLOAT = 5 ** 0.5


def sign(u: FieldElement) -> int:
    """Exact sign of ``a + b*sqrt5``."""
    sa = (u.a > 0) - (u.a < 0)
    sb = (u.b > 0) - (u.b < 0)
    if sb == 0:
        return sa
    if sa == 0 or sa == sb:
        return sb
    # opposite signs: the term with the larger square wins
    lhs = u.a * u.a
    rhs = 5 * u.b * u.b
    if lhs > rhs:
        return sa
    if lhs < rhs:
        return sb
    return 0  # unreachable for rational a, b since sqrt5 is irrational


def add(u: FieldElement, v: FieldElement) -> FieldElement:
    return u + v


def sub(u: FieldElement, v: FieldElement) -> FieldElement:
    return u - v


def mul(u: FieldElement, v: FieldElement) -> FieldElement:
    return u * v


def div(u: FieldElement, v: FieldElement) -> FieldElement:
    return u / v


def neg(u: FieldElement) -> FieldElement:
    return -u


ZERO = FieldElement(0)
ONE = FieldElement(1)
SQRT5 = FieldElement(0, 1)
PHI = FieldElement(Fraction(1, 2), Fraction(1, 2))
PHI_INV = PHI - 1


class FieldVec3(NamedTuple):
    x: FieldElement
    y: FieldElement
    z: FieldElement

    @classmethod
    def of(cls, x, y, z) -> "FieldVec3":
        c = FieldElement.coerce
        return cls(c(x), c(y), c(z))

    def __add__(self, other: "FieldVec3") -> "FieldVec3":  # type: ignore[override]
        return FieldVec3(self.x + other.x, self.y + other.y, self.z + other.z)

    def __sub__(self, other: "FieldVec3") -> "FieldVec3":
        return sub_vec(self, other)

    def __neg__(self) -> "FieldVec3":
        return FieldVec3(-self.x, -self.y, -self.z)

    def scale(self, s) -> "FieldVec3":
        return FieldVec3(self.x * s, self.y * s, self.z * s)

    def is_zero(self) -> bool:
        return not (self.x or self.y or self.z)

    def to_floats(self) -> tuple[float, float, float]:
        return (float(self.x), float(self.y), float(self.z))


def dot(u: FieldVec3, v: FieldVec3) -> FieldElement:
    return u.x * v.x + u.y * v.y + u.z * v.z


def cross(u: FieldVec3, v: FieldVec3) -> FieldVec3:
    return FieldVec3(
        u.y * v.z - u.z * v.y,
        u.z * v.x - u.x * v.z,
        u.x * v.y - u.y * v.x,
    )


def sub_vec(u: FieldVec3, v: FieldVec3) -> FieldVec3:
    return FieldVec3(u.x - v.x, u.y - v.y, u.z - v.z)


def norm2(u: FieldVec3) -> FieldElement:
    return dot(u, u)


def dist2(u: FieldVec3, v: FieldVec3) -> FieldElement:
    d = sub_vec(u, v)
    return dot(d, d)


Matrix3 = tuple[tuple[FieldElement, ...], ...]


def det3(m: Matrix3) -> FieldElement:
    return (
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    )


def inv3(m: Matrix3) -> Matrix3:
    d = det3(m)
    if not d:
        raise ZeroDivisionError("singular 3x3 matrix")
    inv_d = d.inverse()
    cof = [[ZERO] * 3 for _ in range(3)]
    for i in range(3):
        for j in range(3):
            r = [k for k in range(3) if k != i]
            c = [k for k in range(3) if k != j]
            minor = m[r[0]][c[0]] * m[r[1]][c[1]] - m[r[0]][c[1]] * m[r[1]][c[0]]
            cof[i][j] = minor if (i + j) % 2 == 0 else -minor
    # adjugate is the transposed cofactor matrix
    return tuple(tuple(cof[j][i] * inv_d for j in range(3)) for i in range(3))


def matmul3(a: Matrix3, b: Matrix3) -> Matrix3:
    return tuple(
        tuple(sum((a[i][k] * b[k][j] for k in range(3)), ZERO) for j in range(3))
        for i in range(3)
    )


def transpose3(m: Matrix3) -> Matrix3:
    return tuple(tuple(m[j][i] for j in range(3)) for i in range(3))


def matvec3(m: Matrix3, v: FieldVec3) -> FieldVec3:
    return FieldVec3(*(m[i][0] * v.x + m[i][1] * v.y + m[i][2] * v.z for i in range(3)))


def columns3(c0: FieldVec3, c1: FieldVec3, c2: FieldVec3) -> Matrix3:
    return tuple((c0[i], c1[i], c2[i]) for i in range(3))


IDENTITY3: Matrix3 = tuple(tuple(ONE if i == j else ZERO for j in range(3)) for i in range(3))
