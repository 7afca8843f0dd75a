"""Scalar abstract domains: booleans, Z4, real intervals and polar complex boxes.

Finite domains use indicator bit patterns (bit ``k`` set iff ``k`` is a
member), so join is bitwise OR and every binary operation is a lookup in a
table precomputed by lifting the concrete operation to sets. Note that XOR of
patterns would be wrong: ``{} + {0}`` must stay ``{}``.

Interval endpoints are widened outward by two ULPs after every floating-point
operation that may have rounded, so containment survives rounding. Results
known to be exact (error-free sums, products with 0 or 1, exp(0)) are kept.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

import numpy as np

INF = math.inf
TWO_PI = 2.0 * math.pi


def _lift_table(size: int, op: Callable[[int, int], int]) -> np.ndarray:
    """Table over indicator codes of ``{op(a, b) : a in A, b in B}``."""
    codes = 1 << size
    table = np.zeros((codes, codes), dtype=np.uint8)
    for ca in range(codes):
        for cb in range(codes):
            out = 0
            for a in range(size):
                if ca >> a & 1:
                    for b in range(size):
                        if cb >> b & 1:
                            out |= 1 << op(a, b)
            table[ca, cb] = out
    table.setflags(write=False)
    return table


BOOL_ADD = _lift_table(2, lambda a, b: (a + b) % 2)
BOOL_MUL = _lift_table(2, lambda a, b: a * b)
Z4_ADD = _lift_table(4, lambda a, b: (a + b) % 4)
Z4_SUB = _lift_table(4, lambda a, b: (a - b) % 4)
Z4_MUL = _lift_table(4, lambda a, b: (a * b) % 4)
# python-level copies for scalar hot loops
_Z4_ADD = Z4_ADD.tolist()
_Z4_SUB = Z4_SUB.tolist()

BOOL_ZERO, BOOL_ONE, BOOL_TOP = 0b01, 0b10, 0b11
# code of {2b : b in B} for a boolean code B
DOUBLE_BOOL = np.array([0b0000, 0b0001, 0b0100, 0b0101], dtype=np.uint8)


def _members(bits: int, size: int) -> tuple[int, ...]:
    return tuple(k for k in range(size) if bits >> k & 1)


def _bits(values: Iterable[int], size: int) -> int:
    out = 0
    for v in values:
        out |= 1 << (int(v) % size)
    return out


@dataclass(frozen=True)
class AbstractBool:
    """Subset of {0, 1} as a 2-bit indicator pattern."""

    bits: int

    @classmethod
    def of(cls, *values: int) -> "AbstractBool":
        return cls(_bits(values, 2))

    def members(self) -> tuple[int, ...]:
        return _members(self.bits, 2)

    def is_bottom(self) -> bool:
        return self.bits == 0

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __contains__(self, v: int) -> bool:
        return bool(self.bits >> v & 1) if v in (0, 1) else False

    def __add__(self, other: "AbstractBool") -> "AbstractBool":
        return AbstractBool(int(BOOL_ADD[self.bits, other.bits]))

    def __mul__(self, other: "AbstractBool") -> "AbstractBool":
        return AbstractBool(int(BOOL_MUL[self.bits, other.bits]))

    def __or__(self, other: "AbstractBool") -> "AbstractBool":
        return AbstractBool(self.bits | other.bits)

    join = __or__

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members())) + "}"


@dataclass(frozen=True)
class AbstractZ4:
    """Subset of Z4 as a 4-bit indicator pattern."""

    bits: int

    @classmethod
    def of(cls, *values: int) -> "AbstractZ4":
        return cls(_bits(values, 4))

    @classmethod
    def embed(cls, b: AbstractBool) -> "AbstractZ4":
        # 0 -> 0 and 1 -> 1 keeps the low two indicator bits as they are
        return cls(b.bits)

    def members(self) -> tuple[int, ...]:
        return _members(self.bits, 4)

    def is_bottom(self) -> bool:
        return self.bits == 0

    def __iter__(self) -> Iterator[int]:
        return iter(self.members())

    def __contains__(self, v: int) -> bool:
        return bool(self.bits >> (v % 4) & 1)

    def __add__(self, other: "AbstractZ4") -> "AbstractZ4":
        return AbstractZ4(_Z4_ADD[self.bits][other.bits])

    def __sub__(self, other: "AbstractZ4") -> "AbstractZ4":
        return AbstractZ4(_Z4_SUB[self.bits][other.bits])

    def __mul__(self, other: "AbstractZ4") -> "AbstractZ4":
        return AbstractZ4(int(Z4_MUL[self.bits, other.bits]))

    def __or__(self, other: "AbstractZ4") -> "AbstractZ4":
        return AbstractZ4(self.bits | other.bits)

    join = __or__

    def __repr__(self) -> str:
        return "{" + ",".join(map(str, self.members())) + "}"


def abool_add(a: AbstractBool, b: AbstractBool) -> AbstractBool:
    return a + b


def abool_mul(a: AbstractBool, b: AbstractBool) -> AbstractBool:
    return a * b


def abool_join(a: AbstractBool, b: AbstractBool) -> AbstractBool:
    return a | b


def az4_add(a: AbstractZ4, b: AbstractZ4) -> AbstractZ4:
    return a + b


def az4_sub(a: AbstractZ4, b: AbstractZ4) -> AbstractZ4:
    return a - b


def az4_mul(a: AbstractZ4, b: AbstractZ4) -> AbstractZ4:
    return a * b


def az4_join(a: AbstractZ4, b: AbstractZ4) -> AbstractZ4:
    return a | b


def embed_bool(b: AbstractBool) -> AbstractZ4:
    return AbstractZ4.embed(b)


def z4_sum_codes(codes: Iterable[int], start: int = 0b0001) -> int:
    """Abstract Z4 sum of a sequence of indicator codes (``start`` defaults to {0})."""
    acc = start
    for c in codes:
        acc = _Z4_ADD[acc][c]
    return acc


# --- intervals ---------------------------------------------------------------


def _down(x: float) -> float:
    return math.nextafter(math.nextafter(x, -INF), -INF)


def _up(x: float) -> float:
    return math.nextafter(math.nextafter(x, INF), INF)


def _add_lo(a: float, b: float) -> float:
    s = a + b
    return -INF if math.isnan(s) else s


def _add_hi(a: float, b: float) -> float:
    s = a + b
    return INF if math.isnan(s) else s


def _mul(a: float, b: float) -> float:
    # endpoint convention 0 * inf = 0
    return 0.0 if a == 0.0 or b == 0.0 else a * b


def _exp(x: float) -> float:
    try:
        return math.exp(x)
    except OverflowError:
        return INF


@dataclass(frozen=True)
class Interval:
    """Closed interval ``[lo, hi]`` over the extended reals; empty when ``lo > hi``."""

    lo: float
    hi: float

    @classmethod
    def point(cls, x: float) -> "Interval":
        return cls(x, x)

    @classmethod
    def bottom(cls) -> "Interval":
        return cls(INF, -INF)

    @classmethod
    def top(cls) -> "Interval":
        return cls(-INF, INF)

    def is_bottom(self) -> bool:
        return not self.lo <= self.hi

    @property
    def width(self) -> float:
        return self.hi - self.lo if not self.is_bottom() else 0.0

    def contains(self, x: float, tol: float = 0.0) -> bool:
        return self.lo - tol <= x <= self.hi + tol

    def widened(self) -> "Interval":
        if self.is_bottom():
            return BOTTOM
        return Interval(_down(self.lo), _up(self.hi))

    def __add__(self, other: "Interval") -> "Interval":
        return interval_add(self, other)

    def __mul__(self, other: "Interval") -> "Interval":
        return interval_mul(self, other)

    def __or__(self, other: "Interval") -> "Interval":
        return interval_join(self, other)

    def __repr__(self) -> str:
        return f"[{self.lo!r}, {self.hi!r}]"


BOTTOM = Interval(INF, -INF)


def _sum_exact(a: float, b: float, s: float) -> bool:
    """Whether ``s = fl(a + b)`` has no rounding error (two-sum test)."""
    if not math.isfinite(s):
        return True
    bb = s - a
    return (a - (s - bb)) + (b - bb) == 0.0


def interval_add(a: Interval, b: Interval) -> Interval:
    if a.is_bottom() or b.is_bottom():
        return BOTTOM
    lo, hi = _add_lo(a.lo, b.lo), _add_hi(a.hi, b.hi)
    return Interval(
        lo if _sum_exact(a.lo, b.lo, lo) else _down(lo),
        hi if _sum_exact(a.hi, b.hi, hi) else _up(hi),
    )


def _mul_exact(a: float, b: float) -> bool:
    return a == 0.0 or b == 0.0 or not (math.isfinite(a) and math.isfinite(b)) or abs(a) == 1.0 or abs(b) == 1.0


def interval_mul(a: Interval, b: Interval) -> Interval:
    if a.is_bottom() or b.is_bottom():
        return BOTTOM
    prods = [(_mul(x, y), _mul_exact(x, y)) for x in (a.lo, a.hi) for y in (b.lo, b.hi)]
    lo, lo_exact = min(prods, key=lambda t: (t[0], not t[1]))
    hi, hi_exact = max(prods, key=lambda t: (t[0], not t[1]))
    return Interval(lo if lo_exact else _down(lo), hi if hi_exact else _up(hi))


def _exp_down(x: float) -> float:
    # exp is exact only at 0 and -inf
    return _exp(x) if x == 0.0 or x == -INF else max(_down(_exp(x)), 0.0)


def _exp_up(x: float) -> float:
    return _exp(x) if x == 0.0 or x == -INF else _up(_exp(x))


def interval_exp(a: Interval) -> Interval:
    if a.is_bottom():
        return BOTTOM
    return Interval(_exp_down(a.lo), _exp_up(a.hi))


def interval_cos(a: Interval) -> Interval:
    if a.is_bottom():
        return BOTTOM
    if not (math.isfinite(a.lo) and math.isfinite(a.hi)) or a.hi - a.lo >= TWO_PI:
        return Interval(-1.0, 1.0)
    lo, hi = INF, -INF
    for x in (a.lo, a.hi):
        c = math.cos(x)
        exact = x == 0.0
        lo = min(lo, c if exact else _down(c))
        hi = max(hi, c if exact else _up(c))
    if TWO_PI * math.ceil(a.lo / TWO_PI) <= a.hi:
        hi = 1.0
    if math.pi + TWO_PI * math.ceil((a.lo - math.pi) / TWO_PI) <= a.hi:
        lo = -1.0
    return Interval(max(lo, -1.0), min(hi, 1.0))


def interval_join(a: Interval, b: Interval) -> Interval:
    if a.is_bottom():
        return b
    if b.is_bottom():
        return a
    return Interval(min(a.lo, b.lo), max(a.hi, b.hi))


# --- complex numbers in log-polar form ----------------------------------------


def _canonical_phase(phase: Interval) -> Interval:
    """Shift by a multiple of 2*pi so the midpoint lies in (-pi, pi]."""
    if phase.is_bottom():
        return phase
    if not (math.isfinite(phase.lo) and math.isfinite(phase.hi)) or phase.hi - phase.lo >= TWO_PI:
        return Interval(_down(-math.pi), _up(math.pi))
    mid = 0.5 * (phase.lo + phase.hi)
    if -math.pi < mid <= math.pi:
        return phase
    k = math.floor((mid + math.pi) / TWO_PI)
    shift = TWO_PI * k
    return Interval(_down(phase.lo - shift), _up(phase.hi - shift))


@dataclass(frozen=True)
class AbstractComplex:
    """The set ``{exp(r + phi*i) : r in log_mag, phi in phase}``.

    Exact zero is ``log_mag = [-inf, -inf]``.
    """

    log_mag: Interval
    phase: Interval

    @classmethod
    def from_complex(cls, z: complex) -> "AbstractComplex":
        if z == 0:
            return ZERO
        r = math.log(abs(z))
        phi = math.atan2(z.imag, z.real)
        return cls(Interval(_down(r), _up(r)), Interval(_down(phi), _up(phi)))

    @classmethod
    def polar(cls, log_mag: tuple[float, float], phase: tuple[float, float]) -> "AbstractComplex":
        return cls(Interval(*log_mag), Interval(*phase))

    def is_zero(self) -> bool:
        return self.log_mag.hi == -INF

    def is_bottom(self) -> bool:
        return self.log_mag.is_bottom() or self.phase.is_bottom()

    def conj(self) -> "AbstractComplex":
        if self.is_zero() or self.is_bottom():
            return self
        return AbstractComplex(self.log_mag, Interval(-self.phase.hi, -self.phase.lo))

    def scale_log(self, delta: float) -> "AbstractComplex":
        """Multiply by the positive real ``exp(delta)``."""
        if self.is_zero() or self.is_bottom():
            return self
        return AbstractComplex(self.log_mag + Interval(_down(delta), _up(delta)), self.phase)

    def contains(self, z: complex, tol: float = 1e-9) -> bool:
        if self.is_bottom():
            return False
        if abs(z) <= tol:
            return self.log_mag.lo == -INF or math.exp(self.log_mag.lo) <= tol
        r = math.log(abs(z))
        if not self.log_mag.contains(r, tol):
            return False
        phi = math.atan2(z.imag, z.real)
        m = math.floor((self.phase.lo - phi) / TWO_PI)
        for k in range(m - 1, m + 3):
            if self.phase.contains(phi + TWO_PI * k, tol):
                return True
        return False

    def __mul__(self, other: "AbstractComplex") -> "AbstractComplex":
        return acomplex_mul(self, other)

    def __or__(self, other: "AbstractComplex") -> "AbstractComplex":
        return acomplex_join(self, other)

    def __repr__(self) -> str:
        if self.is_zero():
            return "0"
        return f"e^({self.log_mag} + {self.phase}i)"


ZERO = AbstractComplex(Interval(-INF, -INF), Interval(0.0, 0.0))
ONE = AbstractComplex(Interval(0.0, 0.0), Interval(0.0, 0.0))
BOTTOM_COMPLEX = AbstractComplex(BOTTOM, BOTTOM)


def acomplex_mul(a: AbstractComplex, b: AbstractComplex) -> AbstractComplex:
    if a.is_bottom() or b.is_bottom():
        return BOTTOM_COMPLEX
    if a.is_zero() or b.is_zero():
        return ZERO
    return AbstractComplex(a.log_mag + b.log_mag, _canonical_phase(a.phase + b.phase))


def acomplex_join(a: AbstractComplex, b: AbstractComplex) -> AbstractComplex:
    if a.is_bottom():
        return b
    if b.is_bottom():
        return a
    # zero has every phase, so joining it only lowers the magnitude bound
    if a.is_zero():
        return AbstractComplex(Interval(-INF, b.log_mag.hi), b.phase)
    if b.is_zero():
        return AbstractComplex(Interval(-INF, a.log_mag.hi), a.phase)
    return AbstractComplex(a.log_mag | b.log_mag, a.phase | b.phase)


def acomplex_re(c: AbstractComplex) -> Interval:
    if c.is_bottom():
        return BOTTOM
    if c.is_zero():
        return Interval(0.0, 0.0)
    return interval_exp(c.log_mag) * interval_cos(c.phase)


_I_POW_BOXES = (
    AbstractComplex(Interval(0.0, 0.0), Interval(0.0, 0.0)),
    AbstractComplex(Interval(0.0, 0.0), Interval(_down(math.pi / 2), _up(math.pi / 2))),
    AbstractComplex(Interval(0.0, 0.0), Interval(_down(math.pi), _up(math.pi))),
    AbstractComplex(Interval(0.0, 0.0), Interval(_down(-math.pi / 2), _up(-math.pi / 2))),
)


def i_pow(residues: AbstractZ4, undefined: bool = False) -> AbstractComplex:
    """Join of ``i^v`` over ``v`` in ``residues``, plus 0 when ``undefined``."""
    out = BOTTOM_COMPLEX
    for v in residues.members():
        out = out | _I_POW_BOXES[v]
    if undefined:
        out = out | ZERO
    return out
