"""The mixed polynomial a*x^2 + b*y^2 + c*P_m(z) with m = p^k + 2.

Holds parameter validation and the derived invariants every later stage
consumes, plus the two brute-force representation oracles: a finite
search for a single target and an exact membership sieve over [0, N].
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, isqrt

from .arith import check_range, is_prime, odd_part, valuation, RangeError

__all__ = [
    "BudgetExceededError",
    "FormError",
    "FormInstance",
    "InvalidExponentError",
    "NonPositiveCoefficientError",
    "NotAnOddPrimeError",
    "NotCoprimeError",
    "PDividesCError",
    "RepresentedSet",
    "Solution",
    "new_form",
    "polygonal",
    "represented_set",
    "represents",
    "shifted_target",
]

MAX_COEFFICIENT = 10**6
MAX_PRIME_POWER = 10**4
MAX_SIEVE_BOUND = 10**8


class FormError(ValueError):
    """A parameter tuple violating one of the form's hypotheses."""


class NonPositiveCoefficientError(FormError):
    pass


class NotCoprimeError(FormError):
    pass


class NotAnOddPrimeError(FormError):
    pass


class InvalidExponentError(FormError):
    pass


class PDividesCError(FormError):
    pass


class BudgetExceededError(RuntimeError):
    """A sieve or search bound beyond the configured resource budget."""


@dataclass(frozen=True)
class FormInstance:
    """Validated parameters (a, b, c, p, k) plus derived invariants.

    Normalized so that nu2_a >= nu2_b; ``swapped`` records whether a and b
    were exchanged to get there.  a_unit and b_unit are the parts of a and
    b coprime to p; a_odd, b_odd, c_odd the odd parts.
    """

    a: int
    b: int
    c: int
    p: int
    k: int
    swapped: bool
    pk: int
    m: int
    nup_a: int
    nup_b: int
    nu2_a: int
    nu2_b: int
    nu2_c: int
    a_odd: int
    b_odd: int
    c_odd: int
    a_unit: int
    b_unit: int

    def evaluate(self, x: int, y: int, z: int) -> int:
        return self.a * x * x + self.b * y * y + self.c * polygonal(self.m, z)

    def label(self) -> str:
        return f"{self.a}*x^2 + {self.b}*y^2 + {self.c}*P_{self.m}(z)"


@dataclass(frozen=True)
class Solution:
    """Integers with a*x^2 + b*y^2 + c*P_m(z) equal to the searched target."""

    x: int
    y: int
    z: int


@dataclass(frozen=True)
class RepresentedSet:
    """Exact membership bitmap over 0..bound: bit n set iff n is a value."""

    bound: int
    bits: int

    def contains(self, n: int) -> bool:
        if not 0 <= n <= self.bound:
            raise ValueError(f"{n} outside [0, {self.bound}]")
        return bool(self.bits >> n & 1)

    def count(self) -> int:
        return self.bits.bit_count()


def new_form(a: int, b: int, c: int, p: int, k: int) -> FormInstance:
    """Validate and normalize (a, b, c, p, k) into a FormInstance.

    Raises a distinct FormError subclass per violated hypothesis, or
    RangeError when a parameter is outside the supported range.
    """
    if a < 1 or b < 1 or c < 1:
        raise NonPositiveCoefficientError(
            f"coefficients must be positive, got a={a} b={b} c={c}")
    if k < 1:
        raise InvalidExponentError(f"exponent k must be positive, got k={k}")
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise NotAnOddPrimeError(f"p must be an odd prime, got p={p}")
    if max(a, b, c) > MAX_COEFFICIENT:
        raise RangeError(f"coefficients are capped at {MAX_COEFFICIENT}")
    pk = p**k
    if pk > MAX_PRIME_POWER:
        raise RangeError(f"p^k = {pk} exceeds the cap {MAX_PRIME_POWER}")
    if c % p == 0:
        raise PDividesCError(f"p divides c (p={p}, c={c})")
    if gcd(gcd(a, b), c) != 1:
        raise NotCoprimeError(f"gcd(a, b, c) must be 1, got ({a}, {b}, {c})")

    swapped = valuation(a, 2) < valuation(b, 2)
    if swapped:
        a, b = b, a
    return FormInstance(
        a=a, b=b, c=c, p=p, k=k, swapped=swapped,
        pk=pk, m=pk + 2,
        nup_a=valuation(a, p), nup_b=valuation(b, p),
        nu2_a=valuation(a, 2), nu2_b=valuation(b, 2), nu2_c=valuation(c, 2),
        a_odd=odd_part(a), b_odd=odd_part(b), c_odd=odd_part(c),
        a_unit=a // p ** valuation(a, p), b_unit=b // p ** valuation(b, p),
    )


def polygonal(m: int, x: int) -> int:
    """The generalized polygonal value ((m-2)*x^2 - (m-4)*x) / 2, x in Z."""
    if m < 3:
        raise ValueError(f"polygonal order must be >= 3, got {m}")
    value = ((m - 2) * x * x - (m - 4) * x) // 2
    check_range(value)
    return value


def shifted_target(F: FormInstance, n: int) -> int:
    """The congruence-shifted target 8*p^k*n + c*(p^k - 2)^2."""
    if n < 0:
        raise ValueError(f"target index must be nonnegative, got {n}")
    value = 8 * F.pk * n + F.c * (F.pk - 2) ** 2
    check_range(value)
    return value


def _z_range(m: int, c: int, limit: int) -> tuple[int, int]:
    """Inclusive z interval with c*P_m(z) <= limit (P grows both ways)."""
    hi = 0
    while c * polygonal(m, hi + 1) <= limit:
        hi += 1
    lo = 0
    while c * polygonal(m, lo - 1) <= limit:
        lo -= 1
    return lo, hi


def represents(F: FormInstance, t: int) -> Solution | None:
    """Search for a solution of F(x, y, z) = t; None when there is none.

    The search box is finite: |x| <= sqrt(t/a), |y| <= sqrt(t/b), and z
    runs over the interval where c*P_m(z) <= t.  Among all solutions the
    lexicographically smallest (|z|, z, |y|, y, |x|, x) is returned.
    """
    if t < 0:
        raise ValueError(f"target must be nonnegative, got {t}")
    if t > MAX_SIEVE_BOUND:
        raise RangeError(f"target {t} exceeds the supported bound {MAX_SIEVE_BOUND}")
    lo, hi = _z_range(F.m, F.c, t)
    zs = sorted(range(lo, hi + 1), key=lambda z: (abs(z), z))
    for z in zs:
        rem = t - F.c * polygonal(F.m, z)
        if rem < 0:
            continue
        yy = 0
        while F.b * yy * yy <= rem:
            r2 = rem - F.b * yy * yy
            if r2 % F.a == 0:
                s2 = r2 // F.a
                s = isqrt(s2)
                if s * s == s2:
                    return Solution(x=-s, y=-yy, z=z)
            yy += 1
    return None


@lru_cache(maxsize=16)
def _square_pair_bits(a: int, b: int, limit: int) -> int:
    """Bitmap of {a*x^2 + b*y^2 <= limit} as a Python int."""
    sa = 0
    x = 0
    while a * x * x <= limit:
        sa |= 1 << (a * x * x)
        x += 1
    out = 0
    yy = 0
    while b * yy * yy <= limit:
        out |= sa << (b * yy * yy)
        yy += 1
    return out & ((1 << (limit + 1)) - 1)


def represented_set(F: FormInstance, N: int, *, budget: int = MAX_SIEVE_BOUND) -> RepresentedSet:
    """Exact membership bitmap of the values of F in [0, N].

    Enumerates z outermost (fewest iterations), then ORs the shifted
    two-square bitmap into the accumulator; exploits the sign symmetry of
    x and y.  Bit-identical regardless of evaluation order.
    """
    if N < 0:
        raise ValueError(f"bound must be nonnegative, got {N}")
    if N > budget:
        raise BudgetExceededError(f"bound {N} exceeds the budget {budget}")
    mask = (1 << (N + 1)) - 1
    pair = _square_pair_bits(F.a, F.b, N)
    lo, hi = _z_range(F.m, F.c, N)
    acc = 0
    for z in range(lo, hi + 1):
        acc |= pair << (F.c * polygonal(F.m, z))
    return RepresentedSet(bound=N, bits=acc & mask)
