"""Genus-level local solvability of the shifted targets.

Two checks decide whether every shifted target 8*p^k*n + c*(p^k-2)^2 is
locally represented: a dyadic divisibility condition on c, and, at each
odd prime q != p, isometry of the coset lattice with the split diagonal
form <1, -1, -d>.  The isometry is decided through Jordan invariants.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

from .arith import factorize, is_prime, jacobi, valuation
from .forms import FormInstance

__all__ = [
    "DiagonalLattice",
    "JordanComponent",
    "LocalVerdict",
    "coset_lattice",
    "diagonal_represents",
    "dyadic_c_condition",
    "genus_check",
    "isometric_to_split",
    "jordan_decompose_odd",
    "reduced_lattice",
]


@dataclass(frozen=True)
class DiagonalLattice:
    """A diagonal ternary lattice, given by its three diagonal entries."""

    entries: tuple[int, int, int]

    @property
    def discriminant(self) -> int:
        d1, d2, d3 = self.entries
        return d1 * d2 * d3


@dataclass(frozen=True)
class JordanComponent:
    """One Jordan block at an odd prime: scale exponent, rank, and the
    quadratic-residue class (+1/-1) of the product of its unit parts."""

    scale: int
    rank: int
    unit_class: int


@dataclass(frozen=True)
class LocalVerdict:
    """Result of the genus check; failing prime and reason on failure."""

    ok: bool
    failing_prime: int | None = None
    reason: str | None = None  # "dyadic_c_condition" | "odd_prime_anisotropy"


def coset_lattice(F: FormInstance) -> DiagonalLattice:
    """The lattice whose shifted coset carries the values of the form."""
    return DiagonalLattice((8 * F.pk * F.a, 8 * F.pk * F.b, 4 * F.pk * F.pk * F.c))


def reduced_lattice(F: FormInstance) -> DiagonalLattice:
    """The rescaled lattice representing the shifted targets directly."""
    return DiagonalLattice((8 * F.pk * F.a, 8 * F.pk * F.b, F.c))


def jordan_decompose_odd(entries: tuple[int, int, int], q: int) -> list[JordanComponent]:
    """Jordan invariants of a diagonal form at an odd prime q.

    Entries sharing a q-adic valuation e form one component of that scale;
    its class is the Legendre symbol of the product of their unit parts.
    """
    if q < 3 or not is_prime(q):
        raise ValueError(f"{q} is not an odd prime")
    by_scale: dict[int, list[int]] = {}
    for d in entries:
        if d == 0:
            raise ValueError("lattice entries must be nonzero")
        e = valuation(d, q)
        by_scale.setdefault(e, []).append(d // q**e)
    out = []
    for e in sorted(by_scale):
        units = by_scale[e]
        prod = 1
        for u in units:
            prod = prod * u % q
        out.append(JordanComponent(scale=e, rank=len(units), unit_class=jacobi(prod, q)))
    return out


def isometric_to_split(entries: tuple[int, int, int], q: int) -> bool:
    """Whether the diagonal form is isometric over Z_q to <1, -1, -d>.

    d is the product of the entries.  When q does not divide d both sides
    are unimodular of rank 3 with equal discriminant, hence isometric;
    otherwise the Jordan invariants must match (scale 0, rank 2, class of
    -1) + (scale nu_q(d), rank 1, class of -d/q^nu_q(d)) exactly.
    """
    d = entries[0] * entries[1] * entries[2]
    e = valuation(d, q)
    if e == 0:
        return True
    expected = [
        JordanComponent(scale=0, rank=2, unit_class=jacobi(q - 1, q)),
        JordanComponent(scale=e, rank=1, unit_class=jacobi(-(d // q**e) % q, q)),
    ]
    return jordan_decompose_odd(entries, q) == expected


def diagonal_represents(entries: tuple[int, int, int], t: int) -> tuple[int, int, int] | None:
    """A representation of t >= 0 by d1*u^2 + d2*v^2 + d3*w^2, or None.

    Entries must be positive, so the search box is finite.  Scanned with
    the smallest entry's variable innermost; the first solution found in
    ascending (|w|, |v|) order is returned with nonnegative coordinates.
    """
    if t < 0:
        raise ValueError(f"target must be nonnegative, got {t}")
    if min(entries) <= 0:
        raise ValueError("entries must be positive for a finite search")
    d1, d2, d3 = entries
    w = 0
    while d3 * w * w <= t:
        rem_w = t - d3 * w * w
        v = 0
        while d2 * v * v <= rem_w:
            rem = rem_w - d2 * v * v
            if rem % d1 == 0:
                u = isqrt(rem // d1)
                if d1 * u * u == rem:
                    return (u, v, w)
            v += 1
        w += 1
    return None


def dyadic_c_condition(F: FormInstance) -> bool:
    """Local condition at 2: either 4 does not divide c, or c is exactly
    divisible by 4 and a*b exactly divisible by 2."""
    if F.nu2_c <= 1:
        return True
    return F.nu2_c == 2 and F.nu2_a + F.nu2_b == 1


def genus_check(F: FormInstance) -> LocalVerdict:
    """Decide whether every shifted target is represented by the genus.

    Fails with the smallest failing prime: 2 for the dyadic condition,
    otherwise the least odd prime q != p dividing a*b*c whose local
    lattice is not split.  Primes away from 2, p and a*b*c need no check:
    there the lattice is unimodular of rank 3 with the split discriminant.
    """
    if not dyadic_c_condition(F):
        return LocalVerdict(ok=False, failing_prime=2, reason="dyadic_c_condition")
    entries = coset_lattice(F).entries
    divisors: set[int] = set()
    for value in (F.a, F.b, F.c):
        divisors.update(factorize(value).primes())
    for q in sorted(divisors):
        if q == 2 or q == F.p:
            continue
        if not isometric_to_split(entries, q):
            return LocalVerdict(ok=False, failing_prime=q, reason="odd_prime_anisotropy")
    return LocalVerdict(ok=True)
