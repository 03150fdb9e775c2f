"""Exact integer arithmetic: valuations, factorization, primality,
quadratic-residue symbols, and the 2-adic Hilbert symbol.

Every operation is pure integer arithmetic (no floating point, no
probabilistic answers inside the supported range) so results can be
trusted as oracles by the rest of the package.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd, isqrt

__all__ = [
    "Factorization",
    "FactorizationError",
    "RangeError",
    "factorize",
    "hilbert2",
    "in_norm_group_2",
    "is_prime",
    "is_qr_mod_pk",
    "jacobi",
    "odd_part",
    "squarefree_part",
    "splits_in",
    "valuation",
]

# Inputs and every intermediate product they generate must fit in signed
# 128-bit arithmetic; anything larger is rejected, never silently wrong.
INT128_MAX = 2**127 - 1

# Strong-pseudoprime bases giving a deterministic answer for all
# n < 3_317_044_064_679_887_385_961_981 (Sorenson-Webster bound).
_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_MR_PROVEN_BOUND = 3_317_044_064_679_887_385_961_981

_TRIAL_LIMIT = 10**6


class RangeError(ValueError):
    """Input or intermediate value outside the supported integer range."""


class FactorizationError(RuntimeError):
    """Cycle-finding budget exhausted; raised instead of a wrong answer."""


def check_range(*values: int) -> None:
    """Reject any value that does not fit in signed 128-bit arithmetic."""
    for v in values:
        if not -INT128_MAX <= v <= INT128_MAX:
            raise RangeError(f"value {v} exceeds the supported 128-bit range")


def valuation(n: int, q: int) -> int:
    """Largest e with q**e dividing n, for n != 0 and prime q."""
    if n == 0:
        raise ValueError("valuation of 0 is undefined")
    if not is_prime(q):
        raise ValueError(f"valuation base {q} is not prime")
    n = abs(n)
    if q == 2:
        return (n & -n).bit_length() - 1
    e = 0
    while n % q == 0:
        n //= q
        e += 1
    return e


def odd_part(n: int) -> int:
    """n with every factor of 2 removed; sign is preserved."""
    if n == 0:
        raise ValueError("odd part of 0 is undefined")
    return n >> ((abs(n) & -abs(n)).bit_length() - 1)


@dataclass(frozen=True)
class Factorization:
    """Complete prime factorization: sign * prod(prime**exponent)."""

    sign: int
    factors: tuple[tuple[int, int], ...]  # (prime, exponent), primes ascending

    def value(self) -> int:
        out = self.sign
        for p, e in self.factors:
            out *= p**e
        return out

    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)


def is_prime(n: int) -> bool:
    """Deterministic primality test, exact for all n below ~3.3e24."""
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    if n >= _MR_PROVEN_BOUND:
        raise RangeError(f"{n} is beyond the proven deterministic bound")
    d = n - 1
    s = (d & -d).bit_length() - 1
    d >>= s
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def _brent_rho(n: int, c: int, max_steps: int = 1 << 22) -> int | None:
    """One Brent cycle-finding attempt on x -> x^2 + c mod n.

    Returns a nontrivial factor, or None once the step budget is spent.
    """
    y, r, q = 2, 1, 1
    g = 1
    steps = 0
    x = ys = y
    while g == 1:
        x = y
        for _ in range(r):
            y = (y * y + c) % n
        k = 0
        while k < r and g == 1:
            ys = y
            for _ in range(min(128, r - k)):
                y = (y * y + c) % n
                q = q * abs(x - y) % n
            g = gcd(q, n)
            k += 128
        steps += r
        if steps > max_steps:
            return None
        r *= 2
    if g == n:
        g = 1
        while g == 1:
            ys = (ys * ys + c) % n
            g = gcd(abs(x - ys), n)
    return g if g != n else None


def _split_composite(n: int) -> int:
    """Some nontrivial factor of an odd composite n with no small divisors."""
    r = isqrt(n)
    if r * r == n:
        return r
    for c in range(1, 64):
        g = _brent_rho(n, c)
        if g is not None and 1 < g < n:
            return g
    raise FactorizationError(f"failed to split {n} within the step budget")


def factorize(n: int) -> Factorization:
    """Complete prime factorization of n, |n| >= 1; deterministic."""
    if n == 0:
        raise ValueError("cannot factorize 0")
    check_range(n)
    sign = -1 if n < 0 else 1
    m = abs(n)
    found: dict[int, int] = {}
    if m > 1:
        e = (m & -m).bit_length() - 1
        if e:
            found[2] = e
            m >>= e
    d = 3
    while d * d <= m and d <= _TRIAL_LIMIT:
        if m % d == 0:
            e = 0
            while m % d == 0:
                m //= d
                e += 1
            found[d] = e
        d += 2
    # Anything left is either prime or has only factors above the trial
    # limit; split it recursively.
    stack = [m] if m > 1 else []
    while stack:
        v = stack.pop()
        if is_prime(v):
            found[v] = found.get(v, 0) + 1
            continue
        g = _split_composite(v)
        stack.append(g)
        stack.append(v // g)
    return Factorization(sign, tuple(sorted(found.items())))


def squarefree_part(n: int) -> int:
    """The unique squarefree d with n = d * s**2, s > 0; sign follows n."""
    if n == 0:
        raise ValueError("squarefree part of 0 is undefined")
    fac = factorize(n)
    out = fac.sign
    for p, e in fac.factors:
        if e % 2:
            out *= p
    return out


def jacobi(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n >= 1; 0 iff gcd(a, n) > 1."""
    if n <= 0 or n % 2 == 0:
        raise ValueError(f"Jacobi symbol needs a positive odd modulus, got {n}")
    a %= n
    result = 1
    while a != 0:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def _two_adic_parts(n: int) -> tuple[int, int]:
    """(e, u) with n = u * 2**e and u odd; u keeps the sign of n."""
    e = (abs(n) & -abs(n)).bit_length() - 1
    return e, n >> e


def hilbert2(x: int, y: int) -> int:
    """Hilbert symbol (x, y) over the 2-adic numbers, from square classes.

    +1 iff z^2 = x*u^2 + y*v^2 has a nontrivial 2-adic solution.  Depends
    only on the square classes of x and y (valuation parity and odd part
    mod 8), so integer representatives suffice for rational arguments.
    """
    if x == 0 or y == 0:
        raise ValueError("Hilbert symbol is undefined at 0")
    a, u = _two_adic_parts(x)
    b, v = _two_adic_parts(y)
    eps_u = 0 if u % 4 == 1 else 1
    eps_v = 0 if v % 4 == 1 else 1
    omega_u = 0 if u % 8 in (1, 7) else 1
    omega_v = 0 if v % 8 in (1, 7) else 1
    exponent = eps_u * eps_v + a * omega_v + b * omega_u
    return -1 if exponent % 2 else 1


def in_norm_group_2(x: int, d: int) -> bool:
    """Whether x is a local norm at 2 from the quadratic field of sqrt(d).

    d must be squarefree and != 1; membership is hilbert2(x, d) == +1.
    """
    if x == 0:
        raise ValueError("norm-group membership is undefined at 0")
    if d == 1 or d == 0 or squarefree_part(d) != d:
        raise ValueError(f"field generator must be squarefree and != 1, got {d}")
    return hilbert2(x, d) == 1


def is_qr_mod_pk(u: int, p: int, k: int) -> bool:
    """Whether x^2 = u (mod p**k) is solvable, for odd prime p and p∤u.

    For a unit u this reduces to the Legendre symbol at p (Hensel lifting
    carries a solution mod p to every higher power).
    """
    if p < 3 or not is_prime(p):
        raise ValueError(f"modulus base {p} is not an odd prime")
    if k < 1:
        raise ValueError(f"exponent must be positive, got {k}")
    if u % p == 0:
        raise ValueError(f"{u} is not a unit modulo {p}; reduce first")
    return jacobi(u % p, p) == 1


def splits_in(q: int, d: int) -> str:
    """Behavior of an odd unramified prime q in the quadratic field of sqrt(d).

    Returns "split" or "inert".  The squarefree d is normalized to the
    fundamental discriminant (d itself if d = 1 mod 4, else 4d) before the
    residue test; q | d is rejected as ramified.
    """
    if q < 3 or not is_prime(q):
        raise ValueError(f"{q} is not an odd prime")
    if d == 1 or d == 0 or squarefree_part(d) != d:
        raise ValueError(f"field generator must be squarefree and != 1, got {d}")
    if d % q == 0:
        raise ValueError(f"{q} is ramified in Q(sqrt({d}))")
    disc = d if d % 4 == 1 else 4 * d
    return "split" if jacobi(disc % q, q) == 1 else "inert"
