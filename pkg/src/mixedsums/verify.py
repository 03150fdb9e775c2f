"""Empirical validation of classifier verdicts against the brute-force
representation oracle.

An audit sieves the represented set up to N, lists the exceptions, and
checks they look the way the verdict predicts: a clear tail for an almost
universal form, exceptions confined to the t*l^2 family for a negative
verdict, and a fully missing congruence class for a local obstruction.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import isqrt

import numpy as np

from .classify import Verdict, VerdictKind
from .forms import (
    MAX_SIEVE_BOUND,
    FormInstance,
    RepresentedSet,
    represented_set,
    shifted_target,
)

__all__ = [
    "DEFAULT_THRESHOLD",
    "ExceptionReport",
    "audit",
    "exceptions_up_to",
    "family_predict",
]

# Exceptions at or below this value are "small": the classification says
# nothing about them, so the audit ignores them when matching the family.
DEFAULT_THRESHOLD = 1000

MAX_PROGRESSION_MODULUS = 10**4


@dataclass(frozen=True)
class ExceptionReport:
    """Outcome of one audit.

    exceptions is the exact complement of the represented set in [0, N];
    family_matches are the exceptions of the shape
    8*p^k*n + c*(p^k-2)^2 = t*l^2; unexplained are exceptions above the
    threshold outside that family.  progression is a (modulus, residue)
    pair whose full class in [0, N] is unrepresented, searched for only on
    locally obstructed verdicts.  problems lists every way the data
    contradicts the verdict; consistent means there were none.
    """

    form: FormInstance
    bound: int
    threshold: int
    exceptions: tuple[int, ...]
    tail_clear: bool
    family_matches: tuple[tuple[int, int], ...]
    unexplained: tuple[int, ...]
    progression: tuple[int, int] | None
    consistent: bool
    problems: tuple[str, ...]


def _bitmap_array(rep: RepresentedSet) -> np.ndarray:
    """Bitmap of a RepresentedSet as a boolean array indexed by n."""
    raw = rep.bits.to_bytes(rep.bound // 8 + 1, "little")
    arr = np.unpackbits(np.frombuffer(raw, dtype=np.uint8), bitorder="little")
    return arr[: rep.bound + 1].astype(bool)


def exceptions_up_to(F: FormInstance, N: int, *,
                     budget: int = MAX_SIEVE_BOUND) -> list[int]:
    """All n in [0, N] not represented by the form, ascending."""
    rep = represented_set(F, N, budget=budget)
    return [int(v) for v in np.flatnonzero(~_bitmap_array(rep))]


def family_predict(F: FormInstance, t: int, N: int) -> list[tuple[int, int]]:
    """All (n, l) with n <= N, l >= 1 and 8*p^k*n + c*(p^k-2)^2 = t*l^2.

    For a candidate produced by the classifier every member has odd l and
    t*l^2 = c*(p^k-2)^2 mod 8*p^k; both are asserted, not assumed.
    """
    if t < 1:
        raise ValueError(f"candidate value must be positive, got {t}")
    step = 8 * F.pk
    base = F.c * (F.pk - 2) ** 2
    out = []
    l = 1
    while t * l * l <= step * N + base:
        v = t * l * l - base
        if v >= 0:
            n, r = divmod(v, step)
            if r == 0:
                if l % 2 == 0 or (t * l * l - base) % (8 * F.pk) != 0:
                    raise RuntimeError(
                        f"family member with even l or broken congruence: l = {l}")
                out.append((n, l))
        l += 1
    return out


def _find_progression(F: FormInstance, arr: np.ndarray,
                      failing_prime: int) -> tuple[int, int] | None:
    """A (modulus, residue) class of n fully unrepresented in [0, N].

    Modulus 8 witnesses a dyadic failure (a class missing mod 4 shows up
    as two missing classes mod 8); q^2 witnesses a failure at odd q.
    """
    modulus = 8 if failing_prime == 2 else failing_prime * failing_prime
    if modulus > MAX_PROGRESSION_MODULUS or modulus >= arr.size:
        return None
    for r in range(modulus):
        cls = arr[r::modulus]
        if cls.size and not cls.any():
            return (modulus, r)
    return None


def audit(F: FormInstance, verdict: Verdict, N: int, *,
          threshold: int = DEFAULT_THRESHOLD,
          budget: int = MAX_SIEVE_BOUND) -> ExceptionReport:
    """Test a verdict (as returned by classify(F)) against the oracle.

    NotAlmostUniversal: the exceptions must keep appearing (some in
    (N/2, N]), every one above the threshold must lie in the t*l^2 family,
    and at least one family member must actually be an exception whenever
    any exists below the bound.  AlmostUniversal: the tail (N/2, N] must
    be clear.  LocallyObstructed: a fully missing congruence class must
    exist.  Any violation is recorded as a problem, not raised.
    """
    rep = represented_set(F, N, budget=budget)
    arr = _bitmap_array(rep)
    exceptions = tuple(int(v) for v in np.flatnonzero(~arr))
    tail_clear = not any(n > N // 2 for n in exceptions)

    problems: list[str] = []
    family_matches: tuple[tuple[int, int], ...] = ()
    unexplained: tuple[int, ...] = ()
    progression: tuple[int, int] | None = None

    if verdict.kind is VerdictKind.NOT_ALMOST_UNIVERSAL:
        t = verdict.candidate.t
        fam: list[tuple[int, int]] = []
        unex: list[int] = []
        for n in exceptions:
            target = shifted_target(F, n)
            if target % t == 0:
                s2 = target // t
                s = isqrt(s2)
                if s * s == s2:
                    fam.append((n, s))
                    continue
            if n > threshold:
                unex.append(n)
        family_matches = tuple(fam)
        unexplained = tuple(unex)
        if tail_clear:
            problems.append(
                f"verdict predicts infinitely many exceptions but none lie in "
                f"({N // 2}, {N}]")
        if unexplained:
            problems.append(
                f"{len(unexplained)} exceptions above {threshold} outside the "
                f"t*l^2 family (first: {unexplained[0]})")
        if not family_matches and family_predict(F, t, N):
            problems.append(
                "family members exist below the bound but none is an exception")
    elif verdict.kind is VerdictKind.ALMOST_UNIVERSAL:
        if not tail_clear:
            bad = [n for n in exceptions if n > N // 2]
            problems.append(
                f"{len(bad)} exceptions in ({N // 2}, {N}] for an almost "
                f"universal verdict (first: {bad[0]})")
    else:
        progression = _find_progression(F, arr, verdict.local.failing_prime)
        if progression is None:
            problems.append(
                "no fully missing congruence class found for the local obstruction")

    return ExceptionReport(
        form=F, bound=N, threshold=threshold, exceptions=exceptions,
        tail_clear=tail_clear, family_matches=family_matches,
        unexplained=unexplained, progression=progression,
        consistent=not problems, problems=tuple(problems),
    )
