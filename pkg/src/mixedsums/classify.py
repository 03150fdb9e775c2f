"""The decision core: dispatch a form to its hypothesis regime, evaluate
that regime's four conditions, and produce a verdict with a full trace.

A form whose shifted targets fail the local genus check misses a whole
congruence class of values, so it is reported separately as locally
obstructed.  Otherwise the form fails to be almost universal exactly when
all four conditions of its regime hold, in which case the excluded values
fall into the family t*l^2 around the candidate t.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .arith import factorize, in_norm_group_2, is_qr_mod_pk, jacobi, squarefree_part
from .forms import FormInstance, Solution
from .local import LocalVerdict, diagonal_represents, genus_check, reduced_lattice

__all__ = [
    "DispatchCase",
    "SpinorCandidate",
    "TraceEntry",
    "Verdict",
    "VerdictKind",
    "candidate",
    "classify",
    "dispatch",
    "eval_conditions",
]


class DispatchCase(Enum):
    """The six hypothesis regimes, split first on whether the p-adic
    valuations of a and b have matching parity, then on the dyadic data
    (and on p mod 4 when only the p-adic parities differ)."""

    MATCHED_B_DIV4 = "matched-b-div4"  # matching p-parities, 4 | b
    MATCHED_B_EVEN = "matched-b-even"  # matching p-parities, 2 || b
    MATCHED_B_ODD = "matched-b-odd"    # matching p-parities, b odd
    MIXED_P3 = "mixed-p3"              # mixed p-parities, matching 2-parities, p = 3 mod 4
    MIXED_P1 = "mixed-p1"              # mixed p-parities, matching 2-parities, p = 1 mod 4
    MIXED_DYADIC = "mixed-dyadic"      # mixed p-parities, mixed 2-parities


class VerdictKind(Enum):
    ALMOST_UNIVERSAL = "AlmostUniversal"
    NOT_ALMOST_UNIVERSAL = "NotAlmostUniversal"
    LOCALLY_OBSTRUCTED = "LocallyObstructed"


@dataclass(frozen=True)
class SpinorCandidate:
    """The candidate excluded value t and the quadratic field governing
    which multiples t*l^2 stay excluded (E generated by sqrt(field_d))."""

    t: int
    field_d: int
    epsilon: int | None = None  # mixed-dyadic regime only


@dataclass(frozen=True)
class TraceEntry:
    label: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class Verdict:
    """Classification outcome with the per-condition trace attached.

    kind is NotAlmostUniversal iff the genus check passed and every
    condition of the dispatched regime holds; witness_solution is set when
    the final condition failed because the candidate t is represented by
    the rescaled target lattice (its fields are that lattice's coordinates).
    """

    kind: VerdictKind
    case: DispatchCase | None
    local: LocalVerdict
    trace: tuple[TraceEntry, ...]
    candidate: SpinorCandidate | None
    witness_solution: Solution | None


def dispatch(F: FormInstance) -> DispatchCase:
    """Total, single-valued dispatch of a normalized form to its regime."""
    if (F.nup_a - F.nup_b) % 2 == 0:
        if F.nu2_b >= 2:
            return DispatchCase.MATCHED_B_DIV4
        if F.nu2_b == 1:
            return DispatchCase.MATCHED_B_EVEN
        return DispatchCase.MATCHED_B_ODD
    if (F.nu2_a - F.nu2_b) % 2 != 0:
        return DispatchCase.MIXED_DYADIC
    return DispatchCase.MIXED_P3 if F.p % 4 == 3 else DispatchCase.MIXED_P1


def _sf_base(F: FormInstance, case: DispatchCase) -> int:
    """Odd product whose squarefree part seeds the candidate t."""
    base = F.a_odd * F.b_odd * F.c_odd
    if case in (DispatchCase.MIXED_P3, DispatchCase.MIXED_P1, DispatchCase.MIXED_DYADIC):
        base *= F.p
    return base


def candidate(F: FormInstance, case: DispatchCase) -> SpinorCandidate:
    """Candidate excluded value and field for the dispatched regime."""
    sf = squarefree_part(_sf_base(F, case))
    if case in (DispatchCase.MATCHED_B_DIV4, DispatchCase.MATCHED_B_EVEN):
        field = -1 if (F.nu2_a - F.nu2_b) % 2 == 0 else -2
        return SpinorCandidate(t=sf, field_d=field)
    if case is DispatchCase.MATCHED_B_ODD:
        field = -1 if (F.nu2_a - F.nu2_b) % 2 == 0 else -2
        return SpinorCandidate(t=sf << F.nu2_c, field_d=field)
    if case in (DispatchCase.MIXED_P3, DispatchCase.MIXED_P1):
        return SpinorCandidate(t=sf << F.nu2_c, field_d=-F.p)
    eps = 1 if (F.nup_b - F.k) % 2 != 0 else 2
    return SpinorCandidate(t=sf, field_d=-2 * F.p, epsilon=eps)


def _condition_1(F: FormInstance, case: DispatchCase, cand: SpinorCandidate,
                 out: list[TraceEntry]) -> bool:
    """Every prime divisor of the squarefree seed must see field_d as a
    residue (equivalently lie in the right class mod 4 or 8)."""
    sf = squarefree_part(_sf_base(F, case))
    primes = factorize(sf).primes() if sf > 1 else ()
    ok = True
    for q in primes:
        sym = jacobi(cand.field_d, q)
        out.append(TraceEntry(f"1.q{q}", sym == 1,
                              f"symbol({cand.field_d}|{q}) = {sym:+d}"))
        ok = ok and sym == 1
    detail = (f"all prime divisors of {sf} admit {cand.field_d} as a residue"
              if primes else f"squarefree seed is {sf}: nothing to check")
    out.append(TraceEntry("1", ok, detail))
    return ok


def _condition_2(F: FormInstance, case: DispatchCase, cand: SpinorCandidate,
                 out: list[TraceEntry]) -> bool:
    if case in (DispatchCase.MATCHED_B_DIV4, DispatchCase.MATCHED_B_EVEN,
                DispatchCase.MATCHED_B_ODD):
        ok_a = (F.nup_a - F.k) % 2 == 0
        ok_b = (F.nup_b - F.k) % 2 == 0
        out.append(TraceEntry("2.1", ok_a,
                              f"valuation of a at p is {F.nup_a}, parity of k = {F.k}"))
        out.append(TraceEntry("2.2", ok_b,
                              f"valuation of b at p is {F.nup_b}, parity of k = {F.k}"))
        ok = ok_a and ok_b
        out.append(TraceEntry("2", ok, "both valuations at p match k mod 2"
                              if ok else "a valuation at p differs from k mod 2"))
        return ok
    p = F.p
    if case in (DispatchCase.MIXED_P3, DispatchCase.MIXED_P1):
        checks = [
            ("2.1", 2 * F.b_unit * F.c, "2 * b_unit * c"),
            ("2.2", 2 * F.a_unit * F.c, "2 * a_unit * c"),
            ("2.3", F.a_unit * F.b_unit, "a_unit * b_unit"),
        ]
    else:
        eps = cand.epsilon or 2
        checks = [
            ("2.1", 2 * F.a_unit * F.b_unit, "2 * a_unit * b_unit"),
            ("2.2", eps * F.b_unit * F.c, f"eps * b_unit * c (eps = {eps})"),
        ]
    ok = True
    for label, value, name in checks:
        sym = jacobi(value, p)
        out.append(TraceEntry(label, sym == 1, f"symbol({name}|{p}) = {sym:+d}"))
        ok = ok and sym == 1
    out.append(TraceEntry("2", ok, f"residue symbols at p = {p}"
                          + (" all +1" if ok else " not all +1")))
    return ok


def _mod_pow2(shift: int) -> int:
    # 2**(3 - shift) for shift <= 3; collapses to the trivial modulus 1
    # beyond that (only reachable on locally obstructed input).
    return 8 >> min(shift, 3)


def _congruent(x: int, target: int, mod: int) -> bool:
    return x % mod == target % mod


def _condition_3(F: FormInstance, case: DispatchCase, out: list[TraceEntry]) -> bool:
    A, B, C = F.nu2_a, F.nu2_b, F.nu2_c
    p, pk = F.p, F.pk
    ab_odd = F.a_odd * F.b_odd
    bc_odd = F.b_odd * F.c_odd

    if case is DispatchCase.MATCHED_B_DIV4:
        ok1 = _congruent(F.a_odd, F.b_odd, 8)
        out.append(TraceEntry("3.1", ok1, f"odd parts {F.a_odd} and {F.b_odd} mod 8"))
        v = pk * bc_odd
        if (A - B) % 2 != 0:
            ok2 = v % 8 in (1, 3)
            out.append(TraceEntry("3.2", ok2, f"p^k*b_odd*c_odd = {v} is 1 or 3 mod 8"))
        else:
            ok2 = v % 4 == 1
            out.append(TraceEntry("3.2", ok2, f"p^k*b_odd*c_odd = {v} is 1 mod 4"))
        ok = ok1 and ok2
        out.append(TraceEntry("3", ok, "dyadic congruences"))
        return ok

    if case is DispatchCase.MATCHED_B_EVEN:
        ok1 = _congruent(F.a_odd, F.b_odd, 8)
        out.append(TraceEntry("3.1", ok1, f"odd parts {F.a_odd} and {F.b_odd} mod 8"))
        ok2 = (A - B) % 2 == 0
        out.append(TraceEntry("3.2", ok2, f"2-adic valuations {A} and {B} match mod 2"))
        v = pk * bc_odd
        ok3 = v % 4 == 1
        out.append(TraceEntry("3.3", ok3, f"p^k*b_odd*c_odd = {v} is 1 mod 4"))
        ok = ok1 and ok2 and ok3
        out.append(TraceEntry("3", ok, "dyadic congruences"))
        return ok

    if case is DispatchCase.MATCHED_B_ODD:
        ok1 = C <= 1
        detail = f"c = {F.c} not divisible by 4"
        if C == 2:
            detail = ("4 || c passes the local check when 2 || ab, but no "
                      "branch of this condition applies; condition fails")
        out.append(TraceEntry("3.1", ok1, detail))
        mod = _mod_pow2(C)
        ok2 = _congruent(F.a_odd, F.b_odd, mod)
        out.append(TraceEntry("3.2", ok2, f"odd parts {F.a_odd} and {F.b_odd} mod {mod}"))
        ok = ok1 and ok2
        v = pk * bc_odd
        if C == 1:
            ok3 = v % 4 == 1
            out.append(TraceEntry("3.3", ok3, f"p^k*b_odd*c_odd = {v} is 1 mod 4"))
            ok4 = A >= 2 and A % 2 == 0
            out.append(TraceEntry("3.4", ok4, f"2-adic valuation of a is {A}: even and >= 2"))
            ok = ok and ok3 and ok4
        elif C == 0:
            ok3 = v % 8 == 1
            out.append(TraceEntry("3.3", ok3, f"p^k*b_odd*c_odd = {v} is 1 mod 8"))
            ok4 = A >= 3 and A % 2 == 1
            out.append(TraceEntry("3.4", ok4, f"2-adic valuation of a is {A}: odd and >= 3"))
            ok = ok and ok3 and ok4
        out.append(TraceEntry("3", ok, "dyadic congruences and valuation bounds"))
        return ok

    if case is DispatchCase.MIXED_P3:
        mod = _mod_pow2(C)
        v = p * ab_odd
        ok1 = v % mod == 1 % mod
        out.append(TraceEntry("3.1", ok1, f"p*a_odd*b_odd = {v} is 1 mod {mod}"))
        alt_i = p % 8 == 7
        out.append(TraceEntry("3.i", alt_i, f"p = {p} is 7 mod 8"))
        alt_ii = (B - C) % 2 != 0 and A > B
        out.append(TraceEntry("3.ii", alt_ii,
                              f"2-adic valuations: b {B} vs c {C} differ mod 2, a {A} > b {B}"))
        alt_iii = (B - C) % 2 != 0 and A == B and ab_odd % 4 == 3
        out.append(TraceEntry("3.iii", alt_iii,
                              f"b {B} vs c {C} differ mod 2, a {A} = b {B}, "
                              f"a_odd*b_odd = {ab_odd} is 3 mod 4"))
        any_alt = alt_i or alt_ii or alt_iii
        out.append(TraceEntry("3.any", any_alt, "at least one alternative holds"))
        ok = ok1 and any_alt
        out.append(TraceEntry("3", ok, "dyadic congruence and one alternative"))
        return ok

    if case is DispatchCase.MIXED_P1:
        ok1 = C <= 1
        out.append(TraceEntry("3.1", ok1, f"c = {F.c} not divisible by 4"))
        mod = _mod_pow2(C)
        v = p * ab_odd
        ok2 = v % mod == 1 % mod
        out.append(TraceEntry("3.2", ok2, f"p*a_odd*b_odd = {v} is 1 mod {mod}"))
        norm_i = in_norm_group_2(2 ** (1 + B) * bc_odd, -p)
        alt_i = norm_i and A > B >= 2
        out.append(TraceEntry("3.i", alt_i,
                              f"2^(1+{B})*b_odd*c_odd local norm at 2 from sqrt({-p}): "
                              f"{norm_i}; a {A} > b {B} >= 2"))
        alt_ii = bc_odd % 4 == 1 and B in (0, 1) and (C - B) % 2 != 0 and A > B
        out.append(TraceEntry("3.ii", alt_ii,
                              f"b_odd*c_odd = {bc_odd} is 1 mod 4, b valuation {B} in "
                              f"{{0,1}}, c {C} differs mod 2, a {A} > b {B}"))
        if p % 8 == 1:
            res = bc_odd % 4 == 1
            need = "1 mod 4"
        else:
            res = bc_odd % 4 == (2 + (-1) ** B) % 4
            need = f"{(2 + (-1) ** B) % 4} mod 4"
        alt_iii = A == B >= 1 and res
        out.append(TraceEntry("3.iii", alt_iii,
                              f"a {A} = b {B} >= 1 and b_odd*c_odd = {bc_odd} is {need}"))
        any_alt = alt_i or alt_ii or alt_iii
        out.append(TraceEntry("3.any", any_alt, "at least one alternative holds"))
        ok = ok1 and ok2 and any_alt
        out.append(TraceEntry("3", ok, "dyadic congruences and one alternative"))
        return ok

    # mixed-dyadic
    ok1 = C == 0
    out.append(TraceEntry("3.1", ok1, f"c = {F.c} is odd"))
    v = p * ab_odd
    ok2 = v % 8 == 1
    out.append(TraceEntry("3.2", ok2, f"p*a_odd*b_odd = {v} is 1 mod 8"))
    ok3 = B != 1
    out.append(TraceEntry("3.3", ok3, f"2-adic valuation of b is {B}, must not be 1"))
    norm_i = in_norm_group_2(2 ** (1 + B) * pk * bc_odd, -2 * p)
    alt_i = norm_i and A > B >= 2
    out.append(TraceEntry("3.i", alt_i,
                          f"2^(1+{B})*p^k*b_odd*c_odd local norm at 2 from sqrt({-2 * p}): "
                          f"{norm_i}; a {A} > b {B} >= 2"))
    alt_ii = pk * bc_odd % 8 == p % 8 and B == 0 and A >= 3
    out.append(TraceEntry("3.ii", alt_ii,
                          f"p^k*b_odd*c_odd = {pk * bc_odd} is p mod 8, b valuation 0, "
                          f"a valuation {A} >= 3"))
    any_alt = alt_i or alt_ii
    out.append(TraceEntry("3.any", any_alt, "at least one alternative holds"))
    ok = ok1 and ok2 and ok3 and any_alt
    out.append(TraceEntry("3", ok, "dyadic congruences and one alternative"))
    return ok


def _condition_4(F: FormInstance, cand: SpinorCandidate,
                 out: list[TraceEntry]) -> tuple[bool, Solution | None]:
    """t*c^{-1} must be a residue mod p^k (so multiples t*l^2 land among
    the shifted targets) and t must not be represented by the rescaled
    target lattice <8*p^k*a, 8*p^k*b, c>.

    A lattice representation of t scales to one of t*l^2 for every l and
    therefore empties the exception family; conversely a spinor exception
    missed by the lattice stays missed along the inert multiples.
    """
    u = cand.t % F.pk * pow(F.c, -1, F.pk) % F.pk
    ok1 = is_qr_mod_pk(u, F.p, F.k)
    out.append(TraceEntry("4.1", ok1,
                          f"t/c = {u} mod {F.pk} is{'' if ok1 else ' not'} a square"))
    entries = reduced_lattice(F).entries
    rep = diagonal_represents(entries, cand.t)
    ok2 = rep is None
    detail = (f"t = {cand.t} is not represented by {entries}"
              if ok2 else f"t = {cand.t} represented by {entries} at {rep}")
    out.append(TraceEntry("4.2", ok2, detail))
    ok = ok1 and ok2
    out.append(TraceEntry("4", ok, "candidate is an admissible excluded value"
                          if ok else "candidate ruled out"))
    witness = None if rep is None else Solution(x=rep[0], y=rep[1], z=rep[2])
    return ok, witness


def _evaluate(F: FormInstance, case: DispatchCase,
              cand: SpinorCandidate) -> tuple[list[TraceEntry], bool, Solution | None]:
    trace: list[TraceEntry] = []
    ok1 = _condition_1(F, case, cand, trace)
    ok2 = _condition_2(F, case, cand, trace)
    ok3 = _condition_3(F, case, trace)
    ok4, witness = _condition_4(F, cand, trace)
    return trace, ok1 and ok2 and ok3 and ok4, witness


def eval_conditions(F: FormInstance, case: DispatchCase) -> list[TraceEntry]:
    """Evaluate the four conditions of the dispatched regime.

    One labeled entry per atomic congruence or symbol test, one per
    alternative of a disjunction plus the disjunction itself, and one
    summary entry per condition ("1" .. "4").  Assumes the genus check
    already passed.
    """
    trace, _, _ = _evaluate(F, case, candidate(F, case))
    return trace


def conditions_hold(trace: list[TraceEntry] | tuple[TraceEntry, ...]) -> bool:
    """Whether all four summary conditions in a trace passed."""
    summary = {e.label: e.passed for e in trace if e.label in ("1", "2", "3", "4")}
    return len(summary) == 4 and all(summary.values())


def classify(F: FormInstance) -> Verdict:
    """Full classification of a validated form.

    Locally obstructed forms (genus check fails) miss an entire congruence
    class of values; otherwise the verdict is NotAlmostUniversal exactly
    when all four regime conditions hold, else AlmostUniversal.
    """
    lv = genus_check(F)
    if not lv.ok:
        return Verdict(kind=VerdictKind.LOCALLY_OBSTRUCTED, case=None, local=lv,
                       trace=(), candidate=None, witness_solution=None)
    case = dispatch(F)
    cand = candidate(F, case)
    trace, all_hold, witness = _evaluate(F, case, cand)
    kind = (VerdictKind.NOT_ALMOST_UNIVERSAL if all_hold
            else VerdictKind.ALMOST_UNIVERSAL)
    return Verdict(kind=kind, case=case, local=lv, trace=tuple(trace),
                   candidate=cand, witness_solution=witness)
