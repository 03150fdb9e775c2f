"""Decide whether a*x^2 + b*y^2 + c*P_{p^k+2}(z) represents all but
finitely many positive integers, and validate every verdict with a
brute-force representation oracle."""

from .arith import (
    Factorization,
    FactorizationError,
    RangeError,
    factorize,
    hilbert2,
    in_norm_group_2,
    is_prime,
    is_qr_mod_pk,
    jacobi,
    odd_part,
    squarefree_part,
    splits_in,
    valuation,
)
from .classify import (
    DispatchCase,
    SpinorCandidate,
    TraceEntry,
    Verdict,
    VerdictKind,
    candidate,
    classify,
    dispatch,
    eval_conditions,
)
from .forms import (
    BudgetExceededError,
    FormError,
    FormInstance,
    RepresentedSet,
    Solution,
    new_form,
    polygonal,
    represented_set,
    represents,
    shifted_target,
)
from .local import (
    DiagonalLattice,
    JordanComponent,
    LocalVerdict,
    dyadic_c_condition,
    genus_check,
    isometric_to_split,
    jordan_decompose_odd,
)
from .verify import ExceptionReport, audit, exceptions_up_to, family_predict

__version__ = "0.1.0"
