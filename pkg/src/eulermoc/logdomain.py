"""Log-abscissa arithmetic, envelope moduli, and bracketed bisection.

A spatial scale x in (0, 1) is represented by its log-abscissa L = -ln x.
This is the only representation that survives the modulus construction,
whose nodes shrink super-exponentially and underflow binary64 after two
steps.  Ordering reverses: larger L means smaller x.

The two envelope functions, both expressed in L:

    f_lower(L) = L**(-gamma)          (power-log modulus)
    f_upper(L) = L**(-gamma) * ln L   (the same with an extra log factor)

f_upper exceeds f_lower for L > e and is strictly decreasing only on the
branch L > exp(1/gamma); every root solve in the construction is restricted
to that branch.  "log" means the natural logarithm everywhere.
"""

import math

from .errors import BracketError, ConvergenceError, DomainError

#: Smallest log-abscissa accepted by construction entry points (ln L >= 1).
L_MIN_ENTRY = math.e

#: Default relative tolerance (in L) for bisection solves.
DEFAULT_REL_TOL = 1e-12

#: Fixed bisection iteration budget.
BISECTION_BUDGET = 80


def check_gamma(gamma):
    """Reject exponents outside the open interval (0, 1)."""
    if not (0.0 < gamma < 1.0):
        raise DomainError(f"gamma must lie strictly in (0, 1), got {gamma}")
    return float(gamma)


def log_abscissa(x):
    """L = -ln x for a direct-space scale x in (0, 1)."""
    if not (0.0 < x < 1.0):
        raise DomainError(f"scale must lie in (0, 1), got {x}")
    return -math.log(x)


def to_direct(L):
    """Map L back to x = exp(-L).

    Returns ``(x, underflowed)``; ``underflowed`` is True (and x is 0.0)
    when L exceeds the binary64 underflow threshold (~745).
    """
    if L <= 0.0:
        raise DomainError(f"log-abscissa must be positive, got {L}")
    x = math.exp(-L) if L < 746.0 else 0.0
    return x, x == 0.0


def f_lower(L, gamma):
    """Lower envelope L**(-gamma); strictly decreasing in L for L > 0."""
    check_gamma(gamma)
    if L <= 0.0:
        raise DomainError(f"f_lower requires L > 0, got {L}")
    return L ** (-gamma)


def f_upper(L, gamma):
    """Upper envelope L**(-gamma) * ln L; requires L > 1 so ln L > 0."""
    check_gamma(gamma)
    if L <= 1.0:
        raise DomainError(f"f_upper requires L > 1, got {L}")
    return L ** (-gamma) * math.log(L)


def upper_branch_start(gamma):
    """L above which f_upper is strictly decreasing: exp(1/gamma)."""
    check_gamma(gamma)
    return math.exp(1.0 / gamma)


def assert_decreasing_branch(L, gamma, context=""):
    """Guard used before every f_upper root solve."""
    knee = upper_branch_start(gamma)
    if L <= knee:
        where = f" ({context})" if context else ""
        raise DomainError(
            f"L = {L} lies on the increasing branch of f_upper "
            f"(needs L > exp(1/gamma) = {knee:.6g}){where}")


def find_root_bracketed(h, lo, hi, rel_tol=DEFAULT_REL_TOL, abs_tol=0.0):
    """Bisection root of ``h`` on [lo, hi]; h(lo) and h(hi) must differ in sign.

    Plain bisection is used deliberately: it is deterministic, needs no
    derivative, and is unaffected by the curvature change of f_upper near
    its branch point.  Terminates when the bracket width falls below
    ``rel_tol`` relative to the abscissa (or below ``abs_tol``), raising
    ConvergenceError if the fixed budget of 80 steps is exhausted first.
    """
    if not lo < hi:
        raise BracketError(f"invalid bracket: lo={lo} >= hi={hi}")
    a, b = float(lo), float(hi)
    fa, fb = h(a), h(b)
    if fa == 0.0:
        return a
    if fb == 0.0:
        return b
    if (fa > 0.0) == (fb > 0.0):
        raise BracketError(
            f"h has the same sign at both ends: h({a})={fa}, h({b})={fb}")
    for _ in range(BISECTION_BUDGET):
        m = 0.5 * (a + b)
        if b - a <= max(abs_tol, rel_tol * max(abs(a), abs(b))):
            return m
        fm = h(m)
        if fm == 0.0:
            return m
        if (fm > 0.0) == (fa > 0.0):
            a, fa = m, fm
        else:
            b, fb = m, fm
    raise ConvergenceError(
        f"bisection did not reach the requested tolerance within "
        f"{BISECTION_BUDGET} steps (bracket [{a}, {b}])")
