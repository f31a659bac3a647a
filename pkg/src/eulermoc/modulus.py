"""Iterative construction of the alternating-envelope concave modulus.

The modulus G is built on a node sequence L_0 < L_1 < ... (log-abscissas of
scales x_n = exp(-L_n)) that alternates between the two envelopes:

    even n:  G_n = f_upper(L_n)     (touching the upper envelope)
    odd  n:  G_n = f_lower(L_n)     (touching the lower envelope)

Even -> odd advances by the scale recurrence

    lam * x_{n+1} * |ln x_{n+1}|**(1-gamma) = x_n
    <=>  L_{n+1} - (1-gamma) ln L_{n+1} = L_n - ln lam,

(odd, even) -> next even places the node at the intersection of the
x-space chord through the previous two nodes with the upper envelope.
Between nodes G is linear in x; beyond the last node it continues on the
straight line to the origin.  All arithmetic is done in L; the chord and
interpolation formulas below are algebraically exact rewrites whose
exponents never exceed 0, so they underflow gracefully instead of
overflowing.

Representation note: L roughly squares every two steps, while the
even -> odd gap stays near (1-gamma) ln L.  Beyond L ~ 1e16 that gap drops
below one ulp of L, so a single float cannot keep the pair distinct.  Odd
nodes therefore carry their recurrence offset (L_n - L_{n-1}) as a separate
exactly-solved float, and every gap-sensitive formula (chord denominator,
pair margins, segment slopes, near-node evaluation) consumes the offset
rather than differencing collapsed abscissas.  Envelope values are immune:
a sub-ulp change of L moves them by far less than one ulp of G.

Two geometric properties are re-verified at every step (margins reported):

    property 1:  G_{n-1} * x_n / x_{n-1} < G_n
                 (the line from node n-1 to the origin passes under node n)
    property 2:  (G_{n-1} - G_n) / (x_{n-1}/x_n - 1) < G_n
                 (chord slope under the node-to-origin slope, in x_n units)

Together they keep G concave, increasing, and vanishing at zero, and they
guarantee the next chord/envelope intersection exists.
"""

import math
from bisect import bisect_right
from dataclasses import dataclass

from .errors import (BracketError, ConvergenceError, DomainError,
                     NumericalError, PropertyViolationError, ValidationError)
from .logdomain import (BISECTION_BUDGET, DEFAULT_REL_TOL, L_MIN_ENTRY,
                        assert_decreasing_branch, check_gamma, f_lower,
                        f_upper, find_root_bracketed, to_direct)
from .report import CheckReport

TOUCH_UPPER = "upper"
TOUCH_LOWER = "lower"

#: Hard cap on construction length; keeps L below the binary64 overflow.
N_MAX_CAP = 200

#: Largest log-abscissa the construction will produce.
L_OVERFLOW = 1e300

#: Relative tolerance for the three-node collinearity check (composes two
#: solves, hence looser than the 1e-12 root tolerance).
COLLINEARITY_RTOL = 1e-9

#: Relative tolerance for node-on-envelope verification.
ALTERNATION_RTOL = 1e-10

#: eval() snaps abscissas within this relative distance below L_0 onto L_0
#: (transported abscissas reproduce L_{n-1} only up to solver tolerance).
EVAL_SNAP_RTOL = 1e-9


@dataclass(frozen=True)
class ModulusNode:
    """One construction node.

    ``gap_prev`` is the exact offset L_n - L_{n-1}; for odd nodes it is the
    solved recurrence offset (meaningful even when adding it to L_{n-1}
    does not change the float), for even nodes a plain difference, and NaN
    for the starting node.
    """

    index: int
    L: float
    G: float
    touch: str
    gap_prev: float = float("nan")


@dataclass
class PiecewiseModulus:
    """Node sequence plus interpolation rule; immutable after construction."""

    gamma: float
    lam: float
    nodes: list
    tail_policy: str = "line_to_origin"

    @property
    def L0(self):
        return self.nodes[0].L

    @property
    def L_last(self):
        return self.nodes[-1].L

    def gap(self, n):
        """True abscissa offset L_n - L_{n-1} (offset-aware)."""
        if not 1 <= n < len(self.nodes):
            raise ValidationError(f"gap index {n} out of range")
        g = self.nodes[n].gap_prev
        if math.isfinite(g):
            return g
        return self.nodes[n].L - self.nodes[n - 1].L

    def eval(self, L):
        """G at log-abscissa L (scales at or below x_0 only).

        Linear interpolation in x between nodes; beyond the last node the
        line-to-origin tail gives G_last * x / x_last.  Float inputs cannot
        resolve sub-ulp segments (see the module note); use
        ``eval_at_offset`` to evaluate relative to a node.
        """
        nodes = self.nodes
        L = float(L)
        if L < nodes[0].L:
            if nodes[0].L - L <= EVAL_SNAP_RTOL * nodes[0].L:
                return nodes[0].G
            raise DomainError(
                f"L = {L} is above the constructed domain (L_0 = {nodes[0].L})")
        Ls = [nd.L for nd in nodes]
        k = bisect_right(Ls, L) - 1
        if L == Ls[k]:
            return nodes[k].G
        if k == len(nodes) - 1:
            return nodes[-1].G * math.exp(nodes[-1].L - L)
        return eval_on_segment(self, k, L - nodes[k].L)


def eval_on_segment(m, k, s):
    """G at abscissa L_k + s with 0 <= s <= gap(k+1), in offset form.

    Exact at the endpoints; safe for sub-ulp segments because only offsets
    enter the interpolation weights.
    """
    a, b = m.nodes[k], m.nodes[k + 1]
    gap = m.gap(k + 1)
    if s <= 0.0:
        return a.G
    if s >= gap:
        return b.G
    q = math.exp(-gap)
    t = (math.exp(-s) - q) / (1.0 - q)
    return b.G + (a.G - b.G) * t


def eval_at_offset(m, k, s):
    """G at abscissa L_k + s, anchored at node k (offset form).

    Walks across as many segments as the offset spans, so the result stays
    exact even where segments are narrower than one ulp of L.  Raises if
    the abscissa leaves the constructed domain on the large-scale side.
    """
    if not 0 <= k < len(m.nodes):
        raise ValidationError(f"node index {k} out of range")
    while s > 0.0 and k < len(m.nodes) - 1:
        gap = m.gap(k + 1)
        if s <= gap:
            return eval_on_segment(m, k, s)
        s -= gap
        k += 1
    if s > 0.0:
        return m.nodes[-1].G * math.exp(-s)
    while s < 0.0 and k > 0:
        gap = m.gap(k)
        if -s <= gap:
            return eval_on_segment(m, k - 1, gap + s)
        s += gap
        k -= 1
    if s < -EVAL_SNAP_RTOL * m.nodes[0].L:
        raise DomainError(f"offset leaves the constructed domain by {-s}")
    return m.nodes[k].G


def recurrence_residual(L_next, L_n, gamma, lam):
    """Residual of the scale recurrence at a candidate L_next.

    Zero when lam * x_next * |ln x_next|**(1-gamma) = x_n, i.e.
    L_next - (1-gamma) ln L_next = L_n + ln lam.
    """
    return L_next - (1.0 - gamma) * math.log(L_next) - (L_n + math.log(lam))


def _recurrence_offset(L_n, gamma, lam, rel_tol):
    """Solve the recurrence for the offset d = L_{n+1} - L_n.

    The offset form d = ln lam + (1-gamma) ln(L_n + d) is solved by
    bisection; it stays fully conditioned when d is far below one ulp of
    L_n (ln(L_n + d) is evaluated through log1p).
    """
    log_lam = math.log(lam)

    def psi(d):
        return d - (1.0 - gamma) * (math.log(L_n) + math.log1p(d / L_n)) - log_lam

    width = (1.0 - gamma) * math.log(10.0 * (L_n + abs(log_lam) + 10.0))
    lo, hi = log_lam, log_lam + width
    for _ in range(60):
        if psi(lo) <= 0.0 <= psi(hi):
            return find_root_bracketed(psi, lo, hi, rel_tol)
        width *= 2.0
        hi = log_lam + width
    raise BracketError(
        f"could not bracket the recurrence offset from L_n = {L_n}")


def solve_recurrence(L_n, gamma, lam, rel_tol=DEFAULT_REL_TOL):
    """Advance an even node's abscissa to the next odd one.

    Solves L' - (1-gamma) ln L' = L_n + ln lam; the root exceeds L_n
    whenever lam >= 1, and for lam < 1 the start must sit deep enough
    that the offset ln lam + (1-gamma) ln L' stays positive.  (Beyond
    L ~ 1e16 the returned float collapses onto L_n; construction keeps
    the exact offset separately.)
    """
    check_gamma(gamma)
    if lam <= 0.0:
        raise DomainError(f"lam must be positive, got {lam}")
    if L_n < L_MIN_ENTRY:
        raise DomainError(f"recurrence requires L_n >= e, got {L_n}")
    if L_n + math.log(lam) <= 1.0:
        raise DomainError(
            f"L_n + ln(lam) = {L_n + math.log(lam)} <= 1; scale sequence "
            f"would leave (0, 1)")
    return L_n + _recurrence_offset(L_n, gamma, lam, rel_tol)


def chord_value(node_a, node_b, L, gap_ab=None):
    """x-space chord through two nodes, evaluated at log-abscissa L >= node_b.L.

    Overflow-safe form: the only positive exponent is the node gap, which
    stays well below the binary64 limit.  Pass ``gap_ab`` when the true
    gap is not recoverable from the stored abscissas.
    """
    if gap_ab is None:
        gap_ab = node_b.L - node_a.L
    num = math.expm1(-(L - node_b.L))
    den = math.expm1(gap_ab)
    return node_b.G + (node_a.G - node_b.G) * num / den


def chord_intercept(node_a, node_b, gap_ab=None):
    """Chord value in the x -> 0 limit (its intercept at the origin side)."""
    if gap_ab is None:
        gap_ab = node_b.L - node_a.L
    return node_b.G - (node_a.G - node_b.G) / math.expm1(gap_ab)


def _pair_margins(node_a, node_b, gap_ab=None):
    """(property-1 margin, property-2 margin) for an (even, odd) node pair."""
    if gap_ab is None:
        gap_ab = node_b.L - node_a.L
    if gap_ab <= 0.0:
        return float("-inf"), float("-inf")
    p1 = node_b.G - node_a.G * math.exp(-gap_ab)
    p2 = node_b.G - (node_a.G - node_b.G) / math.expm1(gap_ab)
    return p1, p2


def solve_chord_intersection(node_a, node_b, gamma, rel_tol=DEFAULT_REL_TOL,
                             gap_ab=None):
    """Abscissa where the chord through (node_a, node_b) meets f_upper again.

    node_a is the even (upper-envelope) node, node_b the following odd
    (lower-envelope) one.  Property 1 is checked first; it guarantees the
    intersection exists on the decreasing branch beyond node_b.  The solve
    runs in mu = ln L so arbitrarily large jumps stay bracketable; the
    lower end needs no evaluation because chord(L_b) = G_b < f_upper(L_b)
    holds identically.
    """
    check_gamma(gamma)
    if gap_ab is None:
        gap_ab = node_b.L - node_a.L
    if gap_ab <= 0.0:
        raise ValidationError(
            f"chord endpoints must be ordered and distinct "
            f"(gap {gap_ab} between nodes {node_a.index},{node_b.index})")
    p1, _ = _pair_margins(node_a, node_b, gap_ab)
    if p1 <= 0.0:
        raise PropertyViolationError(
            f"property 1 fails for nodes {node_a.index},{node_b.index} "
            f"(margin {p1}); chord/envelope intersection not guaranteed",
            step=node_b.index)
    assert_decreasing_branch(node_b.L, gamma, "chord intersection start")

    def h_mu(mu):
        L = math.exp(mu)
        return chord_value(node_a, node_b, L, gap_ab) - f_upper(L, gamma)

    lo = math.log(node_b.L)  # h < 0 here identically; never evaluated
    hi = math.log(L_OVERFLOW)
    if not h_mu(hi) > 0.0:
        raise BracketError(
            f"no chord/envelope crossing below L = {L_OVERFLOW:g} "
            f"(nodes {node_a.index},{node_b.index})")
    # solve essentially to machine precision: later slope checks divide
    # envelope-value errors by node drops that can be ~1e-7 relative, so
    # the requested rel_tol only caps, never loosens, the stop width
    tol = min(rel_tol, 4.0 * 2.220446049250313e-16)
    for _ in range(BISECTION_BUDGET):
        mid = 0.5 * (lo + hi)
        if hi - lo <= max(tol, 2.0 * math.ulp(mid)):
            return math.exp(mid)
        if h_mu(mid) > 0.0:
            hi = mid
        else:
            lo = mid
    raise ConvergenceError(
        f"chord intersection did not converge (bracket [{lo}, {hi}] in ln L)")


def validate_entry(gamma, lam, L0):
    """Reject starting points too coarse for the construction to proceed."""
    check_gamma(gamma)
    if lam <= 0.0:
        raise DomainError(f"lam must be positive, got {lam}")
    L_entry = L_MIN_ENTRY + max(0.0, math.log(1.0 / lam))
    if L0 < L_entry:
        raise ValidationError(
            f"L_0 = {L0} below entry threshold {L_entry:.6g} "
            f"(need ln L_0 >= 1 and room for the lam rescale)")
    knee = math.exp(1.0 / gamma)
    if L0 <= knee:
        raise ValidationError(
            f"L_0 = {L0} not beyond the upper envelope's decreasing branch "
            f"(needs L_0 > exp(1/gamma) = {knee:.6g})")
    if f_upper(L0, gamma) >= 1.0:
        raise ValidationError(
            f"f_upper(L_0) = {f_upper(L0, gamma):.6g} >= 1; pick a smaller "
            f"starting scale")


def construct(gamma, lam, L0, n_max, rel_tol=DEFAULT_REL_TOL):
    """Build the modulus with nodes n = 0..n_max.

    Even nodes touch the upper envelope, odd nodes the lower one.  Both
    geometric properties are re-verified after every odd node; a violation
    aborts with the failing step index.
    """
    if not isinstance(n_max, int) or n_max < 0:
        raise ValidationError(f"n_max must be a nonnegative integer, got {n_max}")
    if n_max > N_MAX_CAP:
        raise ValidationError(
            f"n_max = {n_max} exceeds the cap {N_MAX_CAP} (log-abscissas "
            f"would overflow binary64)")
    validate_entry(gamma, lam, L0)

    nodes = [ModulusNode(0, float(L0), f_upper(L0, gamma), TOUCH_UPPER)]
    for n in range(1, n_max + 1):
        if n % 2 == 1:
            d = _recurrence_offset(nodes[-1].L, gamma, lam, rel_tol)
            if d <= 0.0:
                raise NumericalError(
                    f"nonpositive recurrence offset {d} at step {n} "
                    f"(lam too large for this scale)")
            L = nodes[-1].L + d
            node = ModulusNode(n, L, f_lower(L, gamma), TOUCH_LOWER, d)
            p1, p2 = _pair_margins(nodes[-1], node, d)
            if p1 <= 0.0:
                raise PropertyViolationError(
                    f"property 1 violated at step {n} (margin {p1})", step=n)
            if p2 <= 0.0:
                raise PropertyViolationError(
                    f"property 2 violated at step {n} (margin {p2})", step=n)
        else:
            L = solve_chord_intersection(nodes[-2], nodes[-1], gamma, rel_tol,
                                         gap_ab=nodes[-1].gap_prev)
            if L <= nodes[-1].L:
                raise NumericalError(
                    f"chord intersection did not advance at step {n}")
            node = ModulusNode(n, L, f_upper(L, gamma), TOUCH_UPPER,
                               L - nodes[-1].L)
        if L >= L_OVERFLOW:
            raise NumericalError(
                f"log-abscissa overflow at step {n} (L = {L:g}); reduce n_max")
        nodes.append(node)
    return PiecewiseModulus(gamma=float(gamma), lam=float(lam), nodes=nodes)


def check_property1(m):
    """Line-to-origin from each even node passes under the next odd node."""
    rep = CheckReport("property-1")
    odd = [nd for nd in m.nodes if nd.index % 2 == 1]
    if not odd:
        rep.notes.append("fewer than 2 nodes: vacuous pass")
        return rep
    for nd in odd:
        gap = m.gap(nd.index)
        if gap <= 0.0:
            rep.add(nd.index, False, float("-inf"), "degenerate node pair")
            continue
        p1, _ = _pair_margins(m.nodes[nd.index - 1], nd, gap)
        rep.add(nd.index, p1 > 0.0, p1)
    return rep


def check_property2(m):
    """Chord slope stays under the odd node's line-to-origin slope."""
    rep = CheckReport("property-2")
    odd = [nd for nd in m.nodes if nd.index % 2 == 1]
    if not odd:
        rep.notes.append("fewer than 2 nodes: vacuous pass")
        return rep
    for nd in odd:
        gap = m.gap(nd.index)
        if gap <= 0.0:
            rep.add(nd.index, False, float("-inf"), "degenerate node pair")
            continue
        _, p2 = _pair_margins(m.nodes[nd.index - 1], nd, gap)
        rep.add(nd.index, p2 > 0.0, p2)
    return rep


def G_drop(m, n):
    """G_{n-1} - G_n, switching to a cancellation-free form when needed.

    Across a recurrence step (odd n) the drop is of order G itself and
    plain subtraction is reliable.  Across a chord step (even n) the true
    drop can sit below one ulp of G; when subtraction cannot resolve it,
    it is recovered from the chord geometry,

        G_{n-1} - chord(L_n)
            = drop_{n-1} * (1 - exp(-gap_n)) / expm1(gap_{n-1}),

    valid because nodes n-2, n-1, n are collinear (which the separate
    collinearity check verifies at a coarser tolerance than the switch
    threshold here, so an inconsistent table cannot slip through).
    """
    if not 1 <= n < len(m.nodes):
        raise ValidationError(f"segment index {n} out of range")
    direct = m.nodes[n - 1].G - m.nodes[n].G
    if n % 2 == 1 or n == 1 or abs(direct) > 1e-6 * m.nodes[n - 1].G:
        return direct
    prev_drop = G_drop(m, n - 1)
    return (prev_drop * (-math.expm1(-m.gap(n)))
            / math.expm1(m.gap(n - 1)))


def _log_slope_step(m, n):
    """ln(slope of segment n) - ln(slope of segment n-1), offset form.

    Segment n joins nodes n-1 and n; its x-space slope is
    G_drop_n / (x_{n-1} - x_n) with x_{n-1} - x_n = exp(-L_{n-1}) (1 -
    exp(-gap_n)).  Differencing in offsets keeps the result meaningful at
    depths where abscissas and envelope values collapse in binary64.
    """
    d_now, d_prev = G_drop(m, n), G_drop(m, n - 1)
    if d_now <= 0.0 or d_prev <= 0.0:
        return None
    return (math.log(d_now / d_prev) + m.gap(n - 1)
            - math.log(math.expm1(-m.gap(n)) / math.expm1(-m.gap(n - 1))))


def check_concavity(m):
    """Segment slopes non-decreasing in n; G decreasing; L increasing."""
    rep = CheckReport("concavity")
    nodes = m.nodes
    if len(nodes) < 3:
        rep.notes.append("fewer than 3 nodes: vacuous pass")
        return rep
    for i in range(1, len(nodes)):
        rep.add(nodes[i].index, m.gap(i) > 0.0, m.gap(i), "L increasing")
        d = G_drop(m, i)
        rep.add(nodes[i].index, d > 0.0, d, "G decreasing")
    for i in range(2, len(nodes)):
        step = _log_slope_step(m, i)
        if step is None:
            rep.add(nodes[i].index, False, float("-inf"), "non-increasing G")
            return rep
        rep.add(nodes[i].index, step >= -COLLINEARITY_RTOL, step,
                "slope non-decreasing toward smaller x")
    return rep


def check_alternation(m):
    """Touch flags alternate and node values sit on their envelopes."""
    rep = CheckReport("alternation")
    for nd in m.nodes:
        expect = TOUCH_UPPER if nd.index % 2 == 0 else TOUCH_LOWER
        env = f_upper(nd.L, m.gamma) if expect == TOUCH_UPPER else f_lower(nd.L, m.gamma)
        ok = nd.touch == expect and abs(nd.G - env) <= ALTERNATION_RTOL * env
        rep.add(nd.index, ok, env - abs(nd.G - env), f"touch={nd.touch}")
    return rep


def check_collinearity(m):
    """Every even node n >= 2 sits on the extended chord of nodes n-2, n-1."""
    rep = CheckReport("collinearity")
    evens = [nd for nd in m.nodes if nd.index % 2 == 0 and nd.index >= 2]
    if not evens:
        rep.notes.append("no even nodes >= 2: vacuous pass")
        return rep
    for nd in evens:
        a, b = m.nodes[nd.index - 2], m.nodes[nd.index - 1]
        c = chord_value(a, b, nd.L, gap_ab=m.gap(nd.index - 1))
        err = abs(c - nd.G) / nd.G
        rep.add(nd.index, err <= COLLINEARITY_RTOL, COLLINEARITY_RTOL - err,
                f"rel dev {err:.3e}")
    return rep


def transported_offset(m, n):
    """L_n minus the transported abscissa of odd node n, in offset form.

    The transport L -> L - ln lam - ln G(L) - ln L evaluated at an odd
    node has offset ln lam + ln G_n + ln L_n, which the recurrence makes
    equal to the node gap: the transported scale is exactly x_{n-1}.
    """
    nd = m.nodes[n]
    return math.log(m.lam) + math.log(nd.G) + math.log(nd.L)


def transported_log_abscissa(m, n):
    """Float abscissa of the transported scale at odd node n (display form)."""
    return m.nodes[n].L - transported_offset(m, n)


def ratio_at_node(m, n):
    """(ratio, bound) of the loss mechanism at odd node n.

    ratio = G(transported scale)/G_n; the transported offset is verified
    against the node gap (they agree to roundoff by construction) and the
    evaluation is anchored at node n-1 so sub-ulp segments stay exact.
    bound = (ln L_n)/2.  Returned, not asserted: callers decide whether a
    bound miss is fatal, and raw ratios are always reported alongside.
    """
    if n % 2 != 1 or n < 1:
        raise ValidationError(f"ratio is defined at odd nodes only, got n = {n}")
    if n >= len(m.nodes):
        raise ValidationError(f"node index {n} out of range ({len(m.nodes)} nodes)")
    nd = m.nodes[n]
    mismatch = transported_offset(m, n) - m.gap(n)
    G_transported = eval_at_offset(m, n - 1, -mismatch)
    ratio = G_transported / nd.G
    bound = 0.5 * math.log(nd.L)
    return ratio, bound


def transport_identity_error(m, n):
    """|transported abscissa - L_{n-1}| relative to L_{n-1}, at odd node n."""
    return abs(transported_offset(m, n) - m.gap(n)) / m.nodes[n - 1].L


def predicted_ratio_at_node(m, n, lam_eff):
    """Model ratio at odd node n under an effective rescale lam_eff.

    The transported abscissa sits ln(lam/lam_eff) past node n-1 (minus the
    roundoff-level transport mismatch); evaluation is anchored there so the
    result is meaningful at every node depth.
    """
    if lam_eff <= 0.0:
        raise DomainError(f"lam_eff must be positive, got {lam_eff}")
    if n % 2 != 1 or not 1 <= n < len(m.nodes):
        raise ValidationError(f"need an odd node index in range, got {n}")
    mismatch = transported_offset(m, n) - m.gap(n)
    s = math.log(m.lam / lam_eff) - mismatch
    return eval_at_offset(m, n - 1, s) / m.nodes[n].G


def check_divergence(m):
    """Loss ratios at odd nodes meet the half-log-log bound and grow."""
    rep = CheckReport("divergence")
    odd = [nd.index for nd in m.nodes if nd.index % 2 == 1]
    if not odd:
        rep.notes.append("no odd nodes: vacuous pass")
        return rep
    prev_bound = None
    for n in odd:
        ratio, bound = ratio_at_node(m, n)
        rep.add(n, ratio >= bound, ratio - bound,
                f"ratio={ratio:.6g} bound={bound:.6g}")
        if prev_bound is not None:
            rep.add(n, bound > prev_bound, bound - prev_bound,
                    "bound increasing along odd nodes")
        prev_bound = bound
    return rep


def node_rows(m):
    """Serializable per-node records (with direct-space x when representable)."""
    p1 = {e.index: e.margin for e in check_property1(m).entries}
    p2 = {e.index: e.margin for e in check_property2(m).entries}
    rows = []
    for nd in m.nodes:
        x, under = to_direct(nd.L)
        rows.append({
            "index": nd.index,
            "L": nd.L,
            "G": nd.G,
            "touch": nd.touch,
            "gap_prev": nd.gap_prev,
            "x": x,
            "underflowed": int(under),
            "p1_margin": p1.get(nd.index, float("nan")),
            "p2_margin": p2.get(nd.index, float("nan")),
        })
    return rows
