"""Principal symbols of the interface operators and their class calculus.

The transmission problem reduces, after flattening the interface, to
ODEs in the normal variable whose characteristic roots drive everything:
``tau`` (the decaying exterior root) and ``eta`` (the decaying interior
root of the screened equation).  The three boundary operators of
interest have principal symbols

    Neumann-to-Dirichlet map .... 1 / eta
    transmission factor ......... 1 - tau / eta
    interface difference ........ 1 / (Re tau - Re eta)   (positive)

Symbol-class membership (uniform bounds by (|xi| + sqrt(lambda))^(m-|a|))
is certified numerically by sampled finite differences, not proved.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import ContractError, DegenerateCovectorError, DomainError
from .geometry import metric_matrix

FD_STEP_SCALE = 1e-4  # finite-difference step is FD_STEP_SCALE * (1 + |arg|)
GROWTH_SLOPE_TOL = 0.15
REFINEMENT_FACTOR_TOL = 1.5


@dataclass(frozen=True)
class SymbolClass:
    """Tag ``S^m_k`` (parameter-free) or ``P^m_k`` (parameter-dependent).

    ``k`` bounds the certified xi-derivative count; None means unrestricted.
    """

    kind: str  # "S" or "P"
    order: float
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ("S", "P"):
            raise ContractError(f"unknown symbol class kind {self.kind!r}")

    def __str__(self):
        k = "inf" if self.k is None else str(self.k)
        return f"{self.kind}({self.order}, {k})"


@dataclass(frozen=True)
class ParamSymbol:
    """A symbol b(x', xi', lambda) with declared order and class tag."""

    eval: Callable[[float, float, float], complex]
    order: float
    class_tag: SymbolClass
    x_support_radius: float = np.inf
    is_one: bool = False

    def __call__(self, xp, xip, lam):
        return self.eval(xp, xip, lam)


def make_symbol(fn, order, kind="P", k=None, x_support_radius=np.inf):
    return ParamSymbol(eval=fn, order=order,
                       class_tag=SymbolClass(kind, order, k),
                       x_support_radius=x_support_radius)


IDENTITY_SYMBOL = ParamSymbol(eval=lambda xp, xip, lam: 1.0 + 0.0j, order=0.0,
                              class_tag=SymbolClass("S", 0.0, None),
                              x_support_radius=0.0, is_one=True)


def _metric_pieces(chart, xp, xip):
    a = metric_matrix(chart, xp)
    xip = np.atleast_1d(np.asarray(xip, dtype=float))
    ann = a[-1, -1]
    cross = float(a[-1, :-1] @ xip)  # = -grad chi . xi'
    return ann, cross, float(xip @ xip)


def characteristic_roots(chart, xp, xip):
    """Roots z_-, z_+ of the frozen-coefficient normal polynomial
    A_nn z^2 + 2 i z (A_n. xi') - |xi'|^2; homogeneous of degree 1 in xi',
    with Re z_- < 0 < Re z_+.
    """
    ann, cross, xi2 = _metric_pieces(chart, xp, xip)
    if xi2 == 0.0:
        raise DegenerateCovectorError("characteristic roots need |xi'| > 0")
    disc = math.sqrt(ann * xi2 - cross * cross)
    z_plus = (disc - 1j * cross) / ann
    z_minus = (-disc - 1j * cross) / ann
    return z_minus, z_plus


def characteristic_roots_screened(chart, xp, xip, lam):
    """Roots omega_-, omega_+ with |xi'|^2 replaced by |xi'|^2 + lambda."""
    ann, cross, xi2 = _metric_pieces(chart, xp, xip)
    if xi2 == 0.0 and lam == 0.0:
        raise DegenerateCovectorError(
            "screened roots need |xi'| + lambda > 0")
    disc = math.sqrt(ann * (xi2 + lam) - cross * cross)
    w_plus = (disc - 1j * cross) / ann
    w_minus = (-disc - 1j * cross) / ann
    return w_minus, w_plus


def tau_symbol(chart, xp, xip):
    """Decaying-exterior characteristic root z_+ (order 1, elliptic).

    Extended by continuity with value 0 at xi' = 0.
    """
    xip_arr = np.atleast_1d(np.asarray(xip, dtype=float))
    if float(xip_arr @ xip_arr) == 0.0:
        return 0.0 + 0.0j
    return characteristic_roots(chart, xp, xip)[1]


def eta_symbol(chart, xp, xip, lam):
    """Decaying-interior screened root omega_- (never vanishes for lam >= 1)."""
    return characteristic_roots_screened(chart, xp, xip, lam)[0]


def ntd_symbol(chart, xp, xip, lam):
    """Principal symbol of the interface Neumann-to-Dirichlet map: 1/eta.

    Order -1; negative real part; |symbol| <= C (|xi'| + sqrt(lam))^{-1}.
    """
    return 1.0 / eta_symbol(chart, xp, xip, lam)


def transmission_symbol(chart, xp, xip, lam):
    """Principal symbol of the boundary coupling factor: 1 - tau/eta.

    Order 0, uniformly bounded away from zero in modulus for lam >= 1.
    The numerator eta - tau is real (the imaginary parts of the two roots
    coincide), so this equals (Re eta - Re tau)/eta.
    """
    eta = eta_symbol(chart, xp, xip, lam)
    tau = tau_symbol(chart, xp, xip)
    return (eta - tau) / eta


def difference_symbol(chart, xp, xip, lam):
    """Positive symbol representing the resolvent difference on the interface:
    1 / (Re tau - Re eta).  Order -1.
    """
    eta = eta_symbol(chart, xp, xip, lam)
    tau = tau_symbol(chart, xp, xip)
    val = 1.0 / (tau.real - eta.real)
    return float(val)


def difference_symbol_expanded(chart, xp, xip, lam):
    """Same symbol written through the metric data, for cross-validation:
    A_nn / (sqrt(A_nn |xi'|^2 - |grad chi . xi'|^2)
            + sqrt(A_nn (|xi'|^2 + lam) - |grad chi . xi'|^2)).
    """
    ann, cross, xi2 = _metric_pieces(chart, xp, xip)
    root_free = math.sqrt(ann * xi2 - cross * cross)
    root_screened = math.sqrt(ann * (xi2 + lam) - cross * cross)
    return ann / (root_free + root_screened)


def flat_ntd_symbol():
    """x-independent Neumann-to-Dirichlet symbol -1/sqrt(xi^2 + lam)."""
    return make_symbol(
        lambda xp, xip, lam: -1.0 / np.sqrt(float(np.dot(
            np.atleast_1d(xip), np.atleast_1d(xip))) + lam),
        order=-1.0, kind="P", k=None, x_support_radius=0.0)


def flat_transmission_symbol():
    return make_symbol(
        lambda xp, xip, lam: 1.0 + np.sqrt(float(np.dot(
            np.atleast_1d(xip), np.atleast_1d(xip)))) / np.sqrt(
                float(np.dot(np.atleast_1d(xip), np.atleast_1d(xip))) + lam),
        order=0.0, kind="P", k=1, x_support_radius=0.0)


# ---------------------------------------------------------------------------
# class membership certification


@dataclass
class MembershipReport:
    order: float
    max_xi_derivative: int
    constants: dict          # (alpha, beta) -> sup of |d^b_x d^a_xi b| / t^(m-a)
    growth_slopes: dict      # (alpha, beta) -> slope of log sup vs log t
    refinement_factors: dict
    passed: bool
    notes: str = ""


def _fd_derivative(fn, x, order, h):
    if order == 0:
        return fn(x)
    if order == 1:
        return (fn(x + h) - fn(x - h)) / (2 * h)
    if order == 2:
        return (fn(x + h) - 2 * fn(x) + fn(x - h)) / (h * h)
    if order == 3:
        return (fn(x + 2 * h) - 2 * fn(x + h) + 2 * fn(x - h)
                - fn(x - 2 * h)) / (2 * h ** 3)
    raise ContractError(f"finite differences only wired up to order 3, got {order}")


def _mixed_derivative(symbol, xp, xi, lam, a_ord, b_ord):
    hx = FD_STEP_SCALE * (1.0 + abs(xp))

    def in_x(x):
        def in_xi(s):
            return symbol(x, s, lam)
        hxi = FD_STEP_SCALE * (1.0 + abs(xi))
        return _fd_derivative(in_xi, xi, a_ord, hxi)

    return _fd_derivative(in_x, xp, b_ord, hx)


def class_membership_estimate(symbol, m, k, xi_range=(1.0, 1e3),
                              lam_range=(1.0, 1e6), n_xi=12, n_lam=13,
                              x_points=(0.0,), max_x_derivative=2):
    """Sampled certification that ``symbol`` obeys the P^m_k derivative bounds.

    Ratios |d^beta_x d^alpha_xi b| / (|xi| + sqrt(lam))^(m - alpha) are
    collected over a log grid; membership requires the per-decade suprema
    to stay flat as |xi| + sqrt(lam) grows (slope <= 0.15 in log-log) and
    to be stable under doubling the sample density.  A symbol declared
    with too small an order shows a positive growth slope and fails.
    """
    def run(n_xi_pts, n_lam_pts):
        xis = np.geomspace(xi_range[0], xi_range[1], n_xi_pts)
        xis = np.concatenate([xis, -xis])
        lams = np.geomspace(lam_range[0], lam_range[1], n_lam_pts)
        sup = {}
        buckets = {}
        for a_ord in range(k + 1):
            for b_ord in range(max_x_derivative + 1):
                key = (a_ord, b_ord)
                sup[key] = 0.0
                buckets[key] = {}
                for xp in x_points:
                    for xi in xis:
                        for lam in lams:
                            t = abs(xi) + math.sqrt(lam)
                            val = _mixed_derivative(symbol, float(xp),
                                                    float(xi), float(lam),
                                                    a_ord, b_ord)
                            ratio = abs(val) / t ** (m - a_ord)
                            sup[key] = max(sup[key], ratio)
                            b_idx = int(math.log10(t) / 0.5)
                            buckets[key][b_idx] = max(
                                buckets[key].get(b_idx, 0.0), ratio)
        return sup, buckets

    sup_coarse, buckets = run(n_xi, n_lam)
    sup_fine, _ = run(2 * n_xi - 1, 2 * n_lam - 1)

    slopes, factors = {}, {}
    passed = True
    notes = []
    for key, per_bucket in buckets.items():
        idx = sorted(per_bucket)
        if len(idx) >= 3:
            ts = np.array([10.0 ** (0.5 * i + 0.25) for i in idx])
            vals = np.array([per_bucket[i] for i in idx])
            keep = vals > 0
            if keep.sum() >= 3:
                slope = np.polyfit(np.log10(ts[keep]), np.log10(vals[keep]), 1)[0]
            else:
                slope = 0.0
        else:
            slope = 0.0
        slopes[key] = float(slope)
        coarse = sup_coarse[key]
        fine = sup_fine[key]
        factors[key] = fine / coarse if coarse > 0 else 1.0
        if not np.isfinite(fine):
            passed = False
            notes.append(f"derivative {key}: non-finite ratio")
        if slope > GROWTH_SLOPE_TOL:
            passed = False
            notes.append(f"derivative {key}: ratio grows like t^{slope:.2f}")
        if factors[key] > REFINEMENT_FACTOR_TOL:
            passed = False
            notes.append(f"derivative {key}: unstable under refinement "
                         f"(factor {factors[key]:.2f})")
    return MembershipReport(order=m, max_xi_derivative=k, constants=sup_fine,
                            growth_slopes=slopes, refinement_factors=factors,
                            passed=passed, notes="; ".join(notes))


def product_symbol(a, b):
    """Pointwise product with the class tag dictated by the product rule:
    S^{m1} x P^{m2} lands in P^{m1+m2}_{[m1]} when m1 >= 0, and in
    S^{m1+m2} when both orders make the parameter-free reading possible.
    Multiplying by the constant-one symbol returns the other factor.
    """
    if a.is_one:
        return b
    if b.is_one:
        return a
    ta, tb = a.class_tag, b.class_tag
    order = ta.order + tb.order

    def cap(*ks):
        finite = [x for x in ks if x is not None]
        return min(finite) if finite else None

    if ta.kind == "S" and tb.kind == "S":
        tag = SymbolClass("S", order, cap(ta.k, tb.k))
    elif ta.kind == "P" and tb.kind == "P":
        tag = SymbolClass("P", order, cap(ta.k, tb.k))
    else:
        s_tag, p_tag = (ta, tb) if ta.kind == "S" else (tb, ta)
        if s_tag.order >= 0:
            tag = SymbolClass("P", order, cap(int(math.floor(s_tag.order)),
                                              s_tag.k, p_tag.k))
        elif p_tag.order <= 0:
            tag = SymbolClass("S", order, cap(s_tag.k, p_tag.k))
        else:
            raise DomainError(
                f"product rule not available for {s_tag} x {p_tag}")

    fa, fb = a.eval, b.eval
    return ParamSymbol(eval=lambda xp, xip, lam: fa(xp, xip, lam) * fb(xp, xip, lam),
                       order=order, class_tag=tag,
                       x_support_radius=min(a.x_support_radius, b.x_support_radius))
