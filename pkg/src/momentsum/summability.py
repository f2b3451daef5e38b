"""Moment Borel transform, growth and radius estimates, Gevrey kernels and Laplace sums.

The kernel family is ``e(x) = k x^k exp(-x^k)`` with moments
``m_e(p) = Gamma(1 + p/k)`` and ``E(z) = sum z^p / m_e(p)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Sequence

import mpmath
import numpy as np
from mpmath import mp

from ._numeric import as_fraction, default_prec, eps, to_mp
from .errors import (
    DegenerateFit,
    DirectionOutOfDomain,
    DomainGuard,
    InsufficientTerms,
    MomentSumError,
    QuadratureBudget,
    RamifiedKernelRequired,
)
from .sequences import GammaMoment, SequenceHandle, assoc_M_and_omega
from .series import TSeries, moment_deriv, norm_rtilde

__all__ = [
    "KernelSpec",
    "moment_borel",
    "borel_commutation_gap",
    "radius_estimate",
    "RadiusEstimate",
    "growth_fit",
    "GrowthFit",
    "mittag_leffler",
    "laplace_sum",
    "LaplaceResult",
    "kernel_moment_quad",
    "series_function",
    "summability_report",
    "SummabilityReport",
    "GROWTH_TOL",
]

GROWTH_TOL = 0.05


@dataclass(frozen=True)
class KernelSpec:
    """Gevrey-type kernel of order ``k``."""

    k: Fraction
    prec: int = field(default_factory=default_prec)

    def __init__(self, k, prec: int | None = None):
        k = as_fraction(k)
        if k <= 0:
            raise ValueError("kernel order must be positive")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "prec", prec or default_prec())

    @property
    def kf(self) -> mpmath.mpf:
        with mp.workprec(self.prec):
            return mpmath.mpf(self.k.numerator) / self.k.denominator

    def moments(self) -> GammaMoment:
        """``m_e`` as a sequence handle."""
        return GammaMoment(self.k, self.prec)

    def m_e(self, lam):
        with mp.workprec(self.prec):
            return mpmath.gamma(1 + to_mp(lam, self.prec) / self.kf)

    def e(self, x):
        with mp.workprec(self.prec):
            x = mpmath.mpmathify(x)
            xk = x ** self.kf
            return self.kf * xk * mpmath.exp(-xk)

    def E(self, z):
        return mittag_leffler(1 / self.k, z, prec=self.prec)

    def omega_bar(self) -> Fraction:
        """Growth index of ``m_e``; unramified kernels need it below 2."""
        return 1 / self.k


def moment_borel(u: TSeries, m_e: SequenceHandle) -> TSeries:
    """Divide the t-coefficient of order ``p`` by ``m_e(p)``."""
    exact = u.exact and m_e.exact
    src = u if exact else u.inexact()
    rows = []
    for p, row in enumerate(src.coeffs):
        if exact:
            rows.append(row.scale(1 / Fraction(m_e(p))))
        else:
            with mp.workprec(src.prec):
                rows.append(row.scale(1 / m_e.mp(p)))
    return TSeries(rows, u.t_valid)


def borel_commutation_gap(u: TSeries, m_e: SequenceHandle, m_e_sq: SequenceHandle):
    """Largest gap between ``B(d_{m_e,t} u)`` and ``d_{m_e^2,t} B(u)``; both transforms use ``m_e``."""
    lhs = moment_borel(moment_deriv(u, m_e, "t", 1), m_e)
    rhs = moment_deriv(moment_borel(u, m_e), m_e_sq, "t", 1)
    prec = u.prec
    with mp.workprec(prec):
        gap = mpmath.mpf(0)
        for n in range(min(lhs.t_valid, rhs.t_valid) + 1):
            a, b = lhs[n], rhs[n]
            for j in range(min(a.valid, b.valid) + 1):
                d = a[j] - b[j]
                if d:
                    gap = max(gap, abs(to_mp(d, prec)))
    return gap


# -- growth ----------------------------------------------------------------------


@dataclass(frozen=True)
class RadiusEstimate:
    radius: float          # 0.0 or math.inf in the super-geometric cases
    regime: str            # "geometric", "super_geometric_growth", "super_geometric_decay"
    window: tuple
    log_slope: float       # slope of log(c_p)/p against log p over the window


def _row_norms(series, rt) -> list:
    if isinstance(series, TSeries):
        prec = series.prec
        with mp.workprec(prec):
            return [norm_rtilde(series[p], rt) for p in range(series.t_valid + 1)]
    return list(series)


def radius_estimate(series, rt=Fraction(1, 4), *, min_terms: int = 12,
                    window: tuple | None = None) -> RadiusEstimate:
    """Cauchy-Hadamard radius of ``sum_p ||c_p||_rt t^p`` from a tail window.

    ``y_p = log(c_p)/p`` is extrapolated to ``p = oo`` by a fit in ``(1, 1/p,
    log(p)/p)``, which absorbs the polynomial prefactor of geometric growth
    (``binom(2p, p) ~ 4^p / sqrt(pi p)``). A slope of ``y_p`` against ``log p``
    beyond 1/4 in absolute value flags super-geometric growth (radius 0) or
    decay (radius infinity).
    """
    norms = _row_norms(series, rt)
    pts = [(p, float(mpmath.log(c))) for p, c in enumerate(norms) if p >= 1 and c > 0]
    if len(pts) < min_terms:
        raise InsufficientTerms(f"need {min_terms} nonzero coefficients, got {len(pts)}")
    if window is None:
        lo = pts[len(pts) // 3][0]
        hi = pts[-1][0]
    else:
        lo, hi = window
    tail = [(p, lc) for p, lc in pts if lo <= p <= hi]
    if len(tail) < 4:
        raise InsufficientTerms("window holds fewer than four coefficients")
    p = np.array([t[0] for t in tail], dtype=float)
    y = np.array([t[1] for t in tail]) / p
    slope = float(np.polyfit(np.log(p), y, 1)[0])
    if slope > 0.25:
        return RadiusEstimate(0.0, "super_geometric_growth", (lo, hi), slope)
    if slope < -0.25:
        return RadiusEstimate(math.inf, "super_geometric_decay", (lo, hi), slope)
    A = np.column_stack([np.ones_like(p), 1 / p, np.log(p) / p])
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    return RadiusEstimate(float(np.exp(-coef[0])), "geometric", (lo, hi), slope)


@dataclass(frozen=True)
class GrowthFit:
    s_hat: float
    logC: float
    logA: float
    rms: float
    window: tuple

    def model(self, p: int, log_M: float) -> float:
        return self.logC + self.logA * p + self.s_hat * log_M

    def as_dict(self) -> dict:
        return {"s_hat": self.s_hat, "logC": self.logC, "logA": self.logA, "rms": self.rms,
                "window": list(self.window)}


def growth_fit(norms: Sequence, M: SequenceHandle, window: tuple | None = None,
               *, min_points: int = 12) -> GrowthFit:
    """Least squares of ``log ||u_p||`` on ``(1, p, log M_p)``; ``s_hat`` is the ``log M_p`` weight.

    Zero norms are skipped. ``window = (p_min, p_max)`` restricts the indices;
    by default the first quarter is dropped as pre-asymptotic, since the model
    has no term for polynomial prefactors such as ``p**(-1/2)``.
    """
    if window is None:
        hi = len(norms) - 1
        lo = hi // 4 if hi + 1 - hi // 4 >= min_points else 0
    else:
        lo, hi = window
    rows = []
    for p in range(lo, min(hi, len(norms) - 1) + 1):
        c = norms[p]
        if c is None or c == 0:
            continue
        with mp.workprec(max(M.prec, 64)):
            rows.append((p, float(mpmath.log(abs(to_mp(c, M.prec)))), float(M.log_value(p))))
    if len(rows) < min_points:
        raise DegenerateFit(f"growth fit needs {min_points} nonzero norms, got {len(rows)}")
    P = np.array([r[0] for r in rows], dtype=float)
    Y = np.array([r[1] for r in rows])
    L = np.array([r[2] for r in rows])
    A = np.column_stack([np.ones_like(P), P, L])
    if np.linalg.matrix_rank(A) < 3:
        raise DegenerateFit("regressors (1, p, log M_p) are collinear on this window")
    coef, *_ = np.linalg.lstsq(A, Y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ coef - Y) ** 2)))
    return GrowthFit(float(coef[2]), float(coef[0]), float(coef[1]), rms, (rows[0][0], rows[-1][0]))


# -- kernels ---------------------------------------------------------------------------


def mittag_leffler(s, z, *, prec: int | None = None, max_terms: int = 20000):
    """``sum_p z^p / Gamma(1 + s p)`` by direct summation.

    Raises :class:`DomainGuard` if the term cap is hit or if cancellation
    would eat more than half of the working digits.
    """
    s = as_fraction(s)
    if s <= 0:
        raise ValueError("s must be positive")
    prec = prec or default_prec()
    with mp.workprec(prec + 20):
        z = mpmath.mpmathify(z)
        sf = mpmath.mpf(s.numerator) / s.denominator
        total = mpmath.mpf(0)
        biggest = mpmath.mpf(0)
        tiny = eps(prec)
        small_run = 0
        for p in range(max_terms):
            term = z ** p * mpmath.rgamma(1 + sf * p)
            total += term
            biggest = max(biggest, abs(term))
            if p > 0 and abs(term) <= tiny * abs(total):
                small_run += 1
                # terms eventually decrease monotonically; two small ones in a row end it
                if small_run >= 2:
                    break
            else:
                small_run = 0
        else:
            raise DomainGuard(f"Mittag-Leffler series did not settle in {max_terms} terms at |z| = {abs(z)}")
        if total == 0 or biggest / abs(total) > mpmath.ldexp(1, prec // 2):
            raise DomainGuard(f"cancellation too severe at z = {mpmath.nstr(z, 8)}; asymptotic regime")
    with mp.workprec(prec):
        return +total


def kernel_moment_quad(k, p: int, *, prec: int = 113) -> mpmath.mpf:
    """``int_0^oo t^(p-1) e(t) dt`` by quadrature."""
    ker = KernelSpec(k, prec)
    kf = ker.kf
    with mp.workprec(prec):
        f = lambda t: kf * t ** (p - 1 + kf) * mpmath.exp(-t ** kf)  # noqa: E731
        return mpmath.quad(f, [0, 1, 4, 16, mpmath.inf])


@dataclass(frozen=True)
class LaplaceResult:
    value: mpmath.mpc
    error: mpmath.mpf
    U_max: mpmath.mpf


def series_function(coeffs: Sequence, prec: int | None = None) -> Callable:
    """Polynomial ``u -> sum c_p u^p`` (Horner), for Laplace sums of truncated Borel transforms."""
    prec = prec or default_prec()
    cs = [to_mp(c, prec) for c in coeffs]

    def phi(u):
        acc = mpmath.mpc(0)
        for c in reversed(cs):
            acc = acc * u + c
        return acc

    return phi


def laplace_sum(phi: Callable, k, tau, z, *, prec: int = 113, tol=None,
                max_doublings: int = 12) -> LaplaceResult:
    """``int_0^{oo e^{i tau}} e(u/z) phi(u) du/u`` for the kernel of order ``k``.

    Requires ``|arg z - tau| < pi/(2k)``. The ray is cut at ``U_max`` where the
    kernel factor ``exp(-(U/|z|)^k cos(k theta))`` falls below the tolerance,
    then extended while the integrand at the cut is not negligible.
    """
    ker = KernelSpec(k, prec)
    kf = ker.kf
    with mp.workprec(prec):
        z = mpmath.mpmathify(z)
        if z == 0:
            raise DirectionOutOfDomain("z must be nonzero")
        tau = mpmath.mpf(tau)
        theta = mpmath.arg(z) - tau
        theta = (theta + mpmath.pi) % (2 * mpmath.pi) - mpmath.pi
        if not abs(theta) < mpmath.pi / (2 * kf):
            raise DirectionOutOfDomain(
                f"|arg z - tau| = {mpmath.nstr(abs(theta), 6)} is not below pi/(2k) = "
                f"{mpmath.nstr(mpmath.pi / (2 * kf), 6)}"
            )
        tol = tol if tol is not None else mpmath.mpf(10) ** (-(prec // 4))
        c = mpmath.cos(kf * theta)
        ray = mpmath.expj(tau)
        az = abs(z)

        def integrand(rho):
            if rho == 0:
                return mpmath.mpc(0)
            x = (rho * ray / z) ** kf
            return kf * x * mpmath.exp(-x) * phi(rho * ray) / rho

        U = az * (mpmath.log(1 / tol) / c) ** (1 / kf)
        for _ in range(max_doublings):
            tail = abs(integrand(U)) * U
            if tail < tol:
                break
            U *= 2
        else:
            raise QuadratureBudget(f"integrand still {mpmath.nstr(tail, 5)} at U = {mpmath.nstr(U, 5)}")
        pts = [0] + [U * mpmath.mpf(2) ** (-j) for j in range(8, -1, -1)]
        val, err = mpmath.quad(integrand, pts, error=True)
    return LaplaceResult(val, err, U)


# -- report ----------------------------------------------------------------------------


@dataclass
class SummabilityReport:
    findings: list = field(default_factory=list)
    k: Fraction | None = None
    kernel_k: Fraction | None = None
    omega_bar: Fraction | None = None
    growth: list = field(default_factory=list)      # dicts per z-index
    borel: dict | None = None
    laplace_checks: list = field(default_factory=list)
    constants: dict | None = None
    errors: list = field(default_factory=list)

    @property
    def warnings(self) -> bool:
        return bool(self.errors) or any(g.get("status") == "exceeds" for g in self.growth) or any(
            f.level == "warning" for f in self.findings
        )


def _base_omega(base: SequenceHandle) -> Fraction:
    w = base.omega()
    if w is not None:
        return Fraction(w)
    grid = [mpmath.mpf(10) ** (j / 10) for j in range(0, 31)]
    est = assoc_M_and_omega(base, grid, 4000)
    return Fraction(float(est.omega)).limit_denominator(12)


def _status(s_hat: float, target: float, tol: float) -> str:
    if abs(s_hat - target) <= tol:
        return "sharp"
    return "below" if s_hat < target else "exceeds"


def summability_report(spec, u: TSeries | None = None, *, tol: float = GROWTH_TOL,
                       z_indices: Sequence[int] | None = None, artifacts=None) -> SummabilityReport:
    """Assemble polygon slope, growth fits, Borel radius and Laplace spot checks.

    Component failures are recorded in ``errors``; an invalid spec yields a
    report holding only the validation findings.
    """
    from .dsl.polygon import newton_polygon, slope_k
    from .dsl.validate import has_errors, validate_spec
    from .solver import solve_fixed_point

    rep = SummabilityReport(findings=validate_spec(spec))
    if has_errors(rep.findings):
        return rep
    try:
        rep.k = slope_k(newton_polygon(spec), spec)
    except MomentSumError as exc:
        rep.errors.append(exc)
        return rep
    try:
        w = _base_omega(spec.base)
        rep.omega_bar = w / rep.k
        if rep.omega_bar >= 2:
            raise RamifiedKernelRequired(
                f"omega(M^(1/k)) = {rep.omega_bar} >= 2; an unramified kernel cannot be used"
            )
        rep.kernel_k = 1 / rep.omega_bar
    except MomentSumError as exc:
        rep.errors.append(exc)
        return rep

    if u is None:
        u = solve_fixed_point(spec)
    target = float(1 / rep.k)
    rt = spec.r / 2
    idx = list(z_indices) if z_indices is not None else sorted({0, min(1, u.N_z), min(2, u.N_z)})
    for j in idx:
        col = [u[p][j] if j <= u[p].valid else 0 for p in range(u.t_valid + 1)]
        try:
            fit = growth_fit(col, spec.base)
            rep.growth.append({"z_index": j, **fit.as_dict(), "target": target, "tol": tol,
                               "status": _status(fit.s_hat, target, tol)})
        except MomentSumError as exc:
            rep.growth.append({"z_index": j, "error": f"{exc.code}: {exc}"})
    try:
        norms = _row_norms(u, rt)
        fit = growth_fit(norms, spec.base)
        rep.growth.append({"z_index": "norm", "rt": str(rt), **fit.as_dict(), "target": target,
                           "tol": tol, "status": _status(fit.s_hat, target, tol)})
    except MomentSumError as exc:
        rep.errors.append(exc)

    ker = KernelSpec(rep.kernel_k, spec.precision)
    try:
        B = moment_borel(u, ker.moments())
        r0 = radius_estimate(B.z_part(0), 0)
        rn = radius_estimate(B, rt)
        rep.borel = {
            "kernel_k": str(rep.kernel_k),
            "z0": {"radius": r0.radius, "regime": r0.regime, "window": list(r0.window)},
            "norm": {"radius": rn.radius, "regime": rn.regime, "window": list(rn.window), "rt": str(rt)},
            "coefficients_z0": [B[p][0] for p in range(B.t_valid + 1)],
        }
    except MomentSumError as exc:
        rep.errors.append(exc)

    zs = 0.3 * complex(math.cos(spec.direction), math.sin(spec.direction))
    for p in (0, 1, 2):
        try:
            res = laplace_sum(lambda x, p=p: x ** p, ker.k, spec.direction, zs, prec=113)
            exact = ker.m_e(p) * mpmath.mpmathify(zs) ** p
            err = abs(res.value - exact) / abs(exact)
            rep.laplace_checks.append({"phi": f"u^{p}", "z": [zs.real, zs.imag], "rel_error": float(err),
                                       "quad_error": float(res.error), "ok": bool(err < 1e-10)})
        except MomentSumError as exc:
            rep.errors.append(exc)
    if artifacts is not None and artifacts.constants is not None:
        rep.constants = artifacts.constants.as_dict()
    return rep
