"""Formal solution of ``u - sum a_iq(z) d_{m1,t}^{-i} d_{m2,z}^{q} u = f`` and its majorants.

The solution is computed by t-adic fixed point: every term raises the t-order
by ``i >= 1``, so the first ``p_kappa`` z-coefficients need not be supplied.
The decomposition ``u = sum_{n<p_kappa} u_n z^n + d_z^{-p_kappa} d_t^{kappa} w``
with ``w = sum_p w_p`` and the majorant polynomials ``P_p`` are then built from
the computed solution.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import mpmath
import numpy as np
from mpmath import mp

from ._numeric import eps, to_mp
from .errors import MomentSumError, OrderExhausted, SearchBudgetExceeded, ValidationFailed
from .series import (
    TSeries,
    ZSeries,
    moment_deriv,
    moment_integral,
    norm_rtilde,
    ps_invert_unit,
)

__all__ = [
    "solve_fixed_point",
    "residual",
    "Residual",
    "build_g",
    "w_sequence",
    "reconstruct",
    "reconstruction_gap",
    "majorant_Pp",
    "estimate_F",
    "estimate_constants",
    "w_norm_table",
    "w_bound_margin",
    "truncate_to",
    "Constants",
    "SolveArtifacts",
    "solve_all",
    "padded_nz",
    "spec_is_exact",
]


def spec_is_exact(spec) -> bool:
    """Exact rational arithmetic is possible for this spec."""
    lit = next(iter(spec.f.values()))
    f_exact = not any(isinstance(c, float) for row in lit for c in row) if isinstance(lit, list) else True
    return spec.m1.exact and spec.m2.exact and f_exact


def padded_nz(spec, N_t: int, N_z: int) -> int:
    """Internal z-order compensating the erosion of ``d_z^q`` over ``N_t`` steps."""
    return N_z + N_t * spec.operator.q_max


def _coeffs(spec, N_z: int, exact: bool) -> dict:
    out = {}
    for i, q, _ in spec.operator.terms:
        a = spec.operator.coeff_series(i, q, N_z, spec.precision)
        out[(i, q)] = a if exact else a.inexact()
    return out


def _forcing(spec, N_t: int, N_z: int, exact: bool) -> TSeries:
    f = spec.f_series(N_t, N_z)
    return f if (exact or not f.exact) else f.inexact()


def _apply_terms(spec, u: TSeries, coeffs: dict) -> TSeries:
    """``sum a_iq d_{m1,t}^{-i} d_{m2,z}^{q} u`` with t-overflow dropped."""
    acc = None
    for (i, q), a in coeffs.items():
        # t first: the dropped top rows are exactly the ones too short for d_z^q
        term = moment_deriv(moment_integral(u, spec.m1, "t", i, truncate=True), spec.m2, "z", q)
        term = term.zmul(a)
        acc = term if acc is None else acc + term
    return acc


def solve_fixed_point(spec, N_t: int | None = None, N_z: int | None = None, *,
                      method: str = "triangular", exact: bool | None = None,
                      padded: bool = False, strict: bool = False) -> TSeries:
    """Formal solution through ``(N_t, N_z)``.

    ``method='triangular'`` fills t-coefficients in order,
    ``u_n = f_n + sum a_iq m1(n-i)/m1(n) d_z^q u_{n-i}``; ``method='neumann'``
    iterates ``u <- f + sum a_iq d_t^{-i} d_z^q u`` from ``u = f``. Both work on
    the padded z-order; ``padded=True`` returns that series (with its valid
    orders), otherwise the result is cut to ``(N_t, N_z)``.

    The structural hypotheses are not needed for the formal solution; with
    ``strict=True`` any validation error raises :class:`ValidationFailed`.
    """
    if strict:
        from .dsl.validate import has_errors, validate_spec

        findings = validate_spec(spec)
        if has_errors(findings):
            raise ValidationFailed([f for f in findings if f.level == "error"])
    N_t = spec.nt if N_t is None else N_t
    N_z = spec.nz if N_z is None else N_z
    if exact is None:
        exact = spec_is_exact(spec)
    elif exact and not spec_is_exact(spec):
        raise ValueError("exact mode needs rational sequences and forcing")
    Nzp = padded_nz(spec, N_t, N_z)
    f = _forcing(spec, N_t, Nzp, exact)
    coeffs = _coeffs(spec, Nzp, exact)

    if method == "triangular":
        rows: list[ZSeries] = []
        m1 = spec.m1
        for n in range(N_t + 1):
            acc = f[n]
            for (i, q), a in coeffs.items():
                if n < i:
                    continue
                src = moment_deriv(rows[n - i], spec.m2, "z", q)
                if exact:
                    ratio = Fraction(m1(n - i)) / Fraction(m1(n))
                else:
                    with mp.workprec(spec.precision):
                        ratio = m1.mp(n - i) / m1.mp(n)
                acc = acc + (a * src).scale(ratio)
            rows.append(acc)
        u = TSeries(rows)
    elif method == "neumann":
        u = f
        for _ in range(N_t):
            u = f + _apply_terms(spec, u, coeffs)
    else:
        raise ValueError(f"unknown method {method!r}")
    if padded:
        return u
    return truncate_to(u, N_t, N_z)


def truncate_to(u: TSeries, N_t: int, N_z: int) -> TSeries:
    rows = [r.resized(N_z) for r in u.coeffs[: N_t + 1]]
    return TSeries(rows, min(u.t_valid, N_t))


class Residual(NamedTuple):
    series: TSeries
    norm: mpmath.mpf      # max_n ||(P u - f)_n||_{r/2}
    scaled: mpmath.mpf    # the same, each row divided by the size of its summands
    tolerance: mpmath.mpf  # 10 * machine epsilon at the working precision


def residual(spec, u: TSeries, N_z: int | None = None, rt=None) -> Residual:
    """``P u - f`` and its size over the valid region, capped at z-order ``N_z``."""
    N_z = spec.nz if N_z is None else N_z
    rt = spec.r / 2 if rt is None else rt
    exact = u.exact
    f = _forcing(spec, u.N_t, u.N_z, exact)
    coeffs = _coeffs(spec, u.N_z, exact)
    terms = _apply_terms(spec, u, coeffs)
    res = u - f - terms
    prec = spec.precision
    with mp.workprec(prec):
        worst = mpmath.mpf(0)
        worst_scaled = mpmath.mpf(0)
        for n in range(res.t_valid + 1):
            top = min(N_z, res[n].valid)
            r_n = norm_rtilde(res[n], rt, spec.r, upto=top)
            size = (norm_rtilde(u[n], rt, spec.r, upto=top) + norm_rtilde(f[n], rt, spec.r, upto=top)
                    + norm_rtilde(terms[n], rt, spec.r, upto=top))
            worst = max(worst, r_n)
            if r_n:
                worst_scaled = max(worst_scaled, r_n / max(size, mpmath.mpf(1)))
        tol = 10 * eps(prec)
    return Residual(res, worst, worst_scaled, tol)


# -- decomposition ---------------------------------------------------------------


def _low_part(spec, u: TSeries) -> TSeries:
    """``sum_{n < p_kappa} u_n(t) z^n``."""
    pk = spec.operator.p_kappa
    acc = TSeries.zeros(u.N_t, u.N_z, prec=u.prec, exact=u.exact)
    acc = TSeries(acc.coeffs, u.t_valid)
    for n in range(pk):
        acc = acc + u.z_part(n)
    return acc


def _b_coeffs(spec, N_z: int, exact: bool) -> tuple[ZSeries, dict]:
    op = spec.operator
    coeffs = _coeffs(spec, N_z, exact)
    lead = coeffs[(op.kappa, op.p_kappa)]
    binv = ps_invert_unit(lead)
    b = {}
    for (i, q), a in coeffs.items():
        if (i, q) == (op.kappa, op.p_kappa):
            continue
        b[(i, q)] = a * binv
    return binv, b


def build_g(spec, u: TSeries) -> TSeries:
    """``(1/a_{kappa p_kappa}) (S - sum a_iq d_t^{-i} d_z^q S - f)`` with ``S`` the low z-part of ``u``."""
    exact = u.exact
    S = _low_part(spec, u)
    f = _forcing(spec, u.N_t, u.N_z, exact)
    coeffs = _coeffs(spec, u.N_z, exact)
    binv, _ = _b_coeffs(spec, u.N_z, exact)
    T = _apply_terms(spec, S, coeffs)
    return (S - T - f).zmul(binv)


def _q_set(op, i: int) -> range:
    return range(op.p_kappa) if i == op.kappa else range(op.p[i] + 1)


def w_sequence(spec, g: TSeries, P: int) -> list[TSeries]:
    """``w_0 = g`` and ``w_{p+1} = (b d_t^kappa d_z^{-p_kappa} - sum b_iq d_t^{kappa-i} d_z^{q-p_kappa}) w_p``."""
    op = spec.operator
    kappa, pk = op.kappa, op.p_kappa
    binv, b = _b_coeffs(spec, g.N_z, g.exact)
    out = [g]
    w = g
    for _ in range(P):
        if w.t_valid < kappa:
            raise OrderExhausted(
                f"w_{len(out)} needs d_t^{kappa} but only t-order {w.t_valid} is valid; raise N_t"
            )
        nxt = moment_integral(moment_deriv(w, spec.m1, "t", kappa), spec.m2, "z", pk, truncate=True)
        nxt = nxt.zmul(binv)
        for (i, q), bq in b.items():
            if q not in _q_set(op, i):
                continue
            term = moment_integral(moment_deriv(w, spec.m1, "t", kappa - i), spec.m2, "z", pk - q,
                                   truncate=True)
            nxt = nxt - term.zmul(bq)
        out.append(nxt)
        w = nxt
    return out


def reconstruct(spec, u: TSeries, w_terms: list[TSeries]) -> TSeries:
    """``sum_{n<p_kappa} u_n z^n + d_z^{-p_kappa} d_t^kappa sum_p w_p``."""
    op = spec.operator
    total = w_terms[0]
    for w in w_terms[1:]:
        total = total + w
    body = moment_integral(moment_deriv(total, spec.m1, "t", op.kappa), spec.m2, "z", op.p_kappa,
                           truncate=True)
    return _low_part(spec, u) + body


def reconstruction_gap(spec, u: TSeries, w_terms: list[TSeries]) -> tuple[mpmath.mpf, int, int]:
    """Largest coefficient gap between ``u`` and its reconstruction over the stabilised region.

    Returns ``(gap, n_max, j_max)``: t-orders ``n <= n_max`` are valid in every
    summand, and z-orders ``j <= j_max = P + p_kappa`` are unaffected by the
    omitted ``w_p`` with ``p > P`` (each step raises the z-valuation).
    """
    rec = reconstruct(spec, u, w_terms)
    P = len(w_terms) - 1
    n_max = min(rec.t_valid, u.t_valid)
    j_max = min(P + spec.operator.p_kappa, u.N_z)
    prec = spec.precision
    with mp.workprec(prec):
        gap = mpmath.mpf(0)
        for n in range(n_max + 1):
            top = min(j_max, rec[n].valid, u[n].valid)
            for j in range(top + 1):
                d = rec[n][j] - u[n][j]
                if d:
                    gap = max(gap, abs(to_mp(d, prec)))
    return gap, n_max, j_max


# -- majorants ---------------------------------------------------------------------


def _ratio_pow(M, a: int, b: int, s2: Fraction, prec: int):
    """``(M_a / M_b) ** s2``."""
    if M.exact and s2.denominator == 1:
        return (Fraction(M(a)) / Fraction(M(b))) ** int(s2)
    with mp.workprec(prec):
        return (M.mp(a) / M.mp(b)) ** (mpmath.mpf(s2.numerator) / s2.denominator)


def majorant_Pp(spec, P: int) -> list[ZSeries]:
    """``P_0 = 1``, ``P_{p+1} = [d_z^{-p_kappa} + sum_{i in K'} sum_{q in Q_i} (M_{p_k p}/M_{p_k p + p_i})^{s2} d_z^{q - p_kappa}] P_p``."""
    op = spec.operator
    pk = op.p_kappa
    Kp = [i for i in op.K if op.p[i] >= 1]
    N = max(pk * P, 1)
    exact = spec.m2.exact and spec.base.exact and spec.s2.denominator == 1
    cur = ZSeries.constant(Fraction(1), N, prec=spec.precision)
    if not exact:
        cur = cur.inexact()
    out = [cur]
    for p in range(P):
        nxt = moment_integral(cur, spec.m2, "z", pk)
        for i in Kp:
            c = _ratio_pow(spec.base, pk * p, pk * p + op.p[i], spec.s2, spec.precision)
            for q in _q_set(op, i):
                nxt = nxt + moment_integral(cur, spec.m2, "z", pk - q).scale(c)
        out.append(nxt)
        cur = nxt
    return out


def _rt_grid(r, n: int = 8) -> list:
    return [Fraction(r) * j / n for j in range(1, n + 1)]


def estimate_F(spec, P_polys: list[ZSeries], rt_grid=None) -> tuple[mpmath.mpf, int, object]:
    """Smallest ``F >= 1`` with ``P_p(rt) <= F^p rt^p / m2(p_kappa p)`` for the given ``P_p`` and grid.

    Returns ``(F, p_argmax, rt_argmax)``.
    """
    pk = spec.operator.p_kappa
    grid = rt_grid or _rt_grid(spec.r)
    prec = spec.precision
    with mp.workprec(prec):
        best, where = mpmath.mpf(1), (0, None)
        for p in range(1, len(P_polys)):
            for rt in grid:
                x = to_mp(rt, prec)
                val = norm_rtilde(P_polys[p], rt, spec.r)
                cand = (val * spec.m2.mp(pk * p) / x ** p) ** (mpmath.mpf(1) / p)
                if cand > best:
                    best, where = cand, (p, rt)
    return best, where[0], where[1]


@dataclass(frozen=True)
class Constants:
    B: mpmath.mpf
    C: mpmath.mpf
    K: mpmath.mpf
    F: mpmath.mpf
    rt: Fraction
    n_max: int
    p_max: int
    grid_steps: int
    at_boundary: bool
    verified: bool
    slack: mpmath.mpf = field(default=mpmath.mpf(0))  # min over (n, p) of bound / observed

    def as_dict(self) -> dict:
        return {
            "B_prime": mpmath.nstr(self.B, 12),
            "C_prime": mpmath.nstr(self.C, 12),
            "K_prime": mpmath.nstr(self.K, 12),
            "F": mpmath.nstr(self.F, 12),
            "rt": str(self.rt),
            "n_max": self.n_max,
            "p_max": self.p_max,
            "grid_steps": self.grid_steps,
            "at_boundary": self.at_boundary,
            "verified": self.verified,
            "note": "finite constants exist by the majorant lemmas; these values are empirical witnesses",
        }


def w_norm_table(spec, w_terms: list[TSeries], N: int, rt) -> list[list]:
    """``X[p][n] = m1(n) * ||[t^n] w_p||_rt``, the size of ``d_{m1,t}^n w_p`` at ``t = 0``."""
    prec = spec.precision
    out = []
    with mp.workprec(prec):
        for p, w in enumerate(w_terms):
            if w.t_valid < N:
                raise OrderExhausted(f"w_{p} is valid to t^{w.t_valid}, need t^{N}")
            out.append([spec.m1.mp(n) * norm_rtilde(w[n], rt, spec.r) for n in range(N + 1)])
    return out


def estimate_constants(spec, w_terms: list[TSeries], P_polys: list[ZSeries], N: int,
                       rt=None, grid_steps: int = 64, F_grid=None) -> Constants:
    """Witness constants for ``X_{n,p} <= B'^p C' K'^{n+kappa p} M_{floor(n p_k/kappa)+p_k p}^{s2} P_p(rt)``.

    ``(B', K')`` run over ``2**(j/4)`` (``K' >= 1``); ``C'`` is the largest
    observed ratio. The triple minimising the mean log-bound over the window
    is kept. A minimiser on the edge of the grid raises
    :class:`SearchBudgetExceeded` carrying the best triple found.
    """
    op = spec.operator
    kappa, pk = op.kappa, op.p_kappa
    rt = spec.r / 2 if rt is None else Fraction(rt)
    P = len(w_terms) - 1
    if len(P_polys) < P + 1:
        raise ValueError("need P_p for every w_p")
    prec = spec.precision
    X = w_norm_table(spec, w_terms, N, rt)
    F, _, _ = estimate_F(spec, P_polys, F_grid)
    with mp.workprec(prec):
        s2 = mpmath.mpf(spec.s2.numerator) / spec.s2.denominator
        Pv = [norm_rtilde(P_polys[p], rt, spec.r) for p in range(P + 1)]
        logs = {}
        for p in range(P + 1):
            for n in range(N + 1):
                if X[p][n] == 0:
                    continue
                Mi = spec.base.mp((n * pk) // kappa + pk * p)
                logs[(n, p)] = mpmath.log(X[p][n]) - s2 * mpmath.log(Mi) - mpmath.log(Pv[p])
        # mean log-bound over the window: minimise the average slack, not one corner.
        # The grid scan runs in float64; the winning triple is recomputed exactly below.
        keys = list(logs)
        ns = np.array([n for n, _ in keys], dtype=float)
        ps = np.array([p for _, p in keys], dtype=float)
        vs = np.array([float(logs[k]) for k in keys])
        pbar = float(ps.mean()) if keys else 0.0
        nbar = float(ns.mean()) if keys else 0.0
        step = math.log(2) / 4
        jks = np.arange(0, grid_steps + 1)
        jbs = np.arange(-grid_steps, grid_steps + 1)
        LK, LB = np.meshgrid(jks * step, jbs * step, indexing="ij")
        if keys:
            resid = vs[None, None, :] - ps * LB[..., None] - (ns + kappa * ps) * LK[..., None]
            LC = resid.max(axis=2)
        else:
            LC = np.zeros_like(LK)
        score = LC + pbar * LB + (nbar + kappa * pbar) * LK
        ik, ib = np.unravel_index(int(np.argmin(score)), score.shape)
        jk, jb = int(jks[ik]), int(jbs[ib])
        lb, lk = jb * mpmath.log(2) / 4, jk * mpmath.log(2) / 4
        lc = max((v - p * lb - (n + kappa * p) * lk for (n, p), v in logs.items()),
                 default=mpmath.mpf(0))
        B, C, K = mpmath.exp(lb), mpmath.exp(lc), mpmath.exp(lk)
        edge = jk == grid_steps or abs(jb) == grid_steps
        # recheck the inequality directly
        slack = mpmath.inf
        ok = True
        for (n, p), v in logs.items():
            margin = lc + p * lb + (n + kappa * p) * lk - v
            slack = min(slack, margin)
            if margin < -mpmath.mpf(10) ** (-(prec // 4)):
                ok = False
        if slack == mpmath.inf:
            slack = mpmath.mpf(0)
    consts = Constants(B, C, K, F, rt, N, P, grid_steps, edge, ok, mpmath.exp(slack))
    if edge:
        raise SearchBudgetExceeded(consts)
    return consts


def w_bound_margin(spec, w_terms: list[TSeries], P_polys: list[ZSeries], N: int,
                   consts: Constants) -> mpmath.mpf:
    """Smallest ``bound / X_{n,p}`` over ``n <= N`` and all given ``w_p``; ``>= 1`` means the bound holds."""
    op = spec.operator
    kappa, pk = op.kappa, op.p_kappa
    X = w_norm_table(spec, w_terms, N, consts.rt)
    with mp.workprec(spec.precision):
        s2 = mpmath.mpf(spec.s2.numerator) / spec.s2.denominator
        worst = mpmath.inf
        for p in range(len(w_terms)):
            Pv = norm_rtilde(P_polys[p], consts.rt, spec.r)
            for n in range(N + 1):
                if X[p][n] == 0:
                    continue
                bound = (consts.B ** p * consts.C * consts.K ** (n + kappa * p)
                         * spec.base.mp((n * pk) // kappa + pk * p) ** s2 * Pv)
                worst = min(worst, bound / X[p][n])
    return worst

# -- bundle --------------------------------------------------------------------------


@dataclass
class SolveArtifacts:
    u: TSeries
    residual_norm: mpmath.mpf
    residual_scaled: mpmath.mpf
    residual_tol: mpmath.mpf
    g_hat: TSeries | None = None
    w_terms: list = field(default_factory=list)
    P_polys: list = field(default_factory=list)
    constants: Constants | None = None
    reconstruction: tuple | None = None
    errors: list = field(default_factory=list)


def solve_all(spec, N_t: int | None = None, N_z: int | None = None, P: int | None = None,
              *, exact: bool | None = None, majorants: bool = True) -> SolveArtifacts:
    """Solve, check the residual and, when the structure allows, build ``g``, ``w_p``, ``P_p``."""
    N_t = spec.nt if N_t is None else N_t
    N_z = spec.nz if N_z is None else N_z
    P = spec.pmax if P is None else P
    up = solve_fixed_point(spec, N_t, N_z, exact=exact, padded=True)
    res = residual(spec, up, N_z)
    art = SolveArtifacts(truncate_to(up, N_t, N_z), res.norm, res.scaled, res.tolerance)
    if not majorants:
        return art
    try:
        g = build_g(spec, up)
        P_eff = max(0, min(P, g.t_valid // max(spec.operator.kappa, 1)))
        art.g_hat = g
        art.w_terms = w_sequence(spec, g, P_eff)
        art.reconstruction = reconstruction_gap(spec, up, art.w_terms)
        art.P_polys = majorant_Pp(spec, P_eff)
        n_max = min(w.t_valid for w in art.w_terms)
        art.constants = estimate_constants(spec, art.w_terms, art.P_polys, min(n_max, N_t))
    except SearchBudgetExceeded as exc:
        art.constants = exc.args[0]
        art.errors.append(exc)
    except MomentSumError as exc:
        art.errors.append(exc)
    return art

