"""Command line entry point: ``msl {solve,polygon,analyze,kernels,fractional,selftest}``.

Exit codes: 0 all checks pass, 2 parse or validation errors, 3 analysis
warnings, 4 internal error. ``report.json`` is deterministic; wall-clock
timings go to ``timings.json``.
"""

from __future__ import annotations

import argparse
import sys
import time
import traceback
from fractions import Fraction
from pathlib import Path

import mpmath

from . import __version__
from ._numeric import DEFAULT_PREC, MIN_PREC, as_fraction, fmt_scalar
from .dsl import has_errors, load_problem, newton_polygon, slope_k, validate_spec
from .errors import IoError, MomentSumError, SemanticError, SpecSyntaxError
from .report import (
    SCHEMA_VERSION,
    borel_csv,
    growth_csv,
    polygon_dict,
    polygon_svg,
    rows_csv,
    series_rows,
    to_jsonable,
    write_json,
)

EXIT_OK, EXIT_INVALID, EXIT_WARN, EXIT_INTERNAL = 0, 2, 3, 4


class _Run:
    """Collects report sections, timings and the worst exit code."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out) if getattr(args, "out", None) else None
        self.report: dict = {"schema_version": SCHEMA_VERSION, "command": args.command,
                             "tool_version": __version__}
        self.timings: dict = {}
        self.code = EXIT_OK

    def bump(self, code: int):
        self.code = max(self.code, code)

    def timed(self, name, fn, *a, **kw):
        t = time.perf_counter()
        try:
            return fn(*a, **kw)
        finally:
            self.timings[name] = round(time.perf_counter() - t, 6)

    def error(self, exc: BaseException, stage: str):
        code = getattr(exc, "code", type(exc).__name__)
        entry = {"stage": stage, "code": code, "message": str(exc)}
        if isinstance(exc, SpecSyntaxError):
            entry.update(line=exc.line, col=exc.col, expected=exc.expected)
        self.report.setdefault("errors", []).append(entry)

    def finish(self) -> int:
        self.report["exit_code"] = self.code
        # wall-clock data lives outside report.json so the report stays byte-stable
        self.report["timings_file"] = "timings.json"
        if self.out is not None:
            try:
                self.out.mkdir(parents=True, exist_ok=True)
                write_json(self.out / "report.json", self.report)
                write_json(self.out / "timings.json", self.timings)
            except (IoError, OSError) as exc:
                print(f"error: {exc}", file=sys.stderr)
                return EXIT_INTERNAL
        return self.code


def _precision(args) -> int | None:
    if args.precision is None:
        return None
    if args.precision < MIN_PREC:
        raise SystemExit(f"--precision must be at least {MIN_PREC}")
    return args.precision


def _load(run: _Run):
    """Spec with CLI overrides applied, or ``None`` after recording the failure."""
    args = run.args
    try:
        spec = load_problem(args.spec, precision=_precision(args))
    except (SpecSyntaxError, SemanticError) as exc:
        run.error(exc, "parse")
        run.bump(EXIT_INVALID)
        print(f"{args.spec}: {exc}", file=sys.stderr)
        return None
    except OSError as exc:
        run.error(exc, "io")
        run.bump(EXIT_INVALID)
        print(f"cannot read {args.spec}: {exc}", file=sys.stderr)
        return None
    over = {k: getattr(args, k) for k in ("nt", "nz", "pmax") if getattr(args, k, None) is not None}
    if over:
        spec = spec.replace(**over)
    run.report["config"] = {
        **spec.resolved(),
        "spec_path": str(args.spec),
        "plots": bool(getattr(args, "plots", False)),
        "growth_tol": getattr(args, "growth_tol", None),
    }
    return spec


def _validate(run: _Run, spec) -> list:
    findings = run.timed("validate", validate_spec, spec)
    run.report["findings"] = [f.as_dict() for f in findings]
    if has_errors(findings):
        run.bump(EXIT_INVALID)
    elif findings:
        run.bump(EXIT_WARN)
    return findings


def _polygon(run: _Run, spec):
    pg = run.timed("polygon", newton_polygon, spec)
    run.report["polygon"] = polygon_dict(pg)
    try:
        k = slope_k(pg, spec)
        run.report["k"] = fmt_scalar(k)
    except MomentSumError as exc:
        run.report["k"] = None
        run.error(exc, "polygon")
    if getattr(run.args, "plots", False) and run.out is not None:
        run.out.mkdir(parents=True, exist_ok=True)
        polygon_svg(pg, run.out / "polygon.svg")
    return pg


def cmd_polygon(run: _Run) -> None:
    spec = _load(run)
    if spec is None:
        return
    _validate(run, spec)
    _polygon(run, spec)
    print(f"k = {run.report.get('k')}")


def _solve_section(art, spec) -> dict:
    return {
        "orders": {"nt": spec.nt, "nz": spec.nz},
        "precision": spec.precision,
        "exact": art.u.exact,
        "residual": {
            "norm": art.residual_norm,
            "scaled": art.residual_scaled,
            "tolerance": art.residual_tol,
            "rt": fmt_scalar(spec.r / 2),
        },
    }


def cmd_solve(run: _Run) -> None:
    from .solver import solve_all

    spec = _load(run)
    if spec is None:
        return
    _validate(run, spec)
    art = run.timed("solve", solve_all, spec, majorants=False)
    sec = _solve_section(art, spec)
    sec["coefficients"] = series_rows(art.u)
    run.report["solve"] = sec
    if art.residual_scaled > art.residual_tol:
        run.bump(EXIT_WARN)
    print(f"solved to (nt, nz) = ({spec.nt}, {spec.nz}); residual {mpmath.nstr(art.residual_norm, 5)}")


def cmd_analyze(run: _Run) -> None:
    from .solver import solve_all
    from .summability import summability_report

    spec = _load(run)
    if spec is None:
        return
    findings = _validate(run, spec)
    _polygon(run, spec)
    if has_errors(findings):
        return
    art = run.timed("solve", solve_all, spec)
    run.report["solve"] = _solve_section(art, spec)
    if art.residual_scaled > art.residual_tol:
        run.bump(EXIT_WARN)
    for exc in art.errors:
        run.error(exc, "majorants")
        run.bump(EXIT_WARN)
    if art.reconstruction is not None:
        gap, n_max, j_max = art.reconstruction
        run.report["reconstruction"] = {"gap": gap, "t_orders": n_max, "z_orders": j_max}
    if art.P_polys:
        run.report["majorants"] = {
            "P": [[fmt_scalar(c) for c in P.coeffs] for P in art.P_polys[:4]],
            "depth": len(art.P_polys) - 1,
        }
    tol = run.args.growth_tol
    rep = run.timed("summability", summability_report, spec, art.u, tol=tol, artifacts=art)
    for exc in rep.errors:
        run.error(exc, "summability")
        run.bump(EXIT_WARN)
    if any(g.get("status") == "exceeds" for g in rep.growth):
        run.bump(EXIT_WARN)
    run.report["summability"] = {
        "k": rep.k,
        "kernel_k": rep.kernel_k,
        "omega_bar": rep.omega_bar,
        "growth": rep.growth,
        "borel": {k: v for k, v in (rep.borel or {}).items() if k != "coefficients_z0"},
        "laplace_checks": rep.laplace_checks,
        "constants": rep.constants,
    }
    if run.args.plots and run.out is not None:
        g0 = next((g for g in rep.growth if g.get("z_index") == 0 and "s_hat" in g), None)
        rows = []
        if g0 is not None:
            lo, hi = g0["window"]
            for p in range(lo, hi + 1):
                c = art.u[p][0]
                if c == 0:
                    continue
                ln = float(mpmath.log(abs(mpmath.mpmathify(c) if not isinstance(c, Fraction)
                                          else mpmath.mpf(c.numerator) / c.denominator)))
                fit = g0["logC"] + g0["logA"] * p + g0["s_hat"] * float(spec.base.log_value(p))
                rows.append((p, ln, fit))
        growth_csv(run.out / "growth_fit.csv", rows)
        borel_csv(run.out / "borel_coeffs.csv", (rep.borel or {}).get("coefficients_z0", []))
    k = run.report.get("k")
    print(f"k = {k}; growth: " + ", ".join(
        f"z^{g['z_index']}: {g['s_hat']:.4f} ({g['status']})" for g in rep.growth if "s_hat" in g))


def cmd_kernels(run: _Run) -> None:
    from .summability import KernelSpec, kernel_moment_quad

    args = run.args
    prec = _precision(args) or DEFAULT_PREC
    k = as_fraction(args.k)
    ker = KernelSpec(k, prec)
    xs = [Fraction(args.xmax) * j / args.points for j in range(args.points + 1)]
    rows = []
    for x in xs:
        xm = mpmath.mpf(x.numerator) / x.denominator
        try:
            E = mpmath.nstr(ker.E(xm), 20)
        except MomentSumError as exc:
            E = f"error: {exc.code}"
        rows.append({"x": fmt_scalar(x), "e": mpmath.nstr(ker.e(xm), 20), "E": E})
    moments = []
    for p in range(args.pmax + 1):
        exact = ker.m_e(p)
        quad = kernel_moment_quad(k, p)
        moments.append({"p": p, "m_e": mpmath.nstr(exact, 20),
                        "quadrature": mpmath.nstr(quad, 20),
                        "rel_error": mpmath.nstr(abs(quad / exact - 1), 5)})
    run.report["config"] = {"k": fmt_scalar(k), "xmax": str(args.xmax), "points": args.points,
                            "pmax": args.pmax, "precision": prec}
    run.report["kernel"] = {"grid": rows, "moments": moments}
    if run.out is not None:
        run.out.mkdir(parents=True, exist_ok=True)
        rows_csv(run.out / "kernel_grid.csv", ["x", "e", "E"], rows)
        rows_csv(run.out / "kernel_moments.csv", ["p", "m_e", "quadrature", "rel_error"], moments)
    print(f"kernel k = {k}: {len(rows)} grid points, moments to p = {args.pmax}")


def _coeff_list(text: str) -> list:
    return [as_fraction(c) for c in text.replace(" ", "").split(",") if c]


def cmd_fractional(run: _Run) -> None:
    from .fractional import FracSeries, caputo_frac_deriv, frac_correspondence_check, rl_integral
    from .series import ZSeries

    args = run.args
    prec = _precision(args) or None
    if args.spec:
        spec = _load(run)
        if spec is None:
            return
        coeffs = list(spec.f_series()[0].coeffs)
        prec = spec.precision
    elif args.coeffs:
        coeffs = _coeff_list(args.coeffs)
    else:
        raise SystemExit("fractional: give --coeffs or --spec")
    run.report.setdefault("config", {}).update(
        {"op": args.op, "alpha": args.alpha, "k": args.k, "n": args.n, "input": [fmt_scalar(c) for c in coeffs]}
    )
    if args.op == "caputo":
        res = caputo_frac_deriv(FracSeries(as_fraction(args.alpha), coeffs, prec=prec))
        run.report["result"] = {"alpha": fmt_scalar(res.alpha), "coefficients": [fmt_scalar(c, 30) for c in res.coeffs]}
    elif args.op == "rl":
        step = as_fraction(args.step) if args.step else as_fraction(args.alpha)
        res = rl_integral(FracSeries(step, coeffs, prec=prec), as_fraction(args.alpha))
        run.report["result"] = {"step": fmt_scalar(res.alpha), "coefficients": [fmt_scalar(c, 30) for c in res.coeffs]}
    else:
        N = args.n if args.n is not None else len(coeffs) - 2
        gap = frac_correspondence_check(args.k, ZSeries(coeffs, prec=prec), N)
        run.report["result"] = {"k": args.k, "N": N, "discrepancy": gap}
    print(to_jsonable(run.report["result"]))


def _selftest_checks():
    """Fast oracle checks; each returns ``(name, ok, detail)``."""
    import math as _m

    from .dsl import ProblemSpec
    from .fractional import FracSeries, rl_integral
    from .sequences import Gevrey
    from .solver import residual, solve_fixed_point
    from .summability import laplace_sum, mittag_leffler, moment_borel, radius_estimate

    out = []
    spec = ProblemSpec.build("u - (1) Dti[2] Dz[3] u - (z) Dti[1] Dz[1] u = f")
    k = slope_k(newton_polygon(spec), spec)
    out.append(("polygon slope", k == 2, f"k = {k}"))
    heat = ProblemSpec.build("u - Dti[1] Dz[2] u = f", nt=16, nz=6)
    u = solve_fixed_point(heat, padded=True)
    ok = all(u[p][0] == Fraction(_m.factorial(2 * p), _m.factorial(p)) for p in range(17))
    out.append(("heat coefficients", ok, "(2p)!/p! at z^0"))
    out.append(("residual", residual(heat, u).norm == 0, "exact residual"))
    B = moment_borel(u.z_part(0), Gevrey(1))
    rad = radius_estimate(B, 0).radius
    out.append(("Borel radius", abs(rad - 0.25) < 0.0125 * 2, f"{rad:.5f}"))
    with mpmath.workprec(128):
        v = rl_integral(FracSeries(Fraction(1, 2), [0, 0, 1], prec=128), Fraction(1, 2)).coeffs[3]
        want = 4 / (3 * mpmath.sqrt(mpmath.pi))
        out.append(("RL integral", abs(v - want) / want < 1e-20, mpmath.nstr(v.real, 12)))
    ml = mittag_leffler(2, 1)
    out.append(("Mittag-Leffler", abs(ml - mpmath.cosh(1)) < 1e-12, mpmath.nstr(ml, 12)))
    lap = laplace_sum(mpmath.exp, 1, 0, 0.3).value
    out.append(("Laplace", abs(lap - 1 / mpmath.mpf("0.7")) < 1e-6, mpmath.nstr(lap.real, 10)))
    return out


def cmd_selftest(run: _Run) -> None:
    checks = _selftest_checks()
    run.report["checks"] = [{"name": n, "ok": ok, "detail": d} for n, ok, d in checks]
    for n, ok, d in checks:
        print(f"{'PASS' if ok else 'FAIL'}  {n}: {d}")
    if not all(ok for _, ok, _ in checks):
        run.bump(EXIT_INTERNAL)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="msl", description="Moment-summability toolkit")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, spec_required=True):
        p.add_argument("--spec", required=spec_required, help="problem spec file (TOML)")
        p.add_argument("--out", help="output directory for report.json and figures")
        p.add_argument("--precision", type=int,
                       help="working precision in bits (default: spec file, then $MSL_PRECISION_BITS, then 128)")
        p.add_argument("--nt", type=int, help="t truncation order")
        p.add_argument("--nz", type=int, help="z truncation order")
        p.add_argument("--pmax", type=int, help="depth of the w_p / P_p machinery")
        p.add_argument("--plots", action="store_true", help="write polygon.svg and CSV tables")

    common(sub.add_parser("solve", help="formal solution and residual"))
    common(sub.add_parser("polygon", help="Newton polygon and slope k"))
    an = sub.add_parser("analyze", help="full pipeline with summability report")
    common(an)
    an.add_argument("--growth-tol", type=float, default=0.05, help="tolerance on s_hat against 1/k")

    ke = sub.add_parser("kernels", help="kernel e, function E and moments on grids")
    ke.add_argument("--k", default="1", help="kernel order (rational)")
    ke.add_argument("--xmax", default="4")
    ke.add_argument("--points", type=int, default=16)
    ke.add_argument("--pmax", type=int, default=8)
    ke.add_argument("--out")
    ke.add_argument("--precision", type=int)

    fr = sub.add_parser("fractional", help="Caputo derivative, RL integral, correspondence check")
    common(fr, spec_required=False)
    fr.add_argument("--op", choices=["caputo", "rl", "check"], default="check")
    fr.add_argument("--alpha", default="1/2", help="order (rational)")
    fr.add_argument("--step", help="grid step of the input for --op rl (default: alpha)")
    fr.add_argument("--k", type=int, default=2, help="k for --op check")
    fr.add_argument("--n", type=int, help="slots compared by --op check")
    fr.add_argument("--coeffs", help="comma-separated coefficients, e.g. '0,1,1/2'")

    st = sub.add_parser("selftest", help="quick oracle checks")
    st.add_argument("--out")
    return ap


COMMANDS = {
    "solve": cmd_solve,
    "polygon": cmd_polygon,
    "analyze": cmd_analyze,
    "kernels": cmd_kernels,
    "fractional": cmd_fractional,
    "selftest": cmd_selftest,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    run = _Run(args)
    try:
        COMMANDS[args.command](run)
    except IoError as exc:
        run.error(exc, "io")
        run.bump(EXIT_INTERNAL)
        print(f"error: {exc}", file=sys.stderr)
    except MomentSumError as exc:
        run.error(exc, args.command)
        run.bump(EXIT_INVALID if isinstance(exc, (SpecSyntaxError, SemanticError)) else EXIT_WARN)
        print(f"error: {exc}", file=sys.stderr)
    except Exception as exc:  # noqa: BLE001 - mapped to the internal-error exit code
        run.error(exc, args.command)
        run.report["traceback"] = traceback.format_exc().splitlines()[-3:]
        run.bump(EXIT_INTERNAL)
        print(f"internal error: {exc!r}", file=sys.stderr)
    return run.finish()


if __name__ == "__main__":
    sys.exit(main())
