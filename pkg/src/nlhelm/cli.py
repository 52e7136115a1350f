"""Command-line front end: ``nlhelm <command> [flags]``.

Every command writes plot-ready CSV (17 significant digits) to ``--output``
or to stdout.  Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
import argparse
import io
import math
import re
import sys

from . import analysis
from .config import ExperimentConfig, read_config_file
from .dispersion import cutoff_k0, solve_ktilde
from .errors import NlhelmError
from .greens import exact_solution_exp
from .kernels import Family

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC = 0, 2, 3


class UsageError(ValueError):
    pass


def _number(text):
    """Float from '0.25', '1e-3', '40/512', 'pi/5' or '4*pi/5'."""
    t = str(text).strip().lower()
    try:
        value, op = 1.0, "*"
        for tok in re.split(r"([*/])", t):
            if tok in ("*", "/"):
                op = tok
                continue
            x = math.pi if tok == "pi" else float(tok)
            value = value * x if op == "*" else value / x
        return value
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def _number_list(text):
    items = [s for s in str(text).replace(" ", "").split(",") if s]
    if not items:
        raise UsageError("empty value list")
    return [_number(s) for s in items]


def _fmt(v):
    return f"{v:.17g}"


def _common(p, with_h=True):
    p.add_argument("--config", help="key = value file; flags override it")
    p.add_argument("--kernel", help="exp or gauss (default exp)")
    p.add_argument("--delta", help="horizon (default 1/16)")
    p.add_argument("--k", help="wavenumber (default 1.6)")
    p.add_argument("--l", help="half-width of the physical domain (default 10)")
    p.add_argument("--d", help="layer thickness (default 10)")
    p.add_argument("--sigma0", help="number, 'auto' or 'auto:<target>' (default auto)")
    if with_h:
        p.add_argument("--h", help="mesh size; must divide l and l + d")
    p.add_argument("--case", choices=["auto", "case1", "case2"])
    p.add_argument("--source-support", help="cut-off of the source (default l)")
    p.add_argument("--output", "-o", help="CSV path (default stdout)")


def build_parser():
    parser = argparse.ArgumentParser(prog="nlhelm", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dispersion", help="modified wavenumber, cutoff and regime")
    p.add_argument("--kernel", default="exp")
    p.add_argument("--delta", required=True)
    p.add_argument("--k", required=True, help="one value or a comma list")
    p.add_argument("--output", "-o")

    p = sub.add_parser("solve", help="solve one truncated problem and export u")
    _common(p)
    p.add_argument("--unmodified-kernel", action="store_true",
                   help="keep the kernel on the real axis inside the layer")
    p.add_argument("--dump-matrix", help="write the assembled matrix as n,m,re,im")

    p = sub.add_parser("sweep", help="truncation errors over sigma0 or d")
    _common(p)
    p.add_argument("--vary", required=True, choices=["sigma0", "d"])
    p.add_argument("--values", required=True, help="comma list")

    p = sub.add_parser("convergence", help="errors and rates over an h ladder")
    _common(p, with_h=False)
    p.add_argument("--h-list", required=True, help="comma list, e.g. 40/512,40/1024,40/2048")

    p = sub.add_parser("delta-convergence", help="delta = h ladder against the local PML limit")
    _common(p, with_h=False)
    p.add_argument("--levels", required=True, help="comma list of delta = h values")
    return parser


def make_config(args):
    """File values first, then flags; everything is validated here."""
    values = {}
    if getattr(args, "config", None):
        try:
            values.update(read_config_file(args.config))
        except OSError as exc:
            raise UsageError(str(exc)) from None
    for key in ("kernel", "delta", "k", "l", "d", "sigma0", "h", "case", "source_support",
                "output"):
        v = getattr(args, key, None)
        if v is not None:
            values[key] = v
    if getattr(args, "unmodified_kernel", False):
        values["unmodified_kernel"] = True
    out = values.pop("output", None)
    kw = {}
    for key, v in values.items():
        if key in ("delta", "k", "l", "d", "h", "source_support"):
            kw[key] = _number(v)
        elif key == "unmodified_kernel":
            kw[key] = v is True or str(v).strip().lower() in ("1", "true", "yes")
        elif key == "sigma0":
            kw[key] = v if str(v).lower().startswith("auto") else _number(v)
        else:
            kw[key] = str(v).strip()
    return ExperimentConfig(**kw), out


def _emit(text, path):
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_dispersion(args):
    kernel = ExperimentConfig(kernel=args.kernel, delta=_number(args.delta)).kernel_spec()
    ks = _number_list(args.k)
    k0 = cutoff_k0(kernel)
    buf = io.StringIO()
    buf.write("k,ktilde_re,ktilde_im,k0,regime,residual\n")
    for k in ks:
        if not k > 0:
            raise UsageError("k must be positive")
        r = solve_ktilde(kernel, k)
        buf.write(f"{_fmt(k)},{_fmt(r.ktilde.real)},{_fmt(r.ktilde.imag)},{_fmt(k0)},"
                  f"{r.regime.value},{_fmt(r.residual)}\n")
    _emit(buf.getvalue(), args.output)


def cmd_solve(args):
    cfg, out = make_config(args)
    if cfg.h is None:
        raise UsageError("--h is required")
    res = analysis.solve_config(cfg)
    if args.dump_matrix:
        from .discretization import assemble_nonlocal, assemble_pml
        kernel, grid = cfg.kernel_spec(), cfg.grid()
        if cfg.select_case() == "case1":
            A = assemble_pml(kernel, grid, cfg.pml(), continued=not cfg.unmodified_kernel)
        else:
            A = assemble_nonlocal(kernel, grid)
        A.dump_csv(args.dump_matrix, grid)
    buf = io.StringIO()
    buf.write("x,re_u,im_u,abs_u\n")
    for xi, v in zip(res.x, res.values):
        buf.write(f"{_fmt(xi)},{_fmt(v.real)},{_fmt(v.imag)},{_fmt(abs(v))}\n")
    _emit(buf.getvalue(), out)
    if cfg.kernel is Family.EXPONENTIAL:
        f = cfg.source()
        exact = lambda x: exact_solution_exp(cfg.k, cfg.delta, f, x)
        rep = analysis.relative_errors(res.values, res.x, exact,
                                       analysis.error_region(cfg, cfg.h))
        sys.stderr.write(f"e_l2,e_h1\n{_fmt(rep.e_l2)},{_fmt(rep.e_h1)}\n")


def _fit_lines(fits):
    lines = ["norm,slope,intercept,r2"]
    for name, fit in fits:
        lines.append(f"{name},{_fmt(fit.slope)},{_fmt(fit.intercept)},{_fmt(fit.r_squared)}")
    return "\n".join(lines) + "\n"


def _emit_with_fit(table, fit_text, out):
    if out:
        _emit(table, out)
        stem = out[:-4] if out.endswith(".csv") else out
        _emit(fit_text, stem + ".fit.csv")
    else:
        _emit(table + "\n" + fit_text, None)


def cmd_sweep(args):
    cfg, out = make_config(args)
    if cfg.h is None:
        raise UsageError("--h is required")
    values = _number_list(args.values)
    if any(v <= 0 for v in values) and args.vary == "d":
        raise UsageError("d values must be positive")
    if any(v < 0 for v in values):
        raise UsageError("sigma0 values must be nonnegative")
    res = analysis.truncation_sweep(cfg, args.vary, values)
    table = "param,e_l2,e_h1\n" + "".join(
        f"{_fmt(v)},{_fmt(a)},{_fmt(b)}\n" for v, a, b in res.rows)
    fit = ("norm,c1,c2\n"
           f"l2,{_fmt(res.c1_l2)},{_fmt(res.c2_l2)}\nh1,{_fmt(res.c1_h1)},{_fmt(res.c2_h1)}\n")
    _emit_with_fit(table, fit, out)


def _ladder_table(rows):
    out = ["h,e_l2,e_h1,rate_l2,rate_h1"]
    for h, a, b, ra, rb in rows:
        out.append(",".join(_fmt(v) for v in (h, a, b, ra, rb)))
    return "\n".join(out) + "\n"


def cmd_convergence(args):
    cfg, out = make_config(args)
    hs = _number_list(args.h_list)
    if len(hs) < 3:
        raise UsageError("--h-list needs at least 3 values")
    for h in hs:
        cfg.with_(h=h)  # validates divisibility before any solve
    rows, f2, f1 = analysis.convergence_study(cfg, hs)
    _emit_with_fit(_ladder_table(rows), _fit_lines([("l2", f2), ("h1", f1)]), out)


def cmd_delta_convergence(args):
    cfg, out = make_config(args)
    levels = _number_list(args.levels)
    if len(levels) < 3:
        raise UsageError("--levels needs at least 3 values")
    for v in levels:
        cfg.with_(h=v, delta=v)
    rows, f2, f1 = analysis.delta_convergence_study(cfg, levels)
    _emit_with_fit(_ladder_table(rows), _fit_lines([("l2", f2), ("h1", f1)]), out)


COMMANDS = {
    "dispersion": cmd_dispersion,
    "solve": cmd_solve,
    "sweep": cmd_sweep,
    "convergence": cmd_convergence,
    "delta-convergence": cmd_delta_convergence,
}


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        COMMANDS[args.command](args)
    except NlhelmError as exc:
        sys.stderr.write(f"nlhelm: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        sys.stderr.write(f"nlhelm: invalid input: {exc}\n")
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
