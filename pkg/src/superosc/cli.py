"""Command-line front end: every computation emits CSV (default) or JSON on stdout.

Exit codes: 0 success, 1 domain/usage error (one-line diagnostic on stderr),
2 verification failure.
"""
from __future__ import annotations

import argparse
import csv
import io as _io
import json
import math
import sys
from fractions import Fraction
from typing import Sequence

import numpy as np

from . import approximation as ap
from . import evolution as ev
from . import spectral as sp
from . import verify
from . import weakvalues as wv
from . import wigner as wg
from .core import (
    asymptotic_error,
    build_prototype,
    error_envelope,
    eval_product,
    eval_sum,
    multinomial_moment,
    sup_error,
    taylor_moment,
)
from .errors import DomainError, SuperoscError
from .precision import PrecisionPolicy, prototype_coeffs_exact


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # exit 1 with one line instead of argparse's exit 2
        raise UsageError(message)


# ---------------------------------------------------------------------------
# parsing helpers


def parse_grid(text: str) -> np.ndarray:
    """start:stop:count -> linspace (count >= 1, start <= stop)."""
    parts = text.split(":")
    if len(parts) != 3:
        raise UsageError(f"malformed grid {text!r}: expected start:stop:count")
    try:
        lo, hi, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise UsageError(f"malformed grid {text!r}: non-numeric field") from None
    if count < 1 or lo > hi or not (math.isfinite(lo) and math.isfinite(hi)):
        raise UsageError(f"malformed grid {text!r}: need count >= 1 and start <= stop")
    return np.linspace(lo, hi, count) if count > 1 else np.array([lo])


def parse_number(text: str):
    """Accepts 2, 2.5 or 5/2; fractions stay exact."""
    try:
        return Fraction(text) if "/" in text else float(text)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"not a number: {text!r}") from None


def parse_list(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"malformed list {text!r}") from None


def _policy(args) -> PrecisionPolicy | None:
    if args.precision_bits is None:
        return None
    if args.precision_bits == 0:
        return PrecisionPolicy.machine()
    return PrecisionPolicy.extended(args.precision_bits)


# ---------------------------------------------------------------------------
# output


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _cell(v):
    v = _plain(v)
    return repr(v) if isinstance(v, float) else str(v)


def emit(rows: list[dict], fmt: str, out, meta: dict | None = None) -> None:
    rows = [{k: _plain(v) for k, v in r.items()} for r in rows]
    if meta:
        meta = {k: _plain(v) for k, v in meta.items()}
    if fmt == "json":
        doc = {"rows": rows}
        if meta:
            doc["meta"] = meta
        out.write(json.dumps(doc, sort_keys=False, indent=2, ensure_ascii=False) + "\n")
        return
    if not rows:
        return
    w = csv.writer(out, lineterminator="\n")
    w.writerow(list(rows[0]))
    for r in rows:
        w.writerow([_cell(v) for v in r.values()])


def _c(prefix: str, z) -> dict:
    z = complex(z)
    return {f"re_{prefix}": z.real, f"im_{prefix}": z.imag}


# ---------------------------------------------------------------------------
# commands


def cmd_coeffs(args):
    a = args.a
    exact = prototype_coeffs_exact(args.n, a)
    rows = [{"j": j, "k": float(Fraction(args.n - 2 * j, args.n)), "coeff": float(c),
             "coeff_exact": str(c)} for j, c in enumerate(exact)]
    return rows, None


def cmd_eval(args):
    xs = parse_grid(args.x_grid)
    a = float(args.a)
    if args.form == "product":
        F = eval_product(args.n, a, xs)
    else:
        F = eval_sum(build_prototype(args.n, args.a), xs, _policy(args))
    F = np.atleast_1d(F)
    err = np.abs(F - np.exp(1j * a * xs))
    return [{"x": float(x), "re_F": float(f.real), "im_F": float(f.imag), "abs_err": float(e)}
            for x, f, e in zip(xs, F, err)], None


def cmd_error(args):
    xs = parse_grid(args.x_grid)
    E = np.atleast_1d(error_envelope(args.n, args.a, xs))
    rows = [{"x": float(x), "E_n": float(e), "asymptotic": float(asymptotic_error(args.n, args.a, x))}
            for x, e in zip(xs, E)]
    meta = None
    if args.M is not None:
        meta = {"M": args.M, "sup_error": sup_error(args.n, args.a, args.M)}
    return rows, meta


def cmd_moments(args):
    rows = []
    for p in range(args.p_max + 1):
        t = taylor_moment(args.n, args.a, p)
        row = {"p": p, "re_taylor": str(t.re), "im_taylor": str(t.im)}
        if not args.no_multinomial:
            m = multinomial_moment(args.n, args.a, p)
            row.update({"re_multinomial": str(m.re), "im_multinomial": str(m.im), "match": m == t})
        rows.append(row)
    return rows, None


def cmd_identity_check(args):
    rows = []
    for n in range(1, args.n_max + 1):
        for p in range(args.p_max + 1):
            t = taylor_moment(n, args.a, p)
            m = multinomial_moment(n, args.a, p)
            rows.append({"n": n, "p": p, "re": str(t.re), "im": str(t.im), "match": m == t})
    failed = not all(r["match"] for r in rows)
    return rows, None, (2 if failed else 0)


def _psi(args):
    kind = args.psi
    if kind.startswith("file:"):
        from .io import load_bandlimited
        return load_bandlimited(kind[5:])
    if kind == "ualpha":
        return lambda y: ap.ualpha(args.alpha, y)
    c = ap.corpus(args.B)
    if kind not in c:
        raise UsageError(f"unknown psi {kind!r}; choose from {sorted(c)}, ualpha, file:PATH")
    return c[kind]


def cmd_approx(args):
    xs = parse_grid(args.x_grid)
    psi = _psi(args)
    phi = np.atleast_1d(ap.standard_approx(psi, args.n, args.a, xs, L=args.L, policy=_policy(args)))
    target = np.atleast_1d(psi(xs + float(args.a) * args.L))
    rows = [{"x": float(x), **_c("phi", f), **_c("target", g), "abs_err": abs(complex(f) - complex(g))}
            for x, f, g in zip(xs, phi, target)]
    meta = {}
    if isinstance(psi, ap.BandLimitedFunction):
        meta["bound"] = ap.bandlimited_error_bound(psi, args.n, args.a)
    elif args.psi == "ualpha":
        meta["bound"] = ap.ualpha_bound(args.n, args.a, args.alpha)
    return rows, meta or None


def cmd_dirichlet(args):
    xs = parse_grid(args.x_grid)
    c, lam = parse_list(args.c), parse_list(args.lam)
    data = ap.DirichletData(c=c, lam=lam, m=args.m or len(c), n=args.n)
    got = np.atleast_1d(ap.dirichlet_approx(data, xs, _policy(args)))
    lim = np.atleast_1d(ap.dirichlet_limit(data, xs))
    rows = [{"x": float(x), **_c("approx", g), **_c("limit", l), "abs_err": abs(g - l)}
            for x, g, l in zip(xs, got, lim)]
    M = float(np.max(np.abs(xs)))
    return rows, {"bound": ap.dirichlet_error_bound(data, M), "M": M}


def _state(args, seq) -> ev.EvolvedState:
    law = args.law
    params: dict = {}
    if law in ("modified-p-even", "modified-p-odd", "powered-datum", "oscillator-powered", "formal"):
        if args.p is None:
            raise UsageError(f"--p is required for law {law}")
        params["p"] = args.p
    if law == "powered-datum":
        params["ell"] = args.ell
    if law == "wave":
        params["c"] = args.c
    if law == "symbol-series":
        params["symbol"] = ev.geometric_symbol(args.truncation)
        params["truncation"] = args.truncation
    if law == "driven-oscillator":
        F = args.force
        params["config"] = ev.DrivenOscillatorConfig(f=lambda s: F, quad_tol=args.quad_tol)
    if law == "formal":
        params["a1"] = args.a1
    return ev.EvolvedState(law, seq, params)


def cmd_evolve(args):
    xs = parse_grid(args.x_grid)
    st = _state(args, build_prototype(args.n, args.a))
    pol = _policy(args)
    rows = []
    for x in xs:
        v = complex(st(float(x), args.t, pol))
        try:
            lim = complex(st.limit(float(x), args.t))
        except DomainError:
            lim = complex("nan")
        rows.append({"x": float(x), "t": args.t, **_c("psi", v), **_c("limit", lim),
                     "abs_dev": abs(v - lim)})
    return rows, None


_NAMED_STATES = {"up-x": wv.UP_X, "down-x": wv.DOWN_X, "up-y": wv.UP_Y, "up-z": wv.UP_Z,
                 "down-z": wv.DOWN_Z}
_NAMED_OBS = {"sigma-x": wv.SIGMA_X, "sigma-y": wv.SIGMA_Y, "sigma-z": wv.SIGMA_Z,
              "sigma-xi": wv.sigma_xi()}


def _load(name, table, loader):
    key = name.lower().replace("_", "-")
    if key in table:
        return table[key]
    from . import io
    return getattr(io, loader)(name)


def cmd_weak(args):
    A = _load(args.observable, _NAMED_OBS, "load_observable")
    pre = _load(args.pre, _NAMED_STATES, "load_state")
    post = _load(args.post, _NAMED_STATES, "load_state")
    w = wv.weak_value(A, pre, post)
    rows = [{"eigenvalue": val, "abl_probability": p}
            for val, p in wv.abl_probabilities(A, pre, post)]
    return rows, {"weak_value_re": w.real, "weak_value_im": w.imag}


def cmd_pointer(args):
    model = wv.PointerModel(args.delta)
    qs = parse_grid(args.q_grid)
    if args.single:
        vals = np.atleast_1d(wv.pointer_distribution_single(model, qs))
    else:
        vals = np.atleast_1d(wv.pointer_distribution_ensemble(args.N, model, qs, args.convention))
    rows = [{"q": float(q), "prob": float(v)} for q, v in zip(qs, vals)]
    return rows, {"argmax": float(qs[int(np.argmax(vals))])}


def _window(text: str) -> sp.SpectrumWindow:
    if text == "full":
        return sp.SpectrumWindow.full_line()
    kind, _, val = text.partition(":")
    try:
        if kind == "compact":
            return sp.SpectrumWindow.compact(float(val))
        if kind == "truncated":
            return sp.SpectrumWindow.truncated(float(val))
    except ValueError:
        pass
    raise UsageError(f"malformed window {text!r}: use full, compact:K or truncated:GAMMA")


def cmd_spectral(args):
    win = _window(args.window)
    rows = []
    for n in args.n:
        row = {"n": n, "norm": sp.norm_on_window(n, args.a, win)}
        if win.kind == sp.TRUNCATED:
            row["small_angle_log"] = sp.qn_small_angle_log(n, args.a, win.gamma)
        if args.density:
            from .io import load_density
            row["l2"] = sp.l2_convergence(n, args.a, load_density(args.density), win)
        rows.append(row)
    return rows, None


def cmd_wigner(args):
    ell = parse_number(args.ell)
    if args.what == "column":
        col = wg.wigner_column(ell, args.theta)
        rows = [{"m": float(m), "d": float(d)} for m, d in zip(col.m_values, col.values)]
        return rows, {"signed_sum": wg.signed_sum(ell, args.theta, args.convention),
                      "cos_theta_power": math.cos(args.theta) ** col.two_l,
                      "exact_factorials": col.exact_factorials}
    if args.what == "weak":
        rows = [{"dphi": float(d), **_c("closed", wg.rotation_weak_value(ell, args.theta, d)),
                 **_c("dsum", wg.dsum_weak_value(ell, args.theta, d))}
                for d in parse_grid(args.dphi_grid)]
        return rows, None
    freq, so = wg.offcenter_frequency(args.theta, args.phi0, args.branch)
    return [{"theta": args.theta, "phi0": args.phi0, "frequency": freq, "superoscillating": so}], None


def cmd_verify_all(args):
    only = [int(v) for v in args.only.split(",")] if args.only else None
    if only and any(i not in verify.CHECKS for i in only):
        raise UsageError(f"--only ids must be in 1..{len(verify.CHECKS)}")
    report = verify.verify_all(args.seed, only)
    return report, None, (0 if report["passed"] else 2)


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--precision-bits", type=int, default=None,
                        help="MPFR significand bits; 0 forces machine-compensated; default auto")
    common.add_argument("--output", choices=("csv", "json"), default="csv")
    common.add_argument("--seed", type=int, default=7)
    common.add_argument("--quad-tol", type=float, default=1e-10)

    p = _Parser(prog="superosc", description=__doc__.splitlines()[0], parents=[common])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        s = sub.add_parser(name, help=help_, parents=[common])
        s.set_defaults(func=fn)
        return s

    s = add("coeffs", cmd_coeffs, "coefficients C_j(n, a) and frequencies")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=parse_number, required=True)

    s = add("eval", cmd_eval, "F_n(x, a) over an x grid")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=parse_number, required=True)
    s.add_argument("--x-grid", required=True)
    s.add_argument("--form", choices=("sum", "product"), default="sum")

    s = add("error", cmd_error, "error envelope E_n and its asymptotic estimate")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--x-grid", required=True)
    s.add_argument("--M", type=float, default=None, help="also report sup over [-M, M]")

    s = add("moments", cmd_moments, "exact derivatives at 0")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=parse_number, required=True)
    s.add_argument("--p-max", type=int, default=6)
    s.add_argument("--no-multinomial", action="store_true")

    s = add("identity-check", cmd_identity_check, "multinomial identities over a range")
    s.add_argument("--n-max", type=int, default=6)
    s.add_argument("--p-max", type=int, default=6)
    s.add_argument("--a", type=parse_number, required=True)

    s = add("approx", cmd_approx, "standard approximating sequence")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--x-grid", required=True)
    s.add_argument("--psi", default="fejer", help="fejer, raised-cosine, bump, ualpha or file:PATH")
    s.add_argument("--B", type=float, default=1.0)
    s.add_argument("--alpha", type=float, default=10.0)
    s.add_argument("--L", type=float, default=1.0)

    s = add("dirichlet", cmd_dirichlet, "Dirichlet-series superoscillation")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--c", required=True, help="comma-separated coefficients")
    s.add_argument("--lam", required=True, help="comma-separated frequencies > 1")
    s.add_argument("--m", type=int, default=None)
    s.add_argument("--x-grid", required=True)

    s = add("evolve", cmd_evolve, "closed-form evolution of the prototype datum")
    s.add_argument("--law", choices=[l for l in ev.LAWS], required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--a", type=parse_number, required=True)
    s.add_argument("--t", type=float, required=True)
    s.add_argument("--x-grid", required=True)
    s.add_argument("--p", type=int, default=None)
    s.add_argument("--ell", type=int, default=1)
    s.add_argument("--c", type=float, default=1.0, help="wave speed")
    s.add_argument("--truncation", type=int, default=3)
    s.add_argument("--force", type=float, default=0.0, help="constant driving force")
    s.add_argument("--a1", type=float, default=None)

    s = add("weak", cmd_weak, "weak value and ABL probabilities")
    s.add_argument("--observable", required=True, help="sigma-x|y|z|xi or a matrix file")
    s.add_argument("--pre", required=True, help="up-x, down-x, up-y, up-z, down-z or a state file")
    s.add_argument("--post", required=True)

    s = add("pointer", cmd_pointer, "pointer distributions")
    s.add_argument("--N", type=int, default=1)
    s.add_argument("--delta", type=float, required=True)
    s.add_argument("--q-grid", required=True)
    s.add_argument("--convention", choices=("literal", "binomial"), default="literal")
    s.add_argument("--single", action="store_true", help="single-spin distribution")

    s = add("spectral", cmd_spectral, "window norms and L2 convergence")
    s.add_argument("--n", type=int, nargs="+", action="extend", required=True)
    s.add_argument("--a", type=float, required=True)
    s.add_argument("--window", default="full", help="full, compact:K or truncated:GAMMA")
    s.add_argument("--density", default=None, help="two-column (lam, weight) file")

    s = add("wigner", cmd_wigner, "d-column, rotation weak value, off-centre frequency")
    s.add_argument("--what", choices=("column", "weak", "offcenter"), default="column")
    s.add_argument("--ell", default="1")
    s.add_argument("--theta", type=float, required=True)
    s.add_argument("--convention", choices=(wg.CORRECTED, wg.PRINTED), default=wg.CORRECTED)
    s.add_argument("--dphi-grid", default="0:0.5:6")
    s.add_argument("--phi0", type=float, default=0.0)
    s.add_argument("--branch", choices=("same-state", "flipped-state"), default="same-state")

    s = add("verify-all", cmd_verify_all, "run the acceptance checks, JSON report")
    s.add_argument("--only", default=None, help="comma-separated check ids")
    return p


def _glue_negative_values(argv: Sequence[str]) -> list[str]:
    """'--x-grid -1:1:5' -> '--x-grid=-1:1:5' so argparse does not read a flag."""
    out: list[str] = []
    it = iter(argv)
    for tok in it:
        if tok.startswith("--") and "=" not in tok:
            nxt = next(it, None)
            if nxt is not None and nxt.startswith("-") and len(nxt) > 1 and (nxt[1].isdigit() or nxt[1] == "."):
                out.append(f"{tok}={nxt}")
                continue
            out.append(tok)
            if nxt is not None:
                out.append(nxt)
            continue
        out.append(tok)
    return out


def run(argv: Sequence[str] | None = None, out=None, err=None) -> int:
    out = out or sys.stdout
    err = err or sys.stderr
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = build_parser().parse_args(_glue_negative_values(argv))
        if args.command == "verify-all":
            report, _, code = args.func(args)
            out.write(verify.report_json(report))
            return code
        res = args.func(args)
        rows, meta = res[0], res[1]
        code = res[2] if len(res) > 2 else 0
        emit(rows, args.output, out, meta)
        return code
    except (UsageError, SuperoscError, ValueError, OSError, ZeroDivisionError) as exc:
        msg = " ".join(str(exc).split()) or type(exc).__name__
        err.write(f"superosc: error: {msg}\n")
        return 1


def main() -> None:
    sys.exit(run())


def run_captured(argv: Sequence[str]) -> tuple[int, str, str]:
    """(exit code, stdout, stderr) without touching the real streams."""
    o, e = _io.StringIO(), _io.StringIO()
    code = run(argv, o, e)
    return code, o.getvalue(), e.getvalue()
