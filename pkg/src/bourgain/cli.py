"""Command-line interface.

Exit status: 0 on success, 1 when the result is inadmissible or
infeasible, 2 on invalid input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Any, Sequence

from . import __version__
from .engine import (
    BoundCertificate,
    ParameterTuple,
    bound_text,
    certify,
    decimal_text,
    format_fraction,
    lower_text,
)
from .errors import BourgainError
from .estimate import (
    CLOSED_FORM_EPSILON,
    EstimateConfig,
    alpha_for_range,
    alpha_general,
    closed_form_value,
    o_min,
)
from .netmeasure import DigitalSet, frostman, net_content, parse_exponent, verify_frostman
from .rigor import dv_from_fraction
from .search import (
    LARGE_N_EPSILON,
    SearchSpec,
    certify_reference_rows,
    large_n_preset,
    large_n_threshold,
    reference_row,
    resolve_jobs,
    run_search,
)

CSV_HEADER = ["n", "m", "eta", "h", "d", "alpha", "gamma", "lambda", "rho", "bound"]
EXIT_OK, EXIT_INADMISSIBLE, EXIT_INPUT = 0, 1, 2


def _fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _default_epsilon(n: int) -> Fraction:
    return CLOSED_FORM_EPSILON if n in (3, 4) else LARGE_N_EPSILON


def _default_source(n: int) -> str:
    return "closed" if n in (3, 4) else "general"


def _alpha(n: int, m: int, source: str, epsilon: Fraction):
    if source == "closed":
        if epsilon != CLOSED_FORM_EPSILON:
            raise BourgainError("config: the closed forms need --epsilon 1/1000000")
        v = closed_form_value(n, m)
        return dv_from_fraction(v), format_fraction(v)
    enc, _ = alpha_for_range(n, m, epsilon)
    return enc, decimal_text(enc.hi, 8, "up")


def _row_values(cert: BoundCertificate, alpha_text: str) -> list[str]:
    p = cert.params
    return [
        str(p.n),
        str(p.m),
        format_fraction(p.eta),
        str(p.h),
        str(p.d),
        alpha_text,
        decimal_text(cert.gamma.hi, 8, "up"),
        decimal_text(cert.lam.lo, 8, "down"),
        lower_text(cert.rho, cert.log_rho, 8),
        bound_text(cert, 8),
    ]


def _csv(rows: list[list[str]]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    return buf.getvalue()


def _json(command: str, result: Any) -> str:
    return json.dumps({"version": __version__, "command": command, "result": result}, indent=2, sort_keys=True) + "\n"


def _certificate_text(cert: BoundCertificate, alpha_text: str) -> str:
    p = cert.params
    lines = [
        f"parameters: n={p.n} m={p.m} eta={format_fraction(p.eta)} h={p.h} d={p.d} "
        f"epsilon={format_fraction(p.epsilon)}",
        f"alpha     = {alpha_text}",
    ]
    for name, enc in (("V", cert.V), ("Pi", cert.Pi), ("gamma", cert.gamma), ("lambda", cert.lam),
                      ("rho", cert.rho), ("log rho", cert.log_rho), ("bound", cert.bound),
                      ("log bound", cert.log_bound)):
        lines.append(f"{name:<9} in [{enc.lo!r}, {enc.hi!r}]")
    lines.append(f"eta admissible: {cert.eta_admissible}")
    lines.append(f"prelemma verified: {cert.prelemma_verified}")
    if cert.admissible:
        lines.append(f"admissible: b_{p.n} >= {bound_text(cert)}")
    else:
        lines.append("admissible: False (" + ", ".join(cert.reasons) + ")")
    return "\n".join(lines) + "\n"


# commands ----------------------------------------------------------------


def cmd_alpha(args) -> tuple[str, int]:
    n, m = args.n, args.m
    if args.s is not None:
        enc, k = o_min_alpha(n, m, args.s)
        result = {"n": n, "m": m, "s": format_fraction(args.s), "k": k, "alpha_lo": enc.lo, "alpha_hi": enc.hi}
        text = f"alpha(n={n}, m={m}, s={format_fraction(args.s)}) in [{enc.lo!r}, {enc.hi!r}] (k={k})\n"
    else:
        eps = args.epsilon if args.epsilon is not None else _default_epsilon(n)
        source = args.alpha_source or _default_source(n)
        enc, shown = _alpha(n, m, source, eps)
        result = {"n": n, "m": m, "epsilon": format_fraction(eps), "source": source,
                  "alpha": shown, "alpha_lo": enc.lo, "alpha_hi": enc.hi}
        text = f"alpha(n={n}, m={m}, s in ({format_fraction(n - eps)}, {n}]) = {shown} [{source}]\n"
    if args.format == "json":
        return _json("alpha", result), EXIT_OK
    if args.format == "csv":
        keys = list(result)
        return ",".join(keys) + "\n" + ",".join(str(result[k]) for k in keys) + "\n", EXIT_OK
    return text, EXIT_OK


def o_min_alpha(n: int, m: int, s: Fraction):
    cfg = EstimateConfig(n, m, s)
    return alpha_general(cfg), o_min(cfg)[1]


def cmd_bound(args) -> tuple[str, int]:
    eps = args.epsilon if args.epsilon is not None else _default_epsilon(args.n)
    source = args.alpha_source or _default_source(args.n)
    p = ParameterTuple(args.n, args.m, args.eta, args.h, args.d, eps)
    alpha, alpha_text = _alpha(args.n, args.m, source, eps)
    cert = certify(p, alpha)
    code = EXIT_OK if cert.admissible else EXIT_INADMISSIBLE
    if args.format == "json":
        return _json("bound", cert.to_dict()), code
    if args.format == "csv":
        return _csv([_row_values(cert, alpha_text)]), code
    return _certificate_text(cert, alpha_text), code


def _table_certs(args) -> list[tuple[BoundCertificate, str]]:
    if args.m_from > args.m_to:
        raise BourgainError("config: --m-from exceeds --m-to")
    ms = tuple(range(args.m_from, args.m_to + 1))
    source = args.alpha_source or _default_source(args.n)
    eps = args.epsilon if args.epsilon is not None else _default_epsilon(args.n)
    out = []
    if args.reference_params:
        rows = [reference_row(args.n, m) for m in ms]
        for r in certify_reference_rows(rows, source):
            out.append((r.certificate, _alpha(r.n, r.m, source, eps)[1]))
        return out
    spec = SearchSpec(args.n, ms, d_max=args.d_max, eta_decimals=args.eta_decimals,
                      alpha_source=source, epsilon=eps, explore_next_d=args.explore_next_d,
                      jobs=resolve_jobs(args.jobs))
    for res in run_search(spec):
        if res.certificate is None:
            raise _Infeasible(f"no admissible tuple for n={res.n}, m={res.m}")
        out.append((res.certificate, _alpha(res.n, res.m, source, eps)[1]))
    return out


class _Infeasible(Exception):
    pass


def _emit_certs(command: str, args, certs) -> tuple[str, int]:
    code = EXIT_OK if all(c.admissible for c, _ in certs) else EXIT_INADMISSIBLE
    fmt = args.format or "csv"
    if fmt == "json":
        return _json(command, [c.to_dict() for c, _ in certs]), code
    if fmt == "text":
        return "".join(_certificate_text(c, a) + "\n" for c, a in certs), code
    return _csv([_row_values(c, a) for c, a in certs]), code


def cmd_table(args) -> tuple[str, int]:
    try:
        certs = _table_certs(args)
    except _Infeasible as exc:
        return f"infeasible: {exc}\n", EXIT_INADMISSIBLE
    return _emit_certs("table", args, certs)


def cmd_search(args) -> tuple[str, int]:
    args.m_from = args.m_to = args.m
    args.reference_params = False
    try:
        certs = _table_certs(args)
    except _Infeasible as exc:
        return f"infeasible: {exc}\n", EXIT_INADMISSIBLE
    if args.format is None:
        args.format = "text"
    return _emit_certs("search", args, certs)


def cmd_large_n(args) -> tuple[str, int]:
    if args.scan_to is not None:
        n0 = large_n_threshold(args.scan_to, start=args.n)
        result = {"start": args.n, "scan_to": args.scan_to, "threshold": n0}
        text = (f"first admissible n in [{args.n}, {args.scan_to}]: {n0}\n" if n0 is not None
                else f"no admissible n in [{args.n}, {args.scan_to}]\n")
        code = EXIT_OK if n0 is not None else EXIT_INADMISSIBLE
        return (_json("large-n", result) if args.format == "json" else text), code
    rep = large_n_preset(args.n)
    code = EXIT_OK if rep.admissible else EXIT_INADMISSIBLE
    if args.format == "json":
        return _json("large-n", rep.to_dict()), code
    lines = [
        f"n={rep.n}: m={rep.n}, h=1, d={2 * rep.n - 3}, epsilon=1/2",
        f"V in [{rep.V.lo!r}, {rep.V.hi!r}], V - (1 - e^-2)^(1/2) in [{rep.v_gap.lo!r}, {rep.v_gap.hi!r}]",
    ]
    if rep.certificate is not None:
        c = rep.certificate
        lines.append(f"gamma in [{c.gamma.lo!r}, {c.gamma.hi!r}]")
        lines.append(f"log bound in [{c.log_bound.lo!r}, {c.log_bound.hi!r}]")
    if rep.admissible:
        lines.append(f"admissible: b_{rep.n} >= {bound_text(rep.certificate)}")
        lines.append(f"0.6 n^(-2n(n-1))/ln(n) rate holds: {rep.rate_claim_holds}")
    else:
        lines.append("admissible: False (" + ", ".join(rep.reasons) + ")")
    return "\n".join(lines) + "\n", code


def cmd_netcontent(args) -> tuple[str, int]:
    E = DigitalSet.load(args.input)
    s = parse_exponent(args.s)
    v = net_content(E, s, args.delta_depth)
    result = {"s": str(s), "delta_depth": args.delta_depth, "content": v.to_json(), "content_float": float(v),
              "field": {"base": v.field.base, "degree": v.field.degree}}
    if args.format == "json":
        return _json("netcontent", result), EXIT_OK
    return f"M^{s}_(m^-{args.delta_depth}) = {v}  (~{float(v)!r})\n", EXIT_OK


def cmd_frostman(args) -> tuple[str, int]:
    K = DigitalSet.load(args.input)
    s = parse_exponent(args.s)
    mu = frostman(K, s)
    result: dict[str, Any] = {"measure": mu.to_json(), "outside_hypothesis": mu.outside_hypothesis}
    code = EXIT_OK
    report = None
    if args.verify:
        report = verify_frostman(mu, s)
        result["report"] = report.to_json()
        code = EXIT_OK if report.ok else EXIT_INADMISSIBLE
    if args.format == "json":
        return _json("frostman", result), code
    total = mu.total()
    lines = [f"total mass = {total}  (~{float(total)!r}) on {len(mu.mass)} cubes"]
    if mu.outside_hypothesis:
        lines.append(f"note: s={s} <= n-1, outside the range where the construction is guaranteed")
    if report is not None:
        lines.append(f"content M^s_inf = {report.content}  (~{float(report.content)!r})")
        lines.append(f"violations: {len(report.violations)}, tight cubes: {len(report.tight)}")
        lines.append(f"verified: {report.ok}")
    return "\n".join(lines) + "\n", code


# parser ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default=None)
    common.add_argument("--output", help="write to this file instead of stdout")
    common.add_argument("--jobs", type=int, default=None, help="worker processes (default $BOURGAIN_JOBS or all cores)")

    source = argparse.ArgumentParser(add_help=False)
    source.add_argument("--alpha-source", choices=("closed", "general"), default=None)
    source.add_argument("--epsilon", type=_fraction, default=None)

    search_opts = argparse.ArgumentParser(add_help=False)
    search_opts.add_argument("--d-max", type=int, default=12)
    search_opts.add_argument("--eta-decimals", type=int, default=None)
    search_opts.add_argument("--explore-next-d", action="store_true")

    parser = argparse.ArgumentParser(prog="bourgain", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("alpha", parents=[common, source], help="constant of the harmonic measure estimate")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--s", type=_fraction, default=None, help="single exponent instead of a range")
    p.set_defaults(func=cmd_alpha)

    p = sub.add_parser("bound", parents=[common, source], help="certify one parameter tuple")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--eta", type=_fraction, required=True)
    p.add_argument("--h", type=int, required=True)
    p.add_argument("--d", type=int, required=True)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("table", parents=[common, source, search_opts], help="reproduce the reference table")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m-from", type=int, required=True)
    p.add_argument("--m-to", type=int, required=True)
    p.add_argument("--reference-params", action="store_true",
                   help="certify the printed (eta, h, d) instead of searching")
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("search", parents=[common, source, search_opts], help="optimize (d, eta, h) for one m")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("large-n", parents=[common], help="preset parameters for large dimension")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--scan-to", type=int, default=None, help="find the first admissible n up to this value")
    p.set_defaults(func=cmd_large_n)

    p = sub.add_parser("netcontent", parents=[common], help="net content of a digital set")
    p.add_argument("--input", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--delta-depth", type=int, default=0)
    p.set_defaults(func=cmd_netcontent)

    p = sub.add_parser("frostman", parents=[common], help="Frostman measure of a digital set")
    p.add_argument("--input", required=True)
    p.add_argument("--s", required=True)
    p.add_argument("--verify", action="store_true")
    p.set_defaults(func=cmd_frostman)
    return parser


def run(argv: Sequence[str] | None = None) -> tuple[int, str]:
    """Parse and execute; returns ``(exit status, emitted text)``."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0), ""
    if args.command not in ("table", "search") and args.format is None:
        args.format = "text"
    try:
        text, code = args.func(args)
    except (BourgainError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT, ""
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    return code, text


def main(argv: Sequence[str] | None = None) -> int:
    return run(argv)[0]


if __name__ == "__main__":
    sys.exit(main())
