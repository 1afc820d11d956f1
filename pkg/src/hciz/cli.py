"""Command-line interface: ``hciz <command> ...``.

Every command prints its result as JSON (default), CSV or an aligned table,
and exits with the code attached to the error class it hit.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from typing import Sequence

import mpmath

from .errors import ConsistencyError, DomainError, HCIZError
from .exact_algebra import format_rational, monomial_key_text, parse_rational

__all__ = ["main", "build_parser"]


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated numbers, got {text!r}") from None


def _ints(text: str) -> list[int]:
    try:
        return [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise DomainError(f"expected comma-separated integers, got {text!r}") from None


def _rationals(text: str) -> list[Fraction]:
    return [parse_rational(x) for x in text.split(",") if x.strip()]


def _digits(bits: int) -> int:
    return max(15, int(bits * 0.30103) - 2)


def _policy(args):
    from .hciz_exact import PrecisionPolicy
    return PrecisionPolicy(bits=args.prec_bits, rel_tol=args.tol, max_bits=max(args.max_bits, args.prec_bits))


def _estimate_row(est, bits):
    return {
        "value": mpmath.nstr(est.value, _digits(bits)),
        "error": mpmath.nstr(est.error, 3),
        "method": est.method,
        "bits": est.bits,
    }


# -- commands ------------------------------------------------------------------

def cmd_eval(args):
    from .hciz_exact import SpectralData, eval_unitary_integral
    d = SpectralData(_floats(args.a), _floats(args.b), args.s)
    return [_estimate_row(eval_unitary_integral(d, _policy(args), args.method), args.prec_bits)]


def cmd_eval_rect(args):
    from .hciz_exact import RectangularData, eval_rectangular
    d = RectangularData(_floats(args.a), _floats(args.b), args.s, args.n1, args.n2)
    return [_estimate_row(eval_rectangular(d, _policy(args), args.method), args.prec_bits)]


def cmd_eval_chain(args):
    from .hciz_exact import eval_chain
    sizes = _ints(args.sizes)
    est = eval_chain(len(sizes), sizes, _floats(args.a), _floats(args.b), args.s, _policy(args), args.method)
    return [_estimate_row(est, args.prec_bits)]


def _poly_rows(order, method, poly):
    return [{"order": order, "method": method, "monomial": k, "coefficient": v}
            for k, v in poly.to_text_terms()]


def cmd_free_energy(args):
    if args.order < 1:
        raise DomainError("order must be >= 1")
    rows = []
    if args.cache:
        from .cache import compute_and_cache
        for n in range(1, args.order + 1):
            rec = compute_and_cache(n, args.method, args.cache, workers=args.threads)
            rows += _poly_rows(n, args.method, rec.poly)
        return rows
    if args.method == "enum":
        from .planar_enum import free_energy_enum
        polys = free_energy_enum(args.order, workers=args.threads)
    else:
        from .hciz_series import free_energy_oracle
        polys = free_energy_oracle(args.order)
    for n, poly in enumerate(polys, start=1):
        rows += _poly_rows(n, args.method, poly)
    return rows


def cmd_toda_check(args):
    from .toda import TodaTimes, toda_check
    times = TodaTimes.parse(args.times)
    res = toda_check(args.n, times, args.order)
    rows = [{"power_of_inverse_hbar": k, "residual": format_rational(c)} for k, c in enumerate(res.coeffs)]
    if not res.is_zero():
        raise ConsistencyError(
            "Toda identity fails: " + ", ".join(f"x^{r['power_of_inverse_hbar']}: {r['residual']}"
                                                for r in rows if r["residual"] != "0"))
    return rows


def cmd_dispersionless(args):
    from .dispersionless import diagonal_series, free_energy_one_sided, psi_one_sided_series
    if args.case == "diagonal":
        psi, F = diagonal_series(args.n, args.order)
        return [{"k": k, "psi": format_rational(psi[k]), "F": format_rational(F[k])} for k in range(args.order + 1)]
    F = free_energy_one_sided(args.n, args.order)
    psi = psi_one_sided_series(args.n, args.order)
    rows = [{"series": "F", "monomial": k, "coefficient": v} for k, v in F.to_text_terms()]
    rows += [{"series": "psi", "monomial": k, "coefficient": v} for k, v in psi.to_text_terms()]
    return rows


def cmd_mc(args):
    from .haar_mc import mc_estimate
    from .hciz_exact import SpectralData
    a, b = _floats(args.a), _floats(args.b)
    if args.n is not None and (len(a) != args.n or len(b) != args.n):
        raise DomainError(f"--a and --b must have {args.n} entries")
    est = mc_estimate(SpectralData(a, b, args.s), args.samples, args.seed, workers=args.workers)
    return [{"mean": repr(est.mean), "stderr": repr(est.stderr), "samples": est.samples, "seed": est.seed}]


def cmd_cumulants(args):
    from .symfun import moments_to_free_cumulants
    moments = _rationals(args.moments)
    if args.q < 1:
        raise DomainError("q must be >= 1")
    # unspecified higher moments are zero
    moments = moments + [Fraction(0)] * (args.q - len(moments))
    phis = moments_to_free_cumulants(moments, args.q)
    return [{"q": q, "free_cumulant": format_rational(v)} for q, v in enumerate(phis, start=1)]


# -- output ----------------------------------------------------------------------

def emit(command: str, rows: list[dict], fmt: str, out=None) -> None:
    out = out or sys.stdout
    if fmt == "json":
        json.dump({"command": command, "result": rows}, out, indent=2)
        out.write("\n")
        return
    columns = list(rows[0]) if rows else []
    if fmt == "csv":
        writer = csv.DictWriter(out, fieldnames=columns, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    cells = [[str(c) for c in columns]] + [[str(r[c]) for c in columns] for r in rows]
    widths = [max(len(row[i]) for row in cells) for i in range(len(columns))]
    for row in cells:
        out.write("  ".join(v.ljust(w) for v, w in zip(row, widths)).rstrip() + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hciz", description="Unitary matrix integrals: exact values, series and checks.")
    parser.add_argument("--format", choices=("json", "csv", "pretty"), default="json")
    sub = parser.add_subparsers(dest="command", required=True)

    def precision(p):
        p.add_argument("--prec-bits", type=int, default=128)
        p.add_argument("--tol", type=float, default=1e-15, help="target relative error")
        p.add_argument("--max-bits", type=int, default=4096, help="give up beyond this precision")
        p.add_argument("--method", choices=("auto", "generic", "confluent"), default="auto")

    p = sub.add_parser("eval", help="exact unitary integral")
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--s", type=float, required=True)
    precision(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("eval-rect", help="exact rectangular integral")
    p.add_argument("--n1", type=int, required=True)
    p.add_argument("--n2", type=int, required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--s", type=float, required=True)
    precision(p)
    p.set_defaults(func=cmd_eval_rect)

    p = sub.add_parser("eval-chain", help="exact chain integral")
    p.add_argument("--sizes", required=True)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--s", type=float, required=True)
    precision(p)
    p.set_defaults(func=cmd_eval_chain)

    p = sub.add_parser("free-energy", help="planar free energy coefficients F_1..F_order")
    p.add_argument("--order", type=int, required=True)
    p.add_argument("--method", choices=("enum", "oracle"), default="enum")
    p.add_argument("--cache")
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_free_energy)

    p = sub.add_parser("toda-check", help="verify the Toda lattice equation order by order")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, default=6)
    p.add_argument("--times", default="")
    p.set_defaults(func=cmd_toda_check)

    p = sub.add_parser("dispersionless", help="closed-form large-N series")
    p.add_argument("--case", choices=("one-sided", "diagonal"), required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--order", type=int, required=True)
    p.set_defaults(func=cmd_dispersionless)

    p = sub.add_parser("mc", help="Monte Carlo estimate over Haar unitaries")
    p.add_argument("--n", type=int)
    p.add_argument("--a", required=True)
    p.add_argument("--b", required=True)
    p.add_argument("--s", type=float, required=True)
    p.add_argument("--samples", type=int, default=100000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("cumulants", help="free cumulants from moments")
    p.add_argument("--moments", required=True)
    p.add_argument("--q", type=int, required=True)
    p.set_defaults(func=cmd_cumulants)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        rows = args.func(args)
    except HCIZError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.exit_code
    emit(args.command, rows, args.format)
    return 0


if __name__ == "__main__":
    sys.exit(main())
