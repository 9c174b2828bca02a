"""``sphere-eq``: reproducible experiments and the one-shot verification run.

Machine-readable output (CSV or JSON) goes to ``--out`` or stdout; the short
human-readable summary goes to stderr. Every report embeds a manifest with the
command, its parameters, the package version and a UTC timestamp; apart from
the timestamp line, identical command lines give identical bytes.

Exit codes: 0 success, 1 failed acceptance criterion, 2 input error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from . import __version__
from .config import (
    BIQUADRATIC,
    BiquadraticShift,
    InversePower,
    Linear,
    Log,
    NegativePower,
    energy,
    fingerprint,
    read_config,
    write_config,
)
from .errors import SphereEqError

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


def _num(v):
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return "%.17g" % v
    if v is None:
        return ""
    return str(v)


def _json_val(v):
    if isinstance(v, np.ndarray):
        return [_json_val(x) for x in v]
    if isinstance(v, (np.floating, np.integer, np.bool_)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_json_val(x) for x in v]
    return v


def manifest(command: str, params: dict) -> dict:
    return {
        "command": command,
        "parameters": {k: _json_val(v) for k, v in sorted(params.items())},
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
    }


def render(man: dict, header: list, rows: list, fmt: str) -> str:
    """CSV with ``#`` manifest lines, or a JSON document ``{manifest, rows}``."""
    if fmt == "json":
        doc = {"manifest": man, "rows": [{h: _json_val(v) for h, v in zip(header, r)} for r in rows]}
        return json.dumps(doc, indent=2) + "\n"
    buf = io.StringIO()
    for key in ("command", "parameters", "version", "timestamp"):
        val = man[key] if key != "parameters" else json.dumps(man[key], sort_keys=True)
        buf.write(f"# {key}: {val}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_num(v) for v in r])
    return buf.getvalue()


def emit(args, command: str, params: dict, header: list, rows: list) -> None:
    text = render(manifest(command, params), header, rows, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _fmt_fp(f) -> str:
    return ";".join("%.17g" % v for v in f)


# ---------------------------------------------------------------------------
# commands


POTENTIALS = {
    "biquadratic": lambda a: BIQUADRATIC if a is None else BiquadraticShift(a),
    "linear": lambda a: Linear(),
    "log": lambda a: Log(),
    "inverse-power": lambda a: InversePower(1.0 if a is None else a),
    "negative-power": lambda a: NegativePower(1.0 if a is None else a),
}


def cmd_energy(args) -> int:
    from .spectral import spectral_data, spectral_energy

    cfg = read_config(args.file)
    pot = POTENTIALS[args.potential](args.a)
    e = energy(cfg, pot)
    rows = [("energy", e)]
    if pot == BIQUADRATIC:
        sd = spectral_data(cfg)
        es = spectral_energy(sd, cfg.n, cfg.m)
        rows += [("spectral_energy", es), ("difference", abs(e - es))]
        rows += [(f"lambda_{k + 1}", v) for k, v in enumerate(sd.lambdas)]
        rows += [(f"centroid_{k + 1}", v) for k, v in enumerate(sd.centroid)]
    rows.append(("fingerprint", _fmt_fp(fingerprint(cfg))))
    params = {"file": str(args.file), "potential": args.potential, "a": args.a}
    emit(args, "energy", params, ["quantity", "value"], rows)
    say("  ".join(f"{k}={_num(v)}" for k, v in rows[:3]))
    return EXIT_OK


def cmd_verify(args) -> int:
    from .acceptance import run_all

    cert = None
    if args.certificate:
        raw = json.loads(Path(args.certificate).read_text())
        cert = {int(k): int(v) for k, v in raw.items()}
    results = run_all(seed=args.seed, quick=args.quick, certificate=cert, progress=lambda r: say(r.line()))
    rows = [(r.number, r.name, r.ok, r.seconds, r.detail) for r in results]
    params = {"seed": args.seed, "quick": args.quick, "certificate": args.certificate}
    if args.out:
        emit(args, "verify", params, ["criterion", "name", "passed", "seconds", "detail"], rows)
    failed = [r for r in results if not r.ok]
    if failed:
        say("FAILED: " + ", ".join(f"{r.number} ({r.name})" for r in failed))
        return EXIT_FAIL
    say(f"all {len(results)} criteria passed")
    return EXIT_OK


def cmd_search(args) -> int:
    from .search import SearchParams, multistart

    params = SearchParams(starts=args.starts, seed=args.seed, residual_tol=args.tol or 1e-9)
    cat = multistart(params)
    rows = [(e.label, e.energy, e.residual, e.count, _fmt_fp(e.fingerprint)) for e in cat.entries]
    rows += [(u.label + "_UNCONVERGED", u.energy, u.residual_norm, 1, _fmt_fp(u.fingerprint)) for u in cat.unconverged]
    man = {"starts": args.starts, "seed": args.seed, "tol": params.residual_tol}
    emit(args, "search", man, ["label", "energy", "residual", "count", "fingerprint"], rows)
    best = args.best or (str(Path(args.out).with_suffix(".best.json")) if args.out else None)
    if best and cat.best is not None:
        write_config(cat.best, best)
    say(f"{args.starts} starts: " + ", ".join(f"{e.label} x{e.count} E={e.energy:.12g}" for e in cat.entries))
    say(f"unconverged {len(cat.unconverged)}; global minimum {cat.min_energy!r}")
    return EXIT_OK


def cmd_special_case(args) -> int:
    from .polynomials import deflate_power, deg26_certificate, real_roots
    from .special_case import asymmetric_branch_certificate, check_elimination_factorization, solve_symmetric_branch

    rows = []
    for s in solve_symmetric_branch():
        rows.append(("solution", s.label, s.r, s.enclosure[0], s.enclosure[1], s.x, s.energy))
    cert = deg26_certificate()
    positive = all(c >= 0 for c in cert.coefficients)
    roots = real_roots(deflate_power(cert, 4))
    rows.append(("certificate", "deg26_positive", positive, None, None, None, None))
    rows.append(("certificate", "deg26_real_roots", len(roots), None, None, None, None))
    rows.append(("certificate", "elimination_ratio_spread", check_elimination_factorization(), None, None, None, None))
    rep = asymmetric_branch_certificate(starts=args.starts, seed=args.seed, rel_tol=args.tol or 1e-13)
    rows.append(("multistart", "starts", rep.starts, None, None, None, None))
    rows.append(("multistart", "converged", rep.converged, None, None, None, None))
    rows.append(("multistart", "asymmetric", len(rep.asymmetric), None, None, None, None))
    man = {"starts": args.starts, "seed": args.seed, "tol": args.tol or 1e-13}
    emit(args, "special-case", man, ["kind", "name", "value", "lo", "hi", "x", "energy"], rows)
    for r in rows:
        if r[0] == "solution":
            say(f"{r[1]}: r = {r[2]!r} in [{r[3]!r}, {r[4]!r}], x = {r[5]!r}, E = {r[6]!r}")
    say(f"degree-26 coefficients positive: {positive}; real roots after deflation: {len(roots)}")
    say(f"asymmetric search: {rep.converged}/{rep.starts} converged, {len(rep.asymmetric)} asymmetric")
    return EXIT_OK


def cmd_cauchy(args) -> int:
    from .cauchy import run_experiment

    records, rejected = run_experiment(args.instances, seed=args.seed)
    rows = [
        (r.seed, r.n, r.m, r.scaled_magnitude, r.corollary_residual, r.kind, r.rank_first_columns) for r in records
    ]
    header = ["seed", "n", "m", "scaled_magnitude", "corollary_residual", "kind", "rank_first_columns"]
    emit(args, "cauchy", {"instances": args.instances, "seed": args.seed}, header, rows)
    cors = [r.corollary_residual for r in records if r.corollary_residual is not None]
    say(
        f"{len(records)} instances, {rejected} inadmissible draws skipped; "
        f"min scaled |det| {min(r.scaled_magnitude for r in records):.3e}; "
        f"min least-squares residual {min(cors) if cors else float('nan'):.3e}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return v


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sphere-eq", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0)
    common.add_argument("--out", help="write the report here instead of stdout")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--tol", type=float, default=None, help="convergence tolerance where one applies")
    common.add_argument("--quick", action="store_true", help="reduced counts (100 starts / 100 instances)")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("energy", parents=[common], help="energy, spectral energy and fingerprint of a file")
    e.add_argument("file")
    e.add_argument("--potential", choices=sorted(POTENTIALS), default="biquadratic")
    e.add_argument("--a", type=float, default=None, help="potential parameter")
    e.set_defaults(func=cmd_energy)

    v = sub.add_parser("verify", parents=[common], help="run the acceptance suite")
    v.add_argument("--certificate", help="JSON {power: coefficient} replacing the degree-26 table")
    v.set_defaults(func=cmd_verify)

    s = sub.add_parser("search", parents=[common], help="multistart descent catalog")
    s.add_argument("--starts", type=_positive, default=10_000)
    s.add_argument("--best", help="write the lowest-energy configuration here")
    s.set_defaults(func=cmd_search)

    sc = sub.add_parser("special-case", parents=[common], help="branch solutions and certificates")
    sc.add_argument("--starts", type=_positive, default=10_000)
    sc.set_defaults(func=cmd_special_case)

    c = sub.add_parser("cauchy", parents=[common], help="Cauchy-type determinant experiments")
    c.add_argument("--instances", type=_positive, default=1_000)
    c.set_defaults(func=cmd_cauchy)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.quick:
        if hasattr(args, "starts"):
            args.starts = min(args.starts, 100)
        if hasattr(args, "instances"):
            args.instances = min(args.instances, 100)
    try:
        return args.func(args)
    except (SphereEqError, ValueError, OSError, KeyError) as exc:
        say(f"error: {exc}")
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
