"""Command-line interface.

Exit codes: 0 success or affirmative verdict, 1 negative verdict, 2 usage
or input error. Every output embeds a run manifest: a leading ``#`` line
in CSV and interleaver files, a ``manifest`` key in JSON.
"""

from __future__ import annotations

import argparse
import csv
import datetime as _dt
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from typing import Sequence

import numpy as np

from . import __version__
from .interleave import (
    ConstructionError, all_pass, format_interleaver, generate_s_random, is_mcf,
    load_interleaver, spread_factor, spread_upper_bound,
)
from .parwin import DIRECTIONS, trace_access
from .ppcore import (
    DomainError, Interleaver, PolySpec, compose, count_quadratic_pps, enumerate_quadratic_pps,
    factorize, inverse, is_pp_general, is_quadratic_pp, materialize, quadratic_inverses,
    quadratic_pp_case,
)
from .turbo import FER_COLUMNS, SimConfig, dmin_upper_bound, fer_rows, run_fer


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    subcommand: str
    params: dict
    seed: int
    version: str
    timestamp: str

    @classmethod
    def create(cls, subcommand: str, params: dict, seed: int) -> "RunManifest":
        # SOURCE_DATE_EPOCH pins the timestamp so reruns are byte-identical
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        when = (_dt.datetime.fromtimestamp(int(epoch), _dt.timezone.utc) if epoch
                else _dt.datetime.now(_dt.timezone.utc))
        return cls(subcommand, params, seed, __version__, when.strftime("%Y-%m-%dT%H:%M:%SZ"))

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True)


# ---------------------------------------------------------------------------
# Output helpers
# ---------------------------------------------------------------------------

def _fmt_value(v):
    if isinstance(v, float):
        return repr(v) if math.isfinite(v) else str(v)
    return v


def render(rows: list[dict], manifest: RunManifest, fmt: str, columns: Sequence[str] | None = None,
           extra: dict | None = None) -> str:
    if fmt == "json":
        doc = {"manifest": asdict(manifest), "rows": rows}
        if extra:
            doc.update(extra)
        return json.dumps(doc, indent=2, sort_keys=False) + "\n"
    columns = list(columns or (rows[0].keys() if rows else []))
    buf = io.StringIO()
    buf.write(f"# manifest: {manifest.to_json()}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([_fmt_value(r.get(c, "")) for c in columns])
    return buf.getvalue()


def emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------

def _int(tok: str, what: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise UsageError(f"{what} must be an integer, got {tok!r}") from None


def _coeffs(tok: str) -> tuple[int, ...]:
    return tuple(_int(t, "coefficient") for t in tok.split(",") if t.strip())


def parse_source(tokens: Sequence[str], seed: int = 0) -> tuple[Interleaver, dict]:
    """Build an interleaver from ``qpp N f1 f2``, ``poly N c1,c2,...``,
    ``srandom N S [seed]``, ``identity N`` or ``file PATH``."""
    if not tokens:
        raise UsageError("missing interleaver source")
    kind, args = tokens[0], list(tokens[1:])
    if kind == "qpp":
        if len(args) != 3:
            raise UsageError("usage: qpp N f1 f2")
        N, f1, f2 = (_int(a, "qpp argument") for a in args)
        spec = PolySpec.quadratic(N, f1 % N, f2 % N)
        return materialize(spec), {"kind": "qpp", "N": N, "f1": f1, "f2": f2}
    if kind == "poly":
        if len(args) != 2:
            raise UsageError("usage: poly N c1,c2,...")
        N = _int(args[0], "N")
        spec = PolySpec(N, tuple(c % N for c in _coeffs(args[1])))
        return materialize(spec), {"kind": "poly", "N": N, "coeffs": list(spec.coeffs)}
    if kind == "srandom":
        if len(args) not in (2, 3):
            raise UsageError("usage: srandom N S [seed]")
        N, S = _int(args[0], "N"), _int(args[1], "S")
        s = _int(args[2], "seed") if len(args) == 3 else seed
        return generate_s_random(N, S, s), {"kind": "srandom", "N": N, "S": S, "seed": s}
    if kind == "identity":
        if len(args) != 1:
            raise UsageError("usage: identity N")
        N = _int(args[0], "N")
        return Interleaver.identity(N), {"kind": "identity", "N": N}
    if kind == "file":
        if len(args) != 1:
            raise UsageError("usage: file PATH")
        try:
            pi = load_interleaver(args[0])
        except OSError as exc:
            raise UsageError(f"cannot read {args[0]}: {exc.strerror}") from None
        return pi, {"kind": "file", "path": args[0], "N": pi.N}
    raise UsageError(f"unknown interleaver source {kind!r}")


def parse_grid(text: str) -> list[float]:
    """``a:b:step`` (inclusive) or a comma-separated list."""
    text = text.strip()
    try:
        if ":" in text:
            a, b, step = (float(v) for v in text.split(":"))
            if step <= 0:
                raise UsageError("grid step must be positive")
            n = int(math.floor((b - a) / step + 1e-9)) + 1
            return [round(a + i * step, 10) for i in range(n)]
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"malformed Eb/N0 grid {text!r}") from None


FER_REQUIRED = ("interleaver", "ebn0_db", "target_errors", "max_frames")
FER_OPTIONAL = ("iterations", "seed", "noiseless", "algorithm", "batch")


def parse_fer_config(text: str) -> dict[str, str]:
    cfg = {}
    for n, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"line {n}: expected key=value")
        k, v = (p.strip() for p in line.split("=", 1))
        if k not in FER_REQUIRED + FER_OPTIONAL:
            raise UsageError(f"line {n}: unknown key {k!r}")
        cfg[k] = v
    missing = [k for k in FER_REQUIRED if k not in cfg]
    if missing:
        raise UsageError("missing config keys: " + ", ".join(missing))
    return cfg


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_check(a) -> int:
    N, f1, f2 = a.N, a.f1, a.f2
    if N < 2 or not (0 <= f1 < N and 0 <= f2 < N):
        raise UsageError(f"need N >= 2 and 0 <= f1, f2 < N; got N={N}, f1={f1}, f2={f2}")
    ok = is_quadratic_pp(N, f1, f2)
    row = {
        "N": N, "f1": f1, "f2": f2, "pp": "yes" if ok else "no",
        "case": quadratic_pp_case(N),
        "kind": "quadratic" if f2 else "linear",
        "N_factors": str(factorize(N)),
        "f2_factors": str(factorize(f2)) if f2 >= 2 else str(f2),
    }
    man = RunManifest.create("check", {"N": N, "f1": f1, "f2": f2}, a.seed)
    emit(render([row], man, a.format), a.out)
    return 0 if ok else 1


def cmd_count(a) -> int:
    if a.N < 2:
        raise UsageError("N must be >= 2")
    man = RunManifest.create("count", {"N": a.N}, a.seed)
    emit(render([{"N": a.N, "count": count_quadratic_pps(a.N)}], man, a.format), a.out)
    return 0


def cmd_enumerate(a) -> int:
    if a.N < 2:
        raise UsageError("N must be >= 2")
    rows = []
    for f1, f2 in enumerate_quadratic_pps(a.N):
        if a.limit is not None and len(rows) >= a.limit:
            break
        rows.append({"f1": f1, "f2": f2})
    man = RunManifest.create("enumerate", {"N": a.N, "limit": a.limit}, a.seed)
    emit(render(rows, man, a.format, ("f1", "f2")), a.out)
    return 0


def _interleaver_file(pi: Interleaver, man: RunManifest) -> str:
    return f"# manifest: {man.to_json()}\n" + format_interleaver(pi)


def cmd_materialize(a) -> int:
    pi, src = parse_source(a.source, a.seed)
    man = RunManifest.create("materialize", {"source": src}, a.seed)
    emit(_interleaver_file(pi, man), a.out)
    return 0


def cmd_srandom(a) -> int:
    pi = generate_s_random(a.N, a.S, a.seed, a.max_attempts)
    man = RunManifest.create("srandom", {"N": a.N, "S": a.S, "max_attempts": a.max_attempts}, a.seed)
    emit(_interleaver_file(pi, man), a.out)
    return 0


def cmd_invert(a) -> int:
    spec = PolySpec.quadratic(a.N, a.f1 % a.N, a.f2 % a.N)
    if not is_pp_general(spec):
        raise UsageError(f"{spec} is not a permutation polynomial")
    if a.all:
        reps = quadratic_inverses(spec)
    else:
        reps = [inverse(spec)]
    rows = [{"N": a.N, "degree": r.effective_degree,
             "coeffs": ",".join(map(str, r.coeffs))} for r in reps]
    man = RunManifest.create("invert", {"N": a.N, "f1": a.f1, "f2": a.f2, "all": a.all}, a.seed)
    emit(render(rows, man, a.format), a.out)
    return 0


def cmd_compose(a) -> int:
    pa = PolySpec(a.N, tuple(c % a.N for c in _coeffs(a.a)))
    pb = PolySpec(a.N, tuple(c % a.N for c in _coeffs(a.b)))
    c = compose(pa, pb)
    row = {"N": a.N, "coeffs": ",".join(map(str, c.coeffs)), "pp": "yes" if is_pp_general(c) else "no"}
    man = RunManifest.create("compose", {"N": a.N, "a": list(pa.coeffs), "b": list(pb.coeffs)}, a.seed)
    emit(render([row], man, a.format), a.out)
    return 0


def cmd_mcf(a) -> int:
    pi, src = parse_source(a.source, a.seed)
    reports = is_mcf(pi)
    rows = []
    for W, r in reports.items():
        v = r.violation
        rows.append({
            "W": W, "M": pi.N // W, "passed": r.passed,
            "direction": v.direction if v else "", "j": v.j if v else "",
            "t": v.t if v else "", "v": v.v if v else "",
        })
    man = RunManifest.create("mcf", {"source": src}, a.seed)
    emit(render(rows, man, a.format, ("W", "M", "passed", "direction", "j", "t", "v"),
                extra={"mcf": all_pass(reports)}), a.out)
    return 0 if all_pass(reports) else 1


def cmd_spread(a) -> int:
    pi, src = parse_source(a.source, a.seed)
    D = spread_factor(pi)
    bound = spread_upper_bound(pi.N)
    man = RunManifest.create("spread", {"source": src}, a.seed)
    emit(render([{"N": pi.N, "D": D, "bound": bound, "ratio": D / bound}], man, a.format), a.out)
    return 0


def cmd_dmin_bound(a) -> int:
    pi, src = parse_source(a.source, a.seed)
    if a.max_weight > 4:
        raise UsageError("max weight above 4 is refused")
    d = dmin_upper_bound(pi, max_input_weight=a.max_weight)
    man = RunManifest.create("dmin-bound", {"source": src, "max_weight": a.max_weight}, a.seed)
    emit(render([{"N": pi.N, "max_weight": a.max_weight, "dmin_upper_bound": d}], man, a.format), a.out)
    return 0


def cmd_partrace(a) -> int:
    pi, src = parse_source(a.source, a.seed)
    dirs = DIRECTIONS if a.direction == "both" else (a.direction,)
    traces = [trace_access(pi, a.M, d) for d in dirs]
    man = RunManifest.create("partrace", {"source": src, "M": a.M, "direction": a.direction}, a.seed)
    n_events = sum(len(t.contentions()) for t in traces)
    if a.format == "json":
        doc = {"manifest": asdict(man), "traces": [t.as_dict() for t in traces]}
        text = json.dumps(doc, indent=1) + "\n"
    else:
        rows = [
            {"direction": t.direction, "j": j, "proc": p, "bank": int(t.bank[j, p]), "addr": int(t.addr[j, p])}
            for t in traces for j in range(t.W) for p in range(t.M)
        ]
        text = render(rows, man, "csv", ("direction", "j", "proc", "bank", "addr"))
    emit(text, a.out)
    return 0 if n_events == 0 else 1


def cmd_fer(a) -> int:
    try:
        with open(a.config) as fh:
            text = fh.read()
    except OSError as exc:
        raise UsageError(f"cannot read {a.config}: {exc.strerror}") from None
    cfg = parse_fer_config(text)
    seed = _int(cfg["seed"], "seed") if "seed" in cfg else a.seed
    pi, src = parse_source(cfg["interleaver"].split(), seed)
    noiseless = cfg.get("noiseless", "false").lower() in ("1", "true", "yes")
    sim = SimConfig(
        interleaver=pi,
        ebn0_db=parse_grid(cfg["ebn0_db"]),
        max_frames=_int(cfg["max_frames"], "max_frames"),
        target_errors=_int(cfg["target_errors"], "target_errors"),
        iterations=_int(cfg.get("iterations", "8"), "iterations"),
        seed=seed,
        algorithm=cfg.get("algorithm", "logmap"),
        noiseless=noiseless,
        threads=a.threads,
        batch=_int(cfg.get("batch", "64"), "batch"),
    )
    params = {"config": {k: cfg[k] for k in sorted(cfg)}, "source": src}
    man = RunManifest.create("fer", params, seed)
    progress = None
    if a.verbose:
        progress = lambda r: print(  # noqa: E731
            f"Eb/N0={r.ebn0_db:.2f} dB frames={r.frames} errors={r.frame_errors} FER={r.fer:.3e}",
            file=sys.stderr)
    rows = fer_rows(run_fer(sim, progress))
    emit(render(rows, man, a.format, FER_COLUMNS), a.out)
    return 0


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    d = (lambda v: argparse.SUPPRESS) if suppress else (lambda v: v)
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=d(0), help="RNG seed (default 0)")
    p.add_argument("--out", default=d(None), help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default=d("csv"))
    p.add_argument("--threads", type=int, default=d(1), help="worker threads for Monte-Carlo runs")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ppmcf", parents=[_global_flags(False)],
        description="Permutation-polynomial interleavers, MCF checks and turbo simulation.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    g = [_global_flags(True)]
    src_help = "qpp N f1 f2 | poly N c1,c2,.. | srandom N S [seed] | identity N | file PATH"

    p = sub.add_parser("check", parents=g, help="test f1 x + f2 x^2 for permuting Z_N")
    p.add_argument("N", type=int)
    p.add_argument("f1", type=int)
    p.add_argument("f2", type=int)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("count", parents=g, help="count quadratic PPs with f2 != 0")
    p.add_argument("N", type=int)
    p.set_defaults(func=cmd_count)

    p = sub.add_parser("enumerate", parents=g, help="list quadratic PPs (f1, f2)")
    p.add_argument("N", type=int)
    p.add_argument("--limit", type=int, default=None)
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("materialize", parents=g, help="write an interleaver file")
    p.add_argument("source", nargs="+", help=src_help)
    p.set_defaults(func=cmd_materialize)

    p = sub.add_parser("invert", parents=g, help="inverse of a quadratic PP")
    p.add_argument("N", type=int)
    p.add_argument("f1", type=int)
    p.add_argument("f2", type=int)
    p.add_argument("--all", action="store_true", help="list every quadratic representative")
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("compose", parents=g, help="coefficients of a(b(x)) mod N")
    p.add_argument("N", type=int)
    p.add_argument("a", help="comma-separated coefficients of the outer polynomial")
    p.add_argument("b", help="comma-separated coefficients of the inner polynomial")
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("mcf", parents=g, help="contention-free check for every divisor of N")
    p.add_argument("source", nargs="+", help=src_help)
    p.set_defaults(func=cmd_mcf)

    p = sub.add_parser("spread", parents=g, help="spread factor and ratio to sqrt(2N)")
    p.add_argument("source", nargs="+", help=src_help)
    p.set_defaults(func=cmd_spread)

    p = sub.add_parser("srandom", parents=g, help="generate an S-random interleaver file")
    p.add_argument("N", type=int)
    p.add_argument("S", type=int)
    p.add_argument("--max-attempts", type=int, default=100_000)
    p.set_defaults(func=cmd_srandom)

    p = sub.add_parser("fer", parents=g, help="Monte-Carlo FER sweep from a key=value config")
    p.add_argument("config")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(func=cmd_fer)

    p = sub.add_parser("dmin-bound", parents=g, help="low-weight enumeration bound on dmin")
    p.add_argument("source", nargs="+", help=src_help)
    p.add_argument("--max-weight", type=int, default=3)
    p.set_defaults(func=cmd_dmin_bound)

    p = sub.add_parser("partrace", parents=g, help="bank-access trace for M processors")
    p.add_argument("M", type=int)
    p.add_argument("source", nargs="+", help=src_help)
    p.add_argument("--direction", choices=("interleave", "deinterleave", "both"), default="both")
    p.set_defaults(func=cmd_partrace)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (UsageError, DomainError, ConstructionError) as exc:
        print(f"ppmcf {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
