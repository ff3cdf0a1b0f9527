"""Command line front end: gen, bound, cert, scheme and report.

All rationals are printed as "p/q" strings.  The report command can fan
rows out to worker processes; set SSRATIO_WORKERS to the worker count
(default 1).  Row order never depends on the worker count.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import re
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from fractions import Fraction

from . import certificates as certs
from .entropy_lp import (
    AVERAGE, MAX_LP_VERTICES, WORST, build_lp, extract_dual_certificate, lp_text, solve,
)
from .graphs import (
    GraphError, LabeledGraph, StructureError, build_cube_star, build_delta,
    build_hypercube, dumps_graph, read_graph,
)
from .schemes import (
    SchemeError, build_star_scheme, dumps_scheme, information_ratios,
    next_prime_at_least, scheme_report, verify_perfect,
)

FAMILIES = ("hypercube", "cube_star", "delta", "file")
REPORT_COLUMNS = ("family", "d", "seed", "mode", "n", "lower", "lower_method", "upper", "q", "match")
WORKERS_ENV = "SSRATIO_WORKERS"


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    family: str = "cube_star"
    d: int | None = 1
    seed: int = 0
    mode: str = WORST
    method: str = "lp"
    q: int | None = None
    format: str = "text"
    out: str | None = None
    file: str | None = None

    def validate(self, g: LabeledGraph | None = None):
        if self.method == "lp" and g is not None and g.n > MAX_LP_VERTICES:
            raise UsageError(f"graph has {g.n} vertices but the LP handles at most "
                             f"{MAX_LP_VERTICES}; use --method certificate")
        if self.method == "scheme" and g is not None and self.q is not None and self.q < g.n:
            raise UsageError(f"--q must be at least the number of vertices ({g.n})")


def load_graph(family: str, d: int | None, seed: int = 0, path: str | None = None) -> LabeledGraph:
    if family == "file":
        if not path:
            raise UsageError("--family file needs --file PATH")
        return read_graph(path)
    if d is None:
        raise UsageError(f"--family {family} needs --d")
    if family == "hypercube":
        return build_hypercube(d)
    if family == "cube_star":
        return build_cube_star(d)
    if family == "delta":
        return build_delta(d, seed)
    raise UsageError(f"unknown family {family!r}")


def _graph(cfg: RunConfig) -> LabeledGraph:
    return load_graph(cfg.family, cfg.d, cfg.seed, cfg.file)


def _emit(cfg: RunConfig, text: str) -> None:
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _record_text(cfg: RunConfig, record: dict, headline: str) -> str:
    if cfg.format == "json":
        return json.dumps(record, indent=1) + "\n"
    if cfg.format == "csv":
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(record), lineterminator="\n")
        w.writeheader()
        w.writerow(record)
        return buf.getvalue()
    return headline + "\n"


# -- certificates for a graph --------------------------------------------------

def certificate_for(g: LabeledGraph, mode: str) -> tuple[certs.Certificate, Fraction]:
    """Constructive certificate matching the graph's family and the mode."""
    fam = g.family()
    d = g.dimension()
    if mode == WORST and fam == "cube_star":
        return certs.build_theorem_worst(d, g)
    if mode == AVERAGE and fam == "delta":
        return certs.build_theorem_average(d, g)
    raise UsageError(f"no constructive certificate for family {fam} in {mode} mode "
                     "(worst needs cube_star, average needs delta); try --method lp")


def lp_certificate(g: LabeledGraph, mode: str) -> tuple[certs.Certificate, Fraction]:
    lp = build_lp(g, mode)
    sol = solve(lp)
    return extract_dual_certificate(lp, sol), sol.objective_value


# -- commands ------------------------------------------------------------------

def cmd_gen(cfg: RunConfig) -> int:
    _emit(cfg, dumps_graph(_graph(cfg)))
    return 0


def cmd_bound(cfg: RunConfig, cert_out: str | None = None, lp_out: str | None = None) -> int:
    g = _graph(cfg)
    cfg.validate(g)
    record = {"family": cfg.family, "d": cfg.d, "seed": cfg.seed, "mode": cfg.mode,
              "method": cfg.method, "n": g.n}
    ok = True
    if cfg.method == "lp":
        lp = build_lp(g, cfg.mode)
        if lp_out:
            with open(lp_out, "w") as fh:
                fh.write(lp_text(lp))
        value = solve(lp).objective_value
    elif cfg.method == "certificate":
        cert, value = certificate_for(g, cfg.mode)
        verdict = certs.check(cert)
        ok = verdict.valid
        record["verdict"] = str(verdict)
        record["steps"] = len(cert)
        if cert_out:
            with open(cert_out, "w") as fh:
                fh.write(certs.dumps_certificate(cert))
            record["certificate"] = cert_out
    elif cfg.method == "scheme":
        q = cfg.q or next_prime_at_least(g.n)
        s = build_star_scheme(g, q)
        _, mx, avg = information_ratios(s)
        value = mx if cfg.mode == WORST else avg
        record["q"] = q
        record["note"] = "upper bound"
    else:
        raise UsageError(f"unknown method {cfg.method!r}")
    record["value"] = str(value)
    headline = str(value)
    if "verdict" in record:
        headline += f"\nverdict: {record['verdict']}"
    _emit(cfg, _record_text(cfg, record, headline))
    return 0 if ok else 1


def cmd_cert(cfg: RunConfig, check_path: str | None = None, lemma: str = "theorem") -> int:
    if check_path:
        with open(check_path) as fh:
            cert = certs.loads_certificate(fh.read())
        verdict = certs.check(cert)
        record = {"certificate": check_path, "verdict": str(verdict), "steps": len(cert),
                  "bound": str(cert.bound)}
        if verdict.valid:
            try:
                record["implied"] = str(certs.implied_bound(cert))
            except ValueError:
                pass
        sys.stdout.write(_record_text(cfg, record, str(verdict)))
        return 0 if verdict.valid else 1
    g = _graph(cfg)
    if cfg.method == "lp":
        cfg.validate(g)
        cert, _ = lp_certificate(g, cfg.mode)
    elif lemma == "theorem":
        cert, _ = certificate_for(g, cfg.mode)
    else:
        builders = {"1": certs.build_lemma1, "2": certs.build_lemma2, "3": certs.build_lemma3}
        if g.family() != "cube_star":
            raise UsageError("lemma certificates live on cube_star graphs")
        cert = builders[lemma](g.dimension(), g)
    verdict = certs.check(cert)
    _emit(cfg, certs.dumps_certificate(cert))
    sys.stderr.write(f"{cert.name}: {len(cert)} steps, bound {cert.bound}, {verdict}\n")
    return 0 if verdict.valid else 1


def cmd_scheme(cfg: RunConfig, report_out: str | None = None) -> int:
    g = _graph(cfg)
    cfg.validate(g)
    q = cfg.q or next_prime_at_least(g.n)
    s = build_star_scheme(g, q)
    rep = verify_perfect(s, g)
    report = scheme_report(s, g, rep)
    if cfg.out:
        with open(cfg.out, "w") as fh:
            fh.write(dumps_scheme(s))
    text = json.dumps(report, indent=1) + "\n"
    if cfg.format == "text":
        lines = [f"q = {q}", f"perfect: {rep.perfect}"
                 + (" (sampled independent sets)" if rep.sampled else ""),
                 f"max ratio: {report['max_ratio']}", f"average ratio: {report['average_ratio']}"]
        lines += [f"  vertex {v}: {r}" for v, r in report["ratios"].items()]
        text = "\n".join(lines) + "\n"
    if report_out:
        with open(report_out, "w") as fh:
            fh.write(json.dumps(report, indent=1) + "\n")
    sys.stdout.write(text)
    for kind, vs in rep.violations:
        sys.stderr.write(f"violation: {kind}: {vs}\n")
    return 0 if rep.perfect else 1


def parse_range(text: str | None) -> list:
    """"3" -> [3]; "1-4" or "1..4" -> [1, 2, 3, 4]; an empty range is allowed."""
    if not text:
        return []
    m = re.fullmatch(r"\s*(\d+)\s*(?:(?:-|\.\.)\s*(\d+)\s*)?", text)
    if not m:
        raise UsageError(f"bad range {text!r}")
    lo = int(m.group(1))
    hi = int(m.group(2)) if m.group(2) is not None else lo
    return list(range(lo, hi + 1))


def _default_mode(family: str) -> str:
    return WORST if family == "cube_star" else AVERAGE


def report_row(family: str, d: int, seed: int, mode: str, method: str, q: int | None) -> dict:
    g = load_graph(family, d, seed)
    if method == "lp" and g.n <= MAX_LP_VERTICES:
        lower = solve(build_lp(g, mode)).objective_value
        lower_method = "lp"
    else:
        cert, lower = certificate_for(g, mode)
        if not certs.check(cert):
            raise RuntimeError(f"certificate failed for {family} d={d} seed={seed}")
        lower_method = "certificate"
    qq = q or next_prime_at_least(g.n)
    s = build_star_scheme(g, qq)
    _, mx, avg = information_ratios(s)
    upper = mx if mode == WORST else avg
    return {"family": family, "d": d, "seed": seed, "mode": mode, "n": g.n,
            "lower": str(lower), "lower_method": lower_method, "upper": str(upper),
            "q": qq, "match": str(lower == upper).lower()}


def _row_job(args):
    return report_row(*args)


def cmd_report(families: list, ds: list, seeds: list, modes: list | None,
               method: str, q: int | None, out=None, workers: int | None = None) -> int:
    jobs = []
    for fam in families:
        for d in ds:
            for seed in (seeds if fam == "delta" else [0]):
                for mode in (modes or [_default_mode(fam)]):
                    jobs.append((fam, d, seed, mode, method, q))
    if workers is None:
        workers = int(os.environ.get(WORKERS_ENV, "1") or 1)
    if workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_row_job, jobs))
    else:
        rows = [_row_job(j) for j in jobs]
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=REPORT_COLUMNS, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    if out:
        with open(out, "w") as fh:
            fh.write(buf.getvalue())
    else:
        sys.stdout.write(buf.getvalue())
    return 0 if all(Fraction(r["lower"]) <= Fraction(r["upper"]) for r in rows) else 1


# -- argument parsing --------------------------------------------------------------

def _common(p: argparse.ArgumentParser, method_choices=("lp", "certificate", "scheme"),
            default_method="lp"):
    p.add_argument("--family", choices=FAMILIES, default="cube_star")
    p.add_argument("--d", type=int, default=1, help="cube dimension")
    p.add_argument("--seed", type=int, default=0, help="matching seed for delta graphs")
    p.add_argument("--file", help="graph JSON for --family file")
    p.add_argument("--mode", choices=(WORST, AVERAGE), default=WORST)
    p.add_argument("--method", choices=method_choices, default=default_method)
    p.add_argument("--q", type=int, help="prime field modulus for schemes")
    p.add_argument("--format", choices=("text", "json", "csv"), default="text")
    p.add_argument("--out", help="output path (default stdout)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="ssratio", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    _common(sub.add_parser("gen", help="write a graph as canonical JSON"))

    p = sub.add_parser("bound", help="exact lower bound (or scheme upper bound)")
    _common(p)
    p.add_argument("--cert-out", help="write the certificate JSON here (method certificate)")
    p.add_argument("--lp-out", help="write the LP in text form here (method lp)")

    p = sub.add_parser("cert", help="build or check a certificate")
    _common(p, ("certificate", "lp"), "certificate")
    p.add_argument("--lemma", choices=("1", "2", "3", "theorem"), default="theorem")
    p.add_argument("--check", metavar="PATH", help="verify an existing certificate file")

    p = sub.add_parser("scheme", help="build and verify the star scheme")
    _common(p, ("scheme",), "scheme")
    p.add_argument("--report-out", help="write the JSON verification report here")

    p = sub.add_parser("report", help="CSV table of lower and upper bounds")
    p.add_argument("--family", action="append", choices=("cube_star", "delta"),
                   help="repeatable; default both")
    p.add_argument("--d", default="1-3", help='dimension or range such as "1-4"')
    p.add_argument("--seed", default="0", help='comma separated delta seeds, e.g. "0,1,2"')
    p.add_argument("--mode", action="append", choices=(WORST, AVERAGE),
                   help="repeatable; default worst for cube_star, average for delta")
    p.add_argument("--method", choices=("lp", "certificate"), default="certificate")
    p.add_argument("--q", type=int)
    p.add_argument("--format", choices=("csv",), default="csv")
    p.add_argument("--out")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            seeds = [int(s) for s in args.seed.split(",") if s.strip()]
            return cmd_report(args.family or ["cube_star", "delta"], parse_range(args.d),
                              seeds, args.mode, args.method, args.q, args.out)
        cfg = RunConfig(args.command, args.family, args.d, args.seed, args.mode, args.method,
                        args.q, args.format, args.out, args.file)
        if args.command == "gen":
            return cmd_gen(cfg)
        if args.command == "bound":
            return cmd_bound(cfg, args.cert_out, args.lp_out)
        if args.command == "cert":
            return cmd_cert(cfg, args.check, args.lemma)
        return cmd_scheme(cfg, args.report_out)
    except (UsageError, GraphError, StructureError, SchemeError, OSError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
