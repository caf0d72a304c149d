"""Command-line front end.

Machine-readable results go to stdout, or to ``--output``. Relative output
paths are resolved under ``$LGE_OUTPUT_DIR`` when it is set. A one-line human
summary goes to stderr.

Exit codes: 0 ok, 2 invalid arguments, 3 numeric cancellation sentinel, 4 I/O.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any

from . import analytics as an
from . import montecarlo as mc
from . import occupancy as occ
from .protocol import lge_phase

EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
COMMANDS = ("pmf", "expect", "bounds", "rounds", "simulate", "montecarlo", "msp", "figure1")
OUTPUT_DIR_ENV = "LGE_OUTPUT_DIR"


class UsageError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    params: dict[str, Any] = field(default_factory=dict)
    format: str = "json"
    output: str | None = None

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise UsageError(f"unknown command {self.command!r}")
        if self.format not in ("csv", "json"):
            raise UsageError("format must be csv or json")
        P = self.params
        p = P.get("p")
        if p is not None and not 0.0 < p < 1.0:
            raise UsageError(f"--p must lie in (0, 1), got {p}")
        for name in ("n", "trials", "n_max"):
            if name in P and P[name] is not None and P[name] < 1:
                raise UsageError(f"--{name.replace('_', '-')} must be at least 1")
        for name in ("ns", "Ls"):
            if any(v < 1 for v in P.get(name) or ()):
                raise UsageError(f"--{name[0]} values must be at least 1")
        if P.get("threads", 1) < 1:
            raise UsageError("--threads must be at least 1")


def _prob(text: str) -> float:
    try:
        return float(Fraction(text))
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from exc


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}") from exc


def _num(x) -> str:
    # shortest repr that round-trips a double
    return repr(float(x)) if not isinstance(x, (int, bool)) else str(x)


def _csv(header: list[str], rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\r\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_num(v) if isinstance(v, (int, float)) else v for v in row])
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2) + "\n"


def _table(cfg: RunConfig, header: list[str], rows: list[list]) -> str:
    if cfg.format == "csv":
        return _csv(header, rows)
    return _json([dict(zip(header, row)) for row in rows])


# -- commands -----------------------------------------------------------------


def cmd_pmf(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    n, param, a, method = P["n"], an.GeoParam(P["p"]), P.get("a"), P.get("method", "series")
    if a is not None:
        if method == "alternating":
            value = an.survivor_pmf_alternating(n, param, a)
        elif method == "exact":
            value = an.survivor_pmf_alternating(n, param, a, exact=True)
        else:
            value = an.survivor_pmf_series(n, param, a)
        return _num(value) + "\n", f"Pr[W={a}] for n={n}, p={param.p}: {value:.6g}"
    if method == "exact":
        probs = [an.survivor_pmf_alternating(n, param, k, exact=True) for k in range(1, n + 1)]
    else:
        probs = list(an.survivor_pmf(n, param, method).probs)
    rows = [[k, v] for k, v in enumerate(probs, start=1)]
    return _table(cfg, ["a", "prob"], rows), f"survivor pmf for n={n}, p={param.p}"


def cmd_expect(cfg: RunConfig) -> tuple[str, str]:
    n, param = cfg.params["n"], an.GeoParam(cfg.params["p"])
    out = {
        "n": n,
        "p": param.p,
        "expectedSurvivors": an.expected_survivors(n, param),
        "probOneSurvivor": an.survivor_pmf_series(n, param, 1),
        "expectedMaxExact": an.expected_max_exact(n, param),
        "expectedMaxApprox": an.expected_max_approx(n, param),
    }
    return _json(out), f"E[W]={out['expectedSurvivors']:.6g}, E[M]={out['expectedMaxExact']:.6g}"


def cmd_bounds(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    param = an.GeoParam(P["p"])
    a = P.get("a") or 1
    out: dict[str, Any] = {"p": param.p, "a": a, "phi": an.phi_bound(param, a)}
    k = P.get("k")
    if k is not None:
        out["k"] = k
        out["tailBound"] = an.survivor_tail_bound(param, k)
    n = P.get("n")
    if n is not None and 0 < a < n:
        r = an.pmf_rice_approx(n, param, a)
        out.update(
            n=n,
            central=r.central,
            errorBound=r.error_bound,
            fluctuation=r.fluctuation,
            riceValue=r.value,
            truncationResidual=r.truncation_residual,
        )
    C = P.get("C")
    if C is not None and n is not None:
        out["C"] = C
        out["maxThreshold"], out["maxTailBound"] = an.max_geo_tail_bound(n, param, C)
    return _json(out), f"phi_p({a})={out['phi']:.6g}"


def cmd_rounds(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    slots, L = an.rounds_required(P["n"], an.GeoParam(P["p"]), P.get("eps_exp", 20.0))
    if cfg.format == "json" and P.get("verbose_json"):
        return _json({"slots": slots, "L": L}), f"{slots} slots, L={L}"
    return f"{slots}\n", f"{slots} slots (L={L})"


def cmd_simulate(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    n, param = P["n"], an.GeoParam(P["p"])
    count, trace = lge_phase(n, param, P.get("L"), seed=P.get("seed", 0))
    if P.get("trace_csv"):
        _write(P["trace_csv"], trace.to_csv())
    if cfg.format == "csv":
        return trace.to_csv(), f"{count} survivor(s) after {len(trace.slots)} slots"
    return _json(trace.summary(n, param.p)), f"{count} survivor(s) after {len(trace.slots)} slots"


def cmd_montecarlo(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    n, param, trials, seed, threads = P["n"], an.GeoParam(P["p"]), P["trials"], P["seed"], P["threads"]
    what = P.get("what", "pmf")
    if what == "pmf":
        reports = mc.estimate_survivor_pmf(n, param, trials, seed, threads)
    elif what == "phase":
        L = P.get("L")
        if L is None:
            L = an.rounds_required(max(n, 2), param)[1]
        reports = mc.estimate_phase_survivors(n, param, L, trials, seed, threads)
    elif what == "max-tail":
        if P.get("C") is None:
            raise UsageError("--C is required for max-tail")
        reports = [mc.estimate_max_tail(n, param, P["C"], trials, seed, threads)]
    else:
        raise UsageError(f"unknown estimate {what!r}")
    worst = max(abs(r.z_score) for r in reports)
    text = mc.histogram_csv(reports) if cfg.format == "csv" else mc.reports_json(reports) + "\n"
    return text, f"{len(reports)} estimate(s), max |z| = {worst:.3g}"


def cmd_msp(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    results = [
        occ.msp_search(L, n, P["budget"], P["seed"], P["starts"], P["threads"])
        for L in P["Ls"]
        for n in P["ns"]
    ]
    if cfg.format == "csv":
        rows = [[r.L, r.n, r.value, r.bound] for r in results]
        return _csv(["L", "n", "searchValue", "bound"], rows), f"{len(results)} searches"
    if len(results) == 1:
        r = results[0]
        return _json(r.to_dict()), f"MSP({r.L},{r.n}) >= {r.value:.6g}, bound {r.bound:.6g}"
    return _json([r.to_dict() for r in results]), f"{len(results)} searches"


def figure1_rows(p: float = 1 / 3, n_max: int = 600) -> list[list]:
    param = an.GeoParam(p)
    return [[n, an.survivor_pmf_series(n, param, 1)] for n in range(1, n_max + 1)]


def cmd_figure1(cfg: RunConfig) -> tuple[str, str]:
    P = cfg.params
    rows = figure1_rows(P.get("p") or 1 / 3, P.get("n_max") or 600)
    text = _csv(["n", "prob"], rows) if cfg.format == "csv" else _table(cfg, ["n", "prob"], rows)
    return text, f"{len(rows)} rows of Pr[W=1]"


HANDLERS = {
    "pmf": cmd_pmf,
    "expect": cmd_expect,
    "bounds": cmd_bounds,
    "rounds": cmd_rounds,
    "simulate": cmd_simulate,
    "montecarlo": cmd_montecarlo,
    "msp": cmd_msp,
    "figure1": cmd_figure1,
}


# -- plumbing -----------------------------------------------------------------


def _resolve(path: str) -> Path:
    out = Path(path)
    base = os.environ.get(OUTPUT_DIR_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def _write(path: str, text: str) -> None:
    out = _resolve(path)
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text, newline="")


def cmd_dispatch(cfg: RunConfig, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        cfg.validate()
        text, summary = HANDLERS[cfg.command](cfg)
        if cfg.output:
            _write(cfg.output, text)
        else:
            stdout.write(text)
    except an.CancellationError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_IO
    except ValueError as exc:
        print(f"error: {exc}", file=stderr)
        return EXIT_USAGE
    print(summary, file=stderr)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lge", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, fmt="json"):
        sp.add_argument("--format", choices=("csv", "json"), default=fmt)
        sp.add_argument("--output", "-o", help="write results here instead of stdout")
        return sp

    sp = common(sub.add_parser("pmf", help="survivor-count pmf"), fmt="csv")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, required=True)
    sp.add_argument("--a", type=int)
    sp.add_argument("--method", choices=("series", "alternating", "exact"), default="series")

    sp = common(sub.add_parser("expect", help="E[W] and E[M]"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, required=True)

    sp = common(sub.add_parser("bounds", help="phi envelope, tail bound, Rice approximation"))
    sp.add_argument("--p", type=_prob, required=True)
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--k", type=int)
    sp.add_argument("--n", type=int)
    sp.add_argument("--C", type=float)

    sp = common(sub.add_parser("rounds", help="slots needed by one LGE phase"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, default=0.01)
    sp.add_argument("--eps-exp", dest="eps_exp", type=float, default=20.0)
    sp.add_argument("--json", dest="verbose_json", action="store_true", help="emit {slots, L}")

    sp = common(sub.add_parser("simulate", help="one slot-level LGE phase"))
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, default=0.01)
    sp.add_argument("--L", type=int)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--trace-csv", dest="trace_csv")

    sp = common(sub.add_parser("montecarlo", help="empirical estimates vs analytics"))
    sp.add_argument("what", choices=("pmf", "phase", "max-tail"), nargs="?", default="pmf")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--p", type=_prob, default=0.01)
    sp.add_argument("--trials", type=int, default=100_000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--C", type=float)
    sp.add_argument("--L", type=int)
    sp.add_argument("--threads", type=int, default=1)

    sp = common(sub.add_parser("msp", help="max-min singleton probability search"))
    sp.add_argument("--L", dest="Ls", type=_int_list, required=True, help="urn count(s), comma-separated")
    sp.add_argument("--n", dest="ns", type=_int_list, required=True, help="max ball count(s)")
    sp.add_argument("--budget", type=int, default=20_000)
    sp.add_argument("--starts", type=int, default=32)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--threads", type=int, default=1)

    sp = common(sub.add_parser("figure1", help="Pr[W=1] against n"), fmt="csv")
    sp.add_argument("--p", type=_prob, default=Fraction(1, 3))
    sp.add_argument("--n-max", dest="n_max", type=int, default=600)
    return parser


def parse_config(argv: list[str] | None = None) -> RunConfig:
    args = vars(build_parser().parse_args(argv))
    command = args.pop("command")
    fmt = args.pop("format")
    output = args.pop("output")
    if isinstance(args.get("p"), Fraction):
        args["p"] = float(args["p"])
    return RunConfig(command=command, params=args, format=fmt, output=output)


def main(argv: list[str] | None = None) -> int:
    return cmd_dispatch(parse_config(argv))


if __name__ == "__main__":
    sys.exit(main())
