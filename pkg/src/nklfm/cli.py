"""Command-line front end.

Every run writes one JSON record to stdout::

    {"command": ..., "params": {...}, "result": {...}, "seed": ...,
     "n_samples": ..., "elapsed_ms": ..., "warnings": [...]}

With ``--sweep`` (or ``--format csv``) rows are written as CSV with the
fixed header ``SWEEP_COLUMNS``.

Sign convention: ``negexponential`` is minus a rate-1 exponential, so its
values are negative with an upper end point at 0.

Exit codes: 0 success, 2 usage error, 3 infeasible size, 4 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
import time
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np

from nklfm import k1exact
from nklfm.estimate import (
    NumericalFailure,
    conditional_mc,
    direct_mc,
    normal_saddle,
    normal_upper_bound,
)
from nklfm.fattail.algorithm import check_direct_batch, run_cover_algorithm_batch
from nklfm.fattail.enumeration import MAX_FULL_N, enumerate_exact
from nklfm.fattail.mc import mc_p_fat
from nklfm.fattail.table1 import table1_breakdown
from nklfm.fattail.torus import f_r_mc, torus_measure_exact, torus_measure_mc
from nklfm.model import (
    DISTRIBUTIONS,
    InfeasibleSizeError,
    ModelParams,
    count_lfm,
    sample_landscape,
    split_neighborhood,
)
from nklfm._mc import chunk_rng, distinct_uniforms

EXIT_OK, EXIT_USAGE, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4

# stable CSV header; append new columns at the end only
SWEEP_COLUMNS = (
    "command",
    "n_loci",
    "k",
    "dist",
    "method",
    "r_max",
    "seed",
    "n_samples",
    "value",
    "stderr",
    "exact",
    "elapsed_ms",
    "warnings",
)

# flag -> (type, built-in default); None means "not set"
COMMON_FLAGS = {
    "n_loci": (int, None),
    "k": (int, None),
    "dist": (str, "normal"),
    "samples": (int, 100_000),
    "seed": (int, None),
    "method": (str, None),
    "r_max": (int, None),
    "tol": (float, None),
    "jobs": (int, 1),
    "r": (int, None),
    "y": (float, None),
    "n_max": (int, None),
    "landscapes": (int, 200),
    "eta_cap": (float, None),
    "chunk_size": (int, 100_000),
}


class UsageError(Exception):
    pass


@dataclass
class RunRecord:
    command: str
    params: dict
    result: dict
    seed: int | None
    n_samples: int
    elapsed_ms: int
    warnings: list[str] = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=False)

    def csv_row(self) -> dict:
        res = self.result
        return {
            "command": self.command,
            "n_loci": self.params.get("n_loci"),
            "k": self.params.get("k"),
            "dist": self.params.get("dist"),
            "method": self.params.get("method"),
            "r_max": self.params.get("r_max"),
            "seed": self.seed,
            "n_samples": self.n_samples,
            "value": res.get("value"),
            "stderr": res.get("stderr"),
            "exact": res.get("exact"),
            "elapsed_ms": self.elapsed_ms,
            "warnings": "; ".join(self.warnings),
        }


def _frac(p: Fraction) -> dict:
    return {"exact": f"{p.numerator}/{p.denominator}", "decimal": float(p)}


# ---------------------------------------------------------------------------
# commands; each takes the resolved option dict and returns (result, n_samples)


def _need(opts: dict, *names: str) -> None:
    missing = [n for n in names if opts.get(n) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))


def _params(opts: dict) -> ModelParams:
    _need(opts, "n_loci", "k")
    return ModelParams(opts["n_loci"], opts["k"], opts["dist"])


def _mc_kw(opts: dict) -> dict:
    return {"chunk_size": opts["chunk_size"], "jobs": opts["jobs"]}


def _est(e) -> dict:
    d = e.as_dict()
    d.pop("seed")
    d.pop("n_samples")
    return d


def cmd_estimate(o):
    params = _params(o)
    method = o["method"] or "conditional"
    if method not in ("direct", "conditional"):
        raise UsageError("--method must be direct or conditional")
    fn = direct_mc if method == "direct" else conditional_mc
    e = fn(params, o["samples"], o["seed"], **_mc_kw(o))
    return _est(e), e.n_samples


def cmd_normal_bound(o):
    _need(o, "n_loci", "k")
    tol = o["tol"] or 1e-10
    return {"value": normal_upper_bound(o["n_loci"], o["k"], tol), "tol": tol}, 0


def cmd_normal_saddle(o):
    _need(o, "n_loci", "k")
    rep = normal_saddle(o["n_loci"], o["k"], o["tol"] or 1e-8)
    d = rep.as_dict()
    d["value"] = rep.log_i_max
    d["m_over_n_by_k"] = rep.log_i_max / (o["n_loci"] / o["k"])
    return d, 0


def cmd_fat_exact(o):
    _need(o, "n_loci", "k")
    res = enumerate_exact(o["n_loci"], o["k"], o["r_max"])
    d = res.as_dict()
    d["value"] = d["decimal"]
    d["mode"] = "full" if o["r_max"] is None else "restricted"
    return d, 0


def cmd_fat_mc(o):
    _need(o, "n_loci", "k")
    e = mc_p_fat(o["n_loci"], o["k"], o["samples"], o["seed"], dist=o["dist"], **_mc_kw(o))
    d = _est(e)
    if o["n_loci"] <= MAX_FULL_N:
        d["exact"] = enumerate_exact(o["n_loci"], o["k"]).as_dict()["exact"]
    return d, e.n_samples


def cmd_fat_selftest(o):
    _need(o, "n_loci", "k")
    N, K, n = o["n_loci"], o["k"], o["samples"]
    if n > 1_000_000:
        raise InfeasibleSizeError("algorithm-selftest runs at most 10^6 samples")
    rng = chunk_rng(o["seed"], 0)
    u = distinct_uniforms(rng, n, N * (K + 2))
    direct = check_direct_batch(*split_neighborhood(u, N, K))
    verdicts = np.array([out.verdict for out in run_cover_algorithm_batch(u, N, K)])
    mismatches = int((direct != verdicts).sum())
    return {
        "value": float(verdicts.mean()),
        "mismatches": mismatches,
        "agree": mismatches == 0,
    }, n


def cmd_fat_fr(o):
    _need(o, "r", "y")
    method = o["method"] or "uniform"
    e = f_r_mc(o["r"], o["y"], o["samples"], o["seed"], method=method, eta_cap=o["eta_cap"], **_mc_kw(o))
    d = _est(e)
    d.pop("p_hat")
    return d, e.n_samples


def cmd_fat_torus(o):
    _need(o, "r", "y")
    e = torus_measure_mc(o["r"], o["y"], o["samples"], o["seed"], **_mc_kw(o))
    d = _est(e)
    d.pop("p_hat")
    if o["y"] <= 1:
        d["closed_form"] = torus_measure_exact(o["r"], o["y"])
    return d, e.n_samples


def cmd_fat_table1(o):
    _need(o, "n_loci", "k")
    pred = table1_breakdown(o["n_loci"], o["k"], n=o["samples"], seed=o["seed"])
    return pred.as_dict(), o["samples"] if pred.row == 2 else 0


def cmd_k1_recursion(o):
    _need(o, "n_max")
    n_max = o["n_max"]
    seq = k1exact.recursion_float(n_max)
    d = {"n": n_max, "log_p": float(seq.log_values[-1]), "value": math.exp(seq.log_values[-1])}
    if n_max <= k1exact.MAX_EXACT_N:
        ex = k1exact.recursion_exact(n_max)
        d["exact"] = _frac(ex[n_max])["exact"]
        if n_max <= 50:
            d["sequence"] = [_frac(p)["exact"] for p in ex]
    return d, 0


def cmd_k1_growth(o):
    n_max = o["n_max"] or 2000
    rep = k1exact.growth_rate(k1exact.recursion_float(n_max))
    d = rep.as_dict()
    d["value"] = rep.rate_aitken
    return d, 0


def cmd_k1_z0(o):
    z0 = k1exact.find_z0(o["tol"] or 1e-10)
    return {"value": z0, "z0": z0, "rate": -math.log(z0), "display_at_z0": k1exact.bessel_display(z0)}, 0


def cmd_k1_mc(o):
    _need(o, "n_loci")
    e = k1exact.mc_h_star(o["n_loci"], o["samples"], o["seed"], **_mc_kw(o))
    d = _est(e)
    if o["n_loci"] <= k1exact.MAX_EXACT_N:
        d["exact"] = _frac(k1exact.recursion_exact(o["n_loci"])[o["n_loci"]])["exact"]
    return d, e.n_samples


def cmd_lfm_count(o):
    params = _params(o)
    L = o["landscapes"]
    counts = np.array([count_lfm(sample_landscape(params, o["seed"], i)) for i in range(L)], dtype=float)
    d = {
        "value": float(counts.mean()),
        "stderr": float(counts.std(ddof=1) / math.sqrt(L)) if L > 1 else 0.0,
        "landscapes": L,
        "min_count": int(counts.min()),
    }
    if params.exchangeable:
        d["exchangeable_mean"] = 2**params.N / (params.N + 1)
    return d, L


def cmd_compare_dists(o):
    _need(o, "n_loci", "k")
    N, K, n = o["n_loci"], o["k"], o["samples"]
    method = o["method"] or "conditional"
    fn = direct_mc if method == "direct" else conditional_mc
    fat = mc_p_fat(N, K, n, o["seed"], **_mc_kw(o))
    rows = {}
    for dist in DISTRIBUTIONS:
        e = fn(ModelParams(N, K, dist), n, o["seed"], **_mc_kw(o))
        rows[dist] = {
            "p_hat": e.value,
            "stderr": e.stderr,
            "above_fat": e.value + 4 * e.stderr >= fat.value - 4 * fat.stderr,
        }
    d = {"fat": {"p_hat": fat.value, "stderr": fat.stderr}, "by_dist": rows}
    d["value"] = min(r["p_hat"] for r in rows.values())
    d["all_above_fat"] = all(r["above_fat"] for r in rows.values())
    return d, n


COMMANDS = {
    ("estimate",): cmd_estimate,
    ("normal", "bound"): cmd_normal_bound,
    ("normal", "saddle"): cmd_normal_saddle,
    ("fat", "exact"): cmd_fat_exact,
    ("fat", "mc"): cmd_fat_mc,
    ("fat", "algorithm-selftest"): cmd_fat_selftest,
    ("fat", "fr"): cmd_fat_fr,
    ("fat", "torus-measure"): cmd_fat_torus,
    ("fat", "table1"): cmd_fat_table1,
    ("k1", "recursion"): cmd_k1_recursion,
    ("k1", "growth"): cmd_k1_growth,
    ("k1", "z0"): cmd_k1_z0,
    ("k1", "mc"): cmd_k1_mc,
    ("lfm", "count"): cmd_lfm_count,
    ("compare-dists",): cmd_compare_dists,
}


# ---------------------------------------------------------------------------
# argument handling


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{message}\n{self.format_usage()}")


def _add_common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("common options")
    g.add_argument("--n-loci", dest="n_loci", type=int, help="genome length N")
    g.add_argument("--k", type=int, help="epistasis K")
    g.add_argument(
        "--dist",
        choices=DISTRIBUTIONS,
        help="fitness distribution (negexponential = minus a rate-1 exponential)",
    )
    g.add_argument("--samples", type=int, help="Monte Carlo sample count")
    g.add_argument("--seed", type=int, help="seed (default: $NK_SEED, else 0)")
    g.add_argument("--method", help="estimator / sampler variant")
    g.add_argument("--r-max", dest="r_max", type=int, help="longest cover sequence to enumerate")
    g.add_argument("--tol", type=float, help="numerical tolerance")
    g.add_argument("--jobs", type=int, help="worker processes (results do not depend on it)")
    g.add_argument("--chunk-size", dest="chunk_size", type=int, help="samples per seeded chunk")
    g.add_argument("--r", type=int, help="torus dimension r")
    g.add_argument("--y", type=float, help="torus slack parameter y")
    g.add_argument("--n-max", dest="n_max", type=int, help="last index of the K=1 recursion")
    g.add_argument("--landscapes", type=int, help="number of full landscapes")
    g.add_argument("--eta-cap", dest="eta_cap", type=float, help="truncation level for eta")
    g.add_argument("--sweep", help="grid, e.g. 'k=16,32,64;n-loci=8:12'; writes CSV")
    g.add_argument("--format", choices=("json", "csv"), help="output format")
    g.add_argument("--config", help="key=value file of defaults; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="nk", description=__doc__.split("\n\n")[0])
    sub = parser.add_subparsers(dest="cmd", required=True, parser_class=_Parser)
    groups: dict[str, argparse._SubParsersAction] = {}
    for key in COMMANDS:
        if len(key) == 1:
            _add_common(sub.add_parser(key[0]))
            continue
        if key[0] not in groups:
            gp = sub.add_parser(key[0])
            groups[key[0]] = gp.add_subparsers(dest="sub", required=True, parser_class=_Parser)
        _add_common(groups[key[0]].add_parser(key[1]))
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            key, val = (s.strip() for s in line.split("=", 1))
            key = key.lstrip("-").replace("-", "_")
            if key not in COMMON_FLAGS:
                raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = val
    return out


def _convert(key: str, val):
    typ = COMMON_FLAGS[key][0]
    try:
        return typ(float(val)) if typ is int and isinstance(val, str) and "e" in val.lower() else typ(val)
    except ValueError:
        raise UsageError(f"bad value for {key}: {val!r}") from None


def resolve_options(ns: argparse.Namespace, env: dict) -> dict:
    """Flag, then config file, then ``NK_SEED`` (seed only), then built-in."""
    cfg = read_config(ns.config) if ns.config else {}
    opts = {}
    for key, (_, default) in COMMON_FLAGS.items():
        val = getattr(ns, key)
        if val is None and key in cfg:
            val = _convert(key, cfg[key])
        if val is None and key == "seed" and env.get("NK_SEED"):
            val = _convert("seed", env["NK_SEED"])
        opts[key] = default if val is None else val
    if opts["seed"] is None:
        opts["seed"] = 0
    if opts["dist"] not in DISTRIBUTIONS:
        raise UsageError(f"unknown distribution {opts['dist']!r}")
    if opts["samples"] < 1 or opts["jobs"] < 1 or opts["chunk_size"] < 1:
        raise UsageError("--samples, --jobs and --chunk-size must be positive")
    return opts


def parse_sweep(spec: str) -> list[dict]:
    """``key=v1,v2;key2=a:b[:step]`` to the list of grid points (last key
    varies fastest)."""
    axes = []
    for part in spec.split(";"):
        part = part.strip()
        if not part:
            continue
        if "=" not in part:
            raise UsageError(f"bad sweep term {part!r}")
        key, vals = (s.strip() for s in part.split("=", 1))
        key = key.lstrip("-").replace("-", "_")
        if key not in COMMON_FLAGS:
            raise UsageError(f"cannot sweep over {key!r}")
        if ":" in vals:
            bits = [int(b) for b in vals.split(":")]
            if len(bits) not in (2, 3):
                raise UsageError(f"bad range {vals!r}")
            step = bits[2] if len(bits) == 3 else 1
            values = list(range(bits[0], bits[1] + 1, step))
        else:
            values = [_convert(key, v.strip()) for v in vals.split(",") if v.strip()]
        if not values:
            raise UsageError(f"empty sweep axis {key!r}")
        axes.append((key, values))
    if not axes:
        raise UsageError("empty sweep")
    keys = [k for k, _ in axes]
    return [dict(zip(keys, combo)) for combo in itertools.product(*(v for _, v in axes))]


def _warnings(opts: dict) -> list[str]:
    w = []
    N, K = opts.get("n_loci"), opts.get("k")
    if N is not None and K is not None and K == N - 1:
        w.append("K = N - 1: exchangeable special case, p = 1/(N+1)")
    return w


def execute(key: tuple[str, ...], opts: dict) -> RunRecord:
    start = time.perf_counter()
    result, n_samples = COMMANDS[key](opts)
    elapsed = int(round((time.perf_counter() - start) * 1000))
    params = {k: v for k, v in opts.items() if v is not None and k not in ("seed",)}
    return RunRecord(" ".join(key), params, result, opts["seed"], n_samples, elapsed, _warnings(opts))


def _write_csv(records: list[RunRecord], out) -> None:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    w.writeheader()
    for rec in records:
        w.writerow(rec.csv_row())
    out.write(buf.getvalue())


def run(argv: list[str] | None = None, *, stdout=None, stderr=None, env=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    env = os.environ if env is None else env
    parser = build_parser()
    try:
        ns = parser.parse_args(argv)
        key = (ns.cmd,) if ns.cmd in ("estimate", "compare-dists") else (ns.cmd, ns.sub)
        opts = resolve_options(ns, env)
        if ns.sweep:
            records = []
            for point in parse_sweep(ns.sweep):
                records.append(execute(key, {**opts, **point}))
            if ns.format == "json":
                for rec in records:
                    stdout.write(rec.to_json() + "\n")
            else:
                _write_csv(records, stdout)
        else:
            rec = execute(key, opts)
            if ns.format == "csv":
                _write_csv([rec], stdout)
            else:
                stdout.write(rec.to_json() + "\n")
    except UsageError as exc:
        stderr.write(f"nk: error: {exc}\n")
        return EXIT_USAGE
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    except InfeasibleSizeError as exc:
        stderr.write(f"nk: infeasible size: {exc}\n")
        return EXIT_INFEASIBLE
    except NumericalFailure as exc:
        stderr.write(f"nk: numerical failure: {exc}\n")
        return EXIT_NUMERIC
    except ValueError as exc:
        stderr.write(f"nk: error: {exc}\n")
        return EXIT_USAGE
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    return run(argv)


if __name__ == "__main__":
    sys.exit(main())
