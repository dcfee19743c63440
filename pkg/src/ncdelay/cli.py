"""Command-line front end.

    ncdelay generate --family uniform-pairs --n 100 --k 20 --seed 1 --out inst.sfm
    ncdelay run --preset fig5 --trials 50 --out fig5.csv
    ncdelay oracle inst.sfm --oracle perfect
    ncdelay simulate inst.sfm sched.txt
    ncdelay schedule inst.sfm --scheduler VC_ALG1
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import math
import statistics
import sys
import time
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

from .graphs import conflict_graph
from .instance import (
    InstanceError,
    StateFeedbackMatrix,
    gen_bernoulli,
    gen_complete_graph_instance,
    gen_efl_instance,
    gen_uniform_pairs,
    parse_sfm,
    render_sfm,
)
from .oracles import GuardError, check_efl, dmin_bruteforce, mwis_exact, perfect_solution_exists
from .schedulers import SchedulerError, SchedulerSpec
from .simulator import parse_schedule, render_report_csv, render_schedule, simulate

FAMILIES = ("bernoulli", "uniform-pairs", "complete-graph", "efl", "file")

SUMMARY_FIELDS = [
    "n_receivers",
    "scheduler",
    "mean_apdd",
    "stderr_apdd",
    "mean_lower_bound",
    "mean_schedule_len",
    "frac_throughput_optimal",
]
ROW_FIELDS = [
    "n_receivers",
    "trial",
    "seed",
    "scheduler",
    "apdd",
    "lower_bound",
    "rlnc_closed_form",
    "throughput_optimal",
    "schedule_len",
    "error",
]

PRESETS = {
    # Bernoulli sweep at K=15 and K=20; uniform pairs at K=20.
    "fig3": dict(family="bernoulli", k=15, p=0.2, n_min=5, n_max=100, n_step=5,
                 schedulers="VC_ALG1,RLNC,G_IDNC"),
    "fig3-k20": dict(family="bernoulli", k=20, p=0.2, n_min=5, n_max=100, n_step=5,
                     schedulers="VC_ALG1,RLNC,G_IDNC"),
    "fig5": dict(family="uniform-pairs", k=20, n_min=5, n_max=100, n_step=5,
                 schedulers="MIS_EXACT,MIS_GREEDY,RLNC,G_IDNC"),
}

RUN_DEFAULTS = dict(
    family="bernoulli", k=15, p=0.2, r=3, n_min=5, n_max=100, n_step=5,
    schedulers="VC_ALG1,RLNC,G_IDNC", trials=50, seed=0, workers=1, out=None, rows=None,
    mwis_mode="exact", instance=None,
)


def fmt(x) -> str:
    return f"{float(x):.6f}"


def trial_seed(base: int, n: int, trial: int) -> int:
    digest = hashlib.sha256(f"{base}:{n}:{trial}".encode()).digest()
    return int.from_bytes(digest[:8], "big") >> 1


@dataclass
class ExperimentConfig:
    family: str
    k: int
    p: float
    r: int
    n_values: list[int]
    schedulers: list[SchedulerSpec]
    trials: int
    seed: int
    instance: StateFeedbackMatrix | None = None
    workers: int = 1

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown family {self.family!r}")
        if not self.n_values:
            raise ValueError("receiver range is empty")
        if self.trials < 1:
            raise ValueError("trials must be >= 1")
        if not self.schedulers:
            raise ValueError("no schedulers given")
        if self.family == "file" and self.instance is None:
            raise ValueError("family 'file' needs --instance")

    def make_instance(self, n: int, seed: int) -> StateFeedbackMatrix:
        if self.family == "bernoulli":
            return gen_bernoulli(n, self.k, self.p, seed)
        if self.family == "uniform-pairs":
            return gen_uniform_pairs(n, self.k, seed)
        if self.family == "complete-graph":
            return gen_complete_graph_instance(self.k)
        if self.family == "efl":
            return gen_efl_instance(self.r, seed)
        return self.instance


def run_point(cfg: ExperimentConfig, n: int) -> list[dict]:
    rows = []
    for trial in range(cfg.trials):
        seed = trial_seed(cfg.seed, n, trial)
        a = cfg.make_instance(n, seed)
        lb = a.lower_bound()
        rlnc = a.rlnc_apdd()
        for spec in cfg.schedulers:
            row = dict(n_receivers=n, trial=trial, seed=seed, scheduler=spec.label,
                       apdd="", lower_bound=fmt(lb), rlnc_closed_form=fmt(rlnc),
                       throughput_optimal="", schedule_len="", error="")
            try:
                s = spec.build(a, seed)
                rep = simulate(a, s)
                if not rep.complete:
                    raise SchedulerError("schedule left some receiver incomplete")
                row.update(apdd=fmt(rep.apdd), throughput_optimal=int(rep.throughput_optimal),
                           schedule_len=len(s))
            except (SchedulerError, InstanceError, ValueError, RuntimeError) as exc:
                row["error"] = f"{type(exc).__name__}: {exc}"
            rows.append(row)
    return rows


def summarize(cfg: ExperimentConfig, rows: list[dict]) -> list[dict]:
    out = []
    for n in cfg.n_values:
        for spec in cfg.schedulers:
            ok = [r for r in rows if r["n_receivers"] == n and r["scheduler"] == spec.label
                  and not r["error"]]
            summary = dict.fromkeys(SUMMARY_FIELDS, "")
            summary.update(n_receivers=n, scheduler=spec.label)
            if ok:
                apdds = [float(r["apdd"]) for r in ok]
                stderr = statistics.stdev(apdds) / math.sqrt(len(apdds)) if len(apdds) > 1 else 0.0
                summary.update(
                    mean_apdd=fmt(statistics.fmean(apdds)),
                    stderr_apdd=fmt(stderr),
                    mean_lower_bound=fmt(statistics.fmean(float(r["lower_bound"]) for r in ok)),
                    mean_schedule_len=fmt(statistics.fmean(r["schedule_len"] for r in ok)),
                    frac_throughput_optimal=fmt(statistics.fmean(r["throughput_optimal"] for r in ok)),
                )
            out.append(summary)
    return out


def run_experiment(cfg: ExperimentConfig) -> tuple[list[dict], list[dict]]:
    if cfg.workers > 1 and len(cfg.n_values) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_point = list(pool.map(run_point, [cfg] * len(cfg.n_values), cfg.n_values))
    else:
        per_point = [run_point(cfg, n) for n in cfg.n_values]
    rows = [r for point in per_point for r in point]
    return rows, summarize(cfg, rows)


def to_csv(fields: list[str], rows: list[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def read_config(path: str) -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    with open(path) as fh:
        for i, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{i}: expected key=value")
            key, value = (s.strip() for s in line.split("=", 1))
            values[key.replace("-", "_")] = value
    return values


def _coerce(settings: dict) -> dict:
    types = dict(k=int, p=float, r=int, n_min=int, n_max=int, n_step=int, trials=int,
                 seed=int, workers=int)
    unknown = set(settings) - set(RUN_DEFAULTS)
    if unknown:
        raise ValueError(f"unknown setting(s): {', '.join(sorted(unknown))}")
    return {key: types[key](v) if key in types and v is not None else v
            for key, v in settings.items()}


def build_config(args) -> tuple[ExperimentConfig, dict]:
    settings = dict(RUN_DEFAULTS)
    if args.preset:
        settings.update(PRESETS[args.preset])
    if args.config:
        settings.update(read_config(args.config))
    settings.update({k: v for k, v in vars(args).items() if k in RUN_DEFAULTS and v is not None})
    settings = _coerce(settings)
    if settings["n_step"] < 1:
        raise ValueError("--n-step must be >= 1")
    instance = None
    if settings["family"] == "file":
        if not settings["instance"]:
            raise ValueError("family 'file' needs --instance")
        with open(settings["instance"]) as fh:
            instance = parse_sfm(fh.read())
        n_values = [instance.n_receivers]
    elif settings["family"] in ("complete-graph", "efl"):
        n_values = [settings["k"] * (settings["k"] - 1) // 2
                    if settings["family"] == "complete-graph" else settings["r"]]
    else:
        n_values = list(range(settings["n_min"], settings["n_max"] + 1, settings["n_step"]))
    specs = [SchedulerSpec.parse(s, settings["mwis_mode"])
             for s in settings["schedulers"].split(",") if s.strip()]
    cfg = ExperimentConfig(
        family=settings["family"], k=settings["k"], p=settings["p"], r=settings["r"],
        n_values=n_values, schedulers=specs, trials=settings["trials"], seed=settings["seed"],
        instance=instance, workers=settings["workers"],
    )
    return cfg, settings


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w", newline="") as fh:
            fh.write(text)


def _read_sfm(path: str) -> StateFeedbackMatrix:
    with open(path) as fh:
        return parse_sfm(fh.read())


def cmd_run(args) -> int:
    cfg, settings = build_config(args)
    rows, summary = run_experiment(cfg)
    _write(settings["out"], to_csv(SUMMARY_FIELDS, summary))
    if settings["rows"]:
        _write(settings["rows"], to_csv(ROW_FIELDS, rows))
    errors = [r for r in rows if r["error"]]
    for r in errors[:10]:
        print(f"error: N={r['n_receivers']} trial={r['trial']} {r['scheduler']}: {r['error']}",
              file=sys.stderr)
    if len(errors) > 10:
        print(f"error: ... {len(errors) - 10} more", file=sys.stderr)
    return 1 if errors else 0


def instance_summary(a: StateFeedbackMatrix) -> str:
    hist = Counter(a.w)
    lb, rl = a.lower_bound(), a.rlnc_apdd()
    return "\n".join([
        f"N={a.n_receivers} K={a.n_packets} sum_w={a.sum_w()}",
        "w_histogram=" + ",".join(f"{w}:{hist[w]}" for w in sorted(hist)),
        f"lower_bound={lb} ({float(lb):.6f})",
        f"rlnc_apdd={rl} ({float(rl):.6f})",
    ]) + "\n"


def cmd_generate(args) -> int:
    fam = args.family
    if fam == "bernoulli":
        a = gen_bernoulli(args.n, args.k, args.p, args.seed)
    elif fam == "uniform-pairs":
        a = gen_uniform_pairs(args.n, args.k, args.seed)
    elif fam == "complete-graph":
        a = gen_complete_graph_instance(args.k)
    else:
        a = gen_efl_instance(args.r, args.seed)
    _write(args.out, render_sfm(a))
    summary_stream = sys.stderr if args.out in (None, "-") else sys.stdout
    summary_stream.write(instance_summary(a))
    return 0


def cmd_oracle(args) -> int:
    a = _read_sfm(args.instance)
    start = time.perf_counter()
    lines = [f"oracle={args.oracle}"]
    if args.oracle == "dmin":
        res = dmin_bruteforce(a, args.lmax, max_receivers=args.max_n, max_packets=args.max_k)
        value = res.value
        lines.append(f"value={value}" + ("" if value == math.inf else f" ({float(value):.6f})"))
        witness = render_schedule(res.witness).rstrip("\n").splitlines() if res.witness else []
    elif args.oracle == "perfect":
        res = perfect_solution_exists(a)
        lines.append(f"value={'true' if res.value else 'false'}")
        witness = [" ".join(map(str, c)) for c in res.witness] if res.witness else []
    elif args.oracle == "mwis":
        res = mwis_exact(conflict_graph(a))
        lines.append(f"value={res.value}")
        witness = [" ".join(map(str, sorted(res.witness)))]
    else:
        ok = check_efl(a)
        res = perfect_solution_exists(a)
        lines.append(f"value={'true' if ok else 'false'}")
        witness = [" ".join(map(str, c)) for c in res.witness] if res.witness else []
    lines.append(f"exhausted={'true' if res.exhausted else 'false'}")
    lines.append(f"search_bound={res.search_bound}")
    lines.append("witness:")
    lines += witness
    lines.append(f"wall_time_s={time.perf_counter() - start:.3f}")
    print("\n".join(lines))
    return 0


def cmd_simulate(args) -> int:
    a = _read_sfm(args.instance)
    with open(args.schedule) as fh:
        s = parse_schedule(fh.read(), args.seed)
    report = simulate(a, s)
    _write(args.out, render_report_csv(report, a))
    return 0 if report.complete else 1


def cmd_schedule(args) -> int:
    a = _read_sfm(args.instance)
    spec = SchedulerSpec.parse(args.scheduler, args.mwis_mode)
    _write(args.out, render_schedule(spec.build(a, args.seed)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ncdelay", description=__doc__.splitlines()[0] or None)
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a random or structured instance")
    g.add_argument("--family", choices=FAMILIES[:-1], required=True)
    g.add_argument("--n", type=int, default=10)
    g.add_argument("--k", type=int, default=15)
    g.add_argument("--p", type=float, default=0.2)
    g.add_argument("--r", type=int, default=3)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out")
    g.set_defaults(func=cmd_generate)

    r = sub.add_parser("run", help="sweep schedulers over instance families, write CSV")
    r.add_argument("--config", help="flat key=value file; flags override it")
    r.add_argument("--preset", choices=sorted(PRESETS))
    r.add_argument("--family", choices=FAMILIES)
    r.add_argument("--instance", help="SFM file for --family file")
    r.add_argument("--k", type=int)
    r.add_argument("--p", type=float)
    r.add_argument("--r", type=int)
    r.add_argument("--n-min", type=int)
    r.add_argument("--n-max", type=int)
    r.add_argument("--n-step", type=int)
    r.add_argument("--schedulers", help="comma list, e.g. VC_ALG1,RLNC,G_IDNC,MIS_EXACT")
    r.add_argument("--mwis-mode", choices=("exact", "greedy"))
    r.add_argument("--trials", type=int)
    r.add_argument("--seed", type=int)
    r.add_argument("--workers", type=int)
    r.add_argument("--out", help="summary CSV (default stdout)")
    r.add_argument("--rows", help="optional per-trial CSV")
    r.set_defaults(func=cmd_run)

    o = sub.add_parser("oracle", help="run an exhaustive oracle on a small instance")
    o.add_argument("instance")
    o.add_argument("--oracle", choices=("dmin", "perfect", "mwis", "efl"), default="dmin")
    o.add_argument("--lmax", type=int)
    o.add_argument("--max-n", type=int, default=5)
    o.add_argument("--max-k", type=int, default=5)
    o.set_defaults(func=cmd_oracle)

    s = sub.add_parser("simulate", help="play a schedule file against an instance")
    s.add_argument("instance")
    s.add_argument("schedule")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("schedule", help="write the schedule a scheduler produces")
    c.add_argument("instance")
    c.add_argument("--scheduler", required=True)
    c.add_argument("--mwis-mode", choices=("exact", "greedy"), default="exact")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--out")
    c.set_defaults(func=cmd_schedule)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"guard: {exc}", file=sys.stderr)
        return 2
    except (InstanceError, SchedulerError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
