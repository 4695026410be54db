"""Command line for mabsobs: run, bench, calibrate, map, adaptive-run.

Every subcommand prints a single ``key=value`` summary line on stdout.
Exit status is 0 on success, 2 for configuration or input errors, 3 for
runtime failures and 130 when interrupted (files written so far are kept).
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import bench
from .adaptive import AdaptiveObserver, AdaptivePolicy
from .bench import Scenario, TimingCSVWriter, write_summary_line
from .config import load_plan, load_sim_config
from .maps import CalibrationMap
from .observers import ObservationCSVSink, ObservationMethod
from .sampling import SurveyPlan
from .sim import ConfigurationError, init_simulation, step, streams
from .surfaces import (diff_surface, load_surface, save_surface,
                       write_gnuplot_isolines, zero_isoline)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_INTERRUPTED = 130


def _emit(**fields) -> None:
    print(write_summary_line(**fields), flush=True)


def _csv_list(conv):
    def parse(text: str):
        try:
            return tuple(conv(v) for v in text.split(",") if v.strip())
        except ValueError:
            raise argparse.ArgumentTypeError(f"cannot parse list {text!r}") from None
    return parse


def _sim_overrides(args) -> dict:
    return {"agents": args.agents, "steps": args.steps, "seed": args.seed,
            "zone.coverage": args.coverage,
            "survey.d": getattr(args, "survey_d", None),
            "survey.p": getattr(args, "survey_p", None)}


def _add_sim_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", help="key = value configuration file")
    p.add_argument("--agents", type=int, help="number of agents N")
    p.add_argument("--steps", type=int, help="simulation steps")
    p.add_argument("--seed", type=int, help="master seed (default: config, then OBS_MABS_SEED, then 0)")
    p.add_argument("--coverage", type=float,
                   help="replace the configured zone by a full-width band with this coverage")


def _add_survey_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--survey-d", type=float, help="accepted absolute error on the rate (default 0.08)")
    p.add_argument("--survey-p", type=float, help="expected rate used to size the sample "
                   "(default: zone coverage)")


def _survey_params(config, extras) -> tuple[float, float]:
    d = extras["survey.d"] if extras["survey.d"] is not None else 0.08
    p = extras["survey.p"] if extras["survey.p"] is not None else config.zone.coverage
    return d, p


def _load_policy(args, config, p: float) -> AdaptivePolicy:
    if not args.calibration:
        raise ConfigurationError("adaptive observation needs --calibration <map.json>")
    cmap = CalibrationMap.load(args.calibration)
    return AdaptivePolicy(cmap, p=p, p_mode=args.p_mode, switch_hysteresis=args.hysteresis,
                          always_run_rules=args.always_run_rules)


def _write_meta(out: Path, **doc) -> None:
    doc["provenance"] = bench.host_provenance()
    out.with_name(out.name + ".meta.json").write_text(json.dumps(doc, indent=2))


# -- run / adaptive-run ----------------------------------------------------

def _observed_run(args, method: ObservationMethod) -> int:
    config, extras = load_sim_config(args.config, _sim_overrides(args))
    d, p = _survey_params(config, extras)
    plan = policy = None
    if method is ObservationMethod.SURVEY:
        plan = SurveyPlan.design(config.agents, p, d)
        print(write_summary_line(event="survey_plan", agents=config.agents, p=p, d=d,
                                 sample_size=plan.n), file=sys.stderr, flush=True)
    elif method is ObservationMethod.ADAPTIVE:
        policy = _load_policy(args, config, p)
    config = bench.prepare_config(config, method, policy)

    out = Path(args.out) if args.out else None
    sink = ObservationCSVSink(out) if out else None
    if out:
        _write_meta(out, command=args.command, method=str(method), seed=config.seed,
                    agents=config.agents, steps=config.steps,
                    grid=[config.grid.width, config.grid.height],
                    zone_cells=len(config.zone), survey_d=d, survey_p=p,
                    calibration=getattr(args, "calibration", None))
    last = None
    t0 = time.perf_counter_ns()
    try:
        sim_rng, obs_rng = streams(config.seed)
        state = init_simulation(config, sim_rng)
        observer = bench.build_observer(state, method, obs_rng, plan, policy)
        if isinstance(observer, AdaptiveObserver):
            observer.survey_d = d
        observe = observer.observe
        for _ in range(config.steps):
            step(state)
            if args.record_timing:
                o0 = time.perf_counter_ns()
                last = observe(state)
                last = dataclasses.replace(last, cost_hint=time.perf_counter_ns() - o0)
            else:
                last = observe(state)
            if sink is not None:
                sink.write(last)
    finally:
        if sink is not None:
            sink.close()
    elapsed = (time.perf_counter_ns() - t0) * 1e-9

    fields = dict(command=args.command, method=str(method), agents=config.agents,
                  steps=config.steps, seed=config.seed)
    if plan is not None:
        fields["sample_size"] = plan.n
    if isinstance(observer, AdaptiveObserver):
        fields["delegate"] = str(observer.current)
        fields["switches"] = len(observer.switches) - 1
        fields["group_maintained"] = state.group is not None
    value = last.value
    fields.update(final_step=last.step,
                  final_value=int(value) if last.exact else float(value),
                  exact=last.exact, elapsed_s=elapsed)
    _emit(**fields)
    return EXIT_OK


def cmd_run(args) -> int:
    return _observed_run(args, ObservationMethod.parse(args.method))


def cmd_adaptive_run(args) -> int:
    return _observed_run(args, ObservationMethod.ADAPTIVE)


# -- bench -----------------------------------------------------------------

def cmd_bench(args) -> int:
    config, extras = load_sim_config(args.config, _sim_overrides(args))
    d, p = _survey_params(config, extras)
    n_values = args.n_values or (config.agents,)
    policy = None
    scenarios = []
    for n in n_values:
        sim = config.replace(agents=n)
        for m in args.methods:
            plan = None
            if m is ObservationMethod.SURVEY:
                plan = SurveyPlan.design(n, p, d)
            elif m is ObservationMethod.ADAPTIVE:
                policy = policy or _load_policy(args, config, p)
                plan = SurveyPlan.design(n, p, d)
            scenarios.append(Scenario(sim, m, plan, args.replicates,
                                      policy if m is ObservationMethod.ADAPTIVE else None))
    writer = TimingCSVWriter(args.out) if args.out else None
    try:
        records = bench.time_scenarios(
            scenarios, warmup=not args.no_warmup,
            on_sample=writer.add_sample if writer else None)
    finally:
        if writer is not None:
            writer.close()
    for rec in records:
        s = rec.scenario
        fields = dict(command="bench", method=s.method_name, agents=s.n_agents,
                      rate=s.rate, steps=s.sim.steps, replicates=len(rec.elapsed))
        if s.survey is not None and s.method is ObservationMethod.SURVEY:
            fields["sample_size"] = s.survey.n
        fields.update(median_s=rec.median, iqr_s=rec.iqr)
        _emit(**fields)
    return EXIT_OK


# -- calibrate -------------------------------------------------------------

def calibration_outputs(out: Path) -> dict[str, Path]:
    """Files written next to the map JSON by ``calibrate``."""
    stem = out.with_suffix("")
    return {"map": out, "labels": stem.with_name(stem.name + ".csv"),
            "timings": stem.with_name(stem.name + ".timings.csv")}


def surface_path(out: Path, method: ObservationMethod, suffix: str = ".csv") -> Path:
    stem = out.with_suffix("")
    return stem.with_name(f"{stem.name}.surface-{method}{suffix}")


def cmd_calibrate(args) -> int:
    plan = load_plan(args.plan, {
        "n_values": ",".join(map(str, args.n_values)) if args.n_values else None,
        "p_values": ",".join(map(str, args.p_values)) if args.p_values else None,
        "methods": ",".join(map(str, args.methods)) if args.methods else None,
        "replicates": args.replicates, "steps": args.steps, "seed": args.seed,
        "survey.d": args.survey_d,
    })
    out = Path(args.out)
    paths = calibration_outputs(out)
    t0 = time.perf_counter()
    with TimingCSVWriter(paths["timings"]) as writer:
        records = bench.run_calibration(plan, on_sample=writer.add_sample)
    cmap = bench.fastest_method_map(records, tie_tolerance=args.tie_tolerance,
                                    provenance={"plan": plan.to_dict()})
    cmap.save(paths["map"])
    cmap.save(paths["labels"])
    for m in plan.methods:
        surface = bench.surface_from_records(records, m)
        surface.provenance["plan"] = plan.to_dict()
        save_surface(surface, surface_path(out, m))
        save_surface(surface, surface_path(out, m, ".json"))
    counts = cmap.counts()
    _emit(command="calibrate", cells=cmap.shape[0] * cmap.shape[1],
          rows=cmap.shape[0], cols=cmap.shape[1],
          **{f"n_{m}": counts.get(m, 0) for m in plan.methods},
          map=paths["map"], elapsed_s=time.perf_counter() - t0)
    return EXIT_OK


# -- map -------------------------------------------------------------------

def cmd_map(args) -> int:
    if len(args.surface) != 2:
        raise ConfigurationError("map needs exactly two --surface files (a, then b)")
    a, b = (load_surface(s) for s in args.surface)
    diff = diff_surface(a, b, name=f"{a.name}-minus-{b.name}")
    prefix = Path(args.out)
    for suffix in (".csv", ".json", ".dat"):
        save_surface(diff, prefix.with_name(prefix.name + suffix))
    fields = dict(command="map", rows=diff.cells.shape[0], cols=diff.cells.shape[1],
                  negative_cells=int((diff.cells < 0).sum()),
                  positive_cells=int((diff.cells > 0).sum()))
    if args.isoline:
        lines = zero_isoline(diff)
        write_gnuplot_isolines(lines, prefix.with_name(prefix.name + ".isoline.dat"))
        fields.update(polylines=len(lines), vertices=sum(len(l) for l in lines))
    _emit(**fields)
    return EXIT_OK


# -- entry point -----------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mabsobs", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    methods = [m.value for m in ObservationMethod]

    run = sub.add_parser("run", help="one observed simulation")
    _add_sim_flags(run)
    run.add_argument("--method", default="brute-force", choices=methods)
    _add_survey_flags(run)
    run.add_argument("--calibration", help="calibration map JSON (adaptive method)")
    run.add_argument("--p-mode", default="constant", choices=("constant", "running"))
    run.add_argument("--hysteresis", type=int, default=0)
    run.add_argument("--always-run-rules", action="store_true",
                     help="maintain the self-observation group even when the map cannot pick it")
    run.add_argument("--out", help="per-step observation CSV")
    run.add_argument("--record-timing", action="store_true",
                     help="fill the elapsed_ns column (output is then not reproducible)")
    run.set_defaults(func=cmd_run)

    ad = sub.add_parser("adaptive-run", help="observed run that picks its method from a map")
    _add_sim_flags(ad)
    ad.add_argument("--calibration", required=True, help="calibration map JSON")
    ad.add_argument("--p-mode", default="constant", choices=("constant", "running"))
    ad.add_argument("--hysteresis", type=int, default=0)
    ad.add_argument("--always-run-rules", action="store_true",
                    help="maintain the self-observation group even when the map cannot pick it")
    _add_survey_flags(ad)
    ad.add_argument("--out", help="per-step observation CSV")
    ad.add_argument("--record-timing", action="store_true")
    ad.set_defaults(func=cmd_adaptive_run)

    be = sub.add_parser("bench", help="time whole observed runs")
    _add_sim_flags(be)
    be.add_argument("--methods", type=_csv_list(ObservationMethod.parse),
                    default=bench.MAP_METHODS, help="comma-separated methods")
    be.add_argument("--n-values", type=_csv_list(int), help="sweep these population sizes")
    be.add_argument("--replicates", type=int, default=5)
    be.add_argument("--no-warmup", action="store_true")
    _add_survey_flags(be)
    be.add_argument("--calibration", help="calibration map JSON (adaptive method)")
    be.add_argument("--p-mode", default="constant", choices=("constant", "running"))
    be.add_argument("--hysteresis", type=int, default=0)
    be.add_argument("--always-run-rules", action="store_true")
    be.add_argument("--out", help="timing CSV, one row per replicate")
    be.set_defaults(func=cmd_bench)

    cal = sub.add_parser("calibrate", help="time every method on an (N, p) grid and build the map")
    cal.add_argument("plan", nargs="?", help="key = value plan file")
    cal.add_argument("--out", default="map.json", help="map JSON; other files are written beside it")
    cal.add_argument("--n-values", type=_csv_list(int))
    cal.add_argument("--p-values", type=_csv_list(float))
    cal.add_argument("--methods", type=_csv_list(ObservationMethod.parse))
    cal.add_argument("--replicates", type=int)
    cal.add_argument("--steps", type=int)
    cal.add_argument("--seed", type=int)
    cal.add_argument("--survey-d", type=float)
    cal.add_argument("--tie-tolerance", type=float, default=0.0,
                     help="relative slack within which exact methods win ties")
    cal.set_defaults(func=cmd_calibrate)

    mp = sub.add_parser("map", help="difference of two surfaces and its zero isoline")
    mp.add_argument("--surface", action="append", default=[], required=True,
                    help="surface file (csv/json); give twice, result is first minus second")
    mp.add_argument("--isoline", action="store_true")
    mp.add_argument("--out", required=True, help="output prefix")
    mp.set_defaults(func=cmd_map)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        print("mabsobs: interrupted; partial results kept", file=sys.stderr)
        return EXIT_INTERRUPTED
    except (ValueError, FileNotFoundError) as exc:
        # ConfigurationError, AxisMismatchError, MissingMeasurementError and
        # malformed input files are all ValueErrors
        print(f"mabsobs: error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001 - top-level reporter
        print(f"mabsobs: runtime error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
