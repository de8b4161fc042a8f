"""Command-line front end: simulate, limits, estimate, converge, validate.

Configuration comes from a YAML or JSON file; --seed, --workers, and --out
override the corresponding config entries. Simulation outputs are
deterministic for a given master seed no matter how many workers run, since
every replicate derives its own generator seed from its index.

Exit codes: 0 success, 1 validation failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from . import estimate as est_mod
from . import limits as limits_mod
from . import model as model_mod
from . import sfs as sfs_mod
from . import sim as sim_mod


class CliError(Exception):
    """Configuration or usage problem; maps to exit code 2."""


@dataclass(frozen=True)
class RunConfig:
    model: model_mod.ModelParams
    stop: object
    replicates: int
    master_seed: int
    workers: int
    instrument_js: tuple[int, ...]
    y_extension: float
    output_dir: Path


def _load_config_file(path: str) -> dict:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as e:
        raise CliError(f"cannot read config {path}: {e}") from e
    try:
        if p.suffix == ".json":
            raw = json.loads(text)
        else:
            raw = yaml.safe_load(text)
    except (json.JSONDecodeError, yaml.YAMLError) as e:
        raise CliError(f"cannot parse config {path}: {e}") from e
    if not isinstance(raw, dict):
        raise CliError(f"config {path} must be a mapping at top level")
    return raw


def _parse_stop(raw) -> object:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise CliError("config key 'stop' must be a mapping with a 'kind'")
    kind = raw["kind"]
    try:
        if kind == "fixed_size":
            return sim_mod.FixedSize(int(raw["threshold"]))
        if kind == "fixed_time":
            return sim_mod.FixedTime(float(raw["duration"]))
    except (KeyError, TypeError, ValueError, model_mod.ModelError) as e:
        raise CliError(f"bad stop config: {e}") from e
    raise CliError(f"unknown stop kind {kind!r} (expected fixed_size or fixed_time)")


def _build_run_config(args, *, need_stop: bool = True) -> RunConfig:
    if not args.config:
        raise CliError("--config is required for this command")
    raw = _load_config_file(args.config)
    if "model" not in raw:
        raise CliError("config must contain a 'model' section")
    try:
        params = model_mod.parse_model_config(raw["model"])
    except model_mod.ModelError as e:
        raise CliError(f"bad model config: {e}") from e

    stop = None
    if "stop" in raw:
        stop = _parse_stop(raw["stop"])
    elif need_stop:
        raise CliError("config must contain a 'stop' section for this command")

    def _int_field(name, default, minimum):
        v = raw.get(name, default)
        if not isinstance(v, int) or isinstance(v, bool) or v < minimum:
            raise CliError(f"config '{name}' must be an integer >= {minimum}")
        return v

    replicates = _int_field("replicates", 1, 1)
    master_seed = args.seed if args.seed is not None else _int_field("master_seed", 0, 0)
    workers = args.workers if args.workers is not None else _int_field("workers", 1, 1)
    instrument = raw.get("instrument", [])
    if not isinstance(instrument, list):
        raise CliError("config 'instrument' must be a list of multiplicities")
    y_extension = raw.get("y_extension", 0.0)
    if isinstance(y_extension, int) and not isinstance(y_extension, bool):
        y_extension = float(y_extension)
    if not isinstance(y_extension, float) or not math.isfinite(y_extension) or y_extension < 0:
        raise CliError("config 'y_extension' must be a finite nonnegative number")
    out = Path(args.out) if args.out else Path(raw.get("output_dir", "gwsfs-out"))
    try:
        return RunConfig(
            model=params, stop=stop, replicates=replicates, master_seed=master_seed,
            workers=workers, instrument_js=tuple(instrument), y_extension=y_extension,
            output_dir=out,
        )
    except model_mod.ModelError as e:
        raise CliError(str(e)) from e


def _replicate_record(r: sim_mod.ReplicateResult) -> dict:
    counters = None
    if r.counters is not None:
        counters = {
            str(j): {"enters": c.enters, "exits": c.exits}
            for j, c in sorted(r.counters.items())
        }
    return {
        "index": r.index,
        "seed": r.seed,
        "stop_reason": r.stop_reason.value,
        "survived": r.survived,
        "final_time": r.final_time,
        "final_pop": r.final_pop,
        "total_mutations": r.total_mutations,
        "y_hat": r.y_hat,
        "tau_n": r.tau_n,
        "t_n_hat": r.t_n_hat,
        "sfs": {str(j): c for j, c in sorted(r.sfs.items())},
        "counters": counters,
    }


def _aggregate_mode(cfg: RunConfig):
    if isinstance(cfg.stop, sim_mod.FixedSize):
        return sfs_mod.MeanNormalizedFixedSize(cfg.stop.threshold)
    growth = model_mod.derive(cfg.model).growth_rate
    return sfs_mod.MeanNormalizedFixedTime(cfg.stop.duration, growth)


def cmd_simulate(args) -> int:
    cfg = _build_run_config(args)
    opts = sim_mod.SimOptions(instrument=cfg.instrument_js, y_extension=cfg.y_extension)
    results = sim_mod.run_batch(
        cfg.model, cfg.stop, cfg.replicates, opts,
        master_seed=cfg.master_seed, workers=cfg.workers,
    )
    fmt = args.format
    out = cfg.output_dir
    out.mkdir(parents=True, exist_ok=True)

    with open(out / "replicates.jsonl", "w") as fh:
        for r in results:
            fh.write(json.dumps(_replicate_record(r), sort_keys=True) + "\n")

    survivors = [r for r in results if r.survived]
    if survivors:
        pooled = sfs_mod.pool_spectra(results)
        rows = sfs_mod.aggregate(results, _aggregate_mode(cfg))
        if fmt == "json":
            (out / "sfs_pooled.json").write_text(sfs_mod.spectrum_to_json(pooled))
            (out / "sfs_aggregate.json").write_text(sfs_mod.aggregate_to_json(rows))
        else:
            (out / "sfs_pooled.csv").write_text(sfs_mod.spectrum_to_csv(pooled))
            (out / "sfs_aggregate.csv").write_text(sfs_mod.aggregate_to_csv(rows))
    else:
        # nothing survived; emit headers so downstream parsers see the shape
        if fmt == "json":
            (out / "sfs_pooled.json").write_text("{}\n")
            (out / "sfs_aggregate.json").write_text("[]\n")
        else:
            (out / "sfs_pooled.csv").write_text("j,count\n")
            (out / "sfs_aggregate.csv").write_text("j,mean,std_error,n_replicates\n")

    # workers and output location deliberately left out: the directory's
    # contents must be byte-identical no matter how the work was scheduled
    meta = {
        "version": __version__,
        "model": {
            "lifetime_rate": cfg.model.lifetime_rate,
            "mutation_rate": cfg.model.mutation_rate,
            "offspring": {str(k): v for k, v in enumerate(cfg.model.offspring.probs) if v},
        },
        "stop": (
            {"kind": "fixed_size", "threshold": cfg.stop.threshold}
            if isinstance(cfg.stop, sim_mod.FixedSize)
            else {"kind": "fixed_time", "duration": cfg.stop.duration}
        ),
        "replicates": cfg.replicates,
        "master_seed": cfg.master_seed,
        "instrument": list(cfg.instrument_js),
        "y_extension": cfg.y_extension,
        "n_survivors": len(survivors),
        "format": fmt,
    }
    (out / "meta.json").write_text(json.dumps(meta, sort_keys=True, indent=2) + "\n")
    print(f"wrote {cfg.replicates} replicates ({len(survivors)} surviving) to {out}")
    return 0


def cmd_limits(args) -> int:
    cfg = _build_run_config(args, need_stop=False)
    params = cfg.model
    method = args.method
    if method == "auto":
        method = "series" if params.offspring.is_binary_fission() else "ode"
    js = range(1, args.max_j + 1)
    try:
        if method in ("series", "quadrature"):
            spec = limits_mod.BirthDeathSpec.from_params(params)
            if method == "series":
                tol = args.tol if args.tol is not None else 1e-10
                values = {j: limits_mod.bd_sfs_limit(spec, j, tol=tol) for j in js}
            else:
                values = {j: limits_mod.bd_sfs_limit_quadrature(spec, j) for j in js}
        elif method == "ode":
            # the ODE stabilization target has its own, looser default
            opts = (limits_mod.LimitOptions(tol=args.tol)
                    if args.tol is not None else limits_mod.LimitOptions())
            values = limits_mod.general_sfs_limits(params, tuple(js), opts)
        else:  # pragma: no cover - argparse restricts choices
            raise CliError(f"unknown method {method!r}")
    except limits_mod.NotBirthDeathError as e:
        raise CliError(str(e)) from e
    except limits_mod.BudgetExceededError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    if args.format == "json":
        payload = [
            {"j": j, "limit": v.value, "tail_bound": v.tail_bound}
            for j, v in sorted(values.items())
        ]
        print(json.dumps(payload, indent=2))
    else:
        print("j,limit,tail_bound")
        for j, v in sorted(values.items()):
            print(f"{j},{v.value!r},{v.tail_bound!r}")
    return 0


def cmd_estimate(args) -> int:
    path = Path(args.sfs)
    try:
        text = path.read_text()
    except OSError as e:
        raise CliError(f"cannot read spectrum {args.sfs}: {e}") from e
    try:
        if path.suffix == ".json":
            spectrum = sfs_mod.spectrum_from_json(text)
        else:
            spectrum = sfs_mod.spectrum_from_csv(text)
    except (model_mod.ModelError, json.JSONDecodeError, ValueError) as e:
        raise CliError(f"bad spectrum file: {e}") from e

    if args.population_size is not None:
        if args.time is not None or args.growth_rate is not None or args.y_hat is not None:
            raise CliError("--population-size excludes --time/--lambda/--y-hat")
        basis = est_mod.FixedSizeBasis(args.population_size)
    else:
        if args.time is None or args.growth_rate is None or args.y_hat is None:
            raise CliError(
                "need either --population-size or all of --time, --lambda, --y-hat"
            )
        basis = est_mod.FixedTimeBasis(args.time, args.growth_rate, args.y_hat)

    degenerate = False
    try:
        report = est_mod.estimate_from_spectrum(spectrum, basis, j=args.j)
    except est_mod.DegenerateEstimateError as e:
        report = e.report
        degenerate = True
    except sfs_mod.EmptySpectrumError as e:
        raise CliError(str(e)) from e
    payload = {
        "p_hat": report.p_hat,
        "q_hat": report.q_hat,
        "effective_mutation_rate_hat": report.effective_mutation_rate_hat,
        "j_used": report.j_used,
        "x_observed": report.x_observed,
        "clamped": report.clamped,
        "degenerate": degenerate,
    }
    print(json.dumps(payload, indent=2))
    return 0


def _limit_values(params, js):
    if params.offspring.is_binary_fission():
        spec = limits_mod.BirthDeathSpec.from_params(params)
        return {j: limits_mod.bd_sfs_limit(spec, j, tol=1e-10).value for j in js}
    vals = limits_mod.general_sfs_limits(params, tuple(js))
    return {j: v.value for j, v in vals.items()}


def cmd_converge(args) -> int:
    cfg = _build_run_config(args, need_stop=False)
    if bool(args.scales) == bool(args.times):
        raise CliError("exactly one of --scales (sizes) or --times is required")
    growth = model_mod.derive(cfg.model).growth_rate
    js = list(range(1, args.max_j + 1))
    limits_by_j = _limit_values(cfg.model, js)

    rows = []
    gaps = {}
    if args.scales:
        scales = _parse_scale_list(args.scales, int)
        # the hitting-gap statistic needs a post-stop window for y_hat;
        # without one t_n_hat collapses to tau_n identically
        y_ext = cfg.y_extension if cfg.y_extension > 0 else 4.0 / growth
        for si, n in enumerate(scales):
            opts = sim_mod.SimOptions(y_extension=y_ext)
            results = sim_mod.run_batch(
                cfg.model, sim_mod.FixedSize(n), cfg.replicates, opts,
                master_seed=sim_mod.replicate_seed(cfg.master_seed, si),
                workers=cfg.workers,
            )
            survivors = [r for r in results if r.survived]
            if not survivors:
                raise CliError(f"no surviving replicates at scale {n}")
            for j in js:
                mean, se = sfs_mod.mean_and_se(r.sfs.get(j, 0) / n for r in survivors)
                rows.append((n, j, mean, limits_by_j[j], abs(mean - limits_by_j[j]), se))
            gaps[n] = float(np.median([abs(r.tau_n - r.t_n_hat) for r in survivors]))
    else:
        times = _parse_scale_list(args.times, float)
        y_ext = cfg.y_extension if cfg.y_extension > 0 else 4.0 / growth
        for si, t in enumerate(times):
            opts = sim_mod.SimOptions(y_extension=y_ext)
            results = sim_mod.run_batch(
                cfg.model, sim_mod.FixedTime(t), cfg.replicates, opts,
                master_seed=sim_mod.replicate_seed(cfg.master_seed, si),
                workers=cfg.workers,
            )
            survivors = [r for r in results if r.survived and r.y_hat > 0]
            if not survivors:
                raise CliError(f"no surviving replicates at time {t}")
            scale_factor = math.exp(-growth * t)
            for j in js:
                mean, se = sfs_mod.mean_and_se(
                    scale_factor * r.sfs.get(j, 0) / r.y_hat for r in survivors
                )
                rows.append((t, j, mean, limits_by_j[j], abs(mean - limits_by_j[j]), se))

    if args.format == "json":
        payload = {
            "rows": [
                {"scale": s, "j": j, "mean": m, "limit": li, "abs_error": err,
                 "std_error": se}
                for s, j, m, li, err, se in rows
            ],
            "median_hitting_gap": {str(k): v for k, v in gaps.items()},
        }
        print(json.dumps(payload, indent=2))
    else:
        print("scale,j,mean,limit,abs_error,std_error")
        for s, j, m, li, err, se in rows:
            se_txt = "" if se is None else repr(se)
            print(f"{s},{j},{m!r},{li!r},{err!r},{se_txt}")
        if gaps:
            print("scale,median_hitting_gap")
            for k, v in gaps.items():
                print(f"{k},{v!r}")
    return 0


def _parse_scale_list(text: str, cast):
    try:
        vals = [cast(part) for part in text.split(",") if part.strip()]
    except ValueError as e:
        raise CliError(f"bad scale list {text!r}: {e}") from e
    if not vals:
        raise CliError("scale list is empty")
    if any(b <= a for a, b in zip(vals, vals[1:])):
        raise CliError("scales must be strictly increasing")
    return vals


# ---------------------------------------------------------------------------
# validate: the built-in invariant suite


def _check_decomposition(params, seed):
    opts = sim_mod.SimOptions(instrument=(1, 2, 3))
    for i in range(30):
        r = sim_mod.run(params, sim_mod.FixedSize(150), opts,
                        seed=sim_mod.replicate_seed(seed, i))
        checks = sim_mod.verify_decomposition(r)
        if not all(checks.values()):
            return False, f"replicate {i}: enters-exits mismatch {checks}"
    return True, "enters - exits reproduced the spectrum in 30/30 replicates"


def _check_engine_parity(params, seed):
    for i in range(5):
        s = sim_mod.replicate_seed(seed, 1000 + i)
        for stop in (sim_mod.FixedSize(60), sim_mod.FixedTime(3.0)):
            opts = sim_mod.SimOptions(instrument=(1, 2), y_extension=1.5)
            a = sim_mod.run(params, stop, opts, seed=s)
            b = sim_mod.run_reference(params, stop, opts, seed=s)
            if a != b:
                return False, f"compiled and reference engines diverged (seed {s}, {stop})"
    return True, "compiled and reference engines bit-identical on 10 runs"


def _check_bookkeeping(params, seed):
    rng = np.random.default_rng(seed)
    state = sim_mod.PopulationState(params, rng, instrument=(1, 2, 3))
    from . import _kernel
    for step in range(3000):
        if state.population_size == 0:
            break
        state.step()
        if _kernel.fenwick_total(state._tree) != state.population_size:
            return False, f"step {step}: tree total != population size"
        if int(state.live[: state.n_nodes].sum()) != state.population_size:
            return False, f"step {step}: live counts != population size"
    sfs = sim_mod.snapshot_sfs(state)
    pairs = sum(j * c for j, c in sfs.items())
    # each live individual carries depth-many mutations
    direct = int((state.live[: state.n_nodes] * state.depth[: state.n_nodes]).sum())
    if pairs != direct:
        return False, f"carrier pairs {pairs} != per-individual count {direct}"
    return True, "tree totals, live counts, and carrier pairs all consistent"


def _check_limit_routes(params):
    for p in (0.0, 1.0 / 3.0):
        lam = (1 - p) / (1 + p)
        spec = limits_mod.BirthDeathSpec(p, lam, 1.0)
        bd = model_mod.ModelParams(
            1.0, 1.0,
            model_mod.OffspringDistribution.from_mapping({0: p / (1 + p), 2: 1 / (1 + p)}),
        )
        ode = limits_mod.general_sfs_limits(bd, (1, 2, 3, 4, 5))
        for j in range(1, 6):
            series = limits_mod.bd_sfs_limit(spec, j, tol=1e-12)
            quad = limits_mod.bd_sfs_limit_quadrature(spec, j)
            if abs(series.value - quad.value) > 1e-6:
                return False, f"series vs quadrature at p={p}, j={j}"
            if abs(series.value - ode[j].value) > 1e-6:
                return False, f"series vs ODE at p={p}, j={j}"
    return True, "series, quadrature, and ODE routes agree to 1e-6"


def _check_transition_probs():
    for p, t in ((0.0, 1.0), (1.0 / 3.0, 2.5), (0.7, 0.4)):
        lam = (1 - p) / (1 + p)
        spec = limits_mod.BirthDeathSpec(p, lam, 1.0)
        total = sum(limits_mod.bd_transition_prob(spec, j, t) for j in range(3000))
        if abs(total - 1.0) > 1e-9:
            return False, f"size probabilities at p={p}, t={t} sum to {total}"
    return True, "size distributions sum to 1"


def _check_phi():
    grid = np.linspace(0.0, 0.999, 200)
    for j in range(1, 6):
        vals = [est_mod.phi_j(float(p), j) for p in grid]
        if not all(a > b for a, b in zip(vals, vals[1:])):
            return False, f"phi_{j} not strictly decreasing"
        if not all(0 < v <= 1 / (j + 1) for v in vals):
            return False, f"phi_{j} out of range"
        for p in np.arange(0.1, 0.95, 0.1):
            ph, _ = est_mod.invert_phi_j(est_mod.phi_j(float(p), j), j)
            if abs(ph - p) > 1e-8:
                return False, f"round trip failed at p={p}, j={j}"
    closed = max(abs(est_mod.phi1(float(p)) - est_mod.phi_j(float(p), 1))
                 for p in np.linspace(0.01, 0.99, 99))
    if closed > 1e-12:
        return False, f"phi1 closed form vs series differ by {closed}"
    return True, "phi monotone, in range, invertible; closed form matches series"


def _check_estimator_example():
    rep = est_mod.estimate_from_spectrum({1: 1, 2: 1}, est_mod.FixedSizeBasis(10))
    if rep.p_hat != 0.0 or abs(rep.effective_mutation_rate_hat - 0.2) > 1e-15:
        return False, f"boundary example gave {rep}"
    return True, "boundary spectrum example reproduces the known estimate"


def _check_general_limit_mc(params, seed):
    d = model_mod.derive(params)
    limit = limits_mod.general_sfs_limit(params, 1).value
    n = 2000
    results = sim_mod.run_batch(params, sim_mod.FixedSize(n), 400, master_seed=seed)
    survivors = [r for r in results if r.survived]
    if len(survivors) < 50:
        return False, f"only {len(survivors)} survivors in the Monte Carlo cross-check"
    mean, se = sfs_mod.mean_and_se(r.sfs.get(1, 0) / n for r in survivors)
    # finite-size bias at n=2000 is well under one SE at this replicate count
    if abs(mean - limit) > 4 * se:
        return False, f"Monte Carlo mean {mean:.4f} vs ODE limit {limit:.4f} (SE {se:.4f})"
    return True, f"Monte Carlo mean within 4 SE of the ODE limit ({mean:.4f} vs {limit:.4f})"


def cmd_validate(args) -> int:
    if args.config:
        cfg = _build_run_config(args, need_stop=False)
        params = cfg.model
        seed = cfg.master_seed
    else:
        params = model_mod.ModelParams(
            1.0, 1.0, model_mod.OffspringDistribution.from_mapping({0: 0.25, 2: 0.75})
        )
        seed = args.seed if args.seed is not None else 0
    checks = [
        ("decomposition", lambda: _check_decomposition(params, seed)),
        ("engine-parity", lambda: _check_engine_parity(params, seed)),
        ("bookkeeping", lambda: _check_bookkeeping(params, seed)),
        ("limit-routes", lambda: _check_limit_routes(params)),
        ("transition-probs", _check_transition_probs),
        ("phi-properties", _check_phi),
        ("estimator-example", _check_estimator_example),
    ]
    if not params.offspring.is_binary_fission():
        checks.append(("general-limit-mc", lambda: _check_general_limit_mc(params, seed)))
    failures = 0
    for name, fn in checks:
        try:
            ok, detail = fn()
        except Exception as e:  # a crash is a failure, not an abort
            ok, detail = False, f"raised {type(e).__name__}: {e}"
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
        if not ok:
            failures += 1
    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="gwsfs",
        description="Branching-population simulator and site-frequency-spectrum toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--config", help="YAML or JSON configuration file")
        p.add_argument("--seed", type=int, help="master seed (overrides config)")
        p.add_argument("--workers", type=int, help="worker threads (overrides config)")
        p.add_argument("--out", help="output directory (overrides config)")
        p.add_argument("--format", choices=("csv", "json"), default="csv",
                       help="table format (default csv)")

    p_sim = sub.add_parser("simulate", help="run a replicate batch and write its outputs")
    add_common(p_sim)

    p_lim = sub.add_parser("limits", help="print theoretical limit values")
    add_common(p_lim)
    p_lim.add_argument("--method", choices=("auto", "series", "quadrature", "ode"),
                       default="auto",
                       help="evaluation route (auto: closed form when available)")
    p_lim.add_argument("--max-j", type=int, default=10, help="largest multiplicity")
    p_lim.add_argument("--tol", type=float, default=None,
                   help="series tolerance or ODE stabilization target (per-method default)")

    p_est = sub.add_parser("estimate", help="estimate extinction probability from a spectrum")
    add_common(p_est)
    p_est.add_argument("--sfs", required=True, help="spectrum file (CSV j,count or JSON)")
    p_est.add_argument("--population-size", type=int,
                       help="population size when the spectrum was taken")
    p_est.add_argument("--time", type=float, help="observation time (fixed-time basis)")
    p_est.add_argument("--lambda", dest="growth_rate", type=float,
                       help="growth rate (fixed-time basis)")
    p_est.add_argument("--y-hat", type=float,
                       help="growth-normalized size estimate (fixed-time basis)")
    p_est.add_argument("--j", type=int, default=1, help="multiplicity used for inversion")

    p_con = sub.add_parser("converge", help="empirical means vs limits across scales")
    add_common(p_con)
    p_con.add_argument("--scales", help="comma-separated size thresholds")
    p_con.add_argument("--times", help="comma-separated observation times")
    p_con.add_argument("--max-j", type=int, default=5, help="largest multiplicity")

    p_val = sub.add_parser("validate", help="run the built-in invariant suite")
    add_common(p_val)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "simulate": cmd_simulate,
        "limits": cmd_limits,
        "estimate": cmd_estimate,
        "converge": cmd_converge,
        "validate": cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except CliError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except model_mod.ModelError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except sfs_mod.NoSurvivorsError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
