"""Command-line scenario runner.

A scenario is a JSON document with four sections::

    {
      "model": {"kind": "symmetric-bernoulli", "intensity": 1.0},
      "task":  {"name": "price-vasicek", ...},
      "mc":    {"seed": 7, "paths": 20000, "grid": {"horizon": 1.0, "steps": 4}},
      "io":    {"output_dir": "out", "curve_csv": "curve.csv"}
    }

Unknown keys are rejected.  Relative paths are resolved against the
directory of the config file.  ``--config`` also accepts the name of a
bundled scenario (see ``--list``).

Exit codes: 0 success, 1 a reported check failed, 2 configuration error,
3 data error, 4 numerical error, 5 internal error.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import os
import sys
from importlib import resources
from pathlib import Path
from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import fx
from .errors import ConfigError, DataError, LevyItoError
from .itocalc import exponential_formula_rhs
from .levy import DiscreteLaw, LevyModel
from .mc import McConfig, TimeGrid, collect, estimate
from .paths import sample_brownian
from .presets import exponential_formula_cases, exponential_formula_mc, merton_risk_preset, vg_risk_preset
from .pricing_kernel import kernel_log_values
from .rates import chaos
from .rates import vasicek as vas
from .rates.curve import YieldCurve

EXIT_OK, EXIT_CHECK, EXIT_CONFIG, EXIT_DATA, EXIT_NUMERICS, EXIT_INTERNAL = 0, 1, 2, 3, 4, 5
SEED_ENV = "LEVYITO_SEED"


# ---------------------------------------------------------------------------
# schema


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class BernoulliModel(_Strict):
    kind: Literal["symmetric-bernoulli"]
    intensity: float = 1.0
    size: float = 1.0


class DiscreteModel(_Strict):
    kind: Literal["compound-poisson"]
    intensity: float
    atoms: list
    probs: list[float]


class MertonModel(_Strict):
    kind: Literal["merton"]
    intensity: float
    mean: Union[float, list[float]] = 0.0
    cov: Union[float, list[list[float]]] = 1.0


class VgModel(_Strict):
    kind: Literal["variance-gamma", "vg2d", "gamma"]
    m: float


ModelCfg = Annotated[Union[BernoulliModel, DiscreteModel, MertonModel, VgModel], Field(discriminator="kind")]


class GridCfg(_Strict):
    horizon: float
    steps: int = 1


class McCfg(_Strict):
    seed: int | None = None
    paths: int = 10_000
    grid: GridCfg | None = None
    workers: int | None = None
    batch_size: int = 25_000


class IoCfg(_Strict):
    output_dir: str = "out"
    curve_csv: str | None = None


class SimulateTask(_Strict):
    name: Literal["simulate"]
    horizon: float = 1.0
    paths_out: int = 10


class VasicekTask(_Strict):
    name: Literal["price-vasicek"]
    form: Literal["classical", "levy", "down-jump"] = "classical"
    k: float
    theta: float
    r0: float
    sigma: float = 0.0
    lam: float = 0.0
    maturities: list[float]
    t: float = 0.0
    steps_per_year: int = 50


class ChaosPriceTask(_Strict):
    name: Literal["price-chaos"]
    flat_rate: float | None = None
    t: float = 1.0
    maturities: list[float]
    gamma_decay: float = 0.5
    p: float = 0.5
    frn: bool = False


class ChaosCalibTask(_Strict):
    name: Literal["calibrate-chaos"]
    flat_rate: float | None = None
    report_tenors: list[float] | None = None
    gamma_decay: float = 0.5
    p: float = 0.5
    tolerance: float = 1e-8


class SystemCfg(_Strict):
    family: Literal["gbm", "merton", "vg", "iid"]
    lambdas: list | None = None
    angles_deg: list[float] | None = None
    length: float | None = None
    rates: list[float] | None = None
    initial: list[float] | None = None
    names: list[str] | None = None


class FxTask(_Strict):
    name: Literal["fx-matrix"]
    system: SystemCfg
    horizon: float = 1.0
    paths_out: int = 3
    drift: bool = True


class SearchCfg(_Strict):
    family: Literal["gbm", "merton", "vg", "iid"]
    configs: int = 1000
    seed: int = 0


class SiegelTask(_Strict):
    name: Literal["siegel-check"]
    system: SystemCfg | None = None
    search: list[SearchCfg] = []
    method: Literal["auto", "closed", "quadrature"] = "auto"


class ValidateTask(_Strict):
    name: Literal["validate"]


TaskCfg = Annotated[Union[SimulateTask, VasicekTask, ChaosPriceTask, ChaosCalibTask, FxTask, SiegelTask,
                          ValidateTask], Field(discriminator="name")]


class Scenario(_Strict):
    model: ModelCfg | None = None
    task: TaskCfg
    mc: McCfg = McCfg()
    io: IoCfg = IoCfg()


# ---------------------------------------------------------------------------
# helpers


def bundled_scenarios() -> list[str]:
    root = resources.files("levyito") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".json"))


def _locate(config: str) -> Path:
    p = Path(config)
    if p.is_file():
        return p
    name = config[:-5] if config.endswith(".json") else config
    if name in bundled_scenarios():
        return Path(str(resources.files("levyito") / "scenarios" / f"{name}.json"))
    raise ConfigError(f"config file {config!r} not found")


def load_scenario(path: Path) -> Scenario:
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    try:
        return Scenario.model_validate(raw)
    except ValidationError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def build_model(cfg) -> LevyModel:
    if cfg is None:
        raise ConfigError("this task needs a model section")
    if isinstance(cfg, BernoulliModel):
        return LevyModel.symmetric_bernoulli(cfg.intensity, cfg.size)
    if isinstance(cfg, DiscreteModel):
        return LevyModel.compound_poisson(cfg.intensity, DiscreteLaw(cfg.atoms, cfg.probs))
    if isinstance(cfg, MertonModel):
        return LevyModel.merton(cfg.intensity, cfg.mean, cfg.cov)
    if cfg.kind == "variance-gamma":
        return LevyModel.variance_gamma(cfg.m)
    if cfg.kind == "vg2d":
        return LevyModel.two_dim_variance_gamma(cfg.m)
    return LevyModel.gamma(cfg.m)


def resolve_seed(cli_seed: int | None, cfg_seed: int | None) -> int:
    """--seed, then the config, then the environment, then 0."""
    if cli_seed is not None:
        return cli_seed
    if cfg_seed is not None:
        return cfg_seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError as exc:
            raise ConfigError(f"{SEED_ENV} must be an unsigned integer") from exc
    return 0


def fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return format(float(v), ".17g")
    return str(v)


def write_csv(path: Path, header: list[str], rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for r in rows:
            w.writerow([fmt(v) for v in r])


class Context:
    """Resolved run settings shared by the task runners."""

    def __init__(self, sc: Scenario, base: Path, seed: int, paths: int, out: Path, quiet: bool,
                 workers: int | None):
        self.sc, self.base, self.seed, self.paths, self.out, self.quiet = sc, base, seed, paths, out, quiet
        self.workers = workers if workers is not None else sc.mc.workers
        self.ok = True

    def mc(self, paths: int | None = None, seed_offset: int = 0, batch_size: int | None = None) -> McConfig:
        g = self.sc.mc.grid
        return McConfig((self.seed + seed_offset) % 2**64, paths or self.paths,
                        TimeGrid(g.horizon, g.steps) if g else None, self.workers,
                        batch_size or self.sc.mc.batch_size)

    def say(self, msg: str) -> None:
        if not self.quiet:
            print(msg)

    def check(self, ok: bool, what: str) -> None:
        if not ok:
            self.ok = False
            print(f"CHECK FAILED: {what}", file=sys.stderr)

    def curve(self, flat_rate: float | None) -> YieldCurve:
        io = self.sc.io
        if io.curve_csv is not None:
            p = Path(io.curve_csv)
            if not p.is_absolute():
                p = self.base / p
            if not p.is_file():
                raise DataError(f"curve file {p} does not exist")
            return YieldCurve.from_csv(p)
        if flat_rate is None:
            raise ConfigError("give io.curve_csv or task.flat_rate")
        return YieldCurve.flat(flat_rate)


# ---------------------------------------------------------------------------
# tasks


def task_simulate(ctx: Context, task: SimulateTask) -> None:
    model = build_model(ctx.sc.model)
    g = ctx.sc.mc.grid
    grid = np.linspace(0.0, g.horizon, g.steps + 1) if g else np.array([0.0, task.horizon])
    H = float(grid[-1])
    n = model.dimension
    times = grid[1:]

    def fn(rng, paths):
        b = model.sample_batch(H, rng, paths, grid)
        cnt = b.jump_sum(lambda x, s: np.ones(np.shape(s)), times)
        comps = [b.jump_sum((lambda x, s, k=k: x if n == 1 else x[..., k]), times) for k in range(n)]
        return np.stack([cnt] + comps, axis=-1)

    vals = collect(ctx.mc(), fn)
    rows = []
    for p in range(min(task.paths_out, ctx.paths)):
        for k, t in enumerate(times):
            rows.append([p, t, *vals[p, k]])
    write_csv(ctx.out / "paths.csv", ["path", "time", "events"] + [f"x{k + 1}" for k in range(n)], rows)
    drift = [model.nu_integral(lambda x, s, k=k: x if n == 1 else x[..., k], sampled=True) for k in range(n)]
    summary = []
    for k, t in enumerate(times):
        row = [t]
        for c in range(n):
            e = estimate(vals[:, k, 1 + c])
            z = e.zscore(drift[c] * t)
            ctx.check(abs(z) <= 3.0 or e.within(drift[c] * t), f"mean of x{c + 1} at t={t:g}")
            row += [e.mean, e.stderr, drift[c] * t, z]
        summary.append(row)
    hdr = ["time"] + list(itertools.chain.from_iterable(
        [f"x{c + 1}_mean", f"x{c + 1}_stderr", f"x{c + 1}_expected", f"x{c + 1}_z"] for c in range(n)))
    write_csv(ctx.out / "summary.csv", hdr, summary)
    ctx.say(f"simulated {ctx.paths} paths of {model.describe()} on {grid.size - 1} steps")


def task_vasicek(ctx: Context, task: VasicekTask) -> None:
    if task.form == "classical":
        spec = vas.classical_vasicek(task.k, task.theta, task.r0)
    else:
        model = build_model(ctx.sc.model)
        if task.form == "levy":
            spec = vas.levy_vasicek(task.k, task.theta, task.r0, model, task.sigma, task.lam)
        else:
            s, l = task.sigma, task.lam
            spec = vas.VasicekSpec(task.k, task.theta, task.r0, model,
                                   sigma=lambda x, t: s * np.abs(np.asarray(x, dtype=float)) + 0.0 * np.asarray(t),
                                   lam=lambda x, t: l * (np.asarray(x) < 0) + 0.0 * np.asarray(t),
                                   tilt=abs(s) / task.k + abs(l), name="down-jump")
    t = task.t
    r_t = float(vas.short_rate_mean(spec, t))
    rows = []
    for T in task.maturities:
        if not T > t:
            raise ConfigError("maturities must exceed the valuation time")
        cf = float(vas.bond_price_closed_form(spec, r_t, t, T))
        steps = max(1, int(math.ceil((T - t) * task.steps_per_year)))
        e = vas.bond_price_mc(spec, t, T, ctx.mc(), r_t=r_t, grid_steps=steps)
        z = e.zscore(cf)
        ok = e.within(cf)
        if task.form == "classical":
            ref = float(vas.classical_vasicek_bond(task.k, task.theta, r_t, T - t))
            diff = abs(cf - ref)
            ok = ok and diff <= 1e-12
        else:
            ref, diff = float("nan"), float("nan")
        ctx.check(ok, f"bond price at T={T:g}")
        rows.append([T, cf, e.mean, e.stderr, z, ref, diff, ok])
    write_csv(ctx.out / "bonds.csv",
              ["maturity", "closed_form", "mc_mean", "mc_stderr", "zscore", "classical", "abs_diff", "pass"], rows)
    ctx.say(f"priced {len(rows)} bonds in the {spec.name} model")


def _chaos_spec(ctx: Context, task) -> tuple[YieldCurve, chaos.ChaosSpec, LevyModel]:
    model = build_model(ctx.sc.model)
    curve = ctx.curve(task.flat_rate)
    spec = chaos.calibrate_to_curve(curve, model, gamma=chaos.default_gamma(task.gamma_decay, model.dimension),
                                    split=chaos.default_split(model, task.p))
    return curve, spec, model


def task_calibrate_chaos(ctx: Context, task: ChaosCalibTask) -> None:
    curve, spec, _ = _chaos_spec(ctx, task)
    abc = chaos.compute_abc(spec)
    tenors = np.asarray(task.report_tenors if task.report_tenors is not None else curve.tenors, dtype=float)
    A0 = float(abc.A(0.0)[0])
    rows = []
    worst = 0.0
    for t in tenors:
        model_df = float(abc.A(t)[0]) / A0
        err = abs(model_df - float(curve.discount(t)))
        worst = max(worst, err)
        rows.append([t, float(curve.discount(t)), model_df, err])
    write_csv(ctx.out / "calibration.csv", ["tenor", "input_discount", "model_discount", "abs_error"], rows)
    coef = [[t, float(abc.A(t)[0]) / A0, float(abc.B(t)[0]) / A0, float(abc.C(t)[0]) / A0]
            for t in tenors]
    write_csv(ctx.out / "abc.csv", ["t", "A", "B", "C"], coef)
    ctx.check(worst <= task.tolerance, f"calibration residual {worst:.3e}")
    ctx.say(f"calibration residual {worst:.3e} over {tenors.size} tenors")


def task_price_chaos(ctx: Context, task: ChaosPriceTask) -> None:
    curve, spec, model = _chaos_spec(ctx, task)
    abc = chaos.compute_abc(spec).normalized()
    t = task.t
    grid = [0.0, t] if t > 0 else [0.0]
    mats = [T for T in task.maturities]
    if any(not T > t for T in mats):
        raise ConfigError("maturities must exceed the valuation time")

    def fn(rng, paths):
        if t > 0:
            b = model.sample_batch(t, rng, paths)
            st = chaos.simulate_chaos_state(spec, b, grid)
            M, Q = st.M[:, -1], float(st.Q[-1])
        else:
            M, Q = np.zeros(paths.size), 0.0
        cols = [chaos.conditional_kernel(abc, M, Q, t, t)]
        for T in mats:
            cols.append(chaos.conditional_kernel(abc, M, Q, T, t))
        return np.stack(cols, axis=-1)

    vals = collect(ctx.mc(), fn)
    pos = float(np.mean(vals[:, 0] <= 0))
    ctx.check(pos == 0.0, f"kernel nonpositive on a fraction {pos:g} of paths")
    rows = []
    for k, T in enumerate(mats):
        e = estimate(vals[:, 1 + k])
        target = float(abc.A(T)[0])
        ok = e.within(target)
        ctx.check(ok, f"deflated bond martingale at T={T:g}")
        rows.append([T, float(curve.discount(T)), target, e.mean, e.stderr, e.zscore(target), ok])
    write_csv(ctx.out / "bonds.csv",
              ["maturity", "curve_discount", "A_T", "deflated_bond_mean", "stderr", "zscore", "pass"], rows)
    e0 = estimate(vals[:, 0])
    write_csv(ctx.out / "kernel.csv", ["t", "A_t", "kernel_mean", "stderr", "nonpositive_fraction"],
              [[t, float(abc.A(t)[0]), e0.mean, e0.stderr, pos]])
    if task.frn:
        e = chaos.frn_identity_check(spec, t, ctx.mc(batch_size=min(ctx.sc.mc.batch_size, 5000), seed_offset=1))
        ctx.check(e.within(1.0), "floating rate note identity")
        write_csv(ctx.out / "frn.csv", ["t", "mean", "stderr", "zscore"], [[t, e.mean, e.stderr, e.zscore(1.0)]])
    ctx.say(f"chaos model priced {len(mats)} bonds at t={t:g}")


def build_system(cfg: SystemCfg, model_cfg) -> fx.CurrencySystem:
    if cfg.lambdas is not None:
        lams = cfg.lambdas
    elif cfg.angles_deg is not None:
        lams = fx.unit_vectors(cfg.angles_deg, cfg.length if cfg.length is not None else 1.0)
    else:
        raise ConfigError("give system.lambdas or system.angles_deg")
    N = len(lams)
    rates = tuple(cfg.rates) if cfg.rates is not None else (0.0,) * N
    names = tuple(cfg.names or ())
    if cfg.family == "gbm":
        if model_cfg is not None:
            raise ConfigError("the gbm family takes no model section")
        return fx.CurrencySystem("gbm", tuple(lams), rates, None, cfg.initial, names=names)
    model = build_model(model_cfg)
    return fx.CurrencySystem(cfg.family, tuple(lams), rates, model, cfg.initial, names=names)


def _siegel_rows(rep: fx.SiegelReport, sys_: fx.CurrencySystem):
    return [[t, sys_.label(i), sys_.label(j), R, pos] for t, i, j, R, pos in rep.rows()]


def task_fx(ctx: Context, task: FxTask) -> None:
    sys_ = build_system(task.system, ctx.sc.model)
    g = ctx.sc.mc.grid
    grid = np.linspace(0.0, g.horizon, g.steps + 1) if g else np.linspace(0.0, task.horizon, 5)
    N = sys_.N
    k = min(task.paths_out, ctx.paths)
    noise = fx.sample_fx_noise(sys_, float(grid[-1]), ctx.mc().rng, np.arange(k), grid)
    F = fx.exchange_rate_values(sys_, noise, grid)
    rows = []
    for p in range(k):
        for ti, t in enumerate(grid):
            for i, j in itertools.product(range(N), repeat=2):
                rows.append([p, t, sys_.label(i), sys_.label(j), F[p, i, j, ti]])
    write_csv(ctx.out / "fx_paths.csv", ["path", "time", "from", "to", "rate"], rows)
    ident = fx.fx_identity_check(sys_, noise, grid)
    ctx.check(ident.passed(), "exchange-rate identities")
    write_csv(ctx.out / "identities.csv", ["identity", "max_abs_error"],
              [["reciprocal", ident.reciprocal], ["triangle", ident.triangle],
               ["decomposition", ident.decomposition], ["deflation", ident.deflation],
               ["diagonal", ident.diagonal], ["undefined_decomposition_pairs", ident.undefined_pairs]])
    rep = fx.siegel_check(sys_)
    write_csv(ctx.out / "siegel.csv", ["time", "from", "to", "excess_rate", "positive"], _siegel_rows(rep, sys_))
    if task.drift:
        drows = []
        for n_pair, (i, j) in enumerate(itertools.permutations(range(N), 2)):
            e = fx.fx_drift_regression(sys_, (i, j), ctx.mc(seed_offset=1 + n_pair), horizon=float(grid[-1]),
                                       steps=grid.size - 1)
            target = sys_.constant_rate(j) - sys_.constant_rate(i) + fx.excess_rate_closed_form(sys_, i, j)
            ok = e.within(target)
            ctx.check(ok, f"drift regression {i}->{j}")
            drows.append([sys_.label(i), sys_.label(j), target, e.mean, e.stderr, e.zscore(target), ok])
        write_csv(ctx.out / "drift.csv", ["from", "to", "expected", "mc_mean", "stderr", "zscore", "pass"], drows)
    ctx.say(f"{N}-currency {sys_.family} system: Siegel numeric={rep.numeric} analytic={rep.analytic}")


def task_siegel(ctx: Context, task: SiegelTask) -> None:
    if task.system is None and not task.search:
        raise ConfigError("siegel-check needs a system, a search list or both")
    if task.system is not None:
        sys_ = build_system(task.system, ctx.sc.model)
        rep = fx.siegel_check(sys_, method=task.method)
        write_csv(ctx.out / "siegel.csv", ["time", "from", "to", "excess_rate", "positive"], _siegel_rows(rep, sys_))
        diag = rep.diagnostics
        rows = [["numeric", rep.numeric], ["analytic", "n/a" if rep.analytic is None else rep.analytic],
                ["reason", rep.reason]]
        rows += [[f"norm_{sys_.label(i)}", v] for i, v in enumerate(diag.get("norms", []))]
        write_csv(ctx.out / "siegel_summary.csv", ["item", "value"], rows)
        if rep.analytic is True:
            ctx.check(rep.numeric, "analytic Siegel condition holds but an excess rate is not positive")
        ctx.say(f"Siegel condition: numeric={rep.numeric} analytic={rep.analytic} ({rep.reason})")
    if task.search:
        rows = []
        for s in task.search:
            res = fx.siegel_search(s.family, s.configs, s.seed)
            ctx.check(res.violations == 0, f"randomized search found {res.violations} violations for {s.family}")
            rows.append([s.family, s.configs, s.seed, res.violations, res.analytic_failures])
            ctx.say(f"random {s.family}: {res.violations} violations in {s.configs} configurations")
        write_csv(ctx.out / "siegel_search.csv", ["family", "configs", "seed", "violations", "analytic_failures"], rows)


def task_validate(ctx: Context, task: ValidateTask) -> None:
    rows = []

    def record(suite, case, value, target, stderr, ok):
        ctx.check(ok, f"{suite}/{case}")
        rows.append([suite, case, value, target, stderr, ok])

    for k, (name, (model, risk)) in enumerate([("merton", merton_risk_preset()), ("vg", vg_risk_preset())]):
        times = [0.5, 1.0, 2.0]

        def fn(rng, paths, model=model, risk=risk):
            b = model.sample_batch(2.0, rng, paths, [0.0, 0.5, 1.0, 2.0])
            br = sample_brownian([0.0, 0.5, 1.0, 2.0], 1, rng, paths) if risk.kappa is not None else None
            return np.exp(kernel_log_values(risk, None, model, b, times, br))

        vals = collect(ctx.mc(seed_offset=k), fn)
        for c, t in enumerate(times):
            e = estimate(vals[:, c])
            record("kernel-martingale", f"{name}@{t:g}", e.mean, 1.0, e.stderr, e.within(1.0))
    for k, case in enumerate(exponential_formula_cases()):
        rhs = exponential_formula_rhs(case.f, case.model, case.t0, case.t1, case.time_breaks, case.tilt)
        e = exponential_formula_mc(case, ctx.mc(seed_offset=10 + k))
        record("exponential-formula", case.name, e.mean, rhs, e.stderr, e.within(rhs))
    systems = {
        "gbm": fx.gbm_system(fx.unit_vectors([90, 210, 330]), rates=[0.01, 0.02, 0.03]),
        "merton": fx.merton_system(fx.unit_vectors([0, 120, 240], 0.8), 1.0),
        "vg": fx.vg_system(fx.unit_vectors([0, 40, 80]), 2.0),
        "iid": fx.iid_system(LevyModel.variance_gamma(1.5), [0.7] * 3),
    }
    grid = np.linspace(0.0, 1.0, 5)
    for k, (name, s) in enumerate(systems.items()):
        noise = fx.sample_fx_noise(s, 1.0, ctx.mc(seed_offset=20 + k).rng, np.arange(min(ctx.paths, 2000)), grid)
        rep = fx.fx_identity_check(s, noise, grid)
        worst = max(rep.reciprocal, rep.triangle, rep.deflation)
        record("fx-identities", name, worst, 0.0, 0.0, rep.passed())
        if name != "gbm":
            err = max(abs(fx.fx_excess_rate(s, i, j) - fx.excess_rate_closed_form(s, i, j))
                      for i, j in itertools.permutations(range(s.N), 2))
            record("fx-excess-rate", name, err, 0.0, 0.0, err <= 1e-8)
    write_csv(ctx.out / "validate.csv", ["suite", "case", "value", "target", "stderr", "pass"], rows)
    if not ctx.quiet:
        width = max(len(f"{r[0]}/{r[1]}") for r in rows)
        for r in rows:
            print(f"{(r[0] + '/' + r[1]).ljust(width)}  {'PASS' if r[5] else 'FAIL'}  {fmt(r[2])}")


RUNNERS = {
    "simulate": task_simulate,
    "price-vasicek": task_vasicek,
    "price-chaos": task_price_chaos,
    "calibrate-chaos": task_calibrate_chaos,
    "fx-matrix": task_fx,
    "siegel-check": task_siegel,
    "validate": task_validate,
}


def run_scenario(config: str | Path, seed: int | None = None, paths: int | None = None,
                 out: str | Path | None = None, quiet: bool = False, workers: int | None = None) -> int:
    """Run one scenario and return its exit status.

    Errors are not caught here; :func:`main` maps them to exit codes.
    """
    path = _locate(str(config))
    sc = load_scenario(path)
    base = path.parent
    out_dir = Path(out) if out is not None else Path(sc.io.output_dir)
    if out is None and not out_dir.is_absolute():
        out_dir = Path.cwd() / out_dir
    n = paths if paths is not None else sc.mc.paths
    if n < 1:
        raise ConfigError("paths must be positive")
    if workers is not None and workers < 1:
        raise ConfigError("workers must be positive")
    ctx = Context(sc, base, resolve_seed(seed, sc.mc.seed), n, out_dir, quiet, workers)
    if not 0 <= ctx.seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    RUNNERS[sc.task.name](ctx, sc.task)
    return EXIT_OK if ctx.ok else EXIT_CHECK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="levyito", description="Run a Lévy-Ito scenario.")
    ap.add_argument("--config", help="scenario JSON file or bundled scenario name")
    ap.add_argument("--seed", type=int, help=f"master seed (overrides the config; {SEED_ENV} is the fallback)")
    ap.add_argument("--paths", type=int, help="number of Monte Carlo paths")
    ap.add_argument("--out", help="output directory")
    ap.add_argument("--workers", type=int, help="worker threads (results do not depend on it)")
    ap.add_argument("--quiet", action="store_true", help="suppress the console summary")
    ap.add_argument("--list", action="store_true", help="list bundled scenarios and exit")
    return ap


def main(argv: list[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.list:
        print("\n".join(bundled_scenarios()))
        return EXIT_OK
    if not args.config:
        ap.print_usage(sys.stderr)
        print("levyito: error: --config is required", file=sys.stderr)
        return EXIT_CONFIG
    try:
        return run_scenario(args.config, args.seed, args.paths, args.out, args.quiet, args.workers)
    except LevyItoError as exc:
        print(f"levyito: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"levyito: DataError: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001
        print(f"levyito: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
