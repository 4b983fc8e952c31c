"""Experiment orchestration: config parsing, sweep drivers, figure-data
reproduction, and machine-readable outputs (CSV rows + a JSON manifest).

Configs are INI files with [network], [library], [policy], and
[experiment] sections; command-line flags override file values.  SNR is
given in dB and converted to linear watts internally (noted in the
manifest).  Densities are per square meter, rates bits/s/Hz.
"""
from __future__ import annotations

import configparser
import csv
import json
import os
import time
from dataclasses import dataclass, field, replace
from importlib import metadata
from pathlib import Path

import numpy as np

from .analytics import InterferenceConstants, rayleigh_lower_bound, success_noise, xi1_cdf
from .errors import NumericalError
from .model import CachingPolicy, ContentLibrary, NetworkParams, uniform_rates, zipf_popularity
from .optimizer import baseline_policy, optimize_interference, optimize_noise
from .simulator import (
    sample_xi_min,
    simulate_interference_limited,
    simulate_noise_limited,
)

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "load_config",
    "run",
    "list_figures",
    "select_c",
    "FIGURES",
]

SCENARIOS = ("cdf", "optimize-noise", "optimize-sir", "simulate", "figure")
SWEEPABLE = (
    "gamma",
    "memory",
    "rho_max",
    "rho",
    "helper_density",
    "user_density",
    "fading_desired",
    "snr_db",
)
_C_GRID = (1.0, 1.5, 2.0, 3.0, 4.0, 6.0, 8.0, 12.0, 16.0, 24.0, 32.0, 40.0, 48.0, 64.0, 96.0, 128.0)


class ConfigError(ValueError):
    """The experiment configuration is invalid (CLI exit status 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one run needs; built by load_config, overridable by flags."""

    scenario: str
    helper_density: float = 0.05
    user_density: float = 0.002
    tx_power: float = 1.0
    snr_db: float = 20.0
    pathloss_exp: float = 3.0
    fading_desired: float = 1.0
    fading_interf: float = 1.0
    count: int = 10
    gamma: float = 1.0
    rate_mode: str = "uniform"
    rho_max: float = 1.0
    rho: float = 0.001
    rate_seed: int = 1
    memory: int = 3
    policy_source: str = "optimize-noise"
    probs: tuple = ()
    sweep: str = ""
    sweep_grid: tuple = ()
    trials: int = 10_000
    seed: int = 1
    output: str = "cachegeo_out.csv"
    figure: str = ""
    channel: str = "noise"
    load_mode: str = "instantaneous"
    c_mode: str = "load"
    c_value: float = 40.0

    def validate(self) -> "ExperimentConfig":
        if self.scenario not in SCENARIOS:
            raise ConfigError(f"unknown scenario {self.scenario!r}, expected one of {SCENARIOS}")
        if self.trials < 1:
            raise ConfigError("trials must be >= 1")
        if self.sweep and self.sweep not in SWEEPABLE:
            raise ConfigError(f"sweep variable {self.sweep!r} is not one of {SWEEPABLE}")
        if self.sweep and not self.sweep_grid:
            raise ConfigError("a sweep needs a nonempty sweep_grid")
        if self.rate_mode not in ("uniform", "constant"):
            raise ConfigError("rate_mode must be 'uniform' or 'constant'")
        if self.policy_source not in ("optimize-noise", "optimize-sir", "mpc", "uc", "explicit"):
            raise ConfigError(f"unknown policy source {self.policy_source!r}")
        if self.c_mode not in ("load", "fixed", "numeric"):
            raise ConfigError("c_mode must be 'load', 'fixed', or 'numeric'")
        if self.channel not in ("noise", "interference"):
            raise ConfigError("channel must be 'noise' or 'interference'")
        out = Path(self.output)
        parent = out.parent if str(out.parent) else Path(".")
        if not parent.exists():
            raise ConfigError(f"output directory {parent} does not exist")
        if not os.access(parent, os.W_OK):
            raise ConfigError(f"output directory {parent} is not writable")
        return self

    def network(self) -> NetworkParams:
        noise_power = self.tx_power / 10.0 ** (self.snr_db / 10.0)
        return NetworkParams(
            helper_density=self.helper_density,
            user_density=self.user_density,
            tx_power=self.tx_power,
            noise_power=noise_power,
            pathloss_exp=self.pathloss_exp,
            fading_desired=self.fading_desired,
            fading_interf=self.fading_interf,
        )

    def make_library(self) -> ContentLibrary:
        popularity = zipf_popularity(self.count, self.gamma)
        if self.rate_mode == "constant":
            rates = np.full(self.count, self.rho)
        else:
            rates = uniform_rates(self.rho_max, self.count, self.rate_seed)
        return ContentLibrary(self.count, popularity, rates)

    def as_dict(self) -> dict:
        out = {}
        for name in self.__dataclass_fields__:
            value = getattr(self, name)
            out[name] = list(value) if isinstance(value, tuple) else value
        return out


def _parse_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_config(path: str | None, scenario: str, **overrides) -> ExperimentConfig:
    """Build an ExperimentConfig from an INI file plus keyword overrides
    (None overrides are ignored)."""
    values: dict = {"scenario": scenario}
    if path is not None:
        parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
        read = parser.read(path)
        if not read:
            raise ConfigError(f"config file {path!r} not found or unreadable")
        mapping = {
            "network": (
                ("helper_density", float),
                ("user_density", float),
                ("tx_power", float),
                ("snr_db", float),
                ("pathloss_exp", float),
                ("fading_desired", float),
                ("fading_interf", float),
            ),
            "library": (
                ("count", int),
                ("gamma", float),
                ("rate_mode", str),
                ("rho_max", float),
                ("rho", float),
                ("rate_seed", int),
            ),
            "policy": (("memory", int), ("source", str), ("probs", _parse_floats)),
            "experiment": (
                ("trials", int),
                ("seed", int),
                ("output", str),
                ("figure", str),
                ("sweep", str),
                ("sweep_grid", _parse_floats),
                ("channel", str),
                ("load_mode", str),
                ("c_mode", str),
                ("c_value", float),
            ),
        }
        renames = {"source": "policy_source"}
        for section, entries in mapping.items():
            if not parser.has_section(section):
                continue
            known = {key for key, _ in entries}
            stray = set(parser.options(section)) - known
            if stray:
                raise ConfigError(f"unknown keys in [{section}]: {sorted(stray)}")
            for key, cast in entries:
                if parser.has_option(section, key):
                    try:
                        values[renames.get(key, key)] = cast(parser.get(section, key))
                    except ValueError as exc:
                        raise ConfigError(f"bad value for [{section}] {key}: {exc}") from exc
        unknown = set(parser.sections()) - set(mapping)
        if unknown:
            raise ConfigError(f"unknown config sections: {sorted(unknown)}")
    for key, value in overrides.items():
        if value is not None:
            values[key] = value
    try:
        config = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    return config.validate()


def _policy_for(config: ExperimentConfig, library: ContentLibrary, params: NetworkParams):
    source = config.policy_source
    if source == "explicit":
        if len(config.probs) != library.count:
            raise ConfigError("explicit probs must list one probability per content")
        return CachingPolicy(np.array(config.probs), config.memory)
    if source in ("mpc", "uc"):
        return baseline_policy(source, library.count, config.memory)
    if source == "optimize-noise":
        return optimize_noise(library, params, config.memory).policy
    consts = InterferenceConstants.from_library(
        library, params.pathloss_exp, _resolve_c(config, library, params)
    )
    return optimize_interference(library, consts, config.memory).policy


def _resolve_c(config: ExperimentConfig, library: ContentLibrary, params: NetworkParams) -> float:
    if config.c_mode == "fixed":
        return config.c_value
    if config.c_mode == "load":
        return max(1.0, config.memory * params.user_density / params.helper_density)
    return select_c(library, params, config.memory, trials=config.trials, seed=config.seed)


def select_c(
    library: ContentLibrary,
    params: NetworkParams,
    memory: int,
    trials: int,
    seed: int,
    c_grid: tuple = _C_GRID,
    n_reference_policies: int = 6,
) -> float:
    """Smallest load bound c on a grid keeping the Rayleigh bound below a
    Monte Carlo reference (distance association, mean load) on a set of
    feasible policies.  The certificate is only as strong as the finite
    policy set: baselines plus seeded random feasible policies.
    """
    rng = np.random.default_rng(seed)
    policies = [baseline_policy("uc", library.count, memory)]
    if memory < library.count:
        policies.append(baseline_policy("mpc", library.count, memory))
    while len(policies) < n_reference_policies:
        p = rng.random(library.count)
        p *= min(1.0, memory / p.sum())
        p = np.maximum(p, 0.05)  # keep windows and loads finite
        p *= min(1.0, memory / p.sum())
        policies.append(CachingPolicy(p, memory))
    # the distance-association reference exists only for single-slot caches
    reference_mode = "long-term-assoc" if memory == 1 else "instantaneous"
    references = [
        simulate_interference_limited(
            library, params, policy, trials, seed, load_mode=reference_mode
        )
        for policy in policies
    ]
    for c in sorted(c_grid):
        consts = InterferenceConstants.from_library(library, params.pathloss_exp, c)
        ok = all(
            rayleigh_lower_bound(library, consts, policy)
            <= ref.estimate + 3.0 * ref.stderr
            for policy, ref in zip(policies, references)
        )
        if ok:
            return c
    raise NumericalError(
        f"no c in {c_grid} certifies the lower bound on the reference policy set"
    )


def _with_sweep(config: ExperimentConfig, value: float) -> ExperimentConfig:
    name = config.sweep
    if name == "memory":
        return replace(config, memory=int(value))
    return replace(config, **{name: value})


# ---------------------------------------------------------------------------
# scenario runners: each returns (fieldnames, rows)


def _fmt(x) -> str:
    if isinstance(x, float):
        return format(x, ".12g")
    return str(x)


def _policy_string(probs: np.ndarray) -> str:
    return ";".join(format(p, ".9g") for p in probs)


def _run_cdf(config: ExperimentConfig):
    params = config.network()
    rows = []
    # xi grid through the analytic quantiles so curves are well resolved
    kp = -np.log1p(-xi1_cdf(1.0, 1.0, params))
    quantiles = np.linspace(0.02, 0.99, 40)
    xi_grid = (-np.log1p(-quantiles) / kp) ** (1.0 / params.delta)
    samples = np.sort(sample_xi_min(params, 1.0, config.trials, config.seed))
    for xi in xi_grid:
        empirical = float(np.searchsorted(samples, xi, side="right")) / samples.size
        rows.append(
            {
                "lambda": params.helper_density,
                "m_d": params.fading_desired,
                "xi": float(xi),
                "analytic_cdf": xi1_cdf(float(xi), 1.0, params),
                "empirical_cdf": empirical,
                "stderr": float(np.sqrt(empirical * (1 - empirical) / samples.size)),
            }
        )
    return ["lambda", "m_d", "xi", "analytic_cdf", "empirical_cdf", "stderr"], rows


def _run_optimize_noise(config: ExperimentConfig):
    fields = ["sweep", "sweep_value", "content", "popularity", "rate", "p_opt",
              "objective", "omega", "iterations", "kkt_residual"]
    rows = []
    for value in config.sweep_grid or (float("nan"),):
        cfg = _with_sweep(config, value) if config.sweep else config
        library = cfg.make_library()
        report = optimize_noise(library, cfg.network(), cfg.memory)
        for i in range(library.count):
            rows.append(
                {
                    "sweep": config.sweep or "",
                    "sweep_value": value if config.sweep else "",
                    "content": i,
                    "popularity": float(library.popularity[i]),
                    "rate": float(library.rates[i]),
                    "p_opt": float(report.policy.probs[i]),
                    "objective": report.objective,
                    "omega": report.omega,
                    "iterations": report.iterations,
                    "kkt_residual": report.kkt_residual,
                }
            )
    return fields, rows


def _run_optimize_sir(config: ExperimentConfig):
    fields = ["sweep", "sweep_value", "c", "content", "popularity", "rate", "p_opt",
              "objective", "omega", "iterations", "kkt_residual"]
    rows = []
    for value in config.sweep_grid or (float("nan"),):
        cfg = _with_sweep(config, value) if config.sweep else config
        library = cfg.make_library()
        params = cfg.network()
        c = _resolve_c(cfg, library, params)
        consts = InterferenceConstants.from_library(library, params.pathloss_exp, c)
        report = optimize_interference(library, consts, cfg.memory)
        for i in range(library.count):
            rows.append(
                {
                    "sweep": config.sweep or "",
                    "sweep_value": value if config.sweep else "",
                    "c": c,
                    "content": i,
                    "popularity": float(library.popularity[i]),
                    "rate": float(library.rates[i]),
                    "p_opt": float(report.policy.probs[i]),
                    "objective": report.objective,
                    "omega": report.omega,
                    "iterations": report.iterations,
                    "kkt_residual": report.kkt_residual,
                }
            )
    return fields, rows


def _run_simulate(config: ExperimentConfig):
    fields = ["sweep", "sweep_value", "channel", "load_mode", "policy", "analytic",
              "estimate", "stderr", "trials"]
    rows = []
    for value in config.sweep_grid or (float("nan"),):
        cfg = _with_sweep(config, value) if config.sweep else config
        library = cfg.make_library()
        params = cfg.network()
        policy = _policy_for(cfg, library, params)
        if cfg.channel == "noise":
            est = simulate_noise_limited(library, params, policy, cfg.trials, cfg.seed)
            analytic = success_noise(library, params, policy)
            mode = ""
        else:
            est = simulate_interference_limited(
                library, params, policy, cfg.trials, cfg.seed, cfg.load_mode
            )
            c = _resolve_c(cfg, library, params)
            consts = InterferenceConstants.from_library(library, params.pathloss_exp, c)
            analytic = rayleigh_lower_bound(library, consts, policy)
            mode = cfg.load_mode
        rows.append(
            {
                "sweep": config.sweep or "",
                "sweep_value": value if config.sweep else "",
                "channel": cfg.channel,
                "load_mode": mode,
                "policy": _policy_string(policy.probs),
                "analytic": analytic,
                "estimate": est.estimate,
                "stderr": est.stderr,
                "trials": est.trials,
            }
        )
    return fields, rows


# ---------------------------------------------------------------------------
# figure registry


@dataclass(frozen=True)
class FigureEntry:
    title: str
    parameters: dict
    runtime: str
    runner: object = field(repr=False, compare=False)


def _figure_3(config: ExperimentConfig):
    fields = ["lambda", "m_d", "xi", "analytic_cdf", "empirical_cdf", "stderr"]
    rows = []
    for lam, m_d in ((0.05, 1.0), (0.05, 3.0), (0.2, 1.0)):
        sub = replace(
            config, helper_density=lam, fading_desired=m_d, pathloss_exp=2.5, scenario="cdf"
        )
        _, part = _run_cdf(sub)
        rows.extend(part)
    return fields, rows


def _figure_4(config: ExperimentConfig):
    fields = ["gamma", "ps_proposed", "ps_mpc", "ps_uc", "policy_proposed"]
    rows = []
    base = replace(config, count=20, memory=5)
    params = base.network()
    for gamma in np.arange(0.0, 3.01, 0.5):
        cfg = replace(base, gamma=float(gamma))
        library = cfg.make_library()
        report = optimize_noise(library, params, cfg.memory)
        rows.append(
            {
                "gamma": float(gamma),
                "ps_proposed": report.objective,
                "ps_mpc": success_noise(library, params, baseline_policy("mpc", 20, 5)),
                "ps_uc": success_noise(library, params, baseline_policy("uc", 20, 5)),
                "policy_proposed": _policy_string(report.policy.probs),
            }
        )
    return fields, rows


def _optimal_policy_sweep(config: ExperimentConfig, settings, label):
    fields = [label, "content", "popularity", "p_opt", "objective"]
    rows = []
    for value, cfg in settings:
        library = cfg.make_library()
        report = optimize_noise(library, cfg.network(), cfg.memory)
        for i in range(library.count):
            rows.append(
                {
                    label: value,
                    "content": i,
                    "popularity": float(library.popularity[i]),
                    "p_opt": float(report.policy.probs[i]),
                    "objective": report.objective,
                }
            )
    return fields, rows


def _figure_5(config: ExperimentConfig):
    settings = [
        (f"lambda={lam};m_d={m}", replace(config, helper_density=lam, fading_desired=m))
        for lam in (0.05, 0.2)
        for m in (1.0, 3.0)
    ]
    return _optimal_policy_sweep(config, settings, "setting")


def _figure_6(config: ExperimentConfig):
    settings = [(rho_max, replace(config, rho_max=rho_max)) for rho_max in (0.5, 1.0, 2.0, 3.0)]
    return _optimal_policy_sweep(config, settings, "rho_max")


def _figure_7(config: ExperimentConfig):
    settings = [(m, replace(config, memory=m)) for m in (1, 2, 3, 4, 5, 6)]
    return _optimal_policy_sweep(config, settings, "memory")


def _approx_check_setting(config: ExperimentConfig) -> ExperimentConfig:
    return replace(
        config,
        count=2,
        gamma=1.0,
        memory=1,
        rate_mode="constant",
        rho=0.001,
        helper_density=1e-5,
        user_density=2e-5,
        fading_desired=1.0,
        fading_interf=1.0,
    )


def _figure_approx_check(config: ExperimentConfig):
    fields = ["p1", "est_inst", "se_inst", "est_mean", "se_mean", "est_long", "se_long",
              "bound_c40"]
    cfg = _approx_check_setting(config)
    library = cfg.make_library()
    params = cfg.network()
    consts = InterferenceConstants.from_library(library, params.pathloss_exp, 40.0)
    rows = []
    for p1 in np.arange(0.1, 0.91, 0.1):
        policy = CachingPolicy(np.array([p1, 1.0 - p1]), 1)
        ests = {
            mode: simulate_interference_limited(
                library, params, policy, cfg.trials, cfg.seed, mode
            )
            for mode in ("instantaneous", "mean-approx", "long-term-assoc")
        }
        rows.append(
            {
                "p1": float(p1),
                "est_inst": ests["instantaneous"].estimate,
                "se_inst": ests["instantaneous"].stderr,
                "est_mean": ests["mean-approx"].estimate,
                "se_mean": ests["mean-approx"].stderr,
                "est_long": ests["long-term-assoc"].estimate,
                "se_long": ests["long-term-assoc"].stderr,
                "bound_c40": rayleigh_lower_bound(library, consts, policy),
            }
        )
    return fields, rows


def _figure_8(config: ExperimentConfig):
    fields = ["rho", "c", "p1_opt", "est_opt", "se_opt", "p1_subopt", "est_subopt",
              "se_subopt", "bound_subopt"]
    cfg = _approx_check_setting(config)
    rows = []
    for rho in (0.2, 0.4, 0.6, 0.8, 1.0):
        sub = replace(cfg, rho=rho)
        library = sub.make_library()
        params = sub.network()
        c = select_c(library, params, 1, trials=max(200, sub.trials // 10), seed=sub.seed)
        consts = InterferenceConstants.from_library(library, params.pathloss_exp, c)
        report = optimize_interference(library, consts, 1)
        grid = [CachingPolicy(np.array([p1, 1.0 - p1]), 1) for p1 in np.arange(0.1, 0.91, 0.1)]
        ests = [
            simulate_interference_limited(library, params, g, sub.trials, sub.seed)
            for g in grid
        ]
        best = int(np.argmax([e.estimate for e in ests]))
        sub_est = simulate_interference_limited(
            library, params, report.policy, sub.trials, sub.seed
        )
        rows.append(
            {
                "rho": rho,
                "c": c,
                "p1_opt": float(grid[best].probs[0]),
                "est_opt": ests[best].estimate,
                "se_opt": ests[best].stderr,
                "p1_subopt": float(report.policy.probs[0]),
                "est_subopt": sub_est.estimate,
                "se_subopt": sub_est.stderr,
                "bound_subopt": report.objective,
            }
        )
    return fields, rows


def _figure_9(config: ExperimentConfig):
    fields = ["block", "sweep_value", "strategy", "content", "p", "bound", "c"]
    rows = []
    base = replace(
        config,
        count=5,
        memory=1,
        rate_mode="constant",
        rho=0.001,
        helper_density=1e-5,
        user_density=2e-5,
    )
    for gamma in np.arange(0.0, 3.01, 0.5):
        cfg = replace(base, gamma=float(gamma))
        library = cfg.make_library()
        params = cfg.network()
        c_numeric = select_c(library, params, 1, trials=max(200, cfg.trials // 10), seed=cfg.seed)
        c_load = max(1.0, cfg.memory * params.user_density / params.helper_density)
        consts_eval = InterferenceConstants.from_library(library, params.pathloss_exp, c_numeric)
        strategies = {
            "proposed-numeric-c": optimize_interference(library, consts_eval, 1).policy,
            "proposed-load-c": optimize_interference(
                library,
                InterferenceConstants.from_library(library, params.pathloss_exp, c_load),
                1,
            ).policy,
            "mpc": baseline_policy("mpc", 5, 1),
            "uc": baseline_policy("uc", 5, 1),
        }
        for name, policy in strategies.items():
            rows.append(
                {
                    "block": "gamma-comparison",
                    "sweep_value": float(gamma),
                    "strategy": name,
                    "content": "",
                    "p": _policy_string(policy.probs),
                    "bound": rayleigh_lower_bound(library, consts_eval, policy),
                    "c": c_numeric if name == "proposed-numeric-c" else
                    (c_load if name == "proposed-load-c" else ""),
                }
            )
    # user-density sweep block (single-slot caches, seven contents)
    dense = replace(base, count=7)
    for lam_u in (2e-5, 5e-5, 1e-4):
        cfg = replace(dense, user_density=lam_u)
        library = cfg.make_library()
        params = cfg.network()
        c = max(1.0, cfg.memory * lam_u / params.helper_density)
        consts = InterferenceConstants.from_library(library, params.pathloss_exp, c)
        report = optimize_interference(library, consts, 1)
        for i in range(library.count):
            rows.append(
                {
                    "block": "user-density-sweep",
                    "sweep_value": lam_u,
                    "strategy": "proposed-load-c",
                    "content": i,
                    "p": float(report.policy.probs[i]),
                    "bound": report.objective,
                    "c": c,
                }
            )
    return fields, rows


FIGURES: dict[str, FigureEntry] = {
    "3": FigureEntry(
        title="CDF of the smallest reciprocal channel gain, analytic vs empirical",
        parameters={"alpha": 2.5, "p": 1.0, "settings": "(lambda, m_D) in {(0.05,1),(0.05,3),(0.2,1)}"},
        runtime="~10 s at 1e5 trials",
        runner=_figure_3,
    ),
    "4": FigureEntry(
        title="Noise-limited success probability vs popularity skew: proposed/MPC/UC",
        parameters={"count": 20, "memory": 5, "gamma": "0..3 step 0.5", "rates": "uniform(0,1]"},
        runtime="<5 s",
        runner=_figure_4,
    ),
    "5": FigureEntry(
        title="Optimal caching probabilities for helper-density and fading sweeps",
        parameters={"lambda": "(0.05, 0.2)", "m_d": "(1, 3)", "count": 10, "memory": 3},
        runtime="<5 s",
        runner=_figure_5,
    ),
    "6": FigureEntry(
        title="Optimal caching probabilities vs maximum target rate",
        parameters={"rho_max": "(0.5, 1, 2, 3)", "count": 10, "memory": 3},
        runtime="<5 s",
        runner=_figure_6,
    ),
    "7": FigureEntry(
        title="Optimal caching probabilities vs cache size",
        parameters={"memory": "1..6", "count": 10},
        runtime="<5 s",
        runner=_figure_7,
    ),
    "approx-check": FigureEntry(
        title="Load-model chain: instantaneous vs mean-load vs distance association, with the c=40 bound",
        parameters={
            "lambda": 1e-5, "user_density": 2e-5, "rho": 0.001, "gamma": 1.0,
            "memory": 1, "count": 2, "p1": "0.1..0.9",
        },
        runtime="~4 min at 1e4 trials/point",
        runner=_figure_approx_check,
    ),
    "8": FigureEntry(
        title="Interference-limited: grid-search optimum vs bound-based placement vs bound, sweeping the target rate",
        parameters={"lambda": 1e-5, "memory": 1, "count": 2, "rho": "0.2..1.0"},
        runtime="~5 min at 1e4 trials",
        runner=_figure_8,
    ),
    "9": FigureEntry(
        title="Interference-limited strategy comparison (numeric c and c = M user_density/helper_density) plus the user-density sweep",
        parameters={
            "count": 5, "memory": 1, "rho": 0.001, "gamma": "0..3 step 0.5",
            "user_density": "(2e-5, 5e-5, 1e-4) in the sweep block (id 10)",
        },
        runtime="~3 min",
        runner=_figure_9,
    ),
}
_FIGURE_ALIASES = {"10": "9"}


def list_figures() -> list[dict]:
    """Rows describing every reproducible figure, straight from the registry."""
    rows = []
    for fid, entry in FIGURES.items():
        rows.append(
            {
                "figure": fid,
                "title": entry.title,
                "parameters": json.dumps(entry.parameters, sort_keys=True),
                "runtime": entry.runtime,
            }
        )
    return rows


def run(config: ExperimentConfig) -> int:
    """Execute a scenario, writing the CSV and its JSON manifest.

    Returns 0 on success; raises ConfigError (invalid configuration) or
    NumericalError (quadrature/bisection failure) otherwise.
    """
    config.validate()
    start = time.perf_counter()
    if config.scenario == "figure":
        fid = _FIGURE_ALIASES.get(config.figure, config.figure)
        if fid not in FIGURES:
            raise ConfigError(
                f"unknown figure id {config.figure!r}; known: {sorted(FIGURES) + sorted(_FIGURE_ALIASES)}"
            )
        fields, rows = FIGURES[fid].runner(config)
    elif config.scenario == "cdf":
        fields, rows = _run_cdf(config)
    elif config.scenario == "optimize-noise":
        fields, rows = _run_optimize_noise(config)
    elif config.scenario == "optimize-sir":
        fields, rows = _run_optimize_sir(config)
    else:
        fields, rows = _run_simulate(config)
    elapsed = time.perf_counter() - start

    out = Path(config.output)
    with out.open("w", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(fields)
        for row in rows:
            writer.writerow([_fmt(row[name]) for name in fields])
    manifest = {
        "config": config.as_dict(),
        "seed": config.seed,
        "version": _version(),
        "wall_time_s": elapsed,
        "rows": len(rows),
        "output": str(out),
        "notes": {
            "snr": "snr_db is converted to linear watts internally (noise_power = tx_power / 10^(snr_db/10))",
            "units": "densities per m^2, powers linear watts, rates bits/s/Hz",
        },
    }
    with Path(str(out) + ".manifest.json").open("w") as handle:
        json.dump(manifest, handle, indent=2, sort_keys=True)
        handle.write("\n")
    return 0


def _version() -> str:
    try:
        return metadata.version("cachegeo")
    except metadata.PackageNotFoundError:
        return "unknown"
