"""Config-driven experiment runner with stopping rules and CSV/SVG outputs.

Experiments are declared in TOML; every study from the accompanying
numerical campaign ships as a named preset. A run is fully determined
by (config, seeds): diagnostics CSVs are byte-reproducible.
"""
from __future__ import annotations

import logging
import os
import sys
import time
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from . import persist, svgplot
from .discrete import DiscreteConfig, enkf_update, run_discrete
from .fem1d import Mesh1D, assemble_fem_1d
from .fem2d import Fem2DNonlinear, bilaplacian_prior_2d
from .flow import FlowConfig, Scheme, drift_general, integrate
from .model import (
    EkinvError,
    Ensemble,
    InverseProblem,
    NoiseModel,
    SigmaMode,
    ensemble_mean,
    evaluate_ensemble,
)
from .priors import PriorSpec, adaptive_first_member, brownian_bridge_prior, kl_initial_ensemble
from .rngstream import CounterStream
from .trajectory import DiagnosticsRecorder, Trajectory
from .variants import (
    InflationConfig,
    LocalizationConfig,
    PcnConfig,
    diffusion_limit_run,
    inflated_drift,
    localized_drift,
    randomized_search_run,
)

log = logging.getLogger("ekinv")

PROBLEM_KINDS = ("linear1d", "nonlinear2d")
INIT_KINDS = ("kl", "adaptive_residual", "adaptive_misfit")
ALGORITHM_KINDS = ("discrete", "flow", "inflation", "localization",
                   "randomized_search", "diffusion_limit")
STOPPING_KINDS = ("fixed_t", "bayesian_t1", "discrepancy")

DEFAULT_TRUTH_SEED = 1234
DEFAULT_NOISE_SEED = 5678
DEFAULT_ENSEMBLE_SEED = 27
DISCREPANCY_SAFETY_T = 1000.0

MEMBER_COLUMNS = [
    f"{name}_{agg}"
    for name in ("e_sq", "Ae_sq", "r_sq", "Ar_sq", "phi", "theta_sq")
    for agg in ("mean", "min", "max")
]
MATRIX_COLUMNS = ["E_fro", "F_fro", "R_fro"]

PLOT_GROUPS = {
    "deviations": ("e_sq", "Ae_sq"),
    "residuals": ("r_sq", "Ar_sq"),
    "misfit": ("phi",),
    "observable_misfit": ("theta_sq",),
    "matrices": tuple(MATRIX_COLUMNS),
}


class ConfigError(EkinvError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class StoppingRule:
    kind: str
    t_end: float = 1.0
    tau: Optional[float] = None
    safety_t: float = DISCREPANCY_SAFETY_T


@dataclass(frozen=True)
class ExperimentConfig:
    problem: str
    ensemble_size: int
    algorithm: str
    stopping: StoppingRule
    init: str = "kl"
    noise_std: Optional[float] = None
    perturb_obs: bool = False
    step_size: float = 1e-3
    record_every: int = 1
    truth_seed: int = DEFAULT_TRUTH_SEED
    noise_seed: int = DEFAULT_NOISE_SEED
    ensemble_seed: int = DEFAULT_ENSEMBLE_SEED
    rng_seed: int = 0
    alphas: Optional[Tuple[float, ...]] = None
    inflation_alpha: float = 0.01
    beta_pcn: float = 0.1
    r_exponent: int = 2
    source_text: str = ""


@dataclass
class RunRecord:
    """Everything needed to reproduce and inspect one experiment run."""

    config: ExperimentConfig
    trajectory: Trajectory
    stop_time: float
    stop_reason: str
    wall_clock: float
    truth: np.ndarray
    data: np.ndarray
    noise_realization: Optional[np.ndarray]
    notes: Dict[str, object] = field(default_factory=dict)


def parse_config(text: str) -> ExperimentConfig:
    """Parse and validate a TOML experiment declaration."""
    try:
        raw = tomllib.loads(text)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"TOML parse error: {exc}") from exc

    def section(name):
        value = raw.get(name)
        if not isinstance(value, dict):
            raise ConfigError(f"missing [{name}] section")
        return value

    prob = section("problem")
    ens = section("ensemble")
    alg = section("algorithm")
    stop = section("stopping")

    kind = prob.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"problem.kind must be one of {PROBLEM_KINDS}")
    noise_std = prob.get("noise_std")
    if noise_std is not None and not (isinstance(noise_std, (int, float))
                                      and noise_std > 0):
        raise ConfigError("problem.noise_std must be a positive number")

    size = ens.get("size")
    if not isinstance(size, int) or size < 1:
        raise ConfigError("ensemble.size must be a positive integer")
    init = ens.get("init", "kl")
    if init not in INIT_KINDS:
        raise ConfigError(f"ensemble.init must be one of {INIT_KINDS}")
    alphas = ens.get("alphas")
    if alphas is not None:
        alphas = tuple(float(a) for a in alphas)
        if len(alphas) != size:
            raise ConfigError("ensemble.alphas must have one entry per member")

    algorithm = alg.get("kind")
    if algorithm not in ALGORITHM_KINDS:
        raise ConfigError(f"algorithm.kind must be one of {ALGORITHM_KINDS}")
    step_size = alg.get("step_size", 1e-3)
    if not (isinstance(step_size, (int, float)) and step_size > 0):
        raise ConfigError("algorithm.step_size must be positive")
    record_every = alg.get("record_every", 1)
    if not isinstance(record_every, int) or record_every < 1:
        raise ConfigError("algorithm.record_every must be a positive integer")

    stopping_kind = stop.get("kind")
    if stopping_kind not in STOPPING_KINDS:
        raise ConfigError(f"stopping.kind must be one of {STOPPING_KINDS}")
    t_end = stop.get("t_end", 1.0)
    if stopping_kind == "bayesian_t1":
        t_end = 1.0
    if not (isinstance(t_end, (int, float)) and t_end > 0):
        raise ConfigError("stopping.t_end must be positive")
    tau = stop.get("tau")
    if stopping_kind == "discrepancy":
        if noise_std is None:
            raise ConfigError("discrepancy stopping requires noisy data")
        if tau is not None and tau <= 0:
            raise ConfigError("stopping.tau must be positive")

    if algorithm in ("inflation", "localization", "diffusion_limit") \
            and kind == "nonlinear2d":
        raise ConfigError(f"{algorithm} is only available for linear1d")
    if algorithm == "flow" and noise_std is not None:
        log.warning("flow integration of the noisy problem is stiff; the "
                    "discrete algorithm is recommended")

    return ExperimentConfig(
        problem=kind,
        ensemble_size=size,
        algorithm=algorithm,
        stopping=StoppingRule(stopping_kind, float(t_end),
                              None if tau is None else float(tau),
                              float(stop.get("safety_t", DISCREPANCY_SAFETY_T))),
        init=init,
        noise_std=None if noise_std is None else float(noise_std),
        perturb_obs=bool(alg.get("perturb_obs", False)),
        step_size=float(step_size),
        record_every=record_every,
        truth_seed=int(prob.get("truth_seed", DEFAULT_TRUTH_SEED)),
        noise_seed=int(prob.get("noise_seed", DEFAULT_NOISE_SEED)),
        ensemble_seed=int(ens.get("seed", DEFAULT_ENSEMBLE_SEED)),
        rng_seed=int(alg.get("rng_seed", 0)),
        alphas=alphas,
        inflation_alpha=float(alg.get("alpha", 0.01)),
        beta_pcn=float(alg.get("beta_pcn", 0.1)),
        r_exponent=int(alg.get("r_exponent", 2)),
        source_text=text,
    )


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def stop_bayesian(t: float) -> bool:
    """Halt the artificial-time dynamics at the tempering endpoint t = 1."""
    return t >= 1.0


def stop_discrepancy(ens: Ensemble, prob: InverseProblem, tau: float) -> bool:
    """True once the Gamma-weighted data misfit of the ensemble mean is <= tau."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    residual = prob.data - np.asarray(prob.forward(ensemble_mean(ens)))
    return float(np.sqrt(prob.noise.norm_sq(residual))) <= tau


def default_discrepancy_tau(prob: InverseProblem) -> float:
    """sqrt(K), the noise level of a K-dim standardized residual.

    Equals the threshold sqrt(K) * gamma_std expressed in the unweighted
    norm when Gamma = gamma_std^2 I.
    """
    return float(np.sqrt(prob.forward.out_dim))


@dataclass(frozen=True)
class ProblemSetup:
    prob: InverseProblem
    prior: PriorSpec
    coords: np.ndarray
    noise_realization: Optional[np.ndarray]


def build_linear1d(noise_std: Optional[float] = None,
                   truth_seed: int = DEFAULT_TRUTH_SEED,
                   noise_seed: int = DEFAULT_NOISE_SEED,
                   n_cells: int = 256,
                   sigma_mode: SigmaMode = SigmaMode.ZERO) -> ProblemSetup:
    """The 1-D elliptic problem with the spectral prior and a drawn truth.

    Noise-free data uses the identity misfit weighting; noisy data draws
    one fixed realization eta ~ N(0, noise_std^2 I) and weights the
    misfit with Gamma = noise_std^2 I.
    """
    mesh = Mesh1D(n_cells)
    fem = assemble_fem_1d(mesh)
    prior = brownian_bridge_prior(mesh)
    fwd = fem.forward_map()
    truth = prior.sample(np.random.default_rng(truth_seed))
    data = fwd(truth)
    eta = None
    if noise_std is None:
        noise = NoiseModel.identity(fem.n_obs, sigma_mode)
    else:
        eta = noise_std * np.random.default_rng(noise_seed).standard_normal(
            fem.n_obs)
        data = data + eta
        noise = NoiseModel.scaled_identity(fem.n_obs, noise_std, sigma_mode)
    prob = InverseProblem(fwd, data, noise, truth)
    return ProblemSetup(prob, prior, mesh.interior_nodes, eta)


def build_nonlinear2d(noise_std: Optional[float] = None,
                      truth_seed: int = DEFAULT_TRUTH_SEED,
                      noise_seed: int = DEFAULT_NOISE_SEED,
                      n_cells: int = 32,
                      sigma_mode: SigmaMode = SigmaMode.ZERO) -> ProblemSetup:
    """The 2-D log-permeability problem with the bilaplacian prior."""
    fem = Fem2DNonlinear(n_cells)
    prior = bilaplacian_prior_2d(fem)
    fwd = fem.forward_map()
    truth = prior.sample(np.random.default_rng(truth_seed))
    data = fwd(truth)
    eta = None
    if noise_std is None:
        noise = NoiseModel.identity(fem.n_obs, sigma_mode)
    else:
        eta = noise_std * np.random.default_rng(noise_seed).standard_normal(
            fem.n_obs)
        data = data + eta
        noise = NoiseModel.scaled_identity(fem.n_obs, noise_std, sigma_mode)
    prob = InverseProblem(fwd, data, noise, truth)
    return ProblemSetup(prob, prior, fem.nodes, eta)


def build_setup(cfg: ExperimentConfig) -> ProblemSetup:
    sigma = SigmaMode.EQUAL_GAMMA if cfg.perturb_obs else SigmaMode.ZERO
    if cfg.problem == "linear1d":
        return build_linear1d(cfg.noise_std, cfg.truth_seed, cfg.noise_seed,
                              sigma_mode=sigma)
    return build_nonlinear2d(cfg.noise_std, cfg.truth_seed, cfg.noise_seed,
                             sigma_mode=sigma)


def build_initial_ensemble(cfg: ExperimentConfig,
                           setup: ProblemSetup) -> Ensemble:
    members = kl_initial_ensemble(setup.prior, cfg.ensemble_size,
                                  cfg.ensemble_seed)
    if cfg.init == "kl":
        return Ensemble(members)
    alphas = np.array(cfg.alphas if cfg.alphas is not None
                      else [0.5] * cfg.ensemble_size)
    if cfg.init == "adaptive_residual":
        target = setup.prob.truth
    else:  # adaptive_misfit: align against any state reproducing the data
        a = setup.prob.forward.linear_matrix
        if a is None:
            raise ConfigError("adaptive_misfit init needs a linear forward map")
        target = np.linalg.lstsq(a, setup.prob.data, rcond=None)[0]
    first = adaptive_first_member(target, members[1:], alphas)
    return Ensemble(np.vstack([first, members[1:]]))


def _run_core(cfg: ExperimentConfig, setup: ProblemSetup, ens0: Ensemble,
              t_end: float) -> Trajectory:
    prob = setup.prob
    n_steps = max(1, int(round(t_end / cfg.step_size)))
    if cfg.algorithm == "discrete":
        dcfg = DiscreteConfig(n_steps, cfg.step_size, cfg.perturb_obs,
                              cfg.rng_seed, cfg.record_every)
        return run_discrete(prob, ens0, dcfg)
    if cfg.algorithm == "flow":
        fcfg = FlowConfig(n_steps * cfg.step_size, cfg.step_size,
                          Scheme.EULER_MARUYAMA, cfg.record_every,
                          cfg.rng_seed)
        return integrate(prob, ens0, fcfg, drift=drift_general)
    if cfg.algorithm == "randomized_search":
        dcfg = DiscreteConfig(n_steps, cfg.step_size, cfg.perturb_obs,
                              cfg.rng_seed, cfg.record_every)
        return randomized_search_run(prob, ens0, dcfg,
                                     PcnConfig(cfg.beta_pcn, setup.prior))
    if cfg.algorithm == "diffusion_limit":
        return diffusion_limit_run(prob, ens0, cfg.step_size,
                                   n_steps * cfg.step_size, setup.prior,
                                   cfg.rng_seed, cfg.record_every)
    if cfg.algorithm == "inflation":
        icfg = InflationConfig(cfg.inflation_alpha, setup.prior)
        drift = lambda ens, prob_, g=None: inflated_drift(ens, prob_, icfg, g)
    else:  # localization
        lcfg = LocalizationConfig(cfg.r_exponent)
        drift = lambda ens, prob_, g=None: localized_drift(
            ens, prob_, lcfg, setup.coords, g)
    fcfg = FlowConfig(n_steps * cfg.step_size, cfg.step_size,
                      Scheme.EULER_MARUYAMA, cfg.record_every, cfg.rng_seed)
    return integrate(prob, ens0, fcfg, drift=drift)


def _run_with_discrepancy(cfg: ExperimentConfig, setup: ProblemSetup,
                          ens0: Ensemble,
                          tau: float) -> Tuple[Trajectory, float, str]:
    """Step until the discrepancy threshold or the safety cap."""
    if cfg.algorithm != "discrete":
        raise ConfigError("discrepancy stopping is implemented for the "
                          "discrete algorithm")
    prob = setup.prob
    stream = CounterStream(cfg.rng_seed)
    recorder = DiagnosticsRecorder(prob)
    max_steps = int(round(cfg.stopping.safety_t / cfg.step_size))
    dcfg = DiscreteConfig(max(max_steps, 1), cfg.step_size, cfg.perturb_obs,
                          cfg.rng_seed, cfg.record_every)
    ens = ens0
    for n in range(max_steps):
        g = evaluate_ensemble(ens, prob)
        if n % cfg.record_every == 0:
            recorder.record(n * cfg.step_size, ens, g)
        if stop_discrepancy(ens, prob, tau):
            if n % cfg.record_every != 0:
                recorder.record(n * cfg.step_size, ens, g)
            return recorder.build(), n * cfg.step_size, "discrepancy"
        ens = enkf_update(ens, prob, dcfg, stream, step=n, g_evals=g)
    recorder.record(max_steps * cfg.step_size, ens,
                    evaluate_ensemble(ens, prob))
    log.warning("discrepancy threshold %.3g not reached before the safety "
                "cap t=%.3g", tau, cfg.stopping.safety_t)
    return recorder.build(), max_steps * cfg.step_size, "safety_cap"


def run_experiment(cfg: ExperimentConfig) -> RunRecord:
    """Build the problem, run the configured algorithm, collect the record."""
    t_start = time.perf_counter()
    setup = build_setup(cfg)
    ens0 = build_initial_ensemble(cfg, setup)
    log.info("problem=%s J=%d algorithm=%s init=%s", cfg.problem,
             cfg.ensemble_size, cfg.algorithm, cfg.init)

    if cfg.stopping.kind == "discrepancy":
        tau = cfg.stopping.tau
        if tau is None:
            tau = default_discrepancy_tau(setup.prob)
        traj, stop_time, reason = _run_with_discrepancy(cfg, setup, ens0, tau)
    else:
        t_end = 1.0 if cfg.stopping.kind == "bayesian_t1" else cfg.stopping.t_end
        traj = _run_core(cfg, setup, ens0, t_end)
        stop_time, reason = traj.times[-1], cfg.stopping.kind

    return RunRecord(
        config=cfg,
        trajectory=traj,
        stop_time=float(stop_time),
        stop_reason=reason,
        wall_clock=time.perf_counter() - t_start,
        truth=setup.prob.truth,
        data=setup.prob.data,
        noise_realization=setup.noise_realization,
    )


def csv_columns(traj: Trajectory) -> List[str]:
    """The declared diagnostics schema for this trajectory."""
    has_truth = "r_sq_mean" in traj.diagnostics
    cols = ["t"]
    for col in MEMBER_COLUMNS:
        if col.startswith(("r_sq", "Ar_sq")) and not has_truth:
            continue
        cols.append(col)
    if has_truth:
        cols.extend(MATRIX_COLUMNS)
    return cols


def render_csv(traj: Trajectory) -> str:
    cols = csv_columns(traj)
    lines = [",".join(cols)]
    for i, t in enumerate(traj.times):
        row = [repr(float(t))]
        row += [repr(float(traj.diagnostics[c][i])) for c in cols[1:]]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def emit_outputs(rec: RunRecord, out_dir) -> List[str]:
    """Write diagnostics.csv, the config snapshot, inputs, and SVG plots."""
    os.makedirs(out_dir, exist_ok=True)
    written = []

    csv_path = os.path.join(out_dir, "diagnostics.csv")
    with open(csv_path, "w", encoding="ascii") as fh:
        fh.write(render_csv(rec.trajectory))
    written.append(csv_path)

    snap_path = os.path.join(out_dir, "config.snapshot")
    with open(snap_path, "w", encoding="utf-8") as fh:
        fh.write(rec.config.source_text)
    written.append(snap_path)

    truth_path = os.path.join(out_dir, "truth.csv")
    persist.save_vector(truth_path, rec.truth)
    written.append(truth_path)
    if rec.noise_realization is not None:
        noise_path = os.path.join(out_dir, "noise.csv")
        persist.save_vector(noise_path, rec.noise_realization)
        written.append(noise_path)

    traj = rec.trajectory
    available = csv_columns(traj)
    for group, names in PLOT_GROUPS.items():
        series = {}
        for name in names:
            for col in (f"{name}_mean", name):
                if col in available:
                    series[col] = (traj.times, traj.diagnostics[col])
        if not series:
            continue
        positive_t = np.all(traj.times[1:] > 0)
        positive_y = all(np.all(np.asarray(y) > 0) for _, y in series.values())
        plot_path = os.path.join(out_dir, f"{group}.svg")
        svgplot.line_plot(
            plot_path, series, title=group, xlabel="t", ylabel=group,
            xlog=bool(positive_t and traj.times[-1] / max(traj.times[1], 1e-12) > 50),
            ylog=positive_y,
        )
        written.append(plot_path)
    return written


PRESETS: Dict[str, str] = {
    "linear1d-noisefree-flow-j5": """\
# Noise-free 1-D study: collapse and residual decay, J = 5.
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "flow"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisefree-flow-j10": """\
[problem]
kind = "linear1d"

[ensemble]
size = 10
seed = 27

[algorithm]
kind = "flow"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisefree-flow-j50": """\
[problem]
kind = "linear1d"

[ensemble]
size = 50
seed = 27

[algorithm]
kind = "flow"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-adaptive-residual-j5": """\
# J = 5 ensemble whose first member keeps the mapped residual inside
# the span of the mapped deviations.
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27
init = "adaptive_residual"

[algorithm]
kind = "flow"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisy-j5": """\
# Noisy data without stopping: exhibits overfitting in the residuals.
[problem]
kind = "linear1d"
noise_std = 0.01

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "discrete"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisy-smallnoise-j5": """\
[problem]
kind = "linear1d"
noise_std = 0.001

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "discrete"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisy-adaptive-misfit-j5": """\
[problem]
kind = "linear1d"
noise_std = 0.01

[ensemble]
size = 5
seed = 27
init = "adaptive_misfit"

[algorithm]
kind = "discrete"
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-noisy-bayes-j5": """\
# Same noisy study halted by the tempering-endpoint rule t = 1.
[problem]
kind = "linear1d"
noise_std = 0.01

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "discrete"
step_size = 1e-2

[stopping]
kind = "bayesian_t1"
""",
    "linear1d-noisy-discrepancy-j16": """\
# Discrepancy-principle stopping; J = 16 spans the observation space.
[problem]
kind = "linear1d"
noise_std = 0.01

[ensemble]
size = 16
seed = 27

[algorithm]
kind = "discrete"
step_size = 0.1
record_every = 10

[stopping]
kind = "discrepancy"
""",
    "linear1d-inflation-j5": """\
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "inflation"
alpha = 0.01
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-localization-j5": """\
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "localization"
r_exponent = 2
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-randomized-search-j5": """\
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "randomized_search"
beta_pcn = 0.1
step_size = 1e-2
record_every = 10

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "linear1d-diffusion-limit-j5": """\
# Splitting-scheme integration of the randomized-search limit
# (fixed step 2^-8; a full T = 100 run takes a few minutes).
[problem]
kind = "linear1d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "diffusion_limit"
step_size = 0.00390625
record_every = 64

[stopping]
kind = "fixed_t"
t_end = 100.0
""",
    "nonlinear2d-discrete-j5": """\
[problem]
kind = "nonlinear2d"

[ensemble]
size = 5
seed = 27

[algorithm]
kind = "discrete"
step_size = 20.0
record_every = 25

[stopping]
kind = "fixed_t"
t_end = 5000.0
""",
    "nonlinear2d-discrete-j50": """\
# Large-ensemble 2-D run; the data are matched to below 1% of the
# initial misfit by the endpoint.
[problem]
kind = "nonlinear2d"

[ensemble]
size = 50
seed = 27

[algorithm]
kind = "discrete"
step_size = 20.0
record_every = 25

[stopping]
kind = "fixed_t"
t_end = 5000.0
""",
}


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise ConfigError(f"unknown preset {name!r}; see list-presets")
    return parse_config(PRESETS[name])
