"""Error budget (phonon creation, spontaneous emission, trap-frequency
sensitivity) and coupling-strength scaling studies.

The sensitivity model perturbs the transverse mode frequencies directly with
independent Gaussian fractional noise, holding positions, mode vectors, drive
amplitudes, and beatnote detunings fixed, then rebuilds the response tensor
and recomputes the couplings.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .constants import DEFAULT_DELTA_K, DEFAULT_ION_MASS, HBAR
from .coupling import (
    GUARD_BAND_FRACTION,
    DetuningSchedule,
    RabiMatrix,
    detuning_schedule,
    response_tensor,
    single_tone_coupling,
)
from .crystal import ModeSpectrum, TrapConfig, default_trap, equilibrium_positions, transverse_modes
from .exceptions import ResonanceError
from .graphs import chain_nn
from .inverse import SolveConfig, SolveResult, solve_rabi

DEFAULT_EPSILON = 1e-5  # excited-state linewidth over Raman detuning


@dataclass(frozen=True)
class SensitivityResult:
    """Monte Carlo fractional coupling error under mode-frequency noise."""

    mean: float
    std: float
    predicted: float  # sqrt(N) * delta
    delta: float
    n_trials: int
    n_discarded: int  # trials rejected for landing inside a tone guard band


@dataclass(frozen=True)
class ErrorBudget:
    """Static error estimates for one design."""

    p_ph: float
    gamma: float  # 1/s
    epsilon: float
    sensitivity_pred: float
    sensitivity_mc: tuple[float, float]  # (mean, std)

    def __post_init__(self):
        if self.p_ph < 0 or self.gamma < 0:
            raise ValueError("p_ph and gamma must be non-negative")


@dataclass(frozen=True)
class ScalingRow:
    """One design point of a scaling study; rates in rad/s, j_metric in Hz."""

    n: int
    j_metric: float  # nearest-neighbor J (chain) or N*|J| (uniform), Hz
    f_s: float
    budget: float  # rad/s
    converged: bool
    p_ph: float
    gamma: float  # 1/s
    j_metric_reduced: float | None = None  # uniform family: budget scaled by logN/N


def phonon_error(omega: RabiMatrix, modes: ModeSpectrum, sched: DetuningSchedule) -> float:
    """p_ph = sum_{i,m} (eta_im Omega_im / (w_m - mu_m))^2, pairing tone m with mode m."""
    if omega.n_tones != modes.n or sched.n_tones != modes.n:
        raise ValueError("phonon error needs one tone per mode (diagonal pairing)")
    gaps = modes.frequencies - sched.detunings
    if np.any(gaps == 0.0):
        m = int(np.argwhere(gaps == 0.0)[0, 0])
        raise ResonanceError(f"tone {m} resonant with its own mode")
    ratios = modes.lamb_dicke * omega.omega / gaps[None, :]
    return float(np.sum(ratios**2))


def spontaneous_rate(omega: RabiMatrix, epsilon: float = DEFAULT_EPSILON) -> float:
    """Gamma = epsilon * sum_{i,n} |Omega_{i,n}| (1/s)."""
    if epsilon < 0:
        raise ValueError("epsilon must be non-negative")
    return epsilon * omega.total_amplitude()


def trap_sensitivity(
    design: SolveResult,
    cfg: TrapConfig,
    delta: float = 1e-3,
    trials: int = 1000,
    seed: int = 0,
) -> SensitivityResult:
    """Monte Carlo fractional coupling error under mode-frequency noise.

    Each trial multiplies every mode frequency by an independent factor
    1 + N(0, delta^2), recomputes the Lamb-Dicke factors and response tensor
    at fixed detunings and amplitudes, and measures the relative Frobenius
    change of the coupling matrix. Trials that push a mode inside the guard
    band of any tone are discarded and counted.
    """
    if delta < 0:
        raise ValueError("delta must be non-negative")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    crystal = equilibrium_positions(cfg)
    modes = transverse_modes(cfg, crystal)
    w = modes.frequencies
    b = modes.mode_matrix
    mu = design.detunings
    omega_arr = np.ascontiguousarray(design.omega.omega)
    j_ref = design.attained.j
    j_ref_norm = float(np.linalg.norm(j_ref))
    if j_ref_norm == 0.0:
        raise ValueError("design has zero couplings; fractional error undefined")
    zpt_coeff = cfg.delta_k * math.sqrt(HBAR / (2.0 * cfg.ion_mass))
    guard = GUARD_BAND_FRACTION * w[0]

    rng = np.random.default_rng(np.random.SeedSequence([seed]))
    factors = 1.0 + delta * rng.standard_normal((trials, w.shape[0]))
    errors = []
    n_discarded = 0
    for trial in range(trials):
        w_trial = w * factors[trial]
        if np.any(w_trial <= 0.0) or np.abs(w_trial[None, :] - mu[:, None]).min() < guard:
            n_discarded += 1
            continue
        eta_trial = b * (zpt_coeff / np.sqrt(w_trial))[None, :]
        f_trial = kernels.response_tensor(
            np.ascontiguousarray(eta_trial), w_trial, mu
        )
        j_trial = kernels.coupling_from_rabi(omega_arr, f_trial)
        errors.append(float(np.linalg.norm(j_trial - j_ref) / j_ref_norm))
    errors_arr = np.array(errors)
    mean = float(errors_arr.mean()) if errors_arr.size else math.nan
    std = float(errors_arr.std()) if errors_arr.size else math.nan
    return SensitivityResult(
        mean=mean,
        std=std,
        predicted=math.sqrt(cfg.n_ions) * delta,
        delta=delta,
        n_trials=trials,
        n_discarded=n_discarded,
    )


def error_budget(
    design: SolveResult,
    cfg: TrapConfig,
    modes: ModeSpectrum,
    sched: DetuningSchedule,
    epsilon: float = DEFAULT_EPSILON,
    delta: float = 1e-3,
    trials: int = 200,
    seed: int = 0,
) -> ErrorBudget:
    """Assemble the full static error budget for one solved design."""
    sens = trap_sensitivity(design, cfg, delta, trials, seed)
    return ErrorBudget(
        p_ph=phonon_error(design.omega, modes, sched),
        gamma=spontaneous_rate(design.omega, epsilon),
        epsilon=epsilon,
        sensitivity_pred=sens.predicted,
        sensitivity_mc=(sens.mean, sens.std),
    )


def fit_loglog_slope(ns: np.ndarray, values: np.ndarray) -> float:
    """Ordinary least-squares slope of log(values) against log(ns)."""
    if len(ns) < 2:
        raise ValueError("slope fit needs at least two points")
    return float(np.polyfit(np.log(np.asarray(ns, float)), np.log(np.asarray(values, float)), 1)[0])


def _uniform_point(
    n: int, f_s: float, budget: float, omega_com: float, ion_mass: float, delta_k: float
) -> tuple[float, float, float]:
    """Single-tone uniform design: (mean |J| rad/s, p_ph, sum|Omega|)."""
    cfg = default_trap(n, omega_com, ion_mass, delta_k)
    modes = transverse_modes(cfg, equilibrium_positions(cfg))
    sched = detuning_schedule(modes, f_s)
    mu = float(sched.detunings[0])  # tone blue of the top (COM) mode
    amps = np.full(n, budget / n)
    j = single_tone_coupling(amps, mu, modes)
    off = np.abs(j.j[np.triu_indices(n, 1)])
    gap = float(modes.frequencies[0] - mu)
    eta_top = modes.lamb_dicke[:, 0]
    p_ph = float(np.sum((eta_top * amps / gap) ** 2))
    return float(off.mean()), p_ph, float(np.abs(amps).sum())


def scaling_study(
    n_min: int,
    n_max: int,
    family: str,
    f_s: float,
    budget: float,
    omega_com: float,
    ion_mass: float | None = None,
    delta_k: float | None = None,
    n_starts: int = 4,
    rng_seed: int = 0,
    residual_tol: float = 1e-8,
    epsilon: float = DEFAULT_EPSILON,
) -> tuple[list[ScalingRow], float | None]:
    """Coupling strength versus chain size at fixed total amplitude budget.

    family "chain_nn": per N, a full fixed-budget solve of the open chain;
    j_metric is the attained nearest-neighbor coupling in Hz. family
    "uniform_full": per N, the single-tone construction blue of the top mode
    with equal amplitudes budget/N; j_metric is N*mean|J| in Hz, and
    j_metric_reduced additionally scales the budget by (logN/N) normalized to
    n_min, the reduction rule for beam expansion over a growing chain.

    Returns the rows and the OLS log-log slope of j_metric over converged rows
    (None when fewer than two converged rows exist).
    """
    if not 3 <= n_min < n_max:
        raise ValueError("need 3 <= n_min < n_max")
    if budget <= 0:
        raise ValueError("budget must be positive (rad/s)")
    if family not in ("chain_nn", "uniform_full"):
        raise ValueError(f"unknown family {family!r}")
    ion_mass = DEFAULT_ION_MASS if ion_mass is None else ion_mass
    delta_k = DEFAULT_DELTA_K if delta_k is None else delta_k

    rows: list[ScalingRow] = []
    reduction_ref = math.log(n_min) / n_min
    for n in range(n_min, n_max + 1):
        if family == "chain_nn":
            cfg = default_trap(n, omega_com, ion_mass, delta_k)
            modes = transverse_modes(cfg, equilibrium_positions(cfg))
            sched = detuning_schedule(modes, f_s)
            f = response_tensor(modes, sched)
            target = chain_nn(n, 1.0)
            solve_cfg = SolveConfig(
                residual_tol=residual_tol,
                n_starts=n_starts,
                rng_seed=rng_seed,
                mode="fixed_budget",
                budget=budget,
            )
            result = solve_rabi(target, f, solve_cfg)
            # pattern weight 1 on every chain edge: NN coupling = attained_scale
            j_metric = result.attained_scale / (2.0 * math.pi)
            rows.append(
                ScalingRow(
                    n=n,
                    j_metric=j_metric,
                    f_s=f_s,
                    budget=budget,
                    converged=result.converged,
                    p_ph=phonon_error(result.omega, modes, sched),
                    gamma=spontaneous_rate(result.omega, epsilon),
                )
            )
        else:
            j_mean, p_ph, total = _uniform_point(
                n, f_s, budget, omega_com, ion_mass, delta_k
            )
            reduction = (math.log(n) / n) / reduction_ref
            rows.append(
                ScalingRow(
                    n=n,
                    j_metric=n * j_mean / (2.0 * math.pi),
                    f_s=f_s,
                    budget=budget,
                    converged=True,
                    p_ph=p_ph,
                    gamma=epsilon * total,
                    j_metric_reduced=n * j_mean * reduction**2 / (2.0 * math.pi),
                )
            )
    fit_rows = [r for r in rows if r.converged and r.j_metric > 0]
    slope = None
    if len(fit_rows) >= 2:
        slope = fit_loglog_slope(
            np.array([r.n for r in fit_rows]), np.array([r.j_metric for r in fit_rows])
        )
    return rows, slope
