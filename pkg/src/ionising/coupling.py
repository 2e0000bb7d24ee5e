"""Beatnote schedules, mode response tensor, and the forward coupling map.

A drive with spectral components at beatnote detunings mu_n and signed
amplitudes Omega[i, n] produces pairwise couplings

    J[i, j] = sum_n Omega[i, n] Omega[j, n] F[i, j, n]
    F[i, j, n] = sum_m eta[i, m] eta[j, m] w_m / (mu_n^2 - w_m^2)

All angular frequencies are rad/s internally; the CLI converts to Hz.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .crystal import ModeSpectrum
from .exceptions import ResonanceError, ScheduleCollisionError

GUARD_BAND_FRACTION = 1e-6  # of omega_1, for unpaired tone-mode proximity


def _readonly(a: np.ndarray) -> np.ndarray:
    out = np.ascontiguousarray(np.asarray(a, dtype=float))
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class DetuningSchedule:
    """Beatnote detunings mu_n (rad/s), tone n paired with mode n (descending order)."""

    detunings: np.ndarray
    f_s: float
    reference_gap: float  # omega_1 - omega_2, rad/s

    def __post_init__(self):
        object.__setattr__(self, "detunings", _readonly(self.detunings))
        if self.detunings.ndim != 1 or not np.all(np.isfinite(self.detunings)):
            raise ValueError("detunings must be a finite 1-D array")

    @property
    def n_tones(self) -> int:
        return self.detunings.shape[0]


@dataclass(frozen=True)
class RabiMatrix:
    """Signed spectral amplitudes omega[i, n] (rad/s): row = ion, column = tone."""

    omega: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _readonly(self.omega))
        if self.omega.ndim != 2:
            raise ValueError("omega must be 2-D (ions x tones)")
        if not np.all(np.isfinite(self.omega)):
            raise ValueError("omega entries must be finite")

    @property
    def n_ions(self) -> int:
        return self.omega.shape[0]

    @property
    def n_tones(self) -> int:
        return self.omega.shape[1]

    def total_amplitude(self) -> float:
        """sum_{i,n} |omega[i, n]|, the quantity power budgets constrain."""
        return float(np.abs(self.omega).sum())


@dataclass(frozen=True)
class CouplingMatrix:
    """Pairwise couplings j[i, j] (rad/s), symmetric with zero diagonal."""

    j: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "j", _readonly(self.j))
        if self.j.ndim != 2 or self.j.shape[0] != self.j.shape[1]:
            raise ValueError("j must be a square matrix")
        if not np.array_equal(self.j, self.j.T):
            raise ValueError("j must be exactly symmetric")
        if np.any(np.diag(self.j) != 0.0):
            raise ValueError("j diagonal must be zero")

    @property
    def n_ions(self) -> int:
        return self.j.shape[0]


@dataclass(frozen=True)
class ResponseTensor:
    """f[i, j, n] (s/rad): response of coupling (i, j) to tone n; symmetric in (i, j)."""

    f: np.ndarray
    detunings: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "f", _readonly(self.f))
        object.__setattr__(self, "detunings", _readonly(self.detunings))
        if self.f.ndim != 3 or self.f.shape[0] != self.f.shape[1]:
            raise ValueError("f must have shape (N, N, T)")
        if self.f.shape[2] != self.detunings.shape[0]:
            raise ValueError("tone axis must match the schedule length")

    @property
    def n_ions(self) -> int:
        return self.f.shape[0]

    @property
    def n_tones(self) -> int:
        return self.f.shape[2]


def detuning_schedule(modes: ModeSpectrum, f_s: float) -> DetuningSchedule:
    """Place tone n blue of mode n by a fraction f_s of the top mode gap.

    mu_n = w_n + f_s * (w_1 - w_2); for a single ion mu_1 = w_1 * (1 + 0.01 * f_s).
    Raises ScheduleCollisionError if any tone lands within the guard band
    (1e-6 * w_1) of a mode it is not paired with.
    """
    if not 0.0 < f_s < 1.0:
        raise ValueError(f"f_s must lie in (0, 1), got {f_s}")
    w = modes.frequencies
    if modes.n == 1:
        return DetuningSchedule(np.array([w[0] * (1.0 + 0.01 * f_s)]), f_s, 0.0)
    gap = float(w[0] - w[1])
    if gap <= 0.0:
        raise ResonanceError("top two modes are degenerate; blue-detuned placement undefined")
    mu = w + f_s * gap
    guard = GUARD_BAND_FRACTION * w[0]
    sep = np.abs(mu[:, None] - w[None, :])
    off_pair = ~np.eye(modes.n, dtype=bool)
    if np.any(sep[off_pair] < guard):
        n_idx, m_idx = np.argwhere((sep < guard) & off_pair)[0]
        raise ScheduleCollisionError(
            f"tone {n_idx} at {mu[n_idx]:.6g} rad/s encroaches unpaired mode {m_idx} "
            f"at {w[m_idx]:.6g} rad/s (guard band {guard:.3g} rad/s)"
        )
    return DetuningSchedule(mu, f_s, gap)


def response_tensor(modes: ModeSpectrum, sched: DetuningSchedule) -> ResponseTensor:
    """F[i, j, n] = sum_m eta[i, m] eta[j, m] w_m / (mu_n^2 - w_m^2), summed over all modes."""
    w = modes.frequencies
    mu = sched.detunings
    hit = np.argwhere(mu[:, None] == w[None, :])
    if hit.size:
        n_idx, m_idx = hit[0]
        raise ResonanceError(
            f"tone {n_idx} is exactly resonant with mode {m_idx} at {w[m_idx]:.6g} rad/s"
        )
    f = kernels.response_tensor(np.ascontiguousarray(modes.lamb_dicke), w, mu)
    return ResponseTensor(f, mu)


def forward_coupling(omega: RabiMatrix, f: ResponseTensor) -> CouplingMatrix:
    """Evaluate J[i, j] = sum_n omega[i, n] omega[j, n] F[i, j, n] (zero diagonal)."""
    if omega.n_ions != f.n_ions or omega.n_tones != f.n_tones:
        raise ValueError(
            f"shape mismatch: omega is {omega.omega.shape}, response tensor is {f.f.shape[:2]} "
            f"ions x {f.n_tones} tones"
        )
    j = kernels.coupling_from_rabi(
        np.ascontiguousarray(omega.omega), np.ascontiguousarray(f.f)
    )
    # enforce exact symmetry against floating-point summation-order asymmetry
    j = np.triu(j, 1)
    return CouplingMatrix(j + j.T)


def naive_forward_coupling(omega: RabiMatrix, f: ResponseTensor) -> CouplingMatrix:
    """Reference evaluation of the forward map by explicit nested loops.

    Independent of the kernel backends; kept as the oracle the optimized
    path is tested against. Do not fold into forward_coupling.
    """
    om = omega.omega
    ft = f.f
    n, t = om.shape
    j = np.zeros((n, n))
    for i in range(n):
        for k in range(i + 1, n):
            acc = 0.0
            for tone in range(t):
                acc += om[i, tone] * om[k, tone] * ft[i, k, tone]
            j[i, k] = acc
            j[k, i] = acc
    return CouplingMatrix(j)


def single_tone_coupling(omega_vec: np.ndarray, mu: float, modes: ModeSpectrum) -> CouplingMatrix:
    """Coupling from one spectral component: J[i, j] = W_i W_j sum_m eta_im eta_jm w_m/(mu^2 - w_m^2)."""
    w = modes.frequencies
    if np.any(mu == w):
        m_idx = int(np.argwhere(mu == w)[0, 0])
        raise ResonanceError(f"tone is exactly resonant with mode {m_idx} at {mu:.6g} rad/s")
    omega_vec = np.asarray(omega_vec, dtype=float)
    if omega_vec.shape != (modes.n,):
        raise ValueError(f"expected {modes.n} amplitudes, got shape {omega_vec.shape}")
    sched = DetuningSchedule(np.array([float(mu)]), 0.0, 0.0)
    f = ResponseTensor(
        kernels.response_tensor(
            np.ascontiguousarray(modes.lamb_dicke), w, sched.detunings
        ),
        sched.detunings,
    )
    return forward_coupling(RabiMatrix(omega_vec[:, None]), f)


@dataclass(frozen=True)
class ValidityReport:
    """Adiabaticity scan: ratios r = eta[i, m] |omega[i, n]| / |w_m - mu_n|."""

    threshold: float
    max_ratio: float
    violations: tuple[tuple[int, int, int, float], ...]  # (ion, mode, tone, ratio)

    @property
    def ok(self) -> bool:
        return self.max_ratio <= self.threshold

    def to_text(self) -> str:
        lines = [
            f"# validity threshold {self.threshold:.6g}",
            f"# max ratio {self.max_ratio:.6g}",
            "# ion mode tone ratio",
        ]
        for i, m, n, r in self.violations:
            lines.append(f"{i} {m} {n} {r:.6g}")
        return "\n".join(lines) + "\n"


def validity_check(
    omega: RabiMatrix,
    sched: DetuningSchedule,
    modes: ModeSpectrum,
    threshold: float = 0.1,
) -> ValidityReport:
    """Scan every (ion, mode, tone) for near-sideband drive strength.

    The perturbative coupling map holds when each ratio
    eta[i, m] |omega[i, n]| / |w_m - mu_n| is small; entries above threshold
    are listed in the report.
    """
    eta = modes.lamb_dicke
    gaps = np.abs(modes.frequencies[:, None] - sched.detunings[None, :])  # (M, T)
    ratios = np.abs(eta)[:, :, None] * np.abs(omega.omega)[:, None, :] / gaps[None, :, :]
    max_ratio = float(ratios.max()) if ratios.size else 0.0
    bad = np.argwhere(ratios > threshold)
    violations = tuple(
        (int(i), int(m), int(n), float(ratios[i, m, n])) for i, m, n in bad
    )
    return ValidityReport(threshold, max_ratio, violations)
