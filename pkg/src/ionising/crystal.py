"""Linear ion crystals: equilibrium positions, transverse normal modes, Lamb-Dicke matrix.

Axial potentials are nondimensionalized with a Coulomb length scale l:

    harmonic:  l = (q^2 / (4 pi eps0 M omega_z^2))^(1/3)
    quartic:   l = (q^2 / (4 pi eps0 M alpha4))^(1/5)

so the dimensionless potential reads

    V(u) = sum_i [a2 u_i^2 / 2 + a4 u_i^4 / 2] + sum_{i<j} 1 / |u_i - u_j|

with (a2, a4) = (1, 0) for harmonic traps and a4 = 1 for quartic ones.
The physical quartic potential per ion is U(z) = (M/2)(alpha2 z^2 + alpha4 z^4).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .constants import COULOMB_COEFF, DEFAULT_DELTA_K, DEFAULT_ION_MASS, HBAR
from .exceptions import ConvergenceError, StabilityError


@dataclass(frozen=True)
class HarmonicAxial:
    """Harmonic axial confinement at angular frequency omega_z (rad/s)."""

    omega_z: float


@dataclass(frozen=True)
class QuarticAxial:
    """Quartic axial confinement U(z) = (M/2)(alpha2 z^2 + alpha4 z^4).

    alpha2 in (rad/s)^2 and may be <= 0; alpha4 in (rad/s)^2 / m^2, > 0.
    """

    alpha2: float
    alpha4: float


@dataclass(frozen=True)
class TrapConfig:
    """Physical description of the linear trap, ions, and Raman geometry."""

    n_ions: int
    omega_com: float  # transverse COM angular frequency, rad/s
    axial: HarmonicAxial | QuarticAxial
    ion_mass: float = DEFAULT_ION_MASS  # kg
    delta_k: float = DEFAULT_DELTA_K  # 1/m
    qubit_freq: float | None = None  # opaque metadata, rad/s

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError(f"n_ions must be >= 1, got {self.n_ions}")
        if self.omega_com <= 0:
            raise ValueError("omega_com must be positive")
        if self.ion_mass <= 0:
            raise ValueError("ion_mass must be positive")
        if self.delta_k <= 0:
            raise ValueError("delta_k must be positive")
        if isinstance(self.axial, HarmonicAxial):
            if self.axial.omega_z <= 0:
                raise ValueError("harmonic omega_z must be positive")
            if self.axial.omega_z >= self.omega_com:
                raise ValueError(
                    "harmonic omega_z must be below omega_com for a linear chain "
                    f"(got omega_z={self.axial.omega_z:g}, omega_com={self.omega_com:g})"
                )
        elif isinstance(self.axial, QuarticAxial):
            if self.axial.alpha4 <= 0:
                raise ValueError("quartic alpha4 must be positive (bound potential)")
        else:
            raise TypeError(f"unsupported axial potential {type(self.axial).__name__}")


@dataclass(frozen=True)
class IonCrystal:
    """Equilibrium axial positions of the chain, in units of length_scale."""

    positions: np.ndarray  # (N,), dimensionless, strictly increasing
    length_scale: float  # meters
    potential_residual: float  # max-norm of the dimensionless gradient


@dataclass(frozen=True)
class ModeSpectrum:
    """Transverse normal modes: frequencies (descending, COM first), mode matrix, Lamb-Dicke matrix.

    mode_matrix columns are orthonormal participation vectors b[:, m];
    lamb_dicke[i, m] = b[i, m] * delta_k * sqrt(hbar / (2 M omega_m)).
    """

    frequencies: np.ndarray  # (N,), rad/s, sorted descending
    mode_matrix: np.ndarray  # (N, N)
    lamb_dicke: np.ndarray  # (N, N), dimensionless

    @property
    def n(self) -> int:
        return self.frequencies.shape[0]


def length_scale(cfg: TrapConfig) -> float:
    """Coulomb length scale (m) used to nondimensionalize the axial problem."""
    if isinstance(cfg.axial, HarmonicAxial):
        return (COULOMB_COEFF / (cfg.ion_mass * cfg.axial.omega_z**2)) ** (1.0 / 3.0)
    return (COULOMB_COEFF / (cfg.ion_mass * cfg.axial.alpha4)) ** 0.2


def _axial_coefficients(cfg: TrapConfig) -> tuple[float, float]:
    """(a2, a4) of the dimensionless axial potential."""
    if isinstance(cfg.axial, HarmonicAxial):
        return 1.0, 0.0
    ell = length_scale(cfg)
    a2 = cfg.ion_mass * cfg.axial.alpha2 * ell**3 / COULOMB_COEFF
    return a2, 1.0


def _potential(u: np.ndarray, a2: float, a4: float) -> float:
    du = np.abs(u[:, None] - u[None, :])
    inv = np.divide(1.0, du, out=np.zeros_like(du), where=du > 0)
    return float(0.5 * a2 * np.sum(u**2) + 0.5 * a4 * np.sum(u**4) + 0.5 * np.sum(inv))


def _gradient(u: np.ndarray, a2: float, a4: float) -> np.ndarray:
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, np.inf)
    return a2 * u + 2.0 * a4 * u**3 - np.sum(np.sign(du) / du**2, axis=1)


def _hessian(u: np.ndarray, a2: float, a4: float) -> np.ndarray:
    du = u[:, None] - u[None, :]
    np.fill_diagonal(du, np.inf)
    inv3 = 1.0 / np.abs(du) ** 3
    h = -2.0 * inv3
    np.fill_diagonal(h, a2 + 6.0 * a4 * u**2 + 2.0 * np.sum(inv3, axis=1))
    return h


def _initial_guess(n: int) -> np.ndarray:
    # Uniform spacing close to the known minimum-spacing law for harmonic chains;
    # only a starting point, Newton does the rest.
    if n == 1:
        return np.zeros(1)
    spacing = 2.018 / n**0.559
    return spacing * (np.arange(n) - 0.5 * (n - 1))


def equilibrium_positions(cfg: TrapConfig, tol: float = 1e-12, max_iter: int = 200) -> IonCrystal:
    """Solve for the classical equilibrium of the chain by damped Newton iteration.

    Deterministic for fixed cfg. Raises ConvergenceError if the gradient
    max-norm does not reach tol within max_iter Newton steps.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    a2, a4 = _axial_coefficients(cfg)
    u = _initial_guess(cfg.n_ions)
    if cfg.n_ions == 1:
        # Single ion: minimum of the bare axial potential. At the origin unless
        # the quartic a2 < 0 double well moves it; a lone ion stays at a well.
        if a4 > 0 and a2 < 0:
            u = np.array([math.sqrt(-a2 / (2.0 * a4))])
        return IonCrystal(u, length_scale(cfg), float(np.abs(_gradient(u, a2, a4)).max()))

    g = _gradient(u, a2, a4)
    for _ in range(max_iter):
        gnorm = np.abs(g).max()
        if gnorm <= tol:
            break
        h = _hessian(u, a2, a4)
        tau = 0.0
        while True:
            try:
                step = scipy.linalg.cho_solve(
                    scipy.linalg.cho_factor(h + tau * np.eye(len(u))), -g
                )
                break
            except scipy.linalg.LinAlgError:
                tau = max(2.0 * tau, 1e-6 * np.abs(np.diag(h)).max())
        # Backtrack on the gradient norm; Newton steps far from the solution
        # can overshoot into an ion-crossing configuration.
        scale = 1.0
        for _ in range(60):
            u_new = u + scale * step
            if np.all(np.diff(u_new) > 0):
                g_new = _gradient(u_new, a2, a4)
                if np.abs(g_new).max() < gnorm:
                    break
            scale *= 0.5
        else:
            raise ConvergenceError(
                "equilibrium Newton iteration stalled (unstable or unbound potential?)"
            )
        u, g = u_new, g_new
    else:
        raise ConvergenceError(
            f"equilibrium positions did not converge to tol={tol:g} in {max_iter} iterations"
        )

    if not np.all(np.diff(u) > 0):
        raise ConvergenceError("equilibrium solution has coinciding ions")
    return IonCrystal(u, length_scale(cfg), float(np.abs(g).max()))


def _coulomb_curvature(cfg: TrapConfig) -> float:
    """omega_l^2 = q^2/(4 pi eps0 M l^3): transverse Coulomb curvature unit, (rad/s)^2."""
    return COULOMB_COEFF / (cfg.ion_mass * length_scale(cfg) ** 3)


def transverse_hessian(cfg: TrapConfig, crystal: IonCrystal) -> np.ndarray:
    """Transverse dynamical matrix (rad/s)^2 about the linear chain.

    A[i][i] = omega_com^2 - w2 * sum_{j != i} 1/|u_i - u_j|^3
    A[i][j] = +w2 / |u_i - u_j|^3          (i != j)

    with w2 the Coulomb curvature unit (= omega_z^2 for harmonic traps).
    """
    u = crystal.positions
    w2 = _coulomb_curvature(cfg)
    du = np.abs(u[:, None] - u[None, :])
    np.fill_diagonal(du, np.inf)
    inv3 = 1.0 / du**3
    a = w2 * inv3
    np.fill_diagonal(a, cfg.omega_com**2 - w2 * np.sum(inv3, axis=1))
    return a


def linearity_check(cfg: TrapConfig, crystal: IonCrystal) -> tuple[bool, float]:
    """True iff all transverse eigenvalues are positive; margin = min eigenvalue / omega_com^2."""
    eigvals = np.linalg.eigvalsh(transverse_hessian(cfg, crystal))
    margin = float(eigvals.min() / cfg.omega_com**2)
    return bool(eigvals.min() > 0), margin


def _canonical_signs(b: np.ndarray) -> np.ndarray:
    """Flip each column so its largest-magnitude entry is positive (reproducible gauge)."""
    b = b.copy()
    for m in range(b.shape[1]):
        k = int(np.argmax(np.abs(b[:, m])))
        if b[k, m] < 0:
            b[:, m] = -b[:, m]
    return b


def lamb_dicke(cfg: TrapConfig, frequencies: np.ndarray, mode_matrix: np.ndarray) -> np.ndarray:
    """eta[i, m] = b[i, m] * delta_k * sqrt(hbar / (2 M omega_m))."""
    zpt = cfg.delta_k * np.sqrt(HBAR / (2.0 * cfg.ion_mass * frequencies))
    return mode_matrix * zpt[None, :]


def transverse_modes(cfg: TrapConfig, crystal: IonCrystal) -> ModeSpectrum:
    """Eigen-decompose the transverse dynamical matrix.

    Returns frequencies sorted descending (COM first), an orthonormal mode
    matrix in a canonical sign gauge, and the Lamb-Dicke matrix. Raises
    StabilityError if any eigenvalue is non-positive (zigzag instability).
    """
    eigvals, eigvecs = np.linalg.eigh(transverse_hessian(cfg, crystal))
    if eigvals[0] <= 0:
        raise StabilityError(
            f"zigzag instability: smallest transverse eigenvalue {eigvals[0]:.6g} (rad/s)^2 <= 0"
        )
    order = np.argsort(eigvals)[::-1]
    freqs = np.sqrt(eigvals[order])
    b = _canonical_signs(np.ascontiguousarray(eigvecs[:, order]))
    if abs(freqs[0] - cfg.omega_com) > 1e-9 * cfg.omega_com:
        raise RuntimeError(
            f"COM frequency mismatch: got {freqs[0]:.12g}, expected {cfg.omega_com:.12g}"
        )
    return ModeSpectrum(freqs, b, lamb_dicke(cfg, freqs, b))


def critical_axial_frequency(
    n_ions: int,
    omega_com: float,
    ion_mass: float = DEFAULT_ION_MASS,
    delta_k: float = DEFAULT_DELTA_K,
    rtol: float = 1e-6,
) -> float:
    """Largest harmonic omega_z keeping the N-ion chain linear, by bisection on linearity_check."""

    def stable(omega_z: float) -> bool:
        cfg = TrapConfig(n_ions, omega_com, HarmonicAxial(omega_z), ion_mass, delta_k)
        ok, _ = linearity_check(cfg, equilibrium_positions(cfg))
        return ok

    hi = omega_com * (1.0 - 1e-9)
    if stable(hi):
        return hi
    lo = 1e-3 * omega_com
    if not stable(lo):
        raise StabilityError(f"chain of {n_ions} ions unstable even at omega_z = omega_com/1000")
    while (hi - lo) > rtol * hi:
        mid = 0.5 * (lo + hi)
        if stable(mid):
            lo = mid
        else:
            hi = mid
    return lo


def default_axial_frequency(
    n_ions: int,
    omega_com: float,
    ion_mass: float = DEFAULT_ION_MASS,
    delta_k: float = DEFAULT_DELTA_K,
    headroom: float = 0.9,
) -> float:
    """Default anisotropy rule: omega_z = 0.9 * critical frequency for this chain size."""
    return headroom * critical_axial_frequency(n_ions, omega_com, ion_mass, delta_k)


def default_trap(
    n_ions: int,
    omega_com: float,
    ion_mass: float = DEFAULT_ION_MASS,
    delta_k: float = DEFAULT_DELTA_K,
    qubit_freq: float | None = None,
) -> TrapConfig:
    """Harmonic trap with the default anisotropy rule applied."""
    omega_z = default_axial_frequency(n_ions, omega_com, ion_mass, delta_k)
    return TrapConfig(n_ions, omega_com, HarmonicAxial(omega_z), ion_mass, delta_k, qubit_freq)
