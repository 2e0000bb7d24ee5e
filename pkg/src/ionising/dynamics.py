"""Small exact spin dynamics for validating designed coupling matrices.

States live in the z-basis: amplitude index s encodes spin k in bit k
(least significant bit = spin 0), and sigma_x acts as a bit flip. Classical
"configurations" are abstract +-1 assignments along the interaction axis;
for the Hamiltonian H = sum_{i<j} J_ij sigma_a^i sigma_a^j each single-axis
term is diagonal in its own product basis, which trotter_evolve exploits by
rotating with per-qubit transforms instead of exponentiating matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse
import scipy.sparse.linalg

from .coupling import CouplingMatrix

MAX_STATE_SPINS = 14
MAX_ENUM_SPINS = 24
MAX_CONFIG_SPINS = 30
_AXES = ("x", "y", "z")
_ENUM_CHUNK = 1 << 16


@dataclass(frozen=True)
class SpinState:
    """Normalized state of n spins as 2^n complex amplitudes (z-basis, LSB = spin 0)."""

    amplitudes: np.ndarray
    n: int

    def __post_init__(self):
        if not 1 <= self.n <= MAX_STATE_SPINS:
            raise ValueError(f"n must be in [1, {MAX_STATE_SPINS}], got {self.n}")
        amp = np.ascontiguousarray(np.asarray(self.amplitudes, dtype=complex))
        amp.flags.writeable = False
        object.__setattr__(self, "amplitudes", amp)
        if amp.shape != (2**self.n,):
            raise ValueError(f"expected {2**self.n} amplitudes, got {amp.shape}")
        norm = float(np.linalg.norm(amp))
        if abs(norm - 1.0) > 1e-10:
            raise ValueError(f"state norm {norm} deviates from 1 beyond 1e-10")

    @classmethod
    def basis_state(cls, n: int, bits: int | Sequence[int] = 0) -> "SpinState":
        """Computational z-basis state; bits as an integer or per-spin 0/1 sequence."""
        if not isinstance(bits, (int, np.integer)):
            bits = sum((1 << k) for k, b in enumerate(bits) if b)
        amp = np.zeros(2**n, dtype=complex)
        amp[int(bits)] = 1.0
        return cls(amp, n)


@dataclass(frozen=True)
class InteractionTerm:
    """One interaction axis and its coupling matrix: sum_{i<j} J_ij sigma_a^i sigma_a^j."""

    axis: str
    j: CouplingMatrix

    def __post_init__(self):
        if self.axis not in _AXES:
            raise ValueError(f"axis must be one of {_AXES}, got {self.axis!r}")


def ising_energy(j: CouplingMatrix, config: Sequence[int]) -> float:
    """Classical energy sum_{i<j} J_ij s_i s_j of a +-1 spin assignment (rad/s)."""
    n = j.n_ions
    if n > MAX_CONFIG_SPINS:
        raise ValueError(f"classical configs capped at {MAX_CONFIG_SPINS} spins, got {n}")
    s = np.asarray(config, dtype=float)
    if s.shape != (n,) or not np.all(np.abs(s) == 1.0):
        raise ValueError(f"config must be {n} entries of +-1")
    return float(0.5 * s @ j.j @ s)


def _chunk_energies(j: np.ndarray, codes: np.ndarray, n: int) -> np.ndarray:
    """Energies of the configurations encoded by integer codes (bit k = spin k; bit 1 -> s=-1)."""
    bits = (codes[:, None] >> np.arange(n)[None, :]) & 1
    s = 1.0 - 2.0 * bits
    return 0.5 * np.einsum("ki,ij,kj->k", s, j, s, optimize=True)


def ground_state(
    j: CouplingMatrix, degeneracy_rtol: float = 1e-9
) -> tuple[float, list[tuple[int, ...]]]:
    """Minimum classical energy and all minimizing +-1 configurations.

    Enumerates the 2^(n-1) configurations with spin 0 fixed to +1 (global
    flips leave the energy invariant) and mirrors the minimizers back, so the
    returned list contains both members of each flip pair. Configurations
    within degeneracy_rtol of the minimum (relative to the energy scale)
    count as degenerate.
    """
    n = j.n_ions
    if n > MAX_ENUM_SPINS:
        raise ValueError(f"enumeration capped at {MAX_ENUM_SPINS} spins, got {n}")
    half = 1 << (n - 1)  # codes over spins 1..n-1; spin 0 bit stays 0 (+1)
    best_energy = math.inf
    best_codes: list[int] = []
    scale = max(float(np.abs(j.j).sum()) * 0.5, 1.0)
    for lo in range(0, half, _ENUM_CHUNK):
        codes = np.arange(lo, min(lo + _ENUM_CHUNK, half), dtype=np.int64) << 1
        energies = _chunk_energies(j.j, codes, n)
        chunk_min = float(energies.min())
        if chunk_min < best_energy - degeneracy_rtol * scale:
            best_energy = chunk_min
            best_codes = []
        keep = energies <= best_energy + degeneracy_rtol * scale
        best_codes.extend(int(c) for c in codes[keep])
    # re-filter against the final minimum, then mirror in the global flip
    final: list[tuple[int, ...]] = []
    for code in best_codes:
        bits = [(code >> k) & 1 for k in range(n)]
        config = tuple(1 - 2 * b for b in bits)
        energy = 0.5 * float(
            np.asarray(config, float) @ j.j @ np.asarray(config, float)
        )
        if energy <= best_energy + degeneracy_rtol * scale:
            final.append(config)
            final.append(tuple(-v for v in config))
    return best_energy, sorted(final)


def _basis_energies(j: np.ndarray, n: int) -> np.ndarray:
    """Diagonal of sum_{i<j} J_ij sigma^i sigma^j in the axis-product basis, all 2^n states."""
    out = np.empty(2**n)
    for lo in range(0, 2**n, _ENUM_CHUNK):
        codes = np.arange(lo, min(lo + _ENUM_CHUNK, 2**n), dtype=np.int64)
        out[lo : lo + codes.shape[0]] = _chunk_energies(j, codes, n)
    return out


def term_hamiltonian(term: InteractionTerm, n: int) -> scipy.sparse.csr_matrix:
    """Sparse z-basis matrix of sum_{i<j} J_ij sigma_a^i sigma_a^j."""
    if term.j.n_ions != n:
        raise ValueError(f"coupling matrix is {term.j.n_ions}-spin, state is {n}-spin")
    dim = 2**n
    jm = term.j.j
    if term.axis == "z":
        return scipy.sparse.diags(_basis_energies(jm, n), format="csr", dtype=complex)
    states = np.arange(dim, dtype=np.int64)
    rows, cols, vals = [], [], []
    for i in range(n):
        for k in range(i + 1, n):
            if jm[i, k] == 0.0:
                continue
            mask = (1 << i) | (1 << k)
            flipped = states ^ mask
            if term.axis == "x":
                coeff = np.full(dim, jm[i, k], dtype=complex)
            else:
                parity = ((states >> i) & 1) ^ ((states >> k) & 1)
                # sigma_y^i sigma_y^k |s> = -(-1)^(b_i + b_k) |s ^ mask>
                coeff = jm[i, k] * np.where(parity == 1, 1.0, -1.0).astype(complex)
            rows.append(flipped)
            cols.append(states)
            vals.append(coeff)
    if not rows:
        return scipy.sparse.csr_matrix((dim, dim), dtype=complex)
    return scipy.sparse.csr_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )


def evolve_exact(terms: Iterable[InteractionTerm], state: SpinState, t: float) -> SpinState:
    """Apply exp(-i H t), H = sum of the terms, via a sparse matrix exponential."""
    terms = list(terms)
    if t == 0.0 or not terms:
        return SpinState(state.amplitudes.copy(), state.n)
    h = term_hamiltonian(terms[0], state.n)
    for term in terms[1:]:
        h = h + term_hamiltonian(term, state.n)
    amp = scipy.sparse.linalg.expm_multiply(-1j * t * h, state.amplitudes)
    return SpinState(amp, state.n)


def _fwht(amp: np.ndarray, n: int) -> np.ndarray:
    """Unitary Walsh-Hadamard transform (Hadamard on every qubit)."""
    amp = amp.copy()
    for q in range(n):
        amp = amp.reshape(-1, 2, 1 << q)
        top = amp[:, 0, :].copy()
        amp[:, 0, :] = top + amp[:, 1, :]
        amp[:, 1, :] = top - amp[:, 1, :]
        amp = amp.reshape(-1)
    return amp / math.sqrt(2.0**n)


def _phase_bit_one(amp: np.ndarray, n: int, phase: complex) -> np.ndarray:
    """Multiply amplitudes by phase^(number of set bits) (diagonal per-qubit gate)."""
    amp = amp.copy()
    for q in range(n):
        amp = amp.reshape(-1, 2, 1 << q)
        amp[:, 1, :] *= phase
        amp = amp.reshape(-1)
    return amp


def _to_axis_basis(amp: np.ndarray, n: int, axis: str) -> np.ndarray:
    if axis == "z":
        return amp
    if axis == "y":
        amp = _phase_bit_one(amp, n, -1j)  # S^dagger before the Hadamards
    return _fwht(amp, n)


def _from_axis_basis(amp: np.ndarray, n: int, axis: str) -> np.ndarray:
    if axis == "z":
        return amp
    amp = _fwht(amp, n)
    if axis == "y":
        amp = _phase_bit_one(amp, n, 1j)
    return amp


def trotter_evolve(
    terms: Iterable[InteractionTerm], state: SpinState, t: float, n_steps: int
) -> SpinState:
    """First-order product formula: (prod_k exp(-i H_k t/n_steps))^n_steps.

    Terms are applied in the given order within every step. Each single-axis
    term is diagonal in its axis-product basis, so the per-term propagator is
    a per-qubit rotation, a diagonal phase, and the rotation back: exact for
    the term, leaving only the genuine noncommutativity error.
    """
    if n_steps < 1:
        raise ValueError("n_steps must be >= 1")
    terms = list(terms)
    if t == 0.0 or not terms:
        return SpinState(state.amplitudes.copy(), state.n)
    n = state.n
    dt = t / n_steps
    phases = []
    for term in terms:
        if term.j.n_ions != n:
            raise ValueError(f"coupling matrix is {term.j.n_ions}-spin, state is {n}-spin")
        phases.append((term.axis, np.exp(-1j * dt * _basis_energies(term.j.j, n))))
    amp = state.amplitudes.copy()
    for _ in range(n_steps):
        for axis, phase in phases:
            amp = _to_axis_basis(amp, n, axis)
            amp = amp * phase
            amp = _from_axis_basis(amp, n, axis)
    return SpinState(amp, n)


def apply_pauli(amp: np.ndarray, n: int, axis: str, site: int) -> np.ndarray:
    """Amplitudes of sigma_axis^(site) |psi> in the z-basis."""
    if axis not in _AXES:
        raise ValueError(f"axis must be one of {_AXES}, got {axis!r}")
    if not 0 <= site < n:
        raise ValueError(f"site {site} out of range for {n} spins")
    states = np.arange(amp.shape[0], dtype=np.int64)
    bit = (states >> site) & 1
    if axis == "z":
        return np.where(bit == 0, amp, -amp)
    flipped = states ^ (1 << site)
    out = np.empty_like(amp)
    if axis == "x":
        out[flipped] = amp
    else:
        # sigma_y |b> = i (-1)^b |1-b>
        out[flipped] = 1j * np.where(bit == 0, amp, -amp)
    return out


def expectation(state: SpinState, ops: Sequence[tuple[str, int]]) -> float:
    """Real expectation value of a product of single-site Paulis on distinct sites."""
    sites = [site for _, site in ops]
    if len(set(sites)) != len(sites):
        raise ValueError("operator sites must be distinct")
    amp = state.amplitudes
    for axis, site in ops:
        amp = apply_pauli(amp, state.n, axis, site)
    return float(np.real(np.vdot(state.amplitudes, amp)))
