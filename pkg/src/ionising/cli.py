"""Command line pipeline: trap -> modes -> schedule -> solve -> verify -> errors.

Subcommands: modes, graph, solve, verify, scaling, sensitivity, dynamics,
groundstate, plotdata. All user-facing frequencies are Hz (internally rad/s);
CSV output carries 17 significant digits; manifests capture every parameter
so a rerun with the same config reproduces artifacts byte for byte.

Exit codes: 0 success, 1 validation failure, 2 numerical failure.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.constants

from . import __version__, kernels
from .budget import DEFAULT_EPSILON, error_budget, scaling_study, trap_sensitivity
from .constants import DEFAULT_ION_MASS, DEFAULT_RAMAN_WAVELENGTH
from .coupling import (
    CouplingMatrix,
    RabiMatrix,
    detuning_schedule,
    forward_coupling,
    response_tensor,
    validity_check,
)
from .crystal import (
    HarmonicAxial,
    QuarticAxial,
    TrapConfig,
    default_axial_frequency,
    equilibrium_positions,
    transverse_modes,
)
from .dynamics import (
    InteractionTerm,
    SpinState,
    evolve_exact,
    expectation,
    ground_state,
    trotter_evolve,
)
from .exceptions import IonisingError
from .fileio import (
    ensure_dir,
    format_float,
    read_manifest,
    read_matrix_csv,
    write_manifest,
    write_matrix_csv,
    write_table_csv,
)
from .graphs import TargetGraph, chain_nn, from_file, kagome_pbc, square_lattice_pbc, uniform_full
from .inverse import SolveConfig, SolveResult, solve_rabi, verify_roundtrip

TWO_PI = 2.0 * math.pi
EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NUMERICAL = 2


class StageError(Exception):
    """Pipeline failure tagged with its stage and an exit code."""

    def __init__(self, stage: str, message: str, code: int = EXIT_NUMERICAL):
        super().__init__(f"stage {stage}: {message}")
        self.stage = stage
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    """Validated end-to-end design run: trap, graph, schedule, solver, outputs."""

    n_ions: int
    omega_com_hz: float
    axial: dict[str, Any]  # {"kind": "default"} | {"kind": "harmonic", "omega_z_hz"} | {"kind": "quartic", "alpha2", "alpha4"}
    ion_mass_amu: float
    raman_wavelength_nm: float
    graph: dict[str, Any]
    f_s: float
    budget_hz: float | None
    residual_tol: float
    max_iter: int
    n_starts: int
    seed: int
    outputs: str
    epsilon: float = DEFAULT_EPSILON
    sensitivity_delta: float = 1e-3
    sensitivity_trials: int = 200

    def __post_init__(self):
        if self.n_ions < 1:
            raise ValueError("trap.n_ions must be >= 1")
        if self.omega_com_hz <= 0:
            raise ValueError("trap.omega_com_hz must be positive")
        kind = self.axial.get("kind")
        if kind == "harmonic":
            if float(self.axial.get("omega_z_hz", 0)) <= 0:
                raise ValueError("harmonic axial needs positive omega_z_hz")
        elif kind == "quartic":
            if float(self.axial.get("alpha4", 0)) <= 0:
                raise ValueError("quartic axial needs positive alpha4")
        elif kind != "default":
            raise ValueError(f"axial.kind must be default|harmonic|quartic, got {kind!r}")
        if self.ion_mass_amu <= 0 or self.raman_wavelength_nm <= 0:
            raise ValueError("ion mass and wavelength must be positive")
        if not 0.0 < self.f_s < 1.0:
            raise ValueError(f"f_s must lie in (0, 1), got {self.f_s}")
        if self.budget_hz is not None and self.budget_hz <= 0:
            raise ValueError("budget_hz must be positive when given")
        if self.residual_tol <= 0 or self.n_starts < 1 or self.max_iter < 1:
            raise ValueError("solver fields invalid")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")
        if self.sensitivity_delta < 0 or self.sensitivity_trials < 1:
            raise ValueError("sensitivity fields invalid")
        if self.graph.get("kind") not in ("chain", "square", "kagome", "uniform", "file"):
            raise ValueError(f"graph.kind invalid: {self.graph.get('kind')!r}")

    def as_manifest_dict(self) -> dict[str, Any]:
        return {
            "trap": {
                "n_ions": self.n_ions,
                "omega_com_hz": self.omega_com_hz,
                "axial": self.axial,
                "ion_mass_amu": self.ion_mass_amu,
                "raman_wavelength_nm": self.raman_wavelength_nm,
            },
            "graph": self.graph,
            "f_s": self.f_s,
            "budget_hz": self.budget_hz,
            "solver": {
                "residual_tol": self.residual_tol,
                "max_iter": self.max_iter,
                "n_starts": self.n_starts,
            },
            "seed": self.seed,
            "outputs": self.outputs,
            "epsilon": self.epsilon,
            "sensitivity": {
                "delta": self.sensitivity_delta,
                "trials": self.sensitivity_trials,
            },
        }


def load_run_config(path) -> RunConfig:
    with open(path) as fh:
        raw = json.load(fh)
    return run_config_from_dict(raw)


def run_config_from_dict(raw: dict[str, Any]) -> RunConfig:
    trap = raw.get("trap", {})
    solver = raw.get("solver", {})
    sens = raw.get("sensitivity", {})
    return RunConfig(
        n_ions=int(trap.get("n_ions", 0)),
        omega_com_hz=float(trap.get("omega_com_hz", 0.0)),
        axial=dict(trap.get("axial", {"kind": "default"})),
        ion_mass_amu=float(trap.get("ion_mass_amu", DEFAULT_ION_MASS / scipy.constants.atomic_mass)),
        raman_wavelength_nm=float(
            trap.get("raman_wavelength_nm", DEFAULT_RAMAN_WAVELENGTH * 1e9)
        ),
        graph=dict(raw.get("graph", {})),
        f_s=float(raw.get("f_s", 0.0)),
        budget_hz=None if raw.get("budget_hz") is None else float(raw["budget_hz"]),
        residual_tol=float(solver.get("residual_tol", 1e-8)),
        max_iter=int(solver.get("max_iter", 40)),
        n_starts=int(solver.get("n_starts", 8)),
        seed=int(raw.get("seed", 0)),
        outputs=str(raw.get("outputs", ".")),
        epsilon=float(raw.get("epsilon", DEFAULT_EPSILON)),
        sensitivity_delta=float(sens.get("delta", 1e-3)),
        sensitivity_trials=int(sens.get("trials", 200)),
    )


def build_trap(config: RunConfig) -> TrapConfig:
    mass = config.ion_mass_amu * scipy.constants.atomic_mass
    delta_k = 2.0 * TWO_PI / (config.raman_wavelength_nm * 1e-9)
    omega_com = TWO_PI * config.omega_com_hz
    kind = config.axial["kind"]
    if kind == "harmonic":
        axial = HarmonicAxial(TWO_PI * float(config.axial["omega_z_hz"]))
    elif kind == "quartic":
        axial = QuarticAxial(float(config.axial["alpha2"]), float(config.axial["alpha4"]))
    else:
        axial = HarmonicAxial(
            default_axial_frequency(config.n_ions, omega_com, mass, delta_k)
        )
    return TrapConfig(config.n_ions, omega_com, axial, mass, delta_k)


def build_graph(spec: dict[str, Any], n_ions: int | None = None) -> TargetGraph:
    kind = spec["kind"]
    j0 = TWO_PI * float(spec.get("j0_hz", 1.0))
    if kind == "chain":
        g = chain_nn(int(spec.get("n", n_ions)), j0, bool(spec.get("periodic", False)))
    elif kind == "uniform":
        g = uniform_full(int(spec.get("n", n_ions)), j0)
    elif kind == "square":
        g = square_lattice_pbc(int(spec["rows"]), int(spec["cols"]), j0)
    elif kind == "kagome":
        g = kagome_pbc(int(spec["cells_x"]), int(spec["cells_y"]), j0)
    elif kind == "file":
        g = from_file(spec["path"])
    else:
        raise ValueError(f"unknown graph kind {kind!r}")
    if n_ions is not None and g.n != n_ions:
        raise ValueError(f"graph has {g.n} vertices but the trap holds {n_ions} ions")
    return g


def _stage(name: str, fn, *args, code: int = EXIT_NUMERICAL, **kwargs):
    try:
        return fn(*args, **kwargs)
    except StageError:
        raise
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        raise StageError(name, str(exc), EXIT_VALIDATION) from exc
    except IonisingError as exc:
        raise StageError(name, str(exc), code) from exc


def run_design(config: RunConfig) -> int:
    """Full design pipeline; writes the artifact set into config.outputs."""
    trap = _stage("trap", build_trap, config, code=EXIT_VALIDATION)
    target = _stage("graph", build_graph, config.graph, config.n_ions, code=EXIT_VALIDATION)
    crystal = _stage("equilibrium", equilibrium_positions, trap)
    modes = _stage("modes", transverse_modes, trap, crystal)
    sched = _stage("schedule", detuning_schedule, modes, config.f_s)
    f = _stage("tensor", response_tensor, modes, sched)
    if config.budget_hz is None:
        solve_cfg = SolveConfig(
            residual_tol=config.residual_tol,
            max_iter=config.max_iter,
            n_starts=config.n_starts,
            rng_seed=config.seed,
            mode="exact_target",
        )
    else:
        solve_cfg = SolveConfig(
            residual_tol=config.residual_tol,
            max_iter=config.max_iter,
            n_starts=config.n_starts,
            rng_seed=config.seed,
            mode="fixed_budget",
            budget=TWO_PI * config.budget_hz,
        )
    result = _stage("solve", solve_rabi, target, f, solve_cfg)
    report = _stage("verify", verify_roundtrip, result, target, f)
    validity = _stage("validity", validity_check, result.omega, sched, modes)

    out = config.outputs
    ensure_dir(out)
    write_matrix_csv(
        os.path.join(out, "positions.csv"),
        np.column_stack(
            [np.arange(config.n_ions, dtype=float), crystal.positions, crystal.positions * crystal.length_scale]
        ),
        [
            "equilibrium positions: index, u (units of length scale), z (m)",
            f"length scale {format_float(crystal.length_scale)} m",
        ],
    )
    write_matrix_csv(
        os.path.join(out, "modes.csv"),
        modes.mode_matrix,
        ["transverse mode matrix b[ion, mode], modes sorted by descending frequency"],
    )
    write_table_csv(
        os.path.join(out, "schedule.csv"),
        {
            "mode": np.arange(modes.n),
            "omega_hz": modes.frequencies / TWO_PI,
            "mu_hz": sched.detunings / TWO_PI,
        },
        [f"beatnote schedule, f_s {format_float(config.f_s)}"],
    )
    write_matrix_csv(
        os.path.join(out, "omega.csv"),
        report.omega_canonical / TWO_PI,
        ["Rabi amplitudes Omega[ion, tone] (Hz), column signs canonicalized"],
    )
    write_matrix_csv(
        os.path.join(out, "j_attained.csv"),
        result.attained.j / TWO_PI,
        ["attained couplings J[i, j] (Hz)"],
    )
    residual_lines = [
        f"relative_residual {format_float(result.relative_residual)}",
        f"max_abs_deviation_hz {format_float(report.max_abs_deviation / TWO_PI)}",
        f"objective_hz {format_float(result.objective / TWO_PI)}",
        f"converged {int(result.converged)}",
        f"iterations {result.iterations}",
        f"best_start {result.best_start}",
    ]
    if result.attained_scale is not None:
        residual_lines.append(
            f"attained_scale_hz {format_float(result.attained_scale / TWO_PI)}"
        )
    with open(os.path.join(out, "residual.txt"), "w") as fh:
        fh.write("\n".join(residual_lines) + "\n")
    with open(os.path.join(out, "validity.txt"), "w") as fh:
        fh.write(validity.to_text())

    budget_rep = _stage(
        "errors",
        error_budget,
        result,
        trap,
        modes,
        sched,
        config.epsilon,
        config.sensitivity_delta,
        config.sensitivity_trials,
        config.seed,
    )
    with open(os.path.join(out, "errors.txt"), "w") as fh:
        fh.write(
            "\n".join(
                [
                    f"p_ph {format_float(budget_rep.p_ph)}",
                    f"gamma_per_s {format_float(budget_rep.gamma)}",
                    f"epsilon {format_float(budget_rep.epsilon)}",
                    f"sensitivity_pred {format_float(budget_rep.sensitivity_pred)}",
                    f"sensitivity_mc_mean {format_float(budget_rep.sensitivity_mc[0])}",
                    f"sensitivity_mc_std {format_float(budget_rep.sensitivity_mc[1])}",
                ]
            )
            + "\n"
        )
    manifest = {
        "config": config.as_manifest_dict(),
        "derived": {
            "omega_z_hz": trap.axial.omega_z / TWO_PI
            if isinstance(trap.axial, HarmonicAxial)
            else None,
            "length_scale_m": crystal.length_scale,
            "kernel_backend": kernels.backend_name(),
        },
        "results": {
            "converged": bool(result.converged),
            "relative_residual": result.relative_residual,
            "objective_hz": result.objective / TWO_PI,
            "attained_scale_hz": None
            if result.attained_scale is None
            else result.attained_scale / TWO_PI,
            "best_start": result.best_start,
        },
        "version": __version__,
    }
    write_manifest(os.path.join(out, "manifest.json"), manifest)
    if not result.converged:
        print(
            f"solve did not converge: relative residual {result.relative_residual:.3g}",
            file=sys.stderr,
        )
        return EXIT_NUMERICAL
    return EXIT_OK


def run_scaling(
    family: str,
    n_min: int,
    n_max: int,
    f_s: float,
    budget_hz: float,
    omega_com_hz: float,
    seed: int,
    n_starts: int,
    outputs: str,
) -> int:
    rows, slope = scaling_study(
        n_min,
        n_max,
        "chain_nn" if family == "chain" else "uniform_full",
        f_s,
        TWO_PI * budget_hz,
        TWO_PI * omega_com_hz,
        n_starts=n_starts,
        rng_seed=seed,
    )
    ensure_dir(outputs)
    columns = {
        "n": np.array([r.n for r in rows]),
        "j_metric_hz": np.array([r.j_metric for r in rows]),
        "p_ph": np.array([r.p_ph for r in rows]),
        "gamma_per_s": np.array([r.gamma for r in rows]),
        "converged": np.array([r.converged for r in rows]),
    }
    if family == "uniform":
        columns["j_metric_reduced_hz"] = np.array([r.j_metric_reduced for r in rows])
    write_table_csv(
        os.path.join(outputs, "scaling.csv"),
        columns,
        [f"scaling study family {family}, f_s {format_float(f_s)}, budget {format_float(budget_hz)} Hz"],
    )
    write_manifest(
        os.path.join(outputs, "manifest.json"),
        {
            "scaling": {
                "family": family,
                "n_min": n_min,
                "n_max": n_max,
                "f_s": f_s,
                "budget_hz": budget_hz,
                "omega_com_hz": omega_com_hz,
                "seed": seed,
                "n_starts": n_starts,
            },
            "slope": slope,
            "kernel_backend": kernels.backend_name(),
            "version": __version__,
        },
    )
    if slope is None:
        print("exponent: not fitted (fewer than two converged rows)")
    else:
        print(f"exponent: {format_float(slope)}")
    return EXIT_OK


def _rebuild_design(run_dir: str):
    """Reconstruct trap, modes, schedule, tensor, target, and result from artifacts."""
    manifest = read_manifest(os.path.join(run_dir, "manifest.json"))
    config = run_config_from_dict(manifest["config"])
    trap = build_trap(config)
    target = build_graph(config.graph, config.n_ions)
    crystal = equilibrium_positions(trap)
    modes = transverse_modes(trap, crystal)
    sched = detuning_schedule(modes, config.f_s)
    f = response_tensor(modes, sched)
    omega = RabiMatrix(TWO_PI * read_matrix_csv(os.path.join(run_dir, "omega.csv")))
    attained = forward_coupling(omega, f)
    scale_hz = manifest["results"].get("attained_scale_hz")
    result = SolveResult(
        omega=omega,
        attained=attained,
        relative_residual=float(manifest["results"]["relative_residual"]),
        objective=float(np.abs(omega.omega).sum()),
        attained_scale=None if scale_hz is None else TWO_PI * float(scale_hz),
        iterations=0,
        converged=bool(manifest["results"]["converged"]),
        best_start=int(manifest["results"]["best_start"]),
        detunings=sched.detunings,
    )
    return config, trap, target, modes, sched, f, result


def run_verify(run_dir: str, tol: float) -> int:
    config, trap, target, modes, sched, f, result = _rebuild_design(run_dir)
    report = verify_roundtrip(result, target, f)
    j_stored = TWO_PI * read_matrix_csv(os.path.join(run_dir, "j_attained.csv"))
    stored_dev = float(np.abs(j_stored - result.attained.j).max())
    print(f"relative_residual {format_float(report.relative_residual)}")
    print(f"max_abs_deviation_hz {format_float(report.max_abs_deviation / TWO_PI)}")
    print(f"stored_attained_deviation_hz {format_float(stored_dev / TWO_PI)}")
    return EXIT_OK if report.relative_residual <= tol else EXIT_NUMERICAL


def run_sensitivity(run_dir: str, delta: float, trials: int, seed: int) -> int:
    config, trap, target, modes, sched, f, result = _rebuild_design(run_dir)
    sens = trap_sensitivity(result, trap, delta, trials, seed)
    print(f"delta {format_float(sens.delta)}")
    print(f"trials {sens.n_trials}")
    print(f"discarded {sens.n_discarded}")
    print(f"measured_mean {format_float(sens.mean)}")
    print(f"measured_std {format_float(sens.std)}")
    print(f"predicted_sqrtN_delta {format_float(sens.predicted)}")
    return EXIT_OK


def _parse_pair(text: str, n: int) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise ValueError(f"pair must be 'i,j', got {text!r}")
    i, j = int(parts[0]), int(parts[1])
    if not (0 <= i < n and 0 <= j < n and i != j):
        raise ValueError(f"pair {i},{j} out of range for {n} spins")
    return i, j


def run_dynamics(
    j_path: str,
    t_final: float,
    steps: int,
    observable: str,
    pair: str,
    points: int,
    out: str | None,
) -> int:
    j_hz = read_matrix_csv(j_path)
    coupling = CouplingMatrix(TWO_PI * 0.5 * (j_hz + j_hz.T) * (np.ones_like(j_hz) - np.eye(j_hz.shape[0])))
    n = coupling.n_ions
    i, j = _parse_pair(pair, n)
    axis = "z" if observable == "zzcorr" else "x"
    term = InteractionTerm("x", coupling)
    state0 = SpinState.basis_state(n, 0)
    times = np.linspace(0.0, t_final, points)
    exact_vals = []
    trotter_vals = []
    for t in times:
        st = evolve_exact([term], state0, float(t))
        exact_vals.append(expectation(st, [(axis, i), (axis, j)]))
        if steps > 0:
            st_t = trotter_evolve([term], state0, float(t), steps)
            trotter_vals.append(expectation(st_t, [(axis, i), (axis, j)]))
    columns = {"t_s": times, "exact": np.array(exact_vals)}
    if steps > 0:
        columns["trotter"] = np.array(trotter_vals)
    lines_target = out if out else None
    comment = [f"observable {observable} on pair {i},{j}"]
    if lines_target:
        write_table_csv(lines_target, columns, comment)
    else:
        names = list(columns)
        print("# " + ",".join(names))
        for k in range(points):
            print(",".join(format_float(columns[nm][k]) for nm in names))
    return EXIT_OK


def run_groundstate(j_path: str) -> int:
    j_hz = read_matrix_csv(j_path)
    n = j_hz.shape[0]
    coupling = CouplingMatrix(TWO_PI * 0.5 * (j_hz + j_hz.T) * (np.ones_like(j_hz) - np.eye(n)))
    energy, configs = ground_state(coupling)
    print(f"ground_energy_hz {format_float(energy / TWO_PI)}")
    print(f"degeneracy {len(configs)}")
    for config in configs:
        print("".join("+" if s > 0 else "-" for s in config))
    return EXIT_OK


def run_plotdata(run_dir: str, outputs: str, scaling_path: str | None) -> int:
    ensure_dir(outputs)
    wrote_any = False
    sched_path = os.path.join(run_dir, "schedule.csv")
    if os.path.exists(sched_path):
        table = read_matrix_csv(sched_path)
        write_table_csv(
            os.path.join(outputs, "spectrum.csv"),
            {"mode": table[:, 0].astype(int), "omega_hz": table[:, 1]},
            ["transverse mode spectrum"],
        )
        wrote_any = True
    omega_path = os.path.join(run_dir, "omega.csv")
    if os.path.exists(omega_path):
        omega = read_matrix_csv(omega_path)
        ion_idx, tone_idx = np.meshgrid(
            np.arange(omega.shape[0]), np.arange(omega.shape[1]), indexing="ij"
        )
        write_table_csv(
            os.path.join(outputs, "omega_heatmap.csv"),
            {
                "ion": ion_idx.ravel(),
                "tone": tone_idx.ravel(),
                "omega_hz": omega.ravel(),
            },
            ["Rabi amplitude heatmap (long format)"],
        )
        wrote_any = True
    scaling_file = scaling_path or os.path.join(run_dir, "scaling.csv")
    if os.path.exists(scaling_file):
        table = read_matrix_csv(scaling_file)
        write_table_csv(
            os.path.join(outputs, "scaling_loglog.csv"),
            {"log10_n": np.log10(table[:, 0]), "log10_j_hz": np.log10(table[:, 1])},
            ["log-log scaling data"],
        )
        wrote_any = True
    if not wrote_any:
        raise StageError("plotdata", f"no artifacts found under {run_dir}", EXIT_VALIDATION)
    return EXIT_OK


def run_modes(
    n: int,
    omega_com_hz: float,
    omega_z_hz: float | None,
    mass_amu: float,
    wavelength_nm: float,
    outputs: str,
) -> int:
    config = RunConfig(
        n_ions=n,
        omega_com_hz=omega_com_hz,
        axial={"kind": "default"}
        if omega_z_hz is None
        else {"kind": "harmonic", "omega_z_hz": omega_z_hz},
        ion_mass_amu=mass_amu,
        raman_wavelength_nm=wavelength_nm,
        graph={"kind": "chain", "n": n},
        f_s=0.5,
        budget_hz=None,
        residual_tol=1e-8,
        max_iter=1,
        n_starts=1,
        seed=0,
        outputs=outputs,
    )
    trap = build_trap(config)
    crystal = equilibrium_positions(trap)
    modes = transverse_modes(trap, crystal)
    ensure_dir(outputs)
    write_matrix_csv(
        os.path.join(outputs, "positions.csv"),
        np.column_stack(
            [np.arange(n, dtype=float), crystal.positions, crystal.positions * crystal.length_scale]
        ),
        ["equilibrium positions: index, u (units of length scale), z (m)"],
    )
    write_matrix_csv(
        os.path.join(outputs, "modes.csv"),
        modes.mode_matrix,
        ["transverse mode matrix b[ion, mode]"],
    )
    write_matrix_csv(
        os.path.join(outputs, "frequencies.csv"),
        modes.frequencies[None, :] / TWO_PI,
        ["transverse mode frequencies (Hz), descending"],
    )
    print(f"omega_z_hz {format_float(trap.axial.omega_z / TWO_PI)}")
    if n > 1:
        print(f"top_gap_hz {format_float((modes.frequencies[0] - modes.frequencies[1]) / TWO_PI)}")
    return EXIT_OK


def run_graph(args) -> int:
    spec: dict[str, Any] = {"kind": args.kind, "j0_hz": args.j0_hz}
    if args.kind in ("chain", "uniform"):
        if args.n is None:
            raise ValueError(f"--n required for {args.kind}")
        spec["n"] = args.n
        if args.kind == "chain":
            spec["periodic"] = args.periodic
    elif args.kind == "square":
        if args.rows is None or args.cols is None:
            raise ValueError("--rows and --cols required for square")
        spec.update(rows=args.rows, cols=args.cols)
    elif args.kind == "kagome":
        if args.cells_x is None or args.cells_y is None:
            raise ValueError("--cells-x and --cells-y required for kagome")
        spec.update(cells_x=args.cells_x, cells_y=args.cells_y)
    else:
        raise ValueError(f"graph subcommand cannot emit kind {args.kind!r}")
    g = build_graph(spec)
    return _write_graph_files(g, args.out)


def _write_graph_files(g: TargetGraph, prefix: str) -> int:
    parent = os.path.dirname(prefix)
    if parent:
        ensure_dir(parent)
    write_matrix_csv(
        prefix + ".csv", g.j_target / TWO_PI, [f"coupling matrix (Hz), graph {g.name}"]
    )
    meta = {
        "name": g.name,
        "n": g.n,
        "sign_convention": "positive J is antiferromagnetic",
        "index_map": "row-major onto the linear chain",
        "embedding": None if g.embedding is None else [list(row) for row in g.embedding],
    }
    write_manifest(prefix + ".meta.json", meta)
    return EXIT_OK


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse defaults to exit code 2; we reserve that
        self.print_usage(sys.stderr)
        self.exit(EXIT_VALIDATION, f"{self.prog}: error: {message}\n")


def _build_parser() -> _Parser:
    parser = _Parser(
        prog="ionising",
        description="Design laser spectral patterns for programmable trapped-ion couplings.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("modes", help="equilibrium positions and transverse modes")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--omega-com-hz", type=float, default=5e6)
    p.add_argument("--omega-z-hz", type=float, default=None)
    p.add_argument("--mass-amu", type=float, default=DEFAULT_ION_MASS / scipy.constants.atomic_mass)
    p.add_argument("--wavelength-nm", type=float, default=DEFAULT_RAMAN_WAVELENGTH * 1e9)
    p.add_argument("--out", default="modes_out")

    p = sub.add_parser("graph", help="emit a target graph as CSV + metadata")
    p.add_argument("--kind", required=True, choices=["chain", "square", "kagome", "uniform"])
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--rows", type=int, default=None)
    p.add_argument("--cols", type=int, default=None)
    p.add_argument("--cells-x", type=int, default=None)
    p.add_argument("--cells-y", type=int, default=None)
    p.add_argument("--j0-hz", type=float, default=1.0)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--out", required=True, help="output prefix (writes <out>.csv, <out>.meta.json)")

    p = sub.add_parser("solve", help="run the full design pipeline")
    p.add_argument("--config", default=None, help="JSON run config")
    p.add_argument("--graph", default=None, help="inline graph: chain:N | square:RxC | kagome:XxY | uniform:N | file:PATH")
    p.add_argument("--n", type=int, default=None, help="ion count (defaults to graph size)")
    p.add_argument("--fs", type=float, default=None)
    p.add_argument("--budget-hz", type=float, default=None)
    p.add_argument("--omega-com-hz", type=float, default=5e6)
    p.add_argument("--j0-hz", type=float, default=1.0)
    p.add_argument("--periodic", action="store_true")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=8)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--out", default=None)

    p = sub.add_parser("verify", help="recompute a stored design through the naive path")
    p.add_argument("--run", required=True)
    p.add_argument("--tol", type=float, default=1e-6)

    p = sub.add_parser("scaling", help="coupling strength vs chain size")
    p.add_argument("--family", required=True, choices=["chain", "uniform"])
    p.add_argument("--nmin", type=int, required=True)
    p.add_argument("--nmax", type=int, required=True)
    p.add_argument("--fs", type=float, required=True)
    p.add_argument("--budget", type=float, required=True, help="total amplitude budget (Hz)")
    p.add_argument("--omega-com-hz", type=float, default=5e6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--starts", type=int, default=4)
    p.add_argument("--out", default="scaling_out")

    p = sub.add_parser("sensitivity", help="Monte Carlo trap-frequency sensitivity")
    p.add_argument("--run", required=True)
    p.add_argument("--delta", type=float, default=1e-3)
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("dynamics", help="exact and Trotterized evolution time series")
    p.add_argument("--j", required=True, help="coupling matrix CSV (Hz)")
    p.add_argument("--t", type=float, required=True, help="final time (s)")
    p.add_argument("--steps", type=int, default=0, help="Trotter steps (0 = exact only)")
    p.add_argument("--observable", choices=["zzcorr", "xxcorr"], default="zzcorr")
    p.add_argument("--pair", default="0,1")
    p.add_argument("--points", type=int, default=101)
    p.add_argument("--out", default=None)

    p = sub.add_parser("groundstate", help="exhaustive Ising ground state")
    p.add_argument("--j", required=True, help="coupling matrix CSV (Hz)")

    p = sub.add_parser("plotdata", help="derive plot-ready CSV bundles from run artifacts")
    p.add_argument("--run", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--scaling", default=None, help="explicit scaling.csv path")
    return parser


def _parse_graph_spec(text: str, j0_hz: float, periodic: bool) -> dict[str, Any]:
    kind, _, rest = text.partition(":")
    spec: dict[str, Any] = {"kind": kind, "j0_hz": j0_hz}
    if kind in ("chain", "uniform"):
        spec["n"] = int(rest)
        if kind == "chain":
            spec["periodic"] = periodic
    elif kind == "square":
        rows, cols = rest.split("x")
        spec.update(rows=int(rows), cols=int(cols))
    elif kind == "kagome":
        x, y = rest.split("x")
        spec.update(cells_x=int(x), cells_y=int(y))
    elif kind == "file":
        spec["path"] = rest
    else:
        raise ValueError(f"unknown graph spec {text!r}")
    return spec


def _solve_config_from_args(args) -> RunConfig:
    if args.config is not None:
        return load_run_config(args.config)
    if args.graph is None or args.fs is None or args.out is None:
        raise ValueError("solve needs --config, or --graph, --fs and --out")
    spec = _parse_graph_spec(args.graph, args.j0_hz, args.periodic)
    if args.n is not None:
        n_ions = args.n
    else:
        n_ions = build_graph(spec).n
    return RunConfig(
        n_ions=n_ions,
        omega_com_hz=args.omega_com_hz,
        axial={"kind": "default"},
        ion_mass_amu=DEFAULT_ION_MASS / scipy.constants.atomic_mass,
        raman_wavelength_nm=DEFAULT_RAMAN_WAVELENGTH * 1e9,
        graph=spec,
        f_s=args.fs,
        budget_hz=args.budget_hz,
        residual_tol=args.tol,
        max_iter=40,
        n_starts=args.starts,
        seed=args.seed,
        outputs=args.out,
    )


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "modes":
            return run_modes(
                args.n, args.omega_com_hz, args.omega_z_hz, args.mass_amu, args.wavelength_nm, args.out
            )
        if args.command == "graph":
            return _stage("graph", run_graph, args, code=EXIT_VALIDATION)
        if args.command == "solve":
            config = _stage("config", _solve_config_from_args, args, code=EXIT_VALIDATION)
            return run_design(config)
        if args.command == "verify":
            return run_verify(args.run, args.tol)
        if args.command == "scaling":
            return run_scaling(
                args.family, args.nmin, args.nmax, args.fs, args.budget,
                args.omega_com_hz, args.seed, args.starts, args.out,
            )
        if args.command == "sensitivity":
            return run_sensitivity(args.run, args.delta, args.trials, args.seed)
        if args.command == "dynamics":
            return run_dynamics(
                args.j, args.t, args.steps, args.observable, args.pair, args.points, args.out
            )
        if args.command == "groundstate":
            return run_groundstate(args.j)
        if args.command == "plotdata":
            return run_plotdata(args.run, args.out, args.scaling)
        raise StageError("cli", f"unhandled command {args.command}", EXIT_VALIDATION)
    except StageError as exc:
        print(str(exc), file=sys.stderr)
        return exc.code
    except (ValueError, OSError, KeyError, json.JSONDecodeError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except IonisingError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
