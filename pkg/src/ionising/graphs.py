"""Target coupling graphs mapped onto linear-chain ion indices.

Sign convention: positive J is antiferromagnetic. 2D lattices use a row-major
map onto the chain (site (r, c) -> index r*cols + c); the Kagome lattice uses
a 3-site up-triangle basis on a triangular Bravais lattice, cell (x, y) sites
at indices 3*(y*cells_x + x) + {0, 1, 2}. Degenerate periodic sizes (2 cells
across a direction) collapse duplicate wraparound edges by summing weights.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from .fileio import read_matrix_csv


@dataclass(frozen=True)
class TargetGraph:
    """Desired pairwise couplings j_target (rad/s), symmetric with zero diagonal."""

    n: int
    j_target: np.ndarray
    name: str
    embedding: np.ndarray | None = None  # (N, 2) plot coordinates

    def __post_init__(self):
        j = np.ascontiguousarray(np.asarray(self.j_target, dtype=float))
        j.flags.writeable = False
        object.__setattr__(self, "j_target", j)
        if j.shape != (self.n, self.n):
            raise ValueError(f"j_target must be {self.n}x{self.n}, got {j.shape}")
        if not np.array_equal(j, j.T):
            raise ValueError("j_target must be exactly symmetric")
        if np.any(np.diag(j) != 0.0):
            raise ValueError("j_target diagonal must be zero")
        if self.embedding is not None:
            emb = np.ascontiguousarray(np.asarray(self.embedding, dtype=float))
            emb.flags.writeable = False
            object.__setattr__(self, "embedding", emb)
            if emb.shape != (self.n, 2):
                raise ValueError(f"embedding must be {self.n}x2, got {emb.shape}")

    def edges(self) -> list[tuple[int, int, float]]:
        """Nonzero couplings as (i, j, weight) with i < j."""
        ii, jj = np.nonzero(np.triu(self.j_target, 1))
        return [(int(i), int(j), float(self.j_target[i, j])) for i, j in zip(ii, jj)]


def _graph_from_pairs(
    n: int,
    pairs: list[tuple[int, int]],
    j0: float,
    name: str,
    embedding: np.ndarray | None = None,
) -> TargetGraph:
    j = np.zeros((n, n))
    for a, b in pairs:
        j[a, b] += j0
        j[b, a] += j0
    return TargetGraph(n, j, name, embedding)


def chain_nn(n: int, j0: float, periodic: bool = False) -> TargetGraph:
    """Nearest-neighbor chain: J[i, i+1] = j0, optional wraparound edge."""
    if n < 2:
        raise ValueError(f"chain needs n >= 2, got {n}")
    pairs = [(i, i + 1) for i in range(n - 1)]
    if periodic:
        pairs.append((0, n - 1))
    name = f"chain_{n}" + ("_pbc" if periodic else "")
    emb = np.column_stack([np.arange(n, dtype=float), np.zeros(n)])
    return _graph_from_pairs(n, pairs, j0, name, emb)


def uniform_full(n: int, j0: float) -> TargetGraph:
    """Fully connected graph with every off-diagonal coupling equal to j0."""
    if n < 2:
        raise ValueError(f"uniform graph needs n >= 2, got {n}")
    j = np.full((n, n), j0)
    np.fill_diagonal(j, 0.0)
    theta = 2.0 * math.pi * np.arange(n) / n
    emb = np.column_stack([np.cos(theta), np.sin(theta)])
    return TargetGraph(n, j, f"uniform_{n}", emb)


def square_lattice_pbc(rows: int, cols: int, j0: float) -> TargetGraph:
    """Square lattice with periodic boundaries; site (r, c) -> index r*cols + c."""
    if rows < 2 or cols < 2:
        raise ValueError(f"square lattice needs rows, cols >= 2, got {rows}x{cols}")
    n = rows * cols

    def idx(r: int, c: int) -> int:
        return (r % rows) * cols + (c % cols)

    pairs = []
    for r in range(rows):
        for c in range(cols):
            pairs.append((idx(r, c), idx(r, c + 1)))
            pairs.append((idx(r, c), idx(r + 1, c)))
    emb = np.array([[c, r] for r in range(rows) for c in range(cols)], dtype=float)
    return _graph_from_pairs(n, pairs, j0, f"square_{rows}x{cols}_pbc", emb)


# Kagome geometry: up-triangle basis offsets on Bravais vectors A1=(2,0), A2=(1,sqrt(3)).
_KAGOME_A1 = (2.0, 0.0)
_KAGOME_A2 = (1.0, math.sqrt(3.0))
_KAGOME_BASIS = ((0.0, 0.0), (1.0, 0.0), (0.5, 0.5 * math.sqrt(3.0)))


def kagome_pbc(cells_x: int, cells_y: int, j0: float) -> TargetGraph:
    """Kagome lattice of corner-sharing triangles with periodic boundaries.

    Cell (x, y) holds an up-triangle of sites s = 0, 1, 2 at linear indices
    3*(y*cells_x + x) + s; down-triangles are closed by the neighbor cells
    (x+1, y), (x, y+1), and (x+1, y-1). Every vertex has degree 4.
    """
    if cells_x < 2 or cells_y < 2:
        raise ValueError(f"kagome lattice needs cells >= 2 each way, got {cells_x}x{cells_y}")
    n = 3 * cells_x * cells_y

    def idx(x: int, y: int, s: int) -> int:
        return 3 * ((y % cells_y) * cells_x + (x % cells_x)) + s

    pairs = []
    for y in range(cells_y):
        for x in range(cells_x):
            pairs.append((idx(x, y, 0), idx(x, y, 1)))
            pairs.append((idx(x, y, 1), idx(x, y, 2)))
            pairs.append((idx(x, y, 2), idx(x, y, 0)))
            pairs.append((idx(x, y, 1), idx(x + 1, y, 0)))
            pairs.append((idx(x, y, 2), idx(x, y + 1, 0)))
            pairs.append((idx(x, y, 1), idx(x + 1, y - 1, 2)))
    emb = np.zeros((n, 2))
    for y in range(cells_y):
        for x in range(cells_x):
            for s, (bx, by) in enumerate(_KAGOME_BASIS):
                emb[idx(x, y, s)] = [
                    x * _KAGOME_A1[0] + y * _KAGOME_A2[0] + bx,
                    x * _KAGOME_A1[1] + y * _KAGOME_A2[1] + by,
                ]
    return _graph_from_pairs(n, pairs, j0, f"kagome_{cells_x}x{cells_y}_pbc", emb)


def from_file(path, atol_asym: float = 1e-9) -> TargetGraph:
    """Load a coupling matrix from a CSV file of Hz values.

    Lines starting with '#' are ignored. The matrix must be square, symmetric
    within atol_asym (relative to its largest entry), and zero on the diagonal;
    small asymmetries are averaged away.
    """
    m = read_matrix_csv(path)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError(f"{path}: expected a square matrix, got shape {m.shape}")
    scale = np.abs(m).max()
    if np.abs(m - m.T).max() > atol_asym * max(scale, 1.0):
        raise ValueError(f"{path}: matrix asymmetric beyond tolerance {atol_asym:g}")
    if np.any(np.abs(np.diag(m)) > atol_asym * max(scale, 1.0)):
        raise ValueError(f"{path}: nonzero diagonal")
    j = 0.5 * (m + m.T) * (2.0 * math.pi)  # file is Hz, internal is rad/s
    np.fill_diagonal(j, 0.0)
    name = os.path.splitext(os.path.basename(str(path)))[0]
    return TargetGraph(m.shape[0], j, name)
