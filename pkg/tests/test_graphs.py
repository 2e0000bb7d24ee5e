import math

import numpy as np
import pytest

from ionising.fileio import write_matrix_csv
from ionising.graphs import (
    TargetGraph,
    chain_nn,
    from_file,
    kagome_pbc,
    square_lattice_pbc,
    uniform_full,
)


def degrees(graph):
    return (graph.j_target != 0.0).sum(axis=0)


class TestChain:
    def test_open_chain_edges(self):
        g = chain_nn(5, 2.0)
        assert g.n == 5
        assert g.edges() == [(0, 1, 2.0), (1, 2, 2.0), (2, 3, 2.0), (3, 4, 2.0)]
        np.testing.assert_array_equal(degrees(g), [1, 2, 2, 2, 1])

    def test_periodic_adds_wraparound(self):
        g = chain_nn(6, 1.0, periodic=True)
        assert g.j_target[0, 5] == 1.0
        np.testing.assert_array_equal(degrees(g), np.full(6, 2))

    def test_too_small(self):
        with pytest.raises(ValueError):
            chain_nn(1, 1.0)


class TestUniform:
    def test_all_to_all(self):
        g = uniform_full(4, 3.0)
        expected = 3.0 * (np.ones((4, 4)) - np.eye(4))
        np.testing.assert_array_equal(g.j_target, expected)
        assert len(g.edges()) == 6


class TestSquare:
    def test_degree_four_everywhere(self):
        g = square_lattice_pbc(5, 5, 1.0)
        assert g.n == 25
        np.testing.assert_array_equal(degrees(g), np.full(25, 4))
        assert len(g.edges()) == 50  # 2 edges per site

    def test_row_major_indexing(self):
        g = square_lattice_pbc(3, 4, 1.0)
        # site (1, 2) -> 6; right neighbor (1, 3) -> 7; down neighbor (2, 2) -> 10
        assert g.j_target[6, 7] == 1.0
        assert g.j_target[6, 10] == 1.0
        assert g.j_target[6, 8] == 0.0

    def test_wraparound_edges(self):
        g = square_lattice_pbc(3, 3, 1.0)
        assert g.j_target[0, 2] == 1.0  # row wrap
        assert g.j_target[0, 6] == 1.0  # column wrap

    def test_degenerate_size_sums_duplicates(self):
        # rows=2: the up and down vertical edges coincide and weights add
        g = square_lattice_pbc(2, 3, 1.0)
        assert g.j_target[0, 3] == 2.0

    def test_too_small(self):
        with pytest.raises(ValueError):
            square_lattice_pbc(1, 5, 1.0)


class TestKagome:
    def test_counts_and_degrees(self):
        g = kagome_pbc(4, 3, 1.0)
        assert g.n == 36
        np.testing.assert_array_equal(degrees(g), np.full(36, 4))
        assert len(g.edges()) == 72  # 6 edges per 3-site cell

    def test_triangle_count(self):
        # corner-sharing triangles: 2 per cell (one up, one down)
        g = kagome_pbc(3, 3, 1.0)
        a = (g.j_target != 0.0).astype(int)
        n_triangles = np.trace(a @ a @ a) // 6
        assert n_triangles == 2 * 9

    def test_up_triangle_within_cell(self):
        g = kagome_pbc(2, 2, 1.0)
        for a, b in ((0, 1), (1, 2), (2, 0)):
            assert g.j_target[a, b] != 0.0

    def test_embedding_shape(self):
        g = kagome_pbc(2, 2, 1.0)
        assert g.embedding.shape == (12, 2)

    def test_too_small(self):
        with pytest.raises(ValueError):
            kagome_pbc(1, 3, 1.0)


class TestFromFile:
    def test_roundtrip_hz_to_rad(self, tmp_path):
        m = np.array([[0.0, 1.5, 0.0], [1.5, 0.0, -2.0], [0.0, -2.0, 0.0]])
        path = tmp_path / "couplings.csv"
        write_matrix_csv(path, m)
        g = from_file(path)
        assert g.n == 3
        np.testing.assert_allclose(g.j_target, 2.0 * math.pi * m, rtol=1e-15)
        assert g.name == "couplings"

    def test_small_asymmetry_averaged(self, tmp_path):
        m = np.array([[0.0, 1.0], [1.0 + 1e-12, 0.0]])
        path = tmp_path / "g.csv"
        write_matrix_csv(path, m)
        g = from_file(path)
        assert g.j_target[0, 1] == g.j_target[1, 0]

    def test_asymmetric_rejected(self, tmp_path):
        m = np.array([[0.0, 1.0], [2.0, 0.0]])
        path = tmp_path / "g.csv"
        write_matrix_csv(path, m)
        with pytest.raises(ValueError):
            from_file(path)

    def test_nonzero_diagonal_rejected(self, tmp_path):
        m = np.array([[1.0, 0.5], [0.5, 0.0]])
        path = tmp_path / "g.csv"
        write_matrix_csv(path, m)
        with pytest.raises(ValueError):
            from_file(path)

    def test_nonsquare_rejected(self, tmp_path):
        path = tmp_path / "g.csv"
        path.write_text("0.0,1.0,2.0\n1.0,0.0,3.0\n")
        with pytest.raises(ValueError):
            from_file(path)


class TestTargetGraph:
    def test_symmetry_required(self):
        with pytest.raises(ValueError):
            TargetGraph(2, np.array([[0.0, 1.0], [2.0, 0.0]]), "bad")

    def test_shape_must_match_n(self):
        with pytest.raises(ValueError):
            TargetGraph(3, np.zeros((2, 2)), "bad")

    def test_array_frozen(self):
        g = chain_nn(3, 1.0)
        with pytest.raises(ValueError):
            g.j_target[0, 1] = 5.0
