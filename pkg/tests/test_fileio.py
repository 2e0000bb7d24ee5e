import numpy as np
import pytest

from ionising.fileio import (
    format_float,
    read_manifest,
    read_matrix_csv,
    write_manifest,
    write_matrix_csv,
    write_table_csv,
)


class TestMatrixCsv:
    def test_float64_roundtrip_exact(self, rng, tmp_path):
        # 17 significant digits reproduce every float64 bit for bit
        m = rng.standard_normal((6, 4)) * 10.0 ** rng.integers(-12, 12, (6, 4))
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m)
        back = read_matrix_csv(path)
        np.testing.assert_array_equal(back, m)

    def test_awkward_values_roundtrip(self, tmp_path):
        m = np.array([[1.0 / 3.0, np.pi, 2.0 ** -1074], [1e308, -0.0, 123456789.123456789]])
        path = tmp_path / "m.csv"
        write_matrix_csv(path, m)
        np.testing.assert_array_equal(read_matrix_csv(path), m)

    def test_comments_skipped(self, tmp_path):
        path = tmp_path / "m.csv"
        write_matrix_csv(path, np.eye(2), comments=["units: Hz", "design run 7"])
        text = path.read_text()
        assert text.startswith("# units: Hz\n# design run 7\n")
        np.testing.assert_array_equal(read_matrix_csv(path), np.eye(2))

    def test_empty_file_rejected(self, tmp_path):
        path = tmp_path / "empty.csv"
        path.write_text("# only a comment\n")
        with pytest.raises(ValueError):
            read_matrix_csv(path)

    def test_ragged_rejected(self, tmp_path):
        path = tmp_path / "ragged.csv"
        path.write_text("1.0,2.0\n3.0\n")
        with pytest.raises(ValueError):
            read_matrix_csv(path)


class TestTableCsv:
    def test_header_and_types(self, tmp_path):
        path = tmp_path / "t.csv"
        write_table_csv(
            path,
            {"n": np.array([3, 4]), "ok": np.array([True, False]), "v": np.array([0.5, 1.5])},
        )
        lines = path.read_text().splitlines()
        assert lines[0] == "# n,ok,v"
        assert lines[1] == "3,1,0.5"
        assert lines[2] == "4,0,1.5"

    def test_length_mismatch(self, tmp_path):
        with pytest.raises(ValueError):
            write_table_csv(
                tmp_path / "t.csv", {"a": np.array([1.0]), "b": np.array([1.0, 2.0])}
            )


class TestManifest:
    def test_roundtrip(self, tmp_path):
        payload = {"b": [1, 2], "a": {"x": 1.5, "y": None}, "s": "chain_4"}
        path = tmp_path / "manifest.json"
        write_manifest(path, payload)
        assert read_manifest(path) == payload

    def test_identical_bytes_on_rerun(self, tmp_path):
        payload = {"gamma": 0.25, "alpha": [3, 1], "beta": "x"}
        p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
        write_manifest(p1, payload)
        write_manifest(p2, dict(reversed(list(payload.items()))))
        assert p1.read_bytes() == p2.read_bytes()


def test_format_float_shortest_exact():
    for x in (0.1, 1.0 / 3.0, np.pi, 6.62607015e-34):
        assert float(format_float(x)) == x
