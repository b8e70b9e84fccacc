import numpy as np
import pytest

from amcl.data import (
    Dataset,
    FoldSpec,
    SyntheticSpec,
    THREE_GAUSSIAN_MEANS,
    destandardize_prediction,
    fit_standardization,
    load_csv,
    read_csv_matrix,
    sample_conditional_targets,
    sample_synthetic,
    standardize,
)
from amcl.errors import ConfigError, DegenerateInputError, ShapeError
from amcl.numerics import make_rng


class TestSyntheticSampling:
    def test_three_gaussians_statistics(self):
        spec = SyntheticSpec("three_gaussians", sigma=0.1)
        ds = sample_synthetic(spec, 60000, make_rng(0))
        assert np.all(ds.inputs == 1.0)
        # mixture mean and per-coordinate variance have closed forms
        mix_mean = THREE_GAUSSIAN_MEANS.mean(axis=0)
        assert np.allclose(ds.targets.mean(axis=0), mix_mean, atol=0.01)
        between = THREE_GAUSSIAN_MEANS.var(axis=0)
        assert np.allclose(ds.targets.var(axis=0), between + 0.01, atol=0.01)

    def test_conditional_scales_with_input(self):
        spec = SyntheticSpec("conditional_three_gaussians", sigma=0.01)
        ds = sample_synthetic(spec, 50000, make_rng(1))
        assert np.all((ds.inputs >= 0.0) & (ds.inputs <= 1.0))
        # near x = 0 all components collapse to the origin
        near_zero = ds.inputs[:, 0] < 0.02
        assert np.all(np.linalg.norm(ds.targets[near_zero], axis=1) < 0.1)

    def test_two_point_alternates(self):
        ds = sample_synthetic(SyntheticSpec("two_point"), 6, make_rng(0))
        assert np.array_equal(ds.targets.ravel(), [-1, 1, -1, 1, -1, 1])

    def test_single_gaussian_variance(self):
        ds = sample_synthetic(SyntheticSpec("single_gaussian_1d", sigma=0.5), 40000, make_rng(2))
        assert ds.targets.std() == pytest.approx(0.5, rel=0.02)

    def test_reproducible(self):
        spec = SyntheticSpec("three_gaussians")
        a = sample_synthetic(spec, 100, make_rng(7))
        b = sample_synthetic(spec, 100, make_rng(7))
        assert np.array_equal(a.targets, b.targets)

    def test_conditional_probe_matches_dataset_law(self):
        spec = SyntheticSpec("conditional_three_gaussians", sigma=0.1)
        ys = sample_conditional_targets(spec, 1.0, 80000, make_rng(3))
        between = THREE_GAUSSIAN_MEANS.var(axis=0)
        assert np.allclose(ys.var(axis=0), between + 0.01, atol=0.01)

    def test_invalid_spec(self):
        with pytest.raises(ConfigError):
            SyntheticSpec("nope")
        with pytest.raises(ConfigError):
            SyntheticSpec("three_gaussians", sigma=0.0)
        with pytest.raises(ConfigError):
            sample_synthetic(SyntheticSpec("two_point"), 0, make_rng(0))


class TestDataset:
    def test_length(self):
        ds = Dataset(np.zeros((5, 1)), np.zeros((5, 2)))
        assert len(ds) == 5

    def test_shape_validation(self):
        with pytest.raises(ShapeError):
            Dataset(np.zeros(5), np.zeros((5, 1)))
        with pytest.raises(ShapeError):
            Dataset(np.zeros((5, 1)), np.zeros((4, 1)))
        with pytest.raises(DegenerateInputError):
            Dataset(np.zeros((0, 1)), np.zeros((0, 1)))


class TestStandardization:
    def test_round_trip(self, rng):
        x = rng.standard_normal((30, 2)) * 3 + 1
        y = rng.standard_normal((30, 1)) * 7 - 4
        record = fit_standardization(x, y)
        sx, sy = standardize(x, y, record)
        assert np.allclose(sx.mean(axis=0), 0.0, atol=1e-12)
        assert np.allclose(sx.std(axis=0), 1.0, atol=1e-12)
        assert np.allclose(destandardize_prediction(sy, record), y, atol=1e-12)

    def test_degenerate_column_flagged(self):
        x = np.column_stack([np.ones(10), np.arange(10.0)])
        record = fit_standardization(x, np.arange(10.0)[:, None])
        assert record.degenerate_x == (0,)
        assert record.x_std[0] == 1.0
        sx, _ = standardize(x, np.arange(10.0)[:, None], record)
        assert np.all(sx[:, 0] == 0.0)

    def test_destandardize_dim_check(self):
        record = fit_standardization(np.arange(4.0)[:, None], np.arange(4.0)[:, None])
        with pytest.raises(ShapeError):
            destandardize_prediction(np.zeros((3, 2)), record)


class TestCsv:
    def _write(self, path, text):
        path.write_text(text)
        return path

    def test_read_matrix(self, tmp_path):
        p = self._write(tmp_path / "a.csv", "a,b\n1,2\n3,4\n")
        header, m = read_csv_matrix(p)
        assert header == ["a", "b"]
        assert np.array_equal(m, [[1, 2], [3, 4]])

    def test_malformed_rows_reported(self, tmp_path):
        p = self._write(tmp_path / "a.csv", "a,b\n1,2\n1,oops\n3,4\n5\n")
        with pytest.raises(DegenerateInputError, match=r"\[1, 3\]"):
            read_csv_matrix(p)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DegenerateInputError):
            read_csv_matrix(self._write(tmp_path / "a.csv", ""))

    def test_load_csv_split_and_standardization(self, tmp_path, rng):
        rows = ["x1,x2,y"]
        data = rng.standard_normal((100, 3)) * [2, 5, 3] + [1, -1, 10]
        rows += [",".join(f"{v:.8f}" for v in r) for r in data]
        p = self._write(tmp_path / "d.csv", "\n".join(rows) + "\n")
        train, test = load_csv(p, ["y"], FoldSpec("d", fold=0))
        assert len(train) == 90 and len(test) == 10
        assert train.inputs.shape == (90, 2) and train.targets.shape == (90, 1)
        # standardization is fit on train only
        assert np.allclose(train.inputs.mean(axis=0), 0.0, atol=1e-10)
        assert np.allclose(train.targets.std(), 1.0, atol=1e-10)
        assert abs(float(test.inputs.mean())) > 1e-10
        assert train.standardization is test.standardization

    def test_folds_deterministic_and_distinct(self, tmp_path, rng):
        rows = ["x,y"] + [f"{i},{i * 2}" for i in range(50)]
        p = self._write(tmp_path / "d.csv", "\n".join(rows) + "\n")
        a0 = load_csv(p, ["y"], FoldSpec("d", fold=0))[1]
        b0 = load_csv(p, ["y"], FoldSpec("d", fold=0))[1]
        a1 = load_csv(p, ["y"], FoldSpec("d", fold=1))[1]
        assert np.array_equal(a0.inputs, b0.inputs)
        assert not np.array_equal(a0.inputs, a1.inputs)

    def test_unknown_target_column(self, tmp_path):
        p = self._write(tmp_path / "d.csv", "a,b\n1,2\n3,4\n")
        with pytest.raises(ConfigError):
            load_csv(p, ["z"], FoldSpec("d", fold=0))
