import numpy as np
import pytest

from gapvine.data import (
    DataError,
    GapDataset,
    make_dataset,
    read_long_csv,
    write_long_csv,
)


def sample_dataset():
    return make_dataset(
        [[0.5, 1.2, 0.8], [1.1, 0.4], [2.2], [0.9, 1.5, 0.3, 0.6]],
        [False, True, True, False],
        ["a", "b", "c", "d"],
    )


class TestDataset:
    def test_ordering_and_shape(self):
        ds = sample_dataset()
        assert ds.n == 4
        assert ds.d == 4
        assert list(ds.sizes) == [4, 3, 2, 1]
        assert ds.clusters[0].cluster_id == "d"

    def test_size_counts(self):
        ds = sample_dataset()
        assert ds.size_counts == {1: 1, 2: 1, 3: 1, 4: 1}

    def test_totals_and_status(self):
        ds = sample_dataset()
        assert ds.total_times[0] == pytest.approx(0.9 + 1.5 + 0.3 + 0.6)
        # last_status: 1 = event; clusters b and c are censored
        assert list(ds.last_status) == [1, 1, 0, 0]

    def test_censoring_rates(self):
        ds = sample_dataset()
        # 2 censored gaps out of 10 observed gaps
        assert ds.censoring_rate == pytest.approx(0.2)
        assert ds.cluster_censoring_rate == pytest.approx(0.5)

    def test_group_by_size(self):
        groups = sample_dataset().group_by_size()
        mat, cens, idx = groups[3]
        assert mat.shape == (1, 3)
        assert not cens[0]

    def test_validation(self):
        with pytest.raises(DataError):
            make_dataset([[1.0, -0.5]], [False])
        with pytest.raises(DataError):
            GapDataset(())


class TestCsvRoundTrip:
    def test_roundtrip_identity(self, tmp_path):
        ds = sample_dataset()
        path = tmp_path / "data.csv"
        write_long_csv(ds, path)
        back = read_long_csv(path)
        assert back.n == ds.n
        for c1, c2 in zip(ds.clusters, back.clusters):
            assert c1.cluster_id == c2.cluster_id
            assert c1.censored == c2.censored
            assert np.array_equal(c1.gaps, c2.gaps)  # lossless floats

    def test_simulated_roundtrip(self, tmp_path):
        rng = np.random.default_rng(3)
        gaps = [rng.exponential(size=rng.integers(1, 5)) for _ in range(50)]
        flags = rng.integers(0, 2, size=50).astype(bool)
        ds = make_dataset(gaps, flags)
        path = tmp_path / "sim.csv"
        write_long_csv(ds, path)
        back = read_long_csv(path)
        assert np.array_equal(back.total_times, ds.total_times)
        assert np.array_equal(back.last_status, ds.last_status)


class TestCsvValidation:
    def write(self, tmp_path, text):
        p = tmp_path / "bad.csv"
        p.write_text(text)
        return p

    def test_bad_header(self, tmp_path):
        p = self.write(tmp_path, "id,idx,time,status\n1,1,0.5,1\n")
        with pytest.raises(DataError, match="header"):
            read_long_csv(p)

    def test_empty_file(self, tmp_path):
        with pytest.raises(DataError):
            read_long_csv(self.write(tmp_path, ""))
        with pytest.raises(DataError, match="no data"):
            read_long_csv(self.write(tmp_path, "cluster_id,gap_index,gap_time,status\n"))

    def test_nonpositive_gap(self, tmp_path):
        p = self.write(tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,0.0,1\n")
        with pytest.raises(DataError, match="positive"):
            read_long_csv(p)

    def test_noncontiguous_index(self, tmp_path):
        p = self.write(
            tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,0.5,1\n1,3,0.4,1\n"
        )
        with pytest.raises(DataError, match="contiguous"):
            read_long_csv(p)

    def test_duplicate_index(self, tmp_path):
        p = self.write(
            tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,0.5,1\n1,1,0.4,1\n"
        )
        with pytest.raises(DataError, match="duplicate"):
            read_long_csv(p)

    def test_mid_cluster_censoring(self, tmp_path):
        p = self.write(
            tmp_path,
            "cluster_id,gap_index,gap_time,status\n1,1,0.5,0\n1,2,0.4,1\n",
        )
        with pytest.raises(DataError, match="censored status before"):
            read_long_csv(p)

    def test_bad_status(self, tmp_path):
        p = self.write(tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,0.5,2\n")
        with pytest.raises(DataError, match="status"):
            read_long_csv(p)

    def test_malformed_number(self, tmp_path):
        p = self.write(tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,abc,1\n")
        with pytest.raises(DataError, match="malformed"):
            read_long_csv(p)

    def test_blank_lines_skipped(self, tmp_path):
        p = self.write(
            tmp_path, "cluster_id,gap_index,gap_time,status\n1,1,0.5,1\n\n2,1,0.3,0\n"
        )
        ds = read_long_csv(p)
        assert ds.n == 2
