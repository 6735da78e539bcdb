"""Gap-time datasets: unbalanced clusters with last-gap censoring.

Long-format CSV surface: header cluster_id,gap_index,gap_time,status with
status 1 = event, 0 = right-censored (allowed only on the final gap of a
cluster).  Internally clusters are kept ordered by decreasing size.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np


class DataError(ValueError):
    """Raised on malformed input data."""


@dataclass(frozen=True)
class Cluster:
    cluster_id: str
    gaps: np.ndarray  # positive gap times y_{i,1..d_i}
    censored: bool  # status of the last gap

    @property
    def size(self) -> int:
        return len(self.gaps)

    @property
    def total_time(self) -> float:
        return float(np.sum(self.gaps))


@dataclass(frozen=True)
class GapDataset:
    clusters: tuple  # Cluster entries, ordered by decreasing size

    def __post_init__(self):
        sizes = self.sizes
        if len(sizes) == 0:
            raise DataError("empty dataset")
        if np.any(np.diff(sizes) > 0):
            raise DataError("clusters must be ordered by decreasing size")
        for c in self.clusters:
            if c.size < 1 or np.any(np.asarray(c.gaps) <= 0):
                raise DataError(f"cluster {c.cluster_id}: gaps must be positive")

    @property
    def n(self) -> int:
        return len(self.clusters)

    @property
    def d(self) -> int:
        return int(self.sizes.max())

    @property
    def sizes(self) -> np.ndarray:
        return np.array([c.size for c in self.clusters], dtype=int)

    @property
    def size_counts(self) -> dict:
        sizes = self.sizes
        return {j: int(np.sum(sizes == j)) for j in range(1, self.d + 1)}

    @property
    def total_times(self) -> np.ndarray:
        return np.array([c.total_time for c in self.clusters])

    @property
    def last_status(self) -> np.ndarray:
        """1 = event, 0 = censored, per cluster."""
        return np.array([0 if c.censored else 1 for c in self.clusters], dtype=int)

    @property
    def censoring_rate(self) -> float:
        """Fraction of observed gap times that are right-censored."""
        n_cens = sum(1 for c in self.clusters if c.censored)
        return float(n_cens / self.sizes.sum())

    @property
    def cluster_censoring_rate(self) -> float:
        """Fraction of clusters whose last gap is right-censored."""
        return float(np.mean([c.censored for c in self.clusters]))

    def gap_lists(self) -> list:
        return [np.asarray(c.gaps, dtype=float) for c in self.clusters]

    def group_by_size(self):
        """{size m: (gap matrix (n_m, m), censored flags (n_m,), cluster indices)}."""
        out = {}
        sizes = self.sizes
        for m in np.unique(sizes):
            idx = np.nonzero(sizes == m)[0]
            mat = np.vstack([self.clusters[i].gaps for i in idx])
            cens = np.array([self.clusters[i].censored for i in idx])
            out[int(m)] = (mat, cens, idx)
        return out


def make_dataset(gap_lists, censored_flags, cluster_ids=None) -> GapDataset:
    """Build an ordered GapDataset from ragged gap vectors and last-gap flags."""
    n = len(gap_lists)
    if cluster_ids is None:
        cluster_ids = [str(i + 1) for i in range(n)]
    clusters = [
        Cluster(str(cid), np.asarray(g, dtype=float), bool(c))
        for cid, g, c in zip(cluster_ids, gap_lists, censored_flags)
    ]
    clusters.sort(key=lambda c: -c.size)
    return GapDataset(tuple(clusters))


CSV_HEADER = ["cluster_id", "gap_index", "gap_time", "status"]


def read_long_csv(path) -> GapDataset:
    by_cluster = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file")
        if [h.strip().lower() for h in header] != CSV_HEADER:
            raise DataError(f"{path}: expected header {','.join(CSV_HEADER)}")
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not f.strip() for f in row):
                continue
            if len(row) != 4:
                raise DataError(f"{path}:{lineno}: expected 4 fields")
            cid = row[0].strip()
            try:
                j = int(row[1])
                y = float(row[2])
                st = int(row[3])
            except ValueError:
                raise DataError(f"{path}:{lineno}: malformed numeric field")
            if j < 1:
                raise DataError(f"{path}:{lineno}: gap_index must be >= 1")
            if y <= 0:
                raise DataError(f"{path}:{lineno}: gap_time must be positive")
            if st not in (0, 1):
                raise DataError(f"{path}:{lineno}: status must be 0 or 1")
            rows = by_cluster.setdefault(cid, {})
            if j in rows:
                raise DataError(f"{path}:{lineno}: duplicate (cluster, gap_index)")
            rows[j] = (y, st, lineno)
    if not by_cluster:
        raise DataError(f"{path}: no data rows")
    gap_lists, flags, ids = [], [], []
    for cid, rows in by_cluster.items():
        d_i = len(rows)
        if sorted(rows) != list(range(1, d_i + 1)):
            raise DataError(f"{path}: cluster {cid}: gap_index values must be 1..d contiguous")
        gaps = [rows[j][0] for j in range(1, d_i + 1)]
        for j in range(1, d_i):
            if rows[j][1] == 0:
                raise DataError(
                    f"{path}:{rows[j][2]}: cluster {cid}: censored status before the last gap"
                )
        gap_lists.append(gaps)
        flags.append(rows[d_i][1] == 0)
        ids.append(cid)
    return make_dataset(gap_lists, flags, ids)


def write_long_csv(dataset: GapDataset, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_HEADER)
        for c in dataset.clusters:
            for j, y in enumerate(c.gaps, start=1):
                status = 0 if (c.censored and j == c.size) else 1
                writer.writerow([c.cluster_id, j, repr(float(y)), status])
