"""Unsupervised pairwise metrics: prediction correlation and mean-embedding discrepancy."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from .core import Bundle, EmbeddingMatrix, ScoreMatrix

# Per-class standard deviations below this are treated as degenerate.
DEGENERATE_STD = 1e-12


def _scores(z) -> np.ndarray:
    if isinstance(z, ScoreMatrix):
        return z.values
    arr = np.asarray(z, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("scores must be a 2-D samples x classes matrix")
    return arr


def _embeddings(h) -> np.ndarray:
    if isinstance(h, EmbeddingMatrix):
        return h.values
    arr = np.asarray(h, dtype=np.float64)
    if arr.ndim != 2:
        raise ValueError("embeddings must be a 2-D samples x dims matrix")
    return arr


def correlation_vector(z_m, z_n) -> np.ndarray:
    """Per-class Pearson correlation of two score matrices across samples.

    Uses population (divide-by-S) moments. Classes where either side's
    standard deviation falls below ``DEGENERATE_STD`` are returned as NaN.
    """
    a = _scores(z_m)
    b = _scores(z_n)
    if a.shape != b.shape:
        raise ValueError("incompatible score matrices")
    if a.shape[0] < 2:
        raise ValueError("insufficient samples")
    mu_a = a.mean(axis=0)
    mu_b = b.mean(axis=0)
    sd_a = a.std(axis=0)
    sd_b = b.std(axis=0)
    cov = ((a - mu_a) * (b - mu_b)).mean(axis=0)
    defined = (sd_a >= DEGENERATE_STD) & (sd_b >= DEGENERATE_STD)
    out = np.full(a.shape[1], np.nan)
    out[defined] = np.clip(cov[defined] / (sd_a[defined] * sd_b[defined]), -1.0, 1.0)
    return out


def pair_correlation(z_m, z_n) -> float:
    """Mean of the defined per-class correlations between two modalities."""
    vec = correlation_vector(z_m, z_n)
    defined = ~np.isnan(vec)
    if not defined.any():
        raise ValueError("degenerate scores")
    return float(vec[defined].mean())


def pair_mmd(h_m, h_n) -> float:
    """Discrepancy between two embedding sets: the norm of their mean difference.

    Sample counts may differ; the embedding dimension may not.
    """
    a = _embeddings(h_m)
    b = _embeddings(h_n)
    if a.shape[1] != b.shape[1]:
        raise ValueError("incomparable embedding spaces")
    return float(np.linalg.norm(a.mean(axis=0) - b.mean(axis=0)))


@dataclass(frozen=True, eq=False)
class PairMetricMatrix:
    """Symmetric modality-pair metric values with a validity mask."""

    names: tuple[str, ...]
    values: np.ndarray
    valid: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        valid = np.asarray(self.valid, dtype=bool)
        n = len(self.names)
        if values.shape != (n, n) or valid.shape != (n, n):
            raise ValueError("pair matrices must be square over the modality names")
        values.setflags(write=False)
        valid.setflags(write=False)
        object.__setattr__(self, "names", tuple(self.names))
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "valid", valid)

    def index(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"no modality named {name!r}") from None

    def value(self, m: str, n: str) -> float:
        i, j = self.index(m), self.index(n)
        if not self.valid[i, j]:
            raise ValueError(f"no valid metric for pair ({m}, {n})")
        return float(self.values[i, j])

    def is_valid(self, m: str, n: str) -> bool:
        return bool(self.valid[self.index(m), self.index(n)])

    def pairs(self) -> list[tuple[str, str]]:
        """Unordered pairs (i < j) in modality order."""
        return [
            (self.names[i], self.names[j])
            for i in range(len(self.names))
            for j in range(i + 1, len(self.names))
        ]

    def to_dict(self) -> dict:
        return {
            "modalities": list(self.names),
            "values": [
                [self.values[i, j] if self.valid[i, j] else None for j in range(len(self.names))]
                for i in range(len(self.names))
            ],
        }


def correlation_matrix(bundle: Bundle) -> PairMetricMatrix:
    """Prediction-correlation matrix over all modality pairs of a bundle.

    Pairs whose scores are degenerate for every class are marked invalid
    instead of raising.
    """
    records = bundle.modalities
    n = len(records)
    values = np.zeros((n, n))
    valid = np.zeros((n, n), dtype=bool)
    for i in range(n):
        for j in range(i, n):
            try:
                rho = pair_correlation(records[i].scores, records[j].scores)
            except ValueError as err:
                if "degenerate" not in str(err):
                    raise
                continue
            values[i, j] = values[j, i] = rho
            valid[i, j] = valid[j, i] = True
    return PairMetricMatrix(bundle.names, values, valid)


def mmd_matrix(bundle: Bundle) -> PairMetricMatrix:
    """Mean-embedding discrepancy matrix; entries without comparable embeddings are invalid."""
    records = bundle.modalities
    n = len(records)
    values = np.zeros((n, n))
    valid = np.zeros((n, n), dtype=bool)
    for i in range(n):
        if records[i].embeddings is None:
            continue
        for j in range(i, n):
            if records[j].embeddings is None:
                continue
            if records[i].embeddings.dim != records[j].embeddings.dim:
                continue
            d = pair_mmd(records[i].embeddings, records[j].embeddings)
            values[i, j] = values[j, i] = d
            valid[i, j] = valid[j, i] = True
    return PairMetricMatrix(bundle.names, values, valid)


def aggregate(pairs: PairMetricMatrix, modality: str, exclude_self: bool = True) -> float:
    """Average a modality's pair metric over its valid partners.

    With ``exclude_self`` (the default) the diagonal is omitted and the
    divisor is the number of valid partners. With ``exclude_self=False`` the
    diagonal self-pair participates and the divisor is the number of valid
    entries in the row including it, which equals the modality count on a
    fully valid matrix.
    """
    i = pairs.index(modality)
    mask = pairs.valid[i].copy()
    if exclude_self:
        mask[i] = False
    if not mask.any():
        raise ValueError("modality has no comparable partners")
    return float(pairs.values[i][mask].mean())


@dataclass(frozen=True)
class AggregatedMetrics:
    """Per-modality aggregated correlation and discrepancy values.

    ``mmd`` maps to None for modalities without comparable embeddings; those
    are judged on correlation alone downstream.
    """

    names: tuple[str, ...]
    rho: Mapping[str, float]
    mmd: Mapping[str, float | None]

    def __post_init__(self):
        names = tuple(self.names)
        if set(self.rho) != set(names) or set(self.mmd) != set(names):
            raise ValueError("aggregated metrics must cover every modality exactly once")
        object.__setattr__(self, "names", names)
        object.__setattr__(self, "rho", {m: float(self.rho[m]) for m in names})
        object.__setattr__(
            self,
            "mmd",
            {m: (None if self.mmd[m] is None else float(self.mmd[m])) for m in names},
        )

    def to_dict(self) -> dict:
        return {
            m: {"correlation": self.rho[m], "discrepancy": self.mmd[m]} for m in self.names
        }


def aggregated_from_matrices(
    correlations: PairMetricMatrix,
    discrepancies: PairMetricMatrix | None = None,
    exclude_self: bool = True,
) -> AggregatedMetrics:
    """Aggregate pair matrices into per-modality values."""
    rho: dict[str, float] = {}
    mmd: dict[str, float | None] = {}
    for name in correlations.names:
        rho[name] = aggregate(correlations, name, exclude_self)
        if discrepancies is None:
            mmd[name] = None
            continue
        try:
            mmd[name] = aggregate(discrepancies, name, exclude_self)
        except ValueError:
            mmd[name] = None
    return AggregatedMetrics(correlations.names, rho, mmd)
