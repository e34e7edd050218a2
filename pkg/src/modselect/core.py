"""Domain types for score/embedding bundles and fused-accuracy tables."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

SIMPLEX_TOL = 1e-6


def _frozen_array(values, dtype) -> np.ndarray:
    arr = np.ascontiguousarray(np.asarray(values, dtype=dtype))
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Per-sample class scores of one unimodal classifier (S samples x C classes).

    Rows are expected to lie on the probability simplex; that is a data
    invariant checked by :func:`validate_bundle`, not by the constructor.
    """

    values: np.ndarray
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        arr = _frozen_array(self.values, np.float64)
        if arr.ndim != 2:
            raise ValueError("scores must be a 2-D samples x classes matrix")
        n_samples, n_classes = arr.shape
        if n_samples < 1:
            raise ValueError("scores need at least one sample")
        if n_classes < 2:
            raise ValueError("scores need at least two classes")
        names = tuple(self.class_names) or tuple(f"c{i}" for i in range(n_classes))
        if len(names) != n_classes:
            raise ValueError(
                f"{len(names)} class names for {n_classes} score columns"
            )
        object.__setattr__(self, "values", arr)
        object.__setattr__(self, "class_names", names)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def n_classes(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class EmbeddingMatrix:
    """Latent vectors from one classifier (S samples x d dimensions)."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, np.float64)
        if arr.ndim != 2:
            raise ValueError("embeddings must be a 2-D samples x dims matrix")
        if arr.shape[0] < 1:
            raise ValueError("embeddings need at least one sample")
        if arr.shape[1] < 1:
            raise ValueError("embeddings need at least one dimension")
        object.__setattr__(self, "values", arr)

    @property
    def n_samples(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]


@dataclass(frozen=True, eq=False)
class LabelVector:
    """Class indices for a sequence of samples."""

    values: np.ndarray

    def __post_init__(self):
        arr = _frozen_array(self.values, np.int64)
        if arr.ndim != 1:
            raise ValueError("labels must be a 1-D vector")
        object.__setattr__(self, "values", arr)

    def __len__(self) -> int:
        return self.values.shape[0]

    def __array__(self, dtype=None, copy=None):
        if dtype is None:
            return self.values
        return self.values.astype(dtype)


@dataclass(frozen=True, eq=False)
class ModalityRecord:
    """One modality: a name, its score matrix and optional embeddings."""

    name: str
    scores: ScoreMatrix
    embeddings: EmbeddingMatrix | None = None

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise ValueError("modality name must be a nonempty string")


@dataclass(frozen=True, eq=False)
class Bundle:
    """Aligned collection of modality records plus optional ground truth.

    Sample alignment is by row order across all matrices; loaders check
    sample-id columns for consistency but never reorder rows.
    """

    modalities: tuple[ModalityRecord, ...]
    labels: LabelVector | None = None
    class_names: tuple[str, ...] = ()

    def __post_init__(self):
        records = tuple(self.modalities)
        names = tuple(self.class_names)
        if not names and records:
            names = records[0].scores.class_names
        object.__setattr__(self, "modalities", records)
        object.__setattr__(self, "class_names", names)

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(rec.name for rec in self.modalities)

    @property
    def n_samples(self) -> int:
        if not self.modalities:
            raise ValueError("bundle has no modalities")
        return self.modalities[0].scores.n_samples

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def get(self, name: str) -> ModalityRecord:
        for rec in self.modalities:
            if rec.name == name:
                return rec
        raise KeyError(f"no modality named {name!r}")

    def without_labels(self) -> "Bundle":
        """Label-stripped view; shares the underlying (immutable) matrices."""
        if self.labels is None:
            return self
        return Bundle(self.modalities, None, self.class_names)


@dataclass(frozen=True)
class Violation:
    """A single invariant violation found in a bundle."""

    modality: str | None
    row: int | None
    reason: str

    def __str__(self) -> str:
        where = self.modality or "bundle"
        if self.row is not None:
            where += f"[row {self.row}]"
        return f"{where}: {self.reason}"


@dataclass(frozen=True)
class ValidationResult:
    violations: tuple[Violation, ...]

    @property
    def ok(self) -> bool:
        return not self.violations

    def raise_if_invalid(self) -> None:
        if self.violations:
            listing = "; ".join(str(v) for v in self.violations[:20])
            extra = len(self.violations) - 20
            if extra > 0:
                listing += f"; ... and {extra} more"
            raise ValueError(f"invalid bundle: {listing}")


def validate_bundle(bundle: Bundle) -> ValidationResult:
    """Check every bundle invariant and report all violations as data.

    Returned violations carry the modality name, the offending row index
    where applicable, and a human-readable reason. An empty violation list
    means the bundle is valid.
    """
    out: list[Violation] = []
    names = [rec.name for rec in bundle.modalities]
    for name in sorted(set(n for n in names if names.count(n) > 1)):
        out.append(Violation(name, None, "duplicate modality name"))

    n_classes = len(bundle.class_names)
    if n_classes < 2:
        out.append(Violation(None, None, "bundle needs at least two class names"))

    ref_samples = bundle.modalities[0].scores.n_samples if bundle.modalities else 0
    for rec in bundle.modalities:
        scores = rec.scores
        if scores.class_names != bundle.class_names:
            out.append(Violation(rec.name, None, "class names inconsistent with bundle"))
        if scores.n_samples != ref_samples:
            out.append(
                Violation(
                    rec.name,
                    None,
                    f"sample count mismatch ({scores.n_samples} vs {ref_samples})",
                )
            )
        values = scores.values
        bad_range = np.where((values < 0.0) | (values > 1.0) | ~np.isfinite(values))
        for row in np.unique(bad_range[0]):
            out.append(Violation(rec.name, int(row), "score outside [0, 1]"))
        sums = values.sum(axis=1)
        off = np.where(np.abs(sums - 1.0) > SIMPLEX_TOL)[0]
        for row in off:
            out.append(
                Violation(rec.name, int(row), f"row not on simplex (sum={sums[row]:.9g})")
            )
        if rec.embeddings is not None:
            emb = rec.embeddings.values
            if rec.embeddings.n_samples != scores.n_samples:
                out.append(
                    Violation(
                        rec.name,
                        None,
                        "sample count mismatch between scores and embeddings",
                    )
                )
            bad = np.where(~np.isfinite(emb).all(axis=1))[0]
            for row in bad:
                out.append(Violation(rec.name, int(row), "non-finite embedding value"))

    if bundle.labels is not None:
        labels = bundle.labels.values
        if len(labels) != ref_samples:
            out.append(
                Violation(None, None, f"label count mismatch ({len(labels)} vs {ref_samples})")
            )
        bad = np.where((labels < 0) | (labels >= max(n_classes, 1)))[0]
        for row in bad:
            out.append(Violation(None, int(row), f"label {labels[row]} outside [0, {n_classes})"))

    return ValidationResult(tuple(out))


def _combo_key(universe: Sequence[str], combo: Iterable[str]) -> frozenset[str]:
    key = frozenset(combo)
    if not key:
        raise ValueError("modality combination must be nonempty")
    unknown = key.difference(universe)
    if unknown:
        raise KeyError(f"unknown modalities in combination: {sorted(unknown)}")
    return key


def all_combinations(universe: Sequence[str]) -> list[tuple[str, ...]]:
    """All nonempty modality subsets, ordered by size then universe order."""
    names = tuple(universe)
    out: list[tuple[str, ...]] = []
    for size in range(1, len(names) + 1):
        out.extend(itertools.combinations(names, size))
    return out


@dataclass(frozen=True, eq=False)
class AccuracyTable:
    """Mean-per-class accuracy for every (modality combination, strategy).

    Values are stored as fractions in [0, 1]; :meth:`percent` provides the
    percentage view used in reports. The averaged view is always present;
    per-strategy entries exist only for tables produced by a sweep (the
    bundled benchmark fixture publishes averages only).
    """

    modalities: tuple[str, ...]
    strategies: tuple[str, ...]
    per_strategy: Mapping[tuple[frozenset[str], str], float]
    averaged: Mapping[frozenset[str], float]
    note: str = ""

    def __post_init__(self):
        universe = tuple(self.modalities)
        if not universe:
            raise ValueError("accuracy table needs at least one modality")
        if len(set(universe)) != len(universe):
            raise ValueError("modality names must be distinct")
        expected = {frozenset(c) for c in all_combinations(universe)}
        if set(self.averaged) != expected:
            missing = sorted("+".join(sorted(c)) for c in expected - set(self.averaged))
            surplus = sorted("+".join(sorted(c)) for c in set(self.averaged) - expected)
            raise ValueError(
                f"incomplete accuracy table: missing={missing[:5]} unexpected={surplus[:5]}"
            )
        for combo, value in self.averaged.items():
            if not (0.0 <= value <= 1.0):
                raise ValueError(f"accuracy {value} for {sorted(combo)} outside [0, 1]")
        strategies = tuple(self.strategies)
        if strategies:
            want = {(c, s) for c in expected for s in strategies}
            if set(self.per_strategy) != want:
                raise ValueError("per-strategy entries do not cover combinations x strategies")
            for (combo, _), value in self.per_strategy.items():
                if not (0.0 <= value <= 1.0):
                    raise ValueError(f"accuracy {value} for {sorted(combo)} outside [0, 1]")
            for name in universe:
                single = frozenset((name,))
                vals = {self.per_strategy[(single, s)] for s in strategies}
                if len(vals) != 1:
                    raise ValueError(
                        f"singleton {name} differs across strategies: {sorted(vals)}"
                    )
        elif self.per_strategy:
            raise ValueError("per-strategy entries given without strategy list")
        object.__setattr__(self, "modalities", universe)
        object.__setattr__(self, "strategies", strategies)
        object.__setattr__(self, "per_strategy", dict(self.per_strategy))
        object.__setattr__(self, "averaged", dict(self.averaged))

    @classmethod
    def from_averaged(cls, modalities, averaged, note: str = "") -> "AccuracyTable":
        universe = tuple(modalities)
        mapped = {_combo_key(universe, c): float(v) for c, v in averaged.items()}
        return cls(universe, (), {}, mapped, note)

    @classmethod
    def from_per_strategy(cls, modalities, strategies, per_strategy, note: str = "") -> "AccuracyTable":
        universe = tuple(modalities)
        strategies = tuple(strategies)
        mapped = {
            (_combo_key(universe, c), str(s)): float(v)
            for (c, s), v in per_strategy.items()
        }
        averaged = {}
        for combo in all_combinations(universe):
            key = frozenset(combo)
            try:
                vals = [mapped[(key, s)] for s in strategies]
            except KeyError:
                continue  # leave the completeness check to __post_init__
            averaged[key] = float(np.mean(vals))
        return cls(universe, strategies, mapped, averaged, note)

    @property
    def has_per_strategy(self) -> bool:
        return bool(self.strategies)

    def combinations(self) -> list[tuple[str, ...]]:
        return all_combinations(self.modalities)

    def value(self, combo, strategy: str | None = None) -> float:
        """Accuracy fraction for a combination; strategy=None reads the average."""
        key = _combo_key(self.modalities, combo)
        if strategy is None:
            return self.averaged[key]
        if not self.strategies:
            raise ValueError(
                "per-strategy view unavailable for this table"
                + (f" ({self.note})" if self.note else "")
            )
        if strategy not in self.strategies:
            raise KeyError(f"unknown strategy {strategy!r}")
        return self.per_strategy[(key, strategy)]

    def percent(self, combo, strategy: str | None = None) -> float:
        return 100.0 * self.value(combo, strategy)

    def to_dict(self) -> dict:
        entries = []
        for combo in self.combinations():
            key = frozenset(combo)
            row = {"combination": list(combo), "averaged": self.averaged[key]}
            if self.strategies:
                row["strategies"] = {s: self.per_strategy[(key, s)] for s in self.strategies}
            entries.append(row)
        out = {
            "modalities": list(self.modalities),
            "strategies": list(self.strategies),
            "entries": entries,
        }
        if self.note:
            out["note"] = self.note
        return out

    @classmethod
    def from_dict(cls, payload: Mapping) -> "AccuracyTable":
        modalities = tuple(payload["modalities"])
        strategies = tuple(payload.get("strategies", ()))
        averaged = {}
        per_strategy = {}
        for row in payload["entries"]:
            combo = tuple(row["combination"])
            averaged[combo] = float(row["averaged"])
            for s, v in row.get("strategies", {}).items():
                per_strategy[(combo, s)] = float(v)
        if strategies:
            return cls.from_per_strategy(modalities, strategies, per_strategy, payload.get("note", ""))
        return cls.from_averaged(modalities, averaged, payload.get("note", ""))
