"""Supervised contribution quantification: the with-without metric."""

from __future__ import annotations

import itertools
from dataclasses import dataclass

from .core import AccuracyTable

# 2^(M-1) evaluations per modality grow fast; callers must opt in above this.
MAX_DEFAULT_UNIVERSE = 16


def contribution(
    table: AccuracyTable,
    modality: str,
    strategy: str | None = None,
    allow_large: bool = False,
) -> float:
    """Average accuracy change from adding ``modality`` to a fusion ensemble.

    Computed as the mean, over every nonempty combination of the remaining
    modalities, of the accuracy with the modality minus the accuracy without
    it. The result is in the table's fractional scale; multiply by 100 for
    percentage points.
    """
    universe = table.modalities
    if modality not in universe:
        raise KeyError(f"unknown modality {modality!r}")
    others = tuple(n for n in universe if n != modality)
    if not others:
        raise ValueError("no combinations without m")
    if len(universe) > MAX_DEFAULT_UNIVERSE and not allow_large:
        raise ValueError(
            f"universe of {len(universe)} modalities needs 2^{len(universe) - 1} - 1 "
            "combination evaluations; pass allow_large=True to proceed"
        )
    diffs = []
    for size in range(1, len(others) + 1):
        for combo in itertools.combinations(others, size):
            with_m = table.value(combo + (modality,), strategy)
            without_m = table.value(combo, strategy)
            diffs.append(with_m - without_m)
    return sum(diffs) / len(diffs)


def positive_modalities(table: AccuracyTable, allow_large: bool = False) -> frozenset[str]:
    """Modalities whose averaged contribution is strictly positive."""
    return frozenset(
        m for m in table.modalities if contribution(table, m, None, allow_large) > 0.0
    )


@dataclass(frozen=True)
class ContributionReport:
    """Per-modality contributions in percentage points, plus the positive set."""

    modalities: tuple[str, ...]
    averaged: dict[str, float]
    per_strategy: dict[str, dict[str, float]]
    positive: frozenset[str]

    def to_dict(self) -> dict:
        return {
            "modalities": list(self.modalities),
            "contribution_percent": {m: self.averaged[m] for m in self.modalities},
            "per_strategy_percent": {
                s: {m: vals[m] for m in self.modalities}
                for s, vals in self.per_strategy.items()
            },
            "positive_modalities": sorted(self.positive),
        }


def contribution_report(table: AccuracyTable, allow_large: bool = False) -> ContributionReport:
    """Contributions for every modality, averaged and per strategy when available."""
    averaged = {
        m: 100.0 * contribution(table, m, None, allow_large) for m in table.modalities
    }
    per_strategy = {
        s: {m: 100.0 * contribution(table, m, s, allow_large) for m in table.modalities}
        for s in table.strategies
    }
    positive = frozenset(m for m, f in averaged.items() if f > 0.0)
    return ContributionReport(table.modalities, averaged, per_strategy, positive)
