"""Threshold computation and consensus selection of modalities or modality pairs."""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Iterable

import numpy as np

from .core import Bundle
from .metrics import (
    AggregatedMetrics,
    PairMetricMatrix,
    aggregated_from_matrices,
    correlation_matrix,
    mmd_matrix,
)

CONSENSUS_MODES = ("or", "and")
SELECTION_MODES = ("aggregated", "pairs")


def winsorized_mean(values: Iterable[float], lam: float = 0.2, interpolate: bool = False) -> float:
    """Robust location estimate used for selection thresholds.

    Sorts the values and replaces the ``floor(lam * n)`` smallest and largest
    ones with the nearest retained order statistics before taking the mean.
    When nothing is replaced this is the plain mean; ``lam`` may range from 0
    (plain mean) to 0.5 (median for odd counts).

    With ``interpolate=True`` the estimate is instead assembled as
    ``lam * p_lam + (1 - 2 lam) * trimmed_mean + lam * p_(1-lam)`` using
    linearly interpolated percentiles, an alternative convention kept for
    comparison runs.
    """
    a = np.sort(np.asarray(list(values), dtype=np.float64))
    n = a.size
    if n == 0:
        raise ValueError("winsorized mean of an empty collection")
    if not (0.0 <= lam <= 0.5):
        raise ValueError("trust parameter must lie in [0, 0.5]")
    if not np.all(np.isfinite(a)):
        raise ValueError("winsorized mean needs finite values")
    cut = int(math.floor(lam * n))
    if interpolate:
        low = float(np.percentile(a, 100.0 * lam))
        high = float(np.percentile(a, 100.0 * (1.0 - lam)))
        core = a[cut : n - cut] if cut else a
        result = float(lam * low + (1.0 - 2.0 * lam) * core.mean() + lam * high)
    elif cut == 0:
        result = float(a.mean())
    else:
        w = a.copy()
        w[:cut] = a[cut]
        w[n - cut :] = a[n - cut - 1]
        result = float(w.mean())
    # Clamp away summation rounding so n equal values yield exactly that
    # value; thresholds then compare inclusively against their own inputs.
    return float(min(max(result, a[0]), a[-1]))


@dataclass(frozen=True)
class ThresholdConfig:
    """Configuration for threshold computation and consensus selection.

    ``delta_rho`` / ``delta_mmd`` inject explicit thresholds instead of
    computing them, so published cutoffs can be reproduced directly.
    """

    lam: float = 0.2
    consensus: str = "or"
    mode: str = "aggregated"
    delta_rho: float | None = None
    delta_mmd: float | None = None
    exclude_self: bool = True
    interpolate: bool = False

    def __post_init__(self):
        if not (0.0 <= self.lam <= 0.5):
            raise ValueError("trust parameter must lie in [0, 0.5]")
        if self.consensus not in CONSENSUS_MODES:
            raise ValueError(f"consensus must be one of {CONSENSUS_MODES}")
        if self.mode not in SELECTION_MODES:
            raise ValueError(f"mode must be one of {SELECTION_MODES}")
        for name in ("delta_rho", "delta_mmd"):
            value = getattr(self, name)
            if value is not None and not math.isfinite(value):
                raise ValueError(f"{name} override must be finite")


@dataclass(frozen=True)
class Threshold:
    value: float | None
    source: str  # computed | override | unavailable

    def to_dict(self) -> dict:
        return {"value": self.value, "source": self.source}


@dataclass(frozen=True)
class ModalityDecision:
    name: str
    rho: float
    mmd: float | None
    rho_pass: bool
    mmd_pass: bool | None
    basis: str  # both | correlation-only
    selected: bool
    reasons: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "correlation": self.rho,
            "discrepancy": self.mmd,
            "correlation_pass": self.rho_pass,
            "discrepancy_pass": self.mmd_pass,
            "basis": self.basis,
            "selected": self.selected,
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class PairDecision:
    pair: tuple[str, str]
    rho: float | None
    mmd: float | None
    rho_pass: bool | None
    mmd_pass: bool | None
    basis: str  # both | correlation-only | discrepancy-only | none
    selected: bool
    reasons: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "pair": list(self.pair),
            "correlation": self.rho,
            "discrepancy": self.mmd,
            "correlation_pass": self.rho_pass,
            "discrepancy_pass": self.mmd_pass,
            "basis": self.basis,
            "selected": self.selected,
            "reasons": list(self.reasons),
        }


@dataclass(frozen=True)
class SelectionReport:
    """Full record of one selection run: thresholds, decisions, intermediates."""

    mode: str
    consensus: str
    lam: float
    exclude_self: bool
    interpolate: bool
    rho_threshold: Threshold
    mmd_threshold: Threshold
    decisions: tuple[ModalityDecision, ...] = ()
    pair_decisions: tuple[PairDecision, ...] = ()
    notes: tuple[str, ...] = ()
    correlations: PairMetricMatrix | None = None
    discrepancies: PairMetricMatrix | None = None
    aggregates: AggregatedMetrics | None = None

    @property
    def selected(self) -> tuple[str, ...]:
        return tuple(d.name for d in self.decisions if d.selected)

    @property
    def excluded(self) -> tuple[ModalityDecision, ...]:
        return tuple(d for d in self.decisions if not d.selected)

    @property
    def selected_pairs(self) -> tuple[tuple[str, str], ...]:
        return tuple(d.pair for d in self.pair_decisions if d.selected)

    @property
    def excluded_pairs(self) -> tuple[PairDecision, ...]:
        return tuple(d for d in self.pair_decisions if not d.selected)

    def to_dict(self) -> dict:
        from . import __version__

        out = {
            "schema": 1,
            "tool": {"name": "modselect", "version": __version__},
            "config": {
                "mode": self.mode,
                "consensus": self.consensus,
                "lambda": self.lam,
                "exclude_self_pairs": self.exclude_self,
                "interpolate_percentiles": self.interpolate,
                "delta_rho_override": self.rho_threshold.value
                if self.rho_threshold.source == "override"
                else None,
                "delta_mmd_override": self.mmd_threshold.value
                if self.mmd_threshold.source == "override"
                else None,
            },
            "thresholds": {
                "correlation": self.rho_threshold.to_dict(),
                "discrepancy": self.mmd_threshold.to_dict(),
            },
        }
        if self.mode == "aggregated":
            out["modalities"] = [d.to_dict() for d in self.decisions]
            out["selected"] = list(self.selected)
            out["excluded"] = [
                {"name": d.name, "reasons": list(d.reasons)} for d in self.excluded
            ]
        else:
            out["pairs"] = [d.to_dict() for d in self.pair_decisions]
            out["selected_pairs"] = [list(p) for p in self.selected_pairs]
            out["excluded_pairs"] = [
                {"pair": list(d.pair), "reasons": list(d.reasons)}
                for d in self.excluded_pairs
            ]
        out["notes"] = list(self.notes)
        intermediate = {}
        if self.correlations is not None:
            intermediate["pair_correlations"] = self.correlations.to_dict()
        if self.discrepancies is not None:
            intermediate["pair_discrepancies"] = self.discrepancies.to_dict()
        if self.aggregates is not None:
            intermediate["aggregated"] = self.aggregates.to_dict()
        if intermediate:
            out["intermediate"] = intermediate
        return out


def _rho_threshold(values: list[float], config: ThresholdConfig) -> Threshold:
    if config.delta_rho is not None:
        return Threshold(float(config.delta_rho), "override")
    return Threshold(winsorized_mean(values, config.lam, config.interpolate), "computed")


def _mmd_threshold(values: list[float], config: ThresholdConfig) -> Threshold:
    if config.delta_mmd is not None:
        return Threshold(float(config.delta_mmd), "override")
    if not values:
        return Threshold(None, "unavailable")
    return Threshold(winsorized_mean(values, config.lam, config.interpolate), "computed")


def _combine(rho_pass: bool, mmd_pass: bool | None, consensus: str) -> bool:
    if mmd_pass is None:
        return rho_pass
    if consensus == "or":
        return rho_pass or mmd_pass
    return rho_pass and mmd_pass


def aggregated_select(
    metrics: AggregatedMetrics, config: ThresholdConfig = ThresholdConfig()
) -> SelectionReport:
    """Select individual modalities by thresholding their aggregated metrics.

    A modality is kept when its aggregated correlation reaches the
    correlation threshold or (under the default ``or`` consensus) its
    aggregated discrepancy stays at or below the discrepancy threshold;
    ``and`` requires both. Modalities without comparable embeddings are
    judged on correlation alone. Comparisons are inclusive.
    """
    names = metrics.names
    if len(names) < 2:
        raise ValueError("selection needs alternatives")
    rho_thr = _rho_threshold([metrics.rho[m] for m in names], config)
    mmd_vals = [metrics.mmd[m] for m in names if metrics.mmd[m] is not None]
    mmd_thr = _mmd_threshold(mmd_vals, config)

    decisions = []
    notes = []
    for name in names:
        rho = metrics.rho[name]
        mmd = metrics.mmd[name]
        rho_pass = rho >= rho_thr.value
        if mmd is None or mmd_thr.value is None:
            mmd_pass = None
            basis = "correlation-only"
        else:
            mmd_pass = mmd <= mmd_thr.value
            basis = "both"
        selected = _combine(rho_pass, mmd_pass, config.consensus)
        reasons = []
        if not selected:
            if not rho_pass:
                reasons.append(
                    f"correlation {rho:.6g} below threshold {rho_thr.value:.6g}"
                )
            if mmd_pass is False:
                reasons.append(
                    f"embedding discrepancy {mmd:.6g} above threshold {mmd_thr.value:.6g}"
                )
        if basis == "correlation-only":
            notes.append(
                f"modality {name!r} judged on correlation alone (no comparable embeddings)"
            )
        decisions.append(
            ModalityDecision(
                name, rho, mmd, rho_pass, mmd_pass, basis, selected, tuple(reasons)
            )
        )
    return SelectionReport(
        mode="aggregated",
        consensus=config.consensus,
        lam=config.lam,
        exclude_self=config.exclude_self,
        interpolate=config.interpolate,
        rho_threshold=rho_thr,
        mmd_threshold=mmd_thr,
        decisions=tuple(decisions),
        notes=tuple(notes),
        aggregates=metrics,
    )


def pairs_select(
    correlations: PairMetricMatrix,
    discrepancies: PairMetricMatrix | None = None,
    config: ThresholdConfig = ThresholdConfig(),
) -> SelectionReport:
    """Select modality pairs by thresholding the raw pair metrics.

    Thresholds are computed over the valid off-diagonal pair values (each
    unordered pair counted once). Pairs lacking a valid discrepancy are
    judged on correlation alone, and vice versa.
    """
    names = correlations.names
    if len(names) < 2:
        raise ValueError("selection needs alternatives")
    if discrepancies is not None and discrepancies.names != names:
        raise ValueError("pair matrices cover different modalities")

    pair_list = correlations.pairs()
    rho_vals = [
        correlations.value(m, n) for m, n in pair_list if correlations.is_valid(m, n)
    ]
    if not rho_vals:
        raise ValueError("degenerate scores")
    rho_thr = _rho_threshold(rho_vals, config)
    mmd_vals = []
    if discrepancies is not None:
        mmd_vals = [
            discrepancies.value(m, n)
            for m, n in pair_list
            if discrepancies.is_valid(m, n)
        ]
    mmd_thr = _mmd_threshold(mmd_vals, config)

    decisions = []
    for m, n in pair_list:
        rho = correlations.value(m, n) if correlations.is_valid(m, n) else None
        mmd = None
        if discrepancies is not None and discrepancies.is_valid(m, n):
            mmd = discrepancies.value(m, n)
        rho_pass = None if rho is None else rho >= rho_thr.value
        mmd_pass = None
        if mmd is not None and mmd_thr.value is not None:
            mmd_pass = mmd <= mmd_thr.value
        if rho_pass is None and mmd_pass is None:
            basis, selected = "none", False
            reasons = ["no valid metrics for this pair"]
        elif rho_pass is None:
            basis, selected = "discrepancy-only", bool(mmd_pass)
            reasons = (
                []
                if selected
                else [f"embedding discrepancy {mmd:.6g} above threshold {mmd_thr.value:.6g}"]
            )
        elif mmd_pass is None:
            basis, selected = "correlation-only", rho_pass
            reasons = (
                []
                if selected
                else [f"correlation {rho:.6g} below threshold {rho_thr.value:.6g}"]
            )
        else:
            basis = "both"
            selected = _combine(rho_pass, mmd_pass, config.consensus)
            reasons = []
            if not selected:
                if not rho_pass:
                    reasons.append(
                        f"correlation {rho:.6g} below threshold {rho_thr.value:.6g}"
                    )
                if not mmd_pass:
                    reasons.append(
                        f"embedding discrepancy {mmd:.6g} above threshold {mmd_thr.value:.6g}"
                    )
        decisions.append(
            PairDecision((m, n), rho, mmd, rho_pass, mmd_pass, basis, selected, tuple(reasons))
        )

    notes = []
    for name in names:
        has_mmd_pair = discrepancies is not None and any(
            discrepancies.is_valid(name, other) for other in names if other != name
        )
        if not has_mmd_pair:
            notes.append(
                f"modality {name!r} judged on correlation alone (no comparable embeddings)"
            )
    return SelectionReport(
        mode="pairs",
        consensus=config.consensus,
        lam=config.lam,
        exclude_self=config.exclude_self,
        interpolate=config.interpolate,
        rho_threshold=rho_thr,
        mmd_threshold=mmd_thr,
        pair_decisions=tuple(decisions),
        notes=tuple(notes),
    )


def run_modselect(bundle: Bundle, config: ThresholdConfig = ThresholdConfig()) -> SelectionReport:
    """Run the full unsupervised pipeline on a bundle.

    Ground-truth labels are never consulted: the pipeline operates on a
    label-stripped view of the bundle. The returned report records the pair
    matrices, aggregated values, thresholds and every selection decision.
    """
    work = bundle.without_labels()
    if len(work.modalities) < 2:
        raise ValueError("selection needs alternatives")
    correlations = correlation_matrix(work)
    discrepancies = mmd_matrix(work)
    aggregates = None
    if config.mode == "aggregated":
        aggregates = aggregated_from_matrices(
            correlations, discrepancies, config.exclude_self
        )
        report = aggregated_select(aggregates, config)
    else:
        report = pairs_select(correlations, discrepancies, config)
        try:
            aggregates = aggregated_from_matrices(
                correlations, discrepancies, config.exclude_self
            )
        except ValueError:
            aggregates = None
    return replace(
        report,
        correlations=correlations,
        discrepancies=discrepancies,
        aggregates=aggregates,
    )
