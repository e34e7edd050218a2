"""Bundled benchmark accuracy fixture.

Strategy-averaged mean-per-class accuracies (percent) for every combination
of five modalities, measured on one synthetic and two real test sets by a
published cross-domain action recognition evaluation. Only the average over
the six fusion strategies was published, so the fixture carries no
per-strategy view. Values are stored exactly as printed (two decimals).
"""

from __future__ import annotations

from .core import AccuracyTable

FIXTURE_MODALITIES = ("H", "L", "OF", "RGB", "YOLO")
FIXTURE_DATASETS = ("sims4action", "toyota", "etri")

# combination -> (sims4action, toyota, etri), mean-per-class accuracy in percent
_ROWS: dict[tuple[str, ...], tuple[float, float, float]] = {
    ("H",): (71.38, 20.23, 12.12),
    ("L",): (75.09, 22.00, 12.88),
    ("OF",): (44.50, 21.34, 9.28),
    ("RGB",): (61.79, 13.74, 9.37),
    ("YOLO",): (50.54, 26.08, 38.25),
    ("H", "L"): (91.48, 23.44, 16.95),
    ("H", "OF"): (89.86, 25.97, 15.10),
    ("H", "RGB"): (94.44, 21.38, 13.91),
    ("L", "OF"): (90.84, 25.60, 15.90),
    ("L", "RGB"): (94.42, 20.58, 15.46),
    ("OF", "RGB"): (86.15, 18.50, 12.85),
    ("H", "YOLO"): (74.86, 25.51, 20.55),
    ("L", "YOLO"): (80.25, 24.77, 19.91),
    ("OF", "YOLO"): (62.21, 27.56, 20.34),
    ("RGB", "YOLO"): (76.23, 17.29, 19.41),
    ("H", "L", "OF"): (94.03, 26.70, 17.26),
    ("H", "L", "RGB"): (95.72, 23.25, 15.78),
    ("H", "OF", "RGB"): (95.41, 23.73, 13.79),
    ("L", "OF", "RGB"): (95.61, 24.09, 15.49),
    ("H", "L", "YOLO"): (86.57, 25.80, 20.46),
    ("H", "OF", "YOLO"): (82.97, 29.48, 19.91),
    ("H", "RGB", "YOLO"): (88.79, 23.27, 17.77),
    ("L", "OF", "YOLO"): (86.31, 28.51, 20.68),
    ("L", "RGB", "YOLO"): (90.59, 23.29, 19.09),
    ("OF", "RGB", "YOLO"): (82.37, 21.15, 16.92),
    ("H", "L", "OF", "RGB"): (96.95, 26.00, 16.22),
    ("H", "L", "OF", "YOLO"): (90.05, 28.98, 20.27),
    ("H", "L", "RGB", "YOLO"): (92.88, 25.36, 18.55),
    ("H", "OF", "RGB", "YOLO"): (91.14, 26.10, 17.20),
    ("L", "OF", "RGB", "YOLO"): (92.56, 26.12, 18.56),
    ("H", "L", "OF", "RGB", "YOLO"): (94.27, 27.52, 18.53),
}


def load_fixture(dataset: str) -> AccuracyTable:
    """Return the bundled accuracy table for one of the three test sets.

    The returned table is strategy-averaged only; requesting a per-strategy
    value raises, with the table's note explaining why.
    """
    try:
        column = FIXTURE_DATASETS.index(dataset)
    except ValueError:
        raise KeyError(
            f"unknown fixture {dataset!r}; available: {', '.join(FIXTURE_DATASETS)}"
        ) from None
    averaged = {combo: row[column] / 100.0 for combo, row in _ROWS.items()}
    return AccuracyTable.from_averaged(
        FIXTURE_MODALITIES,
        averaged,
        note=f"{dataset}: published strategy-averaged results; per-strategy values not published",
    )
