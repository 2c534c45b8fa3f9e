"""Volume-at-price CSV ingestion, smoothing and binning."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptySideError, InvalidArgumentError, ParseError
from .marginals import EmpiricalHistogram

HEADER = ("price", "volume", "side")
SIDES = ("buy", "sell")


@dataclass(frozen=True)
class PriceLevel:
    price: float
    volume: float
    side: str

    def __post_init__(self):
        if not np.isfinite(self.price):
            raise InvalidArgumentError("price must be finite")
        if not np.isfinite(self.volume) or self.volume < 0.0:
            raise InvalidArgumentError("volume must be finite and nonnegative")
        if self.side not in SIDES:
            raise InvalidArgumentError(f"side must be one of {SIDES}, got {self.side!r}")


def load_csv(path) -> list[PriceLevel]:
    """Read price,volume,side records.

    The header row is mandatory. Raises ParseError with the 1-based line
    number on malformed rows, negative volume, or unknown side tokens.
    """
    records: list[PriceLevel] = []
    with open(path, "r", newline="", encoding="utf-8-sig") as handle:
        reader = csv.reader(handle)
        lineno = 0
        for row in reader:
            lineno = reader.line_num
            if not row or all(not cell.strip() for cell in row):
                continue
            cells = [cell.strip() for cell in row]
            if lineno == 1:
                if tuple(c.lower() for c in cells) != HEADER:
                    raise ParseError(f"expected header {','.join(HEADER)}", lineno)
                continue
            if len(cells) != 3:
                raise ParseError(f"expected 3 fields, got {len(cells)}", lineno)
            try:
                price = float(cells[0])
                volume = float(cells[1])
            except ValueError:
                raise ParseError(f"non-numeric price or volume: {row!r}", lineno) from None
            if not np.isfinite(price):
                raise ParseError("price is not finite", lineno)
            if not np.isfinite(volume) or volume < 0.0:
                raise ParseError("volume must be finite and nonnegative", lineno)
            side = cells[2].lower()
            if side not in SIDES:
                raise ParseError(f"unknown side {cells[2]!r}", lineno)
            records.append(PriceLevel(price=price, volume=volume, side=side))
        if lineno == 0:
            raise ParseError("missing header row", 1)
    return records


def write_csv(records: Iterable[PriceLevel], path) -> None:
    """Write records in the load_csv format; floats round-trip exactly."""
    path = Path(path)
    lines = [",".join(HEADER)]
    for rec in records:
        lines.append(f"{rec.price!r},{rec.volume!r},{rec.side}")
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def ma_smooth(masses: Sequence[float], order: int) -> np.ndarray:
    """Trailing moving average over bin masses.

    out[k] is the mean of the last ``order`` masses ending at k, fewer
    at the left edge. order=1 returns the input unchanged.
    """
    if not isinstance(order, (int, np.integer)) or isinstance(order, bool):
        raise InvalidArgumentError("order must be an integer")
    if order < 1:
        raise InvalidArgumentError("order must be at least 1")
    arr = np.asarray(masses, dtype=float)
    if arr.ndim != 1 or arr.size == 0:
        raise InvalidArgumentError("masses must be a nonempty 1-D sequence")
    if not np.all(np.isfinite(arr)):
        raise InvalidArgumentError("masses must be finite")
    out = np.empty_like(arr)
    for k in range(arr.size):
        lo = max(0, k - order + 1)
        out[k] = arr[lo : k + 1].mean()
    return out


def bin_levels(records: Iterable[PriceLevel], n_bins: int, side: str) -> EmpiricalHistogram:
    """Aggregate one side's volumes into equal-width price bins.

    Bins span [min price, max price] of the selected side; a degenerate
    single-price span is widened to one unit around the price.
    """
    if side not in SIDES:
        raise InvalidArgumentError(f"side must be one of {SIDES}, got {side!r}")
    if not isinstance(n_bins, (int, np.integer)) or isinstance(n_bins, bool):
        raise InvalidArgumentError("n_bins must be an integer")
    if n_bins < 3:
        raise InvalidArgumentError("n_bins must be at least 3")
    prices = []
    volumes = []
    for rec in records:
        if rec.side == side:
            prices.append(rec.price)
            volumes.append(rec.volume)
    if not prices:
        raise EmptySideError(f"no {side} records")
    prices = np.asarray(prices, dtype=float)
    volumes = np.asarray(volumes, dtype=float)
    lo = float(prices.min())
    hi = float(prices.max())
    if hi <= lo:
        lo -= 0.5
        hi += 0.5
    span = hi - lo
    idx = np.clip(np.floor((prices - lo) / span * n_bins).astype(int), 0, n_bins - 1)
    masses = np.zeros(n_bins)
    np.add.at(masses, idx, volumes)
    width = span / n_bins
    centers = lo + (np.arange(n_bins) + 0.5) * width
    return EmpiricalHistogram(centers=centers, masses=masses)
