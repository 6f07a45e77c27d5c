"""Monthly bank balance sheets: ingestion, term buckets and CET1 capital.

A bank is reduced to three asset buckets (short, medium and long term) and
its CET1 capital. Capital is usually only observed a few times a year, so the
unweighted ratio CET1 / total assets is interpolated (or averaged) onto the
monthly grid and turned back into an amount with that month's total assets.
"""
from __future__ import annotations

import csv
import json
import math
import re
from collections import defaultdict
from dataclasses import dataclass, field, replace
from functools import cached_property
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

BUCKETS = ("short", "medium", "long")
SPECIAL_RULES = (
    "gov_stock_le3y",
    "derivative",
    "impairment_loans",
    "impairment_investments",
    "liability_derivative_short",
    "liability_derivative_medium",
    "liability_derivative_long",
)
MIN_CET1_OBSERVATIONS = 3

BALANCE_SHEET_HEADER = ["month", "bank_id", "short_assets", "medium_assets", "long_assets", "cet1_capital"]
CET1_HEADER = ["bank_id", "month", "cet1_ratio"]
LINE_ITEM_HEADER = ["month", "bank_id", "line_item_code", "amount"]

_MONTH_RE = re.compile(r"^(\d{4})-(0[1-9]|1[0-2])$")


class DataError(ValueError):
    """Input data violates a balance-sheet rule."""


class ClassificationError(DataError):
    """A line item code has no entry in the term mapping."""


class ExclusionError(DataError):
    """A bank has too few CET1 observations to be estimated."""


def month_ordinal(month: str) -> int:
    m = _MONTH_RE.match(month)
    if m is None:
        raise DataError(f"bad month tag {month!r}, expected YYYY-MM")
    return int(m.group(1)) * 12 + int(m.group(2)) - 1


def month_tag(ordinal: int) -> str:
    year, month0 = divmod(ordinal, 12)
    return f"{year:04d}-{month0 + 1:02d}"


def month_range(first: str, last: str) -> list[str]:
    """Inclusive list of month tags from ``first`` to ``last``."""
    a, b = month_ordinal(first), month_ordinal(last)
    if b < a:
        raise DataError(f"empty month range {first}..{last}")
    return [month_tag(k) for k in range(a, b + 1)]


@dataclass(frozen=True)
class BankBalanceSheet:
    bank_id: str
    month: str
    short_assets: float
    medium_assets: float
    long_assets: float
    capital: float | None = None

    def __post_init__(self):
        month_ordinal(self.month)
        for name in ("short_assets", "medium_assets", "long_assets"):
            v = float(getattr(self, name))
            object.__setattr__(self, name, v)
            if not math.isfinite(v) or v < 0:
                raise DataError(f"{self.bank_id} {self.month}: {name} must be finite and >= 0, got {v}")
        if self.capital is not None:
            object.__setattr__(self, "capital", float(self.capital))
        if self.capital is not None and not math.isfinite(self.capital):
            raise DataError(f"{self.bank_id} {self.month}: capital must be finite")

    @property
    def buckets(self) -> tuple[float, float, float]:
        return (self.short_assets, self.medium_assets, self.long_assets)

    @property
    def total_assets(self) -> float:
        return self.short_assets + self.medium_assets + self.long_assets

    def with_capital(self, capital: float) -> "BankBalanceSheet":
        return replace(self, capital=capital)


@dataclass(frozen=True)
class RawLineItems:
    bank_id: str
    month: str
    entries: tuple[tuple[str, float], ...]
    # (short, medium, long) shares of liability-side derivatives
    liability_derivative_split: tuple[float, float, float] | None = None

    def __post_init__(self):
        for code, amount in self.entries:
            if not math.isfinite(amount):
                raise DataError(f"{self.bank_id} {self.month}: non-finite amount for {code}")
        split = self.liability_derivative_split
        if split is not None:
            if len(split) != 3 or any(x < 0 for x in split) or abs(sum(split) - 1.0) > 1e-9:
                raise DataError(f"{self.bank_id} {self.month}: derivative split {split} must be 3 nonnegative shares summing to 1")


@dataclass(frozen=True)
class Cet1Series:
    bank_id: str
    observations: tuple[tuple[str, float], ...]

    def __post_init__(self):
        ords = [month_ordinal(m) for m, _ in self.observations]
        if any(b <= a for a, b in zip(ords, ords[1:])):
            raise DataError(f"{self.bank_id}: CET1 observation months must be strictly increasing")
        for m, r in self.observations:
            if not (0.0 < r <= 1.0):
                raise DataError(f"{self.bank_id} {m}: CET1 ratio {r} outside (0, 1]")

    @classmethod
    def from_mapping(cls, bank_id: str, ratios: Mapping[str, float]) -> "Cet1Series":
        obs = sorted(ratios.items(), key=lambda kv: month_ordinal(kv[0]))
        return cls(bank_id, tuple(obs))

    def __len__(self):
        return len(self.observations)


# -- term categorisation ----------------------------------------------------

def load_mapping(path: str | Path | None = None) -> dict[str, str]:
    """Load a line-item → bucket/rule table; defaults to the bundled BA900 table."""
    if path is None:
        text = resources.files("contagion").joinpath("data/ba900_term_mapping.json").read_text()
        source = "bundled mapping"
    else:
        text = Path(path).read_text()
        source = str(path)
    try:
        mapping = json.loads(text)
    except json.JSONDecodeError as exc:
        raise DataError(f"{source}:{exc.lineno}: {exc.msg}") from exc
    if not isinstance(mapping, dict):
        raise DataError(f"{source}: mapping must be a JSON object")
    allowed = set(BUCKETS) | set(SPECIAL_RULES)
    for code, target in mapping.items():
        if target not in allowed:
            raise DataError(f"{source}: {code!r} maps to unknown bucket/rule {target!r}")
    return mapping


def categorize_line_items(
    raw: RawLineItems,
    mapping: Mapping[str, str],
    clamp_negative: bool = False,
) -> tuple[float, float, float]:
    """Sum asset line items into (short, medium, long) term buckets.

    Government stock of up to three years goes one third to each bucket.
    Asset-side derivatives follow the liability-side term split, taken from
    ``raw.liability_derivative_split`` or from ``liability_derivative_*``
    entries, and fall back to equal thirds when there are none. Loan
    impairments come off the medium bucket and investment impairments off
    the long bucket; both are given as positive amounts.
    """
    totals = dict.fromkeys(BUCKETS, 0.0)
    derivatives = 0.0
    gov_stock = 0.0
    impair_loans = 0.0
    impair_inv = 0.0
    liability_derivs = [0.0, 0.0, 0.0]

    for code, amount in raw.entries:
        rule = mapping.get(code)
        if rule is None:
            raise ClassificationError(f"{raw.bank_id} {raw.month}: line item {code!r} not in term mapping")
        if rule in totals:
            totals[rule] += amount
        elif rule == "gov_stock_le3y":
            gov_stock += amount
        elif rule == "derivative":
            derivatives += amount
        elif rule in ("impairment_loans", "impairment_investments"):
            if amount < 0:
                raise DataError(f"{raw.bank_id} {raw.month}: impairment {code!r} must be a positive deduction")
            if rule == "impairment_loans":
                impair_loans += amount
            else:
                impair_inv += amount
        else:
            liability_derivs[BUCKETS.index(rule.rsplit("_", 1)[1])] += amount

    split = raw.liability_derivative_split
    if split is None:
        total_liab = sum(liability_derivs)
        if total_liab > 0:
            split = tuple(x / total_liab for x in liability_derivs)
        else:
            split = (1 / 3, 1 / 3, 1 / 3)

    for k, name in enumerate(BUCKETS):
        totals[name] += gov_stock / 3 + derivatives * split[k]
    totals["medium"] -= impair_loans
    totals["long"] -= impair_inv

    for name in BUCKETS:
        if totals[name] < 0:
            if not clamp_negative:
                raise DataError(f"{raw.bank_id} {raw.month}: {name}-term bucket negative ({totals[name]:.6g}) after deductions")
            totals[name] = 0.0
    return (totals["short"], totals["medium"], totals["long"])


# -- CET1 capital -----------------------------------------------------------

def compute_cet1_ratio(capital: float, total_assets: float) -> float:
    if not total_assets > 0:
        raise ValueError(f"total assets must be positive, got {total_assets}")
    if capital < 0:
        raise ValueError(f"capital must be nonnegative, got {capital}")
    return capital / total_assets


def estimate_cet1_series(observed: Cet1Series, all_months: Iterable[str]) -> dict[str, float]:
    """Fill a bank's CET1 ratio for every month in ``all_months``.

    Observed months are returned as is. A month between two observations is
    linearly interpolated from its neighbours, whatever the gap length; a
    month before the first or after the last observation gets the plain mean
    of all observations.
    """
    if len(observed) < MIN_CET1_OBSERVATIONS:
        raise ExclusionError(
            f"{observed.bank_id}: {len(observed)} CET1 observations, need at least {MIN_CET1_OBSERVATIONS}"
        )
    ords = np.array([month_ordinal(m) for m, _ in observed.observations])
    ratios = [r for _, r in observed.observations]
    known = dict(zip(ords.tolist(), ratios))
    mean = math.fsum(ratios) / len(ratios)

    out = {}
    for month in all_months:
        t = month_ordinal(month)
        if t in known:
            out[month] = known[t]
        elif t < ords[0] or t > ords[-1]:
            out[month] = mean
        else:
            hi = int(np.searchsorted(ords, t))
            t0, t1 = int(ords[hi - 1]), int(ords[hi])
            c0, c1 = ratios[hi - 1], ratios[hi]
            out[month] = c0 + (t - t0) * (c1 - c0) / (t1 - t0)
    return out


def cet1_observations(
    sheets: Iterable[BankBalanceSheet],
    ratios: Iterable[tuple[str, str, float]] = (),
) -> dict[str, Cet1Series]:
    """Merge published ratios with ratios implied by observed capital amounts.

    ``ratios`` holds (bank_id, month, ratio) triples. Where a month has both,
    the capital amount on the balance sheet wins.
    """
    merged: dict[str, dict[str, float]] = defaultdict(dict)
    for bank_id, month, ratio in ratios:
        merged[bank_id][month] = ratio
    for sh in sheets:
        if sh.capital is not None:
            merged[sh.bank_id][sh.month] = compute_cet1_ratio(sh.capital, sh.total_assets)
    return {b: Cet1Series.from_mapping(b, obs) for b, obs in merged.items()}


def estimate_capital(
    sheets: Sequence[BankBalanceSheet],
    ratios: Iterable[tuple[str, str, float]] = (),
) -> tuple[list[BankBalanceSheet], dict[str, int]]:
    """Give every sheet a capital amount, dropping banks with too few CET1 points.

    Returns the completed sheets and a map of excluded bank ids to their
    observation counts. Missing capital is rebuilt as estimated ratio times
    that month's total assets.
    """
    series = cet1_observations(sheets, ratios)
    by_bank: dict[str, list[BankBalanceSheet]] = defaultdict(list)
    for sh in sheets:
        by_bank[sh.bank_id].append(sh)

    filled, excluded = [], {}
    for bank_id, rows in by_bank.items():
        obs = series.get(bank_id, Cet1Series(bank_id, ()))
        if len(obs) < MIN_CET1_OBSERVATIONS:
            excluded[bank_id] = len(obs)
            continue
        est = estimate_cet1_series(obs, [r.month for r in rows])
        for r in rows:
            filled.append(r if r.capital is not None else r.with_capital(est[r.month] * r.total_assets))
    return filled, excluded


# -- system snapshot --------------------------------------------------------

@dataclass(frozen=True)
class SystemSnapshot:
    """The banks of one month, ordered by descending total assets (ties by id)."""

    month: str
    banks: tuple[BankBalanceSheet, ...] = field(repr=False)

    @property
    def n(self) -> int:
        return len(self.banks)

    @cached_property
    def bank_ids(self) -> list[str]:
        return [b.bank_id for b in self.banks]

    @cached_property
    def buckets(self) -> np.ndarray:
        return np.array([b.buckets for b in self.banks], dtype=float)

    @cached_property
    def assets(self) -> np.ndarray:
        B = self.buckets
        return B[:, 0] + B[:, 1] + B[:, 2]

    @cached_property
    def capital(self) -> np.ndarray:
        return np.array([b.capital for b in self.banks], dtype=float)

    def index_of(self, bank_id: str) -> int:
        try:
            return self.bank_ids.index(bank_id)
        except ValueError:
            raise KeyError(f"bank {bank_id!r} not in {self.month} snapshot") from None


def build_system_snapshot(sheets: Sequence[BankBalanceSheet]) -> SystemSnapshot:
    if len(sheets) < 2:
        raise DataError(f"need at least 2 banks for a network, got {len(sheets)}")
    months = {s.month for s in sheets}
    if len(months) != 1:
        raise DataError(f"sheets span several months: {sorted(months)}")
    seen = set()
    for s in sheets:
        if s.bank_id in seen:
            raise DataError(f"duplicate bank_id {s.bank_id!r} in {s.month}")
        seen.add(s.bank_id)
        if not s.total_assets > 0:
            raise DataError(f"{s.bank_id} {s.month}: total assets must be positive")
        if s.capital is None or not s.capital > 0:
            raise DataError(f"{s.bank_id} {s.month}: capital must be positive, got {s.capital}")
    ordered = sorted(sheets, key=lambda s: (-s.total_assets, s.bank_id))
    return SystemSnapshot(months.pop(), tuple(ordered))


def monthly_snapshots(
    sheets: Sequence[BankBalanceSheet],
    months: Iterable[str] | None = None,
) -> dict[str, SystemSnapshot]:
    """Group capital-complete sheets into one snapshot per month, in month order."""
    by_month: dict[str, list[BankBalanceSheet]] = defaultdict(list)
    for s in sheets:
        by_month[s.month].append(s)
    wanted = sorted(by_month, key=month_ordinal) if months is None else list(months)
    missing = [m for m in wanted if m not in by_month]
    if missing:
        raise DataError(f"no balance sheets for months {missing}")
    return {m: build_system_snapshot(by_month[m]) for m in wanted}


# -- CSV readers ------------------------------------------------------------

def _rows(path: str | Path, header: list[str]):
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            got = next(reader)
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if [h.strip() for h in got] != header:
            raise DataError(f"{path}:1: expected header {','.join(header)}, got {','.join(got)}")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{reader.line_num}: expected {len(header)} fields, got {len(row)}")
            yield reader.line_num, [c.strip() for c in row]


def _number(path, line, text, name):
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"{path}:{line}: {name} {text!r} is not a number") from None
    if not math.isfinite(v):
        raise DataError(f"{path}:{line}: {name} must be finite")
    return v


def read_balance_sheets(path: str | Path) -> list[BankBalanceSheet]:
    sheets, seen = [], set()
    for line, (month, bank_id, s, m, l, cap) in _rows(path, BALANCE_SHEET_HEADER):
        if (month, bank_id) in seen:
            raise DataError(f"{path}:{line}: duplicate row for {bank_id} {month}")
        seen.add((month, bank_id))
        capital = None
        if cap:
            capital = _number(path, line, cap, "cet1_capital")
            if capital <= 0:
                raise DataError(f"{path}:{line}: {bank_id} {month}: capital must be positive, got {capital}")
        buckets = [_number(path, line, v, name)
                   for v, name in ((s, "short_assets"), (m, "medium_assets"), (l, "long_assets"))]
        try:
            sheets.append(BankBalanceSheet(bank_id, month, *buckets, capital))
        except DataError as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
    return sheets


def read_cet1_observations(path: str | Path) -> list[tuple[str, str, float]]:
    out, seen = [], set()
    for line, (bank_id, month, ratio) in _rows(path, CET1_HEADER):
        try:
            month_ordinal(month)
        except DataError as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
        r = _number(path, line, ratio, "cet1_ratio")
        if not 0 < r <= 1:
            raise DataError(f"{path}:{line}: CET1 ratio {r} outside (0, 1]")
        if (bank_id, month) in seen:
            raise DataError(f"{path}:{line}: duplicate CET1 ratio for {bank_id} {month}")
        seen.add((bank_id, month))
        out.append((bank_id, month, r))
    return out


def read_line_items(path: str | Path) -> list[RawLineItems]:
    grouped: dict[tuple[str, str], list[tuple[str, float]]] = defaultdict(list)
    for line, (month, bank_id, code, amount) in _rows(path, LINE_ITEM_HEADER):
        try:
            month_ordinal(month)
        except DataError as exc:
            raise DataError(f"{path}:{line}: {exc}") from None
        grouped[(month, bank_id)].append((code, _number(path, line, amount, "amount")))
    return [RawLineItems(b, m, tuple(entries)) for (m, b), entries in grouped.items()]
