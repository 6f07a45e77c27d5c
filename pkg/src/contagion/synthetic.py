"""Synthetic banking systems for experiments and tests.

Real inputs are monthly balance-sheet returns plus sparse CET1 disclosures;
these helpers produce data of the same shape with a few large core banks
and a long tail of small ones.
"""
from __future__ import annotations

import csv
from pathlib import Path

import numpy as np

from .balance_sheets import (
    BALANCE_SHEET_HEADER,
    CET1_HEADER,
    BankBalanceSheet,
    SystemSnapshot,
    build_system_snapshot,
    month_range,
)


def core_periphery_assets(n_core=4, n_periphery=22, core_size=1000.0, periphery_size=60.0, decay=0.85):
    """Strictly decreasing asset sizes: a slowly shrinking core, a geometric tail."""
    core = core_size * (1 - 0.05 * np.arange(n_core))
    tail = periphery_size * decay ** np.arange(n_periphery)
    return np.concatenate([core, tail])


def snapshot_from_assets(assets, capital_ratio, month="2017-03", bucket_shares=(1 / 3, 1 / 3, 1 / 3),
                         prefix="bank") -> SystemSnapshot:
    assets = np.asarray(assets, dtype=float)
    ratio = np.broadcast_to(np.asarray(capital_ratio, dtype=float), assets.shape)
    shares = np.asarray(bucket_shares, dtype=float)
    shares = np.broadcast_to(shares, (len(assets), 3))
    sheets = [
        BankBalanceSheet(f"{prefix}{i:02d}", month, *(a * shares[i]), capital=a * r)
        for i, (a, r) in enumerate(zip(assets, ratio))
    ]
    return build_system_snapshot(sheets)


def random_snapshot(rng: np.random.Generator, n: int, ratio_range=(0.02, 0.5), month="2017-03") -> SystemSnapshot:
    buckets = rng.uniform(1, 100, (n, 3)) * rng.uniform(0.1, 10, (n, 1))
    assets = buckets.sum(axis=1)
    capital = assets * rng.uniform(*ratio_range, n)
    sheets = [BankBalanceSheet(f"b{i:02d}", month, *buckets[i], capital=capital[i]) for i in range(n)]
    return build_system_snapshot(sheets)


def synthetic_panel(
    first="2015-04",
    last="2017-03",
    n_core=5,
    n_periphery=21,
    seed=0,
    cet1_every=3,
):
    """Monthly balance sheets without capital plus quarterly CET1 ratios.

    Returns (sheets, ratios) in the shapes the CSV readers produce.
    """
    rng = np.random.default_rng(seed)
    months = month_range(first, last)
    base = core_periphery_assets(n_core, n_periphery, core_size=1000.0, periphery_size=120.0)
    shares = rng.dirichlet([4, 6, 5], size=len(base))
    level = rng.uniform(0.05, 0.12, len(base))
    sheets, ratios = [], []
    growth = np.ones(len(base))
    for k, month in enumerate(months):
        growth *= np.exp(rng.normal(0.004, 0.02, len(base)))
        for i, a in enumerate(base * growth):
            sheets.append(BankBalanceSheet(f"bank{i:02d}", month, *(a * shares[i]), capital=None))
            if k % cet1_every == 0:
                r = float(np.clip(level[i] + rng.normal(0, 0.004), 0.01, 0.9))
                ratios.append((f"bank{i:02d}", month, round(r, 6)))
    return sheets, ratios


def write_panel(directory, sheets, ratios) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    bs, ce = directory / "balance_sheets.csv", directory / "cet1.csv"
    with bs.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BALANCE_SHEET_HEADER)
        for s in sheets:
            w.writerow([s.month, s.bank_id, repr(s.short_assets), repr(s.medium_assets), repr(s.long_assets),
                        "" if s.capital is None else repr(s.capital)])
    with ce.open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CET1_HEADER)
        for bank, month, r in ratios:
            w.writerow([bank, month, repr(r)])
    return bs, ce
