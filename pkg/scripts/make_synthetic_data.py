"""Write a synthetic 26-bank monthly panel and a config that points at it.

    python3 scripts/make_synthetic_data.py --out demo
    contagion run --config demo/config.json --m 200
"""
import argparse
import json
from pathlib import Path

from contagion.synthetic import synthetic_panel, write_panel


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="demo", help="directory for CSVs and config.json")
    ap.add_argument("--first", default="2015-04")
    ap.add_argument("--last", default="2017-03")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--m", type=int, default=200, help="simulations per cell written into the config")
    args = ap.parse_args()

    out = Path(args.out)
    sheets, ratios = synthetic_panel(args.first, args.last, seed=args.seed)
    bs, ce = write_panel(out, sheets, ratios)
    config = {
        "data": {"balance_sheets": bs.name, "cet1": ce.name},
        "structures": "all",
        "target_p_bar": 0.5,
        "scenario": "low_risk",
        "m": args.m,
        "seed": args.seed,
        "out": str((out / "results").resolve()),
    }
    (out / "config.json").write_text(json.dumps(config, indent=2) + "\n")
    print(f"wrote {len(sheets)} balance sheets, {len(ratios)} CET1 ratios and {out / 'config.json'}")


if __name__ == "__main__":
    main()
