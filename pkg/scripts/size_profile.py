"""Mean alpha_bar_n by bank-size group, synthetic or from a config's data.

Without --config the system is a 4-bank core with 22 smaller banks at a
common capital ratio.

    python3 scripts/size_profile.py --m 2000
    python3 scripts/size_profile.py --config demo/config.json --month 2017-03
"""
import argparse

from contagion.cascade import SCENARIOS
from contagion.cli import load_config, load_snapshots
from contagion.montecarlo import DEFAULT_SIZE_GROUPS, SimulationPlan, cell_seed, run_plan, size_group_profile
from contagion.network import StructureSpec
from contagion.synthetic import core_periphery_assets, snapshot_from_assets


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config")
    ap.add_argument("--month")
    ap.add_argument("--structure", default="ErdosRenyi")
    ap.add_argument("--p-bar", type=float, default=0.5)
    ap.add_argument("--scenario", default="base", choices=sorted(SCENARIOS))
    ap.add_argument("--capital-ratio", type=float, default=0.06, help="synthetic system only")
    ap.add_argument("--m", type=int, default=2000)
    ap.add_argument("--jobs", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    if args.config:
        snapshots, _ = load_snapshots(load_config(args.config))
        snap = snapshots[args.month] if args.month else list(snapshots.values())[-1]
    else:
        snap = snapshot_from_assets(core_periphery_assets(), args.capital_ratio)
    spec = StructureSpec(args.structure, args.p_bar)
    plan = SimulationPlan(snap, spec, SCENARIOS[args.scenario], args.m, cell_seed(args.seed, snap.month, spec))
    prof = size_group_profile(run_plan(plan, args.jobs), DEFAULT_SIZE_GROUPS)
    print(f"{snap.month}, {snap.n} banks, {spec.name} p_bar={spec.target_p_bar}, m={args.m}")
    for name, first, last, mean in prof.groups:
        print(f"  {name:10s} ranks {first:2d}-{last:2d}  mean alpha_bar_n {mean:.5f}")
    print("  ln(assets)  alpha_bar_n")
    for x, y in prof.scatter:
        print(f"  {x:10.3f}  {y:.5f}")


if __name__ == "__main__":
    main()
