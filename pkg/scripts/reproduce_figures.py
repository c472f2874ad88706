"""Write the four figure datasets (CSV plus JSON sidecar) and print their headline numbers."""

import argparse
from pathlib import Path

import numpy as np

from omnoise import analysis as an
from omnoise.cli import cmd_figures
from omnoise.config import benchmark_config_text, parse_config


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out", default="figures")
    args = ap.parse_args()

    for path in cmd_figures(parse_config(benchmark_config_text()), "all", args.out):
        print("wrote", path)

    for fig_id, col in (("fig1", "s_imp"), ("fig2", "s_qba")):
        m = an.figure_dataset(fig_id).markers()
        print(f"\n{fig_id} extremum over eta")
        for name, eta, val in zip(m["series"], m["eta"], m[col]):
            print(f"  {name:20s} eta* = {eta:.4f}   {col} = {val:.4e}")

    ds = an.figure_dataset("fig3")
    db = ds.columns["db_over_sql"]
    k = int(np.argmin(db))
    print(f"\nfig3 best cell: {ds.columns['power_rel_pmin_db'][k]:+.1f} dB over P_min, "
          f"{ds.columns['squeeze_db'][k]:.1f} dB squeezing -> {db[k]:+.3f} dB over SQL")

    ds = an.figure_dataset("fig4")
    print("\nfig4 minimum over eta")
    for name in dict.fromkeys(ds.columns["series"].tolist()):
        s = ds.series(name)
        i = int(np.argmin(s["s_total"]))
        print(f"  {name:16s} eta* = {s['eta'][i]:.3f}   {s['db_over_sql'][i]:+.3f} dB over SQL")
    print(f"\noutputs in {Path(args.out).resolve()}")


if __name__ == "__main__":
    main()
