"""Run the named limit scans, writing one JSON report and one CSV table per scan."""

from __future__ import annotations

import argparse
from pathlib import Path

from spinscape import verify as vf


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", dest="n_sites", type=int, default=4)
    ap.add_argument("--workers", type=int, default=4)
    ap.add_argument("--out-dir", default="scan_results")
    args = ap.parse_args()
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for key, spec in vf.standard_scans(args.n_sites).items():
        rep = vf.limit_scan(spec, workers=args.workers)
        (out / f"{key}.json").write_text(rep.to_json())
        (out / f"{key}.csv").write_text(rep.table_csv())
        last = rep.convergence_table[-1]
        print(f"{'PASS' if rep.verdict else 'FAIL'} {key:9s} final residual {last[1]:.3g} at {last[0]}")


if __name__ == "__main__":
    main()
