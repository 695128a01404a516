"""Regenerate conover_golden.json from an independent scipy-based reference.

The reference implements the Conover-Friedman post-hoc procedure directly
from the textbook formulas using scipy's rankdata and t distribution, with
no imports from ctsbench. The frozen output pins rank sums and pairwise
significance decisions exactly and the critical difference to high
precision; the library's own distribution code may differ from scipy in
the last few bits, so the test compares CD at 1e-7.

Run from the repository root:

    python3 tests/data/make_conover_golden.py
"""

import json
import pathlib

import numpy as np
from scipy import stats


def main() -> None:
    rng = np.random.default_rng(77)
    n, k = 10, 3
    table = rng.standard_normal((n, k)) + np.array([0.0, 0.3, 2.0])

    ranks = np.vstack([stats.rankdata(row) for row in table])
    rank_sums = ranks.sum(axis=0)

    a = float(np.sum(ranks**2))
    b = float(np.sum(rank_sums**2)) / n
    df = (n - 1) * (k - 1)
    cd = float(stats.t.ppf(0.975, df) * np.sqrt(2.0 * n * (a - b) / df))
    gaps = np.abs(rank_sums[:, None] - rank_sums[None, :])
    significant = (gaps > cd) & ~np.eye(k, dtype=bool)

    stat = 12.0 / (n * k * (k + 1)) * float(np.sum(rank_sums**2)) - 3.0 * n * (k + 1)
    p = float(stats.chi2.sf(stat, k - 1))

    payload = {
        "alpha": 0.05,
        "table": [[float(v) for v in row] for row in table],
        "rank_sums": [float(v) for v in rank_sums],
        "friedman_statistic": stat,
        "friedman_df": k - 1,
        "friedman_p": p,
        "cd": cd,
        "significant": [[bool(v) for v in row] for row in significant],
    }
    out = pathlib.Path(__file__).with_name("conover_golden.json")
    out.write_text(json.dumps(payload, indent=2) + "\n")
    print(f"wrote {out}")
    print(f"rank_sums={rank_sums.tolist()} cd={cd:.6f} stat={stat:.6f} p={p:.3e}")
    print(f"significant={significant.tolist()}")


if __name__ == "__main__":
    main()
