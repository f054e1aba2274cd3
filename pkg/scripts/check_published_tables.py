"""Consistency checks on the transcribed top-50 tables.

For each field: least-squares positive means (the division reading),
an affine fit with intercept (a z-score-like reading), weighted and
outlier-dropped variants, a minimax bound, band counts and the R_139 /
R_300 inversion.

    python scripts/check_published_tables.py
"""
import numpy as np
from scipy.optimize import linprog

from bibsimca import io
from bibsimca.bcs import DEFAULT_WEIGHTS
from bibsimca.evaluation import fit_standardization_oracle, rank_report, spearman
from bibsimca.synth import PopulationStats

NAMES = ("fss", "hca1", "hca5", "first_a", "last_a")
TABLES = {"BIO/14": ("table2.csv", "bio14"), "MED/04": ("table3.csv", "med04")}


def minimax(design, y):
    n, p = design.shape
    ones = np.ones((n, 1))
    res = linprog(np.r_[np.zeros(p), 1.0],
                  A_ub=np.block([[design, -ones], [-design, -ones]]), b_ub=np.r_[y, -y],
                  bounds=[(0, None)] * (p + 1))
    return res.x[-1], 1 / res.x[:p]


def main():
    w = np.asarray(DEFAULT_WEIGHTS)
    for field, (table, stats_name) in TABLES.items():
        g = io.load_golden(table)
        means = np.array([PopulationStats.load(stats_name)[n].mean for n in NAMES])
        x, y = g.values, g.bcs
        span = np.ptp(y)
        print(f"== {field} ({table}), BCS range {span:.3f}")

        mu, rms = fit_standardization_oracle(x, y, w)
        design = x * w
        cov = np.linalg.inv(design.T @ design) * rms ** 2 * len(y) / (len(y) - 5)
        se = np.sqrt(np.diag(cov)) * mu ** 2  # delta method for 1/r
        print(f"division, OLS      rms {rms:.4f} ({100 * rms / span:.2f}% of range)")
        for n, m, s, t in zip(NAMES, mu, se, means):
            print(f"   {n:<8} mu+ {m:7.3f} +- {s:.3f}   overall mean {t:5.2f}  {'ok' if m >= t else 'BELOW'}")

        rel, *_ = np.linalg.lstsq(design / y[:, None], np.ones_like(y), rcond=None)
        print(f"division, relative LS  mu+ {np.round(1 / rel, 3).tolist()}")
        keep = np.array([rid != "R_139" for rid in g.ids])
        mu_drop, _ = fit_standardization_oracle(x[keep], y[keep], w)
        print(f"division, without R_139 mu+ {np.round(mu_drop, 3).tolist()}")
        bound, mu_mm = minimax(design, y)
        print(f"division, minimax      max |resid| {bound:.4f}, mu+ {np.round(mu_mm, 3).tolist()}")

        aff = np.column_stack([np.ones_like(y), design])
        coef, *_ = np.linalg.lstsq(aff, y, rcond=None)
        r_aff = np.sqrt(np.mean((y - aff @ coef) ** 2))
        print(f"affine (z-score-like)  intercept {coef[0]:.4f}, rms {r_aff:.4f} "
              f"({100 * r_aff / span:.2f}% of range), scales {np.round(1 / coef[1:], 3).tolist()}")

        banded = sum(1 for b in g.band if b)
        print(f"banded rows {banded}; spearman(BCS, -SIMCA) over the table {spearman(y, -g.simca_score):.4f}")
        rows = {r.researcher_id: r for r in rank_report(g.ids, y, g.simca_score)}
        if "R_139" in rows:
            a, b = rows["R_139"], rows["R_300"]
            print(f"R_139 bcs {a.bcs} tlog {a.translated_log}; R_300 bcs {b.bcs} tlog {b.translated_log}")
        print()


if __name__ == "__main__":
    main()
