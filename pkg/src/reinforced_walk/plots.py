"""Plot-data export: CSV series plus rendered figures.

The verify command can drop, per enabled check, a small CSV with the series
behind the verdict and a PNG rendering of the same data, so a report can be
inspected without re-running anything.  CSVs carry the same metadata
comment lines as every other output; figures are a convenience and are not
part of the reproducibility contract.
"""

from __future__ import annotations

import os
import re

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from reinforced_walk.limits import covariance_params, theoretical_cov
from reinforced_walk.martingale import DeterministicSequences
from reinforced_walk.verify import VerificationReport

__all__ = ["emit_plot_data"]

_PAIR_KEY = re.compile(r"^C\(([^,]+),([^)]+)\)$")


def _metadata_lines(report: VerificationReport) -> list[str]:
    meta = report.meta
    return [
        f"# reinforced-walk {meta['tool_version']}",
        f"# memory={meta['memory']} step={meta['step']} p={meta['p']} "
        f"n={meta['horizon']} reps={meta['reps']} seed={meta['master_seed']}",
    ]


def _write_csv(path: str, header: str, rows, metadata: list[str]) -> None:
    with open(path, "w", newline="\n") as fh:
        for line in metadata:
            fh.write(line + "\n")
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(str(v) for v in row) + "\n")


def _covariance_outputs(report: VerificationReport, record, out_dir: str, meta: list[str]) -> None:
    p, alpha = report.meta["p"], report.meta["alpha"]
    params = covariance_params(p, alpha)
    rows = []
    for key, est in record.estimates.items():
        m = _PAIR_KEY.match(key)
        if not m:
            continue
        s, t = float(m.group(1)), float(m.group(2))
        rows.append((s, t, est, record.targets[key], record.se.get(key, float("nan"))))
    rows.sort()
    _write_csv(
        os.path.join(out_dir, "fclt_covariance.csv"),
        "s,t,empirical,theoretical,se",
        rows,
        meta,
    )

    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.6))
    tt = np.linspace(1e-3, max(r[1] for r in rows), 200)
    ax1.plot(tt, [theoretical_cov(params, t, t) for t in tt], "-", color="C0", label="theory")
    diag = [(s, e, se) for s, t, e, _, se in rows if s == t]
    if diag:
        xs, es, ses = zip(*diag)
        ax1.errorbar(xs, es, yerr=[5 * v for v in ses], fmt="o", color="C1", label="empirical")
    ax1.set_xlabel("t")
    ax1.set_ylabel("cov(t, t)")
    ax1.legend(frameon=False)
    theos = [r[3] for r in rows]
    ax2.errorbar(theos, [r[2] for r in rows], yerr=[5 * r[4] for r in rows], fmt="o", color="C1")
    lims = [min(theos + [0]), max(theos) * 1.05]
    ax2.plot(lims, lims, "-", color="0.6", lw=1)
    ax2.set_xlabel("theoretical")
    ax2.set_ylabel("empirical")
    fig.suptitle(f"covariance check, p={p:g}, alpha={alpha:g}")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "fclt_covariance.png"), dpi=130)
    plt.close(fig)


def _rates_outputs(report: VerificationReport, record, seqs: DeterministicSequences,
                   out_dir: str, meta: list[str]) -> None:
    n = seqs.n_max
    grid = np.unique(np.geomspace(16, n, 200).astype(np.int64))
    series = {
        "a_mu_eta": seqs.a_eta_mu[grid - 1],
        "w_normalized": seqs.w[grid - 1] / (grid * seqs.a_mu[grid - 1] ** 2),
        "z_over_n": seqs.z[grid - 1] / grid,
    }
    rows = [
        (int(m),) + tuple(float(series[k][i]) for k in series)
        for i, m in enumerate(grid)
    ]
    _write_csv(
        os.path.join(out_dir, "rate_convergence.csv"),
        "n," + ",".join(series),
        rows,
        meta,
    )
    fig, axes = plt.subplots(1, 3, figsize=(11, 3.4))
    for ax, key in zip(axes, series):
        ax.semilogx(grid, series[key], "-", color="C0")
        ax.axhline(record.targets[key], color="C3", lw=1, ls="--")
        ax.set_title(key)
        ax.set_xlabel("n")
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "rate_convergence.png"), dpi=130)
    plt.close(fig)


def _lindeberg_outputs(record, out_dir: str, meta: list[str]) -> None:
    n_list = record.estimates["n_list"]
    stat = record.estimates["statistic"]
    peak = record.estimates["max_norm"]
    _write_csv(
        os.path.join(out_dir, "lindeberg_norms.csv"),
        "n,statistic,max_norm",
        zip(n_list, stat, peak),
        meta,
    )
    fig, ax = plt.subplots(figsize=(4.8, 3.4))
    ax.loglog(n_list, [max(v, 1e-300) for v in peak], "o-", color="C0", label="max norm")
    if any(v > 0 for v in stat):
        ax.loglog(n_list, [max(v, 1e-300) for v in stat], "s--", color="C1", label="statistic")
    ax.axhline(record.tolerance["epsilon"], color="C3", lw=1, ls=":", label="epsilon")
    ax.set_xlabel("n")
    ax.legend(frameon=False)
    fig.tight_layout()
    fig.savefig(os.path.join(out_dir, "lindeberg_norms.png"), dpi=130)
    plt.close(fig)


def emit_plot_data(out_dir: str, report: VerificationReport, seqs: DeterministicSequences) -> list[str]:
    """Write the CSV/PNG pairs for every check present in the report.

    Returns the list of files written (relative to ``out_dir``).
    """
    os.makedirs(out_dir, exist_ok=True)
    meta = _metadata_lines(report)
    written: list[str] = []
    for record in report.checks:
        if record.name == "fclt_cov":
            _covariance_outputs(report, record, out_dir, meta)
            written += ["fclt_covariance.csv", "fclt_covariance.png"]
        elif record.name == "rates":
            _rates_outputs(report, record, seqs, out_dir, meta)
            written += ["rate_convergence.csv", "rate_convergence.png"]
        elif record.name == "lindeberg":
            _lindeberg_outputs(record, out_dir, meta)
            written += ["lindeberg_norms.csv", "lindeberg_norms.png"]
    return written
