//! Plotting script over the CSVs written by the CLI.

use std::path::{Path, PathBuf};

use crate::error::{Error, Result};

/// Python/matplotlib script that plots every known CSV found next to it.
///
/// * `trace.csv`: `sup_u`, `sup_v`, `y`, `mass_u` against `t` (log scale)
/// * `*_runs.csv`: one panel per numeric key shared by several runs
/// * `semigroup_fits.csv`: fitted against expected exponents
/// * `thresholds.csv`: printed as a table
pub const PLOT_SCRIPT: &str = r#"#!/usr/bin/env python3
import csv
import glob
import os
import sys

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
os.chdir(sys.argv[1] if len(sys.argv) > 1 else here)


def rows(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def num(x):
    try:
        return float(x)
    except (TypeError, ValueError):
        return float("nan")


if os.path.exists("trace.csv"):
    r = rows("trace.csv")
    t = [num(x["t"]) for x in r]
    fig, ax = plt.subplots()
    for key in ("sup_u", "sup_v", "y", "mass_u"):
        ax.semilogy(t, [max(num(x[key]), 1e-300) for x in r], label=key)
    ax.set_xlabel("t")
    ax.legend()
    fig.savefig("trace.png", dpi=120)

for path in sorted(glob.glob("*_runs.csv")):
    r = rows(path)
    keys = sorted({x["key"] for x in r})
    labels = list(dict.fromkeys(x["label"] for x in r))
    fig, axes = plt.subplots(len(keys), 1, figsize=(6, 2 * len(keys)), squeeze=False)
    for ax, key in zip(axes[:, 0], keys):
        vals = {x["label"]: num(x["value"]) for x in r if x["key"] == key}
        ax.plot(range(len(labels)), [vals.get(l, float("nan")) for l in labels], "o-")
        ax.set_ylabel(key, fontsize=7)
        ax.set_xticks(range(len(labels)))
        ax.set_xticklabels(labels, fontsize=6, rotation=30)
    fig.tight_layout()
    fig.savefig(path.replace(".csv", ".png"), dpi=120)

if os.path.exists("semigroup_fits.csv"):
    r = rows("semigroup_fits.csv")
    fig, ax = plt.subplots()
    ax.plot([num(x["alpha_expected"]) for x in r], [num(x["alpha_fit"]) for x in r], "o")
    lo, hi = 0.4, 1.6
    ax.plot([lo, hi], [lo, hi], "k--", lw=0.8)
    ax.set_xlabel("expected exponent")
    ax.set_ylabel("fitted exponent")
    fig.savefig("semigroup_fits.png", dpi=120)

if os.path.exists("thresholds.csv"):
    for x in rows("thresholds.csv"):
        print(", ".join(f"{k}={v}" for k, v in x.items()))
"#;

/// Write [`PLOT_SCRIPT`] as `plot.py` into `dir`.
pub fn write_plot_script(dir: impl AsRef<Path>) -> Result<PathBuf> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let path = dir.join("plot.py");
    std::fs::write(&path, PLOT_SCRIPT).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}
