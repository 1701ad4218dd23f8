"""Write the four figure datasets as CSV and, if matplotlib is available, draw them.

    python scripts/reproduce_figures.py --output figures [--grid 200] [--no-plot]
"""

from __future__ import annotations

import argparse
from pathlib import Path

import numpy as np

from transient_nash.cli import figure_datasets, main as cli_main


def _plot(outdir: Path, data: dict) -> None:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    for stem, key in (("fig1", "phi"), ("fig2", "eps")):
        rows = data[f"{stem}_strategies"]
        values = sorted({r["value"] for r in rows}, key=lambda v: (np.isinf(v), v))
        n = sum(1 for k in rows[0] if k.startswith("X_"))
        fig, axes = plt.subplots(1, n + 1, figsize=(4 * (n + 1), 3.2))
        for v in values:
            sel = [r for r in rows if r["value"] == v]
            t = [r["t"] for r in sel]
            for i in range(n):
                axes[i].plot(t, [r[f"X_{i + 1}"] for r in sel], label=f"{key}={v:g}")
            axes[n].plot(t, [r["I"] for r in sel], label=f"{key}={v:g}")
        for i in range(n):
            axes[i].set_title(f"trader {i + 1} inventory")
        axes[n].set_title("impact")
        axes[0].legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(outdir / f"{stem}.png", dpi=120)
        plt.close(fig)

    for stem, col in (("fig3_coa_vs_beta", "coa"), ("fig4_cop_vs_beta", "cop")):
        rows = data[stem]
        fig, ax = plt.subplots(figsize=(5, 3.5))
        for n in sorted({r["N"] for r in rows}):
            sel = [r for r in rows if r["N"] == n]
            ax.semilogx([r["beta"] for r in sel], [100 * r[col] for r in sel], label=f"N={n:g}")
        ax.set_xlabel("beta (T = 1)")
        ax.set_ylabel(f"{col} in %")
        ax.legend(fontsize=7)
        fig.tight_layout()
        fig.savefig(outdir / f"{stem}.png", dpi=120)
        plt.close(fig)


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--output", default="figures")
    parser.add_argument("--grid", type=int, default=200)
    parser.add_argument("--no-plot", action="store_true")
    args = parser.parse_args()
    outdir = Path(args.output)
    code = cli_main(["figures", "--output", str(outdir), "--grid", str(args.grid)])
    if code != 0:
        raise SystemExit(code)
    print(f"wrote CSV datasets to {outdir}/")
    if not args.no_plot:
        try:
            _plot(outdir, figure_datasets(args.grid))
            print(f"wrote PNG plots to {outdir}/")
        except ImportError:
            print("matplotlib not installed; skipped plots")


if __name__ == "__main__":
    main()
