"""The three figure kinds. Output format follows the file extension."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from plotkit.io import SchemaError, load_gap_report, load_metrics  # noqa: E402

KINDS = ("error_curves", "gamma_race", "p_hat_bars")


@dataclass
class FigureSpec:
    inputs: Sequence[str | Path]
    kind: str
    output: str | Path
    title: str = ""
    classes: Sequence[int] | None = None
    beta: float | None = None
    stuck_ceiling: float | None = None
    extra: dict = field(default_factory=dict)

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown figure kind {self.kind!r}; expected one of {KINDS}")
        if not self.inputs:
            raise ValueError("no input files")
        for p in self.inputs:
            if not Path(p).is_file():
                raise FileNotFoundError(p)
        if Path(self.output).suffix.lower() not in (".png", ".svg", ".pdf"):
            raise ValueError("output must end in .png, .svg or .pdf")


def _save(fig, output: str | Path) -> Path:
    output = Path(output)
    output.parent.mkdir(parents=True, exist_ok=True)
    # A fixed date keeps SVG/PDF output identical across runs.
    meta = {"Date": None} if output.suffix.lower() in (".svg", ".pdf") else {}
    if output.suffix.lower() == ".png":
        meta = {"Software": None}
    fig.savefig(output, metadata=meta)
    plt.close(fig)
    return output


def plot_error_curves(spec: FigureSpec) -> Path:
    runs = [load_metrics(p) for p in spec.inputs]
    fig, axes = plt.subplots(1, len(runs), figsize=(4.2 * len(runs), 3.4), sharey=True, squeeze=False)
    for ax, run in zip(axes[0], runs):
        ax.plot(run.t, run.columns["train_error"], label="train")
        ax.plot(run.t, run.columns["test_error"], label="test")
        ax.set_title(run.arm)
        ax.set_xlabel("iteration")
        ax.legend()
    axes[0][0].set_ylabel("error")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_gamma_race(spec: FigureSpec) -> Path:
    run = load_metrics(spec.inputs[0])
    if run.num_classes == 0:
        raise SchemaError(f"{run.path}: no gamma columns")
    if any(math.isnan(v) for v in run.gamma[(0, 1)] + run.gamma[(0, 2)]):
        raise SchemaError(f"{run.path}: gamma columns are empty; a joint run is required")
    classes = list(spec.classes) if spec.classes is not None else list(range(min(run.num_classes, 6)))
    for j in classes:
        if not 0 <= j < run.num_classes:
            raise ValueError(f"class {j} outside 0..{run.num_classes - 1}")
    cols = min(3, len(classes))
    rows = math.ceil(len(classes) / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3.6 * cols, 2.9 * rows), squeeze=False)
    for ax in axes.flat[len(classes):]:
        ax.axis("off")
    for ax, j in zip(axes.flat, classes):
        ax.plot(run.t, run.gamma[(j, 1)], label="modality 1")
        ax.plot(run.t, run.gamma[(j, 2)], label="modality 2")
        if spec.beta is not None:
            ax.axhline(spec.beta, color="k", ls="--", lw=0.8, label="beta")
        if spec.stuck_ceiling is not None:
            ax.axhline(spec.stuck_ceiling, color="gray", ls=":", lw=0.8, label="stuck ceiling")
        ax.set_yscale("symlog", linthresh=1e-3)
        ax.set_title(f"class {j}")
        ax.set_xlabel("iteration")
    axes.flat[0].legend(fontsize="small")
    if spec.title:
        fig.suptitle(spec.title)
    fig.tight_layout()
    return _save(fig, spec.output)


def plot_p_hat(spec: FigureSpec) -> Path:
    rep = load_gap_report(spec.inputs[0])
    p = rep["p_hat"]
    und = rep["undecided_fraction"]
    decided = rep["decided_pairs"]
    total = rep["total_pairs"]
    if total == 0 or p[0] is None or p[1] is None or und is None:
        raise SchemaError(f"{spec.inputs[0]}: report has no competition tallies")
    decided_frac = 1.0 - und
    # Shares of all (seed, class) pairs so the three bars sum to one.
    values = [p[0] * decided_frac, p[1] * decided_frac, und]
    errs = [math.sqrt(max(v * (1 - v), 0.0) / total) for v in values]
    fig, ax = plt.subplots(figsize=(4.5, 3.4))
    ax.bar(["modality 1 loses", "modality 2 loses", "undecided"], values, yerr=errs, capsize=4,
           color=["C0", "C1", "0.6"])
    ax.set_ylim(0, 1)
    ax.set_ylabel(f"share of {total} pairs ({decided} decided)")
    ax.set_title(spec.title or f"p_hat = {p[0]:.2f}, {p[1]:.2f}")
    fig.tight_layout()
    return _save(fig, spec.output)


def render(spec: FigureSpec) -> Path:
    spec.validate()
    return {"error_curves": plot_error_curves, "gamma_race": plot_gamma_race,
            "p_hat_bars": plot_p_hat}[spec.kind](spec)
