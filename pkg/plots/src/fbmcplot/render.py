"""CSV -> figure rendering for the three experiment kinds."""

from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

__all__ = ["FigureKind", "FigureJob", "SchemaError", "build_figure", "render"]


class SchemaError(ValueError):
    """CSV header does not match the declared figure kind."""


class FigureKind(str, enum.Enum):
    CCDF = "ccdf"
    BER = "ber"
    PSD = "psd"


_SCHEMAS = {
    FigureKind.CCDF: ["scheme", "K", "gamma_db", "ccdf_empirical", "ccdf_theoretical"],
    FigureKind.BER: ["scheme", "snr_db", "bits", "errors", "ber"],
    FigureKind.PSD: ["scheme", "freq_norm", "psd_db"],
}

_DEFAULT_LABELS = {
    FigureKind.CCDF: ("PAPR threshold (dB)", "P(PAPR > threshold)"),
    FigureKind.BER: ("SNR (dB)", "bit error rate"),
    FigureKind.PSD: ("normalized frequency", "PSD (dB)"),
}


@dataclass(frozen=True)
class FigureJob:
    input_csv: str | Path
    figure_kind: FigureKind
    output_image: str | Path
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""


def _read_rows(path: Path, kind: FigureKind) -> list[dict[str, str]]:
    with open(path, newline="") as fh:
        lines = [line for line in fh if not line.startswith("#")]
    reader = csv.reader(lines)
    try:
        header = next(reader)
    except StopIteration:
        raise SchemaError(f"{path}: empty file") from None
    expected = _SCHEMAS[kind]
    if header != expected:
        missing = [col for col in expected if col not in header]
        extra = [col for col in header if col not in expected]
        problem = missing[0] if missing else extra[0]
        raise SchemaError(
            f"{path}: header does not match the {kind.value} schema "
            f"(offending column: {problem!r})"
        )
    rows = [dict(zip(header, row)) for row in reader if row]
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def _by_scheme(rows: list[dict[str, str]]) -> dict[str, list[dict[str, str]]]:
    grouped: dict[str, list[dict[str, str]]] = {}
    for row in rows:
        grouped.setdefault(row["scheme"], []).append(row)
    return grouped


def build_figure(job: FigureJob):
    """Parse the CSV and build the matplotlib figure; returns (figure, axes)."""
    rows = _read_rows(Path(job.input_csv), job.figure_kind)
    grouped = _by_scheme(rows)
    fig, ax = plt.subplots(figsize=(6.4, 4.4))

    if job.figure_kind is FigureKind.CCDF:
        for scheme, data in grouped.items():
            gamma = [float(r["gamma_db"]) for r in data]
            prob = [float(r["ccdf_empirical"]) for r in data]
            line = ax.semilogy(gamma, [p if p > 0 else math.nan for p in prob], label=scheme)
            theo = [(float(r["gamma_db"]), float(r["ccdf_theoretical"])) for r in data
                    if r["ccdf_theoretical"]]
            if theo:
                ax.semilogy(
                    [g for g, _ in theo],
                    [p if p > 0 else math.nan for _, p in theo],
                    linestyle="--",
                    color=line[0].get_color(),
                    linewidth=0.9,
                )
        ax.set_ylim(1e-4, 1.5)
    elif job.figure_kind is FigureKind.BER:
        for scheme, data in grouped.items():
            snr = [float(r["snr_db"]) for r in data]
            ber = [float(r["ber"]) for r in data]
            ax.semilogy(snr, [b if b > 0 else math.nan for b in ber], marker="o", label=scheme)
    else:
        for scheme, data in grouped.items():
            freq = [float(r["freq_norm"]) for r in data]
            psd = [float(r["psd_db"]) for r in data]
            ax.plot(freq, psd, label=scheme, linewidth=0.9)

    xlabel, ylabel = _DEFAULT_LABELS[job.figure_kind]
    ax.set_xlabel(job.xlabel or xlabel)
    ax.set_ylabel(job.ylabel or ylabel)
    if job.title:
        ax.set_title(job.title)
    ax.grid(True, which="both", alpha=0.4)
    ax.legend()
    return fig, ax


def render(job: FigureJob) -> Path:
    """Render the job to its output image; deterministic for a fixed input."""
    fig, _ = build_figure(job)
    out = Path(job.output_image)
    try:
        # strip writer-version metadata so identical inputs give identical bytes
        metadata = {"Software": None} if out.suffix == ".png" else None
        fig.savefig(out, dpi=150, metadata=metadata)
    finally:
        plt.close(fig)
    return out
