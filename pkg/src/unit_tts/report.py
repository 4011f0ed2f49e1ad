"""Report rendering: JSON, aligned text table, CSV, and matplotlib figures."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt

from .evalsuite import CrossLingualReport, EvalReport

_METRIC_COLUMNS = [
    ("unit_accuracy", "unit acc"),
    ("duration_mae", "dur MAE"),
    ("aligner_duration_mae", "align MAE"),
    ("codebook_agreement", "cb agree"),
    ("speaker_probe_accuracy", "probe acc"),
    ("unit_recovery", "recovery"),
    ("utterances", "utts"),
]


def render_table(report: EvalReport) -> str:
    rows = [("overall", report.overall)]
    rows += sorted(report.per_language.items())
    header = ["scope"] + [label for _, label in _METRIC_COLUMNS]
    body = []
    for scope, metrics in rows:
        values = [scope]
        for key, _ in _METRIC_COLUMNS:
            v = getattr(metrics, key)
            values.append(f"{v}" if key == "utterances" else f"{v:.4f}")
        body.append(values)
    widths = [max(len(h), *(len(r[i]) for r in body)) for i, h in enumerate(header)]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)),
        "  ".join("-" * w for w in widths),
    ]
    lines += ["  ".join(v.ljust(widths[i]) for i, v in enumerate(row)) for row in body]
    return "\n".join(lines) + "\n"


def write_eval_report(report: EvalReport, out_dir: str | Path) -> list[Path]:
    """report.json + report.txt + report.csv + figures; returns written paths."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []

    json_path = out_dir / "report.json"
    json_path.write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    written.append(json_path)

    txt_path = out_dir / "report.txt"
    txt_path.write_text(render_table(report), encoding="utf-8")
    written.append(txt_path)

    csv_path = out_dir / "report.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["scope", "metric", "value"])
        for scope, metrics in [("overall", report.overall)] + sorted(report.per_language.items()):
            for key, _ in _METRIC_COLUMNS:
                writer.writerow([scope, key, getattr(metrics, key)])
    written.append(csv_path)

    written.append(_accuracy_figure(report, out_dir / "fig_rates.png"))
    written.append(_duration_figure(report, out_dir / "fig_duration_mae.png"))
    return written


def _accuracy_figure(report: EvalReport, path: Path) -> Path:
    langs = sorted(report.per_language)
    metrics = [
        ("unit_accuracy", "unit accuracy"),
        ("codebook_agreement", "codebook agreement"),
        ("speaker_probe_accuracy", "speaker probe"),
        ("unit_recovery", "round-trip recovery"),
    ]
    x = range(len(langs))
    width = 0.8 / len(metrics)
    fig, ax = plt.subplots(figsize=(7, 4))
    for mi, (key, label) in enumerate(metrics):
        vals = [getattr(report.per_language[l], key) for l in langs]
        ax.bar([xi + mi * width for xi in x], vals, width=width, label=label)
    ax.set_xticks([xi + 1.5 * width for xi in x])
    ax.set_xticklabels(langs)
    ax.set_ylim(0, 1.05)
    ax.set_ylabel("rate")
    ax.legend(fontsize=8, loc="lower right")
    ax.set_title("per-language rates")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def _duration_figure(report: EvalReport, path: Path) -> Path:
    langs = sorted(report.per_language)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    x = range(len(langs))
    ax.bar([xi - 0.2 for xi in x], [report.per_language[l].duration_mae for l in langs],
           width=0.4, label="text-to-unit")
    ax.bar([xi + 0.2 for xi in x], [report.per_language[l].aligner_duration_mae for l in langs],
           width=0.4, label="aligner")
    ax.set_xticks(list(x))
    ax.set_xticklabels(langs)
    ax.set_ylabel("duration MAE (frames)")
    ax.legend(fontsize=8)
    ax.set_title("duration error vs ground truth")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_training_curves(
    histories: dict[str, list[float]], path: str | Path, title: str
) -> Path:
    path = Path(path)
    fig, ax = plt.subplots(figsize=(6, 3.5))
    for label, values in histories.items():
        ax.plot(range(1, len(values) + 1), values, label=label)
    ax.set_xlabel("epoch")
    ax.set_ylabel("loss")
    ax.set_yscale("log")
    ax.legend(fontsize=8)
    ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return path


def write_cross_lingual_report(report: CrossLingualReport, out_dir: str | Path) -> list[Path]:
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    json_path = out_dir / "cross_lingual.json"
    json_path.write_text(json.dumps(report.to_json(), indent=2) + "\n", encoding="utf-8")
    written.append(json_path)

    csv_path = out_dir / "cross_lingual.csv"
    with csv_path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["speaker", "probe_accuracy", "unit_recovery"])
        for r in report.results:
            writer.writerow([r.speaker, r.probe_accuracy, r.unit_recovery])
        writer.writerow(["baseline:" + report.baseline_speaker, "", report.baseline_recovery])
    written.append(csv_path)

    fig, ax = plt.subplots(figsize=(6, 3.5))
    speakers = [r.speaker for r in report.results]
    x = range(len(speakers))
    ax.bar([xi - 0.2 for xi in x], [r.probe_accuracy for r in report.results],
           width=0.4, label="probe accuracy")
    ax.bar([xi + 0.2 for xi in x], [r.unit_recovery for r in report.results],
           width=0.4, label="unit recovery")
    ax.axhline(report.baseline_recovery, color="gray", linestyle="--", linewidth=1,
               label=f"native recovery ({report.baseline_speaker})")
    ax.set_xticks(list(x))
    ax.set_xticklabels(speakers)
    ax.set_ylim(0, 1.05)
    ax.set_title(f"cross-lingual synthesis: {report.text_language} text")
    ax.legend(fontsize=8, loc="lower right")
    fig.tight_layout()
    fig_path = out_dir / "fig_cross_lingual.png"
    fig.savefig(fig_path, dpi=120)
    plt.close(fig)
    written.append(fig_path)
    return written
