"""Clustering-quality metrics and the benchmark harness."""

from __future__ import annotations

import json
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Optional

import numpy as np

from .algorithms import AlgorithmConfig, fit
from .data import DataMatrix, _map_labels, save_matrix
from .errors import ConfigurationError, ShapeError


def nmi(labels_a, labels_b) -> float:
    """Normalized mutual information with arithmetic-mean normalization.

    NMI = I(A;B) / ((H(A) + H(B)) / 2) with natural-log entropies computed
    from the contingency table. If either labeling has zero entropy the
    value is 1.0 when both are the trivial single-cluster partition and 0.0
    otherwise. Symmetric and invariant under relabeling.
    """
    a = np.asarray(labels_a).ravel()
    b = np.asarray(labels_b).ravel()
    if a.shape != b.shape or a.shape[0] < 1:
        raise ShapeError(f"label vectors must share a length >= 1, got {a.shape} and {b.shape}")
    n = a.shape[0]
    _, ai = np.unique(a, return_inverse=True)
    _, bi = np.unique(b, return_inverse=True)
    ka, kb = int(ai.max()) + 1, int(bi.max()) + 1
    contingency = np.zeros((ka, kb), dtype=np.float64)
    np.add.at(contingency, (ai, bi), 1.0)
    pa = contingency.sum(axis=1) / n
    pb = contingency.sum(axis=0) / n
    ha = float(-(pa * np.log(pa)).sum())
    hb = float(-(pb * np.log(pb)).sum())
    if ha <= 0.0 or hb <= 0.0:
        return 1.0 if (ha <= 0.0 and hb <= 0.0) else 0.0
    pij = contingency / n
    mask = pij > 0
    outer = np.outer(pa, pb)
    mi = float((pij[mask] * np.log(pij[mask] / outer[mask])).sum())
    return mi / ((ha + hb) / 2.0)


@dataclass
class BenchRow:
    """One (algorithm, dataset) cell of the benchmark report."""

    algorithm: str
    dataset: str
    repetitions: int
    mean_time: float
    std_time: float
    mean_nmi: Optional[float]
    times: list[float] = field(default_factory=list)
    nmis: list[float] = field(default_factory=list)
    config: Optional[dict] = None

    def to_dict(self) -> dict:
        return {
            "algorithm": self.algorithm,
            "dataset": self.dataset,
            "repetitions": self.repetitions,
            "mean_time": self.mean_time,
            "std_time": self.std_time,
            "mean_nmi": self.mean_nmi,
            "times": self.times,
            "nmis": self.nmis,
            "config": self.config,
        }


@dataclass
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {"format": "divclust-bench", "version": 1, "rows": [r.to_dict() for r in self.rows]}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    def to_text_table(self) -> str:
        """Aligned per-dataset blocks with algorithm, time, nmi columns."""
        lines = []
        datasets = []
        for row in self.rows:
            if row.dataset not in datasets:
                datasets.append(row.dataset)
        for name in datasets:
            lines.append(f"== {name} ==")
            lines.append(f"{'algorithm':<12} {'time':>10} {'nmi':>8}")
            for row in self.rows:
                if row.dataset != name:
                    continue
                nmi_txt = f"{row.mean_nmi:.4f}" if row.mean_nmi is not None else "-"
                lines.append(f"{row.algorithm:<12} {row.mean_time:>10.4f} {nmi_txt:>8}")
            lines.append("")
        return "\n".join(lines)

    def to_csv(self) -> str:
        lines = ["algorithm,dataset,repetitions,mean_time,std_time,mean_nmi"]
        for r in self.rows:
            nmi_txt = "" if r.mean_nmi is None else repr(r.mean_nmi)
            lines.append(
                f"{r.algorithm},{r.dataset},{r.repetitions},"
                f"{repr(r.mean_time)},{repr(r.std_time)},{nmi_txt}"
            )
        return "\n".join(lines) + "\n"


def _effective_config(config: AlgorithmConfig, dataset: DataMatrix) -> AlgorithmConfig:
    """Fill max_clusters from the ground truth for fixed-k algorithms."""
    if config.max_clusters is not None or config.algorithm == "depddp":
        return config
    if dataset.labels is None:
        raise ConfigurationError(
            f"{config.algorithm} needs max_clusters and the dataset has no labels"
        )
    return replace(config, max_clusters=dataset.n_classes)


def _bench_cell(
    name: str, dataset: DataMatrix, cfg: AlgorithmConfig, repetitions: int, warmup: bool
) -> BenchRow:
    times, nmis = [], []
    if warmup:
        fit(cfg, dataset)
    for rep in range(repetitions):
        rep_cfg = replace(cfg, seed=cfg.seed + rep)
        start = time.perf_counter()
        _, labels = fit(rep_cfg, dataset)
        times.append(time.perf_counter() - start)
        if dataset.labels is not None:
            nmis.append(nmi(labels, dataset.labels))
    return BenchRow(
        algorithm=cfg.algorithm,
        dataset=name,
        repetitions=repetitions,
        mean_time=float(np.mean(times)),
        std_time=float(np.std(times)),
        mean_nmi=float(np.mean(nmis)) if nmis else None,
        times=times,
        nmis=nmis,
        config=cfg.to_dict(),
    )


def bench(
    datasets: list[tuple[str, DataMatrix]],
    configs: list[AlgorithmConfig],
    repetitions: int,
    baseline_command: Optional[str] = None,
    warmup: bool = True,
    parallel: bool = False,
) -> BenchReport:
    """Time fit and score NMI for every (config, dataset) cell.

    Each repetition reseeds deterministically (base seed + repetition
    index). The timed window covers fit only; an untimed warm-up run is
    performed first unless disabled. ``baseline_command`` names an external
    program invoked as ``cmd <csv-path> <k>`` that prints one label per
    line; it is timed the same way.

    Cells run sequentially by default so timings never contend for cores.
    ``parallel`` runs them in a thread pool instead: reported times are then
    contended and meaningless, so use it only for NMI-only sweeps.
    """
    if repetitions < 1:
        raise ConfigurationError("repetitions must be >= 1")
    report = BenchReport()
    cells = [
        (name, dataset, _effective_config(config, dataset))
        for name, dataset in datasets
        for config in configs
    ]
    if parallel:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor() as pool:
            rows = list(
                pool.map(
                    lambda cell: _bench_cell(cell[0], cell[1], cell[2], repetitions, warmup),
                    cells,
                )
            )
        report.rows.extend(rows)
    else:
        for name, dataset, cfg in cells:
            report.rows.append(_bench_cell(name, dataset, cfg, repetitions, warmup))
    if baseline_command is not None:
        for name, dataset in datasets:
            report.rows.append(
                _run_baseline(name, dataset, baseline_command, repetitions, warmup)
            )
    return report


def _run_baseline(
    name: str,
    dataset: DataMatrix,
    command: str,
    repetitions: int,
    warmup: bool,
) -> BenchRow:
    k = dataset.n_classes if dataset.labels is not None else 0
    argv = shlex.split(command)
    with tempfile.TemporaryDirectory() as tmp:
        csv_path = Path(tmp) / "data.csv"
        save_matrix(csv_path, DataMatrix(values=dataset.values))
        full = argv + [str(csv_path), str(k)]
        times, nmis = [], []
        runs = repetitions + (1 if warmup else 0)
        for rep in range(runs):
            start = time.perf_counter()
            proc = subprocess.run(full, capture_output=True, text=True, check=True)
            elapsed = time.perf_counter() - start
            if warmup and rep == 0:
                continue
            times.append(elapsed)
            labels = [line for line in proc.stdout.splitlines() if line.strip()]
            if len(labels) != dataset.n:
                raise ShapeError(
                    f"baseline wrote {len(labels)} labels for {dataset.n} rows"
                )
            if dataset.labels is not None:
                nmis.append(nmi(_map_labels(labels), dataset.labels))
    return BenchRow(
        algorithm="baseline",
        dataset=name,
        repetitions=repetitions,
        mean_time=float(np.mean(times)),
        std_time=float(np.std(times)),
        mean_nmi=float(np.mean(nmis)) if nmis else None,
        times=times,
        nmis=nmis,
        config={"command": command},
    )
