"""Pipeline orchestration and artifact rendering.

One manifest-level seed drives every random stage. Artifacts are rendered to
strings first (so a server can ship them without touching disk) and written
by :func:`run_pipeline`; when a stage fails, everything rendered so far is
written with a ``.partial`` suffix and the failure is re-raised with module
attribution.
"""

from __future__ import annotations

import csv
import io
import json
import platform
import time
from dataclasses import dataclass
from pathlib import Path
from xml.sax.saxutils import escape

import numpy as np
import scipy

from ._version import __version__
from .bootstrap import FitContext, IntervalTable, bootstrap_intervals
from .btmle import AbilityEstimate, fit_mle
from .errors import ConsensusRankError, PipelineError
from .ingest import Dataset, ItemRegistry, Manifest, load_dataset, load_manifest
from .ranklasso import LassoFit, LassoPath, adaptive_weights, lasso_path
from .tally import ComparisonTally, build_tally, tally_summary
from .taux import TauXMatrix, tau_x_matrix

ARTIFACT_ORDER = (
    "mle.csv",
    "alasso.csv",
    "path.csv",
    "intervals_mle.csv",
    "intervals_alasso.csv",
    "taux_matrix.csv",
    "taux_pvalues.csv",
    "report.csv",
    "plot.svg",
    "plot_data.csv",
    "run_meta.json",
)

# Fixed plot geometry keeps the SVG byte-stable across runs.
_ROW_H = 14
_MARGIN = 40
_LABEL_W = 120
_WIDTH = 640
_PALETTE = (
    "#1f77b4", "#ff7f0e", "#2ca02c", "#d62728", "#9467bd", "#8c564b",
    "#e377c2", "#7f7f7f", "#bcbd22", "#17becf", "#aec7e8", "#ffbb78",
)


@dataclass(frozen=True)
class ReportRow:
    position: int
    item_id: str
    label: str
    percent_rated: float
    mle: float
    mle_lower: float
    mle_upper: float
    alasso: float
    alasso_lower: float
    alasso_upper: float
    cluster_id: int


@dataclass(frozen=True)
class ReportMeta:
    n_items: int
    n_rankings: int
    total_comparisons: int
    mean_comparisons_per_pair: float
    selected_lambda: float
    cluster_count: int
    seed: int


@dataclass(frozen=True)
class ConsensusReport:
    rows: tuple[ReportRow, ...]
    meta: ReportMeta


@dataclass(frozen=True)
class RunOptions:
    """Pipeline knobs; ``seed=None`` falls back to the manifest seed."""

    seed: int | None = None
    year_min: int | None = None
    replicates: int = 1000
    taux_replicates: int = 1000
    grid_points: int = 100
    alpha: float = 0.025
    fusion_tol: float = 1e-4
    w_max: float = 1e8
    lambda_max: float | None = None
    constraint_item: str | None = None


def _fmt(x: float) -> str:
    return format(float(x), ".6f")


def _write_csv(header: list[str], rows: list[list[object]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return out.getvalue()


def _ranks(mu: np.ndarray, item_ids: tuple[str, ...]) -> list[int]:
    """Competition order 1..n by decreasing ability, ties broken by item_id."""
    order = sorted(range(len(mu)), key=lambda k: (-mu[k], item_ids[k]))
    rank = [0] * len(mu)
    for pos, k in enumerate(order, start=1):
        rank[k] = pos
    return rank


def render_mle_csv(registry: ItemRegistry, mle: AbilityEstimate) -> str:
    ranks = _ranks(mle.mu, registry.item_ids)
    rows = [
        [item_id, _fmt(mle.mu[k]), ranks[k]]
        for k, item_id in enumerate(registry.item_ids)
    ]
    return _write_csv(["item_id", "mu", "rank"], rows)


def render_alasso_csv(registry: ItemRegistry, fit: LassoFit) -> str:
    ranks = _ranks(fit.mu, registry.item_ids)
    cluster_of = {k: c + 1 for c, members in enumerate(fit.clusters) for k in members}
    rows = [
        [item_id, _fmt(fit.mu[k]), cluster_of[k], ranks[k]]
        for k, item_id in enumerate(registry.item_ids)
    ]
    return _write_csv(["item_id", "mu", "cluster_id", "rank"], rows)


def render_path_csv(path: LassoPath) -> str:
    rows = [
        [format(fit.lam, ".8g"), fit.df, _fmt(fit.loglik), _fmt(fit.aic),
         1 if k == path.selected_index else 0]
        for k, fit in enumerate(path.fits)
    ]
    return _write_csv(["lambda", "df", "loglik", "aic", "selected"], rows)


def render_intervals_csv(registry: ItemRegistry, table: IntervalTable) -> str:
    rows = [
        [item_id, _fmt(table.point[k]), _fmt(table.lower[k]), _fmt(table.upper[k]),
         table.n_failed]
        for k, item_id in enumerate(registry.item_ids)
    ]
    return _write_csv(["item_id", "point", "lower", "upper", "failed_replicates"], rows)


def _render_taux(matrix: TauXMatrix, *, pvalues: bool) -> str:
    ids = matrix.ranking_ids
    rows = []
    for i, rid in enumerate(ids):
        row: list[object] = [rid]
        for j in range(len(ids)):
            cell = matrix.results[i][j]
            if cell is None or (pvalues and (i == j or cell.p_value is None)):
                row.append("")
            else:
                row.append(format(cell.p_value if pvalues else cell.tau_x, ".6g" if pvalues else ".6f"))
        rows.append(row)
    return _write_csv(["ranking_id", *ids], rows)


def render_taux_matrix_csv(matrix: TauXMatrix) -> str:
    return _render_taux(matrix, pvalues=False)


def render_taux_pvalues_csv(matrix: TauXMatrix) -> str:
    return _render_taux(matrix, pvalues=True)


def render_report_csv(report: ConsensusReport) -> str:
    rows = [
        [r.position, r.item_id, r.label, format(r.percent_rated, ".1f"),
         _fmt(r.mle), _fmt(r.mle_lower), _fmt(r.mle_upper),
         _fmt(r.alasso), _fmt(r.alasso_lower), _fmt(r.alasso_upper), r.cluster_id]
        for r in report.rows
    ]
    return _write_csv(
        ["position", "item_id", "label", "percent_rated", "mle", "mle_lower", "mle_upper",
         "alasso", "alasso_lower", "alasso_upper", "cluster_id"],
        rows,
    )


def _plot_rows(report: ConsensusReport) -> list[ReportRow]:
    return sorted(report.rows, key=lambda r: (-r.alasso, r.item_id))


def emit_cluster_plot(report: ConsensusReport) -> tuple[str, str]:
    """Dot-ladder SVG of ALASSO estimates with CI whiskers, one color per
    cluster, plus the plot-data CSV that reproduces it."""
    rows = _plot_rows(report)
    n = len(rows)
    height = 2 * _MARGIN + n * _ROW_H
    x0, x1 = _MARGIN + _LABEL_W, _WIDTH - _MARGIN
    lo = min(r.alasso_lower for r in rows)
    hi = max(r.alasso_upper for r in rows)
    if hi - lo < 1e-12:
        lo, hi = lo - 1.0, hi + 1.0
    span = hi - lo

    def sx(value: float) -> float:
        return x0 + (value - lo) / span * (x1 - x0)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_WIDTH}" '
        f'height="{height}" viewBox="0 0 {_WIDTH} {height}">',
        f'<rect x="0" y="0" width="{_WIDTH}" height="{height}" fill="#ffffff"/>',
    ]
    axis_y = _MARGIN + n * _ROW_H + 10
    parts.append(
        f'<line x1="{x0:.2f}" y1="{axis_y:.2f}" x2="{x1:.2f}" y2="{axis_y:.2f}" '
        'stroke="#333333" stroke-width="1"/>'
    )
    for tick in np.linspace(lo, hi, 5):
        tx = sx(float(tick))
        parts.append(
            f'<line x1="{tx:.2f}" y1="{axis_y:.2f}" x2="{tx:.2f}" y2="{axis_y + 4:.2f}" '
            'stroke="#333333" stroke-width="1"/>'
        )
        parts.append(
            f'<text x="{tx:.2f}" y="{axis_y + 14:.2f}" font-size="9" '
            f'font-family="monospace" text-anchor="middle">{format(float(tick), ".3g")}</text>'
        )
    for k, row in enumerate(rows):
        y = _MARGIN + k * _ROW_H + _ROW_H / 2
        color = _PALETTE[(row.cluster_id - 1) % len(_PALETTE)]
        parts.append(
            f'<text x="{_MARGIN:.2f}" y="{y + 3:.2f}" font-size="10" '
            f'font-family="monospace">{escape(row.item_id)}</text>'
        )
        parts.append(
            f'<line x1="{sx(row.alasso_lower):.2f}" y1="{y:.2f}" '
            f'x2="{sx(row.alasso_upper):.2f}" y2="{y:.2f}" '
            f'stroke="{color}" stroke-width="1.5"/>'
        )
        parts.append(f'<circle cx="{sx(row.alasso):.2f}" cy="{y:.2f}" r="3" fill="{color}"/>')
    parts.append("</svg>")
    svg = "\n".join(parts) + "\n"

    data_rows = [
        [r.item_id, _fmt(r.alasso), _fmt(r.alasso_lower), _fmt(r.alasso_upper), r.cluster_id]
        for r in rows
    ]
    plot_csv = _write_csv(["item_id", "mu", "lower", "upper", "cluster_id"], data_rows)
    return svg, plot_csv


def _single_list_taux(dataset: Dataset) -> tuple[str, str]:
    # Degenerate one-list dataset: the matrix is just the diagonal.
    rid = dataset.lists[0].ranking_id
    matrix = _write_csv(["ranking_id", rid], [[rid, format(1.0, ".6f")]])
    pvals = _write_csv(["ranking_id", rid], [[rid, ""]])
    return matrix, pvals


def build_artifacts(
    dataset: Dataset, seed: int, options: RunOptions = RunOptions()
) -> tuple[ConsensusReport, dict[str, str], dict[str, float]]:
    """Run every stage on an in-memory dataset.

    Returns the report, the artifact map (filename -> rendered content), and
    per-stage wall timings. Raises PipelineError carrying the artifacts
    rendered before the failing stage.
    """
    artifacts: dict[str, str] = {}
    timings: dict[str, float] = {}
    registry = dataset.registry
    stage = "tally"
    t0 = time.perf_counter()
    try:
        tally = build_tally(dataset)
        summary = tally_summary(tally)
        timings[stage] = time.perf_counter() - t0

        stage = "taux"
        t0 = time.perf_counter()
        if dataset.n_rankings >= 2:
            matrix = tau_x_matrix(
                list(dataset.lists), replicates=options.taux_replicates, seed=seed
            )
            artifacts["taux_matrix.csv"] = render_taux_matrix_csv(matrix)
            artifacts["taux_pvalues.csv"] = render_taux_pvalues_csv(matrix)
        else:
            artifacts["taux_matrix.csv"], artifacts["taux_pvalues.csv"] = _single_list_taux(dataset)
        timings[stage] = time.perf_counter() - t0

        stage = "mle"
        t0 = time.perf_counter()
        c_idx = registry.constraint_index
        if options.constraint_item is not None:
            c_idx = registry.index_of(options.constraint_item)
        mle = fit_mle(tally, c_idx)
        artifacts["mle.csv"] = render_mle_csv(registry, mle)
        timings[stage] = time.perf_counter() - t0

        stage = "path"
        t0 = time.perf_counter()
        weights = adaptive_weights(mle, options.w_max)
        path = lasso_path(
            tally, weights, c_idx,
            grid_points=options.grid_points,
            lambda_max=options.lambda_max,
            fusion_tol=options.fusion_tol,
        )
        selected = path.selected
        artifacts["path.csv"] = render_path_csv(path)
        artifacts["alasso.csv"] = render_alasso_csv(registry, selected)
        timings[stage] = time.perf_counter() - t0

        stage = "bootstrap"
        t0 = time.perf_counter()
        context = FitContext(
            tally=tally, mle=mle, weights=weights, lam=selected.lam, alasso_mu=selected.mu
        )
        ivl_mle = bootstrap_intervals(
            context, mle.mu, options.replicates, seed, "mle", options.alpha
        )
        ivl_alasso = bootstrap_intervals(
            context, selected.mu, options.replicates, seed, "alasso", options.alpha
        )
        artifacts["intervals_mle.csv"] = render_intervals_csv(registry, ivl_mle)
        artifacts["intervals_alasso.csv"] = render_intervals_csv(registry, ivl_alasso)
        timings[stage] = time.perf_counter() - t0

        stage = "report"
        t0 = time.perf_counter()
        cluster_of = {k: c + 1 for c, members in enumerate(selected.clusters) for k in members}
        n_lists = dataset.n_rankings
        rated_count = [
            sum(1 for r in dataset.lists if r.rates(item_id)) for item_id in registry.item_ids
        ]
        order = sorted(
            range(registry.n_items), key=lambda k: (-mle.mu[k], registry.item_ids[k])
        )
        rows = tuple(
            ReportRow(
                position=pos,
                item_id=registry.item_ids[k],
                label=registry.labels[k],
                percent_rated=100.0 * rated_count[k] / n_lists,
                mle=float(mle.mu[k]),
                mle_lower=float(ivl_mle.lower[k]),
                mle_upper=float(ivl_mle.upper[k]),
                alasso=float(selected.mu[k]),
                alasso_lower=float(ivl_alasso.lower[k]),
                alasso_upper=float(ivl_alasso.upper[k]),
                cluster_id=cluster_of[k],
            )
            for pos, k in enumerate(order, start=1)
        )
        meta = ReportMeta(
            n_items=registry.n_items,
            n_rankings=n_lists,
            total_comparisons=int(summary["total_comparisons"]),
            mean_comparisons_per_pair=float(summary["mean_comparisons_per_pair"]),
            selected_lambda=float(selected.lam),
            cluster_count=selected.df,
            seed=seed,
        )
        report = ConsensusReport(rows=rows, meta=meta)
        artifacts["report.csv"] = render_report_csv(report)
        artifacts["plot.svg"], artifacts["plot_data.csv"] = emit_cluster_plot(report)
        timings[stage] = time.perf_counter() - t0
    except ConsensusRankError as exc:
        raise PipelineError(stage, exc, dict(artifacts)) from exc

    artifacts["run_meta.json"] = render_run_meta(report, options, timings)
    ordered = {name: artifacts[name] for name in ARTIFACT_ORDER if name in artifacts}
    return report, ordered, timings


def _constraint_index(registry: ItemRegistry, constraint_item: str | None) -> int:
    if constraint_item is not None:
        return registry.index_of(constraint_item)
    return registry.constraint_index


def taux_artifacts(dataset: Dataset, *, replicates: int = 1000, seed: int = 0) -> dict[str, str]:
    """Agreement-stage artifacts: taux_matrix.csv and taux_pvalues.csv."""
    if dataset.n_rankings < 2:
        matrix_csv, pvals_csv = _single_list_taux(dataset)
        return {"taux_matrix.csv": matrix_csv, "taux_pvalues.csv": pvals_csv}
    matrix = tau_x_matrix(list(dataset.lists), replicates=replicates, seed=seed)
    return {
        "taux_matrix.csv": render_taux_matrix_csv(matrix),
        "taux_pvalues.csv": render_taux_pvalues_csv(matrix),
    }


def fit_artifacts(dataset: Dataset, *, constraint_item: str | None = None) -> dict[str, str]:
    """Likelihood-stage artifact: mle.csv."""
    tally = build_tally(dataset)
    mle = fit_mle(tally, _constraint_index(dataset.registry, constraint_item))
    return {"mle.csv": render_mle_csv(dataset.registry, mle)}


def path_artifacts(
    dataset: Dataset,
    *,
    grid_points: int = 100,
    fusion_tol: float = 1e-4,
    lambda_max: float | None = None,
    w_max: float = 1e8,
    constraint_item: str | None = None,
) -> dict[str, str]:
    """Penalty-path artifacts: path.csv plus alasso.csv at the AIC choice."""
    tally = build_tally(dataset)
    c_idx = _constraint_index(dataset.registry, constraint_item)
    mle = fit_mle(tally, c_idx)
    weights = adaptive_weights(mle, w_max)
    path = lasso_path(
        tally, weights, c_idx,
        grid_points=grid_points, lambda_max=lambda_max, fusion_tol=fusion_tol,
    )
    return {
        "path.csv": render_path_csv(path),
        "alasso.csv": render_alasso_csv(dataset.registry, path.selected),
    }


def bootstrap_artifacts(
    dataset: Dataset,
    *,
    target: str = "mle",
    replicates: int = 1000,
    seed: int = 0,
    alpha: float = 0.025,
    grid_points: int = 100,
    fusion_tol: float = 1e-4,
    w_max: float = 1e8,
    constraint_item: str | None = None,
) -> dict[str, str]:
    """Interval artifact intervals_<target>.csv.

    The alasso target reruns the path first to recover the selected penalty
    level and weights; replicates then refit at that fixed choice.
    """
    tally = build_tally(dataset)
    c_idx = _constraint_index(dataset.registry, constraint_item)
    mle = fit_mle(tally, c_idx)
    if target == "alasso":
        weights = adaptive_weights(mle, w_max)
        path = lasso_path(
            tally, weights, c_idx, grid_points=grid_points, fusion_tol=fusion_tol
        )
        selected = path.selected
        context = FitContext(
            tally=tally, mle=mle, weights=weights, lam=selected.lam, alasso_mu=selected.mu
        )
        point = selected.mu
    else:
        context = FitContext(tally=tally, mle=mle)
        point = mle.mu
    table = bootstrap_intervals(context, point, replicates, seed, target, alpha)
    return {f"intervals_{target}.csv": render_intervals_csv(dataset.registry, table)}


def render_run_meta(
    report: ConsensusReport, options: RunOptions, timings: dict[str, float]
) -> str:
    meta = {
        "seed": report.meta.seed,
        "n_items": report.meta.n_items,
        "n_rankings": report.meta.n_rankings,
        "total_comparisons": report.meta.total_comparisons,
        "mean_comparisons_per_pair": round(report.meta.mean_comparisons_per_pair, 6),
        "selected_lambda": report.meta.selected_lambda,
        "cluster_count": report.meta.cluster_count,
        "options": {
            "year_min": options.year_min,
            "replicates": options.replicates,
            "taux_replicates": options.taux_replicates,
            "grid_points": options.grid_points,
            "alpha": options.alpha,
            "fusion_tol": options.fusion_tol,
            "w_max": options.w_max,
        },
        "versions": {
            "consensus_rank": __version__,
            "python": platform.python_version(),
            "numpy": np.__version__,
            "scipy": scipy.__version__,
        },
        "timings_seconds": {k: round(v, 3) for k, v in timings.items()},
    }
    return json.dumps(meta, indent=2, sort_keys=True) + "\n"


def run_pipeline(
    manifest: str | Path | Manifest,
    out_dir: str | Path,
    options: RunOptions = RunOptions(),
) -> tuple[ConsensusReport, dict[str, str]]:
    """Execute the full pipeline from a manifest and write all artifacts.

    A year filter reruns the identical pipeline on the filtered lists. On a
    stage failure, artifacts rendered so far are written with a ``.partial``
    suffix and the PipelineError is re-raised.
    """
    if not isinstance(manifest, Manifest):
        manifest = load_manifest(manifest)
    seed = options.seed if options.seed is not None else manifest.seed
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    try:
        dataset = load_dataset(manifest, year_min=options.year_min)
    except ConsensusRankError as exc:
        raise PipelineError("ingest", exc, {}) from exc
    try:
        report, artifacts, _ = build_artifacts(dataset, seed, options)
    except PipelineError as exc:
        for name, content in exc.partial_artifacts.items():
            _write_text(out / f"{name}.partial", content)
        raise
    for name, content in artifacts.items():
        _write_text(out / name, content)
    return report, artifacts


def _write_text(path: Path, content: str) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(content)
