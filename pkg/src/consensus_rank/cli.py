"""Command line client for the pipeline and its stages.

Each subcommand loads a dataset manifest, runs one stage (or the whole
pipeline), and writes the stage's artifacts into the output directory. With
``--server URL`` the same work is delegated to a running service: the
manifest's files are inlined into the request and the returned artifacts are
written locally, so both modes produce identical outputs.

Exit codes: 0 success, 2 unusable input (parsing or validation), 3
disconnected comparison graph, 4 solver non-convergence or divergence, 5
unexpected or server-transport failure.
"""

from __future__ import annotations

from pathlib import Path
from typing import Callable

import click
import httpx

from ._version import __version__
from .errors import (
    AllReplicatesFailedError,
    ConsensusRankError,
    DisconnectedGraphError,
    DivergentEstimateError,
    EmptyPathError,
    NotConvergedError,
    PipelineError,
)
from .ingest import Manifest, load_dataset, load_manifest
from .report import (
    RunOptions,
    bootstrap_artifacts,
    fit_artifacts,
    path_artifacts,
    run_pipeline,
    taux_artifacts,
)

_EXIT_INPUT = 2
_EXIT_DISCONNECTED = 3
_EXIT_NUMERIC = 4
_EXIT_INTERNAL = 5

_CODE_BY_TYPE = {
    DisconnectedGraphError.__name__: _EXIT_DISCONNECTED,
    NotConvergedError.__name__: _EXIT_NUMERIC,
    DivergentEstimateError.__name__: _EXIT_NUMERIC,
    EmptyPathError.__name__: _EXIT_NUMERIC,
    AllReplicatesFailedError.__name__: _EXIT_NUMERIC,
}


class _ServerError(Exception):
    def __init__(self, message: str, type_name: str):
        super().__init__(message)
        self.type_name = type_name


def _code_for(type_name: str) -> int:
    return _CODE_BY_TYPE.get(type_name, _EXIT_INPUT)


def _guarded(fn: Callable[[], None]) -> None:
    try:
        fn()
    except PipelineError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(_code_for(type(exc.cause).__name__)) from None
    except ConsensusRankError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(_code_for(type(exc).__name__)) from None
    except _ServerError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(_code_for(exc.type_name)) from None
    except OSError as exc:
        click.echo(f"error: {exc}", err=True)
        raise SystemExit(_EXIT_INPUT) from None
    except httpx.HTTPError as exc:
        click.echo(f"error: server request failed: {exc}", err=True)
        raise SystemExit(_EXIT_INTERNAL) from None
    except (SystemExit, click.ClickException, click.Abort):
        raise
    except Exception as exc:  # pragma: no cover - last-resort mapping
        click.echo(f"internal error: {exc!r}", err=True)
        raise SystemExit(_EXIT_INTERNAL) from None


def _write_artifacts(out_dir: str, artifacts: dict[str, str]) -> None:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    for name, content in artifacts.items():
        with open(out / name, "w", encoding="utf-8", newline="") as fh:
            fh.write(content)


def _dataset_payload(manifest: Manifest, year_min: int | None = None) -> dict:
    with open(manifest.resolve(manifest.registry_path), encoding="utf-8-sig") as fh:
        registry_text = fh.read()
    rankings = []
    for entry in manifest.rankings:
        if year_min is not None and entry.year < year_min:
            continue
        with open(manifest.resolve(entry.path), encoding="utf-8-sig") as fh:
            csv_text = fh.read()
        rankings.append(
            {
                "ranking_id": entry.ranking_id,
                "year": entry.year,
                "direction": entry.direction,
                "csv_text": csv_text,
                "grade_order": list(entry.grade_order) if entry.grade_order else None,
            }
        )
    return {
        "registry": {
            "csv_text": registry_text,
            "constraint_item": manifest.constraint_item,
        },
        "rankings": rankings,
    }


def _post(server: str, route: str, body: dict) -> dict:
    response = httpx.post(f"{server.rstrip('/')}{route}", json=body, timeout=None)
    payload = response.json()
    if response.status_code != 200:
        raise _ServerError(
            payload.get("error", f"HTTP {response.status_code}"),
            payload.get("type", "unknown"),
        )
    return payload


_manifest_option = click.option(
    "--manifest", "manifest_path", required=True, type=click.Path(), help="Dataset manifest JSON."
)
_out_option = click.option(
    "--out", "out_dir", required=True, type=click.Path(), help="Directory for artifacts."
)
_server_option = click.option(
    "--server", default=None, metavar="URL", help="Delegate to a running service."
)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Consensus rankings from heterogeneous lists."""


@main.command()
@_manifest_option
@_out_option
@click.option("--seed", type=int, default=None, help="Override the manifest seed.")
@click.option("--year-min", type=int, default=None, help="Drop rankings older than this year.")
@click.option("--replicates", type=int, default=1000, show_default=True)
@click.option("--taux-replicates", type=int, default=1000, show_default=True)
@click.option("--grid-points", type=int, default=100, show_default=True)
@click.option("--alpha", type=float, default=0.025, show_default=True)
@_server_option
def run(
    manifest_path: str,
    out_dir: str,
    seed: int | None,
    year_min: int | None,
    replicates: int,
    taux_replicates: int,
    grid_points: int,
    alpha: float,
    server: str | None,
) -> None:
    """Run the full pipeline and write every artifact."""

    def work() -> None:
        manifest = load_manifest(manifest_path)
        if server is None:
            options = RunOptions(
                seed=seed,
                year_min=year_min,
                replicates=replicates,
                taux_replicates=taux_replicates,
                grid_points=grid_points,
                alpha=alpha,
            )
            report, artifacts = run_pipeline(manifest, out_dir, options)
            lam, clusters = report.meta.selected_lambda, report.meta.cluster_count
        else:
            body = {
                "dataset": _dataset_payload(manifest, year_min),
                "seed": seed if seed is not None else manifest.seed,
                "replicates": replicates,
                "taux_replicates": taux_replicates,
                "grid_points": grid_points,
                "alpha": alpha,
            }
            payload = _post(server, "/v1/run", body)
            artifacts = payload["artifacts"]
            _write_artifacts(out_dir, artifacts)
            lam, clusters = payload["meta"]["selected_lambda"], payload["meta"]["cluster_count"]
        click.echo(
            f"wrote {len(artifacts)} artifacts to {out_dir} "
            f"(lambda={lam:.6g}, clusters={clusters})"
        )

    _guarded(work)


@main.command()
@_manifest_option
@_out_option
@click.option("--replicates", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the manifest seed.")
@_server_option
def taux(
    manifest_path: str, out_dir: str, replicates: int, seed: int | None, server: str | None
) -> None:
    """Pairwise agreement matrix with permutation p-values."""

    def work() -> None:
        manifest = load_manifest(manifest_path)
        use_seed = seed if seed is not None else manifest.seed
        if server is None:
            dataset = load_dataset(manifest)
            artifacts = taux_artifacts(dataset, replicates=replicates, seed=use_seed)
        else:
            body = {
                "dataset": _dataset_payload(manifest),
                "replicates": replicates,
                "seed": use_seed,
            }
            artifacts = _post(server, "/v1/taux", body)["artifacts"]
        _write_artifacts(out_dir, artifacts)
        click.echo(f"wrote {', '.join(sorted(artifacts))} to {out_dir}")

    _guarded(work)


@main.command()
@_manifest_option
@_out_option
@_server_option
def fit(manifest_path: str, out_dir: str, server: str | None) -> None:
    """Maximum likelihood abilities (mle.csv)."""

    def work() -> None:
        manifest = load_manifest(manifest_path)
        if server is None:
            dataset = load_dataset(manifest)
            artifacts = fit_artifacts(dataset)
        else:
            artifacts = _post(server, "/v1/fit", {"dataset": _dataset_payload(manifest)})[
                "artifacts"
            ]
        _write_artifacts(out_dir, artifacts)
        click.echo(f"wrote {', '.join(sorted(artifacts))} to {out_dir}")

    _guarded(work)


@main.command()
@_manifest_option
@_out_option
@click.option("--grid-points", type=int, default=100, show_default=True)
@click.option("--fusion-tol", type=float, default=1e-4, show_default=True)
@click.option("--lambda-max", type=float, default=None, help="Skip the lambda_max search.")
@_server_option
def path(
    manifest_path: str,
    out_dir: str,
    grid_points: int,
    fusion_tol: float,
    lambda_max: float | None,
    server: str | None,
) -> None:
    """Penalty path with AIC selection (path.csv, alasso.csv)."""

    def work() -> None:
        manifest = load_manifest(manifest_path)
        if server is None:
            dataset = load_dataset(manifest)
            artifacts = path_artifacts(
                dataset,
                grid_points=grid_points,
                fusion_tol=fusion_tol,
                lambda_max=lambda_max,
            )
        else:
            body = {
                "dataset": _dataset_payload(manifest),
                "grid_points": grid_points,
                "fusion_tol": fusion_tol,
                "lambda_max": lambda_max,
            }
            artifacts = _post(server, "/v1/path", body)["artifacts"]
        _write_artifacts(out_dir, artifacts)
        click.echo(f"wrote {', '.join(sorted(artifacts))} to {out_dir}")

    _guarded(work)


@main.command()
@_manifest_option
@_out_option
@click.option("--replicates", type=int, default=1000, show_default=True)
@click.option("--seed", type=int, default=None, help="Override the manifest seed.")
@click.option("--alpha", type=float, default=0.025, show_default=True)
@click.option(
    "--target", type=click.Choice(["mle", "alasso"]), default="mle", show_default=True
)
@_server_option
def bootstrap(
    manifest_path: str,
    out_dir: str,
    replicates: int,
    seed: int | None,
    alpha: float,
    target: str,
    server: str | None,
) -> None:
    """Bias-corrected bootstrap intervals (intervals_<target>.csv)."""

    def work() -> None:
        manifest = load_manifest(manifest_path)
        use_seed = seed if seed is not None else manifest.seed
        if server is None:
            dataset = load_dataset(manifest)
            artifacts = bootstrap_artifacts(
                dataset, target=target, replicates=replicates, seed=use_seed, alpha=alpha
            )
        else:
            body = {
                "dataset": _dataset_payload(manifest),
                "target": target,
                "replicates": replicates,
                "seed": use_seed,
                "alpha": alpha,
            }
            artifacts = _post(server, "/v1/bootstrap", body)["artifacts"]
        _write_artifacts(out_dir, artifacts)
        click.echo(f"wrote {', '.join(sorted(artifacts))} to {out_dir}")

    _guarded(work)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host: str, port: int) -> None:
    """Start the HTTP service."""
    import uvicorn

    from .service import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
