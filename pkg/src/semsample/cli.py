"""Command-line client for the sampling service.

Every command talks to the HTTP API: by default an in-process instance of the
service, or a remote one via ``--server``. Exit codes: 0 success, 1 usage
error, 2 data/format error, 3 internal failure. Timestamps appear only in the
``run.log`` sidecar next to generated artifacts, keeping all other outputs
byte-reproducible.
"""

from __future__ import annotations

import datetime
import json
import os
import sys
from pathlib import Path

import click

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_INTERNAL = 3

_KIND_CODES = {"usage": EXIT_USAGE, "data": EXIT_DATA, "internal": EXIT_INTERNAL}


class ServiceFailure(Exception):
    def __init__(self, kind: str, detail: str):
        super().__init__(detail)
        self.exit_code = _KIND_CODES.get(kind, EXIT_INTERNAL)


class ServiceClient:
    """Minimal JSON client; in-process unless a server URL is given."""

    def __init__(self, server: str | None):
        if server:
            import httpx

            self._client = httpx.Client(base_url=server, timeout=600.0)
        else:
            import warnings

            with warnings.catch_warnings():
                # fastapi's testclient import chatters on some version pairings
                warnings.simplefilter("ignore")
                from fastapi.testclient import TestClient

            from .service import create_app

            self._client = TestClient(create_app())

    def post(self, path: str, payload: dict) -> dict:
        response = self._client.post(path, json=payload)
        body = response.json()
        if response.status_code >= 400:
            if isinstance(body, dict) and "kind" in body:
                raise ServiceFailure(body["kind"], body["detail"])
            raise ServiceFailure("usage", json.dumps(body))
        return body


def _resolve(path: str) -> str:
    """Relative paths land under SEMSAMPLE_DATA_DIR when it is set."""
    root = os.environ.get("SEMSAMPLE_DATA_DIR")
    p = Path(path)
    if root and not p.is_absolute():
        return str(Path(root) / p)
    return str(p)


def _log_run(directory: str, command: str) -> None:
    stamp = datetime.datetime.now().isoformat(timespec="seconds")
    path = Path(directory) / "run.log"
    with open(path, "a") as fh:
        fh.write(f"{stamp} {command} {' '.join(sys.argv[2:])}\n")


@click.group()
@click.option("--server", default=None, help="Base URL of a running service; default is in-process.")
@click.pass_context
def cli(ctx, server):
    """Point-cloud down-sampling experiments."""
    ctx.obj = ServiceClient(server)


@cli.command()
@click.option("--out", required=True, help="Output directory for scene files.")
@click.option("--scenes", "count", type=int, required=True, help="Number of scenes.")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--points", type=int, default=4096, show_default=True)
@click.option("--objects", type=int, default=8, show_default=True)
@click.option("--fraction", type=float, default=0.044, show_default=True, help="Foreground fraction target.")
@click.option("--extent", type=float, default=80.0, show_default=True, help="Scene side length, meters.")
@click.pass_obj
def gen(client: ServiceClient, out, count, seed, points, objects, fraction, extent):
    """Generate seeded synthetic scenes plus a manifest."""
    if count < 1:
        raise click.UsageError("--scenes must be >= 1")
    out = _resolve(out)
    body = client.post(
        "/scenes/generate",
        {
            "out_dir": out,
            "count": count,
            "seed": seed,
            "n_points": points,
            "n_objects": objects,
            "foreground_fraction": fraction,
            "extent": extent,
        },
    )
    _log_run(out, "gen")
    click.echo(f"wrote {len(body['scene_paths'])} scenes, manifest {body['manifest_path']}")
    click.echo(f"config hash {body['config_hash']}")


@cli.command()
@click.option("--scenes", "scene_dir", required=True, help="Directory of training scenes.")
@click.option("--out", "model_out", required=True, help="Path for the trained scorer.")
@click.option("--hidden", type=int, default=64, show_default=True)
@click.option("--lr", type=float, default=50.0, show_default=True)
@click.option("--epochs", type=int, default=300, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--level-weight", type=float, default=0.01, show_default=True)
@click.option("--pos-weight", type=float, default=12.0, show_default=True, help="Positive class weight.")
@click.pass_obj
def train(client: ServiceClient, scene_dir, model_out, hidden, lr, epochs, seed, level_weight, pos_weight):
    """Train the foreground scorer on a scene directory."""
    body = client.post(
        "/train",
        {
            "scene_dir": _resolve(scene_dir),
            "model_out": _resolve(model_out),
            "hidden_width": hidden,
            "learning_rate": lr,
            "epochs": epochs,
            "seed": seed,
            "level_weight": level_weight,
            "positive_class_weight": pos_weight,
        },
    )
    click.echo(
        f"trained {body['model_path']}: loss {body['initial_loss']:.6f} -> {body['final_loss']:.6f} "
        f"over {body['epochs']} epochs"
    )


def _parse_scores_flag(scores: str | None) -> str | None:
    if scores is None:
        return None
    if scores == "oracle" or scores.startswith("model:"):
        return scores
    raise click.UsageError("--scores must be 'oracle' or 'model:<path>'")


@cli.command()
@click.option("--scene", "scene_path", default=None, help="Native scene file.")
@click.option("--kitti", "kitti_path", default=None, help="KITTI velodyne .bin file.")
@click.option("--method", type=click.Choice(["fps", "ffps", "topk", "sfps", "fusion"]), default="sfps", show_default=True)
@click.option("-m", "--budget", "m", type=int, required=True)
@click.option("--gamma", type=float, default=1.0, show_default=True)
@click.option("--lambda-c", type=float, default=1.0, show_default=True)
@click.option("--start-index", type=int, default=0, show_default=True)
@click.option("--scores", default=None, help="'oracle' or 'model:<path>' for score-driven methods.")
@click.option("--noise", type=float, default=0.25, show_default=True, help="Oracle score noise.")
@click.option("--indices-out", required=True, help="Output file, one selected index per line.")
@click.option("--diagnostics-out", default=None, help="Optional JSON diagnostics file.")
@click.pass_obj
def sample(client: ServiceClient, scene_path, kitti_path, method, m, gamma, lambda_c, start_index, scores, noise, indices_out, diagnostics_out):
    """Run one sampler on one scene or KITTI file."""
    if (scene_path is None) == (kitti_path is None):
        raise click.UsageError("give exactly one of --scene or --kitti")
    if method in ("topk", "sfps", "fusion") and scores is None:
        raise click.UsageError(f"--method {method} needs --scores oracle|model:<path>")
    body = client.post(
        "/sample",
        {
            "scene_path": _resolve(scene_path) if scene_path else None,
            "kitti_path": _resolve(kitti_path) if kitti_path else None,
            "method": method,
            "m": m,
            "gamma": gamma,
            "lambda_c": lambda_c,
            "start_index": start_index,
            "scores_from": _parse_scores_flag(scores),
            "oracle_noise": noise,
        },
    )
    indices_out = _resolve(indices_out)
    Path(indices_out).write_text("".join(f"{i}\n" for i in body["indices"]))
    if diagnostics_out:
        record = {
            "method": body["method"],
            "n_points": body["n_points"],
            "m": m,
            "gamma": gamma,
            "indices_file": indices_out,
            "context_indices": body["context_indices"],
            "per_step_weighted_distance": body["per_step_weighted_distance"],
        }
        Path(_resolve(diagnostics_out)).write_text(json.dumps(record, indent=2) + "\n")
    click.echo(f"wrote {len(body['indices'])} indices to {indices_out}")


@cli.command("eval")
@click.option("--scene", "scene_path", required=True)
@click.option("--indices", "indices_path", required=True, help="File with one index per line.")
@click.pass_obj
def eval_cmd(client: ServiceClient, scene_path, indices_path):
    """Compute metrics for saved indices against a scene's boxes."""
    body = client.post(
        "/eval",
        {"scene_path": _resolve(scene_path), "indices_path": _resolve(indices_path)},
    )
    click.echo(json.dumps(body, indent=2))


@cli.command()
@click.option("--scenes", "scene_dir", required=True, help="Benchmark scene directory.")
@click.option("--samplers", default="fps,sfps", show_default=True, help="Comma-separated sampler list.")
@click.option("--gammas", default="0,0.1,1,10,100", show_default=True, help="Comma-separated gamma sweep.")
@click.option("--budgets", default="4096,512,256", show_default=True, help="Comma-separated per-level budgets.")
@click.option("--scores", default="oracle", show_default=True, help="'oracle' or 'model:<path>'.")
@click.option("--noise", type=float, default=0.25, show_default=True, help="Oracle score noise.")
@click.option("--micro", is_flag=True, help="Micro-average recall over pooled boxes.")
@click.option("--csv", "csv_out", default=None, help="Write the aggregate table as CSV.")
@click.option("--per-scene", "per_scene_out", default=None, help="Write per-scene rows as CSV.")
@click.pass_obj
def bench(client: ServiceClient, scene_dir, samplers, gammas, budgets, scores, noise, micro, csv_out, per_scene_out):
    """Compare samplers across gammas and budgets; prints an aligned table."""
    try:
        gamma_list = [float(g) for g in gammas.split(",") if g]
        budget_list = [int(b) for b in budgets.split(",") if b]
    except ValueError as exc:
        raise click.UsageError(f"bad numeric list: {exc}")
    sampler_list = [s.strip() for s in samplers.split(",") if s.strip()]
    for s in sampler_list:
        if s not in ("fps", "ffps", "topk", "sfps", "fusion"):
            raise click.UsageError(f"unknown sampler {s!r}")
    if any(s in ("topk", "sfps", "fusion") for s in sampler_list):
        _parse_scores_flag(scores)
    body = client.post(
        "/bench",
        {
            "scene_dir": _resolve(scene_dir),
            "samplers": sampler_list,
            "gammas": gamma_list,
            "budgets": budget_list,
            "scores_from": scores,
            "oracle_noise": noise,
            "micro": micro,
            "csv_out": _resolve(csv_out) if csv_out else None,
            "per_scene_csv_out": _resolve(per_scene_out) if per_scene_out else None,
        },
    )
    from .metrics import SamplingReport, format_table

    reports = [
        SamplingReport(
            method=r["method"],
            budget=r["budget"],
            point_recall=r["point_recall"],
            foreground_rate=r["foreground_rate"],
            scenes=r["scenes"],
            per_scene=(),
            level=r["level"],
        )
        for r in body["rows"]
    ]
    click.echo(format_table(reports), nl=False)
    if body.get("csv_path"):
        click.echo(f"csv: {body['csv_path']}")


@cli.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8000, show_default=True)
def serve(host, port):
    """Run the HTTP service."""
    import uvicorn

    from .service import app

    uvicorn.run(app, host=host, port=port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
    except click.exceptions.Exit as exc:
        return int(exc.exit_code)
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.exceptions.Abort:
        return EXIT_USAGE
    except ServiceFailure as exc:
        click.echo(f"error: {exc}", err=True)
        return exc.exit_code
    except Exception as exc:  # local IO errors and genuine bugs
        from .errors import FormatError

        kind = EXIT_DATA if isinstance(exc, (FormatError, OSError)) else EXIT_INTERNAL
        click.echo(f"error: {exc}", err=True)
        return kind
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
