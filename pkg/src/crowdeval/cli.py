"""Command-line entry points.

Subcommands: prepare (background extraction), evaluate (sweep + scoring +
tables), correlate (distances vs subjective ratings), serve (HTTP backend
for the annotation tool).  Exit codes: 0 success, 2 rejected input, 1
unexpected runtime failure.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .compositor import RenderConfig, render_sequence
from .errors import CrowdEvalError, InvalidScene, ParseError
from .features import HvsParams, compare_videos, video_features
from .features.compare import CompareConfig, _flows, resolve_hvs
from .features.flow import FLOW_PROVIDERS, FlowConfig
from .geometry import SceneSpec
from .media import extract_background, load_image, load_sequence, save_image
from .report import (
    AGENT_LEVELS,
    SPEED_LEVELS,
    ResultsTable,
    SweepSpec,
    correlate,
    read_ratings_csv,
    read_results_csv,
)
from .sim import SimParams, run_simulation


@click.group()
def main():
    """Evaluate crowd simulators against source video."""


def _run(fn):
    """Shared error-to-exit-code mapping for all subcommands."""
    try:
        fn()
    except CrowdEvalError as exc:
        click.echo(f"error [{exc.code}]: {exc}", err=True)
        sys.exit(2)
    except Exception as exc:  # noqa: BLE001
        click.echo(f"runtime failure: {exc}", err=True)
        sys.exit(1)
    sys.exit(0)


@main.command()
@click.argument("frames_dir", type=click.Path(exists=True, file_okay=False))
@click.option("--fps", type=float, required=True, help="source frame rate")
@click.option("--out", type=click.Path(), default="background.png", show_default=True)
def prepare(frames_dir, fps, out):
    """Extract the mean background image from a frame directory."""

    def go():
        seq = load_sequence(frames_dir, fps)
        save_image(extract_background(seq), out)
        click.echo(f"wrote {out} ({seq.width}x{seq.height}, {len(seq)} frames)")

    _run(go)


@main.command()
@click.argument("scene_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("frames_dir", type=click.Path(exists=True, file_okay=False))
@click.argument("sweep_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default="results", show_default=True)
@click.option("--seed", type=int, default=None,
              help="override the sweep file's seed")
@click.option("--weber", type=click.Choice(["on", "off"]), default="on",
              show_default=True, help="perceived-motion magnitude transform")
@click.option("--window", type=int, default=64, show_default=True,
              help="feature window size in pixels")
@click.option("--flow", "flow_provider", default="horn-schunck", show_default=True,
              type=click.Choice(sorted(FLOW_PROVIDERS)))
def evaluate(scene_path, frames_dir, sweep_path, out, seed, weber, window,
             flow_provider):
    """Run the simulation sweep and score every cell against the source."""

    def go():
        scene = SceneSpec.from_json(Path(scene_path).read_text())
        grid = scene.validate()
        sweep = SweepSpec.from_json(Path(sweep_path).read_text())
        if seed is not None:
            sweep.seed = seed
        from .sim.engine import FORCE_MODELS

        for sim in sweep.simulators:
            if sim not in FORCE_MODELS:
                raise ParseError(f"unknown simulator {sim!r}")
        source = load_sequence(frames_dir, scene.source_fps)
        if (source.width, source.height) != (
            scene.calibration.image_width, scene.calibration.image_height
        ):
            raise InvalidScene(
                "source frames do not match the calibrated image size"
            )
        background = load_image(scene.background_path)

        cfg = CompareConfig(
            window_size=window, flow=FlowConfig(provider=flow_provider)
        )
        hvs = HvsParams(weber_enabled=(weber == "on"))
        source_flows = _flows(source, cfg)
        hvs = resolve_hvs(hvs, source_flows)
        source_features = video_features(source, hvs, cfg, flows=source_flows)

        render_cfg = RenderConfig(agent_height_world=scene.agent_height_world)
        duration_s = len(source) / scene.source_fps
        table = ResultsTable(sweep)
        for sim, agent_level, speed_level in sweep.cells():
            params = SimParams(
                n_agents=max(1, round(scene.estimated_agents
                                      * AGENT_LEVELS[agent_level])),
                speed_scale=SPEED_LEVELS[speed_level],
                seed=sweep.seed,
            )
            trace = run_simulation(grid, params, duration_s,
                                   output_fps=scene.source_fps, simulator=sim)
            composite = render_sequence(background, grid, trace, render_cfg,
                                        n_frames=len(source))
            scores = compare_videos(source, composite, hvs, cfg,
                                    source_features=source_features)
            table.add(sim, agent_level, speed_level, scores)
            click.echo(
                f"{sim:6s} {agent_level:5s} {speed_level:8s} "
                f"d_combined={scores['d_combined']:.6f}"
            )
        written = table.write_csv(out) + table.write_figures(out)
        click.echo(f"wrote {len(written)} files to {out}")

    _run(go)


@main.command(name="correlate")
@click.argument("results_path", type=click.Path(exists=True, dir_okay=False))
@click.argument("ratings_path", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", type=click.Path(), default=None,
              help="optional JSON output path (default: stdout only)")
def correlate_cmd(results_path, ratings_path, out):
    """Pearson correlation of each feature distance with subjective ratings."""

    def go():
        values = correlate(read_results_csv(results_path),
                           read_ratings_csv(ratings_path))
        for feature, r in values.items():
            click.echo(f"{feature}: {r:+.6f}")
        if out:
            Path(out).write_text(json.dumps(values, indent=2))

    _run(go)


@main.command()
@click.option("--port", type=int, default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--media-root", type=click.Path(file_okay=False), default=".",
              show_default=True, help="directory of background images")
def serve(port, host, media_root):
    """Run the annotation backend service."""

    def go():
        import uvicorn

        from .server import create_app

        uvicorn.run(create_app(media_root), host=host, port=port)

    _run(go)


if __name__ == "__main__":
    main()
