"""Result tables and their serialized forms.

A sweep produces one distance record per (simulator, agent level, speed
level) cell.  Tables are written as CSV with agent levels as rows and
speed levels as columns, one file per simulator per feature plus a
combined file, and rendered as annotated heatmap figures next to them.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass, field
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import ParseError, ShapeMismatch

AGENT_LEVELS = {"Few": 0.5, "Same": 1.0, "Many": 2.0}
SPEED_LEVELS = {"VerySlow": 0.25, "Slow": 0.5, "Same": 1.0, "Fast": 1.5}
FEATURES = ("d_hoof", "d_h2d", "d_track", "d_combined")


@dataclass
class SweepSpec:
    """Which sweep cells to evaluate: named level lists plus simulators."""

    agent_levels: tuple = ("Few", "Same", "Many")
    speed_levels: tuple = ("VerySlow", "Slow", "Same", "Fast")
    simulators: tuple = ("csec", "boids")
    seed: int = 0

    def __post_init__(self):
        if not self.agent_levels or not self.speed_levels or not self.simulators:
            raise ParseError("sweep level lists must be non-empty")
        for name in self.agent_levels:
            if name not in AGENT_LEVELS:
                raise ParseError(f"unknown agent level {name!r}")
        for name in self.speed_levels:
            if name not in SPEED_LEVELS:
                raise ParseError(f"unknown speed level {name!r}")

    @classmethod
    def from_json(cls, text: str) -> "SweepSpec":
        try:
            doc = json.loads(text)
            return cls(
                agent_levels=tuple(doc.get("agent_levels", ("Few", "Same", "Many"))),
                speed_levels=tuple(
                    doc.get("speed_levels", ("VerySlow", "Slow", "Same", "Fast"))
                ),
                simulators=tuple(doc.get("simulators", ("csec", "boids"))),
                seed=int(doc.get("seed", 0)),
            )
        except (TypeError, ValueError, json.JSONDecodeError) as exc:
            raise ParseError(f"malformed sweep document: {exc}") from exc

    def cells(self):
        for sim in self.simulators:
            for agent in self.agent_levels:
                for speed in self.speed_levels:
                    yield sim, agent, speed


@dataclass
class ResultsTable:
    sweep: SweepSpec
    records: dict = field(default_factory=dict)  # (sim, agent, speed) -> scores

    def add(self, sim, agent, speed, scores: dict):
        self.records[(sim, agent, speed)] = {k: float(scores[k]) for k in FEATURES}

    def require_complete(self):
        missing = [c for c in self.sweep.cells() if c not in self.records]
        if missing:
            raise ShapeMismatch(f"sweep has holes: {missing}")

    def matrix(self, sim, feature) -> np.ndarray:
        """Values as rows = agent levels, columns = speed levels."""
        return np.array(
            [
                [self.records[(sim, a, s)][feature] for s in self.sweep.speed_levels]
                for a in self.sweep.agent_levels
            ]
        )

    def ranks(self, sim, feature) -> np.ndarray:
        """Per-cell rank over the simulator's table, 1 = closest to source."""
        m = self.matrix(sim, feature)
        order = np.argsort(m.ravel(), kind="stable")
        ranks = np.empty(m.size, dtype=int)
        ranks[order] = np.arange(1, m.size + 1)
        return ranks.reshape(m.shape)

    def mean_combined(self, sim) -> float:
        return float(self.matrix(sim, "d_combined").mean())

    # ---- serialization -------------------------------------------------

    def _level_csv(self, values, fmt):
        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["agents/speed", *self.sweep.speed_levels])
        for name, row in zip(self.sweep.agent_levels, values):
            writer.writerow([name, *[fmt(v) for v in row]])
        return buf.getvalue()

    def write_csv(self, out_dir) -> list:
        """One values file and one rank file per simulator per feature,
        plus a long-format results.csv keyed by cell."""
        self.require_complete()
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []

        def emit(name, text):
            path = out_dir / name
            path.write_text(text)
            written.append(path)

        for sim in self.sweep.simulators:
            for feature in FEATURES:
                emit(
                    f"{sim}_{feature}.csv",
                    self._level_csv(self.matrix(sim, feature), lambda v: f"{v:.9f}"),
                )
                emit(
                    f"{sim}_{feature}_rank.csv",
                    self._level_csv(self.ranks(sim, feature), str),
                )

        buf = io.StringIO(newline="")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["simulator", "agent_level", "speed_level", *FEATURES])
        for sim, agent, speed in self.sweep.cells():
            rec = self.records[(sim, agent, speed)]
            writer.writerow([sim, agent, speed, *[f"{rec[f]:.9f}" for f in FEATURES]])
        emit("results.csv", buf.getvalue())
        emit("results.json", self.to_json())
        return written

    def to_json(self) -> str:
        doc = {
            "sweep": {
                "agent_levels": list(self.sweep.agent_levels),
                "speed_levels": list(self.sweep.speed_levels),
                "simulators": list(self.sweep.simulators),
                "seed": self.sweep.seed,
            },
            "cells": [
                {"simulator": sim, "agent_level": a, "speed_level": s,
                 **self.records[(sim, a, s)]}
                for sim, a, s in self.sweep.cells()
            ],
        }
        return json.dumps(doc, indent=2)

    def write_figures(self, out_dir) -> list:
        """Annotated heatmaps mirroring the CSV tables, one PNG per table."""
        self.require_complete()
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        written = []
        for sim in self.sweep.simulators:
            for feature in FEATURES:
                m = self.matrix(sim, feature)
                ranks = self.ranks(sim, feature)
                fig, ax = plt.subplots(figsize=(6, 4))
                im = ax.imshow(m, cmap="viridis_r")
                ax.set_xticks(range(len(self.sweep.speed_levels)),
                              self.sweep.speed_levels)
                ax.set_yticks(range(len(self.sweep.agent_levels)),
                              self.sweep.agent_levels)
                ax.set_xlabel("speed level")
                ax.set_ylabel("agent level")
                ax.set_title(f"{sim}: {feature}")
                for (r, c), v in np.ndenumerate(m):
                    ax.text(c, r, f"{v:.3f}\n#{ranks[r, c]}",
                            ha="center", va="center", fontsize=8, color="white")
                fig.colorbar(im, ax=ax)
                path = out_dir / f"{sim}_{feature}.png"
                fig.savefig(path, dpi=100)
                plt.close(fig)
                written.append(path)
        return written


def read_results_csv(path) -> list:
    """Rows of the long-format results.csv as dicts with float distances."""
    rows = []
    try:
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                rows.append(
                    {
                        "simulator": rec["simulator"],
                        "agent_level": rec["agent_level"],
                        "speed_level": rec["speed_level"],
                        **{f: float(rec[f]) for f in FEATURES},
                    }
                )
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed results file {path}: {exc}") from exc
    if not rows:
        raise ParseError(f"no result rows in {path}")
    return rows


def read_ratings_csv(path) -> dict:
    """Subjective ratings keyed by (simulator, agent_level, speed_level)."""
    ratings = {}
    try:
        with open(path, newline="") as fh:
            for rec in csv.DictReader(fh):
                key = (rec["simulator"], rec["agent_level"], rec["speed_level"])
                ratings[key] = float(rec["rating"])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed ratings file {path}: {exc}") from exc
    if not ratings:
        raise ParseError(f"no rating rows in {path}")
    return ratings


def correlate(results_rows, ratings) -> dict:
    """Pearson correlation between each feature distance and the ratings.

    Only cells present in both inputs participate; raises ParseError when
    fewer than two cells overlap.
    """
    from .features import pearson

    keys = [
        (r["simulator"], r["agent_level"], r["speed_level"])
        for r in results_rows
        if (r["simulator"], r["agent_level"], r["speed_level"]) in ratings
    ]
    if len(keys) < 2:
        raise ParseError("need at least two overlapping cells to correlate")
    by_key = {
        (r["simulator"], r["agent_level"], r["speed_level"]): r for r in results_rows
    }
    ys = [ratings[k] for k in keys]
    return {
        feature: pearson([by_key[k][feature] for k in keys], ys)
        for feature in FEATURES
    }
