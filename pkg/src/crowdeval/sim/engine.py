"""Simulation driver: spawning, stepping, trace sampling.

Runs one of the pluggable steering models at a fixed internal frame rate
(default 50/s) and samples agent states at the output frame rate of the
source video.  Everything is driven by one seeded generator, so a run is
fully determined by (scene, params, duration, simulator).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from ..errors import InvalidScene, NoPath
from ..geometry import ENTRANCE, OBSTACLE, PerspectiveGrid
from .boids import boids_force
from .forces import integrate, net_force
from .pathing import plan_path


@dataclass
class SimParams:
    n_agents: int = 8
    speed_scale: float = 1.0
    sim_fps: float = 50.0
    seed: int = 0
    k_sep: float = 1.0
    k_obs: float = 1.0
    k_pred: float = 1.0
    neighborhood_radius: float = 2.0
    tau: float = 0.5
    base_desired_speed: float = 1.4   # world units/s, nominal walking pace
    v_cap_factor: float = 1.5
    waypoint_radius: float = 0.5
    agent_radius: float = 0.25

    def __post_init__(self):
        if self.n_agents < 0:
            raise ValueError("n_agents must be >= 0")
        if self.sim_fps <= 0:
            raise ValueError("sim_fps must be positive")
        if min(self.k_sep, self.k_obs, self.k_pred) < 0:
            raise ValueError("force gains must be >= 0")


@dataclass
class AgentState:
    id: int
    position: np.ndarray
    velocity: np.ndarray
    goal: np.ndarray
    final_destination: np.ndarray
    desired_speed: float
    radius: float
    waypoints: list = field(default_factory=list)
    waypoint_idx: int = 0

    def advance_waypoint(self, waypoint_radius):
        while (
            self.waypoint_idx < len(self.waypoints) - 1
            and np.linalg.norm(self.position - self.goal) < waypoint_radius
        ):
            self.waypoint_idx += 1
            self.goal = self.waypoints[self.waypoint_idx]

    @property
    def heading(self) -> float:
        v = self.velocity
        if np.linalg.norm(v) < 1e-9:
            v = self.goal - self.position
        return float(np.arctan2(v[1], v[0]))

    def arrived(self, waypoint_radius) -> bool:
        return np.linalg.norm(self.position - self.final_destination) < waypoint_radius


@dataclass
class SimulationTrace:
    frames: list           # per frame: list of (id, x, y, heading)
    output_fps: float

    @property
    def duration_frames(self):
        return len(self.frames)

    def to_jsonl(self) -> str:
        lines = []
        for idx, agents in enumerate(self.frames):
            rec = {
                "t": round(idx / self.output_fps, 6),
                "agents": [
                    {"id": a[0], "x": a[1], "y": a[2], "heading": a[3]} for a in agents
                ],
            }
            lines.append(json.dumps(rec))
        return "\n".join(lines) + ("\n" if lines else "")

    @classmethod
    def from_jsonl(cls, text: str, output_fps: float) -> "SimulationTrace":
        frames = []
        for line in text.splitlines():
            if not line.strip():
                continue
            rec = json.loads(line)
            frames.append(
                [(a["id"], a["x"], a["y"], a["heading"]) for a in rec["agents"]]
            )
        return cls(frames=frames, output_fps=output_fps)


FORCE_MODELS = {"csec": net_force, "boids": boids_force}


class _Spawner:
    """Keeps the population at the target level with staggered seeded entries."""

    def __init__(self, grid: PerspectiveGrid, params: SimParams, duration_s, rng):
        self.grid = grid
        self.params = params
        self.rng = rng
        self.entrances = list(zip(*np.nonzero(grid.labels == ENTRANCE)))
        if not self.entrances:
            raise InvalidScene("scene has no entrance cell")
        self.mean_gap = duration_s / max(params.n_agents, 1)
        self.next_time = 0.0
        self.next_id = 0

    def _cell_point(self, cell):
        r, c = cell
        jitter = self.rng.uniform(0.25, 0.75, 2)
        return np.array([c + jitter[0], r + jitter[1]])

    def try_spawn(self, t):
        if self.next_time > t:
            return None
        self.next_time = t + self.rng.exponential(self.mean_gap)
        start = self.entrances[self.rng.integers(len(self.entrances))]
        others = [e for e in self.entrances if e != start] or self.entrances
        dest = others[self.rng.integers(len(others))]
        try:
            path = plan_path(self.grid, start, dest)
        except NoPath:
            return None
        waypoints = [np.array([c + 0.5, r + 0.5]) for r, c in path]
        pos = self._cell_point(start)
        final = self._cell_point(dest)
        waypoints[0] = pos
        waypoints[-1] = final
        speed = self.params.base_desired_speed * self.params.speed_scale
        speed *= self.rng.uniform(0.9, 1.1)
        agent = AgentState(
            id=self.next_id,
            position=pos,
            velocity=np.zeros(2),
            goal=waypoints[min(1, len(waypoints) - 1)].copy(),
            final_destination=final,
            desired_speed=speed,
            radius=self.params.agent_radius,
            waypoints=waypoints,
            waypoint_idx=min(1, len(waypoints) - 1),
        )
        self.next_id += 1
        return agent


def run_simulation(
    grid: PerspectiveGrid,
    params: SimParams,
    duration_s: float,
    output_fps: float,
    simulator: str = "csec",
) -> SimulationTrace:
    """Simulate agents over the annotated grid and sample a per-frame trace.

    The internal step rate is params.sim_fps; the trace holds one entry per
    output frame at the source video frame rate.
    """
    if simulator not in FORCE_MODELS:
        raise ValueError(f"unknown simulator {simulator!r}")
    grid.require_annotated()
    force_fn = FORCE_MODELS[simulator]
    rng = np.random.default_rng(params.seed)
    dt = 1.0 / params.sim_fps
    n_out = int(round(duration_s * output_fps))
    obstacle_cells = np.argwhere(grid.labels == OBSTACLE)

    spawner = _Spawner(grid, params, duration_s, rng)
    agents: list[AgentState] = []
    frames = []
    next_out = 0
    step = 0
    margin = 1e-3
    while next_out < n_out:
        t = step * dt
        while len(agents) < params.n_agents:
            agent = spawner.try_spawn(t)
            if agent is None:
                break
            agents.append(agent)

        # sample before stepping so frame k reflects time k/output_fps
        while next_out < n_out and next_out / output_fps <= t + 1e-9:
            frames.append(
                [(a.id, float(a.position[0]), float(a.position[1]), a.heading)
                 for a in agents]
            )
            next_out += 1

        snapshot = list(agents)
        for agent in snapshot:
            neighbors = [
                b for b in snapshot
                if b.id != agent.id
                and np.linalg.norm(b.position - agent.position) <= params.neighborhood_radius
            ]
            force = force_fn(agent, neighbors, obstacle_cells, params)
            integrate(agent, force, params, dt)
            np.clip(agent.position, margin,
                    [grid.cols - margin, grid.rows - margin], out=agent.position)
        agents = [a for a in agents if not a.arrived(params.waypoint_radius)]
        step += 1
    return SimulationTrace(frames=frames, output_fps=output_fps)
