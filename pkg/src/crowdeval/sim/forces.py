"""Force terms for the hybrid steering model.

An agent's net force combines a goal-relaxation term with separation,
obstacle-avoidance and predictive collision-avoidance contributions from
entities inside its neighbourhood.  Forces act on velocity; speed is capped
at a multiple of the agent's desired speed.
"""

from __future__ import annotations

import numpy as np

EPS = 1e-6
PREDICT_HORIZON_S = 3.0


def _unit(v):
    n = np.linalg.norm(v)
    return v / n if n > EPS else np.zeros(2)


def _perp_left(v):
    return np.array([-v[1], v[0]])


def goal_force(agent, params):
    """Relaxation toward moving at desired speed along the current waypoint.

    Vanishes when the agent already moves at desired speed straight at its
    goal, so undisturbed agents hold a steady velocity.
    """
    desired = agent.desired_speed * _unit(agent.goal - agent.position)
    return (desired - agent.velocity) / params.tau


def separation_force(agent, neighbors, params):
    total = np.zeros(2)
    for other in neighbors:
        offset = agent.position - other.position
        d = np.linalg.norm(offset)
        if d < EPS or d > params.neighborhood_radius:
            continue
        total += params.k_sep / (d * d + EPS) * (offset / d)
    return total


def obstacle_force(agent, obstacle_cells, params):
    """Repulsion from the closest boundary point of each nearby obstacle cell.

    obstacle_cells is an (N, 2) array of (row, col) indices; each cell spans
    the world rectangle [col, col+1] x [row, row+1].
    """
    if len(obstacle_cells) == 0:
        return np.zeros(2)
    p = agent.position
    lo = obstacle_cells[:, ::-1].astype(float)          # (x, y) of cell min corner
    closest = np.clip(p, lo, lo + 1.0)
    offsets = p - closest
    dists = np.linalg.norm(offsets, axis=1)
    mask = (dists > EPS) & (dists <= params.neighborhood_radius)
    total = np.zeros(2)
    for off, d in zip(offsets[mask], dists[mask]):
        total += params.k_obs / (d * d + EPS) * (off / d)
    # agent exactly on a boundary point: push toward current goal side
    inside = dists <= EPS
    if np.any(mask | inside) and np.all(dists[mask | inside] <= EPS):
        total += params.k_obs * _unit(agent.goal - agent.position)
    return total


def predictive_force(agent, neighbors, params):
    """Steer perpendicular to the relative velocity of any neighbour whose
    extrapolated closest approach comes within the combined radii."""
    total = np.zeros(2)
    for other in neighbors:
        rel_p = other.position - agent.position
        if np.linalg.norm(rel_p) > params.neighborhood_radius:
            continue
        rel_v = other.velocity - agent.velocity
        speed2 = float(np.dot(rel_v, rel_v))
        if speed2 < EPS:
            continue
        ttca = -float(np.dot(rel_p, rel_v)) / speed2
        if ttca <= 0 or ttca > PREDICT_HORIZON_S:
            continue
        min_offset = rel_p + rel_v * ttca
        if np.linalg.norm(min_offset) >= agent.radius + other.radius + 0.1:
            continue
        side = rel_p[0] * rel_v[1] - rel_p[1] * rel_v[0]
        if abs(side) > EPS:
            perp = np.sign(side) * _perp_left(_unit(rel_v))
        else:
            # exactly head-on: both agents break to their own left
            perp = _perp_left(_unit(agent.velocity))
            if not perp.any():
                perp = _perp_left(_unit(agent.goal - agent.position))
        total += params.k_pred / (ttca + EPS) * perp
    return total


def net_force(agent, neighbors, obstacle_cells, params):
    return (
        goal_force(agent, params)
        + separation_force(agent, neighbors, params)
        + obstacle_force(agent, obstacle_cells, params)
        + predictive_force(agent, neighbors, params)
    )


def integrate(agent, force, params, dt):
    """Apply the net force over dt, cap speed, advance, update waypoint."""
    velocity = agent.velocity + force * dt
    v_cap = params.v_cap_factor * agent.desired_speed
    speed = np.linalg.norm(velocity)
    if speed > v_cap:
        velocity = velocity * (v_cap / speed)
    agent.velocity = velocity
    agent.position = agent.position + velocity * dt
    agent.advance_waypoint(params.waypoint_radius)
    return agent


def step_forces(agent, neighbors, obstacle_cells, params, dt):
    """One integration step of the hybrid force model for a single agent."""
    return integrate(agent, net_force(agent, neighbors, obstacle_cells, params), params, dt)
