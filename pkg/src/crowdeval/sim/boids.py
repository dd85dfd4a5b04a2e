"""Classic flocking steering, used as the comparison simulator.

Separation, alignment and cohesion within the neighbourhood, plus the same
goal-relaxation and obstacle terms as the hybrid model so agents still
traverse the scene and respect walls.
"""

from __future__ import annotations

import numpy as np

from .forces import EPS, _unit, goal_force, obstacle_force

K_ALIGN = 1.2
K_COHESION = 0.8


def boids_force(agent, neighbors, obstacle_cells, params):
    sep = np.zeros(2)
    avg_vel = np.zeros(2)
    center = np.zeros(2)
    count = 0
    for other in neighbors:
        offset = agent.position - other.position
        d = np.linalg.norm(offset)
        if d > params.neighborhood_radius:
            continue
        count += 1
        avg_vel += other.velocity
        center += other.position
        if d > EPS:
            sep += params.k_sep / (d * d + EPS) * (offset / d)
    force = goal_force(agent, params) + sep + obstacle_force(agent, obstacle_cells, params)
    if count:
        force += K_ALIGN * (avg_vel / count - agent.velocity)
        force += K_COHESION * _unit(center / count - agent.position)
    return force
