"""Epidemic broadcast over billiard / random-walk mobile nodes.

Nodes move at constant speed in a D-dimensional box with specular wall
reflection, redrawing an isotropic direction at Poisson rate tau.  Two
nodes within the radio range exchange the beacon instantaneously, and a
flood infects the whole connected component of the proximity graph.

Each node owns an independent RNG stream, so trajectories are invariant
under time-step refinement: only contact detection depends on dt.
"""

import math
from dataclasses import dataclass, field
from typing import List, Optional

import numpy as np

CENTER = "center"
UNIFORM_RANDOM = "uniform"


class ConfigError(ValueError):
    """A simulation configuration violates its invariants."""


@dataclass(frozen=True)
class SimConfig:
    d: int
    box_length: float
    n: int
    v: float
    tau: float
    radio_range: float = 1.0
    dt: float = 0.05
    t_max: float = 1000.0
    seed: int = 0
    source_placement: str = CENTER

    def __post_init__(self):
        problems = []
        if self.d not in (1, 2, 3):
            problems.append(f"d must be 1, 2 or 3, got {self.d}")
        if self.radio_range <= 0.0:
            problems.append(f"radio_range must be > 0, got {self.radio_range}")
        elif self.box_length <= 2.0 * self.radio_range:
            problems.append(
                f"box_length must exceed 2*radio_range, got L={self.box_length}"
            )
        if self.n < 2:
            problems.append(f"n must be >= 2, got {self.n}")
        if self.v <= 0.0:
            problems.append(f"v must be > 0, got {self.v}")
        if self.tau < 0.0:
            problems.append(f"tau must be >= 0, got {self.tau}")
        if self.dt <= 0.0:
            problems.append(f"dt must be > 0, got {self.dt}")
        elif self.radio_range > 0.0 and self.v > 0.0 and (
            self.dt > 0.1 * self.radio_range / self.v + 1e-15
        ):
            problems.append(
                f"dt={self.dt} exceeds the contact-miss guard "
                f"0.1*radio_range/v = {0.1 * self.radio_range / self.v}"
            )
        if self.t_max <= 0.0:
            problems.append(f"t_max must be > 0, got {self.t_max}")
        if self.source_placement not in (CENTER, UNIFORM_RANDOM):
            problems.append(
                f"source_placement must be {CENTER!r} or {UNIFORM_RANDOM!r}, "
                f"got {self.source_placement!r}"
            )
        if problems:
            raise ConfigError("; ".join(problems))


@dataclass(frozen=True)
class InfectionRecord:
    """Per-node first reception: when, and how far from the source origin."""

    node_id: int
    infection_time: float
    distance: float


@dataclass
class World:
    """Full mutable simulation state; confined to one thread."""

    config: SimConfig
    time: float
    positions: np.ndarray        # (n, d), componentwise in [0, L]
    directions: np.ndarray       # (n, d), unit vectors
    next_turn_time: np.ndarray   # (n,), +inf when tau = 0
    infected: np.ndarray         # (n,) bool, monotone
    infection_time: np.ndarray   # (n,), nan until infected
    turn_count: np.ndarray       # (n,) int, diagnostics
    source_index: int
    source_origin: np.ndarray    # source position at t = 0
    node_rngs: List[np.random.Generator] = field(repr=False, default_factory=list)


def _isotropic_direction(rng, d):
    if d == 1:
        return np.array([1.0 if rng.random() < 0.5 else -1.0])
    if d == 2:
        angle = rng.uniform(0.0, 2.0 * math.pi)
        return np.array([math.cos(angle), math.sin(angle)])
    while True:
        vec = rng.normal(size=3)
        norm = np.linalg.norm(vec)
        if norm > 1e-12:
            return vec / norm


def _turn_increment(rng, tau):
    return rng.exponential(1.0 / tau) if tau > 0.0 else math.inf


def init_world(config):
    """Build the t = 0 world: uniform positions, isotropic directions,
    exponential turn schedule, source infected at time 0.  Deterministic
    given the seed."""
    n, d, length = config.n, config.d, config.box_length
    root = np.random.SeedSequence(config.seed)
    children = root.spawn(n + 1)
    placement_rng = np.random.Generator(np.random.PCG64(children[0]))
    node_rngs = [np.random.Generator(np.random.PCG64(c)) for c in children[1:]]

    positions = placement_rng.uniform(0.0, length, size=(n, d))
    if config.source_placement == CENTER:
        positions[0] = 0.5 * length

    directions = np.empty((n, d))
    next_turn = np.empty(n)
    for i, rng in enumerate(node_rngs):
        directions[i] = _isotropic_direction(rng, d)
        next_turn[i] = _turn_increment(rng, config.tau)

    infected = np.zeros(n, dtype=bool)
    infected[0] = True
    infection_time = np.full(n, math.nan)
    infection_time[0] = 0.0

    return World(
        config=config,
        time=0.0,
        positions=positions,
        directions=directions,
        next_turn_time=next_turn,
        infected=infected,
        infection_time=infection_time,
        turn_count=np.zeros(n, dtype=np.int64),
        source_index=0,
        source_origin=positions[0].copy(),
        node_rngs=node_rngs,
    )


def fold_positions(positions, directions, length):
    """Specular reflection: fold raw positions into [0, L], flipping the
    matching direction components on odd-numbered mirror images.  Each
    axis folds independently (corner bounces compose)."""
    period = 2.0 * length
    folded = np.mod(positions, period)
    over = folded > length
    if over.any():
        folded[over] = period - folded[over]
        directions[over] = -directions[over]
    np.copyto(positions, folded)


def _move_node(world, i, duration):
    length = world.config.box_length
    world.positions[i] += world.directions[i] * (world.config.v * duration)
    pos = world.positions[i : i + 1]
    dirn = world.directions[i : i + 1]
    fold_positions(pos, dirn, length)


def advance(world):
    """Advance every node by one dt: straight motion with wall reflection,
    with Poisson direction changes applied at their exact scheduled times
    (any number per step).  Mutates and returns the world."""
    config = world.config
    dt = config.dt
    if world.time + dt > config.t_max + 1e-9 * max(1.0, config.t_max):
        raise ConfigError("advance would step past t_max")
    end = world.time + dt

    turning = np.flatnonzero(world.next_turn_time < end)
    quiet = np.ones(config.n, dtype=bool)
    quiet[turning] = False

    # bulk path: nodes with no turn this step (fancy indexing copies,
    # so fold through temporaries and write back)
    if quiet.any():
        pos = world.positions[quiet] + world.directions[quiet] * (config.v * dt)
        dirn = world.directions[quiet]
        fold_positions(pos, dirn, config.box_length)
        world.positions[quiet] = pos
        world.directions[quiet] = dirn

    for i in turning:
        t_node = world.time
        rng = world.node_rngs[i]
        while world.next_turn_time[i] < end:
            _move_node(world, i, world.next_turn_time[i] - t_node)
            t_node = world.next_turn_time[i]
            world.directions[i] = _isotropic_direction(rng, config.d)
            world.next_turn_time[i] = t_node + _turn_increment(rng, config.tau)
            world.turn_count[i] += 1
        _move_node(world, i, end - t_node)

    world.time = end
    return world


def flood(world):
    """Infect every node in a connected component (unit-disk graph on the
    current positions) that touches an infected node; instantaneous
    multi-hop relay.  Returns the new records; idempotent when no new
    contact exists."""
    records = []
    if world.infected.all():
        return records
    r2 = world.config.radio_range ** 2
    pos = world.positions
    sus_idx = np.flatnonzero(~world.infected)
    inf_pos = pos[world.infected]
    sus_pos = pos[sus_idx]

    # seed wave: susceptibles in range of any currently infected node
    d2 = ((sus_pos[:, None, :] - inf_pos[None, :, :]) ** 2).sum(axis=2)
    wave = (d2 <= r2).any(axis=1)
    if not wave.any():
        return records

    # expand through susceptible-susceptible chains
    d2_sus = ((sus_pos[:, None, :] - sus_pos[None, :, :]) ** 2).sum(axis=2)
    adj = d2_sus <= r2
    reached = wave.copy()
    frontier = wave
    while True:
        frontier = adj[:, frontier].any(axis=1) & ~reached
        if not frontier.any():
            break
        reached |= frontier

    now = world.time
    origin = world.source_origin
    for k in np.flatnonzero(reached):
        i = int(sus_idx[k])
        world.infected[i] = True
        world.infection_time[i] = now
        dist = float(np.linalg.norm(pos[i] - origin))
        records.append(InfectionRecord(node_id=i, infection_time=now, distance=dist))
    return records


def run_epidemic(config):
    """Full run: init, flood at t = 0, then alternate advance and flood
    until t_max or total infection.  Records sorted by infection time."""
    world = init_world(config)
    records = [
        InfectionRecord(node_id=world.source_index, infection_time=0.0, distance=0.0)
    ]
    records.extend(flood(world))
    while (
        world.time + config.dt <= config.t_max + 1e-9 * max(1.0, config.t_max)
        and not world.infected.all()
    ):
        advance(world)
        records.extend(flood(world))
    records.sort(key=lambda r: (r.infection_time, r.node_id))
    return records


def write_records(stream, rows):
    """Serialize (run_seed, record) rows as CSV with full double precision."""
    stream.write("run_seed,node_id,infection_time,distance\n")
    for seed, rec in rows:
        stream.write(
            f"{seed},{rec.node_id},{rec.infection_time:.17g},{rec.distance:.17g}\n"
        )
