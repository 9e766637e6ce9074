"""The Airspace benchmark world.

A two dimensional corridor: the agent has a distance cell d and an altitude
a, starts at (0, 0), and is done once d reaches the corridor length. Each
step it may raise, keep, or lower its altitude by one; it then advances by
its new altitude, so height is speed. Altitudes 0 and 1 are always clear;
every higher row is seeded with obstacles independently with probability
p_obs. A move is legal only when every cell swept by the straight segment
between the two states is clear, which makes high-altitude flight fast but
riddled with dead ends, while the low rows form a safe corridor: the
likely-safe predicate accepts altitudes 0 and 1, and the safety distance
estimate of a state is its altitude minus one.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..rng import SplitMix64, uniform_block

CLIMB, KEEP, DIVE = 1, 0, -1
_DELTAS = (CLIMB, KEEP, DIVE)


def collision_probability(altitude: int, p_obs: float) -> float:
    """Chance that an altitude-keeping step at the given altitude collides.

    A keep action sweeps `altitude` fresh cells, each independently an
    obstacle with probability p_obs, hence 1 - (1 - p_obs) ** altitude.
    """
    if altitude < 0:
        raise ValueError("altitude must be nonnegative")
    if not 0.0 <= p_obs < 1.0:
        raise ValueError("p_obs must lie in [0, 1)")
    return 1.0 - (1.0 - p_obs) ** altitude


@dataclass
class AirspaceInstance:
    """Immutable Airspace world; also the domain handle for the planners.

    Obstacle rows cover altitudes 2..max_altitude (row index a - 2). States
    are (d, a) tuples; goal states have d == length (overshoot is clamped).
    """

    length: int
    max_altitude: int
    p_obs: float
    seed: int
    obstacles: np.ndarray  # bool, shape (max_altitude - 1, length); True = blocked

    _free_rows: dict[int, np.ndarray] = field(default_factory=dict, repr=False)
    _move_ok: dict[tuple[int, int], np.ndarray] = field(default_factory=dict, repr=False)
    _free_cols: dict[int, np.ndarray] = field(default_factory=dict, repr=False)

    def __post_init__(self):
        expect = (max(self.max_altitude - 1, 0), self.length)
        if self.obstacles.shape != expect:
            raise ValueError(f"obstacle grid shape {self.obstacles.shape} != {expect}")

    # -- bookkeeping -------------------------------------------------------

    @property
    def instance_id(self) -> str:
        return (f"airspace-L{self.length}-A{self.max_altitude}"
                f"-p{self.p_obs:g}-s{self.seed}")

    @property
    def start(self) -> tuple[int, int]:
        return (0, 0)

    def free(self, d: int, a: int) -> bool:
        if a <= 1 or d >= self.length:
            return True
        return not self.obstacles[a - 2, d]

    def _row_free(self, a: int) -> np.ndarray:
        row = self._free_rows.get(a)
        if row is None:
            row = ~self.obstacles[a - 2]
            self._free_rows[a] = row
        return row

    def _valid_move(self, a1: int, a2: int) -> np.ndarray:
        """Per-column legality of the move altitude a1 -> a2.

        The segment spans a2 columns (the step advances by the new
        altitude); the altitude over column d+k is interpolated linearly
        and rounded half up. Columns at or beyond the goal line and rows
        at altitude <= 1 are always clear.
        """
        key = (a1, a2)
        ok = self._move_ok.get(key)
        if ok is not None:
            return ok
        span = a2
        ok = np.ones(self.length, dtype=bool)
        for k in range(1, span + 1):
            alt_k = ((a1 * span + (a2 - a1) * k) * 2 + span) // (2 * span)
            if alt_k < 2:
                continue
            row = self._row_free(alt_k)
            shifted = np.ones(self.length, dtype=bool)
            if self.length > k:
                shifted[: self.length - k] = row[k:]
            ok &= shifted
        self._move_ok[key] = ok
        return ok

    # -- domain handle -----------------------------------------------------

    def successors(self, state) -> list:
        d, a = state
        if d >= self.length:
            return []
        out = []
        for delta in _DELTAS:
            a2 = a + delta
            if a2 < 0 or a2 > self.max_altitude:
                continue
            if a2 == 0 or self._valid_move(a, a2)[d]:
                out.append((delta, (min(d + a2, self.length), a2), 1.0))
        return out

    def is_goal(self, state) -> bool:
        return state[0] >= self.length

    def is_terminal(self, state) -> bool:
        return False

    def h(self, state) -> float:
        return (self.length - state[0]) / self.max_altitude if state[0] < self.length else 0.0

    def d_safe(self, state) -> float:
        return float(max(state[1] - 1, 0))

    def f_safe(self, state) -> bool:
        return state[1] <= 1

    def identity_action(self, state):
        d, a = state
        return KEEP if a == 0 and d < self.length else None

    def travel_distance(self, start, end) -> float:
        return float(end[0] - start[0])

    # -- enumeration and sampling ------------------------------------------

    def state_count(self) -> int:
        return (self.max_altitude + 1) * (self.length + 1)

    def all_states(self) -> list:
        states = []
        for a in range(self.max_altitude + 1):
            for d in range(self.length):
                if self.free(d, a):
                    states.append((d, a))
        states.extend((self.length, a) for a in range(self.max_altitude + 1))
        return states

    def free_columns(self, altitude: int) -> np.ndarray:
        cols = self._free_cols.get(altitude)
        if cols is None:
            if altitude <= 1:
                cols = np.arange(self.length)
            else:
                cols = np.flatnonzero(self._row_free(altitude))
            self._free_cols[altitude] = cols
        return cols

    def sample_state(self, altitude: int, rng: SplitMix64):
        cols = self.free_columns(altitude)
        if len(cols) == 0:
            return None
        return (int(cols[rng.randrange(len(cols))]), altitude)

    # -- serialization -----------------------------------------------------

    def to_text(self) -> str:
        lines = ["airspace v1",
                 f"length {self.length} maxAltitude {self.max_altitude} "
                 f"pObs {self.p_obs!r} seed {self.seed}"]
        for r in range(self.obstacles.shape[0]):
            row = self.obstacles[r]
            lines.append("".join("#" if row[d] else "." for d in range(self.length)))
        return "\n".join(lines) + "\n"


def generate(length: int, max_altitude: int, p_obs: float, seed: int) -> AirspaceInstance:
    """Deterministically generate an Airspace instance.

    One SplitMix64 stream seeded with `seed` is consumed row-major over
    altitudes 2..max_altitude (outer) and distance 0..length-1 (inner);
    a cell is an obstacle iff its draw falls below p_obs. Instances are
    bit-identical for equal parameters.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if max_altitude < 1:
        raise ValueError("max_altitude must be >= 1")
    if not 0.0 <= p_obs < 1.0:
        raise ValueError("p_obs must lie in [0, 1)")
    rows = max_altitude - 1
    draws = uniform_block(seed, rows * length)
    obstacles = (draws < p_obs).reshape(rows, length)
    return AirspaceInstance(length, max_altitude, p_obs, seed, obstacles)


@dataclass(frozen=True)
class AltitudeStats:
    altitude: int
    samples: int
    safety_probability: float
    mean_proof_length_states: float
    mean_proof_length_transitions: float
    mean_successful_proof_expansions: float
    mean_failed_proof_expansions: float


def safety_proof_stats(instance: AirspaceInstance, samples_per_altitude: int,
                       seed: int = 0, proof_budget: int = 1_000_000,
                       min_altitude: int = 3) -> list[AltitudeStats]:
    """Empirical difficulty of safety proofs, per altitude.

    Random free cells at each altitude from min_altitude up are proven with
    an effectively unbounded budget and a fresh cache each. Proof length is
    reported two ways: transitions along the proven path, and states
    counted through touchdown at altitude 0 (the path's safe endpoint sits
    at altitude 1 and its final descent to ground always exists, so that is
    transitions + 2).
    """
    from ..safety import DeadEndCache, Proven, prove_safety
    from ..search import ExpansionBudget

    if samples_per_altitude < 1:
        raise ValueError("samples_per_altitude must be >= 1")
    rng = SplitMix64(seed)
    rows = []
    for altitude in range(min_altitude, instance.max_altitude + 1):
        successes = 0
        transitions_total = 0
        success_exp_total = 0
        failed = 0
        failed_exp_total = 0
        for _ in range(samples_per_altitude):
            state = instance.sample_state(altitude, rng)
            if state is None:
                continue
            result = prove_safety(state, ExpansionBudget(proof_budget), instance,
                                  DeadEndCache())
            if isinstance(result, Proven):
                successes += 1
                transitions_total += len(result.path) - 1
                success_exp_total += result.expansions
            else:
                failed += 1
                failed_exp_total += result.expansions
        total = successes + failed
        mean_tr = transitions_total / successes if successes else math.nan
        rows.append(AltitudeStats(
            altitude=altitude,
            samples=total,
            safety_probability=successes / total if total else math.nan,
            mean_proof_length_states=mean_tr + 2 if successes else math.nan,
            mean_proof_length_transitions=mean_tr,
            mean_successful_proof_expansions=(success_exp_total / successes
                                              if successes else math.nan),
            mean_failed_proof_expansions=(failed_exp_total / failed
                                          if failed else math.nan),
        ))
    return rows


STATS_CSV_COLUMNS = ("altitude", "samples", "safetyProbability",
                     "meanProofLengthStates", "meanProofLengthTransitions",
                     "meanSuccessfulProofExpansions", "meanFailedProofExpansions")


def stats_csv_rows(rows: list[AltitudeStats]) -> list[list]:
    out = [list(STATS_CSV_COLUMNS)]
    for r in rows:
        out.append([r.altitude, r.samples, r.safety_probability,
                    r.mean_proof_length_states, r.mean_proof_length_transitions,
                    r.mean_successful_proof_expansions,
                    r.mean_failed_proof_expansions])
    return out


def write_instance(instance: AirspaceInstance, path: str) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(instance.to_text())


def load_instance(path_or_text: str, *, is_text: bool = False) -> AirspaceInstance:
    """Parse an Airspace instance file; the grid body is authoritative."""
    if is_text:
        text = path_or_text
    else:
        with open(path_or_text, "r", encoding="utf-8") as f:
            text = f.read()
    lines = text.splitlines()
    if not lines or lines[0].strip() != "airspace v1":
        raise ValueError("not an airspace v1 file")
    fields = lines[1].split()
    try:
        header = {fields[i]: fields[i + 1] for i in range(0, len(fields), 2)}
        length = int(header["length"])
        max_altitude = int(header["maxAltitude"])
        p_obs = float(header["pObs"])
        seed = int(header["seed"])
    except (KeyError, IndexError, ValueError) as exc:
        raise ValueError(f"malformed airspace header: {lines[1]!r}") from exc
    rows = max_altitude - 1
    body = lines[2:2 + rows]
    if len(body) != rows:
        raise ValueError(f"expected {rows} grid rows, found {len(body)}")
    obstacles = np.zeros((rows, length), dtype=bool)
    for r, row in enumerate(body):
        if len(row) != length or set(row) - {".", "#"}:
            raise ValueError(f"bad grid row {r}: {row!r}")
        obstacles[r] = np.frombuffer(row.encode("ascii"), dtype=np.uint8) == ord("#")
    return AirspaceInstance(length, max_altitude, p_obs, seed, obstacles)
