"""Seeded slot-level Monte Carlo simulator.

The simulator is the ground truth the analytic formulas are checked
against. Two routes are provided on purpose:

* :func:`step` advances a single :class:`SimState` by one slot and is the
  readable reference for the within-slot ordering.
* :func:`run` simulates whole trajectories with numpy arrays and a small
  numba kernel for the battery recursion, which is what makes 10^6-slot
  horizons cheap.

The tests replay :func:`run` slot by slot through :func:`step` to keep the
two routes honest.

Random streams: replication ``k`` uses the ``k``-th child of
``numpy.random.SeedSequence(seed)`` feeding a Philox counter-based
generator, so results are bit-identical across runs and platforms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Optional, Union

import numba
import numpy as np

from .channel import ChannelParams, SuccessProbs, sample_physics, success_probs
from .metrics import AccessPolicy, Battery

__all__ = [
    "MODES",
    "SimConfig",
    "SimState",
    "SlotDraw",
    "SimReport",
    "step",
    "draw_slot",
    "simulate_trajectory",
    "run",
    "zscores",
    "replication_rngs",
]

MODES = ("abstract", "physical")
MIN_HORIZON = 1000
# number of batches used for the standard error when only one replication runs
_BATCHES = 20


@dataclass(frozen=True)
class SimConfig:
    """Simulation settings.

    Attributes:
        horizon: slots per replication (at least 1000).
        warmup: slots discarded at the start; ``None`` means ``horizon // 10``.
        replications: independent trajectories.
        seed: root seed for the replication streams.
        mode: ``"abstract"`` draws successes from Bernoulli laws with the
            given success probabilities; ``"physical"`` draws Rayleigh
            fading every slot and thresholds the received powers.
        aoi_threshold, aoa_threshold: tail thresholds for the violation
            frequencies.
        pmf_max: the empirical AoI pmf is reported on ``1..pmf_max``.
    """

    horizon: int = 10**6
    warmup: Optional[int] = None
    replications: int = 1
    seed: int = 0
    mode: str = "abstract"
    aoi_threshold: int = 5
    aoa_threshold: int = 5
    pmf_max: int = 30

    def __post_init__(self):
        if self.horizon < MIN_HORIZON:
            raise ValueError(f"horizon must be at least {MIN_HORIZON} slots, got {self.horizon}")
        if self.replications < 1:
            raise ValueError("replications must be >= 1")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 <= self.burn_in < self.horizon:
            raise ValueError("warmup must be in [0, horizon)")
        if self.seed < 0:
            raise ValueError("seed must be non-negative")

    @property
    def burn_in(self) -> int:
        return self.horizon // 10 if self.warmup is None else int(self.warmup)


@dataclass(frozen=True)
class SimState:
    """System state after a slot. ``battery`` is a stored-packet count."""

    t: int = 0
    aoi: int = 1
    aoa: int = 1
    battery: int = 0
    actuations: int = 0
    missed: int = 0
    issued: int = 0
    drops: int = 0


@dataclass(frozen=True)
class SlotDraw:
    """Resolved randomness of one slot: who transmitted and what succeeded."""

    active1: bool
    active2: bool
    data_ok: bool
    energy_ok: bool

    def __post_init__(self):
        if self.data_ok and not self.active1:
            raise ValueError("data cannot succeed without a data transmission")
        if self.energy_ok and not self.active2:
            raise ValueError("energy cannot be harvested without a power transmission")


@dataclass
class SimReport:
    """Aggregated simulation output.

    ``estimates`` and ``std_errors`` share keys; ``per_replication`` holds
    the raw per-trajectory values behind each estimate.
    """

    estimates: dict
    std_errors: dict
    per_replication: dict
    aoi_pmf: np.ndarray
    config: SimConfig
    battery: Battery
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "estimates": dict(self.estimates),
            "std_errors": dict(self.std_errors),
            "replications": self.config.replications,
            "horizon": self.config.horizon,
            "warmup": self.config.burn_in,
            "seed": self.config.seed,
            "mode": self.config.mode,
            "battery": str(self.battery),
        }


def step(state: SimState, policy: AccessPolicy, model: Battery, draw: SlotDraw) -> SimState:
    """Apply one slot with already resolved randomness.

    Order within the slot: actuation decision, battery update, AoI and AoA
    update, counters. With an empty battery a packet harvested in the same
    slot can power the actuation; with a non-empty battery the actuation
    uses a stored packet and a simultaneously harvested one is stored, so
    the level is unchanged.
    """
    if draw.active1 and policy.q1 == 0 or draw.active2 and policy.q2 == 0:
        raise ValueError("draw is impossible under the given policy")
    d, e = draw.data_ok, draw.energy_ok
    b = state.battery
    actuate = d and (b > 0 or e)

    drops = state.drops
    if d and not e:
        b = max(b - 1, 0)
    elif e and not d:
        if model.capacity is not None and b >= model.capacity:
            drops += 1
        else:
            b += 1

    return SimState(
        t=state.t + 1,
        aoi=1 if d else state.aoi + 1,
        aoa=1 if actuate else state.aoa + 1,
        battery=b,
        actuations=state.actuations + int(actuate),
        missed=state.missed + int(draw.active1 and not actuate),
        issued=state.issued + int(draw.active1),
        drops=drops,
    )


def draw_slot(policy: AccessPolicy, source: Union[SuccessProbs, ChannelParams],
              rng: np.random.Generator, mode: str = "abstract") -> SlotDraw:
    """Sample the randomness of one slot."""
    a1 = bool(rng.random() < policy.q1)
    a2 = bool(rng.random() < policy.q2)
    if mode == "physical":
        d, e = sample_physics(_require_params(source), np.array([a1]), np.array([a2]), rng)
        return SlotDraw(a1, a2, bool(d[0]), bool(e[0]))
    succ = _as_succ(source)
    pd = succ.p_d12 if a2 else succ.p_d1
    pe = succ.p_e12 if a1 else succ.p_e2
    d = a1 and bool(rng.random() < pd)
    e = a2 and bool(rng.random() < pe)
    return SlotDraw(a1, a2, d, e)


def _as_succ(source) -> SuccessProbs:
    if isinstance(source, ChannelParams):
        return success_probs(source)
    if isinstance(source, SuccessProbs):
        return source
    raise TypeError(f"expected SuccessProbs or ChannelParams, got {type(source).__name__}")


def _require_params(source) -> ChannelParams:
    if not isinstance(source, ChannelParams):
        raise TypeError("physical mode needs ChannelParams, not precomputed success probabilities")
    return source


@numba.njit(cache=True)
def _battery_levels(data_ok, energy_ok, capacity):
    """Battery level at the start of every slot, and per-slot drop flags.

    ``capacity < 0`` means unbounded storage.
    """
    n = data_ok.size
    level = np.empty(n, np.int64)
    dropped = np.zeros(n, np.bool_)
    b = 0
    for t in range(n):
        level[t] = b
        d = data_ok[t]
        e = energy_ok[t]
        if d and not e:
            if b > 0:
                b -= 1
        elif e and not d:
            if capacity >= 0 and b >= capacity:
                dropped[t] = True
            else:
                b += 1
    return level, dropped


def _ages(events: np.ndarray) -> np.ndarray:
    """Age after each slot's update, starting from age 1 before slot 0."""
    n = events.size
    idx = np.where(events, np.arange(n), -1)
    last = np.maximum.accumulate(idx)
    return np.arange(n) - last + 1


def simulate_trajectory(policy: AccessPolicy, source, model: Battery, horizon: int,
                        rng: np.random.Generator, mode: str = "abstract") -> dict:
    """One full trajectory as per-slot arrays (no warmup removed)."""
    a1 = rng.random(horizon) < policy.q1
    a2 = rng.random(horizon) < policy.q2
    if mode == "physical":
        d, e = sample_physics(_require_params(source), a1, a2, rng)
    else:
        succ = _as_succ(source)
        ud = rng.random(horizon)
        ue = rng.random(horizon)
        d = a1 & (ud < np.where(a2, succ.p_d12, succ.p_d1))
        e = a2 & (ue < np.where(a1, succ.p_e12, succ.p_e2))
    capacity = -1 if model.capacity is None else int(model.capacity)
    level, dropped = _battery_levels(d, e, capacity)
    actuated = d & ((level > 0) | e)
    return {
        "active1": a1,
        "active2": a2,
        "data_ok": d,
        "energy_ok": e,
        "battery": level,
        "dropped": dropped,
        "actuated": actuated,
        "aoi": _ages(d),
        "aoa": _ages(actuated),
    }


def _summarise(tr: dict, config: SimConfig, model: Battery) -> dict:
    w = config.burn_in
    aoi = tr["aoi"][w:]
    aoa = tr["aoa"][w:]
    level = tr["battery"][w:]
    actuated = tr["actuated"][w:]
    missed = tr["active1"][w:] & ~actuated
    out = {
        "mean_aoi": aoi.mean(),
        "mean_aoa": aoa.mean(),
        "aoi_violation": (aoi > config.aoi_threshold).mean(),
        "aoa_violation": (aoa > config.aoa_threshold).mean(),
        "poma": missed.mean(),
        "pi0": (level == 0).mean(),
        "p_D": tr["data_ok"][w:].mean(),
        "p_A": actuated.mean(),
    }
    out["pi0_bar"] = 1.0 - out["pi0"]
    if model.is_finite:
        out["pi_m"] = (level == model.capacity).mean()
        out["drop_rate"] = tr["dropped"][w:].mean()
    return {k: float(v) for k, v in out.items()}


def replication_rngs(seed: int, count: int) -> list:
    """Independent Philox generators, one per replication."""
    return [np.random.Generator(np.random.Philox(s))
            for s in np.random.SeedSequence(seed).spawn(count)]


def _batch_summaries(tr, config, model):
    w = config.burn_in
    n = config.horizon - w
    size = n // _BATCHES
    out = []
    for k in range(_BATCHES):
        lo = w + k * size
        sub = {key: val[lo:lo + size] for key, val in tr.items()}
        out.append(_summarise(sub, replace(config, horizon=max(size, MIN_HORIZON), warmup=0), model))
    return out


def run(config: SimConfig, policy: AccessPolicy, source: Union[SuccessProbs, ChannelParams],
        model: Battery = Battery()) -> SimReport:
    """Simulate ``config.replications`` trajectories and aggregate.

    Estimates are averages over replications; standard errors are the
    across-replication standard deviation over ``sqrt(R)``. A single
    replication falls back to batch means over 20 contiguous batches.
    """
    rngs = replication_rngs(config.seed, config.replications)
    per_rep = []
    pmf = np.zeros(config.pmf_max)
    batches = None
    for rng in rngs:
        tr = simulate_trajectory(policy, source, model, config.horizon, rng, config.mode)
        per_rep.append(_summarise(tr, config, model))
        aoi = tr["aoi"][config.burn_in:]
        counts = np.bincount(np.minimum(aoi, config.pmf_max + 1), minlength=config.pmf_max + 2)
        pmf += counts[1:config.pmf_max + 1] / aoi.size
        if config.replications == 1:
            batches = _batch_summaries(tr, config, model)

    keys = list(per_rep[0])
    table = {k: np.array([r[k] for r in per_rep]) for k in keys}
    estimates = {k: float(v.mean()) for k, v in table.items()}
    if config.replications > 1:
        errors = {k: float(v.std(ddof=1) / math.sqrt(v.size)) for k, v in table.items()}
    else:
        bt = {k: np.array([b[k] for b in batches]) for k in keys}
        errors = {k: float(v.std(ddof=1) / math.sqrt(v.size)) for k, v in bt.items()}
    return SimReport(estimates=estimates, std_errors=errors, per_replication=table,
                     aoi_pmf=pmf / config.replications, config=config, battery=model)


_RESET_RATE = {"mean_aoi": "p_D", "mean_aoa": "p_A"}


def zscores(report: SimReport, expected: dict) -> dict:
    """Standardised deviation of each simulated metric from ``expected``.

    A metric with zero sample variance is scored against the run's
    resolution, one event in all simulated slots. An infinite expected mean age is checked through
    its reset rate instead: the trajectory must never reset.
    """
    cfg = report.config
    resolution = 1.0 / (cfg.replications * (cfg.horizon - cfg.burn_in))
    out = {}
    for key, target in expected.items():
        if key not in report.estimates or target is None:
            continue
        if math.isinf(target) and key in _RESET_RATE:
            out[key] = 0.0 if report.estimates[_RESET_RATE[key]] == 0 else math.inf
            continue
        diff = report.estimates[key] - target
        se = report.std_errors[key]
        if se == 0:
            # no variation seen: the run cannot resolve rates below one event
            se = resolution
        out[key] = diff / se
    return out
