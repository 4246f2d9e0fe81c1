"""Steady-state analytics: joint events, AoI, battery, AoA, PoMA, drops.

Two layers live here. The public dataclass-level functions (``event_probs``,
``mean_aoa`` ...) take and return small records. The underscore-free
``*_surface`` helpers evaluate the same formulas on numpy arrays of access
probabilities and back the grid optimisers and CSV sweeps.

Unreachable means (no data successes, or no actuations) are reported as
``math.inf`` rather than raised, so lattice sweeps over ``[0, 1]^2`` stay
total.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import SuccessProbs

__all__ = [
    "AccessPolicy",
    "EventProbs",
    "Battery",
    "BatteryModel",
    "INFINITE",
    "BatteryStationary",
    "MetricsReport",
    "event_probs",
    "mean_aoi",
    "aoi_violation",
    "battery_stationary",
    "battery_transition_matrix",
    "actuation_prob",
    "mean_aoa",
    "aoa_violation",
    "poma",
    "drop_rate",
    "mean_aoa_exact",
    "aoa_violation_exact",
    "evaluate",
    "METRICS",
    "metric_surface",
    "energy_ratio_surface",
]


@dataclass(frozen=True)
class AccessPolicy:
    """Per-slot transmit probabilities of the data (q1) and power (q2) nodes."""

    q1: float
    q2: float

    def __post_init__(self):
        for name in ("q1", "q2"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")


@dataclass(frozen=True)
class EventProbs:
    """Per-slot probabilities of the data (D) and energy (E) outcomes.

    The suffix ``b`` marks a complemented event, e.g. ``p_DbE`` is the
    probability of a failed data packet together with a harvested energy
    packet.
    """

    p_D: float
    p_E: float
    p_DE: float
    p_DeB: float
    p_DbE: float
    p_DbEb: float

    @property
    def ratio(self) -> float:
        """Battery charge/discharge ratio ``p_DbE / p_DeB`` (``inf`` if undefined upward)."""
        return _ratio(self.p_DbE, self.p_DeB)


@dataclass(frozen=True)
class Battery:
    """Battery model. ``capacity=None`` means unbounded storage."""

    capacity: Optional[int] = None

    def __post_init__(self):
        if self.capacity is not None:
            if int(self.capacity) != self.capacity or self.capacity < 1:
                raise ValueError(f"battery capacity must be an integer >= 1, got {self.capacity!r}")

    @property
    def is_finite(self) -> bool:
        return self.capacity is not None

    @classmethod
    def finite(cls, m: int) -> "Battery":
        return cls(capacity=m)

    @classmethod
    def infinite(cls) -> "Battery":
        return cls()

    def __str__(self):
        return "infinite" if self.capacity is None else f"finite(m={self.capacity})"


INFINITE = Battery()
# alias matching the domain vocabulary
BatteryModel = Battery


@dataclass(frozen=True)
class BatteryStationary:
    pi0: float
    pi0_bar: float
    pi_m: Optional[float]
    ratio: float


@dataclass
class MetricsReport:
    mean_aoi: float
    mean_aoa: float
    v_I: float
    v_A: float
    poma: float
    drop_rate: Optional[float]
    battery: BatteryStationary
    aoi_threshold: int = 5
    aoa_threshold: int = 5
    extras: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        out = {
            "mean_aoi": self.mean_aoi,
            "mean_aoa": self.mean_aoa,
            "aoi_violation": self.v_I,
            "aoa_violation": self.v_A,
            "aoi_threshold": self.aoi_threshold,
            "aoa_threshold": self.aoa_threshold,
            "poma": self.poma,
            "drop_rate": self.drop_rate,
            "pi0": self.battery.pi0,
            "pi0_bar": self.battery.pi0_bar,
            "pi_m": self.battery.pi_m,
            "ratio": self.battery.ratio,
        }
        out.update(self.extras)
        return out


# ---------------------------------------------------------------------------
# array-level formulas


def _events(q1, q2, succ: SuccessProbs):
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    both = q1 * q2
    only1 = q1 * (1.0 - q2)
    only2 = (1.0 - q1) * q2
    p_DE = both * pd12 * pe12
    p_DeB = both * pd12 * (1.0 - pe12) + only1 * pd1
    p_DbE = both * (1.0 - pd12) * pe12 + only2 * pe2
    p_DbEb = ((1.0 - q1) * (1.0 - q2) + only1 * (1.0 - pd1)
              + only2 * (1.0 - pe2) + both * (1.0 - pd12) * (1.0 - pe12))
    return p_DE, p_DeB, p_DbE, p_DbEb


def _ratio(p_DbE, p_DeB):
    p_DbE = np.asarray(p_DbE, dtype=float)
    p_DeB = np.asarray(p_DeB, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        r = np.where(p_DeB > 0, p_DbE / np.where(p_DeB > 0, p_DeB, 1.0),
                     np.where(p_DbE > 0, np.inf, 0.0))
    return r if r.ndim else float(r)


def _truncated_geometric_head(r, m):
    """Mass at level 0 of the law proportional to r**k on {0..m}.

    Written through log/expm1 so it stays accurate for r near 1 and does
    not overflow for large r or m.
    """
    r = np.asarray(r, dtype=float)
    out = np.empty_like(r)
    zero = r == 0
    inf = np.isinf(r)
    mid = ~(zero | inf)
    out[zero] = 1.0
    out[inf] = 0.0
    if np.any(mid):
        ell = np.log(r[mid])
        with np.errstate(over="ignore", invalid="ignore"):
            val = np.expm1(ell) / np.expm1((m + 1) * ell)
        unit = ell == 0
        val[unit] = 1.0 / (m + 1)
        out[mid] = val
    return out


def _empty_full(p_DbE, p_DeB, capacity):
    """(pi0, pi_m) arrays; pi_m is None for the infinite battery."""
    r = np.asarray(_ratio(p_DbE, p_DeB), dtype=float)
    if capacity is None:
        pi0 = np.where(r >= 1.0, 0.0, 1.0 - np.minimum(r, 1.0))
        return pi0, None
    pi0 = _truncated_geometric_head(r, capacity)
    with np.errstate(divide="ignore", over="ignore"):
        inv = np.where(r == 0, np.inf, 1.0 / np.where(r == 0, 1.0, r))
    pi_m = _truncated_geometric_head(inv, capacity)
    return pi0, pi_m


def energy_ratio_surface(q1, q2, succ: SuccessProbs):
    """Battery ratio ``p_DbE / p_DeB`` over arrays of access probabilities."""
    _, p_DeB, p_DbE, _ = _events(q1, q2, succ)
    return np.asarray(_ratio(p_DbE, p_DeB), dtype=float)


def _actuation_surface(q1, q2, succ, battery):
    p_DE, p_DeB, p_DbE, _ = _events(q1, q2, succ)
    pi0, _ = _empty_full(p_DbE, p_DeB, battery.capacity)
    p_D = p_DE + p_DeB
    return p_D * (1.0 - pi0) + p_DE * pi0


def _safe_reciprocal(p):
    p = np.asarray(p, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(p > 0, 1.0 / np.where(p > 0, p, 1.0), np.inf)


def metric_surface(name: str, q1, q2, succ: SuccessProbs, battery: Battery = INFINITE,
                   threshold: int = 5) -> np.ndarray:
    """Evaluate metric ``name`` on arrays of (q1, q2).

    ``name`` is one of :data:`METRICS`. ``threshold`` is only used by the
    violation metrics.
    """
    q1 = np.asarray(q1, dtype=float)
    q2 = np.asarray(q2, dtype=float)
    if name == "mean_aoi":
        p_DE, p_DeB, _, _ = _events(q1, q2, succ)
        return _safe_reciprocal(p_DE + p_DeB)
    if name == "aoi_violation":
        p_DE, p_DeB, _, _ = _events(q1, q2, succ)
        return (1.0 - (p_DE + p_DeB)) ** threshold
    if name == "mean_aoa":
        return _safe_reciprocal(_actuation_surface(q1, q2, succ, battery))
    if name == "aoa_violation":
        return (1.0 - _actuation_surface(q1, q2, succ, battery)) ** threshold
    if name == "poma":
        return _poma_surface(q1, q2, succ, battery)
    if name == "drop_rate":
        if not battery.is_finite:
            raise ValueError("drop rate is only defined for a finite battery")
        _, p_DeB, p_DbE, _ = _events(q1, q2, succ)
        _, pi_m = _empty_full(p_DbE, p_DeB, battery.capacity)
        return pi_m * p_DbE
    if name == "pi0":
        _, p_DeB, p_DbE, _ = _events(q1, q2, succ)
        return _empty_full(p_DbE, p_DeB, battery.capacity)[0]
    raise ValueError(f"unknown metric {name!r}; expected one of {METRICS}")


METRICS = ("mean_aoi", "aoi_violation", "mean_aoa", "aoa_violation", "poma", "drop_rate", "pi0")


def _poma_surface(q1, q2, succ, battery):
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    _, p_DeB, p_DbE, _ = _events(q1, q2, succ)
    pi0, _ = _empty_full(p_DbE, p_DeB, battery.capacity)
    both = q1 * q2
    only1 = q1 * (1.0 - q2)
    lost = both * (1.0 - pd12) + only1 * (1.0 - pd1)
    unpowered = both * pd12 * (1.0 - pe12) + only1 * pd1
    return lost + pi0 * unpowered


# ---------------------------------------------------------------------------
# record-level operations


def event_probs(policy: AccessPolicy, succ: SuccessProbs) -> EventProbs:
    p_DE, p_DeB, p_DbE, p_DbEb = (float(x) for x in _events(policy.q1, policy.q2, succ))
    return EventProbs(p_D=p_DE + p_DeB, p_E=p_DE + p_DbE, p_DE=p_DE,
                      p_DeB=p_DeB, p_DbE=p_DbE, p_DbEb=p_DbEb)


def mean_aoi(ev: EventProbs) -> float:
    """Stationary mean AoI ``1 / p_D`` in slots."""
    return 1.0 / ev.p_D if ev.p_D > 0 else math.inf


def _check_threshold(threshold):
    if int(threshold) != threshold or threshold < 0:
        raise ValueError(f"threshold must be a non-negative integer, got {threshold!r}")
    return int(threshold)


def aoi_violation(ev: EventProbs, threshold: int) -> float:
    """Stationary ``P{I > threshold}``; the AoI law is geometric on {1, 2, ...}."""
    return (1.0 - ev.p_D) ** _check_threshold(threshold)


def battery_stationary(ev: EventProbs, model: Battery) -> BatteryStationary:
    """Empty/full probabilities of the battery birth-death chain.

    The infinite battery is stable only when the ratio is below one; above
    it the battery drifts upward and is empty with probability zero. When
    the battery can neither charge nor drain it stays at its initial (empty)
    level.
    """
    r = ev.ratio
    pi0, pi_m = _empty_full(ev.p_DbE, ev.p_DeB, model.capacity)
    pi0 = float(pi0)
    return BatteryStationary(pi0=pi0, pi0_bar=1.0 - pi0,
                             pi_m=None if pi_m is None else float(pi_m), ratio=r)


def battery_transition_matrix(ev: EventProbs, m: int) -> np.ndarray:
    """(m+1)x(m+1) transition matrix of the finite battery level."""
    if m < 1:
        raise ValueError("m must be >= 1")
    P = np.zeros((m + 1, m + 1))
    stay = ev.p_DE + ev.p_DbEb
    for b in range(m + 1):
        if b == 0:
            P[0, 0] = ev.p_DE + ev.p_DeB + ev.p_DbEb
            P[0, 1] = ev.p_DbE
        elif b == m:
            P[m, m - 1] = ev.p_DeB
            P[m, m] = ev.p_DE + ev.p_DbE + ev.p_DbEb
        else:
            P[b, b - 1] = ev.p_DeB
            P[b, b] = stay
            P[b, b + 1] = ev.p_DbE
    return P


def actuation_prob(ev: EventProbs, bat: BatteryStationary) -> float:
    """Per-slot actuation probability: data with a stored packet, or data and energy together."""
    return ev.p_D * bat.pi0_bar + ev.p_DE * bat.pi0


def mean_aoa(ev: EventProbs, model: Battery) -> float:
    p_a = actuation_prob(ev, battery_stationary(ev, model))
    return 1.0 / p_a if p_a > 0 else math.inf


def aoa_violation(ev: EventProbs, model: Battery, threshold: int) -> float:
    p_a = actuation_prob(ev, battery_stationary(ev, model))
    return (1.0 - p_a) ** _check_threshold(threshold)


def poma(policy: AccessPolicy, succ: SuccessProbs, ev: EventProbs, model: Battery) -> float:
    """Per-slot probability that an issued data packet leads to no actuation.

    Two ways to miss: the packet is lost on the channel, or it arrives while
    the battery is empty and no energy packet arrives with it.
    """
    pi0 = battery_stationary(ev, model).pi0
    pd1, pd12, _, pe12 = succ.as_tuple()
    q1, q2 = policy.q1, policy.q2
    lost = q1 * q2 * (1.0 - pd12) + q1 * (1.0 - q2) * (1.0 - pd1)
    unpowered = q1 * q2 * pd12 * (1.0 - pe12) + q1 * (1.0 - q2) * pd1
    return lost + pi0 * unpowered


def drop_rate(ev: EventProbs, model: Battery) -> float:
    """Per-slot probability that a harvested packet is discarded by a full battery."""
    if not model.is_finite:
        raise ValueError("an infinite battery never drops energy packets")
    return battery_stationary(ev, model).pi_m * ev.p_DbE


# ---------------------------------------------------------------------------
# exact AoA for the finite battery
#
# Actuations are correlated through the battery level, so for a finite
# battery the inter-actuation times are not geometric and 1/p_A is only a
# mean-field value. The exact stationary law follows from the substochastic
# "no actuation" kernel M of the battery chain:
#     P{A > k} = pi M^k 1,    E[A] = pi (I - M)^{-1} 1.


def _no_actuation_kernel(ev: EventProbs, m: int) -> np.ndarray:
    M = np.zeros((m + 1, m + 1))
    # empty battery: actuation only on (D, E)
    M[0, 0] = ev.p_DeB + ev.p_DbEb
    M[0, 1] = ev.p_DbE
    for b in range(1, m + 1):
        # any data success actuates from a non-empty battery
        M[b, b] = ev.p_DbEb + (ev.p_DbE if b == m else 0.0)
        if b < m:
            M[b, b + 1] = ev.p_DbE
    return M


def _stationary(P: np.ndarray) -> np.ndarray:
    n = P.shape[0]
    A = np.vstack([P.T - np.eye(n), np.ones(n)])
    rhs = np.zeros(n + 1)
    rhs[-1] = 1.0
    pi, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    return pi


def _finite_stationary_vector(ev: EventProbs, m: int) -> np.ndarray:
    r = ev.ratio
    pi = np.zeros(m + 1)
    if r == 0:
        pi[0] = 1.0
        return pi
    if math.isinf(r):
        pi[m] = 1.0
        return pi
    # weights r**k normalised in log space
    logw = np.arange(m + 1) * math.log(r)
    w = np.exp(logw - logw.max())
    return w / w.sum()


def mean_aoa_exact(ev: EventProbs, model: Battery) -> float:
    """Exact stationary mean AoA accounting for battery-induced correlation.

    For the infinite battery this coincides with :func:`mean_aoa` (the
    actuation process of a stable Geo/Geo/1 battery is Bernoulli), so the
    mean-field value is returned there.
    """
    if not model.is_finite:
        return mean_aoa(ev, model)
    m = model.capacity
    pi = _finite_stationary_vector(ev, m)
    M = _no_actuation_kernel(ev, m)
    I = np.eye(m + 1)
    try:
        x = np.linalg.solve(I - M, np.ones(m + 1))
    except np.linalg.LinAlgError:
        return math.inf
    val = float(pi @ x)
    return val if np.isfinite(val) and val > 0 else math.inf


def aoa_violation_exact(ev: EventProbs, model: Battery, threshold: int) -> float:
    """Exact stationary ``P{A > threshold}`` (finite battery; mean-field otherwise)."""
    threshold = _check_threshold(threshold)
    if not model.is_finite:
        return aoa_violation(ev, model, threshold)
    m = model.capacity
    pi = _finite_stationary_vector(ev, m)
    M = _no_actuation_kernel(ev, m)
    return float(pi @ np.linalg.matrix_power(M, threshold) @ np.ones(m + 1))


def evaluate(policy: AccessPolicy, succ: SuccessProbs, model: Battery = INFINITE,
             aoi_threshold: int = 5, aoa_threshold: int = 5) -> MetricsReport:
    """Every analytic metric for one operating point."""
    ev = event_probs(policy, succ)
    bat = battery_stationary(ev, model)
    extras = {"p_A": actuation_prob(ev, bat)}
    if model.is_finite:
        extras["mean_aoa_exact"] = mean_aoa_exact(ev, model)
        extras["aoa_violation_exact"] = aoa_violation_exact(ev, model, aoa_threshold)
    return MetricsReport(
        mean_aoi=mean_aoi(ev),
        mean_aoa=mean_aoa(ev, model),
        v_I=aoi_violation(ev, aoi_threshold),
        v_A=aoa_violation(ev, model, aoa_threshold),
        poma=poma(policy, succ, ev, model),
        drop_rate=drop_rate(ev, model) if model.is_finite else None,
        battery=bat,
        aoi_threshold=aoi_threshold,
        aoa_threshold=aoa_threshold,
        extras=extras,
    )
