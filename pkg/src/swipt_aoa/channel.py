"""Physical layer: Rayleigh-faded SWIPT links and their success probabilities.

Transmitter 1 sends status updates, transmitter 2 sends wireless power. The
receiver splits the received signal with ratio ``rho``: a fraction ``rho**2``
of the power goes to energy harvesting and ``1 - rho**2`` to decoding. Channel
power gains are exponential with mean ``upsilon`` (Rayleigh amplitude).

Everything here is in linear units. dB/dBm conversions live in
:mod:`swipt_aoa.scenario`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "ChannelParams",
    "SuccessProbs",
    "power_factor",
    "success_probs",
    "cdf_sum_exponentials",
    "sample_slot_physics",
    "sample_physics",
    "CASES",
]

CASES = ("both", "only1", "only2")

# Relative gap |a - b| / max(a, b) below which the equal-scale (Erlang-2)
# form replaces the divided-difference closed form.
_EQUAL_SCALE_GAP = 1e-5


@dataclass(frozen=True)
class ChannelParams:
    """Deployment parameters of the two-transmitter SWIPT link (linear units)."""

    p_tx1: float
    p_tx2: float
    d1: float
    d2: float
    alpha1: float
    alpha2: float
    upsilon1: float
    upsilon2: float
    p_noise: float
    rho: float
    gamma_d: float
    gamma_e: float

    def __post_init__(self):
        for name in ("p_tx1", "p_tx2", "d1", "d2", "alpha1", "alpha2",
                     "upsilon1", "upsilon2", "p_noise", "gamma_d", "gamma_e"):
            value = getattr(self, name)
            if not (isinstance(value, (int, float)) and math.isfinite(value) and value > 0):
                raise ValueError(f"{name} must be a finite positive number, got {value!r}")
        if not 0.0 <= self.rho <= 1.0:
            raise ValueError(f"rho must lie in [0, 1], got {self.rho!r}")

    @property
    def g1(self) -> float:
        return power_factor(self.p_tx1, self.d1, self.alpha1)

    @property
    def g2(self) -> float:
        return power_factor(self.p_tx2, self.d2, self.alpha2)


@dataclass(frozen=True)
class SuccessProbs:
    """Link-level success probabilities.

    Attributes:
        p_d1: data decoded when only transmitter 1 is active.
        p_d12: data decoded when both transmitters are active.
        p_e2: energy packet harvested when only transmitter 2 is active.
        p_e12: energy packet harvested when both transmitters are active.
    """

    p_d1: float
    p_d12: float
    p_e2: float
    p_e12: float

    def __post_init__(self):
        for name in ("p_d1", "p_d12", "p_e2", "p_e12"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
        # interference can only hurt decoding
        if self.p_d12 > self.p_d1 + 1e-12:
            raise ValueError(
                f"p_d12 ({self.p_d12}) must not exceed p_d1 ({self.p_d1})")

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p_d1, self.p_d12, self.p_e2, self.p_e12)


def power_factor(p_tx: float, d: float, alpha: float) -> float:
    """Large-scale received power factor ``p_tx * d**(-alpha)``."""
    for name, value in (("p_tx", p_tx), ("d", d), ("alpha", alpha)):
        if not value > 0:
            raise ValueError(f"{name} must be positive, got {value!r}")
    return p_tx * d ** (-alpha)


def cdf_sum_exponentials(a: float, b: float, x: float) -> float:
    """CDF at ``x`` of ``X1 + X2`` with independent exponentials of means a, b.

    For distinct scales this is the divided difference of
    ``s -> s * (1 - exp(-x / s))`` between ``a`` and ``b``. When the scales
    nearly coincide the formula cancels catastrophically, so the Erlang-2 CDF
    at the midpoint scale is used instead (its error is second order in the
    gap).
    """
    if not (a > 0 and b > 0):
        raise ValueError(f"scales must be positive, got a={a!r}, b={b!r}")
    if x < 0:
        raise ValueError(f"x must be non-negative, got {x!r}")
    if x == 0:
        return 0.0
    if math.isinf(x):
        return 1.0
    if abs(a - b) <= _EQUAL_SCALE_GAP * max(a, b):
        c = 0.5 * (a + b)
        z = x / c
        return -math.expm1(-z) - z * math.exp(-z)
    fa = -a * math.expm1(-x / a)
    fb = -b * math.expm1(-x / b)
    return min(1.0, max(0.0, (fa - fb) / (a - b)))


def success_probs(params: ChannelParams) -> SuccessProbs:
    """Closed-form success probabilities under Rayleigh fading."""
    g1, g2 = params.g1, params.g2
    s1 = g1 * params.upsilon1
    s2 = g2 * params.upsilon2
    rho2 = params.rho ** 2

    p_d1 = math.exp(-params.gamma_d * params.p_noise / s1)
    p_e2 = math.exp(-params.gamma_e / s2)

    if rho2 >= 1.0:
        p_d12 = 0.0
    else:
        p_d12 = (math.exp(-params.gamma_d * params.p_noise / ((1.0 - rho2) * s1))
                 / (1.0 + params.gamma_d * s2 / s1))

    if rho2 == 0.0:
        p_e12 = 0.0
    else:
        p_e12 = 1.0 - cdf_sum_exponentials(s1, s2, params.gamma_e / rho2)

    return SuccessProbs(p_d1=p_d1, p_d12=p_d12, p_e2=p_e2, p_e12=p_e12)


def _exponential(rng: np.random.Generator, mean: float, size) -> np.ndarray:
    # inverse-CDF transform keeps draws a pure function of the uniform stream
    return -mean * np.log1p(-rng.random(size))


def sample_physics(params: ChannelParams, active1, active2, rng: np.random.Generator):
    """Vectorised per-slot fading draws and threshold decisions.

    Args:
        params: channel deployment.
        active1, active2: boolean arrays of transmitter activity per slot.
        rng: numpy Generator; two uniforms are consumed per slot regardless
            of activity so the stream layout does not depend on the policy.

    Returns:
        ``(data_ok, energy_ok)`` boolean arrays.
    """
    active1 = np.asarray(active1, dtype=bool)
    active2 = np.asarray(active2, dtype=bool)
    shape = np.broadcast(active1, active2).shape
    rx1 = params.g1 * _exponential(rng, params.upsilon1, shape)
    rx2 = params.g2 * _exponential(rng, params.upsilon2, shape)
    rho2 = params.rho ** 2

    both = active1 & active2
    only1 = active1 & ~active2
    only2 = active2 & ~active1

    data_ok = np.zeros(shape, dtype=bool)
    energy_ok = np.zeros(shape, dtype=bool)

    data_ok[only1] = rx1[only1] / params.p_noise >= params.gamma_d
    energy_ok[only2] = rx2[only2] >= params.gamma_e

    if rho2 < 1.0:
        eff_noise = params.p_noise / (1.0 - rho2)
        data_ok[both] = rx1[both] / (rx2[both] + eff_noise) >= params.gamma_d
    energy_ok[both] = rho2 * (rx1[both] + rx2[both]) >= params.gamma_e
    return data_ok, energy_ok


def sample_slot_physics(params: ChannelParams, case: str, rng: np.random.Generator):
    """Single-slot version of :func:`sample_physics` for one activity case."""
    if case not in CASES:
        raise ValueError(f"case must be one of {CASES}, got {case!r}")
    a1 = case in ("both", "only1")
    a2 = case in ("both", "only2")
    d, e = sample_physics(params, np.array([a1]), np.array([a2]), rng)
    return bool(d[0]), bool(e[0])
