"""Age of Actuation analytics, simulation and optimisation for SWIPT-powered actuators."""

from .channel import ChannelParams, SuccessProbs, cdf_sum_exponentials, success_probs
from .metrics import AccessPolicy, Battery, BatteryModel, EventProbs, evaluate, event_probs

__all__ = [
    "ChannelParams",
    "SuccessProbs",
    "cdf_sum_exponentials",
    "success_probs",
    "AccessPolicy",
    "Battery",
    "BatteryModel",
    "EventProbs",
    "evaluate",
    "event_probs",
]
