"""Optimal access probabilities.

Closed-form solutions cover the infinite battery. Each one enumerates its
candidate points on the square's corners, borders and interior and keeps
the best, instead of trusting a fixed case table. A lattice search (:func:`grid_oracle`) verifies them independently and
handles the finite battery, where no closed form exists.

Conventions used throughout:

* ``k = p_d1 - p_d12`` is the interference penalty on data decoding.
* With an infinite battery the mean AoA is ``1 / min(P_D, P_E)``: when the
  battery drains faster than it charges, actuations are limited by energy
  (``P_E``), otherwise by data (``P_D``).
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .channel import SuccessProbs
from .metrics import (INFINITE, AccessPolicy, Battery, evaluate, event_probs, metric_surface,
                      poma)

__all__ = [
    "ProblemKind",
    "OptProblem",
    "OptResult",
    "lattice",
    "grid_oracle",
    "minimize_mean_aoi",
    "minimize_mean_aoa",
    "minimize_mean_aoa_finite",
    "minimize_violation",
    "minimize_aoi_subject_to_aoa",
    "minimize_poma_subject_to_aoi",
    "mean_aoa_candidates",
    "poma_border_point",
    "poma_interior_point",
    "poma_switch_delta",
    "grad_mean_aoi",
    "grad_mean_aoa_energy_limited",
    "solve",
]

# closed form loses to the grid only when the grid is better by more than this
_GRID_MARGIN = 1e-6
_REFINE_FACTOR = 100
_REFINE_HALF_WIDTH = 2
_MAX_RECENTRE = 200
_TIE_TOL = 1e-12


class ProblemKind(enum.Enum):
    MIN_MEAN_AOI = "min-mean-aoi"
    MIN_MEAN_AOA = "min-mean-aoa"
    MIN_AOI_VIOLATION = "min-aoi-violation"
    MIN_AOA_VIOLATION = "min-aoa-violation"
    MIN_AOI_SUBJECT_TO_AOA = "min-aoi-subject-to-aoa"
    MIN_POMA_SUBJECT_TO_AOI = "min-poma-subject-to-aoi"


@dataclass(frozen=True)
class OptProblem:
    kind: ProblemKind
    succ: SuccessProbs
    model: Battery = INFINITE
    delta: Optional[float] = None
    threshold: int = 5

    def __post_init__(self):
        needs_delta = self.kind in (ProblemKind.MIN_AOI_SUBJECT_TO_AOA,
                                    ProblemKind.MIN_POMA_SUBJECT_TO_AOI)
        if needs_delta and self.delta is None:
            raise ValueError(f"{self.kind.value} needs a bound delta")
        if int(self.threshold) != self.threshold or self.threshold < 1:
            raise ValueError("threshold must be an integer >= 1")


@dataclass
class OptResult:
    """Optimum of one problem.

    ``case_label`` names the regime that produced the point, e.g.
    ``"border q1=1 (delta2)"`` or ``"grid"``. For constrained problems
    ``feasible`` is False when no point meets the bound; the point then
    carries the best unconstrained answer instead.
    """

    q1_star: float
    q2_star: float
    value: float
    case_label: str
    feasible: bool = True
    extras: dict = field(default_factory=dict)

    @property
    def point(self) -> tuple:
        return (self.q1_star, self.q2_star)

    def as_dict(self) -> dict:
        out = {"q1": self.q1_star, "q2": self.q2_star, "value": self.value,
               "case": self.case_label, "feasible": self.feasible}
        for key, val in self.extras.items():
            out[key] = val.as_dict() if isinstance(val, OptResult) else val
        return out


# ---------------------------------------------------------------------------
# lattice search


def lattice(step: float, lo: float = 0.0, hi: float = 1.0) -> np.ndarray:
    """Points ``lo, lo+step, ...`` up to ``hi``, always including ``hi``."""
    if not step > 0:
        raise ValueError("step must be positive")
    n = int(math.floor((hi - lo) / step + 1e-9))
    pts = np.round(lo + step * np.arange(n + 1), 12)
    if hi - pts[-1] > 1e-12:
        pts = np.append(pts, hi)
    return pts


def _masked_surface(objective, constraint, q1, q2, succ, model, threshold):
    Q1, Q2 = np.meshgrid(q1, q2, indexing="ij")
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        vals = metric_surface(objective, Q1, Q2, succ, model, threshold)
        vals = np.where(np.isnan(vals), np.inf, vals)
        ok = np.ones_like(vals, dtype=bool)
        if constraint is not None:
            name, bound = constraint
            cvals = metric_surface(name, Q1, Q2, succ, model, threshold)
            ok = cvals <= bound * (1 + 1e-12)
    return np.where(ok, vals, np.inf), ok


def _argmin(vals):
    # values within rounding of the minimum count as ties; the first one in
    # row-major order has the smallest q1 and then the smallest q2
    lo = np.min(vals)
    if not np.isfinite(lo):
        return np.unravel_index(int(np.argmin(vals)), vals.shape)
    tied = vals <= lo + _TIE_TOL * max(1.0, abs(lo))
    return np.unravel_index(int(np.argmax(tied)), vals.shape)


def _zoom(objective, constraint, succ, model, threshold, best, step, fine):
    """Refine ``best`` on a ``fine`` lattice spanning two coarse steps around it.

    The window is re-centred on every improvement, so the search can follow
    a narrow valley (a kinked ridge or an active constraint) past the first
    window.
    """
    w = _REFINE_HALF_WIDTH * step
    for _ in range(_MAX_RECENTRE):
        lo1, hi1 = max(0.0, best[0] - w), min(1.0, best[0] + w)
        lo2, hi2 = max(0.0, best[1] - w), min(1.0, best[1] + w)
        f1, f2 = lattice(fine, lo1, hi1), lattice(fine, lo2, hi2)
        fv, fok = _masked_surface(objective, constraint, f1, f2, succ, model, threshold)
        if not fok.any():
            break
        a, b = _argmin(fv)
        if not fv[a, b] < best[2]:
            break
        best = (float(f1[a]), float(f2[b]), float(fv[a, b]))
    return best


def grid_oracle(objective: str, succ: SuccessProbs, model: Battery = INFINITE,
                step: float = 1e-3, constraint: Optional[tuple] = None,
                refine: bool = False, threshold: int = 5) -> OptResult:
    """Exhaustive lattice minimisation of a metric over ``[0, 1]^2``.

    Args:
        objective: metric name understood by :func:`metrics.metric_surface`.
        succ: success probabilities.
        model: battery model.
        step: lattice spacing, in ``(0, 0.1]``.
        constraint: optional ``(metric, bound)`` requiring ``metric <= bound``.
        refine: rerun at ``step / 100`` in a window of two coarse steps
            around the coarse winner, re-centring while that improves.
        threshold: tail threshold for violation metrics.
    """
    if not 0 < step <= 0.1:
        raise ValueError(f"grid step must lie in (0, 0.1], got {step}")
    q = lattice(step)
    vals, ok = _masked_surface(objective, constraint, q, q, succ, model, threshold)
    if not ok.any():
        return OptResult(math.nan, math.nan, math.inf, "grid", feasible=False)
    i, j = _argmin(vals)
    best = (float(q[i]), float(q[j]), float(vals[i, j]))
    if not math.isfinite(best[2]) and constraint is not None and not np.isfinite(vals).any():
        return OptResult(best[0], best[1], best[2], "grid", feasible=False)
    label = f"grid (step {step:g})"
    if refine:
        fine = step / _REFINE_FACTOR
        best = _zoom(objective, constraint, succ, model, threshold, best, step, fine)
        # a second, finer pass pins down the argmin along flat valleys
        best = _zoom(objective, constraint, succ, model, threshold, best, fine,
                     fine / _REFINE_FACTOR)
        label = f"grid (step {step:g}, refined to {fine:g})"
    return OptResult(best[0], best[1], best[2], label)


# ---------------------------------------------------------------------------
# gradients


def grad_mean_aoi(q1: float, q2: float, succ: SuccessProbs) -> np.ndarray:
    """Gradient of ``1 / P_D`` with respect to (q1, q2)."""
    pd1, pd12 = succ.p_d1, succ.p_d12
    p_d = q1 * (pd1 - q2 * (pd1 - pd12))
    return np.array([-(pd1 * (1 - q2) + pd12 * q2) / p_d**2,
                     q1 * (pd1 - pd12) / p_d**2])


def grad_mean_aoa_energy_limited(q1: float, q2: float, succ: SuccessProbs) -> np.ndarray:
    """Gradient of ``1 / P_E``, the mean AoA where energy is the bottleneck."""
    pe2, pe12 = succ.p_e2, succ.p_e12
    x = (q1 - 1) * pe2 - q1 * pe12
    return np.array([(pe2 - pe12) / (x**2 * q2), 1.0 / (x * q2**2)])


# ---------------------------------------------------------------------------
# helpers


def _inside(q1, q2, tol=1e-12) -> bool:
    return (q1 is not None and q2 is not None and math.isfinite(q1) and math.isfinite(q2)
            and -tol <= q1 <= 1 + tol and -tol <= q2 <= 1 + tol)


def _clip(x):
    return min(1.0, max(0.0, x))


def _infinite_mean_aoa(q1, q2, succ):
    return float(metric_surface("mean_aoa", q1, q2, succ, INFINITE))


def _grid_check(result: OptResult, objective, succ, model, constraint=None,
                step=1e-3) -> OptResult:
    grid = grid_oracle(objective, succ, model, step=step, constraint=constraint, refine=True)
    result.extras["grid"] = grid
    if grid.feasible and grid.value < result.value - _GRID_MARGIN * max(1.0, abs(result.value)):
        return OptResult(grid.q1_star, grid.q2_star, grid.value,
                         f"grid (closed form {result.case_label} was worse by "
                         f"{result.value - grid.value:.3g})",
                         extras={"closed_form": result, "grid": grid})
    return result


# ---------------------------------------------------------------------------
# mean AoI


def minimize_mean_aoi(succ: SuccessProbs) -> OptResult:
    """Mean AoI falls in q1 and rises in q2, so the corner (1, 0) is optimal."""
    if succ.p_d1 <= 0:
        raise ValueError("p_d1 must be positive for a finite mean AoI")
    return OptResult(1.0, 0.0, 1.0 / succ.p_d1, "corner [1, 0]")


# ---------------------------------------------------------------------------
# mean AoA, infinite battery


def mean_aoa_candidates(succ: SuccessProbs) -> dict:
    """Candidate optima of the infinite-battery mean AoA, keyed by label.

    The optimum lies on the curve where charging and draining balance
    (``P_D = P_E``) or at the corner (1, 1). On that curve the candidates
    are its crossings with the borders ``q1 = 1`` (delta2) and ``q2 = 1``
    (delta1) and its interior critical point (theta1, theta2), which is
    real only when interference lowers the energy success
    (``p_e12 < p_e2``).
    """
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    out = {"corner [1, 1]": (1.0, 1.0)}

    den = pd1 + pe12 - pd12
    if den > 0:
        delta2 = pd1 / den
        if 0 <= delta2 <= 1:
            out["border q1=1 (delta2)"] = (1.0, delta2)
    den = pe2 + pd12 - pe12
    if den > 0:
        delta1 = pe2 / den
        if 0 <= delta1 <= 1:
            out["border q2=1 (delta1)"] = (delta1, 1.0)

    k = pd1 - pd12
    s = k + pe12 - pe2
    radicand = k * pe2**2 * (pe2 - pe12)
    if pe12 < pe2 and radicand > 0 and s != 0:
        root = math.sqrt(radicand)
        theta1 = (pe2 * (pe2 - pe12) - root) / ((pe12 - pe2) * s)
        theta2 = pd1 * (pe12 * pe2 - pe2**2 + root) / (s * root)
        if 0 < theta1 < 1 and 0 < theta2 < 1:
            out["interior critical point (theta1, theta2)"] = (theta1, theta2)
    return out


def _best_candidate(cands: dict, value_fn) -> OptResult:
    best = None
    for label, (q1, q2) in cands.items():
        v = value_fn(q1, q2)
        if best is None or v < best.value - 1e-15:
            best = OptResult(q1, q2, v, label)
    return best


def minimize_mean_aoa(succ: SuccessProbs, verify: bool = True) -> OptResult:
    """Minimum mean AoA with an infinite battery.

    Args:
        succ: success probabilities.
        verify: also run the lattice search (step 1e-3, refined) and return
            its answer if it beats the closed form by more than 1e-6.
    """
    best = _best_candidate(mean_aoa_candidates(succ),
                           lambda a, b: _infinite_mean_aoa(a, b, succ))
    if verify:
        best = _grid_check(best, "mean_aoa", succ, INFINITE)
    return best


def minimize_mean_aoa_finite(succ: SuccessProbs, m: int, step: float = 0.01,
                             fine_step: float = 1e-4) -> OptResult:
    """Minimum mean AoA with a battery of ``m`` packets, by two-stage lattice search."""
    model = Battery(m)
    coarse = grid_oracle("mean_aoa", succ, model, step=step)
    w = _REFINE_HALF_WIDTH * step
    f1 = lattice(fine_step, max(0.0, coarse.q1_star - w), min(1.0, coarse.q1_star + w))
    f2 = lattice(fine_step, max(0.0, coarse.q2_star - w), min(1.0, coarse.q2_star + w))
    vals, _ = _masked_surface("mean_aoa", None, f1, f2, succ, model, 5)
    i, j = _argmin(vals)
    if vals[i, j] < coarse.value:
        q1, q2, v = float(f1[i]), float(f2[j]), float(vals[i, j])
    else:
        q1, q2, v = coarse.q1_star, coarse.q2_star, coarse.value
    return OptResult(q1, q2, v, f"grid (step {step:g}, refined to {fine_step:g})",
                     extras={"battery": m})


# ---------------------------------------------------------------------------
# violation probabilities


def minimize_violation(kind: str, succ: SuccessProbs, model: Battery = INFINITE,
                       threshold: int = 5) -> OptResult:
    """Minimum AoI or AoA violation probability.

    Both tails are decreasing functions of the matching reset probability,
    so they share their argmin with the mean-age problems; the value is the
    tail evaluated there.
    """
    if int(threshold) != threshold or threshold < 1:
        raise ValueError("threshold must be an integer >= 1")
    if kind == "aoi":
        base = minimize_mean_aoi(succ)
        metric = "aoi_violation"
    elif kind == "aoa":
        base = (minimize_mean_aoa(succ) if not model.is_finite
                else minimize_mean_aoa_finite(succ, model.capacity))
        metric = "aoa_violation"
    else:
        raise ValueError(f"kind must be 'aoi' or 'aoa', got {kind!r}")
    v = float(metric_surface(metric, base.q1_star, base.q2_star, succ, model, threshold))
    return OptResult(base.q1_star, base.q2_star, v, f"argmin of mean ({base.case_label})",
                     extras={"threshold": threshold, "mean": base.value})


# ---------------------------------------------------------------------------
# mean AoI subject to mean AoA <= delta, infinite battery


def minimize_aoi_subject_to_aoa(succ: SuccessProbs, delta: float,
                                verify: bool = False) -> OptResult:
    """Minimum mean AoI subject to mean AoA at most ``delta``.

    The AoA bound is active at the optimum, so the search runs along the
    curve ``P_E = 1 / delta``: ``q2 = 1 / (delta (p_e2 + q1 (p_e12 - p_e2)))``.
    Candidates are the point on ``q1 = 1`` (phi), the critical point of
    ``P_D`` along the curve (lambda) and the curve's crossing with
    ``q2 = 1``.

    Raises:
        ValueError: if ``delta < 1``; no policy has a mean AoA below one slot.
    """
    if not delta >= 1:
        raise ValueError(f"delta must be >= 1 slot, got {delta!r}")
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    unconstrained = minimize_mean_aoa(succ, verify=False)
    if unconstrained.value > delta * (1 + 1e-12):
        return OptResult(unconstrained.q1_star, unconstrained.q2_star, math.inf,
                         "infeasible: bound below the minimum mean AoA", feasible=False,
                         extras={"unconstrained_aoa": unconstrained})

    k = pd1 - pd12
    c = pe12 - pe2
    target = 1.0 / delta
    cands = {}
    if pe12 > 0:
        cands["border q1=1 (phi)"] = (1.0, 1.0 / (pe12 * delta))
    if c < 0 and k > 0 and pd1 > 0:
        root = math.sqrt(pd1 * k * c**2 * pe2 * delta)
        lam1 = (pd1 * pe2 * (-c) * delta - root) / (pd1 * c**2 * delta)
        lam2 = pd1 * (-c) / root
        cands["interior critical point (lambda1, lambda2)"] = (lam1, lam2)
    if c != 0:
        cands["border q2=1"] = ((target - pe2) / c, 1.0)

    best = None
    for label, (q1, q2) in cands.items():
        if not _inside(q1, q2):
            continue
        q1, q2 = _clip(q1), _clip(q2)
        ev = event_probs(AccessPolicy(q1, q2), succ)
        if min(ev.p_D, ev.p_E) < target * (1 - 1e-9):
            continue
        v = 1.0 / ev.p_D
        if best is None or v < best.value - 1e-15:
            best = OptResult(q1, q2, v, label)
    if best is None:
        # the bound is feasible but only at the AoA optimum itself
        best = OptResult(unconstrained.q1_star, unconstrained.q2_star,
                         1.0 / event_probs(AccessPolicy(*unconstrained.point), succ).p_D,
                         f"AoA optimum ({unconstrained.case_label})")
    if best.case_label == "border q1=1 (phi)":
        best.extras["closed_form_value"] = pe12 * delta / (pd12 + pd1 * (pe12 * delta - 1))
    if verify:
        best = _grid_check(best, "mean_aoi", succ, INFINITE, constraint=("mean_aoa", delta))
    return best


# ---------------------------------------------------------------------------
# PoMA subject to mean AoI <= delta


def poma_border_point(succ: SuccessProbs, delta: float):
    """Crossing of the balance curve ``P_D = P_E`` with ``P_D = 1 / delta``.

    Returns ``(q1, q2, poma_value)`` or ``None`` when the crossing is not real.
    """
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    s = pd1 - pd12 + pe12 - pe2
    disc = (pd1 * pe2 * delta - s) ** 2 - 4 * pd1 * pe2 * (pe2 - pe12) * delta
    if disc < 0 or pe12 == pe2 or pd1 == pd12:
        return None
    r = math.sqrt(disc)
    q1 = (s + r - pd1 * pe2 * delta) / (2 * pd1 * (pe12 - pe2) * delta)
    q2 = (s - r + pd1 * pe2 * delta) / (2 * pe2 * (pd1 - pd12) * delta)
    value = ((s - r + pe2 * delta * (2 - pd1)) * (s + r - pd1 * pe2 * delta)
             / (4 * pd1 * pe2 * delta**2 * (pe12 - pe2)))
    return q1, q2, value


def poma_interior_point(succ: SuccessProbs, delta: float):
    """Minimiser of PoMA along ``P_D = 1 / delta`` inside the energy-limited region.

    Returns ``(q1, q2)`` or ``None`` when the expression is not real.
    """
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    k = pd1 - pd12
    den = pd1 * (1 - pe12 + pe2) - pd12
    if den <= 0 or k <= 0 or pe2 <= 0:
        return None
    q1 = math.sqrt(pe2 / (den * delta))
    q2 = (pd1**2 * pe2 * delta - pd1 * pd12 * pe2 * delta
          - math.sqrt(k**2 * pe2 * den * delta)) / (k**2 * pe2 * delta)
    return q1, q2


def _balance_residual(succ, q1, q2):
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    s = pd1 - pd12 + pe12 - pe2
    return q1 * pd1 - q2 * pe2 - q1 * q2 * s


def poma_switch_delta(succ: SuccessProbs, hi: float = 1e3, tol: float = 1e-8) -> float:
    """Bound at which the PoMA optimum moves from the interior to the balance curve.

    Found by bisection on the balance residual at :func:`poma_interior_point`.
    Returns ``nan`` when the residual does not change sign on ``[1/p_d1, hi]``.
    """
    lo = 1.0 / succ.p_d1

    def g(d):
        pt = poma_interior_point(succ, d)
        return math.nan if pt is None else _balance_residual(succ, *pt)

    glo, ghi = g(lo), g(hi)
    if not (math.isfinite(glo) and math.isfinite(ghi)) or glo * ghi > 0:
        return math.nan
    a, b = lo, hi
    while b - a > tol:
        mid = 0.5 * (a + b)
        gm = g(mid)
        if gm == 0:
            return mid
        if (gm > 0) == (glo > 0):
            a, glo = mid, gm
        else:
            b = mid
    return 0.5 * (a + b)


def minimize_poma_subject_to_aoi(succ: SuccessProbs, delta: float,
                                 model: Battery = INFINITE, verify: bool = False,
                                 step: float = 1e-3, refine: bool = True) -> OptResult:
    """Minimum PoMA subject to mean AoI at most ``delta``.

    Infinite battery: PoMA grows with q1, so the AoI bound is active and
    ``q1 = 1 / (delta (p_d1 - k q2))``. Along that line the candidates are
    the crossing with the balance curve, the interior minimiser of the
    energy-limited piece and the segment ends. The bound ``delta_hat``
    separating the first two regimes is reported in ``extras``.

    Finite battery: lattice search of PoMA with the AoI bound as a filter.
    """
    if not delta > 0:
        raise ValueError(f"delta must be positive, got {delta!r}")
    pd1, pd12, pe2, pe12 = succ.as_tuple()
    if pd1 <= 0 or delta * pd1 < 1 - 1e-12:
        best = minimize_mean_aoi(succ) if pd1 > 0 else OptResult(1.0, 0.0, math.inf, "no data")
        return OptResult(best.q1_star, best.q2_star, math.inf,
                         "infeasible: bound below the minimum mean AoI", feasible=False,
                         extras={"unconstrained_aoi": best})
    if model.is_finite:
        res = grid_oracle("poma", succ, model, step=step, constraint=("mean_aoi", delta),
                          refine=refine)
        res.extras["battery"] = model.capacity
        return res

    k = pd1 - pd12
    target = 1.0 / delta

    def on_line(q2):
        return 1.0 / (delta * (pd1 - k * q2))

    cands = {}
    border = poma_border_point(succ, delta)
    if border is not None:
        cands["balance-curve crossing"] = border[:2]
    interior = poma_interior_point(succ, delta)
    if interior is not None:
        cands["energy-limited interior minimum"] = interior
    cands["segment end q2=0"] = (on_line(0.0), 0.0)
    if k > 0:
        q2_edge = (pd1 - target) / k
        if q2_edge <= 1:
            cands["segment end q1=1"] = (1.0, q2_edge)
    if pd12 > 0:
        cands["segment end q2=1"] = (on_line(1.0), 1.0)

    best = None
    for label, (q1, q2) in cands.items():
        if not _inside(q1, q2, tol=1e-9):
            continue
        q1, q2 = _clip(q1), _clip(q2)
        pol = AccessPolicy(q1, q2)
        ev = event_probs(pol, succ)
        if ev.p_D < target * (1 - 1e-9):
            continue
        v = poma(pol, succ, ev, INFINITE)
        if best is None or v < best.value - 1e-15:
            best = OptResult(q1, q2, v, label)

    switch = poma_switch_delta(succ)
    best.extras["delta_hat"] = switch
    if best.case_label == "balance-curve crossing":
        best.extras["closed_form_value"] = border[2]
    if verify:
        best = _grid_check(best, "poma", succ, INFINITE, constraint=("mean_aoi", delta))
    return best


# ---------------------------------------------------------------------------


def solve(problem: OptProblem, verify: bool = False) -> OptResult:
    """Dispatch an :class:`OptProblem` to its solver.

    Finite-battery variants of problems that only have infinite-battery
    closed forms fall back to the lattice search.
    """
    kind, succ, model = problem.kind, problem.succ, problem.model
    if kind is ProblemKind.MIN_MEAN_AOI:
        return minimize_mean_aoi(succ)
    if kind is ProblemKind.MIN_MEAN_AOA:
        if model.is_finite:
            return minimize_mean_aoa_finite(succ, model.capacity)
        return minimize_mean_aoa(succ, verify=verify)
    if kind is ProblemKind.MIN_AOI_VIOLATION:
        return minimize_violation("aoi", succ, model, problem.threshold)
    if kind is ProblemKind.MIN_AOA_VIOLATION:
        return minimize_violation("aoa", succ, model, problem.threshold)
    if kind is ProblemKind.MIN_AOI_SUBJECT_TO_AOA:
        if model.is_finite:
            if problem.delta < 1:
                raise ValueError(f"delta must be >= 1 slot, got {problem.delta!r}")
            return grid_oracle("mean_aoi", succ, model, step=1e-3,
                               constraint=("mean_aoa", problem.delta), refine=True)
        return minimize_aoi_subject_to_aoa(succ, problem.delta, verify=verify)
    if kind is ProblemKind.MIN_POMA_SUBJECT_TO_AOI:
        return minimize_poma_subject_to_aoi(succ, problem.delta, model, verify=verify)
    raise ValueError(f"unknown problem kind {kind!r}")


def evaluate_at(result: OptResult, succ: SuccessProbs, model: Battery = INFINITE):
    """Full metrics report at an optimiser's point."""
    return evaluate(AccessPolicy(result.q1_star, result.q2_star), succ, model)
