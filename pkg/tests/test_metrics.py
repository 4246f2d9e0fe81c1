import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from swipt_aoa.channel import SuccessProbs
from swipt_aoa.metrics import (INFINITE, METRICS, AccessPolicy, Battery, EventProbs,
                               actuation_prob, aoa_violation, aoa_violation_exact, aoi_violation,
                               battery_stationary, battery_transition_matrix, drop_rate,
                               energy_ratio_surface, evaluate, event_probs, mean_aoa,
                               mean_aoa_exact, mean_aoi, metric_surface, poma)

unit = st.floats(0.0, 1.0)


@st.composite
def succ_probs(draw):
    pd1 = draw(st.floats(0.01, 1.0))
    pd12 = draw(st.floats(0.0, 1.0)) * pd1
    return SuccessProbs(pd1, pd12, draw(st.floats(0.0, 1.0)), draw(st.floats(0.0, 1.0)))


def _ev(**kw):
    base = dict(p_D=0, p_E=0, p_DE=0, p_DeB=0, p_DbE=0, p_DbEb=1)
    base.update(kw)
    return EventProbs(**base)


def test_policy_validation():
    with pytest.raises(ValueError, match="q1"):
        AccessPolicy(1.5, 0.2)
    with pytest.raises(ValueError, match="q2"):
        AccessPolicy(0.2, -0.1)


def test_battery_validation_and_str():
    assert str(Battery()) == "infinite"
    assert str(Battery.finite(3)) == "finite(m=3)"
    assert Battery.infinite() == INFINITE
    with pytest.raises(ValueError):
        Battery(0)


def test_event_probs_setup1_full_access(succ1):
    ev = event_probs(AccessPolicy(1, 1), succ1)
    assert ev.p_D == pytest.approx(succ1.p_d12)
    assert ev.p_D == pytest.approx(0.6154, abs=1e-4)
    assert ev.p_DbE == pytest.approx(0.0895, abs=1e-4)
    assert ev.p_DeB == pytest.approx(0.4722, abs=1e-4)


def test_no_data_attempts_means_no_data_events(succ1):
    ev = event_probs(AccessPolicy(0, 0.4), succ1)
    assert ev.p_D == 0 and ev.p_DE == 0


@settings(max_examples=200, deadline=None)
@given(q1=unit, q2=unit, succ=succ_probs())
def test_joint_events_partition(q1, q2, succ):
    ev = event_probs(AccessPolicy(q1, q2), succ)
    parts = (ev.p_DE, ev.p_DeB, ev.p_DbE, ev.p_DbEb)
    assert all(p >= -1e-15 for p in parts)
    assert sum(parts) == pytest.approx(1.0, abs=1e-12)
    assert ev.p_D == pytest.approx(ev.p_DE + ev.p_DeB, abs=1e-15)
    assert ev.p_E == pytest.approx(ev.p_DE + ev.p_DbE, abs=1e-15)


def test_mean_aoi_examples(succ1, succ2):
    assert mean_aoi(_ev(p_D=1, p_DeB=1, p_DbEb=0)) == 1
    assert mean_aoi(_ev()) == math.inf
    assert mean_aoi(event_probs(AccessPolicy(1, 0), succ1)) == pytest.approx(1 / succ1.p_d1)
    assert mean_aoi(event_probs(AccessPolicy(1, 1), succ2)) == pytest.approx(2.975, abs=1e-3)


def test_aoi_violation_examples(succ1):
    assert aoi_violation(_ev(p_D=1, p_DeB=1, p_DbEb=0), 3) == 0
    ev = _ev(p_D=0.5, p_DeB=0.5, p_DbEb=0.5)
    # brute-force tail of the geometric law P{I = k} = p (1-p)^(k-1)
    brute = 1 - sum(0.5 * 0.5 ** (k - 1) for k in range(1, 3))
    assert aoi_violation(ev, 2) == pytest.approx(brute) == pytest.approx(0.25)
    assert aoi_violation(event_probs(AccessPolicy(1, 0), succ1), 5) == pytest.approx(0, abs=1e-30)
    with pytest.raises(ValueError):
        aoi_violation(ev, 1.5)


def test_battery_degenerate_branches():
    assert battery_stationary(_ev(), INFINITE).pi0 == 1.0
    assert battery_stationary(_ev(p_DeB=0.3, p_DbEb=0.7), INFINITE).pi0 == 1.0
    assert battery_stationary(_ev(p_DbE=0.3, p_DbEb=0.7), INFINITE).pi0 == 0.0
    sym = battery_stationary(_ev(p_DeB=0.2, p_DbE=0.2, p_DbEb=0.6), Battery(1))
    assert sym.pi0 == pytest.approx(0.5) and sym.pi_m == pytest.approx(0.5)
    full = battery_stationary(_ev(p_DbE=0.3, p_DbEb=0.7), Battery(4))
    assert full.pi0 == 0.0 and full.pi_m == 1.0


def test_battery_setup1_m3(succ1):
    ev = event_probs(AccessPolicy(1, 1), succ1)
    assert ev.ratio == pytest.approx(0.1895, abs=1e-4)
    bat = battery_stationary(ev, Battery(3))
    assert bat.pi0 == pytest.approx(0.8116, abs=1e-4)


@pytest.mark.parametrize("m", [1, 2, 3, 7, 20, 50])
@pytest.mark.parametrize("q", [(1, 1), (0.4, 0.9), (0.9, 0.3)])
def test_closed_form_matches_chain(succ2, m, q):
    ev = event_probs(AccessPolicy(*q), succ2)
    P = battery_transition_matrix(ev, m)
    assert np.allclose(P.sum(axis=1), 1.0, atol=1e-14)
    vals, vecs = np.linalg.eig(P.T)
    vec = np.real(vecs[:, np.argmin(np.abs(vals - 1))])
    vec = vec / vec.sum()
    bat = battery_stationary(ev, Battery(m))
    assert bat.pi0 == pytest.approx(vec[0], abs=1e-10)
    assert bat.pi_m == pytest.approx(vec[-1], abs=1e-10)


def test_large_battery_matches_infinite(succ1, succ2):
    for succ in (succ1, succ2):
        for q in [(1, 1), (0.5, 0.5), (0.9, 0.2), (1, 0.6)]:
            ev = event_probs(AccessPolicy(*q), succ)
            if not ev.ratio < 1:
                continue
            fin = evaluate(AccessPolicy(*q), succ, Battery(200))
            inf = evaluate(AccessPolicy(*q), succ, INFINITE)
            assert fin.battery.pi0 == pytest.approx(inf.battery.pi0, abs=1e-6)
            assert fin.mean_aoa == pytest.approx(inf.mean_aoa, abs=1e-6)
            assert fin.poma == pytest.approx(inf.poma, abs=1e-6)


@settings(max_examples=200, deadline=None)
@given(q1=unit, q2=unit, succ=succ_probs(), m=st.one_of(st.none(), st.integers(1, 30)))
def test_actuation_bounds(q1, q2, succ, m):
    model = Battery(m)
    ev = event_probs(AccessPolicy(q1, q2), succ)
    p_a = actuation_prob(ev, battery_stationary(ev, model))
    assert ev.p_DE - 1e-12 <= p_a <= ev.p_D + 1e-12
    assert mean_aoa(ev, model) >= mean_aoi(ev) - 1e-9
    if m is None:
        # infinite battery: actuation rate is the smaller of data and energy rates
        assert p_a == pytest.approx(min(ev.p_D, ev.p_E), abs=1e-12)


@settings(max_examples=200, deadline=None)
@given(q1=unit, q2=unit, succ=succ_probs(), m=st.one_of(st.none(), st.integers(1, 30)))
def test_poma_is_issued_minus_actuated(q1, q2, succ, m):
    policy = AccessPolicy(q1, q2)
    ev = event_probs(policy, succ)
    model = Battery(m)
    p_a = actuation_prob(ev, battery_stationary(ev, model))
    assert poma(policy, succ, ev, model) == pytest.approx(q1 - p_a, abs=1e-12)


def test_actuation_equals_data_rate_when_battery_never_empty(succ1):
    ev = _ev(p_D=0.4, p_DE=0.1, p_DeB=0.3, p_DbE=0.5, p_DbEb=0.1, p_E=0.6)
    bat = battery_stationary(ev, INFINITE)
    assert bat.pi0 == 0
    assert actuation_prob(ev, bat) == pytest.approx(ev.p_D)


def test_actuation_examples(succ1):
    ev = event_probs(AccessPolicy(1, 1), succ1)
    assert actuation_prob(ev, battery_stationary(ev, INFINITE)) == pytest.approx(succ1.p_e12)
    dead = _ev(p_DeB=0.5, p_D=0.5, p_DbEb=0.5)
    assert actuation_prob(dead, battery_stationary(dead, INFINITE)) == 0
    assert mean_aoa(dead, INFINITE) == math.inf


def test_mean_aoa_examples(succ1):
    ev = event_probs(AccessPolicy(1, 1), succ1)
    assert mean_aoa(ev, INFINITE) == pytest.approx(4.298, abs=1e-3)
    assert mean_aoa(ev, Battery(1)) == pytest.approx(4.6, abs=0.05)


def test_aoa_violation_examples():
    sure = _ev(p_D=1, p_E=1, p_DE=1, p_DbEb=0)
    assert aoa_violation(sure, INFINITE, 5) == 0
    half = _ev(p_D=0.5, p_E=0.5, p_DE=0.5, p_DbEb=0.5)
    assert aoa_violation(half, INFINITE, 1) == pytest.approx(0.5)


def test_poma_examples(succ1, succ2):
    assert poma(AccessPolicy(0, 0.7), succ1, event_probs(AccessPolicy(0, 0.7), succ1), INFINITE) == 0
    p = AccessPolicy(0.13, 0.52)
    assert poma(p, succ1, event_probs(p, succ1), INFINITE) == pytest.approx(0.026, abs=0.005)
    p = AccessPolicy(0.12, 0.25)
    assert poma(p, succ2, event_probs(p, succ2), Battery(1)) == pytest.approx(0.057, abs=0.005)


def test_drop_rate_examples(succ2):
    assert drop_rate(_ev(p_DeB=0.3, p_DbEb=0.7), Battery(2)) == 0
    sym = _ev(p_DeB=0.2, p_DbE=0.2, p_DbEb=0.6)
    assert drop_rate(sym, Battery(1)) == pytest.approx(0.1)
    with pytest.raises(ValueError):
        drop_rate(sym, INFINITE)


def test_energy_balance_finite(succ2):
    # charges in = discharges out + drops, in stationarity
    for q in [(1, 1), (0.5, 0.8), (0.9, 0.4)]:
        ev = event_probs(AccessPolicy(*q), succ2)
        for m in (1, 3, 10):
            bat = battery_stationary(ev, Battery(m))
            assert ev.p_DbE == pytest.approx(ev.p_DeB * (1 - bat.pi0) + drop_rate(ev, Battery(m)),
                                             abs=1e-12)


@pytest.mark.parametrize("name", [n for n in METRICS if n != "drop_rate"])
@pytest.mark.parametrize("m", [None, 1, 4])
def test_surface_matches_record_api(succ2, name, m):
    model = Battery(m)
    q1, q2 = np.meshgrid(np.linspace(0, 1, 7), np.linspace(0, 1, 7), indexing="ij")
    surf = metric_surface(name, q1, q2, succ2, model, threshold=4)
    for i in range(7):
        for j in range(7):
            rep = evaluate(AccessPolicy(q1[i, j], q2[i, j]), succ2, model, 4, 4)
            want = {"mean_aoi": rep.mean_aoi, "aoi_violation": rep.v_I, "mean_aoa": rep.mean_aoa,
                    "aoa_violation": rep.v_A, "poma": rep.poma, "pi0": rep.battery.pi0}[name]
            assert surf[i, j] == pytest.approx(want, rel=1e-12, abs=1e-14)


def test_surface_drop_rate(succ2):
    surf = metric_surface("drop_rate", 0.5, 0.8, succ2, Battery(2))
    rep = evaluate(AccessPolicy(0.5, 0.8), succ2, Battery(2))
    assert float(surf) == pytest.approx(rep.drop_rate)
    with pytest.raises(ValueError):
        metric_surface("drop_rate", 0.5, 0.8, succ2)
    with pytest.raises(ValueError):
        metric_surface("bogus", 0.5, 0.8, succ2)


def test_ratio_surface(succ1):
    r = energy_ratio_surface(np.array([1.0, 0.0]), np.array([1.0, 1.0]), succ1)
    assert r[0] == pytest.approx(event_probs(AccessPolicy(1, 1), succ1).ratio)
    assert r[1] == math.inf


def test_exact_aoa_brute_force_chain(succ2):
    # joint (battery, age) chain truncated at a large age, solved by iteration
    ev = event_probs(AccessPolicy(1, 0.78), succ2)
    m, amax = 1, 400
    pi = np.zeros((m + 1, amax))
    pi[0, 0] = 1.0
    for _ in range(3000):
        nxt = np.zeros_like(pi)
        for b in range(m + 1):
            for a in range(amax):
                w = pi[b, a]
                if w == 0:
                    continue
                a_next = min(a + 1, amax - 1)
                # (D, E): actuate, level unchanged
                nxt[b, 0] += w * ev.p_DE
                # (D, not E)
                if b > 0:
                    nxt[b - 1, 0] += w * ev.p_DeB
                else:
                    nxt[0, a_next] += w * ev.p_DeB
                # (not D, E)
                nxt[min(b + 1, m), a_next] += w * ev.p_DbE
                nxt[b, a_next] += w * ev.p_DbEb
        pi = nxt
    ages = np.arange(1, amax + 1)
    brute_mean = float(pi.sum(axis=0) @ ages)
    assert mean_aoa_exact(ev, Battery(m)) == pytest.approx(brute_mean, rel=1e-8)
    brute_tail = float(pi.sum(axis=0)[5:].sum())
    assert aoa_violation_exact(ev, Battery(m), 5) == pytest.approx(brute_tail, rel=1e-8)


def test_exact_aoa_infinite_is_mean_field(succ1):
    ev = event_probs(AccessPolicy(1, 1), succ1)
    assert mean_aoa_exact(ev, INFINITE) == mean_aoa(ev, INFINITE)


def test_report_dict_keys(succ1):
    d = evaluate(AccessPolicy(1, 1), succ1, Battery(2)).as_dict()
    for key in ("mean_aoi", "mean_aoa", "aoi_violation", "aoa_violation", "poma", "drop_rate",
                "pi0", "pi_m", "p_A", "mean_aoa_exact"):
        assert key in d
