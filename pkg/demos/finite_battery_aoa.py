"""Mean AoA with a small battery: mean-field formula, battery-chain value, simulation.

The mean-field value 1/p_A treats actuations as independent from slot to
slot. With a small battery they are not: a slot that drains the battery
makes the next actuation less likely. The battery-chain value tracks the
battery level between actuations and agrees with simulation.

Run: python3 demos/finite_battery_aoa.py
"""

from swipt_aoa.channel import success_probs
from swipt_aoa.metrics import INFINITE, AccessPolicy, Battery, event_probs, mean_aoa, mean_aoa_exact
from swipt_aoa.scenario import bundled_scenario
from swipt_aoa.sim import SimConfig, run


def main():
    config = SimConfig(horizon=10**6, replications=10, seed=1)
    for name, q in (("setup1", (1, 1)), ("setup2", (1, 0.78))):
        succ = success_probs(bundled_scenario(name).channel)
        policy = AccessPolicy(*q)
        ev = event_probs(policy, succ)
        print(f"{name}, q = {q}")
        print(f"  {'battery':<14}{'1/p_A':>10}{'chain':>10}{'simulated':>12}{'std err':>10}")
        for model in [Battery(m) for m in (1, 2, 3, 6)] + [INFINITE]:
            rep = run(config, policy, succ, model)
            print(f"  {str(model):<14}{mean_aoa(ev, model):>10.4f}{mean_aoa_exact(ev, model):>10.4f}"
                  f"{rep.estimates['mean_aoa']:>12.4f}{rep.std_errors['mean_aoa']:>10.4f}")
        print()


if __name__ == "__main__":
    main()
