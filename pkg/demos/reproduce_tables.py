"""Recompute the published success probabilities, Table 2 optima and figure optima.

Run: python3 demos/reproduce_tables.py
"""

from swipt_aoa.reproduce import TARGETS, reproduce


def main():
    for target in TARGETS:
        items = reproduce(target)
        passed = sum(i.passed for i in items)
        print(f"== {target}: {passed}/{len(items)} pass")
        for item in items:
            print("  " + item.line())
        print()


if __name__ == "__main__":
    main()
