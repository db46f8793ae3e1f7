"""Rewrite the golden reports after an intentional change in the numerics.

Run from the repository root:  python3 tests/golden/regenerate.py
"""

from pathlib import Path

from skewhol.experiment import SCENARIOS, run_experiment, scenario
from skewhol.report import emit_report

HERE = Path(__file__).parent


def main():
    for name in SCENARIOS:
        report = run_experiment(scenario(name))
        (HERE / f"{name}.json").write_bytes(emit_report(report, "json"))
        print(f"wrote {name}.json")


if __name__ == "__main__":
    main()
