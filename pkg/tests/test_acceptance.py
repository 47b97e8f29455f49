"""Acceptance criteria 1-10 at full size.

Each test prints ``Criterion N: PASS|FAIL`` with the measured value and the
threshold; the lines are also collected into the pytest terminal summary.
Run directly with ``python tests/test_acceptance.py`` for the bare report.
"""
import json

import pytest

from ksns import runner

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script outside pytest
    ACCEPTANCE_LINES = []

CRITERIA = {
    1: ("conservation", lambda m: f"max drift {m['max_relative_drift']:.3e} over {m['steps']} steps", "<= 1e-9"),
    2: ("homogeneous", lambda m: f"max |n - mean| {m['max_dev_n_linf']:.3e} for t <= {m['t_end']:g}", "<= 1e-12"),
    3: ("elliptic-order", lambda m: f"order {m['order']:.3f}, coefficient {m['coefficient']:.5f}", "order >= 1.7"),
    4: ("weighted-identity", lambda m: f"order {m['order']:.3f}", "order >= 1.7"),
    5: ("decay-case-i", lambda m: f"lam_Y {m['lam_Y']:.3f}, {m['violations']} increases", "lam_Y >= 17.765, 0 increases"),
    6: ("decay-case-ii",
        lambda m: "; ".join(f"{k}: lam_n {v['lam_n']:.3f} lam_Y {v['lam_Y']:.3f} r2 {min(v['r2_n'], v['r2_Y']):.4f}"
                            for k, v in m.items()),
        "lam > 0, r2 >= 0.95"),
    7: ("boundedness-probe", lambda m: f"sup ratio {m['ratio']:.4f}, min c {m['min_c']:.4f}", "ratio <= 1.05, min c > 0"),
    8: ("keypro-modulus", lambda m: f"ratio {m['ratio_005_04']:.4f}, monotone {m['monotone']}", "monotone, ratio <= 0.2"),
    9: ("inequalities", lambda m: f"{m['violations']} violations", "0 violations"),
    10: ("determinism", lambda m: ", ".join(f"{k} {v}" for k, v in m.items()), "all identical"),
}


def report(number):
    suite, describe, threshold = CRITERIA[number]
    rep = runner.verify(suite)
    verdict = "PASS" if rep["passed"] else "FAIL"
    line = f"Criterion {number}: {verdict} [{suite}] measured {describe(rep['measured'])} vs {threshold}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return rep


@pytest.mark.slow
@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number):
    rep = report(number)
    assert rep["passed"], json.dumps(rep["measured"], default=str)


if __name__ == "__main__":
    for n in sorted(CRITERIA):
        report(n)
