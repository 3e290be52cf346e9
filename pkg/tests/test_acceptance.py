"""Acceptance criteria 1-11 at the full profile, one test each.

Each test prints a ``PASS``/``FAIL criterion N`` line with the key metrics.
Criteria that fail do so on measured numbers; see the decisions ledger for
the analysis of each failure.
"""

import json

import pytest

from bnsp.acceptance import CRITERIA, acceptance_suite, validate_report

_NAMES = {1: "root_relations", 2: "symbol_ode", 3: "longwave_split", 4: "radial_synthesis", 5: "front_localization",
          6: "interior_riesz_wave", 7: "l2_decay_rates", 8: "hd_crossover", 9: "nonlinear_run", 10: "lemma_oracles",
          11: "kirchhoff_quadrature"}


def _report(result):
    print()
    print(result.line())
    print(json.dumps({k: v for k, v in result.metrics.items() if k != "checks"}, default=str)[:2000])
    failed = [k for k, ok in result.metrics.get("checks", {}).items() if not ok]
    if failed:
        print("failed checks:", ", ".join(failed))
    if result.notes:
        print("notes:", result.notes)
    return failed


@pytest.mark.slow
@pytest.mark.parametrize("cid", sorted(CRITERIA), ids=lambda i: f"criterion_{i:02d}_{_NAMES[i]}")
def test_criterion(cid, criterion_log):
    result = CRITERIA[cid]("full", 0)
    failed = _report(result)
    criterion_log.append(result.line() + (f"  [failed checks: {', '.join(failed)}]" if failed else ""))
    assert result.passed, f"criterion {cid} failed checks: {failed}"


def test_quick_suite_report_is_valid():
    report = acceptance_suite("quick", [1, 2, 3], 0, log=print)
    validate_report(json.loads(json.dumps(report, default=str)))
    assert [c["id"] for c in report["criteria"]] == [1, 2, 3]
