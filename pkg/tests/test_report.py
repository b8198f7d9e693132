import json
import math

import numpy as np
import pytest

from eigenpath import families, rm_engine, suite
from eigenpath.report import ANCHORS, BoundCheck, Scoreboard, aggregate, slack


def _check(name, pairs):
    c = BoundCheck(name)
    for lhs, rhs in pairs:
        c.record(lhs, rhs)
    return c


def test_slack():
    assert slack(1.0, 2.0) == pytest.approx(0.5)
    assert slack(2.0, 1.0) == pytest.approx(-1.0)
    assert slack(0.0, 0.0) == 0.0
    assert math.isfinite(slack(1e-20, 0.0))


def test_record_and_override():
    c = BoundCheck("x").record(1.0, 2.0).record(3.0, 2.0).record(5.0, 1.0, ok=True)
    assert c.instances == 3 and c.violations == 1 and not c.holds
    assert c.max_slack == pytest.approx(0.5) and c.min_slack == pytest.approx(-4.0)


def test_empty_scoreboard():
    sb = aggregate()
    assert sb.entries == {} and sb.passed
    assert sb.to_dict() == {"passed": True, "entries": {}}
    assert BoundCheck("x").to_dict()["min_slack"] is None


def test_aggregate_merges_by_name():
    a = _check("p", [(1, 2), (1, 1.5)])
    b = _check("p", [(3, 2)])
    c = _check("q", [(0, 1)])
    sb = aggregate(a, [b, c])
    assert sb.entries["p"].instances == 3 and sb.entries["p"].violations == 1
    assert sb.entries["q"].holds and not sb.passed
    with pytest.raises(TypeError):
        aggregate(1.5)


def test_aggregate_associative():
    rng = np.random.default_rng(0)
    parts = [[_check(n, rng.uniform(0, 2, size=(4, 2))) for n in ("a", "b", "c")[:k + 1]] for k in range(3)]
    a, b, c = (aggregate(p) for p in parts)
    left = aggregate(a, aggregate(b, c))
    right = aggregate(aggregate(a, b), c)
    assert left.to_dict() == right.to_dict()


def test_write_json(tmp_path):
    sb = aggregate(_check("p", [(1, 2)]))
    out = tmp_path / "sb.json"
    sb.write(out)
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    assert doc["entries"]["p"] == {"instances": 1, "violations": 0, "min_slack": 0.5, "max_slack": 0.5}


def test_full_run_qubit():
    sb = suite.full_run()
    assert set(sb.entries) == set(ANCHORS) and len(ANCHORS) == 12
    assert sb.passed, {k: v.to_dict() for k, v in sb.entries.items() if not v.holds}
    assert all(e.instances > 0 for e in sb.entries.values())


def test_adversarial_schedule_fails_scoreboard(qubit):
    good = rm_engine.build_schedule(1.0, 0.05)
    rep = rm_engine.run_rm(qubit, 0.05, schedule=rm_engine.Schedule.uniform(10 * good.delta_s, 0.05))
    sb = aggregate(suite.rm_checks(qubit, 0.05, rep))
    assert sb.entries["discretization_infidelity"].violations == 1
    assert not sb.passed


def test_path_checks_random(rng):
    for _ in range(3):
        sb = aggregate(suite.path_checks(families.random_linear_path(4, rng), 401))
        assert sb.passed
