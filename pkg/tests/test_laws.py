import json

import numpy as np
import pytest

from genopt import laws
from genopt.laws import ALL_LAWS, CDC_LAWS, RD_LAWS, Instance, LawReport, check_law
from genopt.poly import PolyMap


@pytest.mark.parametrize("law", ALL_LAWS)
def test_poly_int(law):
    r = check_law(law, "poly-int", cases=40, seed=1)
    assert r.passed, r.failures[:1]
    assert r.cases == 40


@pytest.mark.parametrize("law", ALL_LAWS)
def test_poly_rat(law):
    assert check_law(law, "poly-rat", cases=15, seed=2).passed


@pytest.mark.parametrize("law", ALL_LAWS)
def test_smooth(law):
    assert check_law(law, "smooth", cases=10, seed=3).passed


def test_rd3_small_arities():
    # R[pi0] = iota0 . pi1 and friends, for every split of arity <= 4
    for a in range(1, 4):
        for b in range(1, 5 - a):
            p0, p1 = PolyMap.proj0(a, b), PolyMap.proj1(a, b)
            iota0 = PolyMap.identity(a).pair(PolyMap.zero(a, b))
            iota1 = PolyMap.zero(b, a).pair(PolyMap.identity(b))
            assert p0.reverse() == iota0 @ PolyMap.proj1(a + b, a)
            assert p1.reverse() == iota1 @ PolyMap.proj1(a + b, b)


def test_zero_cases():
    assert PolyMap.zero(2, 3).reverse() == PolyMap.zero(5, 2)
    h = PolyMap.parse("x1^2 + x2; x1*x2", 2)
    assert PolyMap.zero(2, 1) @ h == PolyMap.zero(2, 1)


def test_heavy_laws_are_capped():
    assert check_law("RD.6", "poly-int", cases=500).cases == laws.HEAVY["RD.6"]


def test_deterministic():
    a = check_law("CDC.7", "smooth", cases=5, seed=9)
    b = check_law("CDC.7", "smooth", cases=5, seed=9)
    assert a == b


def test_unknown_law():
    with pytest.raises(KeyError):
        check_law("RD.9")
    with pytest.raises(KeyError):
        laws.check_rd_axiom("CDC.1")
    with pytest.raises(KeyError):
        laws.check_cdc_axiom("RD.1")


def test_grouped_entry_points():
    assert [r.law for r in laws.check_all("poly-int", cases=2)] == list(ALL_LAWS)
    assert laws.check_left_additive(cases=5).passed
    assert all(laws.check_rd_axiom(l, cases=3).passed for l in RD_LAWS)
    assert all(laws.check_cdc_axiom(l, cases=3).passed for l in CDC_LAWS)


def test_report_json_roundtrip():
    r = LawReport("RD.1", "poly-int", 3, [{"case": 0, "equation": "x", "morphisms": []}])
    assert not r.passed
    back = LawReport.from_json(json.dumps(r.to_json()))
    assert back == r and back.to_json()["passed"] is False


class _Doubled(PolyMap):
    """A deliberately wrong reverse derivative: twice the true one."""

    __slots__ = ()

    def reverse(self):
        return super().reverse().scale(2)


def _broken_random_map(rng, n, m, depth=3):
    f = laws.random_polymap(rng, n, m, depth)
    return _Doubled(f.dom, f.comps)


def test_checker_catches_a_broken_reverse():
    broken = Instance("broken", PolyMap, _broken_random_map)
    failed = [law for law in ("RD.1", "RD.2", "RD.5") if not check_law(law, broken, cases=10).passed]
    assert failed, "a wrong derivative must violate at least one axiom"
    r = check_law("RD.5", broken, cases=10)
    assert r.failures and "morphisms" in r.failures[0]


def test_smooth_failures_are_detected():
    rng = np.random.default_rng(0)
    f = laws.INSTANCES["smooth"].random_map(rng, 2, 1)
    assert not laws.INSTANCES["smooth"].equal(f, f + f)
