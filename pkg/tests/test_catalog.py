import json
from fractions import Fraction

import numpy as np
import pytest

from shflab import catalog, liealg, su3
from shflab.catalog import CatalogError
from shflab.forms import KForm
from shflab.liealg import parse_form

IDS = list(catalog.ORDER)
EXPECTED_CW = {
    "e11e11": (2, 8), "g5_1": (2, 2), "A5_7": (4, 8), "A5_17": (4, 8),
    "g6_N3": (6, 6), "g6_38": (6, 6), "g6_54": (2, 6), "g6_118": (4, 8),
}


def test_names_and_order():
    assert catalog.names() == tuple(EXPECTED_CW)
    assert [e.name for e in catalog.all_entries()] == IDS


def test_get_fields():
    e = catalog.get("e11e11")
    assert e.omega.allclose(parse_form("e14+e23+2*e56"))
    assert e.adapted_basis is None and e.params == {}
    assert isinstance(e.algebra, liealg.LieAlgebra)


def test_get_errors():
    with pytest.raises(CatalogError, match="unknown"):
        catalog.get("g6_999")
    for a in (0.0, -1.0, float("nan")):
        with pytest.raises(CatalogError, match="a > 0"):
            catalog.get("A5_17", a)


def test_parameter_only_touches_A517():
    assert catalog.get("g5_1", 3.0).expected.c == 2
    e = catalog.get("A5_17", 2.0)
    assert e.params == {"a": 2.0}
    assert e.expected.w2.allclose(parse_form("-4*e12-4*e34"))


@pytest.mark.parametrize("name", IDS)
def test_transcription_matches_recomputation(name):
    r = catalog.verify_entry(catalog.get(name))
    failed = [c for c in r["checks"] if not c["pass"]]
    assert r["ok"], f"{name}: {failed}"


def test_g6N3_listed_gamma_is_the_only_mismatch():
    """Everything but gamma agrees; the listed gamma is not Sigma_12 of the listed S."""
    e = catalog.get("g6_N3")
    r = catalog.verify_entry(e)
    assert [c["name"] for c in r["checks"] if not c["pass"]] == ["gamma"]
    s = e.su3()
    assert su3.sigma12(s, e.expected.S).allclose(r["report"].gamma, 1e-9)
    assert not su3.sigma12(s, e.expected.S).allclose(e.expected.gamma, 1e-3)
    # a genuine gamma lies in the 12-dimensional piece; the listed one has a psi+ part
    re, im, p6, _ = su3.project3(s, e.expected.gamma)
    assert re.max_abs() > 1.0
    assert im.is_zero(1e-12) and p6.is_zero(1e-12)


@pytest.mark.parametrize("a", [0.5, 1.0, 2.0, 0.3, 3.7])
def test_A517_family(a):
    e = catalog.get("A5_17", a)
    r = catalog.verify_entry(e)
    assert r["ok"], r["checks"]
    rep = r["report"]
    assert rep.c == pytest.approx(4 * a * a, abs=1e-9)
    assert rep.w2_norm_sq == pytest.approx(8 * a * a, abs=1e-9)
    assert catalog.check_adapted_basis(e)


@pytest.mark.parametrize("name", IDS)
def test_structural_invariants(name):
    e = catalog.get(name)
    L = e.algebra
    assert liealg.is_unimodular(L)
    s = e.su3()
    assert (s.omega ^ s.psi_plus).is_zero(1e-12)
    assert liealg.ce_d(L, s.omega).is_zero(1e-12)
    assert liealg.ce_d(L, s.psi_plus).is_zero(1e-12)
    rep = su3.analyze(s, L)
    c, w = EXPECTED_CW[name]
    assert (rep.c, rep.w2_norm_sq) == (pytest.approx(c), pytest.approx(w))
    assert rep.flags["is_special"]
    assert rep.nijenhuis_norm_sq == pytest.approx(0.5 * rep.w2_norm_sq, rel=1e-9)


@pytest.mark.parametrize("name", IDS)
def test_spectrum_pattern(name):
    S = catalog.get(name).expected.S
    d = np.sort(np.diag(S))
    assert np.allclose(d, -d[::-1])


def test_ratios():
    ratios = {n: Fraction(c, w) for n, (c, w) in EXPECTED_CW.items()}
    assert ratios["e11e11"] == Fraction(1, 4) and ratios["g6_54"] == Fraction(1, 3)
    assert {ratios[n] for n in ("A5_7", "A5_17", "g6_118")} == {Fraction(1, 2)}
    assert {ratios[n] for n in ("g5_1", "g6_N3", "g6_38")} == {Fraction(1)}


@pytest.mark.parametrize("name", [n for n in IDS if n != "e11e11"])
def test_adapted_basis(name):
    e = catalog.get(name)
    rep = catalog.adapted_basis_report(e)
    assert catalog.check_adapted_basis(e)
    assert rep["theta"] == pytest.approx(0.0, abs=1e-12)


def test_adapted_basis_rejects_permutation():
    e = catalog.get("g6_54")
    b = e.adapted_basis
    swapped = catalog.CatalogEntry(**{**e.__dict__, "adapted_basis": (b[1], b[0]) + b[2:]})
    assert not catalog.check_adapted_basis(swapped)


def test_adapted_basis_missing():
    with pytest.raises(CatalogError, match="no adapted basis"):
        catalog.check_adapted_basis(catalog.get("e11e11"))


def test_packaged_json_is_current():
    assert catalog.packaged_catalog_json() == catalog.catalog_json()


def test_json_roundtrip():
    obj = json.loads(catalog.catalog_json(2.0))
    assert obj["parameter_a"] == 2.0
    ent = {x["name"]: x for x in obj["entries"]}
    assert set(ent) == set(IDS)
    a517 = ent["A5_17"]
    assert a517["expected"]["c"] == 16.0
    assert KForm.from_json_obj(a517["expected"]["w2"]).allclose(catalog.get("A5_17", 2.0).expected.w2)
