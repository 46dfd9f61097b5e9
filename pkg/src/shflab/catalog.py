"""Special symplectic half-flat structures on the eight unimodular solvable
Lie algebras that admit SHF structures.

Every expected value below is a literal transcription, not a computation.
Form strings use the ``parse_form`` syntax; ``a`` is the A5_17 parameter.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from math import sqrt

import numpy as np

from . import forms as F
from . import liealg, su3
from .forms import EPS, KForm
from .liealg import parse_form

ORDER = ("e11e11", "g5_1", "A5_7", "A5_17", "g6_N3", "g6_38", "g6_54", "g6_118")

# name: structure equations, omega, psi+, diag(g), w2, gamma, diag(S), c, |w2|^2, adapted basis
_RAW = {
    # e(1,1) + e(1,1)
    "e11e11": dict(
        label="e(1,1)+e(1,1)",
        structure="(0,-e13,-e12,0,-e46,-e45)",
        omega="e14+e23+2*e56",
        psi_plus="e125-e126-e135-e136+e245+e246+e345-e346",
        g=("1", "1", "1", "1", "2", "2"),
        w2="2*e26+2*e25+2*e36-2*e35",
        gamma="0",
        S=("0", "0", "0", "0", "0", "0"),
        c="2", w2_norm_sq="8",
        adapted_basis=None,
    ),
    # g_{5,1} + R
    "g5_1": dict(
        label="g5,1+R",
        structure="(0,0,0,0,e12,e13)",
        omega="e14+e26+e35",
        psi_plus="e123+e156+e245-e346",
        g=("1", "1", "1", "1", "1", "1"),
        w2="e26-e35",
        gamma="3/2*e123-1/2*e156-1/2*e245+1/2*e346",
        S=("-1/2", "-1/2", "-1/2", "1/2", "1/2", "1/2"),
        c="2", w2_norm_sq="2",
        adapted_basis=("e1", "e4", "-e3", "-e5", "e2", "e6"),
    ),
    # A_{5,7}^{-1,-1,1} + R
    "A5_7": dict(
        label="A5,7^{-1,-1,1}+R",
        structure="(e15,-e25,-e35,e45,0,0)",
        omega="-e13+e24+e56",
        psi_plus="-e126-e145-e235-e346",
        g=("1", "1", "1", "1", "1", "1"),
        w2="2*e14-2*e23",
        gamma="2*e126-2*e145-2*e235+2*e346",
        S=("0", "0", "0", "0", "-2", "2"),
        c="4", w2_norm_sq="8",
        adapted_basis=("e3", "e1", "e2", "e4", "e5", "e6"),
    ),
    # A_{5,17}^{a,-a,1} + R, a > 0
    "A5_17": dict(
        label="A5,17^{a,-a,1}+R",
        structure="(a*e15+e25,-e15+a*e25,-a*e35+e45,-e35-a*e45,0,0)",
        omega="e13+e24+e56",
        psi_plus="e125-e146+e236-e345",
        g=("1", "1", "1", "1", "1", "1"),
        w2="-2*a*e12-2*a*e34",
        gamma="2*a*a*e125+2*a*a*e146-2*a*a*e236-2*a*a*e345",
        S=("0", "0", "0", "0", "-2*a*a", "2*a*a"),
        c="4*a*a", w2_norm_sq="8*a*a",
        adapted_basis=("e1", "e3", "e2", "e4", "e5", "e6"),
    ),
    # g_{6,N3}
    "g6_N3": dict(
        label="g6,N3",
        structure="(0,0,0,e12,e13,e23)",
        omega="2*e16+e25-e34",
        psi_plus="-e123+e145-2*e246-2*e356",
        g=("1", "1", "1", "1", "1", "4"),
        w2="4*e16-e25+e34",
        gamma="-9/2*e123-3/2*e145-3/2*e246-3/2*e356",
        S=("-3/2", "-3/2", "-3/2", "3/2", "3/2", "3/2"),
        c="6", w2_norm_sq="6",
        adapted_basis=("e1", "2*e6", "e3", "-e4", "e2", "e5"),
    ),
    # g_{6,38}^0
    "g6_38": dict(
        label="g6,38^0",
        structure="(e23,-e36,e26,e26-e56,e36+e46,0)",
        omega="-2*e16+e34-e25",
        psi_plus="-2*e135-2*e124+e236-e456",
        g=("4", "1", "1", "1", "1", "1"),
        w2="4*e16-e25+e34",
        gamma="3*e124+3*e135+9/2*e236+3/2*e456",
        S=("3/2", "-3/2", "-3/2", "3/2", "3/2", "-3/2"),
        c="6", w2_norm_sq="6",
        adapted_basis=("e6", "2*e1", "e3", "e4", "-e2", "e5"),
    ),
    # g_{6,54}^{0,-1}
    "g6_54": dict(
        label="g6,54^{0,-1}",
        structure="(e16+e35,-e26+e45,e36,-e46,0,0)",
        omega="e14+e23+sqrt(2)*e56",
        psi_plus="e125-sqrt(2)*e136+sqrt(2)*e246+e345",
        g=("1", "1", "1", "1", "1", "2"),
        w2="sqrt(2)*e13-e14+e23+sqrt(2)*e24",
        gamma="-3/2*e125-sqrt(2)/2*e136+sqrt(2)/2*e246+1/2*e345",
        S=("1/2", "1/2", "-1/2", "-1/2", "1/2", "-1/2"),
        c="2", w2_norm_sq="6",
        adapted_basis=("e1", "e4", "e2", "e3", "e5", "sqrt(2)*e6"),
    ),
    # g_{6,118}^{0,-1,-1}
    "g6_118": dict(
        label="g6,118^{0,-1,-1}",
        structure="(-e16+e25,-e15-e26,e36-e45,e35+e46,0,0)",
        omega="e14+e23-e56",
        psi_plus="e126-e135+e245+e346",
        g=("1", "1", "1", "1", "1", "1"),
        w2="2*e12-2*e34",
        gamma="2*e126+2*e135-2*e245+2*e346",
        S=("0", "0", "0", "0", "2", "-2"),
        c="4", w2_norm_sq="8",
        adapted_basis=("e1", "e4", "e3", "-e2", "-e5", "e6"),
    ),
}

DEFAULT_A = 1.0


class CatalogError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Expected:
    g: np.ndarray
    w2: KForm
    gamma: KForm
    S: np.ndarray
    c: float
    w2_norm_sq: float


@dataclass(frozen=True, eq=False)
class CatalogEntry:
    name: str
    label: str
    structure_equations: str
    algebra: liealg.LieAlgebra
    omega: KForm
    psi_plus: KForm
    expected: Expected
    adapted_basis: tuple | None
    params: dict = field(default_factory=dict)

    def su3(self, eps: float = EPS) -> su3.SU3Structure:
        return su3.build_su3(self.omega, self.psi_plus, eps)


def _num(expr: str, params: dict) -> float:
    return liealg._eval_coeff(expr, params)


def names() -> tuple:
    return ORDER


def get(name: str, a: float = DEFAULT_A) -> CatalogEntry:
    """Catalog entry by name; ``a`` only matters for ``A5_17`` and must be > 0."""
    if name not in _RAW:
        raise CatalogError(f"unknown algebra {name!r}; known: {', '.join(ORDER)}")
    raw = _RAW[name]
    params = {}
    if name == "A5_17":
        if not a > 0:
            raise CatalogError(f"A5_17 requires a > 0, got {a}")
        params = {"a": float(a)}
    L = liealg.from_structure_equations(raw["structure"], name=name, params=params)
    exp = Expected(
        g=np.diag([_num(x, params) for x in raw["g"]]),
        w2=parse_form(raw["w2"], params, degree=2),
        gamma=parse_form(raw["gamma"], params, degree=3),
        S=np.diag([_num(x, params) for x in raw["S"]]),
        c=_num(raw["c"], params),
        w2_norm_sq=_num(raw["w2_norm_sq"], params),
    )
    basis = None
    if raw["adapted_basis"] is not None:
        basis = tuple(parse_form(b, params, degree=1) for b in raw["adapted_basis"])
    return CatalogEntry(
        name=name, label=raw["label"], structure_equations=raw["structure"], algebra=L,
        omega=parse_form(raw["omega"], params, degree=2),
        psi_plus=parse_form(raw["psi_plus"], params, degree=3),
        expected=exp, adapted_basis=basis, params=params,
    )


def all_entries(a: float = DEFAULT_A) -> list[CatalogEntry]:
    return [get(n, a) for n in ORDER]


# -- verification ------------------------------------------------------------

def _diff(name: str, got, want, tol: float) -> dict:
    got_a = np.asarray(got.coeffs if isinstance(got, KForm) else got, dtype=float)
    want_a = np.asarray(want.coeffs if isinstance(want, KForm) else want, dtype=float)
    err = float(np.max(np.abs(got_a - want_a), initial=0.0))
    return {"name": name, "pass": err <= tol, "err": err, "tol": tol}


def verify_entry(entry: CatalogEntry, eps: float = EPS) -> dict:
    """Recompute g, w2, gamma, S, c, |w2|^2 and diff against the transcription."""
    s = entry.su3(eps)
    rep = su3.analyze(s, entry.algebra, eps)
    e = entry.expected
    checks = [
        _diff("g", s.g, e.g, eps),
        _diff("w2", rep.w2, e.w2, eps),
        _diff("gamma", rep.gamma, e.gamma, eps),
        _diff("S", rep.S, e.S, eps),
        _diff("c", rep.c, e.c, eps),
        _diff("w2_norm_sq", rep.w2_norm_sq, e.w2_norm_sq, eps),
    ]
    return {"algebra": entry.name, "ok": all(c["pass"] for c in checks), "checks": checks, "report": rep}


def _rows_matrix(covectors) -> np.ndarray:
    return np.array([f.coeffs for f in covectors])


def pull_to_basis(B: np.ndarray, a: KForm) -> KForm:
    """Coefficients of ``a`` in the coframe whose rows ``B[i]`` give f^i in e-coordinates."""
    M = np.linalg.inv(B).T  # e^j = sum_i M[i, j] f^i
    return KForm(a.degree, F.pullback_matrix(M, a.degree).T @ a.coeffs)


def adapted_basis_report(entry: CatalogEntry, eps: float = EPS) -> dict:
    """Standard-form residuals of omega, psi+-, the phase theta, and S in the listed coframe."""
    if entry.adapted_basis is None:
        raise CatalogError(f"{entry.name} lists no adapted basis")
    s = entry.su3(eps)
    B = _rows_matrix(entry.adapted_basis)
    om = pull_to_basis(B, s.omega)
    pp = pull_to_basis(B, s.psi_plus)
    pm = pull_to_basis(B, s.psi_minus)
    # theta from psi+ = cos(theta) psi+_std + sin(theta) psi-_std in the new coframe
    cos_t = float(pp.coeffs @ F.PSI_PLUS_STD.coeffs) / 4.0
    sin_t = float(pp.coeffs @ F.PSI_MINUS_STD.coeffs) / 4.0
    theta = float(np.arctan2(sin_t, cos_t))
    S_f = B @ entry.expected.S @ np.linalg.inv(B)
    return {
        "omega_err": float(np.max(np.abs((om - F.OMEGA_STD).coeffs))),
        "psi_plus_err": float(np.max(np.abs((pp - F.PSI_PLUS_STD).coeffs))),
        "psi_minus_err": float(np.max(np.abs((pm - F.PSI_MINUS_STD).coeffs))),
        "theta": theta,
        "S_in_basis": S_f,
    }


def check_adapted_basis(entry: CatalogEntry, eps: float = EPS) -> bool:
    """True iff the listed coframe brings (omega, psi+, psi-) to standard form and S is
    diagonal there with spectrum pattern (mu1, -mu1, mu2, -mu2, mu3, -mu3)."""
    r = adapted_basis_report(entry, eps)
    if max(r["omega_err"], r["psi_plus_err"], r["psi_minus_err"]) > eps:
        return False
    S_f = r["S_in_basis"]
    off = S_f - np.diag(np.diag(S_f))
    d = np.diag(S_f)
    paired = np.allclose(d[0::2], -d[1::2], atol=eps, rtol=0)
    return bool(np.max(np.abs(off)) <= eps and paired)


# -- JSON resource -----------------------------------------------------------

def catalog_json_obj(a: float = DEFAULT_A) -> dict:
    out = {"parameter_a": a, "entries": []}
    for ent in all_entries(a):
        e = ent.expected
        out["entries"].append({
            "name": ent.name,
            "label": ent.label,
            "structure_equations": ent.structure_equations,
            "omega": ent.omega.to_json_obj(),
            "psi_plus": ent.psi_plus.to_json_obj(),
            "expected": {
                "g_diag": np.diag(e.g).tolist(),
                "w2": e.w2.to_json_obj(),
                "gamma": e.gamma.to_json_obj(),
                "S_diag": np.diag(e.S).tolist(),
                "c": e.c,
                "w2_norm_sq": e.w2_norm_sq,
            },
            "adapted_basis": None if ent.adapted_basis is None
            else [f.to_json_obj() for f in ent.adapted_basis],
        })
    return out


def catalog_json(a: float = DEFAULT_A) -> str:
    return json.dumps(catalog_json_obj(a), indent=2, sort_keys=True) + "\n"


def packaged_catalog_json() -> str:
    return resources.files("shflab").joinpath("data/catalog.json").read_text()


SQRT2 = sqrt(2.0)
