"""Six-dimensional Lie algebras given by structure equations.

A Lie algebra is presented by the differentials ``(de^1, ..., de^6)`` of the
dual basis.  Brackets follow ``de^k(X, Y) = -e^k([X, Y])`` and the
Chevalley-Eilenberg differential is the graded Leibniz extension of those
six 2-forms.
"""

from __future__ import annotations

import ast
import math
import re
from dataclasses import dataclass, field

import numpy as np

from . import forms as F
from ._kernels import COMBOS, DIM, SIZES
from .forms import EPS, KForm


class LieAlgebraError(ValueError):
    """Structure equations do not define a Lie algebra."""


class ParseError(ValueError):
    """Malformed structure-equation or form string."""


# -- parsing ---------------------------------------------------------------

def _eval_coeff(expr: str, params: dict) -> float:
    """Evaluate a coefficient like ``2``, ``a``, ``-2*a``, ``sqrt(2)/2``."""
    try:
        tree = ast.parse(expr, mode="eval")
    except SyntaxError as exc:
        raise ParseError(f"bad coefficient {expr!r}") from exc

    def ev(node):
        if isinstance(node, ast.Expression):
            return ev(node.body)
        if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
            return float(node.value)
        if isinstance(node, ast.Name):
            if node.id not in params:
                raise ParseError(f"unbound parameter {node.id!r} in {expr!r}")
            return float(params[node.id])
        if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
            v = ev(node.operand)
            return -v if isinstance(node.op, ast.USub) else v
        if isinstance(node, ast.BinOp) and isinstance(node.op, (ast.Mult, ast.Div, ast.Add, ast.Sub)):
            x, y = ev(node.left), ev(node.right)
            if isinstance(node.op, ast.Mult):
                return x * y
            if isinstance(node.op, ast.Div):
                return x / y
            return x + y if isinstance(node.op, ast.Add) else x - y
        if (isinstance(node, ast.Call) and isinstance(node.func, ast.Name)
                and node.func.id == "sqrt" and len(node.args) == 1):
            return math.sqrt(ev(node.args[0]))
        raise ParseError(f"unsupported coefficient syntax in {expr!r}")

    return ev(tree)


def _split_top(s: str, sep: str) -> list[str]:
    parts, depth, cur = [], 0, []
    for ch in s:
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return parts


def _split_terms(s: str) -> list[str]:
    """Split at top-level +/- signs, keeping the sign with each term."""
    terms, depth, cur = [], 0, ""
    for n, ch in enumerate(s):
        if ch in "({":
            depth += 1
        elif ch in ")}":
            depth -= 1
        if ch in "+-" and depth == 0 and cur.strip() and not cur.rstrip().endswith(("*", "/")):
            terms.append(cur)
            cur = ch
        else:
            cur += ch
    if cur.strip():
        terms.append(cur)
    return terms


def parse_form(text: str, params: dict | None = None, degree: int | None = None) -> KForm:
    """Parse ``"e135-e146+sqrt(2)*e56"`` style sums of monomials.

    Indices are single digits 1..6.  Coefficients multiply the monomial with
    ``*`` (``"a*e15"``, ``"2*e16"``); a bare leading number also works
    (``"2e16"``).  ``"0"`` is the zero form and requires ``degree``.
    """
    params = params or {}
    s = text.replace(" ", "").replace("−", "-")
    if s in ("", "0"):
        if degree is None:
            raise ParseError("zero form needs an explicit degree")
        return KForm.zero(degree)
    terms: dict = {}
    deg = degree
    for raw in _split_terms(s):
        t = raw
        sign = 1.0
        while t and t[0] in "+-":
            if t[0] == "-":
                sign = -sign
            t = t[1:]
        m = re.search(r"e\^?\{?(\d+)\}?$", t)
        if not m:
            raise ParseError(f"term {raw!r} has no monomial e<digits>")
        coeff_txt = t[: m.start()].rstrip("*")
        coeff = _eval_coeff(coeff_txt, params) if coeff_txt else 1.0
        idx = tuple(int(ch) for ch in m.group(1))
        if any(not 1 <= i <= DIM for i in idx):
            raise ParseError(f"index out of range in {raw!r}")
        if deg is None:
            deg = len(idx)
        elif len(idx) != deg:
            raise ParseError(f"mixed degrees in {text!r}")
        key = idx
        terms[key] = terms.get(key, 0.0) + sign * coeff
    return KForm.from_terms(terms, degree=deg)


def parse_structure_equations(text: str, params: dict | None = None) -> list[KForm]:
    """Parse the 6-tuple ``"(0,-e13,-e12,0,-e46,-e45)"`` into six 2-forms."""
    s = text.strip()
    if not (s.startswith("(") and s.endswith(")")):
        raise ParseError("structure equations must be parenthesised")
    entries = _split_top(s[1:-1], ",")
    if len(entries) != DIM:
        raise ParseError(f"expected {DIM} entries, got {len(entries)}")
    return [parse_form(e, params, degree=2) for e in entries]


# -- Lie algebra -----------------------------------------------------------

def _leibniz_matrix(d_basis: list[KForm], k: int) -> np.ndarray:
    """Matrix of d from degree k to k+1: d e^I = sum_r (-1)^r de^{i_r} ^ e^{I minus i_r}."""
    D = np.zeros((SIZES[k + 1], SIZES[k]))
    for col, idx in enumerate(COMBOS[k]):
        acc = KForm.zero(k + 1)
        for r, i in enumerate(idx):
            rest = idx[:r] + idx[r + 1:]
            rest_form = KForm.basis(*(j + 1 for j in rest)) if rest else KForm(0, [1.0])
            term = F.wedge(d_basis[i], rest_form)
            acc = acc - term if r % 2 else acc + term
        D[:, col] = acc.coeffs
    return D


@dataclass(frozen=True, eq=False)
class LieAlgebra:
    """Lie algebra with ``d_basis[i] = d e^{i+1}``."""

    d_basis: tuple
    name: str = ""
    _d: tuple = field(init=False, repr=False)

    def __post_init__(self):
        db = tuple(self.d_basis)
        if len(db) != DIM or any(f.degree != 2 for f in db):
            raise LieAlgebraError("need six degree-2 forms de^1..de^6")
        object.__setattr__(self, "d_basis", db)
        mats = []
        for k in range(DIM):
            m = _leibniz_matrix(list(db), k)
            m.setflags(write=False)
            mats.append(m)
        object.__setattr__(self, "_d", tuple(mats))

    def d_matrix(self, k: int) -> np.ndarray:
        return self._d[k]

    @property
    def structure_constants(self) -> np.ndarray:
        """``C[k, i, j]`` with ``[e_i, e_j] = sum_k C[k, i, j] e_k`` (0-based)."""
        C = np.zeros((DIM, DIM, DIM))
        for k, f in enumerate(self.d_basis):
            for (i, j), c in zip(COMBOS[2], f.coeffs):
                C[k, i, j] = -c
                C[k, j, i] = c
        return C

    def bracket(self, x, y) -> np.ndarray:
        return np.einsum("kij,i,j->k", self.structure_constants, np.asarray(x, float), np.asarray(y, float))

    def ad(self, x) -> np.ndarray:
        return np.einsum("kij,i->kj", self.structure_constants, np.asarray(x, float))

    def jacobi_defect(self) -> list[float]:
        """Max |d(d a)| over basis forms, for each degree 0..4."""
        return [float(np.max(np.abs(self._d[k + 1] @ self._d[k]), initial=0.0)) for k in range(DIM - 1)]

    def __repr__(self) -> str:
        return f"LieAlgebra({self.name or 'unnamed'})"


def from_structure_equations(tuples, name: str = "", params: dict | None = None,
                             eps: float = EPS) -> LieAlgebra:
    """Build and validate a Lie algebra from six 2-forms or a 6-tuple string."""
    if isinstance(tuples, str):
        tuples = parse_structure_equations(tuples, params)
    L = LieAlgebra(tuple(tuples), name=name)
    for k, defect in enumerate(L.jacobi_defect()):
        if defect > eps:
            raise LieAlgebraError(f"not a Lie algebra: d^2 != 0 on degree-{k} forms (max {defect:.3g})")
    return L


def abelian() -> LieAlgebra:
    return LieAlgebra(tuple(KForm.zero(2) for _ in range(DIM)), name="abelian")


def ce_d(L: LieAlgebra, a: KForm) -> KForm:
    if a.degree >= DIM:
        raise F.FormError("d of a top-degree form is not defined")
    return KForm(a.degree + 1, L.d_matrix(a.degree) @ a.coeffs)


def is_unimodular(L: LieAlgebra, eps: float = EPS) -> bool:
    traces = np.einsum("kik->i", L.structure_constants)
    return bool(np.max(np.abs(traces)) <= eps)


def codiff(L: LieAlgebra, g: np.ndarray, a: KForm, orient: KForm | float = 1.0) -> KForm:
    """``d* a = -*d*a`` (valid for every degree in dimension 6)."""
    if a.degree == 0:
        raise F.FormError("codifferential of a 0-form is not defined")
    return -F.hodge_star(g, orient, ce_d(L, F.hodge_star(g, orient, a)))


def laplacian(L: LieAlgebra, g: np.ndarray, a: KForm, orient: KForm | float = 1.0) -> KForm:
    out = KForm.zero(a.degree)
    if a.degree > 0:
        out = out + ce_d(L, codiff(L, g, a, orient))
    if a.degree < DIM:
        out = out + codiff(L, g, ce_d(L, a), orient)
    return out
