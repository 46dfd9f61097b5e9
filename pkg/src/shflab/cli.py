"""Command-line interface: ``shflab {verify,table,flow,lemmas}``.

Exit codes: 0 every check passed, 1 some check failed, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

import numpy as np

from . import catalog, flow, liealg, su3
from . import forms as F
from .forms import EPS

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _check(name: str, lhs: float, rhs: float, tol: float, ok: bool | None = None) -> dict:
    lhs, rhs = float(lhs), float(rhs)
    if ok is None:
        ok = abs(lhs - rhs) <= tol
    return {"name": name, "pass": bool(ok), "lhs": lhs, "rhs": rhs, "tol": float(tol)}


def _names(cfg) -> list[str]:
    if cfg.algebra == "all":
        return list(catalog.ORDER)
    if cfg.algebra not in catalog.ORDER:
        raise UsageError(f"unknown algebra {cfg.algebra!r}; choose from all, {', '.join(catalog.ORDER)}")
    return [cfg.algebra]


def _entry(name: str, cfg):
    try:
        return catalog.get(name, cfg.param_a)
    except catalog.CatalogError as exc:
        raise UsageError(str(exc)) from exc


# -- verify -----------------------------------------------------------------

def verify_checks(entry, eps: float = EPS, F0: float = flow.DEFAULT_F0) -> tuple[list[dict], str]:
    """Full invariant suite for one catalog entry; returns (checks, regime label)."""
    L = entry.algebra
    s = entry.su3(eps)
    checks = []
    checks.append(_check("d_squared_zero", max(L.jacobi_defect()), 0.0, eps))
    checks.append(_check("unimodular", float(np.max(np.abs(np.einsum("kik->i", L.structure_constants)))), 0.0, eps))
    checks.append(_check("primitive", F.wedge(s.psi_plus, s.omega).max_abs(), 0.0, eps))
    checks.append(_check("normalization", F.wedge(s.psi_plus, s.psi_minus).coeffs[0],
                         2.0 / 3.0 * (s.omega ** 3).coeffs[0], eps))
    checks.append(_check("psi_plus_norm", s.norm(s.psi_plus), 2.0, eps))
    checks.append(_check("d_omega", liealg.ce_d(L, s.omega).max_abs(), 0.0, eps))
    checks.append(_check("d_psi_plus", liealg.ce_d(L, s.psi_plus).max_abs(), 0.0, eps))

    fid = catalog.verify_entry(entry, eps)
    rep = fid["report"]
    for c in fid["checks"]:
        checks.append(_check(f"listed_{c['name']}", c["err"], 0.0, c["tol"]))

    w2 = rep.w2
    checks.append(_check("w2_coclosed", liealg.codiff(L, s.g, w2, s.orient).max_abs(), 0.0, eps))
    p1, p6, _ = su3.project2(s, w2)
    checks.append(_check("w2_in_lambda2_8", max(p1.max_abs(), p6.max_abs()), 0.0, eps))
    dw = liealg.ce_d(L, w2)
    checks.append(_check("dw2_wedge_omega", F.wedge(dw, s.omega).max_abs(), 0.0, eps))
    checks.append(_check("dw2_wedge_psi_plus", abs(F.wedge(dw, s.psi_plus).coeffs[0]), 0.0, eps))
    checks.append(_check("dw2_wedge_psi_minus", F.wedge(dw, s.psi_minus).coeffs[0],
                         rep.w2_norm_sq * F.volume_form(s.g, s.orient).coeffs[0], eps * max(1.0, rep.w2_norm_sq)))
    checks.append(_check("gamma_wedge_omega", F.wedge(rep.gamma, s.omega).max_abs(), 0.0, eps))
    checks.append(_check("gamma_wedge_psi_plus", abs(F.wedge(rep.gamma, s.psi_plus).coeffs[0]), 0.0, eps))
    checks.append(_check("gamma_wedge_psi_minus", abs(F.wedge(rep.gamma, s.psi_minus).coeffs[0]), 0.0, eps))
    checks.append(_check("scalar_curvature", rep.scal, -0.5 * rep.w2_norm_sq, eps))
    for flag in ("cond_i", "cond_ii", "cond_iii", "is_special"):
        checks.append(_check(flag, rep.residuals.get(flag, 0.0), 0.0, eps, ok=rep.flags[flag]))
    quarter = 0.25 * rep.w2_norm_sq
    checks.append(_check("c_lower_bound", rep.c, quarter, eps, ok=rep.c >= quarter - eps))
    checks.append(_check("dw2_norm_split", s.norm_sq(dw), 0.25 * rep.w2_norm_sq ** 2 + s.norm_sq(rep.gamma),
                         eps * max(1.0, s.norm_sq(dw))))
    checks.append(_check("hermitian_ricci_iff_gamma_zero", rep.residuals["laplace_psi_plus"], 0.0, eps,
                         ok=rep.flags["hermitian_ricci"] == (rep.residuals["laplace_psi_plus"] <= eps)))
    target = 0.25 * rep.w2_norm_sq * (rep.c - quarter)
    checks.append(_check("eigen_constraint", float(np.sum(np.square(rep.spectrum))), target, eps * max(1.0, target),
                         ok=su3.eigen_constraint_check(rep, eps)))
    checks.append(_check("nijenhuis_ratio", rep.nijenhuis_norm_sq / rep.w2_norm_sq, 0.5, eps))
    if entry.adapted_basis is not None:
        ab = catalog.adapted_basis_report(entry, eps)
        err = max(ab["omega_err"], ab["psi_plus_err"], ab["psi_minus_err"])
        checks.append(_check("adapted_basis", err, 0.0, eps, ok=catalog.check_adapted_basis(entry, eps)))
        checks.append(_check("adapted_basis_theta", ab["theta"], 0.0, eps))

    data = flow.FlowData.build(s, L, F0, eps)
    an = flow.verify_ansatz(data, [0.0])
    checks.append(_check("flow_rhs_at_t0", an.residual, 0.0, 1e-7))
    return checks, data.solution.regime.label


def cmd_verify(cfg) -> tuple[int, str]:
    reports = []
    for name in _names(cfg):
        checks, regime = verify_checks(_entry(name, cfg), cfg.epsilon, cfg.f0)
        reports.append({"algebra": name, "checks": checks, "regime": regime})
    ok = all(c["pass"] for r in reports for c in r["checks"])
    if cfg.format == "json":
        out = json.dumps(reports[0] if len(reports) == 1 else reports, indent=2, sort_keys=True)
    else:
        lines = []
        for r in reports:
            failed = [c for c in r["checks"] if not c["pass"]]
            lines.append(f"{r['algebra']}: {len(r['checks']) - len(failed)}/{len(r['checks'])} checks passed, "
                         f"regime={r['regime']}")
            for c in failed:
                lines.append(f"  FAIL {c['name']}: lhs={c['lhs']:.12g} rhs={c['rhs']:.12g} tol={c['tol']:g}")
        out = "\n".join(lines)
    return (EXIT_OK if ok else EXIT_FAIL), out


# -- table ------------------------------------------------------------------

def _ratio_text(x: float) -> str:
    fr = Fraction(x).limit_denominator(12)
    return str(fr.numerator) if fr.denominator == 1 else f"{fr.numerator}/{fr.denominator}"


def table_rows(cfg) -> list[dict]:
    rows = []
    for name in _names(cfg):
        entry = _entry(name, cfg)
        s = entry.su3(cfg.epsilon)
        rep = su3.analyze(s, entry.algebra, cfg.epsilon)
        regime = flow.classify(rep.c, rep.w2_norm_sq, cfg.f0, cfg.epsilon)
        exp = entry.expected
        rows.append({
            "name": name,
            "c": rep.c,
            "w2_norm_sq": rep.w2_norm_sq,
            "ratio": rep.c / rep.w2_norm_sq,
            "hermitian_ricci": rep.flags["hermitian_ricci"],
            "regime": regime.label,
            "expected_c": exp.c,
            "expected_w2_norm_sq": exp.w2_norm_sq,
            "match": abs(rep.c - exp.c) <= cfg.epsilon and abs(rep.w2_norm_sq - exp.w2_norm_sq) <= cfg.epsilon,
        })
    return rows


def format_row(r: dict) -> str:
    return (f"{r['name']}: c={r['c']:g}, w²={r['w2_norm_sq']:g}, ratio={_ratio_text(r['ratio'])}, "
            f"regime={r['regime']}, hermitian_ricci={'true' if r['hermitian_ricci'] else 'false'}")


def cmd_table(cfg) -> tuple[int, str]:
    rows = table_rows(cfg)
    ok = all(r["match"] for r in rows)
    if cfg.format == "json":
        out = json.dumps(rows, indent=2, sort_keys=True)
    elif cfg.format == "csv":
        cols = ["name", "c", "w2_norm_sq", "ratio", "hermitian_ricci", "regime"]
        out = "\n".join([",".join(cols)] + [",".join(str(r[k]) for k in cols) for r in rows])
    else:
        lines = [format_row(r) for r in rows]
        for r in rows:
            if not r["match"]:
                lines.append(f"  MISMATCH {r['name']}: c {r['c']:.12g} vs {r['expected_c']:.12g}, "
                             f"w² {r['w2_norm_sq']:.12g} vs {r['expected_w2_norm_sq']:.12g}")
        out = "\n".join(lines)
    return (EXIT_OK if ok else EXIT_FAIL), out


# -- flow -------------------------------------------------------------------

def cmd_flow(cfg) -> tuple[int, str]:
    names = _names(cfg)
    if len(names) != 1:
        raise UsageError("flow needs a single --algebra")
    entry = _entry(names[0], cfg)
    data = flow.FlowData.from_entry(entry, cfg.f0, cfg.epsilon)
    lo, hi = data.interval()
    t0, t1 = cfg.t0, cfg.t1
    warnings = []
    if not lo < t0 < hi:
        raise UsageError(f"--t0 {t0} is outside the maximal interval ({lo}, {hi})")
    if not lo < t1 < hi:
        edge = hi if t1 >= hi else lo
        t1 = t0 + 0.99 * (edge - t0)
        warnings.append(f"--t1 truncated to {t1:.6g} inside the maximal interval ({lo}, {hi})")
    traj = flow.integrate_rk4(data.omega, flow.phi_of_t(data, t0), data.algebra, t1, cfg.dt, t0, cfg.epsilon)
    if traj.truncated:
        warnings.append(traj.diagnostic)
    rows = flow.trajectory_rows(data, traj)
    sup = max((r["residual"] for r in rows), default=0.0)
    samples = list(np.linspace(t0, traj.times[-1], min(cfg.samples, len(traj.times))))
    an = flow.verify_ansatz(data, samples, eps=cfg.epsilon)
    checks = [
        _check("rk4_vs_closed_form", sup, 0.0, 1e-6),
        _check("ansatz_rhs", an.residual, 0.0, 1e-7),
        _check("norm_formula", an.max("norm"), 0.0, 1e-7),
        _check("psi_minus_formula", an.max("psi_minus"), 0.0, 1e-7),
        _check("nijenhuis_formula", an.max("nijenhuis"), 0.0, 1e-7),
        _check("not_truncated", float(traj.truncated), 0.0, 0.0),
    ]
    ok = all(c["pass"] for c in checks)
    for w in warnings:
        print(f"warning: {w}", file=sys.stderr)
    if cfg.format == "json":
        out = json.dumps({"algebra": entry.name, "checks": checks, "regime": data.solution.regime.label,
                          "rows": rows}, indent=2, sort_keys=True)
    else:
        out = flow.rows_to_csv(rows).rstrip("\n")
        if cfg.format == "text":
            for c in checks:
                if not c["pass"]:
                    print(f"FAIL {c['name']}: lhs={c['lhs']:.6g} tol={c['tol']:g}", file=sys.stderr)
    return (EXIT_OK if ok else EXIT_FAIL), out


# -- lemmas -----------------------------------------------------------------

def _realify(M: np.ndarray) -> np.ndarray:
    """Real 6x6 form of a complex 3x3 matrix, with z_k = x_{2k-1} + i x_{2k}."""
    R = np.zeros((6, 6))
    for i in range(3):
        for j in range(3):
            a, b = M[i, j].real, M[i, j].imag
            R[2 * i:2 * i + 2, 2 * j:2 * j + 2] = [[a, -b], [b, a]]
    return R


def _random_unitary(rng: np.random.Generator) -> np.ndarray:
    Z = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    Q, Rr = np.linalg.qr(Z)
    return _realify(Q * (np.diag(Rr) / np.abs(np.diag(Rr))))


def _commuting_pair(rng: np.random.Generator, kind: str):
    """A in Sym+_0 and S in Sym- on the standard structure with [A, S] = 0."""
    if kind == "diagonal":
        lam = rng.normal(size=3)
        lam -= lam.mean()
        A = np.diag(np.repeat(lam, 2))
        mu = rng.normal(size=3)
        S = np.diag(np.ravel(np.column_stack([mu, -mu])))
    else:  # A scalar on a 4-dim J-invariant block, S block diagonal
        lam = rng.normal()
        A = np.diag([lam] * 4 + [-2 * lam] * 2)
        std = su3.build_su3(F.OMEGA_STD, F.PSI_PLUS_STD)
        X = np.zeros((6, 6))
        X[:4, :4] = rng.normal(size=(4, 4))
        X[4:, 4:] = rng.normal(size=(2, 2))
        S = su3.to_sym_minus(std, 0.5 * (X + X.T))
    U = _random_unitary(rng)
    Ui = U.T
    return U @ A @ Ui, U @ S @ Ui


def _generic_pair(rng: np.random.Generator, std):
    X, Y = rng.normal(size=(6, 6)), rng.normal(size=(6, 6))
    return su3.to_sym_plus0(std, 0.5 * (X + X.T)), su3.to_sym_minus(std, 0.5 * (Y + Y.T))


def lemma_campaign(samples: int, seed: int, eps: float = EPS, rel_threshold: float = 1e-6) -> dict:
    """Random Sym+_0 x Sym- pairs: a third commuting by construction with a
    diagonal frame, a third commuting block-wise, the rest generic."""
    rng = np.random.default_rng(seed)
    std = su3.build_su3(F.OMEGA_STD, F.PSI_PLUS_STD)
    kinds = ("diagonal", "block", "generic")
    counts = {k: {"n": 0, "agree": 0, "commuting": 0} for k in kinds}
    max_zero = {"commutator": 0.0, "wedge": 0.0}
    for i in range(samples):
        kind = kinds[i % 3]
        A, S = _generic_pair(rng, std) if kind == "generic" else _commuting_pair(rng, kind)
        comm, wn = su3.lemma1_norms(std, A, S, 1e-7)
        commute, wedge_zero = su3.lemma1_check(std, A, S, 1e-7, rel_threshold)
        c = counts[kind]
        c["n"] += 1
        c["agree"] += int(commute == wedge_zero)
        c["commuting"] += int(commute)
        if kind != "generic":
            max_zero["commutator"] = max(max_zero["commutator"], comm)
            max_zero["wedge"] = max(max_zero["wedge"], wn)
    eigen = []
    a_values = [0.5, 1.0, 2.0] + list(np.round(rng.uniform(0.1, 3.0, size=2), 6))
    for name in catalog.ORDER:
        for a in (a_values if name == "A5_17" else [catalog.DEFAULT_A]):
            entry = catalog.get(name, a)
            rep = su3.analyze(entry.su3(eps), entry.algebra, eps)
            eigen.append({"algebra": name, "a": a if name == "A5_17" else None,
                          "rank": rep.rank, "spectrum": [round(m, 12) for m in rep.spectrum],
                          "pass": su3.eigen_constraint_check(rep, eps)})
    agree = sum(c["agree"] for c in counts.values())
    return {
        "seed": seed,
        "samples": samples,
        "lemma1": {"agree": agree, "by_kind": counts, "max_commuting_norms": max_zero,
                   "rel_threshold": rel_threshold},
        "eigen_constraint": eigen,
    }


def cmd_lemmas(cfg) -> tuple[int, str]:
    if cfg.samples < 2:
        raise UsageError("--samples must be at least 2")
    rep = lemma_campaign(cfg.samples, cfg.seed, cfg.epsilon)
    ok = rep["lemma1"]["agree"] == cfg.samples and all(e["pass"] for e in rep["eigen_constraint"])
    if cfg.format == "json":
        out = json.dumps(rep, indent=2, sort_keys=True)
    else:
        l1 = rep["lemma1"]
        lines = [f"seed={rep['seed']}",
                 f"lemma1: {l1['agree']}/{rep['samples']} agreement"]
        for k, c in l1["by_kind"].items():
            lines.append(f"  {k}: {c['agree']}/{c['n']} agree, {c['commuting']} commuting")
        ne = sum(e["pass"] for e in rep["eigen_constraint"])
        lines.append(f"eigen_constraint: {ne}/{len(rep['eigen_constraint'])} pass")
        out = "\n".join(lines)
    return (EXIT_OK if ok else EXIT_FAIL), out


# -- entry point --------------------------------------------------------------

def _positive(kind):
    def conv(text):
        v = kind(text)
        if not v > 0:
            raise argparse.ArgumentTypeError(f"must be positive, got {text}")
        return v
    return conv


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--algebra", default="all", help="catalog name or 'all'")
    common.add_argument("--param-a", type=_positive(float), default=catalog.DEFAULT_A, dest="param_a",
                        help="parameter a > 0 of A5_17")
    common.add_argument("--f0", type=_positive(float), default=flow.DEFAULT_F0, help="initial norm |phi0|")
    common.add_argument("--t0", type=float, default=0.0)
    common.add_argument("--t1", type=float, default=0.5)
    common.add_argument("--dt", type=_positive(float), default=flow.DEFAULT_DT)
    common.add_argument("--samples", type=int, default=10)
    common.add_argument("--epsilon", type=_positive(float), default=EPS)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--seed", type=int, default=0)
    p = argparse.ArgumentParser(prog="shflab", description="Special symplectic half-flat structures and the Type IIA flow.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common], help="run the invariant suite on catalog entries")
    sub.add_parser("table", parents=[common], help="recompute (c, |w2|^2) and regimes")
    sub.add_parser("flow", parents=[common], help="integrate the flow and compare with the closed form")
    sub.add_parser("lemmas", parents=[common], help="randomized commutation and eigenvalue campaigns")
    return p


COMMANDS = {"verify": cmd_verify, "table": cmd_table, "flow": cmd_flow, "lemmas": cmd_lemmas}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        cfg = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        code, out = COMMANDS[cfg.command](cfg)
    except UsageError as exc:
        print(f"shflab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
