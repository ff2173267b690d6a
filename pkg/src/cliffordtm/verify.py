"""Self-verification suite behind ``cliffordtm verify``.

Each check reproduces one acceptance criterion against an independent
oracle (exact moments, quadrature, the classical complex TM chain, explicit
residual functions) and returns a :class:`CheckResult`.
"""

from __future__ import annotations

import itertools
import time
from dataclasses import dataclass, field
from math import comb
from typing import Callable, Optional

import numpy as np

from . import clifford as cl
from .afd import SearchGrid, afd_run, plain_energies, polar_to_cartesian, reorder_projection_check, residual_function, AfdState
from .clifford import Multivector
from .config import RunConfig
from .exceptions import NotInvertible
from .hardy import AtomCombo
from .kernels import szego_eval
from .monogenics import dirac_apply, fueter, fueter_indices, orthobasis_Mk
from .sphere import build_grid, integrate, sphere_area
from .tm import TMSystem


@dataclass
class CheckResult:
    name: str
    criterion: int
    group: str
    passed: bool
    measured: dict = field(default_factory=dict)
    informational: bool = False
    seconds: float = 0.0

    def line(self) -> str:
        status = "PASS" if self.passed else ("NOTE" if self.informational else "FAIL")
        vals = ", ".join(f"{k}={_fmt(v)}" for k, v in self.measured.items())
        return f"[{status}] {self.criterion:2d} {self.name}: {vals}"

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "criterion": self.criterion,
            "group": self.group,
            "passed": bool(self.passed),
            "informational": self.informational,
            "seconds": self.seconds,
            "measured": self.measured,
        }


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.3g}"
    return str(v)


def random_ball_points(rng, n: int, m: int, r_max: float) -> np.ndarray:
    """Uniform samples from the ball of radius ``r_max`` in R^{m+1}."""
    x = rng.normal(size=(n, m + 1))
    x /= np.linalg.norm(x, axis=1)[:, None]
    return x * (r_max * rng.uniform(size=n) ** (1.0 / (m + 1)))[:, None]


def random_unit_coeffs(rng, n: int, m: int) -> np.ndarray:
    c = rng.normal(size=(n, 1 << m))
    return c / np.linalg.norm(c, axis=1)[:, None]


# ---------------------------------------------------------------------------
# algebra


def check_algebra_laws(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed)
    assoc = 0.0
    ineq = 0.0
    conj_exact = True
    for m in range(1, 6):
        n = 1 << m
        x, y, z = (rng.normal(size=(10_000, n)) for _ in range(3))
        lhs = cl.gp(cl.gp(x, y), z)
        rhs = cl.gp(x, cl.gp(y, z))
        scale = cl.norm(x) * cl.norm(y) * cl.norm(z)
        assoc = max(assoc, float(np.max(cl.norm(lhs - rhs) / scale)))
        ratio = cl.norm(cl.gp(x, y)) / (cl.norm(x) * cl.norm(y))
        ineq = max(ineq, float(np.max(ratio) / 2 ** (m / 2)))
        eye = np.eye(n)
        for a, b in itertools.product(range(n), repeat=2):
            if not np.array_equal(cl.conj(cl.gp(eye[a], eye[b])), cl.gp(cl.conj(eye[b]), cl.conj(eye[a]))):
                conj_exact = False
    ok = assoc <= 1e-11 and conj_exact and ineq <= 1.0
    return CheckResult("algebra_laws", 1, "algebra", ok, {"assoc_rel": assoc, "conj_blades_exact": conj_exact, "norm_ratio_over_bound": ineq})


def check_invertibility(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 1)
    try:
        cl.try_inverse(Multivector.scalar(3) + Multivector.basis(3, 1, 2, 3))
        zero_divisor = False
    except NotInvertible:
        zero_divisor = True
    worst = 0.0
    tested = 0
    for kind in ("paravector", "multivector"):
        count = 0
        while count < 200:
            m = int(rng.integers(1, 6))
            if kind == "paravector":
                a = Multivector.paravector(rng.normal(size=m + 1))
            else:
                a = Multivector(m, rng.normal(size=1 << m))
            try:
                inv = cl.try_inverse(a)
            except NotInvertible:
                continue
            one = Multivector.scalar(m)
            worst = max(worst, (a * inv - one).norm, (inv * a - one).norm)
            count += 1
            tested += 1
    ok = zero_divisor and worst < 1e-10
    return CheckResult("invertibility", 2, "algebra", ok, {"1+e123_not_invertible": zero_divisor, "max_inverse_residual": worst, "tested": tested})


# ---------------------------------------------------------------------------
# monogenic bases


def check_monogenic_bases(cfg: RunConfig) -> CheckResult:
    sizes_ok = True
    off = 0.0
    for m, k in itertools.product((2, 3), range(0, 5)):
        basis = orthobasis_Mk(m, k)
        sizes_ok &= len(basis.basis) == comb(m + k - 1, k)
        G = basis.gram_matrix()
        n = G.shape[0]
        for j, l in itertools.product(range(n), repeat=2):
            if j != l:
                off = max(off, float(np.max(np.abs(G[j, l]))))
    b = orthobasis_Mk(2, 1)
    e12 = Multivector.basis(2, 1, 2).coeffs
    exact = max(
        abs(b.result.self_grams[0][0] - 2 / 3),
        float(np.max(np.abs(b.result.self_grams[0][1:]))),
        abs(b.result.self_grams[1][0] - 1 / 2),
        float(np.max(np.abs(b.result.self_grams[1][1:]))),
        float(np.max(np.abs(b.result.lam[1, 0] - e12 / 2))),
    )
    ok = sizes_ok and off < 1e-10 and exact < 1e-12
    return CheckResult("monogenic_bases", 3, "monogenics", ok, {"sizes_ok": sizes_ok, "max_offdiag": off, "m2k1_exact_err": exact})


def check_monogenicity(cfg: RunConfig) -> CheckResult:
    worst_v = 0.0
    worst_u = 0.0
    for m, k in itertools.product((2, 3), range(0, 5)):
        for idx in fueter_indices(m, k):
            worst_v = max(worst_v, dirac_apply(fueter(m, idx)).max_abs_coeff())
        for u in orthobasis_Mk(m, k).basis:
            worst_u = max(worst_u, dirac_apply(u).max_abs_coeff())
    ok = worst_v < 1e-12 and worst_u < 1e-12
    return CheckResult("monogenicity", 4, "monogenics", ok, {"dirac_V": worst_v, "dirac_U": worst_u})


# ---------------------------------------------------------------------------
# kernels and TM systems


def check_reproducing(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 5)
    m = 2
    grid = build_grid(m, cfg.quad_degree)
    polys = [fueter(m, idx).astype_float() for k in range(4) for idx in fueter_indices(m, k)]
    values = [V(grid.nodes) for V in polys]
    worst = 0.0
    for a in random_ball_points(rng, 10, m, 0.7):
        S = cl.conj(szego_eval("ball", a, grid.nodes))
        for V, vals in zip(polys, values):
            worst = max(worst, float(np.max(np.abs(integrate(grid, cl.gp(S, vals)) - V(a)))))
    return CheckResult("reproducing_property", 5, "kernels", worst < 1e-6, {"max_err": worst, "quad_degree": cfg.quad_degree})


def _quadrature_gram(tm: TMSystem, grid) -> np.ndarray:
    B = tm.evaluate_all(grid.nodes) / tm.norms[:, None, None]
    n = len(tm)
    G = np.zeros((n, n, 1 << tm.m))
    for j, l in itertools.product(range(n), repeat=2):
        G[j, l] = integrate(grid, cl.gp(cl.conj(B[l]), B[j]))
    return G


def check_tm_orthonormality(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 6)
    grid_cache = {}
    measured = {}
    ok = True
    for m in (2, 3):
        poles = random_ball_points(rng, 5, m, 0.5)
        tm = TMSystem.from_poles("ball", poles)
        G = tm.normalized_gram()
        eye = np.zeros_like(G)
        eye[np.arange(5), np.arange(5), 0] = 1.0
        internal = float(np.max(np.abs(G - eye)))
        off = float(max(np.max(np.abs(G[j, l])) for j in range(5) for l in range(5) if j != l))
        grid = grid_cache.setdefault(m, build_grid(m, cfg.quad_degree))
        quad = float(np.max(np.abs(_quadrature_gram(tm, grid) - G)))
        zeros = 0.0
        for n in range(2, 6):
            _, B = tm.evaluate(n, poles[: n - 1])
            zeros = max(zeros, float(np.max(cl.norm(B))))
        measured.update({f"m{m}_gram_identity": internal, f"m{m}_offdiag": off, f"m{m}_quad_vs_internal": quad, f"m{m}_zeros": zeros})
        ok &= internal < 1e-9 and quad < 1e-6 and zeros < 1e-8
    return CheckResult("tm_orthonormality", 6, "tm", ok, measured)


def classical_tm(poles: np.ndarray, z: np.ndarray) -> np.ndarray:
    """Complex TM functions ``sqrt(1-|a_n|^2)/(1-conj(a_n) z) prod_{k<n} (z-a_k)/(1-conj(a_k) z)``."""
    out = []
    blaschke = np.ones_like(z)
    for a in poles:
        out.append(np.sqrt(1 - abs(a) ** 2) / (1 - np.conj(a) * z) * blaschke)
        blaschke = blaschke * (z - a) / (1 - np.conj(a) * z)
    return np.array(out)


def check_classical_reduction(cfg: RunConfig) -> CheckResult:
    poles_c = np.array([0.0, 0.5, 0.3 + 0.4j])
    poles = np.stack([poles_c.real, poles_c.imag], axis=1)
    tm = TMSystem.from_poles("ball", poles)
    theta = 2 * np.pi * np.arange(100) / 100
    x = np.stack([np.cos(theta), np.sin(theta)], axis=1)
    B = tm.evaluate_all(x) / tm.norms[:, None, None]
    Bc = B[..., 0] + 1j * B[..., 1]
    ref = classical_tm(poles_c, x[:, 0] + 1j * x[:, 1])
    modulus = float(np.max(np.abs(np.abs(Bc) - np.abs(ref))))
    gram = tm.identity_defect()
    factors = Bc / ref
    spread = float(np.max(np.abs(factors - factors[:, :1])))
    f = factors[:, 0]
    measured = {"modulus_err": modulus, "gram_identity": gram, "factor_spread": spread}
    for n, c in enumerate(f, 1):
        measured[f"factor_B{n}"] = f"{c.real:+.12f}{c.imag:+.12f}i"
    return CheckResult("classical_reduction", 7, "tm", modulus < 1e-9 and gram < 1e-10, measured)


def check_scalar_gram(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 8)
    worst = {2: 0.0, 3: 0.0}
    worst_n = {2: 0, 3: 0}
    violations = []
    for m in (2, 3):
        for trial in range(20):
            poles = random_ball_points(rng, 5, m, 0.9)
            tm = TMSystem.from_poles("ball", poles)
            for n, r in enumerate(tm.scalar_gram_report(), 1):
                if r > worst[m]:
                    worst[m], worst_n[m] = r, n
                if r >= 1e-9:
                    violations.append({"m": m, "trial": trial, "n": n, "ratio": r, "poles": poles.tolist()})
    measured = {"m2_max_ratio": worst[2], "m3_max_ratio": worst[3], "m3_worst_n": worst_n[3], "violations": len(violations)}
    res = CheckResult("scalar_self_gram", 8, "tm", not violations, measured, informational=True)
    res.counterexamples = violations[:3]
    return res


# ---------------------------------------------------------------------------
# adaptive decomposition


def _exact_recovery_target(grid: SearchGrid, rng):
    # three poles on the grid at radius 0.9, well separated
    params = grid.params
    r_idx = np.isclose(params[:, 0], grid.radial_step * round(0.9 / grid.radial_step))
    cand = np.flatnonzero(r_idx)
    pts = grid.points()
    chosen = [int(cand[0])]
    while len(chosen) < 3:
        d = np.min(np.linalg.norm(pts[cand][:, None] - pts[chosen][None], axis=-1), axis=1)
        chosen.append(int(cand[int(np.argmax(d))]))
    poles = pts[chosen]
    return AtomCombo.from_poles("ball", poles, random_unit_coeffs(rng, 3, grid.m)), poles


def check_afd_exact(cfg: RunConfig) -> CheckResult:
    t0 = time.perf_counter()
    rng = np.random.default_rng(cfg.seed + 9)
    grid = SearchGrid(2, cfg.radial_step, cfg.r_max, cfg.n_angular, cfg.refine_rounds)
    f, poles = _exact_recovery_target(grid, rng)
    states = []
    state = afd_run(f, 10, cfg.stop_tol, grid, callback=states.append)
    elapsed = time.perf_counter() - t0
    rel = state.residual_energy / state.norm_sq
    book = 0.0
    for s in states:
        direct = residual_function(s, f).norm_sq
        book = max(book, abs(direct - s.residual_energy) / s.norm_sq)
    subset = all(any(np.array_equal(p, b) for b in poles) for p in state.poles)
    no_deriv = not any(a.is_derivative for a in state.tm.atoms)
    ok = rel < 1e-8 and book < 1e-10 and elapsed < 60
    return CheckResult(
        "afd_exact_recovery", 9, "afd", ok,
        {"steps": state.n_steps, "residual_rel": float(rel), "bookkeeping_rel": book, "poles_subset": subset, "no_derivative_atoms": no_deriv, "seconds": elapsed},
    )


def random_h2_function(rng, m: int, n_atoms: int = 10, r_max: float = 0.9):
    """``sum B_{b_k} c_k`` with ``B_b = S_b / ||S_b||``; returns ``(f, M)`` with ``M = sum |c_k|``."""
    poles = random_ball_points(rng, n_atoms, m, r_max)
    c = random_unit_coeffs(rng, n_atoms, m) * rng.uniform(0.1, 1.0, size=n_atoms)[:, None]
    return AtomCombo.from_poles("ball", poles, c, normalized=True), float(np.sum(np.linalg.norm(c, axis=1)))


def check_afd_rate(cfg: RunConfig, n_functions: int = 5, n_steps: int = 50) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 10)
    m = 2
    grid = SearchGrid(m, cfg.radial_step, cfg.r_max, cfg.n_angular, cfg.refine_rounds)
    monotone = True
    worst = 0.0
    steps = []
    for _ in range(n_functions):
        f, M = random_h2_function(rng, m)
        state = afd_run(f, n_steps, 0.0, grid)
        res = state.residual_energies
        monotone &= bool(np.all(np.diff(res) <= 1e-12))
        N = np.arange(1, min(len(res), n_steps) + 1)
        bound = 2 ** (m / 2) * M / np.sqrt(N)
        worst = max(worst, float(np.max(np.sqrt(np.maximum(res[: len(N)], 0.0)) / bound)))
        steps.append(state.n_steps)
    return CheckResult("afd_convergence_rate", 10, "afd", monotone and worst <= 1.0, {"monotone": monotone, "max_norm_over_bound": worst, "steps": str(steps)})


def check_reordering(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 11)
    worst = 0.0
    for m in (2, 3):
        for _ in range(5):
            poles = random_ball_points(rng, 4, m, 0.8)
            f = AtomCombo.from_poles("ball", random_ball_points(rng, 3, m, 0.8), random_unit_coeffs(rng, 3, m))
            worst = max(worst, reorder_projection_check(poles, f, order=list(rng.permutation(4))))
    return CheckResult("reordering_invariance", 11, "afd", worst < 1e-9, {"max_projection_diff": worst})


def check_boundary_vanishing(cfg: RunConfig) -> CheckResult:
    rng = np.random.default_rng(cfg.seed + 12)
    m = 2
    grid = SearchGrid(m, cfg.radial_step, cfg.r_max, cfg.n_angular, cfg.refine_rounds)
    f = AtomCombo.from_poles("ball", random_ball_points(rng, 3, m, 0.5), random_unit_coeffs(rng, 3, m))
    ang = grid.params[grid.params[:, 0] == grid.params[1, 0], 1:]
    pts = polar_to_cartesian(np.hstack([np.full((ang.shape[0], 1), 0.999), ang]))
    e = plain_energies(AfdState.initial(f), f, pts)
    ratio = float(np.max(e) / f.norm_sq)
    return CheckResult("boundary_vanishing", 12, "afd", ratio < 1e-3, {"max_energy_rel": ratio, "directions": int(pts.shape[0])})


# ---------------------------------------------------------------------------
# lifts


def check_schwarz_lift(cfg: RunConfig) -> CheckResult:
    from .embed import BoundarySignal, schwarz_lift

    rng = np.random.default_rng(cfg.seed + 13)
    g2 = build_grid(2, cfg.quad_degree)
    x = random_ball_points(rng, 20, 2, 0.6)
    one = schwarz_lift(BoundarySignal(g2, np.ones(len(g2)))).value(x)
    err_one = float(np.max(np.abs(one - cl.unit(2, (20,)))))
    g1 = build_grid(1, cfg.quad_degree)
    x1 = random_ball_points(rng, 20, 1, 0.7)
    cos_lift = schwarz_lift(BoundarySignal(g1, g1.nodes[:, 0])).value(x1)
    err_cos = float(np.max(np.abs(cos_lift - cl.paravector_array(x1))))
    # band-limited data; the signal grid resolves the Poisson kernel at r = 0.99
    fine = build_grid(2, 600)

    def band(n):
        return 0.5 * n[:, 0] + 0.3 * (n[:, 1] ** 2 - n[:, 2] ** 2) + 0.2 * n[:, 0] * n[:, 1] * n[:, 2]

    coarse = build_grid(2, 16)
    lift = schwarz_lift(BoundarySignal.from_function(fine, band))
    err_band = float(np.max(np.abs(lift.scalar_value(0.99 * coarse.nodes) - band(coarse.nodes))))
    ok = err_one < 1e-8 and err_cos < 1e-6 and err_band < 0.05
    return CheckResult("schwarz_lift", 13, "embed", ok, {"const_err": err_one, "cos_err": err_cos, "band_limited_r099_err": err_band})


CHECKS: dict[str, list[Callable]] = {
    "algebra": [check_algebra_laws, check_invertibility],
    "monogenics": [check_monogenic_bases, check_monogenicity],
    "kernels": [check_reproducing],
    "tm": [check_tm_orthonormality, check_classical_reduction, check_scalar_gram],
    "afd": [check_afd_exact, check_afd_rate, check_reordering, check_boundary_vanishing],
    "embed": [check_schwarz_lift],
}

RUNTIME_LIMIT = 300.0
# per-check wall-clock limits, seconds
CHECK_LIMITS = {1: 10.0, 3: 30.0}


def run_verify(cfg: Optional[RunConfig] = None, only: Optional[str] = None, progress: Optional[Callable] = None) -> dict:
    """Run the suite; returns the JSON-ready report.

    ``only`` restricts to one group (``algebra``, ``monogenics``, ``kernels``,
    ``tm``, ``afd``, ``embed``).  The runtime check is included only for full
    runs.
    """
    cfg = cfg or RunConfig()
    if only is not None and only not in CHECKS:
        raise ValueError(f"unknown check group {only!r}; choose from {sorted(CHECKS)}")
    groups = [only] if only else list(CHECKS)
    results = []
    t0 = time.perf_counter()
    for g in groups:
        for fn in CHECKS[g]:
            t = time.perf_counter()
            r = fn(cfg)
            r.seconds = time.perf_counter() - t
            limit = CHECK_LIMITS.get(r.criterion)
            if limit is not None:
                r.measured["seconds"] = r.seconds
                r.passed = r.passed and r.seconds < limit
            results.append(r)
            if progress:
                progress(r)
    total = time.perf_counter() - t0
    if only is None:
        r = CheckResult("verify_runtime", 14, "runtime", total < RUNTIME_LIMIT, {"seconds": total, "limit": RUNTIME_LIMIT})
        results.append(r)
        if progress:
            progress(r)
    passed = all(r.passed for r in results if not r.informational)
    report = {
        "passed": passed,
        "seconds": total,
        "config": cfg.to_json(),
        "checks": [r.to_json() for r in results],
    }
    for r in results:
        if getattr(r, "counterexamples", None):
            report.setdefault("counterexamples", {})[r.name] = r.counterexamples
    return report
