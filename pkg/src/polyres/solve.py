"""Online stage: fill a plan with numbers, Schur-reduce, eigendecompose.

Failures that count toward the benchmark failure rate (singular pivot
block, stalled eigeniteration, unrecoverable eigenvector) raise
SolveFailure; caller bugs such as missing coefficient slots raise their
own exceptions and are never silently absorbed.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass

import numpy as np

from .linalg import EigenConvergenceError, SingularPivotError, eig, schur_complement
from .plan import SolverPlan
from .poly import mono_mul, normalized_residual

REAL_COORD_TOL = 1e-6
FAILURE_RESIDUAL = 1e-3  # benchmark failure threshold on normalized residuals
_LOG_FLOOR = 1e-300


class SolveFailure(RuntimeError):
    """Numeric failure of one solve; carries the underlying cause."""


class UnrecoverableVariableError(SolveFailure):
    def __init__(self, var_name: str):
        self.var_name = var_name
        super().__init__(f"no monomial pair in B1 recovers variable {var_name}")


@dataclass(frozen=True)
class SolverInstance:
    plan: SolverPlan
    coeffs: dict
    upper_a11: np.ndarray
    upper_a12: np.ndarray
    lower_const: np.ndarray  # x_k-part of the lower block (A21 | A22)
    lower_hidden: np.ndarray  # u0-part of the lower block (B21 | B22)

    @property
    def variant(self) -> str:
        return self.plan.layout.variant


def fill(plan: SolverPlan, coeffs) -> SolverInstance:
    """Write every layout cell from its (polynomial, term, multiplier) source."""
    lay = plan.layout
    a_part, u_part = lay.template.fill_parts(coeffs)
    nu, nb1 = lay.n_upper, lay.n_b1
    return SolverInstance(
        plan,
        dict(coeffs),
        a_part[:nu, :nb1].copy(),
        a_part[:nu, nb1:].copy(),
        a_part[nu:, :].copy(),
        u_part[nu:, :].copy(),
    )


def schur_matrix(inst: SolverInstance) -> np.ndarray:
    """The eigenproblem matrix X of the plan's partition variant."""
    lower = inst.lower_const if inst.variant == "v1" else inst.lower_hidden
    m = np.block([[inst.upper_a11, inst.upper_a12], [lower]])
    return schur_complement(m, (inst.plan.layout.n_upper, inst.plan.layout.n_b1))


@dataclass(frozen=True)
class Root:
    point: tuple[complex, ...]
    eigvalue: complex
    residual: float
    is_real: bool


@dataclass(frozen=True)
class SolutionSet:
    roots: tuple[Root, ...]
    n_solutions_bound: int

    def real_roots(self) -> list[Root]:
        return [r for r in self.roots if r.is_real]


def recover(eigvec: np.ndarray, plan: SolverPlan, x_k_value: complex) -> tuple[complex, ...]:
    """Full solution vector from one eigenvector over the B1 monomials.

    Every variable except x_k is read off as a least-squares ratio over the
    pairs (m, x_i * m) lying in B1; x_k comes from the eigenvalue, not the
    vector.  Recovery is invariant under rescaling of the eigenvector.
    """
    lay = plan.layout
    n = lay.template.system.n_vars
    pos = {m: i for i, m in enumerate(lay.b1)}
    v = np.asarray(eigvec, dtype=np.complex128)
    if not v.any():
        raise ValueError("eigenvector is zero")
    one = tuple(0 for _ in range(n))
    if one in pos and abs(v[pos[one]]) > 0:
        v = v / v[pos[one]]
    point = [0j] * n
    for i in range(n):
        if i == lay.hidden_var - 1:
            point[i] = complex(x_k_value)
            continue
        e_i = tuple(1 if j == i else 0 for j in range(n))
        num = 0j
        den = 0.0
        for m, idx in pos.items():
            j = pos.get(mono_mul(m, e_i))
            if j is not None:
                num += np.conj(v[idx]) * v[j]
                den += abs(v[idx]) ** 2
        if den == 0.0:
            raise UnrecoverableVariableError(lay.template.system.var_names[i])
        point[i] = num / den
    return tuple(point)


def solve(inst: SolverInstance, tol: float = 1e-8) -> SolutionSet:
    """All roots recoverable from the plan's eigenproblem; residuals are
    recomputed from the original polynomial templates, never copied."""
    plan = inst.plan
    try:
        x = schur_matrix(inst)
        res = eig(x, tol=tol)
    except (SingularPivotError, EigenConvergenceError) as e:
        raise SolveFailure(str(e)) from e
    base = plan.base_system
    # For the alternate partition a root coordinate u0 appears as -1/u0, so
    # lambda = 0 is never an affine root; zero eigenvalues are the parasitic
    # ones the relaxation introduces.  A defective zero block of size m
    # perturbs to magnitude (eps * scale)^(1/m); culling at the cube root
    # keeps headroom for blocks up to size three.
    eps = float(np.finfo(np.float64).eps)
    cull = (eps * (1.0 + float(np.linalg.norm(x)))) ** (1.0 / 3.0)
    roots = []
    for lam, vec in res.pairs():
        if plan.layout.variant == "v1":
            xk = lam
        else:
            if abs(lam) < cull:
                continue  # parasitic (zero) eigenvalue of the alt form
            xk = -1.0 / lam
        point = recover(vec, plan, xk)
        resid = normalized_residual(base, inst.coeffs, point)
        biggest = max(abs(c) for c in point) if point else 0.0
        is_real = all(abs(c.imag) <= REAL_COORD_TOL * (1.0 + biggest) for c in point)
        roots.append(Root(point, complex(lam), float(resid), bool(is_real)))
    return SolutionSet(tuple(roots), plan.n_solutions)


def solve_instance(plan: SolverPlan, coeffs, tol: float = 1e-8) -> SolutionSet:
    return solve(fill(plan, coeffs), tol)


@dataclass(frozen=True)
class BenchReport:
    trials: int
    mean_log10: float | None
    median_log10: float | None
    fail_pct: float
    n_solutions_histogram: dict[int, int]
    timing_us: dict[str, float] | None

    def to_json(self) -> str:
        doc = {
            "trials": self.trials,
            "mean_log10": self.mean_log10,
            "median_log10": self.median_log10,
            "fail_pct": self.fail_pct,
            "n_solutions_histogram": {str(k): v for k, v in sorted(self.n_solutions_histogram.items())},
            "timing_us": self.timing_us,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @staticmethod
    def from_json(text: str) -> "BenchReport":
        doc = json.loads(text)
        return BenchReport(
            doc["trials"],
            doc["mean_log10"],
            doc["median_log10"],
            doc["fail_pct"],
            {int(k): v for k, v in doc["n_solutions_histogram"].items()},
            doc["timing_us"],
        )


def benchmark(
    plan: SolverPlan,
    instance_generator,
    trials: int,
    tol: float = 1e-8,
    seed: int = 0,
    record_timing: bool = False,
) -> BenchReport:
    """Random-instance stability run.

    A trial fails when the solve errors or any returned solution has a
    normalized residual above the failure threshold.  Timing is opt-in so
    that default reports are byte-reproducible under a fixed seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    logs: list[float] = []
    failures = 0
    histogram: dict[int, int] = {}
    times: list[float] = []
    for trial in range(trials):
        rng = np.random.default_rng(np.random.SeedSequence([seed, trial]))
        coeffs = instance_generator(rng)
        t0 = time.perf_counter()
        try:
            sols = solve_instance(plan, coeffs, tol)
        except SolveFailure:
            failures += 1
            histogram[0] = histogram.get(0, 0) + 1
            times.append(time.perf_counter() - t0)
            continue
        times.append(time.perf_counter() - t0)
        histogram[len(sols.roots)] = histogram.get(len(sols.roots), 0) + 1
        bad = not sols.roots
        for r in sols.roots:
            logs.append(float(np.log10(max(r.residual, _LOG_FLOOR))))
            if r.residual > FAILURE_RESIDUAL:
                bad = True
        if bad:
            failures += 1
    mean = float(np.mean(logs)) if logs else None
    median = float(np.median(logs)) if logs else None
    timing = None
    if record_timing:
        us = np.array(times) * 1e6
        timing = {"p50": float(np.percentile(us, 50)), "p95": float(np.percentile(us, 95))}
    return BenchReport(trials, mean, median, 100.0 * failures / trials, histogram, timing)
