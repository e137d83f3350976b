"""Information inequalities as checkable reports, plus an accessible-information search."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from . import entropy
from .core import Ensemble, MultipartiteState, assemble_xq, fmt, labelset
from .measurement import (
    Povm,
    ProjectiveMeasurement,
    apply_measurement,
    explicit_post_state,
    extracted_info,
    neumark_dilate,
    outcome_table,
    reduce_xa,
    sequential_measure,
)

MARGIN_TOL = 1e-9


@dataclass(frozen=True)
class Inequality:
    """``lhs <= rhs`` (or ``lhs = rhs``) with its signed margin ``rhs - lhs``."""

    name: str
    lhs: float
    rhs: float
    tol: float = MARGIN_TOL
    relation: str = "<="

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def satisfied(self) -> bool:
        if self.relation == "=":
            return bool(abs(self.margin) <= self.tol)
        return bool(self.margin >= -self.tol)

    def to_record(self) -> dict:
        return {"name": self.name, "relation": self.relation, "lhs": float(self.lhs), "rhs": float(self.rhs),
                "margin": float(self.margin), "satisfied": self.satisfied, "tolerance": self.tol}


@dataclass(frozen=True)
class BoundReport:
    title: str
    quantities: dict[str, float]
    checks: tuple[Inequality, ...] = ()
    tol: float = MARGIN_TOL
    extra: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(c.satisfied for c in self.checks)

    def check(self, name: str) -> Inequality:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_record(self) -> dict:
        rec = {"title": self.title, "quantities": {k: float(v) for k, v in self.quantities.items()},
               "checks": [c.to_record() for c in self.checks], "tolerance": self.tol, "ok": self.ok}
        rec.update(self.extra)
        return rec

    def to_text(self) -> str:
        lines = [self.title]
        width = max([len(k) for k in self.quantities] + [8]) + 2
        for k, v in self.quantities.items():
            lines.append(f"  {k:<{width}}{fmt(v)} bits")
        for c in self.checks:
            verdict = "ok" if c.satisfied else "VIOLATED"
            lines.append(f"  [{verdict}] {c.name}: {fmt(c.lhs, '.6f')} {c.relation} {fmt(c.rhs, '.6f')}"
                         f"  (margin {fmt(c.margin, '+.6f')})")
        return "\n".join(lines)


def holevo_chi(e: Ensemble) -> float:
    """``S(sum p_i rho_i) - sum p_i S(rho_i)``."""
    avg_entropy = sum(p * entropy.von_neumann(r) for p, r in zip(e.probs, e.states))
    return entropy.von_neumann(e.average()) - avg_entropy


def chi_range(e: Ensemble, tol: float = MARGIN_TOL) -> BoundReport:
    """Concavity sandwich on ``S(rho)`` and the implied range ``0 <= chi <= H[p]``."""
    mean_s = float(sum(p * entropy.von_neumann(r) for p, r in zip(e.probs, e.states)))
    s_rho = entropy.von_neumann(e.average())
    h_p = entropy.shannon(e.probs)
    chi = s_rho - mean_s
    checks = (
        Inequality("sum p_i S(rho_i) <= S(rho)", mean_s, s_rho, tol),
        Inequality("S(rho) <= H[p] + sum p_i S(rho_i)", s_rho, h_p + mean_s, tol),
        Inequality("0 <= chi", 0.0, chi, tol),
        Inequality("chi <= H[p]", chi, h_p, tol),
    )
    return BoundReport("Holevo quantity range",
                       {"chi": chi, "S(rho)": s_rho, "H[p]": h_p, "sum p_i S(rho_i)": mean_s},
                       checks, tol)


def verify_kholevo(e: Ensemble, m: ProjectiveMeasurement | Povm, tol: float = MARGIN_TOL) -> BoundReport:
    """Compare extracted information with the Holevo bound and split the gap.

    POVMs are measured as their Neumark dilation. The post-measurement state
    yields the balance ``I + S(X':Q'|A') = S(X:Q)``.
    """
    dilated = False
    if isinstance(m, Povm):
        d = neumark_dilate(m)
        e, m = d.embed_ensemble(e), d.measurement
        dilated = True
    xq = assemble_xq(e)
    chi = holevo_chi(e)
    info, table = extracted_info(xq, m)
    post = apply_measurement(xq, m)
    residual = entropy.conditional_mutual(post, "X", "Q", "A")
    conserved = entropy.mutual(post, "X", ("Q", "A"))
    s_xa = entropy.mutual(reduce_xa(post), "X", "A")
    checks = (
        Inequality("I <= chi", info, chi, tol),
        Inequality("0 <= S(X':Q'|A')", 0.0, residual, tol),
    )
    return BoundReport(
        "Holevo bound",
        {"I": info, "chi": chi, "S(X':A')": s_xa, "S(X':Q'|A')": residual,
         "S(X':Q'A')": conserved, "I + S(X':Q'|A')": info + residual},
        checks, tol,
        extra={"dilated": dilated, "outcomes": table.to_record()},
    )


def _ancilla_decomposition(s: MultipartiteState, x: str, y: str) -> dict[str, float]:
    """Attach pointer ancillas to ``x`` and ``y`` and split ``S(x:y)`` into three terms."""
    post = explicit_post_state(s, ProjectiveMeasurement.computational(s.layout.dim_of([x])),
                               q=x, ancilla="A'")
    post = explicit_post_state(post, ProjectiveMeasurement.computational(s.layout.dim_of([y])),
                               q=y, ancilla="B'")
    return {
        "S(A':B')": entropy.mutual(post, "A'", "B'"),
        "S(A':Y'|B')": entropy.conditional_mutual(post, "A'", y, "B'"),
        "S(X':Y'B'|A')": entropy.conditional_mutual(post, x, (y, "B'"), "A'"),
        "S(X'A':Y'B')": entropy.mutual(post, (x, "A'"), (y, "B'")),
    }


def general_inequality(s: MultipartiteState, x: str | None = None, y: str | None = None,
                       tol: float = MARGIN_TOL, decompose: bool = True) -> BoundReport:
    """Diagonal Shannon mutual information against the quantum mutual entropy.

    With ``decompose`` the quantum side is also split via local pointer
    ancillas; the first term equals the Shannon side.
    """
    if x is None or y is None:
        if len(s.labels) != 2:
            raise ValueError(f"need a bipartite state or explicit labels, got {s.labels}")
        x, y = s.labels
    x, y = labelset(x)[0], labelset(y)[0]
    h = entropy.diagonal_mutual_shannon(s, x, y)
    q = entropy.mutual(s, x, y)
    quantities = {"H(X:Y)": h, "S(X:Y)": q}
    if decompose:
        quantities |= _ancilla_decomposition(s.reduce((x, y)), x, y)
    return BoundReport("Shannon vs quantum mutual entropy", quantities,
                       (Inequality("H(X:Y) <= S(X:Y)", h, q, tol),), tol)


def _step_name(j: int) -> str:
    given = "" if j == 0 else "|A1" if j == 1 else f"|A1..A{j}"
    return f"H(X:A{j + 1}{given})"


def sequential_report(e: Ensemble, chain, tol: float = MARGIN_TOL) -> BoundReport:
    result = sequential_measure(assemble_xq(e), chain)
    chi = holevo_chi(e)
    q = {_step_name(j): float(v) for j, v in enumerate(result.step_info)}
    q |= {"sum": result.total, "chi": chi}
    return BoundReport("Sequential measurements", q,
                       (Inequality("sum_j H(X:A_j|A_<j) <= chi", result.total, chi, tol),), tol,
                       extra={"chain": result.to_record()})


# --- accessible-information search -------------------------------------------------


@dataclass(frozen=True)
class OptimizerConfig:
    restarts: int = 8
    steps: int = 400
    step_size: float = 0.5
    decay: float = 0.5
    seed: int = 0
    step_floor: float = 1e-7
    #: search rank-one projective measurements on ``C^n`` with ``n > d`` (a POVM on Q)
    povm_outcomes: int | None = None

    def __post_init__(self):
        if self.restarts < 1 or self.steps < 1:
            raise ValueError("restarts and steps must be positive")
        if not self.step_size > 0:
            raise ValueError("step size must be positive")
        if not 0 < self.decay < 1:
            raise ValueError("decay must lie in (0, 1)")
        if self.step_floor <= 0:
            raise ValueError("step floor must be positive")


def hermitian_basis(dim: int) -> list[np.ndarray]:
    """Generalized Gell-Mann matrices (traceless Hermitian, ``dim**2 - 1`` of them)."""
    basis = []
    for j in range(dim):
        for k in range(j + 1, dim):
            sym = np.zeros((dim, dim), dtype=complex)
            sym[j, k] = sym[k, j] = 1
            asym = np.zeros((dim, dim), dtype=complex)
            asym[j, k], asym[k, j] = -1j, 1j
            basis += [sym, asym]
    for l in range(1, dim):
        diag = np.zeros(dim)
        diag[:l] = 1
        diag[l] = -l
        basis.append(np.diag(diag * np.sqrt(2 / (l * (l + 1)))).astype(complex))
    return basis


def unitary_from_params(theta: np.ndarray, basis: list[np.ndarray]) -> np.ndarray:
    gen = sum(t * g for t, g in zip(theta, basis))
    return scipy.linalg.expm(1j * gen)


def basis_measurement(u: np.ndarray) -> ProjectiveMeasurement:
    return ProjectiveMeasurement.from_basis(u.T)


@dataclass(frozen=True)
class OptimizationResult:
    info: float
    measurement: ProjectiveMeasurement | Povm
    unitary: np.ndarray
    params: np.ndarray
    restart: int
    chi: float
    history: tuple[float, ...]  # best-so-far after every sweep, across restarts

    @property
    def gap(self) -> float:
        return self.chi - self.info


def _pad(e: Ensemble, n: int) -> Ensemble:
    d = e.dim

    def embed(r):
        out = np.zeros((n, n), dtype=complex)
        out[:d, :d] = r
        return out

    return e.mapped(embed)


def optimize_accessible_info(e: Ensemble, cfg: OptimizerConfig = OptimizerConfig()) -> OptimizationResult:
    """Random-restart coordinate hill climbing over rank-one projective measurements.

    Bases are ``U |k>`` with ``U = exp(i sum_k theta_k G_k)``. Each sweep tries
    ``theta_k +- step`` for every coordinate and keeps strict improvements;
    a sweep without improvement multiplies the step by ``decay``. The result
    is a lower bound on the accessible information and never exceeds ``chi``.
    """
    chi = holevo_chi(e)
    work = e
    if cfg.povm_outcomes is not None:
        if cfg.povm_outcomes < e.dim:
            raise ValueError("povm_outcomes must be at least the channel dimension")
        work = _pad(e, cfg.povm_outcomes)
    dim = work.dim
    gens = hermitian_basis(dim)
    states = np.stack(work.states)
    probs = np.asarray(work.probs)

    def score(theta):
        u = unitary_from_params(theta, gens)
        # cond[i, k] = <u_k| rho_i |u_k>
        cond = np.real(np.einsum("ka,ikl,la->ia", u.conj(), states, u))
        cond = np.clip(cond, 0.0, None)
        cond /= cond.sum(axis=1, keepdims=True)
        joint = probs[:, None] * cond
        return entropy.shannon_mutual(joint)

    rng = np.random.default_rng(cfg.seed)
    best = (-np.inf, None, -1)
    history: list[float] = []
    for restart in range(cfg.restarts):
        theta = rng.uniform(-np.pi, np.pi, len(gens)) if gens else np.zeros(0)
        current = score(theta)
        step = cfg.step_size
        for _ in range(cfg.steps):
            improved = False
            for k in range(len(theta)):
                for sign in (1.0, -1.0):
                    trial = theta.copy()
                    trial[k] += sign * step
                    val = score(trial)
                    if val > current:
                        theta, current, improved = trial, val, True
                        break
            if current > best[0]:
                best = (current, theta.copy(), restart)
            history.append(best[0])
            if not improved:
                step *= cfg.decay
                if step < cfg.step_floor:
                    break
        if current > best[0]:
            best = (current, theta.copy(), restart)
        history.append(best[0])

    info, theta, restart = best
    u = unitary_from_params(theta, gens)
    meas: ProjectiveMeasurement | Povm = basis_measurement(u)
    if cfg.povm_outcomes is not None:
        d = e.dim
        meas = Povm(tuple(p[:d, :d] for p in meas.projectors))
    info = outcome_table(e, meas).information()
    if info > chi + MARGIN_TOL:
        raise RuntimeError(f"accessible information {info} exceeds Holevo bound {chi}")
    return OptimizationResult(float(info), meas, u, theta, restart, chi, tuple(history))

