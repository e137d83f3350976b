"""Ancilla model of measurement.

A projective measurement ``{P_a}`` on the channel ``Q`` is realized by the
unitary ``U = sum_a P_a (x) U_a`` on ``Q (x) A``, where ``U_a`` moves the
ancilla from ``|0>`` to the pointer state ``|a>``. Nothing collapses; the
outcome statistics are read off the reduced preparer/ancilla state.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg

from . import entropy
from .core import (
    STATE_TOL,
    Ensemble,
    LayoutError,
    MultipartiteState,
    assemble_xq,
    embed_operator,
    ensemble_from_xq,
    hermitize,
    projector,
    random_unitary,
)

#: Outcomes whose probability does not exceed this are dropped from posteriors.
NEGLIGIBLE = 1e-12


class MeasurementError(ValueError):
    """Raised when projectors or POVM elements violate their invariants."""


def _max_abs(a) -> float:
    return float(np.max(np.abs(a))) if np.size(a) else 0.0


@dataclass(frozen=True)
class ProjectiveMeasurement:
    """Complete family of mutually orthogonal projectors on one system."""

    projectors: tuple
    tol: float = field(default=STATE_TOL, compare=False, repr=False)

    def __post_init__(self):
        ps = []
        for p in self.projectors:
            p = np.array(p, dtype=complex)
            p.flags.writeable = False
            ps.append(p)
        if not ps:
            raise MeasurementError("measurement needs at least one projector")
        d = ps[0].shape[0]
        if any(p.shape != (d, d) for p in ps):
            raise MeasurementError("projectors must be square and of equal dimension")
        for a, p in enumerate(ps):
            if (v := _max_abs(p - p.conj().T)) > self.tol:
                raise MeasurementError(f"projector {a} not Hermitian (defect {v:.3e})")
            if (v := _max_abs(p @ p - p)) > self.tol:
                raise MeasurementError(f"projector {a} not idempotent (defect {v:.3e})")
        for a in range(len(ps)):
            for b in range(a + 1, len(ps)):
                if (v := _max_abs(ps[a] @ ps[b])) > self.tol:
                    raise MeasurementError(f"projectors {a} and {b} not orthogonal (defect {v:.3e})")
        if (v := _max_abs(sum(ps) - np.eye(d))) > self.tol:
            raise MeasurementError(f"projectors do not sum to identity (defect {v:.3e})")
        object.__setattr__(self, "projectors", tuple(ps))

    @classmethod
    def from_basis(cls, vectors: Iterable[Sequence[complex]]) -> "ProjectiveMeasurement":
        """Rank-one measurement along an orthonormal basis."""
        return cls(tuple(projector(v) for v in vectors))

    @classmethod
    def computational(cls, dim: int) -> "ProjectiveMeasurement":
        return cls.from_basis(np.eye(dim))

    @classmethod
    def trivial(cls, dim: int) -> "ProjectiveMeasurement":
        """The one-outcome measurement ``{I}``."""
        return cls((np.eye(dim),))

    @property
    def dim(self) -> int:
        return self.projectors[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.projectors)

    def probabilities(self, rho) -> np.ndarray:
        return np.array([np.real(np.trace(p @ rho)) for p in self.projectors])

    def as_povm(self) -> "Povm":
        return Povm(self.projectors)


@dataclass(frozen=True)
class Povm:
    """Positive operators ``E_a`` summing to the identity."""

    elements: tuple
    tol: float = field(default=STATE_TOL, compare=False, repr=False)

    def __post_init__(self):
        es = []
        for e in self.elements:
            e = np.array(e, dtype=complex)
            e.flags.writeable = False
            es.append(e)
        if not es:
            raise MeasurementError("POVM needs at least one element")
        d = es[0].shape[0]
        if any(e.shape != (d, d) for e in es):
            raise MeasurementError("POVM elements must be square and of equal dimension")
        for a, e in enumerate(es):
            if (v := _max_abs(e - e.conj().T)) > self.tol:
                raise MeasurementError(f"POVM element {a} not Hermitian (defect {v:.3e})")
            if (lam := np.linalg.eigvalsh(hermitize(e))[0]) < -self.tol:
                raise MeasurementError(f"POVM element {a} not positive (eigenvalue {lam:.3e})")
        if (v := _max_abs(sum(es) - np.eye(d))) > self.tol:
            raise MeasurementError(f"POVM elements do not sum to identity (defect {v:.3e})")
        object.__setattr__(self, "elements", tuple(es))

    @property
    def dim(self) -> int:
        return self.elements[0].shape[0]

    @property
    def outcomes(self) -> int:
        return len(self.elements)

    def probabilities(self, rho) -> np.ndarray:
        return np.array([np.real(np.trace(e @ rho)) for e in self.elements])


def trine_povm() -> Povm:
    """Three symmetric qubit states 120 degrees apart on the Bloch circle, weight 2/3."""
    kets = [(np.cos(np.pi * k / 3), np.sin(np.pi * k / 3)) for k in range(3)]
    return Povm(tuple(2 / 3 * projector(k) for k in kets))


def random_projective(dim: int, seed=None, outcomes: int | None = None) -> ProjectiveMeasurement:
    """Random basis, optionally coarse-grained into ``outcomes`` nonempty groups."""
    rng = np.random.default_rng(seed)
    u = random_unitary(dim, rng)
    outcomes = dim if outcomes is None else outcomes
    if not 1 <= outcomes <= dim:
        raise ValueError(f"outcomes must lie in [1, {dim}]")
    # random surjection of basis vectors onto outcomes
    groups = np.concatenate([np.arange(outcomes), rng.integers(0, outcomes, dim - outcomes)])
    rng.shuffle(groups)
    projs = []
    for a in range(outcomes):
        cols = u[:, groups == a]
        projs.append(cols @ cols.conj().T)
    return ProjectiveMeasurement(tuple(projs))


def random_povm(dim: int, outcomes: int, seed=None) -> Povm:
    """Random POVM ``S^-1/2 G_a S^-1/2`` from Gaussian positive operators ``G_a``."""
    rng = np.random.default_rng(seed)
    gs = []
    for _ in range(outcomes):
        g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
        gs.append(g @ g.conj().T)
    s_inv_half = psd_power(sum(gs), -0.5)
    return Povm(tuple(hermitize(s_inv_half @ g @ s_inv_half) for g in gs))


def psd_power(a: np.ndarray, power: float) -> np.ndarray:
    lam, vec = np.linalg.eigh(hermitize(a))
    lam = np.clip(lam, 0.0, None)
    if power < 0:
        lam = np.where(lam > 0, lam, np.inf)
    return (vec * lam**power) @ vec.conj().T


def shift_operator(dim: int, power: int = 1) -> np.ndarray:
    """Cyclic shift ``|k> -> |k + power mod dim>``."""
    return np.roll(np.eye(dim, dtype=complex), power, axis=0)


def build_u_qa(m: ProjectiveMeasurement, ancilla_dim: int | None = None,
               ancilla_unitaries: Sequence[np.ndarray] | None = None) -> np.ndarray:
    """Unitary ``sum_a P_a (x) U_a`` on ``Q (x) A``.

    By default ``U_a`` is the ``a``-th power of the cyclic shift, so the
    pointer states are the computational basis of the ancilla.
    """
    ancilla_dim = m.outcomes if ancilla_dim is None else ancilla_dim
    if ancilla_dim < m.outcomes:
        raise MeasurementError(f"ancilla of dimension {ancilla_dim} cannot hold {m.outcomes} outcomes")
    if ancilla_unitaries is None:
        ancilla_unitaries = [shift_operator(ancilla_dim, a) for a in range(m.outcomes)]
    if len(ancilla_unitaries) != m.outcomes:
        raise MeasurementError("need one ancilla unitary per outcome")
    return sum(np.kron(p, u) for p, u in zip(m.projectors, ancilla_unitaries))


def pointer_states(ancilla_unitaries: Sequence[np.ndarray]) -> np.ndarray:
    """Columns ``U_a |0>``."""
    return np.stack([np.asarray(u)[:, 0] for u in ancilla_unitaries], axis=1)


def apply_measurement(s: MultipartiteState, m: ProjectiveMeasurement, *, q: str = "Q",
                      ancilla: str = "A", ancilla_dim: int | None = None,
                      ancilla_unitaries: Sequence[np.ndarray] | None = None) -> MultipartiteState:
    """Couple a fresh ancilla in ``|0>`` to subsystem ``q`` and evolve unitarily.

    The ancilla is appended as the last factor. Every other subsystem is
    left untouched.
    """
    if s.layout.dim_of([q]) != m.dim:
        raise LayoutError(f"measurement acts on dimension {m.dim}, {q!r} has {s.layout.dim_of([q])}")
    if ancilla in s.labels:
        raise LayoutError(f"label {ancilla!r} already present")
    ancilla_dim = m.outcomes if ancilla_dim is None else ancilla_dim
    u_qa = build_u_qa(m, ancilla_dim, ancilla_unitaries)
    ref = np.zeros((ancilla_dim, ancilla_dim), dtype=complex)
    ref[0, 0] = 1.0
    layout = s.layout.append(ancilla, ancilla_dim)
    u = embed_operator(u_qa, layout, (q, ancilla))
    rho = u @ np.kron(s.matrix, ref) @ u.conj().T
    return MultipartiteState(hermitize(rho), layout)


def explicit_post_state(s: MultipartiteState, m: ProjectiveMeasurement, *, q: str = "Q",
                        ancilla: str = "A") -> MultipartiteState:
    """Post-measurement state as the branch sum ``sum P_a rho P_a' (x) |a><a'|``."""
    n = m.outcomes
    ks = [embed_operator(p, s.layout, q) for p in m.projectors]
    d = s.layout.dim
    rho = np.zeros((d * n, d * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            rho += np.kron(ks[a] @ s.matrix @ ks[b].conj().T, np.outer(np.eye(n)[a], np.eye(n)[b]))
    return MultipartiteState(rho, s.layout.append(ancilla, n))


def reduce_xa(s: MultipartiteState, x: str = "X", q: str = "Q", ancilla: str = "A") -> MultipartiteState:
    """Trace the channel out of a post-measurement ``X Q A`` state."""
    for lab in (x, q, ancilla):
        if lab not in s.labels:
            raise LayoutError(f"expected subsystems {(x, q, ancilla)}, got {s.labels}")
    return s.reduce((x, ancilla))


@dataclass(frozen=True)
class OutcomeTable:
    """Outcome statistics of a measurement on an ensemble.

    ``conditional[i, a]`` is ``p(a|i)``; ``posterior[i, a]`` is ``p(i|a)``
    (zero in columns of negligible outcomes).
    """

    prior: np.ndarray
    conditional: np.ndarray

    @property
    def joint(self) -> np.ndarray:
        return self.prior[:, None] * self.conditional

    @property
    def marginal(self) -> np.ndarray:
        return self.joint.sum(axis=0)

    @property
    def posterior(self) -> np.ndarray:
        pa = self.marginal
        keep = pa > NEGLIGIBLE
        post = np.zeros_like(self.joint)
        post[:, keep] = self.joint[:, keep] / pa[keep]
        return post

    def information(self) -> float:
        """``H[p_a] - sum_i p_i H[p(a|i)]``, the Shannon mutual information."""
        h_cond = sum(p * entropy.shannon(row) for p, row in zip(self.prior, self.conditional) if p > 0)
        return entropy.shannon(self.marginal) - h_cond

    def to_record(self) -> dict:
        return {
            "prior": self.prior.tolist(),
            "conditional": self.conditional.tolist(),
            "marginal": self.marginal.tolist(),
            "posterior": self.posterior.tolist(),
        }


def outcome_table(e: Ensemble, m: ProjectiveMeasurement | Povm) -> OutcomeTable:
    cond = np.array([m.probabilities(r) for r in e.states])
    cond = np.clip(cond, 0.0, None)
    return OutcomeTable(np.array(e.probs), cond / cond.sum(axis=1, keepdims=True))


def outcome_table_from_state(s_xa: MultipartiteState, pointers: np.ndarray | None = None,
                             x: str = "X", ancilla: str = "A") -> OutcomeTable:
    """Read the outcome table off a reduced ``X A`` state.

    ``pointers`` holds the ancilla pointer states as columns; the default
    is the computational basis.
    """
    r = s_xa.reduce((x, ancilla))
    nx, na = r.layout.dim_of([x]), r.layout.dim_of([ancilla])
    pointers = np.eye(na) if pointers is None else np.asarray(pointers)
    if r.labels != (x, ancilla):
        raise LayoutError("expected preparer before ancilla")
    t = r.matrix.reshape(nx, na, nx, na)
    diag_x = np.einsum("iaib->iab", t)
    joint = np.real(np.einsum("ka,ikl,la->ia", pointers.conj(), diag_x, pointers))
    joint = np.clip(joint, 0.0, None)
    prior = joint.sum(axis=1)
    cond = np.divide(joint, prior[:, None], out=np.zeros_like(joint), where=prior[:, None] > 0)
    return OutcomeTable(prior, cond)


def extracted_info(s: MultipartiteState, m: ProjectiveMeasurement | Povm,
                   x: str = "X", q: str = "Q") -> tuple[float, OutcomeTable]:
    """Information gained about the preparer, with the outcome table it came from."""
    table = outcome_table(ensemble_from_xq(s, x, q), m)
    return table.information(), table


def dephase(s: MultipartiteState, label: str) -> MultipartiteState:
    """Remove coherences between distinct basis states of subsystem ``label``."""
    dims = s.layout.dims
    k = s.layout.index(label)
    d = dims[k]
    before = int(np.prod(dims[:k], dtype=int))
    after = int(np.prod(dims[k + 1:], dtype=int))
    mask_diag = np.kron(np.kron(np.ones((before, before)), np.eye(d)), np.ones((after, after)))
    return MultipartiteState(s.matrix * mask_diag, s.layout)


def decohere_ancilla(s: MultipartiteState, ancilla: str = "A") -> MultipartiteState:
    """Dephase the ancilla in its pointer basis (the environment's only effect)."""
    return dephase(s, ancilla)


def residual_info(s: MultipartiteState, m: ProjectiveMeasurement, x: str = "X", q: str = "Q") -> float:
    """``S(X':Q'|A')`` of the decohered post-measurement state, in closed form.

    Sum over outcomes of ``p_a`` times the Holevo quantity of the
    post-measurement ensemble ``{p(i|a), P_a rho_i P_a / p(a|i)}``.
    """
    e = ensemble_from_xq(s, x, q)
    table = outcome_table(e, m)
    total = 0.0
    for a, proj in enumerate(m.projectors):
        pa = table.marginal[a]
        if pa <= NEGLIGIBLE:
            continue
        post = table.posterior[:, a]
        avg = np.zeros_like(proj)
        within = 0.0
        for i, rho in enumerate(e.states):
            if post[i] <= 0 or table.conditional[i, a] <= NEGLIGIBLE:
                continue
            rho_ai = proj @ rho @ proj / table.conditional[i, a]
            avg += post[i] * rho_ai
            within += post[i] * entropy.von_neumann(rho_ai)
        total += pa * (entropy.von_neumann(avg) - within)
    return total


@dataclass(frozen=True)
class NeumarkDilation:
    """Projective realization of a POVM on ``C^n (x) Q``.

    ``isometry`` maps ``Q`` into the extended space as
    ``V = sum_a |a> (x) sqrt(E_a)``; ``unitary`` has ``V`` as its first
    ``d`` columns, and ``measurement`` projects onto the ``a``-th block.
    """

    measurement: ProjectiveMeasurement
    isometry: np.ndarray
    unitary: np.ndarray

    def embed(self, rho: np.ndarray) -> np.ndarray:
        return hermitize(self.isometry @ rho @ self.isometry.conj().T)

    def embed_ensemble(self, e: Ensemble) -> Ensemble:
        return e.mapped(self.embed)


def neumark_dilate(p: Povm) -> NeumarkDilation:
    n, d = p.outcomes, p.dim
    v = np.vstack([psd_power(e, 0.5) for e in p.elements])
    if _max_abs(v.conj().T @ v - np.eye(d)) > 1e-9:
        raise MeasurementError("dilation is not an isometry")
    complement = scipy.linalg.null_space(v.conj().T)
    u = np.hstack([v, complement])
    if u.shape != (n * d, n * d) or _max_abs(u.conj().T @ u - np.eye(n * d)) > 1e-9:
        raise MeasurementError("could not complete the isometry to a unitary")
    blocks = []
    for a in range(n):
        blk = np.zeros((n * d, n * d), dtype=complex)
        blk[a * d:(a + 1) * d, a * d:(a + 1) * d] = np.eye(d)
        blocks.append(blk)
    return NeumarkDilation(ProjectiveMeasurement(tuple(blocks)), v, u)


@dataclass(frozen=True)
class ChainResult:
    """Outcome statistics and information gains of a measurement sequence.

    ``joint_conditional[i, a1, ..., am]`` is ``p(a1...am|i)``; ``step_info[j]``
    is ``H(X:A_j|A_1...A_{j-1})``.
    """

    prior: np.ndarray
    joint_conditional: np.ndarray
    step_info: np.ndarray

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.step_info)

    @property
    def total(self) -> float:
        return float(self.cumulative[-1])

    def to_record(self) -> dict:
        return {
            "step_info": self.step_info.tolist(),
            "cumulative": self.cumulative.tolist(),
            "total": self.total,
        }


def chain_probabilities(rho: np.ndarray, chain: Sequence[ProjectiveMeasurement]) -> np.ndarray:
    """``p(a1...am) = Tr(P_am...P_a1 rho P_a1...P_am)``, first measurement applied first."""
    shape = tuple(m.outcomes for m in chain)
    out = np.zeros(shape)
    for idx in product(*(range(n) for n in shape)):
        k = np.eye(rho.shape[0], dtype=complex)
        for m, a in zip(chain, idx):
            k = m.projectors[a] @ k
        out[idx] = np.real(np.trace(k @ rho @ k.conj().T))
    return np.clip(out, 0.0, None)


def _mutual_with_prefix(joint: np.ndarray, j: int) -> float:
    """``H(X : A_1...A_j)`` from ``joint[i, a1, ..., am]``."""
    if j == 0:
        return 0.0
    m = joint.ndim - 1
    marg = joint.sum(axis=tuple(range(j + 1, m + 1))) if j < m else joint
    return entropy.shannon_mutual(marg.reshape(marg.shape[0], -1))


def sequential_measure(s: MultipartiteState, chain: Sequence[ProjectiveMeasurement],
                       x: str = "X", q: str = "Q") -> ChainResult:
    """Per-step information gains of successive measurements on the channel."""
    chain = list(chain)
    if not chain:
        raise MeasurementError("chain must contain at least one measurement")
    e = ensemble_from_xq(s, x, q)
    for m in chain:
        if m.dim != e.dim:
            raise LayoutError(f"measurement acts on dimension {m.dim}, channel has {e.dim}")
    cond = np.stack([chain_probabilities(r, chain) for r in e.states])
    cond /= cond.reshape(len(e.probs), -1).sum(axis=1).reshape((-1,) + (1,) * len(chain))
    joint = e.probs.reshape((-1,) + (1,) * len(chain)) * cond
    levels = [_mutual_with_prefix(joint, j) for j in range(len(chain) + 1)]
    return ChainResult(np.array(e.probs), cond, np.diff(levels))


def sequential_state(s: MultipartiteState, chain: Sequence[ProjectiveMeasurement],
                     q: str = "Q", prefix: str = "A") -> MultipartiteState:
    """Materialize ``X Q A1 ... Am`` by coupling one fresh ancilla per step.

    Dimension grows as the product of outcome counts; meant for small
    cross-checks only.
    """
    for j, m in enumerate(chain, start=1):
        s = apply_measurement(s, m, q=q, ancilla=f"{prefix}{j}")
    return s


def post_measurement(e: Ensemble, m: ProjectiveMeasurement) -> MultipartiteState:
    return apply_measurement(assemble_xq(e), m)

