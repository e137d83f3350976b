"""Finite-dimensional operator algebra for preparer/channel/ancilla systems.

Operators are plain complex ``numpy`` arrays. Validated states are returned
read-only so they can be shared freely. Composite states carry a
:class:`Layout`, an ordered list of ``(label, dim)`` factors; every
operation preserves factor order.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

#: Absolute tolerance for the density-operator invariants.
STATE_TOL = 1e-10


class StateError(ValueError):
    """Raised when an operator fails a density-operator invariant.

    Attributes
    ----------
    invariant : str
        One of ``"shape"``, ``"hermiticity"``, ``"trace"``, ``"positivity"``
        or ``"probability"``.
    violation : float
        Size of the violation (absolute).
    """

    def __init__(self, invariant: str, violation: float, message: str = ""):
        self.invariant = invariant
        self.violation = float(violation)
        text = message or f"{invariant} violation of magnitude {self.violation:.3e}"
        super().__init__(text)


class LayoutError(ValueError):
    """Raised for unknown, duplicated or inconsistent subsystem labels."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.flags.writeable = False
    return a


def fmt(v: float, spec: str = " .6f") -> str:
    """Fixed-point text that never shows a negative zero."""
    text = format(v, spec)
    if float(text) == 0 and "-" in text:
        sign = "+" if "+" in spec else " " if spec.startswith(" ") else ""
        text = text.replace("-", sign, 1)
    return text


def hermitize(op: np.ndarray) -> np.ndarray:
    return (op + op.conj().T) / 2


def kron(a: np.ndarray, b: np.ndarray, *more: np.ndarray) -> np.ndarray:
    """Kronecker product of two or more operators."""
    out = np.kron(a, b)
    for m in more:
        out = np.kron(out, m)
    return out


def ket(amplitudes: Sequence[complex]) -> np.ndarray:
    return np.asarray(amplitudes, dtype=complex).reshape(-1)


def projector(vec: Sequence[complex]) -> np.ndarray:
    """Rank-one projector onto ``vec`` (normalized on the fly)."""
    v = ket(vec)
    v = v / np.linalg.norm(v)
    return np.outer(v, v.conj())


def basis_projector(index: int, dim: int) -> np.ndarray:
    p = np.zeros((dim, dim), dtype=complex)
    p[index, index] = 1.0
    return p


def validate_density(op, tol: float = STATE_TOL) -> np.ndarray:
    """Check that ``op`` is a density operator and return a read-only copy.

    Hermiticity is tested entrywise, the trace against one, and positivity
    on the eigenvalues of the Hermitized operator. The first failing
    invariant raises :class:`StateError` carrying the violation magnitude.
    """
    a = np.asarray(op, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
        raise StateError("shape", 0.0, f"operator must be square, got shape {a.shape}")
    herm = float(np.max(np.abs(a - a.conj().T)))
    if herm > tol:
        raise StateError("hermiticity", herm)
    tr = abs(np.trace(a) - 1.0)
    if tr > tol:
        raise StateError("trace", tr)
    lam_min = float(np.linalg.eigvalsh(hermitize(a))[0])
    if lam_min < -tol:
        raise StateError("positivity", -lam_min)
    return _frozen(a)


def is_density(op, tol: float = STATE_TOL) -> bool:
    try:
        validate_density(op, tol)
    except StateError:
        return False
    return True


@dataclass(frozen=True)
class Layout:
    """Ordered tensor factorization ``label_0 (x) label_1 (x) ...``."""

    parts: tuple[tuple[str, int], ...]

    def __post_init__(self):
        parts = tuple((str(lab), int(d)) for lab, d in self.parts)
        object.__setattr__(self, "parts", parts)
        labels = [lab for lab, _ in parts]
        if len(set(labels)) != len(labels):
            raise LayoutError(f"duplicate labels in layout {labels}")
        if any(d < 1 for _, d in parts):
            raise LayoutError(f"dimensions must be positive: {parts}")

    @classmethod
    def of(cls, **dims: int) -> "Layout":
        return cls(tuple(dims.items()))

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(lab for lab, _ in self.parts)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.parts)

    @property
    def dim(self) -> int:
        return int(np.prod(self.dims, dtype=int))

    def index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise LayoutError(f"unknown subsystem label {label!r}; have {self.labels}") from None

    def dim_of(self, labels: Iterable[str]) -> int:
        return int(np.prod([self.parts[self.index(lab)][1] for lab in labels], dtype=int))

    def select(self, labels: Iterable[str]) -> "Layout":
        wanted = set(labels)
        for lab in wanted:
            self.index(lab)
        return Layout(tuple(p for p in self.parts if p[0] in wanted))

    def append(self, label: str, dim: int) -> "Layout":
        return Layout(self.parts + ((label, dim),))


def labelset(labels: str | Iterable[str]) -> tuple[str, ...]:
    """Normalize a label or iterable of labels to a tuple."""
    if isinstance(labels, str):
        return (labels,)
    return tuple(labels)


@dataclass(frozen=True)
class MultipartiteState:
    """Density operator annotated with its subsystem layout."""

    matrix: np.ndarray
    layout: Layout

    def __post_init__(self):
        if not isinstance(self.layout, Layout):
            object.__setattr__(self, "layout", Layout(tuple(self.layout)))
        mat = validate_density(self.matrix)
        if mat.shape[0] != self.layout.dim:
            raise LayoutError(
                f"layout {self.layout.parts} has dimension {self.layout.dim}, "
                f"state has dimension {mat.shape[0]}"
            )
        object.__setattr__(self, "matrix", mat)

    @property
    def labels(self) -> tuple[str, ...]:
        return self.layout.labels

    def reduce(self, keep: str | Iterable[str]) -> "MultipartiteState":
        """Reduced state on ``keep`` (factor order follows the layout)."""
        keep = set(labelset(keep))
        discard = [lab for lab in self.labels if lab not in keep]
        if not discard:
            for lab in keep:
                self.layout.index(lab)
            return self
        return partial_trace(self, discard)


def partial_trace(s: MultipartiteState, discard: str | Iterable[str]) -> MultipartiteState:
    """Trace out the subsystems named in ``discard``.

    Kept subsystems stay in their original order.
    """
    discard = set(labelset(discard))
    if not discard:
        raise LayoutError("nothing to discard")
    for lab in discard:
        s.layout.index(lab)
    keep_idx = [k for k, lab in enumerate(s.labels) if lab not in discard]
    drop_idx = [k for k, lab in enumerate(s.labels) if lab in discard]
    if not keep_idx:
        raise LayoutError("cannot discard every subsystem")
    dims = s.layout.dims
    n = len(dims)
    t = s.matrix.reshape(dims + dims)
    # bring to (keep, drop, keep', drop') and contract drop with drop'
    perm = keep_idx + drop_idx + [n + k for k in keep_idx] + [n + k for k in drop_idx]
    dk = int(np.prod([dims[k] for k in keep_idx]))
    dd = int(np.prod([dims[k] for k in drop_idx]))
    t = t.transpose(perm).reshape(dk, dd, dk, dd)
    reduced = np.einsum("ajbj->ab", t)
    return MultipartiteState(reduced, Layout(tuple(s.layout.parts[k] for k in keep_idx)))


def permute_operator(op: np.ndarray, dims: Sequence[int], order: Sequence[int]) -> np.ndarray:
    """Reorder tensor factors of ``op``; factor ``order[k]`` becomes factor ``k``."""
    dims = list(dims)
    n = len(dims)
    t = np.asarray(op).reshape(dims + dims)
    t = t.transpose(list(order) + [n + k for k in order])
    d = int(np.prod(dims))
    return t.reshape(d, d)


def embed_operator(op: np.ndarray, layout: Layout, targets: str | Iterable[str]) -> np.ndarray:
    """Lift ``op`` acting on ``targets`` (in the given order) to the full layout."""
    targets = labelset(targets)
    tidx = [layout.index(lab) for lab in targets]
    rest = [k for k in range(len(layout.parts)) if k not in tidx]
    dims = layout.dims
    op = np.asarray(op, dtype=complex)
    if op.shape[0] != int(np.prod([dims[k] for k in tidx])):
        raise LayoutError(f"operator of dimension {op.shape[0]} does not fit targets {targets}")
    full = np.kron(op, np.eye(int(np.prod([dims[k] for k in rest])), dtype=complex))
    current = tidx + rest  # factor order of `full`
    back = [current.index(k) for k in range(len(dims))]
    return permute_operator(full, [dims[k] for k in current], back)


def product_state(**factors: np.ndarray) -> MultipartiteState:
    """Tensor product of labelled single-party states, in keyword order."""
    mats = list(factors.values())
    mat = mats[0]
    for m in mats[1:]:
        mat = np.kron(mat, m)
    return MultipartiteState(mat, Layout(tuple((k, np.asarray(v).shape[0]) for k, v in factors.items())))


@dataclass(frozen=True)
class Ensemble:
    """Preparer resource: states ``states[i]`` emitted with probability ``probs[i]``."""

    probs: np.ndarray
    states: tuple = field(default_factory=tuple)

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).reshape(-1)
        states = tuple(validate_density(r) for r in self.states)
        if len(probs) != len(states) or len(probs) == 0:
            raise StateError("probability", 0.0,
                             f"{len(probs)} probabilities for {len(states)} states")
        if np.any(probs < -STATE_TOL):
            raise StateError("probability", -float(probs.min()), "negative probability")
        dev = abs(float(probs.sum()) - 1.0)
        if dev > STATE_TOL:
            raise StateError("probability", dev, f"probabilities sum to {probs.sum()!r}")
        if len({r.shape for r in states}) != 1:
            raise StateError("shape", 0.0, "ensemble states differ in dimension")
        probs = np.clip(probs, 0.0, None)
        probs.flags.writeable = False
        object.__setattr__(self, "probs", probs)
        object.__setattr__(self, "states", states)

    @classmethod
    def from_kets(cls, probs: Sequence[float], kets: Iterable[Sequence[complex]]) -> "Ensemble":
        return cls(probs, tuple(projector(k) for k in kets))

    @property
    def size(self) -> int:
        return len(self.probs)

    @property
    def dim(self) -> int:
        return self.states[0].shape[0]

    def average(self) -> np.ndarray:
        """The channel state ``sum_i p_i rho_i``."""
        return sum(p * r for p, r in zip(self.probs, self.states))

    def mapped(self, f) -> "Ensemble":
        return Ensemble(self.probs, tuple(f(r) for r in self.states))


def assemble_xq(e: Ensemble, x: str = "X", q: str = "Q") -> MultipartiteState:
    """Block-diagonal preparer/channel state ``sum_i p_i |i><i| (x) rho_i``."""
    n, d = e.size, e.dim
    mat = np.zeros((n * d, n * d), dtype=complex)
    for i, (p, r) in enumerate(zip(e.probs, e.states)):
        mat[i * d:(i + 1) * d, i * d:(i + 1) * d] = p * r
    return MultipartiteState(mat, Layout(((x, n), (q, d))))


def ensemble_from_xq(s: MultipartiteState, x: str = "X", q: str = "Q") -> Ensemble:
    """Read ``{p_i, rho_i}`` back from the diagonal X-blocks of a state.

    Members with zero weight get the maximally mixed state; they never
    contribute to any quantity.
    """
    r = s.reduce((x, q))
    if r.labels != (x, q):
        r = MultipartiteState(permute_operator(r.matrix, r.layout.dims, [1, 0]),
                              Layout(tuple(reversed(r.layout.parts))))
    n, d = r.layout.dims
    probs, states = [], []
    for i in range(n):
        block = r.matrix[i * d:(i + 1) * d, i * d:(i + 1) * d]
        p = float(np.real(np.trace(block)))
        probs.append(p)
        states.append(block / p if p > 1e-15 else np.eye(d) / d)
    probs = np.clip(probs, 0.0, None)
    return Ensemble(probs / probs.sum(), tuple(hermitize(st) for st in states))


def random_unitary(dim: int, seed=None) -> np.ndarray:
    """Unitary from the QR factorization of a complex Gaussian matrix.

    The phases of ``R``'s diagonal are absorbed into ``Q`` so the factor is
    unique, which makes the draw Haar distributed.
    """
    rng = np.random.default_rng(seed)
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2)
    qmat, rmat = np.linalg.qr(z)
    d = np.diag(rmat)
    return qmat * (d / np.abs(d))


def random_density(dim: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random state ``G G^dag / Tr(G G^dag)`` with ``G`` a ``dim x rank`` Gaussian."""
    rank = dim if rank is None else rank
    if not 1 <= rank <= dim:
        raise ValueError(f"rank must lie in [1, {dim}], got {rank}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((dim, rank)) + 1j * rng.standard_normal((dim, rank))
    rho = g @ g.conj().T
    rho = hermitize(rho / np.trace(rho).real)
    return validate_density(rho)


def random_ensemble(dim: int, size: int, seed=None, pure: bool = False) -> Ensemble:
    """Ensemble with Dirichlet weights and members of random rank."""
    rng = np.random.default_rng(seed)
    probs = rng.dirichlet(np.ones(size))
    states = []
    for _ in range(size):
        rank = 1 if pure else int(rng.integers(1, dim + 1))
        states.append(random_density(dim, rank, rng))
    return Ensemble(probs, tuple(states))


def random_multipartite(dims: Sequence[int], labels: Sequence[str] | None = None,
                        seed=None, rank: int | None = None) -> MultipartiteState:
    labels = list(labels) if labels is not None else [chr(ord("A") + k) for k in range(len(dims))]
    d = int(np.prod(dims))
    rho = random_density(d, rank, seed)
    return MultipartiteState(rho, Layout(tuple(zip(labels, dims))))
