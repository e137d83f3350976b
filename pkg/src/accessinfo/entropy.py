"""Entropy functionals over labelled subsystems, in bits.

Joint, conditional, mutual and conditional-mutual entropies are all built
from :func:`subset_entropy` by inclusion-exclusion.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .core import STATE_TOL, LayoutError, MultipartiteState, StateError, fmt, hermitize, labelset

PROB_TOL = 1e-9


def _xlogx(p: np.ndarray) -> float:
    p = p[p > 0]
    return float(-np.sum(p * np.log2(p)))


def eigenvalues(rho, tol: float = STATE_TOL) -> np.ndarray:
    """Eigenvalues of a state, with roundoff negatives in ``[-tol, 0]`` set to 0."""
    lam = np.linalg.eigvalsh(hermitize(np.asarray(rho, dtype=complex)))
    if lam[0] < -tol:
        raise StateError("positivity", -lam[0])
    return np.clip(lam, 0.0, None)


def von_neumann(rho) -> float:
    """Von Neumann entropy ``-Tr rho log2 rho``."""
    return _xlogx(eigenvalues(rho))


def probability_vector(p) -> np.ndarray:
    p = np.asarray(p, dtype=float).reshape(-1)
    if p.size and p.min() < -1e-12:
        raise StateError("probability", -p.min(), f"negative probability {p.min():.3e}")
    p = np.clip(p, 0.0, None)
    dev = abs(p.sum() - 1.0)
    if dev > PROB_TOL:
        raise StateError("probability", dev, f"probabilities sum to {p.sum()!r}")
    return p


def shannon(p) -> float:
    """Shannon entropy ``-sum p log2 p`` of a probability vector (any shape)."""
    return _xlogx(probability_vector(p))


def shannon_mutual(joint) -> float:
    """Mutual information of a 2-d joint distribution ``joint[x, y]``."""
    joint = np.asarray(joint, dtype=float)
    return shannon(joint.sum(axis=1)) + shannon(joint.sum(axis=0)) - shannon(joint)


def subset_entropy(s: MultipartiteState, subset: str | Iterable[str]) -> float:
    subset = labelset(subset)
    if not subset:
        raise LayoutError("subset must be nonempty")
    return von_neumann(s.reduce(subset).matrix)


def _disjoint(*groups: tuple[str, ...]) -> None:
    seen: set[str] = set()
    for g in groups:
        if seen & set(g):
            raise LayoutError(f"label sets overlap: {groups}")
        seen |= set(g)


def joint_entropy(s, *groups) -> float:
    labels = tuple(lab for g in groups for lab in labelset(g))
    return subset_entropy(s, labels) if labels else 0.0


def conditional(s: MultipartiteState, xs, given=()) -> float:
    """``S(xs|given) = S(xs given) - S(given)``; may be negative."""
    xs, given = labelset(xs), labelset(given)
    _disjoint(xs, given)
    return joint_entropy(s, xs, given) - joint_entropy(s, given)


def mutual(s: MultipartiteState, xs, ys) -> float:
    """Quantum mutual entropy ``S(xs) + S(ys) - S(xs ys)``."""
    xs, ys = labelset(xs), labelset(ys)
    if not xs or not ys:
        raise LayoutError("mutual entropy needs two nonempty label sets")
    _disjoint(xs, ys)
    return subset_entropy(s, xs) + subset_entropy(s, ys) - subset_entropy(s, xs + ys)


def conditional_mutual(s: MultipartiteState, xs, ys, zs=()) -> float:
    """``S(xs:ys|zs) = S(xs:ys zs) - S(xs:zs)``; reduces to :func:`mutual` for empty ``zs``.

    Evaluated as ``S(xs zs) + S(ys zs) - S(zs) - S(xs ys zs)``, which is the
    same quantity with one fewer reduction.
    """
    xs, ys, zs = labelset(xs), labelset(ys), labelset(zs)
    if not xs or not ys:
        raise LayoutError("conditional mutual entropy needs nonempty xs and ys")
    _disjoint(xs, ys, zs)
    if not zs:
        return mutual(s, xs, ys)
    return (subset_entropy(s, xs + zs) + subset_entropy(s, ys + zs)
            - subset_entropy(s, zs) - subset_entropy(s, xs + ys + zs))


def diagonal_distribution(s: MultipartiteState, xs, ys) -> np.ndarray:
    """Joint distribution ``p(x, y) = <x,y|rho|x,y>`` in the computational product basis."""
    xs, ys = labelset(xs), labelset(ys)
    _disjoint(xs, ys)
    r = s.reduce(xs + ys)
    diag = np.real(np.diag(r.matrix)).reshape(r.layout.dims)
    order = [r.labels.index(lab) for lab in xs + ys]
    diag = diag.transpose(order)
    return diag.reshape(r.layout.dim_of(xs), r.layout.dim_of(ys))


def diagonal_mutual_shannon(s: MultipartiteState, xs, ys) -> float:
    """Shannon mutual information of the computational-basis diagonal."""
    return shannon_mutual(diagonal_distribution(s, xs, ys))


@dataclass(frozen=True)
class VennDiagram2:
    """Regions of the two-set entropy diagram, in bits."""

    left: float     # S(X|Y)
    center: float   # S(X:Y)
    right: float    # S(Y|X)
    names: tuple[str, str] = ("X", "Y")

    @property
    def total(self) -> float:
        return self.left + self.center + self.right

    def regions(self) -> dict[str, float]:
        x, y = self.names
        return {f"S({x}|{y})": self.left, f"S({x}:{y})": self.center, f"S({y}|{x})": self.right}

    def to_record(self) -> dict:
        return {"names": list(self.names), "regions": self.regions(), "total": self.total}

    def to_text(self) -> str:
        return _render(self.regions(), self.total, "".join(self.names))


@dataclass(frozen=True)
class VennDiagram3:
    """The seven regions of the three-set entropy diagram, in bits.

    ``center`` is the ternary mutual entropy and may be negative.
    """

    x_only: float   # S(X|YZ)
    y_only: float   # S(Y|XZ)
    z_only: float   # S(Z|XY)
    xy_given_z: float  # S(X:Y|Z)
    xz_given_y: float  # S(X:Z|Y)
    yz_given_x: float  # S(Y:Z|X)
    center: float   # S(X:Y:Z)
    names: tuple[str, str, str] = ("X", "Y", "Z")

    @property
    def total(self) -> float:
        return (self.x_only + self.y_only + self.z_only + self.xy_given_z
                + self.xz_given_y + self.yz_given_x + self.center)

    def pair(self, which: str) -> VennDiagram2:
        """Collapse to the two-set diagram of ``"xy"``, ``"xz"`` or ``"yz"``."""
        x, y, z = self.names
        if which == "xy":
            return VennDiagram2(self.x_only + self.xz_given_y, self.xy_given_z + self.center,
                                self.y_only + self.yz_given_x, (x, y))
        if which == "xz":
            return VennDiagram2(self.x_only + self.xy_given_z, self.xz_given_y + self.center,
                                self.z_only + self.yz_given_x, (x, z))
        if which == "yz":
            return VennDiagram2(self.y_only + self.xy_given_z, self.yz_given_x + self.center,
                                self.z_only + self.xz_given_y, (y, z))
        raise ValueError(f"unknown pair {which!r}")

    def regions(self) -> dict[str, float]:
        x, y, z = self.names
        return {
            f"S({x}|{y}{z})": self.x_only,
            f"S({y}|{x}{z})": self.y_only,
            f"S({z}|{x}{y})": self.z_only,
            f"S({x}:{y}|{z})": self.xy_given_z,
            f"S({x}:{z}|{y})": self.xz_given_y,
            f"S({y}:{z}|{x})": self.yz_given_x,
            f"S({x}:{y}:{z})": self.center,
        }

    def to_record(self) -> dict:
        return {"names": list(self.names), "regions": self.regions(), "total": self.total}

    def to_text(self) -> str:
        return _render(self.regions(), self.total, "".join(self.names))


def _render(regions: dict[str, float], total: float, joint: str) -> str:
    width = max(len(k) for k in regions) + 2
    lines = [f"  {k:<{width}}{fmt(v)} bits" for k, v in regions.items()]
    lines.append(f"  {'S(' + joint + ')':<{width}}{fmt(total)} bits")
    return "\n".join(lines)


def _name(group: tuple[str, ...]) -> str:
    return "".join(group)


def venn2(s: MultipartiteState, x, y) -> VennDiagram2:
    x, y = labelset(x), labelset(y)
    _disjoint(x, y)
    sx, sy, sxy = subset_entropy(s, x), subset_entropy(s, y), subset_entropy(s, x + y)
    return VennDiagram2(sxy - sy, sx + sy - sxy, sxy - sx, (_name(x), _name(y)))


def venn3(s: MultipartiteState, x, y, z) -> VennDiagram3:
    x, y, z = labelset(x), labelset(y), labelset(z)
    _disjoint(x, y, z)
    sx, sy, sz = (subset_entropy(s, g) for g in (x, y, z))
    sxy, sxz, syz = (subset_entropy(s, g) for g in (x + y, x + z, y + z))
    sxyz = subset_entropy(s, x + y + z)
    xy_z = sxz + syz - sz - sxyz
    xz_y = sxy + syz - sy - sxyz
    yz_x = sxy + sxz - sx - sxyz
    center = (sx + sy - sxy) - xy_z
    return VennDiagram3(
        x_only=sxyz - syz,
        y_only=sxyz - sxz,
        z_only=sxyz - sxy,
        xy_given_z=xy_z,
        xz_given_y=xz_y,
        yz_given_x=yz_x,
        center=center,
        names=(_name(x), _name(y), _name(z)),
    )
