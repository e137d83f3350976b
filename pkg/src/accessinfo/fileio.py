"""JSON experiment files: an ensemble plus named measurements and chains.

Complex numbers are ``[re, im]`` pairs (a bare real is also accepted);
matrices are row-major nested lists. Probabilities may be given as numbers
or as fraction strings such as ``"1/3"``.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from .core import Ensemble, StateError, projector, validate_density
from .measurement import Povm, ProjectiveMeasurement

log = logging.getLogger(__name__)

FORMAT_VERSION = 1
KET_NORM_TOL = 1e-6
KET_WARN_TOL = 1e-9


class ParseError(ValueError):
    """Malformed experiment document."""


class UnknownNameError(KeyError):
    """A command or chain referred to a measurement or chain that does not exist."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


Measurement = ProjectiveMeasurement | Povm


@dataclass(frozen=True)
class Experiment:
    ensemble: Ensemble
    measurements: dict[str, Measurement] = field(default_factory=dict)
    chains: dict[str, tuple[str, ...]] = field(default_factory=dict)

    def measurement(self, name: str) -> Measurement:
        try:
            return self.measurements[name]
        except KeyError:
            raise UnknownNameError(
                f"no measurement named {name!r}; available: {sorted(self.measurements)}") from None

    def chain(self, name: str) -> list[ProjectiveMeasurement]:
        try:
            names = self.chains[name]
        except KeyError:
            raise UnknownNameError(f"no chain named {name!r}; available: {sorted(self.chains)}") from None
        out = []
        for n in names:
            m = self.measurement(n)
            if not isinstance(m, ProjectiveMeasurement):
                raise UnknownNameError(f"chain {name!r}: {n!r} is a POVM, chains take projective measurements")
            out.append(m)
        return out


def _scalar(v, where: str) -> complex:
    if isinstance(v, bool):
        raise ParseError(f"{where}: expected a number, got {v!r}")
    if isinstance(v, (int, float)):
        return complex(v)
    if isinstance(v, list) and len(v) == 2 and all(isinstance(c, (int, float)) and not isinstance(c, bool) for c in v):
        return complex(v[0], v[1])
    raise ParseError(f"{where}: expected a number or [re, im] pair, got {v!r}")


def _vector(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{where}: expected a nonempty list of amplitudes")
    return np.array([_scalar(c, f"{where}[{k}]") for k, c in enumerate(v)])


def _matrix(v, where: str) -> np.ndarray:
    if not isinstance(v, list) or not v:
        raise ParseError(f"{where}: expected a nonempty list of rows")
    rows = [_vector(r, f"{where}[{k}]") for k, r in enumerate(v)]
    if any(len(r) != len(rows) for r in rows):
        raise ParseError(f"{where}: matrix must be square")
    return np.array(rows)


def _probability(v, where: str) -> float:
    if isinstance(v, str):
        try:
            return float(Fraction(v))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"{where}: cannot read probability {v!r}") from None
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(f"{where}: probability must be a number, got {v!r}")
    return float(v)


def _normalized_ket(v, where: str) -> np.ndarray:
    k = _vector(v, where)
    norm = np.linalg.norm(k)
    dev = abs(norm - 1.0)
    if dev > KET_NORM_TOL:
        raise StateError("normalization", dev, f"{where}: ket norm {norm:.9f} is not 1")
    if dev > KET_WARN_TOL:
        log.warning("%s: renormalizing ket (norm deviation %.2e)", where, dev)
        k = k / norm
    return k


def _member(obj, k: int) -> tuple[float, np.ndarray]:
    where = f"members[{k}]"
    if not isinstance(obj, dict) or "p" not in obj:
        raise ParseError(f"{where}: expected an object with 'p' and 'ket' or 'rho'")
    p = _probability(obj["p"], f"{where}.p")
    if ("ket" in obj) == ("rho" in obj):
        raise ParseError(f"{where}: give exactly one of 'ket' or 'rho'")
    if "ket" in obj:
        return p, projector(_normalized_ket(obj["ket"], f"{where}.ket"))
    rho = _matrix(obj["rho"], f"{where}.rho")
    try:
        return p, validate_density(rho)
    except StateError as err:
        raise StateError(err.invariant, err.violation, f"{where}.rho: {err}") from None


def _measurement(name: str, obj) -> Measurement:
    where = f"measurements.{name}"
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ParseError(f"{where}: expected exactly one of 'basis', 'projectors', 'povm'")
    (kind, body), = obj.items()
    if not isinstance(body, list) or not body:
        raise ParseError(f"{where}.{kind}: expected a nonempty list")
    if kind == "basis":
        return ProjectiveMeasurement.from_basis(
            [_normalized_ket(v, f"{where}.basis[{k}]") for k, v in enumerate(body)])
    if kind == "projectors":
        return ProjectiveMeasurement(tuple(_matrix(v, f"{where}.projectors[{k}]") for k, v in enumerate(body)))
    if kind == "povm":
        return Povm(tuple(_matrix(v, f"{where}.povm[{k}]") for k, v in enumerate(body)))
    raise ParseError(f"{where}: unknown measurement kind {kind!r}")


def parse_experiment(doc: dict) -> Experiment:
    """Build an :class:`Experiment` from a decoded JSON document.

    Raises :class:`ParseError` for structural problems and
    :class:`~accessinfo.core.StateError` or
    :class:`~accessinfo.measurement.MeasurementError` for invalid physics.
    """
    if not isinstance(doc, dict):
        raise ParseError("top level must be an object")
    if doc.get("version") != FORMAT_VERSION:
        raise ParseError(f"unsupported version {doc.get('version')!r}, expected {FORMAT_VERSION}")
    members = doc.get("members")
    if not isinstance(members, list) or not members:
        raise ParseError("'members' must be a nonempty list")
    parsed = [_member(m, k) for k, m in enumerate(members)]
    dims = {r.shape[0] for _, r in parsed}
    if len(dims) != 1:
        raise ParseError(f"members have different dimensions {sorted(dims)}")
    ensemble = Ensemble([p for p, _ in parsed], tuple(r for _, r in parsed))

    raw_meas = doc.get("measurements", {})
    if not isinstance(raw_meas, dict):
        raise ParseError("'measurements' must be an object")
    measurements = {name: _measurement(name, obj) for name, obj in raw_meas.items()}
    for name, m in measurements.items():
        if m.dim != ensemble.dim:
            raise ParseError(f"measurements.{name}: acts on dimension {m.dim}, states have {ensemble.dim}")

    raw_chains = doc.get("chains", {})
    if not isinstance(raw_chains, dict):
        raise ParseError("'chains' must be an object")
    chains = {}
    for name, seq in raw_chains.items():
        if not isinstance(seq, list) or not seq or not all(isinstance(s, str) for s in seq):
            raise ParseError(f"chains.{name}: expected a nonempty list of measurement names")
        chains[name] = tuple(seq)
    return Experiment(ensemble, measurements, chains)


def load_experiment(path: str | Path) -> Experiment:
    try:
        doc = json.loads(Path(path).read_text())
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    except json.JSONDecodeError as err:
        raise ParseError(f"{path}: invalid JSON ({err})") from None
    return parse_experiment(doc)


def _encode_matrix(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m, dtype=complex)]


def experiment_to_dict(exp: Experiment) -> dict:
    meas = {}
    for name, m in exp.measurements.items():
        if isinstance(m, ProjectiveMeasurement):
            meas[name] = {"projectors": [_encode_matrix(p) for p in m.projectors]}
        else:
            meas[name] = {"povm": [_encode_matrix(e) for e in m.elements]}
    return {
        "version": FORMAT_VERSION,
        "members": [{"p": float(p), "rho": _encode_matrix(r)}
                    for p, r in zip(exp.ensemble.probs, exp.ensemble.states)],
        "measurements": meas,
        "chains": {k: list(v) for k, v in exp.chains.items()},
    }


def dump_experiment(exp: Experiment, path: str | Path) -> None:
    Path(path).write_text(json.dumps(experiment_to_dict(exp), indent=2) + "\n")
