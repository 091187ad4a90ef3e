"""Canonical pre-/post-selected scenarios and scenario-file handling.

Each preset fixes a pre-selected state, a post-selected state, a set of
named observables, and the analytically expected weak values, so runs
can be checked against ground truth. User scenarios load from a strict
JSON document (schema below).

Document schema (all complex numbers are [re, im] pairs)::

    {
      "name": "optional label",
      "dim": 3,
      "i": [[re, im], ...],                  # dim entries
      "f": [[re, im], ...],                  # dim entries
      "observables": {"P1": [[[re, im], ...], ...], ...},   # dim x dim
      "expected": {"P1": [re, im], ...}      # optional
    }

Unknown fields are rejected; matrices must be Hermitian; states are
normalized on load (with a warning when the input norm deviates from 1
by more than 1e-6).
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .errors import NotHermitian, OrthogonalPostselection, ParseError, ZeroState
from .qcore import Observable, QuantumState

__all__ = [
    "Scenario",
    "build_three_box",
    "build_hardy",
    "build_spin_amplifier",
    "build_imaginary",
    "load_scenario",
    "scenario_to_document",
    "serialize_scenario",
    "PRESETS",
]


@dataclass(frozen=True)
class Scenario:
    """A named pre/post-selection with observables and expected values."""

    name: str
    i: QuantumState
    f: QuantumState
    observables: dict[str, Observable]
    expected: dict[str, complex] = field(default_factory=dict)
    expected_note: str = ""

    def __post_init__(self):
        if self.i.dim != self.f.dim:
            raise ParseError(
                f"pre/post states have dims {self.i.dim} and {self.f.dim}"
            )
        for label, obs in self.observables.items():
            if obs.dim != self.i.dim:
                raise ParseError(
                    f"observable {label!r} has dim {obs.dim}, expected {self.i.dim}"
                )
        for label in self.expected:
            if label not in self.observables:
                raise ParseError(
                    f"expected value for unknown observable {label!r}"
                )

    @property
    def dim(self) -> int:
        return self.i.dim

    def observable(self, label: str) -> Observable:
        try:
            return self.observables[label]
        except KeyError:
            raise KeyError(
                f"scenario {self.name!r} has no observable {label!r}; "
                f"available: {sorted(self.observables)}"
            ) from None


def _projector(dim: int, index: int) -> Observable:
    m = np.zeros((dim, dim), dtype=complex)
    m[index, index] = 1.0
    return Observable(m)


def build_three_box() -> Scenario:
    """Three-box problem: both of two box occupations have conditional
    value 1 while the third is -1, outside the projector's {0, 1} range."""
    i = QuantumState(np.array([1, 1, 1]) / math.sqrt(3))
    f = QuantumState(np.array([1, 1, -1]) / math.sqrt(3))
    observables = {f"P{k + 1}": _projector(3, k) for k in range(3)}
    expected = {"P1": 1 + 0j, "P2": 1 + 0j, "P3": -1 + 0j}
    return Scenario(
        name="three-box",
        i=i,
        f=f,
        observables=observables,
        expected=expected,
        expected_note="hand evaluation of <f|P_k|i>/<f|i> with the box states",
    )


def build_hardy() -> Scenario:
    """Two-particle occupation scenario with joint conditional values
    (0, 1, 1, -1): each particle is in the overlapping arm, yet never
    both, and the non-overlapping joint occupation is -1."""
    # basis per particle: index 0 = overlapping arm (O), 1 = outside (NO);
    # particle order: electron x positron
    i = np.zeros(4, dtype=complex)
    i[0 * 2 + 1] = 1  # |O, NO>
    i[1 * 2 + 0] = 1  # |NO, O>
    i[1 * 2 + 1] = 1  # |NO, NO>
    minus = np.array([1, -1]) / math.sqrt(2)
    f = np.kron(minus, minus)

    occ_o = np.diag([1.0, 0.0]).astype(complex)
    occ_no = np.diag([0.0, 1.0]).astype(complex)
    eye = np.eye(2, dtype=complex)
    singles = {
        "N_Oe": np.kron(occ_o, eye),
        "N_NOe": np.kron(occ_no, eye),
        "N_Op": np.kron(eye, occ_o),
        "N_NOp": np.kron(eye, occ_no),
    }
    joints = {
        "N_Oe_N_Op": np.kron(occ_o, occ_o),
        "N_Oe_N_NOp": np.kron(occ_o, occ_no),
        "N_NOe_N_Op": np.kron(occ_no, occ_o),
        "N_NOe_N_NOp": np.kron(occ_no, occ_no),
    }
    observables = {k: Observable(m) for k, m in {**singles, **joints}.items()}
    expected = {
        "N_Oe": 1 + 0j,
        "N_NOe": 0 + 0j,
        "N_Op": 1 + 0j,
        "N_NOp": 0 + 0j,
        "N_Oe_N_Op": 0 + 0j,
        "N_Oe_N_NOp": 1 + 0j,
        "N_NOe_N_Op": 1 + 0j,
        "N_NOe_N_NOp": -1 + 0j,
    }
    return Scenario(
        name="hardy",
        i=QuantumState(i),
        f=QuantumState(f),
        observables=observables,
        expected=expected,
        expected_note="hand evaluation of the occupation projectors between "
        "(|O,NO> + |NO,O> + |NO,NO>)/sqrt(3) and |O-NO, O-NO>",
    )


def build_spin_amplifier(alpha: float) -> Scenario:
    """Qubit scenario whose conditional spin value (1 - tan a)/(1 + tan a)
    grows without bound as the post-selection approaches orthogonality
    at a = 3 pi / 4 (mod pi)."""
    i = QuantumState(np.array([1, 1]) / math.sqrt(2))
    fa = np.array([math.cos(alpha), math.sin(alpha)])
    denom = math.cos(alpha) + math.sin(alpha)
    if denom**2 / 2.0 < 1e-12:
        raise OrthogonalPostselection(
            f"alpha = {alpha} post-selects orthogonally to the pre-selection"
        )
    expected = (math.cos(alpha) - math.sin(alpha)) / denom
    return Scenario(
        name="spin",
        i=i,
        f=QuantumState(fa),
        observables={"sigma_z": Observable(np.diag([1.0, -1.0]).astype(complex))},
        expected={"sigma_z": complex(expected)},
        expected_note=f"(1 - tan a)/(1 + tan a) at a = {alpha!r}",
    )


def build_imaginary() -> Scenario:
    """Qubit scenario with a purely imaginary conditional spin value: the
    pointer shift appears in momentum, not position."""
    i = QuantumState(np.array([1, 1]) / math.sqrt(2))
    f = QuantumState(np.array([1, 1j]) / math.sqrt(2))
    return Scenario(
        name="imaginary",
        i=i,
        f=f,
        observables={"sigma_z": Observable(np.diag([1.0, -1.0]).astype(complex))},
        expected={"sigma_z": 1j},
        expected_note="(1+i)/(1-i) = i by hand",
    )


#: Preset registry used by the CLI; spin takes its angle as an argument.
PRESETS = {
    "three-box": build_three_box,
    "hardy": build_hardy,
    "spin": build_spin_amplifier,
    "imaginary": build_imaginary,
}


# --- scenario document handling -------------------------------------------

_REQUIRED_FIELDS = {"dim", "i", "f", "observables"}
_ALLOWED_FIELDS = _REQUIRED_FIELDS | {"name", "expected"}


def _parse_complex(entry, where: str) -> complex:
    if (
        not isinstance(entry, (list, tuple))
        or len(entry) != 2
        or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in entry)
    ):
        raise ParseError(f"{where} must be a [re, im] pair, got {entry!r}")
    return complex(entry[0], entry[1])


def _parse_state(raw, dim: int, label: str) -> QuantumState:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError(f"state {label!r} must be a list of {dim} [re, im] pairs")
    amps = np.array(
        [_parse_complex(v, f"{label}[{k}]") for k, v in enumerate(raw)]
    )
    norm = float(np.linalg.norm(amps))
    if norm < 1e-15:
        raise ZeroState(f"state {label!r} has zero norm")
    if abs(norm - 1.0) > 1e-6:
        warnings.warn(
            f"state {label!r} has norm {norm:.9g}; normalizing", stacklevel=3
        )
    return QuantumState(amps)


def _parse_matrix(raw, dim: int, label: str) -> Observable:
    if not isinstance(raw, list) or len(raw) != dim:
        raise ParseError(f"observable {label!r} must be a {dim}x{dim} matrix")
    rows = []
    for r, row in enumerate(raw):
        if not isinstance(row, list) or len(row) != dim:
            raise ParseError(f"observable {label!r} row {r} must have {dim} entries")
        rows.append([_parse_complex(v, f"{label}[{r}][{k}]") for k, v in enumerate(row)])
    m = np.array(rows)
    dev = np.abs(m - m.conj().T)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    if float(np.max(dev)) > 1e-12 * scale:
        r, k = np.unravel_index(int(np.argmax(dev)), dev.shape)
        raise NotHermitian(
            f"observable {label!r} is not Hermitian at entry ({r}, {k}): "
            f"{m[r, k]!r} vs conjugate-transpose {np.conj(m[k, r])!r}"
        )
    return Observable(m)


def load_scenario(document) -> Scenario:
    """Build a Scenario from a JSON document (text or parsed dict).

    Parsing is strict: unknown fields, wrong shapes, or malformed
    complex pairs raise ParseError; non-Hermitian observables raise
    NotHermitian (with the offending entry); zero states raise ZeroState.
    """
    if isinstance(document, (str, bytes)):
        try:
            doc = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ParseError(f"scenario document is not valid JSON: {exc}") from exc
    else:
        doc = document
    if not isinstance(doc, dict):
        raise ParseError(f"scenario document must be an object, got {type(doc).__name__}")

    unknown = set(doc) - _ALLOWED_FIELDS
    if unknown:
        raise ParseError(f"unknown scenario fields: {sorted(unknown)}")
    missing = _REQUIRED_FIELDS - set(doc)
    if missing:
        raise ParseError(f"missing scenario fields: {sorted(missing)}")

    dim = doc["dim"]
    if not isinstance(dim, int) or isinstance(dim, bool) or dim < 1:
        raise ParseError(f"dim must be a positive integer, got {dim!r}")

    i = _parse_state(doc["i"], dim, "i")
    f = _parse_state(doc["f"], dim, "f")

    if not isinstance(doc["observables"], dict) or not doc["observables"]:
        raise ParseError("observables must be a non-empty name -> matrix map")
    observables = {
        str(label): _parse_matrix(raw, dim, str(label))
        for label, raw in doc["observables"].items()
    }

    expected = {}
    if "expected" in doc:
        if not isinstance(doc["expected"], dict):
            raise ParseError("expected must be a name -> [re, im] map")
        for label, raw in doc["expected"].items():
            if label not in observables:
                raise ParseError(f"expected value for unknown observable {label!r}")
            expected[str(label)] = _parse_complex(raw, f"expected[{label}]")

    return Scenario(
        name=str(doc.get("name", "custom")),
        i=i,
        f=f,
        observables=observables,
        expected=expected,
        expected_note="loaded from document",
    )


def _pair(z: complex) -> list[float]:
    return [float(z.real), float(z.imag)]


def scenario_to_document(s: Scenario) -> dict:
    """JSON-compatible dict for a scenario (inverse of load_scenario)."""
    return {
        "name": s.name,
        "dim": s.dim,
        "i": [_pair(z) for z in s.i.amplitudes],
        "f": [_pair(z) for z in s.f.amplitudes],
        "observables": {
            label: [[_pair(z) for z in row] for row in obs.matrix]
            for label, obs in s.observables.items()
        },
        "expected": {label: _pair(z) for label, z in s.expected.items()},
    }


def serialize_scenario(s: Scenario) -> str:
    """Deterministic JSON text for a scenario; round-trips through
    load_scenario with amplitudes preserved to full precision."""
    return json.dumps(scenario_to_document(s), indent=2)
