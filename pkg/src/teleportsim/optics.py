"""Jones-calculus elements and the apparatus mode layout.

Polarization blocks are 2x2 matrices in the ordered basis ``(v, h)``. Linear
polarization angles are measured from horizontal, so ``linear_pol(theta)`` is
``sin(theta)|v> + cos(theta)|h>``.

Mode layout (photon, path):

* photon 1 leaves the source in path ``s``; the calcite encoder splits it
  into ``a``/``b``; Alice's beamsplitter maps ``a``/``b`` onto ports
  ``A+``/``A-``.
* photon 2 likewise goes ``s`` -> ``a``/``b``; Bob's polarizing
  beamsplitter merges ``a``/``b`` into the output path ``B`` (the unused
  port is ``B'``).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

from .qstate import Mode, PureState, UnitaryOp, apply

POLS = ("v", "h")
SOURCE = "s"

_Z = np.diag([1.0, -1.0])
_ROT90 = np.array([[0.0, -1.0], [1.0, 0.0]])  # -iY: v -> h, h -> -v


def linear_pol(theta: float) -> np.ndarray:
    """Jones vector ``(v, h)`` of linear polarization at ``theta`` degrees from horizontal."""
    t = np.radians(theta)
    return np.array([np.sin(t), np.cos(t)], dtype=complex)


def jones_rotator(theta: float) -> np.ndarray:
    """Real rotation taking ``linear_pol(phi)`` to ``linear_pol(phi + theta)``."""
    t = np.radians(theta)
    c, s = np.cos(t), np.sin(t)
    return np.array([[c, s], [-s, c]], dtype=complex)


def jones_qwp(gamma: float) -> np.ndarray:
    """Quarter-wave plate at ``gamma`` degrees from vertical.

    Phase convention: ``jones_qwp(g) @ [1, 0]`` equals
    ``[(1 + i cos 2g), sin 2g] / sqrt(2)`` exactly, and
    ``jones_qwp(g + 90)`` inverts ``jones_qwp(g)`` up to a global phase.
    """
    g = np.radians(2.0 * gamma)
    return (np.eye(2) + 1j * np.cos(g) * _Z + np.sin(g) * _ROT90) / np.sqrt(2.0)


def jones_hwp(gamma: float) -> np.ndarray:
    """Half-wave plate: two stacked quarter-wave plates at the same angle."""
    q = jones_qwp(gamma)
    return q @ q


def jones_polarizer(axis: Literal["v", "h"]) -> np.ndarray:
    if axis not in POLS:
        raise ValueError(f"polarizer axis must be 'v' or 'h', got {axis!r}")
    return np.diag([1.0, 0.0] if axis == "v" else [0.0, 1.0]).astype(complex)


def modes(photon: int, path: str) -> tuple[Mode, Mode]:
    return Mode(photon, path, "v"), Mode(photon, path, "h")


def on_path(jones: np.ndarray, photon: int, path: str, unitary: bool = True) -> UnitaryOp:
    """Lift a 2x2 polarization matrix onto one path of one photon."""
    return UnitaryOp(jones, modes(photon, path), unitary=unitary)


def rotator(theta: float, photon: int = 1, path: str = "b") -> UnitaryOp:
    return on_path(jones_rotator(theta), photon, path)


def quarter_wave(gamma: float, photon: int = 1, path: str = "a") -> UnitaryOp:
    return on_path(jones_qwp(gamma), photon, path)


def half_wave(gamma: float, photon: int = 1, path: str = "a") -> UnitaryOp:
    return on_path(jones_hwp(gamma), photon, path)


def phase_delay(phi: float, photon: int = 1, path: str = "b") -> UnitaryOp:
    """Multiply both polarization amplitudes on ``path`` by ``exp(i phi)``; ``phi`` in radians."""
    return on_path(np.exp(1j * phi) * np.eye(2), photon, path)


def polarizer(axis: Literal["v", "h"], photon: int = 1, path: str = "A+") -> UnitaryOp:
    """Projective (non-unitary) element transmitting only ``axis`` on ``path``."""
    return on_path(jones_polarizer(axis), photon, path, unitary=False)


def transmit(state: PureState, element: UnitaryOp) -> tuple[PureState, float]:
    """Pass ``state`` through a polarizer; returns the unnormalized state and survival probability."""
    out = apply(element, state)
    return out, out.norm ** 2 / state.norm ** 2


def calcite_encode(photon: int) -> UnitaryOp:
    """Map polarization in the source path onto the a/b path pair.

    Photon 1: ``v -> (a, v)``, ``h -> (b, v)``; photon 2: ``h -> (a, h)``,
    ``v -> (b, h)``. The outgoing polarization is fixed per photon, so the
    polarization factor separates from the path entanglement.
    """
    sv, sh = Mode(photon, SOURCE, "v"), Mode(photon, SOURCE, "h")
    if photon == 1:
        codomain = (Mode(1, "a", "v"), Mode(1, "b", "v"))
    elif photon == 2:
        codomain = (Mode(2, "b", "h"), Mode(2, "a", "h"))
    else:
        raise ValueError("only photons 1 and 2 exist in this apparatus")
    return UnitaryOp(np.eye(2), (sv, sh), codomain)


class PreconditionError(ValueError):
    pass


def apply_calcite(state: PureState, photon: int) -> PureState:
    slot = state.photons.index(photon)
    if any(b[slot].path != SOURCE for b in state.basis):
        raise PreconditionError(f"photon {photon} is already path-split")
    return apply(calcite_encode(photon), state)


def beamsplitter5050(
    photon: int = 1, paths: tuple[str, str] = ("a", "b"), ports: tuple[str, str] = ("A+", "A-")
) -> UnitaryOp:
    """Symmetric real 50:50 beamsplitter acting identically on v and h.

    ``(|a> + |b>)/sqrt2 -> |A+>`` and ``(|a> - |b>)/sqrt2 -> |A->``.
    """
    a, b = paths
    p, m = ports
    domain = modes(photon, a) + modes(photon, b)
    codomain = modes(photon, p) + modes(photon, m)
    r = 1.0 / np.sqrt(2.0)
    mat = r * np.array(
        [
            [1, 0, 1, 0],
            [0, 1, 0, 1],
            [1, 0, -1, 0],
            [0, 1, 0, -1],
        ],
        dtype=complex,
    )
    return UnitaryOp(mat, domain, codomain)


def polarizing_bs(photon: int = 2, out: str = "B", dump: str = "B'") -> UnitaryOp:
    """PBS transmitting v and reflecting h, merging paths a and b.

    ``(a, h)`` reflects and ``(b, v)`` transmits into ``out``; the other two
    inputs leave through ``dump``.
    """
    av, ah = modes(photon, "a")
    bv, bh = modes(photon, "b")
    ov, oh = modes(photon, out)
    dv, dh = modes(photon, dump)
    pairs = {ah: oh, bv: ov, av: dv, bh: dh}
    domain = tuple(pairs)
    codomain = tuple(pairs.values())
    return UnitaryOp(np.eye(4), domain, codomain)


def bob_combiner(photon: int = 2) -> UnitaryOp:
    """The 90 degree rotation on path b followed by the PBS."""
    return rotator(90.0, photon, "b").then(polarizing_bs(photon))


ELEMENT_KINDS = ("calcite-encoder", "qwp", "rotator", "hwp", "bs5050", "pbs", "polarizer", "phase-delay")


@dataclass(frozen=True)
class ElementSpec:
    """Declarative description of one optical element.

    ``angle`` is in degrees for every kind except ``phase-delay`` where it is
    the delay in degrees of phase; for ``polarizer`` it selects the axis
    (0 = h, 90 = v).
    """

    kind: str
    angle: float = 0.0
    photon: int = 1
    path: str = "b"

    def __post_init__(self):
        if self.kind not in ELEMENT_KINDS:
            raise ValueError(f"unknown element kind {self.kind!r}")
        if not np.isfinite(self.angle):
            raise ValueError("element angle must be finite")
        if self.kind == "polarizer" and self.angle % 180 not in (0.0, 90.0):
            raise ValueError("polarizer angle must select v (90) or h (0)")

    def build(self) -> UnitaryOp:
        k = self.kind
        if k == "calcite-encoder":
            return calcite_encode(self.photon)
        if k == "qwp":
            return quarter_wave(self.angle, self.photon, self.path)
        if k == "hwp":
            return half_wave(self.angle, self.photon, self.path)
        if k == "rotator":
            return rotator(self.angle, self.photon, self.path)
        if k == "bs5050":
            return beamsplitter5050(self.photon)
        if k == "pbs":
            return polarizing_bs(self.photon)
        if k == "polarizer":
            return polarizer("v" if self.angle % 180 == 90.0 else "h", self.photon, self.path)
        return phase_delay(np.radians(self.angle), self.photon, self.path)
