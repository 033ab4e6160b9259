"""Binary PPM frames for the phase, average-frequency and instantaneous-frequency
representations of a lattice state."""
from __future__ import annotations

import enum
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .lattice import TWO_PI

POSITIVE_VORTEX = (0, 255, 0)
NEGATIVE_VORTEX = (255, 165, 0)


class Representation(str, enum.Enum):
    PHASE = "phase"
    AVG_FREQ = "avgfreq"
    INST_FREQ = "instfreq"


@dataclass(frozen=True)
class ColorMapConfig:
    """Log-scale colouring of signed fields.

    ``v_max=None`` resolves to the 99th percentile of ``|field|``; if that is
    not above ``v_floor`` the ceiling becomes ``10 * v_floor``.
    """
    v_floor: float = 1e-4
    v_max: float | None = None

    def __post_init__(self):
        if not self.v_floor > 0:
            raise ValueError("v_floor must be > 0")
        if self.v_max is not None and not self.v_max > self.v_floor:
            raise ValueError("v_max must exceed v_floor")

    def resolve(self, values: np.ndarray) -> tuple[float, float]:
        if self.v_max is not None:
            return self.v_floor, self.v_max
        top = float(np.percentile(np.abs(values), 99))
        return self.v_floor, top if top > self.v_floor else 10.0 * self.v_floor


def hue_to_rgb(hue: np.ndarray) -> np.ndarray:
    """HSV -> RGB with S = V = 1 for hue in [0, 1); returns floats in [0, 1]."""
    h6 = np.asarray(hue, dtype=np.float64) * 6.0
    sector = np.floor(h6).astype(int) % 6
    f = h6 - np.floor(h6)
    one, zero = np.ones_like(f), np.zeros_like(f)
    q, t = 1.0 - f, f
    table = [
        (one, t, zero),
        (q, one, zero),
        (zero, one, t),
        (zero, q, one),
        (t, zero, one),
        (one, zero, q),
    ]
    rgb = np.zeros(f.shape + (3,))
    for s, (r, g, b) in enumerate(table):
        m = sector == s
        rgb[m, 0], rgb[m, 1], rgb[m, 2] = r[m], g[m], b[m]
    return rgb


def phase_colors(theta: np.ndarray) -> np.ndarray:
    hue = np.mod(theta, TWO_PI) / TWO_PI
    hue = np.where(hue >= 1.0, 0.0, hue)
    return np.rint(255.0 * hue_to_rgb(hue)).astype(np.uint8)


def signed_colors(values: np.ndarray, v_floor: float, v_max: float) -> np.ndarray:
    """White below the floor; blue for positive, red for negative, darker
    with log-magnitude up to ``v_max``."""
    v = np.asarray(values, dtype=np.float64)
    mag = np.abs(v)
    with np.errstate(divide="ignore"):
        a = np.log(mag / v_floor) / np.log(v_max / v_floor)
    a = np.clip(np.nan_to_num(a, nan=0.0, neginf=0.0), 0.0, 1.0)
    fade = np.rint(255.0 * (1.0 - a)).astype(np.uint8)
    rgb = np.full(v.shape + (3,), 255, dtype=np.uint8)
    pos = (mag > v_floor) & (v > 0)
    neg = (mag > v_floor) & (v < 0)
    rgb[pos, 0] = fade[pos]
    rgb[pos, 1] = fade[pos]
    rgb[neg, 1] = fade[neg]
    rgb[neg, 2] = fade[neg]
    return rgb


def overlay_vortices(rgb: np.ndarray, vortices) -> np.ndarray:
    """Mark each vortex on the top-left pixel of its plaquette."""
    out = rgb.copy()
    for v in vortices:
        out[v.row, v.col] = POSITIVE_VORTEX if v.charge > 0 else NEGATIVE_VORTEX
    return out


def write_ppm(path, rgb: np.ndarray) -> None:
    """Write a binary P6 image (maxval 255, row 0 at the top) atomically."""
    rgb = np.ascontiguousarray(rgb, dtype=np.uint8)
    if rgb.ndim != 3 or rgb.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) array, got {rgb.shape}")
    path = Path(path)
    header = f"P6\n{rgb.shape[1]} {rgb.shape[0]}\n255\n".encode("ascii")
    atomic_write_bytes(path, header + rgb.tobytes())


def read_ppm(path) -> np.ndarray:
    data = Path(path).read_bytes()
    parts = data.split(maxsplit=4)
    if parts[0] != b"P6" or parts[3] != b"255":
        raise ValueError(f"{path}: not a maxval-255 P6 file")
    w, h = int(parts[1]), int(parts[2])
    return np.frombuffer(parts[4][: w * h * 3], dtype=np.uint8).reshape(h, w, 3)


def atomic_write_bytes(path, payload: bytes) -> None:
    path = Path(path)
    tmp = None
    try:
        fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except OSError as exc:
        if tmp is not None and os.path.exists(tmp):
            os.unlink(tmp)
        raise OSError(f"could not write {path}: {exc}") from exc


def field_values(field) -> np.ndarray:
    for attr in ("theta", "omega_avg", "thetadot"):
        if hasattr(field, attr):
            return getattr(field, attr)
    return np.asarray(field, dtype=np.float64)


def emit_field_image(field, representation, cmap: ColorMapConfig, path, vortices=()) -> None:
    """Render one representation of a lattice field to ``path`` as PPM."""
    rep = Representation(representation)
    values = field_values(field)
    if rep is Representation.PHASE:
        rgb = phase_colors(values)
    else:
        rgb = signed_colors(values, *cmap.resolve(values))
    write_ppm(path, overlay_vortices(rgb, vortices))

