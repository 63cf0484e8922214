"""Drive-gradient imaging: waveguide field profile, tabulated field maps,
resolution budgets, and position reconstruction from a measured Rabi
frequency.

The position of an emitter inside a waveguide gap maps one-to-one onto its
local Rabi frequency on either monotone half of the gap.  The attainable
position resolution is the gap divided by the number of coherent Rabi
oscillations, delta_x = gap / N with N = base_rabi * t1_rho (cyclic MHz
times microseconds, so no 2*pi appears).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .traces import format_float

__all__ = [
    "WaveguideGeometry",
    "FieldMap",
    "LocalizationResult",
    "ResolutionBudget",
    "field_profile",
    "rabi_at",
    "oscillation_count",
    "resolution_from_count",
    "t1_limited_resolution",
    "resolution_budget",
    "position_from_rabi",
    "two_axis_localize",
]

FIELDMAP_HEADER = "# rabibeat-fieldmap v1"


@dataclass(frozen=True)
class WaveguideGeometry:
    """Tapered-strip waveguide gap hosting the emitters.

    ``gap`` is the distance between the conductor edges in micrometers;
    positions run from 0 at one edge to ``gap`` at the other.
    ``center_width`` (um) records the strip width at the taper for
    provenance.  ``drive_scale`` is the Rabi frequency in MHz an emitter
    would see at the gap midpoint.  ``edge_cutoff`` (um) softens the
    inverse-square-root divergence at the conductor edges on the scale of
    the conductor thickness.
    """

    gap: float
    center_width: float = 10.0
    drive_scale: float = 22.2
    edge_cutoff: float = 0.5

    def __post_init__(self):
        for name in ("gap", "center_width", "drive_scale", "edge_cutoff"):
            if not getattr(self, name) > 0:
                raise ValueError(
                    f"{name} must be positive, got {getattr(self, name)}"
                )


def field_profile(geometry: WaveguideGeometry, x) -> np.ndarray:
    """Relative transverse drive amplitude across the gap, midpoint = 1.

    Between two coplanar conductor edges the microwave field follows
    1/sqrt(u (1-u)) with u = x/gap; a finite ``edge_cutoff`` c regularizes
    the edges:

        B(x) = (gap/2 + c) / sqrt((x + c) (gap - x + c))

    Mirror symmetric about the midpoint, where it attains its minimum.
    Positions outside [0, gap] are not modeled and raise.
    """
    x = np.asarray(x, dtype=float)
    if np.any((x < 0) | (x > geometry.gap)):
        raise ValueError(
            f"position outside the modeled gap [0, {geometry.gap}] um"
        )
    c = geometry.edge_cutoff
    prod = (x + c) * (geometry.gap - x + c)
    return (geometry.gap / 2.0 + c) / np.sqrt(prod)


def rabi_at(geometry: WaveguideGeometry, x) -> np.ndarray:
    """Rabi frequency in MHz at position ``x`` (um) inside the gap."""
    return geometry.drive_scale * field_profile(geometry, x)


@dataclass
class FieldMap:
    """Tabulated position -> Rabi frequency map on one monotone branch.

    ``positions`` in micrometers, strictly increasing; ``rabi`` in MHz,
    strictly monotone and positive over the tabulated range.  ``meta``
    names the generating model, or ``"measured"`` for experimental maps.
    """

    positions: np.ndarray
    rabi: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.positions = np.asarray(self.positions, dtype=float)
        self.rabi = np.asarray(self.rabi, dtype=float)
        if self.positions.ndim != 1 or self.positions.size < 2:
            raise ValueError("a field map needs at least two samples")
        if self.positions.shape != self.rabi.shape:
            raise ValueError("positions and rabi must have equal length")
        if not np.all(np.diff(self.positions) > 0):
            raise ValueError("positions must be strictly increasing")
        if np.any(self.rabi <= 0):
            raise ValueError("rabi values must be positive")
        steps = np.diff(self.rabi)
        if not (np.all(steps > 0) or np.all(steps < 0)):
            raise ValueError(
                "rabi values must be strictly monotone over the map"
            )

    @property
    def increasing(self) -> bool:
        return bool(self.rabi[-1] > self.rabi[0])

    @property
    def monotonic_region(self):
        return float(self.positions[0]), float(self.positions[-1])

    @classmethod
    def from_model(
        cls,
        geometry: WaveguideGeometry,
        n_points: int = 501,
        branch: str = "left",
    ) -> "FieldMap":
        """Tabulate the waveguide model on one half of the gap.

        ``branch="left"`` covers [0, gap/2] (Rabi decreasing), ``"right"``
        covers [gap/2, gap] (increasing).
        """
        if branch not in ("left", "right"):
            raise ValueError(f"branch must be 'left' or 'right', got {branch!r}")
        if n_points < 2:
            raise ValueError("n_points must be at least 2")
        half = geometry.gap / 2.0
        if branch == "left":
            pos = np.linspace(0.0, half, n_points)
        else:
            pos = np.linspace(half, geometry.gap, n_points)
        return cls(
            pos,
            rabi_at(geometry, pos),
            {
                "model": "edge-cutoff waveguide profile",
                "branch": branch,
                "gap_um": geometry.gap,
                "edge_cutoff_um": geometry.edge_cutoff,
                "drive_scale_MHz": geometry.drive_scale,
            },
        )

    def to_csv(self, path) -> Path:
        path = Path(path)
        source = self.meta.get("model", "measured")
        lines = [FIELDMAP_HEADER, f"# model: {source}", "position_um,rabi_MHz"]
        for p, r in zip(self.positions, self.rabi):
            lines.append(f"{format_float(p)},{format_float(r)}")
        path.write_text("\n".join(lines) + "\n", encoding="ascii")
        return path

    @classmethod
    def from_csv(cls, path) -> "FieldMap":
        path = Path(path)
        raw = path.read_text(encoding="ascii").splitlines()
        if not raw or raw[0].strip() != FIELDMAP_HEADER:
            raise ValueError(f"{path}:1: missing header {FIELDMAP_HEADER!r}")
        meta = {}
        pos, rabi = [], []
        for lineno, line in enumerate(raw[1:], start=2):
            text = line.strip()
            if text.startswith("# model:"):
                meta["model"] = text.split(":", 1)[1].strip()
                continue
            if not text or text.startswith("#") or text == "position_um,rabi_MHz":
                continue
            parts = text.split(",")
            if len(parts) != 2:
                raise ValueError(
                    f"{path}:{lineno}: expected two comma-separated fields"
                )
            try:
                pos.append(float(parts[0]))
                rabi.append(float(parts[1]))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: {exc}") from None
        return cls(np.array(pos), np.array(rabi), meta)


def oscillation_count(base_rabi: float, t1_rho: float) -> float:
    """Coherent oscillation count N = base_rabi * t1_rho.

    With the base Rabi frequency in cyclic MHz and the decay time in
    microseconds the product is dimensionless directly.
    """
    if not base_rabi > 0:
        raise ValueError(f"base_rabi must be positive, got {base_rabi}")
    if not t1_rho > 0:
        raise ValueError(f"t1_rho must be positive, got {t1_rho}")
    return base_rabi * t1_rho


def resolution_from_count(gap_um: float, n_oscillations: float) -> float:
    """Position resolution gap / N, returned in nanometers."""
    if not gap_um > 0:
        raise ValueError(f"gap_um must be positive, got {gap_um}")
    if not n_oscillations > 0:
        raise ValueError(
            f"n_oscillations must be positive, got {n_oscillations}"
        )
    return 1000.0 * gap_um / n_oscillations


def t1_limited_resolution(gap_um: float, t1_rho: float, base_rabi: float) -> float:
    """Resolution gap / (t1_rho * base_rabi) in nanometers.

    Identical to ``resolution_from_count(gap_um, oscillation_count(...))``.
    """
    return 1000.0 * gap_um / (oscillation_count(base_rabi, t1_rho))


@dataclass(frozen=True)
class ResolutionBudget:
    """Everything that limits localization for one operating point."""

    t1_rho: float
    base_rabi: float
    n_oscillations: float
    delta_x_nm: float
    stability_required: float


def resolution_budget(
    gap_um: float, base_rabi: float, t1_rho: float
) -> ResolutionBudget:
    """Resolution budget at one operating point.

    ``stability_required`` is the fractional drive-power stability 1/N the
    acquisition must hold for the beat picture to stay coherent.
    """
    n = oscillation_count(base_rabi, t1_rho)
    return ResolutionBudget(
        t1_rho=t1_rho,
        base_rabi=base_rabi,
        n_oscillations=n,
        delta_x_nm=resolution_from_count(gap_um, n),
        stability_required=1.0 / n,
    )


@dataclass(frozen=True)
class LocalizationResult:
    position: float
    uncertainty: float | None


def position_from_rabi(
    measured: float,
    fmap: FieldMap,
    resolvable_mhz: float | None = None,
) -> LocalizationResult:
    """Invert a measured Rabi frequency to a position on the map branch.

    Linear inverse interpolation on the tabulated monotone branch.  When
    ``resolvable_mhz`` (the smallest resolvable frequency difference, e.g.
    from :func:`rabibeat.analysis.resolution_estimate`) is given, the
    position uncertainty is resolvable / |d rabi / dx| at the recovered
    position.  A measured value outside the map range raises.
    """
    lo = float(min(fmap.rabi[0], fmap.rabi[-1]))
    hi = float(max(fmap.rabi[0], fmap.rabi[-1]))
    if not lo <= measured <= hi:
        raise ValueError(
            f"measured Rabi frequency {measured} MHz outside the map range "
            f"[{lo}, {hi}] MHz"
        )
    if fmap.increasing:
        rabi_asc, pos_asc = fmap.rabi, fmap.positions
    else:
        rabi_asc, pos_asc = fmap.rabi[::-1], fmap.positions[::-1]
    x = float(np.interp(measured, rabi_asc, pos_asc))
    uncertainty = None
    if resolvable_mhz is not None:
        if resolvable_mhz < 0:
            raise ValueError("resolvable_mhz must be non-negative")
        grad = np.gradient(fmap.rabi, fmap.positions)
        local = float(np.interp(x, fmap.positions, np.abs(grad)))
        if local == 0:
            raise ValueError("field map gradient vanishes at the recovered position")
        uncertainty = resolvable_mhz / local
    return LocalizationResult(x, uncertainty)


def two_axis_localize(
    measured_x: float,
    map_x: FieldMap,
    measured_y: float,
    map_y: FieldMap,
    resolvable_x: float | None = None,
    resolvable_y: float | None = None,
):
    """Componentwise two-axis localization from two orthogonal drive maps.

    Returns a pair of LocalizationResult.  Errors identify the failing
    axis by name.
    """
    try:
        rx = position_from_rabi(measured_x, map_x, resolvable_x)
    except ValueError as exc:
        raise ValueError(f"x axis: {exc}") from None
    try:
        ry = position_from_rabi(measured_y, map_y, resolvable_y)
    except ValueError as exc:
        raise ValueError(f"y axis: {exc}") from None
    return rx, ry
