"""Median gridding of scattered probe samples and extraction of profiles."""

from __future__ import annotations

import csv
import warnings
from dataclasses import dataclass, field

import numpy as np

from ..model import DEFAULT_ENVIRONMENT, DroneSpec, Environment, hover_velocity
from .records import as_arrays


def _cell_index(coord, resolution):
    # cell centers on multiples of the resolution, membership [lo, hi)
    return np.floor(np.asarray(coord) / resolution + 0.5).astype(np.int64)


def _iqr(values) -> float:
    if len(values) < 2:
        return 0.0
    q75, q25 = np.percentile(values, [75, 25])
    return float(q75 - q25)


def _sem(values) -> float:
    if len(values) < 2:
        return 0.0
    return float(np.std(values, ddof=1) / np.sqrt(len(values)))


@dataclass
class GriddedField:
    """Median-binned normalized speed on a cubic grid.

    Coordinates are the probe position relative to the drone in the drone's
    body frame (z up), divided by the motor distance. Only non-empty cells are
    stored.
    """

    resolution: float
    index: np.ndarray  # (n, 3) integer cell indices
    u_norm: np.ndarray  # median speed / U_H
    count: np.ndarray
    iqr: np.ndarray
    sem: np.ndarray
    u_hover: float = 1.0
    motor_distance: float = 1.0

    def __len__(self) -> int:
        return len(self.u_norm)

    @property
    def center(self) -> np.ndarray:
        return self.index * self.resolution

    @property
    def s_norm(self) -> np.ndarray:
        return -self.center[:, 2]

    @property
    def r_norm(self) -> np.ndarray:
        c = self.center
        return np.hypot(c[:, 0], c[:, 1])

    def write_csv(self, dest, cylindrical: bool = False, header_lines=()) -> None:
        own = not hasattr(dest, "write")
        fh = open(dest, "w", newline="") if own else dest
        try:
            for line in header_lines:
                fh.write(f"# {line}\n")
            w = csv.writer(fh)
            if cylindrical:
                w.writerow(["s_norm", "r_norm", "u_norm", "count", "iqr", "sem"])
                cols = (self.s_norm, self.r_norm)
            else:
                w.writerow(["x_norm", "y_norm", "z_norm", "u_norm", "count", "iqr", "sem"])
                cols = tuple(self.center.T)
            for row in zip(*cols, self.u_norm, self.count, self.iqr, self.sem):
                w.writerow([f"{v:.12g}" if not isinstance(v, (int, np.integer)) else str(v) for v in row])
        finally:
            if own:
                fh.close()


def bin_grid(
    records,
    drone: DroneSpec,
    resolution_norm: float,
    env: Environment = DEFAULT_ENVIRONMENT,
) -> GriddedField:
    """Bin samples into cubic cells of edge ``resolution_norm`` motor distances.

    Each sample is placed at the probe position relative to the drone; every
    non-empty cell carries the median of ``anemometer_speed / U_H``, the sample
    count, the interquartile range and the standard error of the mean.
    """
    if not resolution_norm > 0:
        raise ValueError(f"resolution must be positive, got {resolution_norm}")
    u_hover = hover_velocity(drone, env)
    pos, u = as_arrays(records)
    rel = -pos / drone.motor_distance
    u = u / u_hover
    if len(u) == 0:
        empty = np.empty(0)
        return GriddedField(resolution_norm, np.empty((0, 3), dtype=np.int64), empty, empty.astype(int),
                            empty, empty, u_hover, drone.motor_distance)

    idx = _cell_index(rel, resolution_norm)
    cells, inverse = np.unique(idx, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    order = np.argsort(inverse, kind="stable")
    splits = np.flatnonzero(np.diff(inverse[order])) + 1
    groups = np.split(u[order], splits)

    return GriddedField(
        resolution=resolution_norm,
        index=cells,
        u_norm=np.array([np.median(g) for g in groups]),
        count=np.array([len(g) for g in groups]),
        iqr=np.array([_iqr(g) for g in groups]),
        sem=np.array([_sem(g) for g in groups]),
        u_hover=u_hover,
        motor_distance=drone.motor_distance,
    )


@dataclass(frozen=True)
class RadialBin:
    r_norm: float
    speed_norm: float
    count: int  # grid cells pooled
    dispersion: float  # IQR across pooled cells (cell IQR if only one)
    sem: float
    n_samples: int


@dataclass
class RadialProfile:
    s_norm: float
    bins: list[RadialBin] = field(default_factory=list)

    @property
    def r_norm(self) -> np.ndarray:
        return np.array([b.r_norm for b in self.bins])

    @property
    def speed_norm(self) -> np.ndarray:
        return np.array([b.speed_norm for b in self.bins])


def radial_profiles(
    grid: GriddedField,
    slice_thickness_norm: float | None = None,
    radial_bin_norm: float | None = None,
    min_bins: int = 3,
) -> list[RadialProfile]:
    """Group cells into downstream slices and pool them azimuthally.

    Slices are centred on multiples of ``slice_thickness_norm`` (default: the
    grid resolution), radial bins on multiples of ``radial_bin_norm``
    (default: half the grid resolution). Each bin reports the median radius and
    median speed of its cells; for a single-level slice and a radially
    monotone profile the two medians correspond to the same cell.

    Slices with fewer than ``min_bins`` radial bins are dropped with a warning.
    """
    thickness = slice_thickness_norm or grid.resolution
    rbin = radial_bin_norm or grid.resolution / 2.0
    if thickness <= 0 or rbin <= 0:
        raise ValueError("slice thickness and radial bin width must be positive")
    if len(grid) == 0:
        return []

    s, r, u = grid.s_norm, grid.r_norm, grid.u_norm
    down = s > 0
    k = _cell_index(s, thickness)
    j = _cell_index(r, rbin)
    profiles = []
    for ks in np.unique(k[down]):
        in_slice = down & (k == ks)
        bins = []
        for jr in np.unique(j[in_slice]):
            sel = in_slice & (j == jr)
            vals = u[sel]
            disp = _iqr(vals) if len(vals) > 1 else float(grid.iqr[sel][0])
            bins.append(
                RadialBin(
                    r_norm=float(np.median(r[sel])),
                    speed_norm=float(np.median(vals)),
                    count=int(sel.sum()),
                    dispersion=disp,
                    sem=_sem(vals) if len(vals) > 1 else float(grid.sem[sel][0]),
                    n_samples=int(grid.count[sel].sum()),
                )
            )
        s_slice = float(np.median(s[in_slice]))
        if len(bins) < min_bins:
            warnings.warn(
                f"slice s/l = {s_slice:.3g} has only {len(bins)} radial bins; skipped",
                stacklevel=2,
            )
            continue
        bins.sort(key=lambda b: b.r_norm)
        profiles.append(RadialProfile(s_slice, bins))
    return profiles


@dataclass
class LateralProfile:
    """Speed along the body y-axis (x = 0) at one depth."""

    s_norm: float
    y_norm: np.ndarray
    speed_norm: np.ndarray


def lateral_profiles(grid: GriddedField, min_points: int = 5) -> list[LateralProfile]:
    """Extract the ``x = 0`` row of every depth level below the rotor plane."""
    if len(grid) == 0:
        return []
    idx = grid.index
    out = []
    on_axis = idx[:, 0] == 0
    for kz in np.unique(idx[on_axis & (idx[:, 2] < 0), 2])[::-1]:
        sel = on_axis & (idx[:, 2] == kz)
        if sel.sum() < min_points:
            continue
        order = np.argsort(idx[sel, 1])
        out.append(
            LateralProfile(
                s_norm=float(-kz * grid.resolution),
                y_norm=(idx[sel, 1] * grid.resolution)[order],
                speed_norm=grid.u_norm[sel][order],
            )
        )
    return out
