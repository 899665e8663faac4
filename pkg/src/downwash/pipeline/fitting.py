"""Least-squares fits of the jet model to measured profiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from ..errors import FitError
from ..model import FAR_FIELD_THRESHOLD, PROFILE_COEFF, JetParameters
from .binning import RadialProfile
from .lsq import levenberg_marquardt

XI_FIT_MAX = 5.0


@dataclass(frozen=True)
class SliceFit:
    s_norm: float
    u_c_norm: float
    r_half_norm: float
    residual_rms: float
    in_far_field: bool
    n_bins: int = 0
    trace: tuple = field(default=(), repr=False, compare=False)

    def __post_init__(self):
        if not (self.u_c_norm > 0 and self.r_half_norm > 0):
            raise FitError(f"non-physical slice fit at s/l = {self.s_norm}: "
                           f"U_C = {self.u_c_norm}, r_half = {self.r_half_norm}")

    def to_dict(self) -> dict:
        return {
            "s_norm": self.s_norm,
            "u_c_norm": self.u_c_norm,
            "r_half_norm": self.r_half_norm,
            "residual_rms": self.residual_rms,
            "in_far_field": self.in_far_field,
            "n_bins": self.n_bins,
        }


def profile_model(r_norm, u_c, r_half):
    return u_c / (1.0 + PROFILE_COEFF * (r_norm / r_half) ** 2) ** 2


def _profile_jac(r_norm, u_c, r_half):
    q = PROFILE_COEFF * (r_norm / r_half) ** 2
    den = 1.0 + q
    return np.column_stack([den**-2, 4.0 * u_c * q / (r_half * den**3)])


def _half_max_radius(r, u):
    """Radius where the profile first drops below half its maximum (linear interpolation)."""
    i_max = int(np.argmax(u))
    half = 0.5 * u[i_max]
    for i in range(i_max + 1, len(u)):
        if u[i] < half:
            r0, r1, u0, u1 = r[i - 1], r[i], u[i - 1], u[i]
            return float(r0 + (u0 - half) * (r1 - r0) / (u0 - u1))
    return None


def fit_slice(profile: RadialProfile, xi_max: float = XI_FIT_MAX, max_iter: int = 200) -> SliceFit:
    """Fit centerline speed and half-width of one radial profile.

    Bins beyond ``xi_max`` half-widths are excluded; the cut is re-evaluated
    with the fitted half-width until the bin selection is stable.
    """
    r, u = profile.r_norm, profile.speed_norm
    if len(r) < 3:
        raise FitError(f"slice s/l = {profile.s_norm:.3g}: need at least 3 radial bins, got {len(r)}")
    if not np.max(u) > 0:
        raise FitError(f"slice s/l = {profile.s_norm:.3g}: profile is identically zero")
    r_half0 = _half_max_radius(r, u)
    if r_half0 is None or r_half0 <= 0 or not np.any(r < r_half0):
        raise FitError(f"slice s/l = {profile.s_norm:.3g}: profile does not cover both sides of the half-width")
    x = np.array([float(np.max(u)), r_half0])

    mask = r <= xi_max * x[1]
    res = None
    for _ in range(10):
        rm, um = r[mask], u[mask]
        if len(rm) < 2:
            raise FitError(f"slice s/l = {profile.s_norm:.3g}: too few bins inside xi <= {xi_max}")
        res = levenberg_marquardt(
            lambda p: profile_model(rm, p[0], p[1]) - um,
            lambda p: _profile_jac(rm, p[0], p[1]),
            x,
            max_iter=max_iter,
        )
        x = res.x
        if not x[1] > 0:
            raise FitError(f"slice s/l = {profile.s_norm:.3g}: half-width collapsed", last_iterate=x)
        new_mask = r <= xi_max * abs(x[1])
        if np.array_equal(new_mask, mask):
            break
        mask = new_mask

    return SliceFit(
        s_norm=profile.s_norm,
        u_c_norm=float(x[0]),
        r_half_norm=float(x[1]),
        residual_rms=res.rms,
        in_far_field=profile.s_norm >= FAR_FIELD_THRESHOLD,
        n_bins=int(mask.sum()),
        trace=tuple(res.trace),
    )


@dataclass
class JetFit:
    params: JetParameters
    n_slices: int
    residual_rms: float
    condition_number: float
    trace: list = field(default_factory=list, repr=False)


def _warm_start(s, uc, rh):
    """Closed-form start: 1/U_C and r_half are both affine in s."""
    a1, b1 = np.polyfit(s, 1.0 / uc, 1)  # 1/U_C = (s - s0) / bd
    a2, b2 = np.polyfit(s, rh, 1)  # r_half = S s - S s0
    bd = 1.0 / a1 if a1 > 0 else float(np.mean(uc * (s - np.min(s) + 1.0)))
    spread = a2 if a2 > 0 else float(np.mean(rh) / (np.mean(s) + 1.0))
    s0_candidates = []
    if a1 > 0:
        s0_candidates.append(-b1 / a1)
    if a2 > 0:
        s0_candidates.append(-b2 / a2)
    s0 = float(np.mean(s0_candidates)) if s0_candidates else float(np.min(s) - 1.0)
    s0 = min(s0, float(np.min(s)) - 1e-3)
    return np.array([bd, spread, s0])


def fit_jet_parameters(
    slices,
    s_min_norm: float = FAR_FIELD_THRESHOLD,
    weighting: str = "rms",
    rms_floor: float = 1e-9,
    max_condition: float = 1e10,
) -> JetFit:
    """Joint fit of decay constant, spreading rate and virtual origin.

    Only slices with ``in_far_field`` set and ``s_norm >= s_min_norm`` are
    used. With ``weighting="rms"`` both residuals of a slice are divided by
    that slice's profile-fit RMS (floored at ``rms_floor``); ``"uniform"``
    weighs all slices equally.
    """
    far = [sf for sf in slices if sf.in_far_field and sf.s_norm >= s_min_norm]
    if len(far) < 3:
        raise FitError(
            f"need at least 3 far-field slices (s/l >= {s_min_norm:g}) for the jet fit, got {len(far)}"
            + ("; no far-field slices" if not far else "")
        )
    s = np.array([sf.s_norm for sf in far])
    uc = np.array([sf.u_c_norm for sf in far])
    rh = np.array([sf.r_half_norm for sf in far])
    if weighting == "rms":
        w = np.maximum([sf.residual_rms for sf in far], rms_floor)
    elif weighting == "uniform":
        w = np.ones_like(s)
    else:
        raise ValueError(f"unknown weighting {weighting!r}")

    def fun(p):
        bd, spread, s0 = p
        d = s - s0
        return np.concatenate([(bd / d - uc) / w, (spread * d - rh) / w])

    def jac(p):
        bd, spread, s0 = p
        d = s - s0
        zero = np.zeros_like(s)
        top = np.column_stack([1.0 / d, zero, bd / d**2]) / w[:, None]
        bottom = np.column_stack([zero, d, -spread * np.ones_like(s)]) / w[:, None]
        return np.vstack([top, bottom])

    x0 = _warm_start(s, uc, rh)
    res = levenberg_marquardt(fun, jac, x0)
    J = res.jac
    scaled = J / np.maximum(np.linalg.norm(J, axis=0), 1e-300)
    cond = float(np.linalg.cond(scaled.T @ scaled))
    if not np.isfinite(cond) or cond > max_condition:
        raise FitError(f"jet fit is ill-conditioned (cond = {cond:.3g}); add slices over a wider s/l range",
                       last_iterate=res.x)
    bd, spread, s0 = res.x
    try:
        params = JetParameters(float(bd), float(spread), float(s0))
    except ValueError as exc:
        raise FitError(f"jet fit produced invalid parameters: {exc}", last_iterate=res.x) from exc
    resid = np.concatenate([bd / (s - s0) - uc, spread * (s - s0) - rh])
    return JetFit(params, len(far), float(np.sqrt(np.mean(resid**2))), cond, res.trace)


@dataclass(frozen=True)
class BimodalFit:
    s_norm: float
    delta_norm: float
    width: float
    amplitude: float
    residual_rms: float = 0.0

    def to_dict(self) -> dict:
        return {
            "s_norm": self.s_norm,
            "delta_norm": self.delta_norm,
            "width": self.width,
            "amplitude": self.amplitude,
            "residual_rms": self.residual_rms,
        }


def bimodal_model(y, amplitude, delta, width):
    return amplitude * (np.exp(-((y - delta) ** 2) / (2 * width**2)) + np.exp(-((y + delta) ** 2) / (2 * width**2)))


def _bimodal_jac(y, amplitude, delta, width):
    g1 = np.exp(-((y - delta) ** 2) / (2 * width**2))
    g2 = np.exp(-((y + delta) ** 2) / (2 * width**2))
    w2 = width**2
    return np.column_stack([
        g1 + g2,
        amplitude * (g1 * (y - delta) - g2 * (y + delta)) / w2,
        amplitude * (g1 * (y - delta) ** 2 + g2 * (y + delta) ** 2) / (w2 * width),
    ])


def fit_bimodal(y_norm, speed_norm, s_norm: float = float("nan")) -> BimodalFit:
    """Fit two equal Gaussians mirrored about ``y = 0`` to a lateral profile."""
    y = np.asarray(y_norm, dtype=float)
    u = np.asarray(speed_norm, dtype=float)
    if len(y) < 5 or not (np.any(y < 0) and np.any(y > 0)):
        raise FitError("bimodal fit needs at least 5 points on both sides of y = 0")
    if not np.max(u) > 0:
        raise FitError("lateral profile is identically zero")

    pos, neg = y > 0, y < 0
    y_right = y[pos][np.argmax(u[pos])]
    y_left = y[neg][np.argmax(u[neg])]
    delta_peak = 0.5 * (y_right - y_left)
    weights = np.clip(u, 0, None)
    spread = np.sqrt(np.sum(weights * y**2) / np.sum(weights))
    width0 = max(spread, np.min(np.diff(np.unique(y))))

    # delta = 0 is a stationary point of the symmetric model, so overlapping
    # peaks need starts away from it; keep the cheapest converged fit
    best = None
    for delta0 in sorted({0.0, float(delta_peak), 0.5 * width0, width0}):
        w0 = float(np.sqrt(max(width0**2 - delta0**2, (0.25 * width0) ** 2)))
        x0 = [float(np.max(u)) / 2.0, delta0, w0]
        res = least_squares(
            lambda p: bimodal_model(y, *p) - u,
            x0,
            jac=lambda p: _bimodal_jac(y, *p),
            bounds=([0.0, 0.0, 1e-6], [np.inf, np.inf, np.inf]),
            method="trf",
            x_scale="jac",
            xtol=1e-10,
            ftol=1e-10,
            gtol=1e-10,
            max_nfev=2000,
        )
        if res.status > 0 and (best is None or res.cost < best.cost):
            best = res
    if best is None:
        raise FitError(f"bimodal fit did not converge: {res.message}", last_iterate=res.x)
    res = best
    amplitude, delta, width = res.x
    return BimodalFit(
        s_norm=float(s_norm),
        delta_norm=float(abs(delta)),
        width=float(width),
        amplitude=float(amplitude),
        residual_rms=float(np.sqrt(np.mean(res.fun**2))),
    )


def merge_distance(fits, threshold: float = 0.05) -> float | None:
    """First depth from which the propeller-flow separation stays negligible.

    The reference separation is the linear extrapolation of the two shallowest
    fits to ``s = 0``. Returns the smallest sampled ``s`` at which the
    separation is at most ``threshold`` times that reference and remains so at
    every deeper sample, or ``None`` if the flows never merge in the data.
    """
    fits = sorted(fits, key=lambda f: f.s_norm)
    if len(fits) < 3:
        raise ValueError(f"need at least 3 bimodal fits, got {len(fits)}")
    s = np.array([f.s_norm for f in fits])
    d = np.array([f.delta_norm for f in fits])
    slope = (d[1] - d[0]) / (s[1] - s[0])
    reference = max(d[0] - slope * s[0], 0.0)
    below = d <= threshold * reference
    for i in range(len(fits)):
        if np.all(below[i:]):
            return float(s[i])
    return None
