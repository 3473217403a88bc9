"""Adaptive quadrature for radial integrals on (0, infinity).

Integrands here look like f(r)^q * r^w with algebraic behaviour at the
origin and power-law tails.  The half line is split at ``split``; the inner
piece is regularised by r = t^2 and the outer piece mapped back to a finite
interval by r = 1/t, after which adaptive Gauss panels resolve whatever
endpoint algebra remains.  Each panel carries a 7-point and a 15-point
Gauss-Legendre estimate; their difference is the local error and panels are
bisected until the global error target is met.
"""

from dataclasses import dataclass

import numpy as np

from .errors import NonConvergent, ToleranceNotMet

_X7, _W7 = np.polynomial.legendre.leggauss(7)
_X15, _W15 = np.polynomial.legendre.leggauss(15)


@dataclass(frozen=True)
class QuadratureConfig:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-14
    split: float = 1.0
    max_depth: int = 48

    def __post_init__(self):
        if self.rel_tol <= 0 or self.abs_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_depth < 8:
            raise ValueError("max_depth must be >= 8")


DEFAULT_CFG = QuadratureConfig()


def _panel_estimates(f, a, b):
    """Coarse/fine Gauss values on panels given as arrays a, b."""
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    x7 = mid[:, None] + half[:, None] * _X7[None, :]
    x15 = mid[:, None] + half[:, None] * _X15[None, :]
    coarse = half * (f(x7.ravel()).reshape(x7.shape) @ _W7)
    fine = half * (f(x15.ravel()).reshape(x15.shape) @ _W15)
    return coarse, fine


def adaptive_integral(f, a, b, cfg=DEFAULT_CFG):
    """Integrate f over [a, b]; returns (value, error_estimate).

    f must accept a 1-D numpy array.  Raises ToleranceNotMet if the panel
    subdivision hits cfg.max_depth with the error target still exceeded.
    """
    lo = np.array([a], dtype=float)
    hi = np.array([b], dtype=float)
    total = 0.0
    err_accepted = 0.0
    width_total = b - a
    for depth in range(cfg.max_depth + 1):
        coarse, fine = _panel_estimates(f, lo, hi)
        err = np.abs(fine - coarse)
        # running target based on everything accepted plus current estimates
        target = max(cfg.abs_tol, cfg.rel_tol * (abs(total) + np.abs(fine).sum()))
        share = target * (hi - lo) / width_total
        done = err <= np.maximum(share, 1e-300)
        if depth == cfg.max_depth:
            done = np.ones_like(done)
        total += fine[done].sum()
        err_accepted += err[done].sum()
        lo, hi = lo[~done], hi[~done]
        if lo.size == 0:
            break
        mid = 0.5 * (lo + hi)
        lo = np.concatenate([lo, mid])
        hi = np.concatenate([mid, hi])
    final_target = max(cfg.abs_tol, cfg.rel_tol * abs(total))
    if err_accepted > 10.0 * final_target:
        raise ToleranceNotMet(
            f"quadrature error estimate {err_accepted:.3e} exceeds target {final_target:.3e}"
        )
    return total, err_accepted


def _decay_slope(g, r0, factor=10.0):
    """Local log-log slope of g between r0 and factor*r0."""
    g0, g1 = g(np.array([r0]))[0], g(np.array([factor * r0]))[0]
    if g0 <= 0.0 or g1 <= 0.0:
        return None
    return (np.log(g1) - np.log(g0)) / np.log(factor)


def check_improper(g, cfg=DEFAULT_CFG):
    """Reject integrands whose tails make the half-line integral diverge."""
    for r0 in (cfg.split * 1e3, cfg.split * 1e5):
        slope = _decay_slope(g, r0)
        if slope is not None and slope >= -1.0 - 1e-9:
            raise NonConvergent(
                f"tail slope {slope:.3f} at r ~ {r0:.1e} is not integrable"
            )
    for r0 in (cfg.split * 1e-5, cfg.split * 1e-3):
        slope = _decay_slope(g, r0)
        if slope is not None and slope <= -1.0 + 1e-9:
            raise NonConvergent(
                f"origin slope {slope:.3f} at r ~ {r0:.1e} is not integrable"
            )


def half_line_integral(g, cfg=DEFAULT_CFG, tail_check=True):
    """Integrate g over (0, infinity); returns (value, error_estimate).

    Inner piece via r = t^2 (regularises mild endpoint algebra), outer piece
    via r = 1/t (power tails become endpoint algebra at t = 0).
    """
    if tail_check:
        check_improper(g, cfg)
    sp = cfg.split

    def inner(t):
        return 2.0 * t * g(t * t)

    def outer(t):
        with np.errstate(divide="ignore"):
            r = 1.0 / t
        vals = np.zeros_like(t)
        ok = t > 0
        vals[ok] = g(r[ok]) / (t[ok] * t[ok])
        return vals

    v1, e1 = adaptive_integral(inner, 0.0, np.sqrt(sp), cfg)
    v2, e2 = adaptive_integral(outer, 0.0, 1.0 / sp, cfg)
    return v1 + v2, e1 + e2
