"""Emden-Fowler transformation and the asymptotic estimates it exposes.

The change of variables

    v(s, omega) = s^a phi(z, omega),   z = -log s,   a = (2 - n)/2,

maps the cylinder-variable Euler-Lagrange equation to

    -alpha^2 phi'' - Lap_omega phi + a^2 alpha^2 phi
        = e^((n-2)p - n) z) phi^(2p-1) - e^(((n-2)p - n - 2) z / 2) phi^p =: h,

where algebraic rates in s become exponential rates in z: phi ~ e^(a z) as
z -> +inf (s -> 0) and phi ~ e^((a + 2/(p-1)) z) as z -> -inf.  Note the
orientation: z increases toward the origin in s, opposite to the flow grid's
log s coordinate.
"""

from dataclasses import dataclass

import numpy as np

from .errors import GridTooCoarse, PreconditionViolated, WindowTooNarrow
from .flow import _dz, _dzz, _dtheta, _dthetatheta
from .radial import Sampled


@dataclass(frozen=True)
class CylinderFunction:
    """phi sampled on a uniform z grid (optionally times a theta grid)."""

    z: np.ndarray          # increasing, uniform
    values: np.ndarray     # shape (Nz,) or (Nz, Ntheta)
    n: float
    p: float
    alpha: float

    @property
    def a(self):
        return (2.0 - self.n) / 2.0

    @property
    def dz(self):
        return float(self.z[1] - self.z[0])


def to_cylinder_fn(v, params_cyl, z_grid=None):
    """Transform a radial profile v(s) to phi(z) = e^(a z) v(e^(-z)).

    For Sampled profiles the default grid reuses the profile's own log-spaced
    abscissas (reversed), so no interpolation error enters.
    """
    n, p, alpha = params_cyl.n, params_cyl.p, params_cyl.alpha
    a = (2.0 - n) / 2.0
    if z_grid is None:
        if isinstance(v, Sampled):
            z_grid = -np.log(v.s)[::-1]
        else:
            z_grid = np.linspace(-6.0, 6.0, 4097)
    z_grid = np.asarray(z_grid, dtype=float)
    s = np.exp(-z_grid)
    phi = np.exp(a * z_grid) * np.asarray(v(s), dtype=float)
    return CylinderFunction(z=z_grid, values=phi, n=n, p=p, alpha=alpha)


def from_cylinder_fn(phi):
    """Invert the transform; returns a Sampled radial profile v(s)."""
    s = np.exp(-phi.z)[::-1]
    v = (np.exp(-phi.a * phi.z) * phi.values)[::-1]
    return Sampled(s, v)


def forcing(phi):
    """The right-hand side h(z, omega) of the transformed equation."""
    n, p = phi.n, phi.p
    z = phi.z if phi.values.ndim == 1 else phi.z[:, None]
    vals = phi.values
    return (np.exp(((n - 2.0) * p - n) * z) * vals ** (2.0 * p - 1.0)
            - np.exp(0.5 * ((n - 2.0) * p - n - 2.0) * z) * vals ** p)


def phi_residual(phi, include_forcing=True, dtheta=None):
    """Sup over interior nodes of |-alpha^2 phi'' - Lap_omega phi + a^2 alpha^2 phi - h|."""
    if phi.z.size < 32:
        raise GridTooCoarse("need at least 32 z nodes")
    vals = phi.values if phi.values.ndim == 2 else phi.values[:, None]
    dz = phi.dz
    lap_z = _dzz(vals, dz)
    lhs = -phi.alpha ** 2 * lap_z + (phi.a * phi.alpha) ** 2 * vals
    if vals.shape[1] > 1:
        if dtheta is None:
            dtheta = 2.0 * np.pi / vals.shape[1]
        lhs = lhs - _dthetatheta(vals, dtheta)
    if include_forcing:
        h = forcing(phi)
        if h.ndim == 1:
            h = h[:, None]
        lhs = lhs - h
    return float(np.max(np.abs(lhs[2:-2, :])))


def asymptotic_fit(phi, end, window_frac=0.25):
    """Least-squares slope of log phi against z on one end of the grid.

    end = 'plus' fits the outer window_frac of the grid at large z (s -> 0,
    expected slope a); end = 'minus' fits large negative z (s -> inf,
    expected slope a + 2/(p-1)).
    """
    if end not in ("plus", "minus"):
        raise PreconditionViolated("end must be 'plus' or 'minus'")
    vals = phi.values if phi.values.ndim == 1 else phi.values.mean(axis=1)
    k = max(int(window_frac * phi.z.size), 2)
    sl = slice(-k, None) if end == "plus" else slice(None, k)
    z = phi.z[sl]
    v = vals[sl]
    good = v > 0
    if good.sum() < 20:
        raise WindowTooNarrow(f"only {int(good.sum())} positive nodes in window")
    slope, _ = np.polyfit(z[good], np.log(v[good]), 1)
    return float(slope)


def expected_slopes(phi):
    """(plus-end, minus-end) decay rates of the transformed profile."""
    return phi.a, phi.a + 2.0 / (phi.p - 1.0)


def forcing_decay_slope(phi, end="plus", window_frac=0.25):
    """Measured log |h| slope; bounded by -(n+2)/2 at the plus end."""
    h = forcing(phi)
    if h.ndim == 2:
        h = np.abs(h).mean(axis=1)
    habs = np.abs(h)
    k = max(int(window_frac * phi.z.size), 2)
    sl = slice(-k, None) if end == "plus" else slice(None, k)
    z, hv = phi.z[sl], habs[sl]
    good = hv > 1e-290
    if good.sum() < 20:
        raise WindowTooNarrow("forcing underflows on the window")
    slope, _ = np.polyfit(z[good], np.log(hv[good]), 1)
    return float(slope)


def pressure_ring_integrals(P, grid, s):
    """The five sphere integrals of pressure derivatives at radius s.

    Returns (i)..(v) as a dict:
        i   oint |P'|^2 domega
        ii  oint |grad_omega P|^2 domega
        iii oint |P''|^2 domega
        iv  oint |grad_omega P' - grad_omega P / s|^2 domega
        v   oint |Lap_omega P / s^2|^2 domega
    evaluated at the grid ring closest to s.  P is a pressure field on a flow
    grid (z = +log s orientation).
    """
    idx = int(np.argmin(np.abs(grid.z - np.log(s))))
    inv_s = np.exp(-grid.z)[:, None]
    Pz = _dz(P, grid.dz)
    Ps = inv_s * Pz
    Pss = inv_s ** 2 * (_dzz(P, grid.dz) - Pz)
    if grid.Ntheta > 1:
        Pt = _dtheta(P, grid.dtheta)
        Ptt = _dthetatheta(P, grid.dtheta)
        Pst = _dtheta(Ps, grid.dtheta)
    else:
        Pt = Ptt = Pst = np.zeros_like(P)
    aw = grid.angular_weight

    def ring(field):
        return float(field[idx].sum() * aw)

    return {
        "s": float(np.exp(grid.z[idx])),
        "i": ring(Ps ** 2),
        "ii": ring(Pt ** 2),
        "iii": ring(Pss ** 2),
        "iv": ring((Pst - inv_s * Pt) ** 2),
        "v": ring((inv_s ** 2 * Ptt) ** 2),
    }


def write_cylinder_csv(phi, path):
    vals = phi.values if phi.values.ndim == 1 else phi.values.mean(axis=1)
    with open(path, "w") as fh:
        fh.write("z,phi\n")
        for zi, vi in zip(phi.z, vals):
            fh.write(f"{zi!r},{vi!r}\n")


def write_ring_integrals_csv(rows, path):
    keys = ("s", "i", "ii", "iii", "iv", "v")
    with open(path, "w") as fh:
        fh.write("s,integral_i,integral_ii,integral_iii,integral_iv,integral_v\n")
        for row in rows:
            fh.write(",".join(repr(row[k]) for k in keys) + "\n")
