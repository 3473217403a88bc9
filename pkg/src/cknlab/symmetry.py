"""Symmetry vs symmetry-breaking classification and the spectral gap.

The Felli-Schneider curve beta_fs(gamma) = d - 2 - sqrt((gamma-d)^2 - 4(d-1))
separates, for gamma < 0, parameter points whose radial optimisers are
linearly stable from those where symmetry breaking occurs.  In cylinder
variables the same threshold is alpha_fs = sqrt((d-1)/(n-1)).  The optimal
Hardy-Poincare constant Lambda is piecewise in alpha^2: a radial branch
2*alpha^2*(2*delta-n) below the switch value and an angular branch
2*alpha^2*delta*eta above it, where eta solves eta*(eta+n-2) = (d-1)/alpha^2.
"""

import csv
import enum
import json
import math
from dataclasses import dataclass

import numpy as np

from . import params as cp
from .errors import OutOfCone, PreconditionViolated

#: |beta - beta_fs| below this counts as sitting on the curve
ON_CURVE_TOL = 1e-12

#: margin written for cells where the curve is undefined or outside the cone
MARGIN_SENTINEL = -1e30


class Region(enum.IntEnum):
    SYMMETRY = 0
    SYMMETRY_BREAKING = 1
    ON_CURVE = 2
    OUTSIDE_CONE = 3


@dataclass(frozen=True)
class RegionLabel:
    region: Region
    margin: float  # signed distance beta - beta_fs(gamma); sentinel when undefined


class Branch(enum.Enum):
    RADIAL = "radial"
    ANGULAR = "angular"


@dataclass(frozen=True)
class SpectralGap:
    lam: float
    eta: float | None
    branch: Branch
    threshold: float  # alpha^2 value at which the two branches meet


def beta_fs(gamma, d):
    """Felli-Schneider threshold curve; vectorised over gamma."""
    gamma = np.asarray(gamma, dtype=float)
    rad = (gamma - d) ** 2 - 4.0 * (d - 1.0)
    out = d - 2.0 - np.sqrt(np.where(rad >= 0.0, rad, np.nan))
    return out if out.ndim else float(out)


def alpha_fs(d, n):
    """Cylinder-side threshold sqrt((d-1)/(n-1)); requires n > d >= 2."""
    if not n > d:
        raise PreconditionViolated(f"need n > d, got n={n}, d={d}")
    return math.sqrt((d - 1.0) / (n - 1.0))


def eta(alpha, n, d):
    """Positive root of eta*(eta+n-2) = (d-1)/alpha^2."""
    if alpha <= 0 or not n > d:
        raise PreconditionViolated("need alpha > 0 and n > d")
    rhs = (d - 1.0) / (alpha * alpha)
    return 0.5 * (-(n - 2.0) + math.sqrt((n - 2.0) ** 2 + 4.0 * rhs))


def branch_threshold(d, n, delta):
    """alpha^2 switch value between the radial and angular Lambda branches."""
    return (d - 1.0) * delta * delta / (n * (2.0 * delta - n) * (delta - 1.0))


def spectral_gap(alpha, n, d, delta):
    """Optimal Hardy-Poincare constant Lambda with branch bookkeeping."""
    if delta < n:
        raise PreconditionViolated(f"need delta >= n, got delta={delta}, n={n}")
    if not n > d or d < 2:
        raise PreconditionViolated(f"need n > d >= 2, got n={n}, d={d}")
    thr = branch_threshold(d, n, delta)
    a2 = alpha * alpha
    if a2 <= thr:
        return SpectralGap(lam=2.0 * a2 * (2.0 * delta - n), eta=None,
                           branch=Branch.RADIAL, threshold=thr)
    e = eta(alpha, n, d)
    return SpectralGap(lam=2.0 * a2 * delta * e, eta=e,
                       branch=Branch.ANGULAR, threshold=thr)


def classify(point):
    """Region label of a flat parameter point."""
    try:
        cp.validate(point)
    except OutOfCone:
        return RegionLabel(Region.OUTSIDE_CONE, MARGIN_SENTINEL)
    rad = (point.gamma - point.d) ** 2 - 4.0 * (point.d - 1.0)
    margin = point.beta - beta_fs(point.gamma, point.d) if rad >= 0 else MARGIN_SENTINEL
    if point.gamma >= 0.0:
        return RegionLabel(Region.SYMMETRY, margin)
    if abs(margin) <= ON_CURVE_TOL:
        return RegionLabel(Region.ON_CURVE, margin)
    if margin > 0.0:
        return RegionLabel(Region.SYMMETRY_BREAKING, margin)
    return RegionLabel(Region.SYMMETRY, margin)


def instability_margin(point):
    """4*p*alpha^2/(p-1) - Lambda; positive exactly in the breaking region."""
    cp.validate(point)
    cyl = cp.to_cylinder(point)
    delta = 2.0 * point.p / (point.p - 1.0)
    gap = spectral_gap(cyl.alpha, cyl.n, point.d, delta)
    return 2.0 * delta * cyl.alpha ** 2 - gap.lam


@dataclass(frozen=True)
class RegionGrid:
    d: int
    p: float
    gamma: np.ndarray    # cell-centre coordinates, shape (res_gamma,)
    beta: np.ndarray     # shape (res_beta,)
    labels: np.ndarray   # int codes, shape (res_beta, res_gamma), row-major in beta
    margins: np.ndarray


def region_grid(d, p, gamma_range, beta_range, resolution):
    """Classify a rectangle of (gamma, beta) cells at their centres.

    resolution is either an int (same for both axes) or (res_gamma, res_beta).
    The p <= p_star cut beta >= d - 2 + (gamma - d)/p is part of the cone and
    marks cells below it as outside.
    """
    if isinstance(resolution, int):
        res_g = res_b = resolution
    else:
        res_g, res_b = resolution
    if res_g < 2 or res_b < 2:
        raise PreconditionViolated("resolution must be >= 2 per axis")
    g_lo, g_hi = gamma_range
    b_lo, b_hi = beta_range
    dg = (g_hi - g_lo) / res_g
    db = (b_hi - b_lo) / res_b
    gam = g_lo + dg * (np.arange(res_g) + 0.5)
    bet = b_lo + db * (np.arange(res_b) + 0.5)

    G, B = np.meshgrid(gam, bet)  # shape (res_b, res_g)
    inside = (
        (B > G - 2.0)
        & (B < (d - 2.0) * G / d)
        & (G < d)
        & (d - B - 2.0 > 0.0)
        & (B >= d - 2.0 + (G - d) / p)  # p <= p_star
        & (p > 1.0)
    )
    rad = (G - d) ** 2 - 4.0 * (d - 1.0)
    with np.errstate(invalid="ignore"):
        bfs = d - 2.0 - np.sqrt(np.where(rad >= 0.0, rad, np.nan))
    margin = np.where(rad >= 0.0, B - bfs, np.nan)

    labels = np.full(G.shape, int(Region.OUTSIDE_CONE))
    sym = inside & ((G >= 0.0) | (margin < -ON_CURVE_TOL))
    brk = inside & (G < 0.0) & (margin > ON_CURVE_TOL)
    on = inside & (G < 0.0) & (np.abs(margin) <= ON_CURVE_TOL)
    labels[sym] = int(Region.SYMMETRY)
    labels[brk] = int(Region.SYMMETRY_BREAKING)
    labels[on] = int(Region.ON_CURVE)

    margins = np.where(np.isnan(margin) | ~inside, MARGIN_SENTINEL, margin)
    return RegionGrid(d=d, p=p, gamma=gam, beta=bet, labels=labels, margins=margins)


def region_grid_rows(grid):
    """Flatten a RegionGrid to (gamma, beta, label, margin) rows, row-major."""
    rows = []
    for i, b in enumerate(grid.beta):
        for j, g in enumerate(grid.gamma):
            rows.append((g, b, int(grid.labels[i, j]), float(grid.margins[i, j])))
    return rows


def write_region_csv(grid, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["gamma", "beta", "label", "margin"])
        for g, b, lab, marg in region_grid_rows(grid):
            writer.writerow([repr(g), repr(b), lab, repr(marg)])


def write_region_json(grid, path):
    rows = [
        {"gamma": g, "beta": b, "label": lab, "margin": marg}
        for g, b, lab, marg in region_grid_rows(grid)
    ]
    with open(path, "w") as fh:
        json.dump({"d": grid.d, "p": grid.p, "cells": rows}, fh)
