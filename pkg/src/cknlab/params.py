"""Parameter domain for the weighted interpolation inequalities.

A flat parameter point is (d, beta, gamma, p) with

    d >= 2,   gamma - 2 < beta < (d-2)*gamma/d,   gamma < d,
    1 < p <= p_star = (d - gamma)/(d - beta - 2),

and its cylinder image is (d, alpha, n, p) under

    alpha = 1 + (beta - gamma)/2,   n = 2*(d - gamma)/(beta + 2 - gamma),

where n > d plays the role of a (generally non-integer) dimension and the
critical exponent becomes p_star = n/(n-2).  All derived exponents used by
the other modules are collected in DerivedExponents.
"""

from dataclasses import dataclass

import numpy as np

from .errors import ImageOutsideCone, OutOfCone

#: absolute tolerance for closed-endpoint tests such as p == p_star
ENDPOINT_TOL = 1e-12


@dataclass(frozen=True)
class ProblemParams:
    """Flat-space parameters (d, beta, gamma, p)."""

    d: int
    beta: float
    gamma: float
    p: float

    @property
    def p_star(self):
        return (self.d - self.gamma) / (self.d - self.beta - 2.0)


@dataclass(frozen=True)
class CylinderParams:
    """Cylinder-side parameters (d, alpha, n, p)."""

    d: int
    alpha: float
    n: float
    p: float

    @property
    def p_star(self):
        return self.n / (self.n - 2.0)


@dataclass(frozen=True)
class DerivedExponents:
    theta: float      # interpolation exponent fixed by scaling invariance
    zeta: float       # exponent relating flat and cylinder optimal constants
    p_star: float
    m: float          # fast-diffusion exponent, (p+1)/(2p)
    nu: float         # 1/(1-m)
    sigma: float      # entropy-power exponent, (2/n)/(1-m) - 1
    delta: float      # 2p/(p-1)
    a: float          # (2-n)/2, cylinder decay exponent


def constraint_margins(params):
    """Signed margins of every cone constraint (positive = satisfied).

    Margins for the open inequalities are the raw distances to the boundary;
    the closed endpoint p = p_star is reported as p_star - p.
    """
    d, beta, gamma, p = params.d, params.beta, params.gamma, params.p
    margins = {
        "d >= 2": float(d - 2),
        "beta > gamma - 2": beta - (gamma - 2.0),
        "beta < (d-2)*gamma/d": (d - 2.0) * gamma / d - beta,
        "gamma < d": d - gamma,
        "d - beta - 2 > 0": d - beta - 2.0,
        "p > 1": p - 1.0,
    }
    if d - beta - 2.0 > 0:
        margins["p <= p_star"] = params.p_star - p
    else:
        margins["p <= p_star"] = float("-inf")
    return margins


def validate(raw, include_boundary=False):
    """Check all cone constraints; return the params or raise OutOfCone.

    Open inequalities are strict with zero tolerance; p = p_star is allowed
    as a closed endpoint (within ENDPOINT_TOL absolute, to absorb round-off
    when the caller constructs p from the p_star formula).

    include_boundary=True additionally closes the upper edge
    beta = (d-2)*gamma/d, the unweighted limit where the artificial
    dimension degenerates to n = d (e.g. beta = gamma = 0).
    """
    margins = constraint_margins(raw)
    violations = []
    for name, margin in margins.items():
        if name == "p <= p_star":
            if margin < -ENDPOINT_TOL:
                violations.append((name, margin))
        elif name == "d >= 2":
            if margin < 0:
                violations.append((name, margin))
        elif name == "beta < (d-2)*gamma/d" and include_boundary:
            if margin < -ENDPOINT_TOL:
                violations.append((name, margin))
        elif not margin > 0:
            violations.append((name, margin))
    if violations:
        raise OutOfCone(violations)
    return raw


def is_admissible(raw):
    try:
        validate(raw)
    except OutOfCone:
        return False
    return True


def to_cylinder(params, include_boundary=False):
    """Map validated flat parameters to their cylinder image."""
    validate(params, include_boundary)
    alpha = 1.0 + (params.beta - params.gamma) / 2.0
    n = 2.0 * (params.d - params.gamma) / (params.beta + 2.0 - params.gamma)
    return CylinderParams(d=params.d, alpha=alpha, n=n, p=params.p)


def to_flat(cyl, include_boundary=False):
    """Invert the cylinder map; raise ImageOutsideCone if the image is bad."""
    beta = cyl.d - 2.0 - cyl.alpha * (cyl.n - 2.0)
    gamma = cyl.d - cyl.alpha * cyl.n
    flat = ProblemParams(d=cyl.d, beta=beta, gamma=gamma, p=cyl.p)
    try:
        validate(flat, include_boundary)
    except OutOfCone as err:
        raise ImageOutsideCone(err.violations) from None
    return flat


def theta_exponent(params):
    d, beta, gamma, p = params.d, params.beta, params.gamma, params.p
    if abs(p - params.p_star) <= ENDPOINT_TOL:
        return 1.0
    denom = p * (d + beta + 2.0 - 2.0 * gamma - p * (d - beta - 2.0))
    return (d - gamma) * (p - 1.0) / denom


def theta_exponent_cyl(n, p):
    # same quantity written in cylinder variables; alpha drops out
    if abs(p - n / (n - 2.0)) <= ENDPOINT_TOL:
        return 1.0
    return n * (p - 1.0) / (p * (n + 2.0 - p * (n - 2.0)))


def zeta_exponent(params):
    d, beta, gamma, p = params.d, params.beta, params.gamma, params.p
    denom = 2.0 * p * (d + beta + 2.0 - 2.0 * gamma - p * (d - beta - 2.0))
    return (beta + 2.0 - gamma) * (p - 1.0) / denom


def exponents(params, include_boundary=False):
    """All derived exponents of a validated flat point."""
    validate(params, include_boundary)
    p = params.p
    cyl = to_cylinder(params, include_boundary)
    n = cyl.n
    m = (p + 1.0) / (2.0 * p)
    nu = 1.0 / (1.0 - m)
    sigma = (2.0 / n) * nu - 1.0
    delta = 2.0 * p / (p - 1.0)
    return DerivedExponents(
        theta=theta_exponent(params),
        zeta=zeta_exponent(params),
        p_star=params.p_star,
        m=m,
        nu=nu,
        sigma=sigma,
        delta=delta,
        a=(2.0 - n) / 2.0,
    )


def m_from_p(p):
    return (p + 1.0) / (2.0 * p)


def p_from_m(m):
    return 1.0 / (2.0 * m - 1.0)


def random_cone_points(d, count, rng, gamma_lo=None, p_frac=None):
    """Draw admissible flat points for property sweeps.

    gamma is uniform in (gamma_lo, d), beta uniform inside its slice, and p
    is placed at fraction p_frac of (1, p_star] (uniform in (0, 1) if None).
    """
    if gamma_lo is None:
        gamma_lo = d - 12.0
    points = []
    while len(points) < count:
        gamma = rng.uniform(gamma_lo, d - 1e-6)
        lo, hi = gamma - 2.0, (d - 2.0) * gamma / d
        beta = rng.uniform(lo + 1e-9 * (hi - lo), hi - 1e-9 * (hi - lo))
        pt = ProblemParams(d=d, beta=beta, gamma=gamma, p=1.5)
        frac = rng.uniform(1e-6, 1.0) if p_frac is None else p_frac
        p = 1.0 + frac * (pt.p_star - 1.0)
        pt = ProblemParams(d=d, beta=beta, gamma=gamma, p=p)
        if is_admissible(pt):
            points.append(pt)
    return points
