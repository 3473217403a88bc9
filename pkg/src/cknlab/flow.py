"""Weighted fast-diffusion flow with Renyi entropy-power diagnostics.

The evolution is du/dt = L u^m with the diffusion operator

    L u = alpha^2 (u'' + (n-1)/s u') + (1/s^2) Lap_omega u,

discretised on a uniform grid in z = log s (times a periodic theta grid when
d = 2) where the radial part becomes (alpha^2/s^2)(u_zz + (n-2) u_z).  The
time stepper uses the conservative flux form with zero flux at both z ends,
so the measure-weighted mass sum is preserved to round-off.  Diagnostics
track the entropy E = int u^m dmu, the Fisher information
I = int u |D_alpha P|^2 dmu for the pressure P = m/(1-m) u^(m-1), the entropy
power F = E^sigma, G = E^(sigma-1) I, two independent estimates of
H = E^(-sigma) dG/dt, the boundary flux term b(s) at both ends and the
curvature functional R[P] split into its square components.
"""

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import (
    DimensionUnsupported,
    NonPositiveDensity,
    PreconditionViolated,
    StabilityViolated,
)
from .radial import sphere_area


@dataclass(frozen=True)
class FlowGrid:
    z_min: float
    z_max: float
    Nz: int
    Ntheta: int
    d: int
    alpha: float
    n: float
    m: float

    def __post_init__(self):
        if not self.z_min < self.z_max:
            raise PreconditionViolated("need z_min < z_max")
        if self.Nz < 16:
            raise PreconditionViolated("need Nz >= 16")
        if self.Ntheta != 1 and self.Ntheta < 8:
            raise PreconditionViolated("Ntheta must be 1 (radial) or >= 8")
        if self.Ntheta > 1 and self.d != 2:
            raise DimensionUnsupported("angular discretisation only for d = 2")
        if not 1.0 - 1.0 / self.n < self.m < 1.0:
            raise PreconditionViolated("need 1 - 1/n < m < 1")
        # n = d with alpha = 1 is the unweighted special case
        if self.alpha <= 0 or not self.n >= self.d:
            raise PreconditionViolated("need alpha > 0 and n >= d")

    @property
    def z(self):
        return np.linspace(self.z_min, self.z_max, self.Nz)

    @property
    def dz(self):
        return (self.z_max - self.z_min) / (self.Nz - 1)

    @property
    def s(self):
        return np.exp(self.z)

    @property
    def dtheta(self):
        return 2.0 * math.pi / self.Ntheta

    @property
    def angular_weight(self):
        # measure of the angular factor carried by one theta node
        return self.dtheta if self.Ntheta > 1 else sphere_area(self.d)

    def cell_weights_z(self):
        w = np.full(self.Nz, self.dz)
        w[0] = w[-1] = 0.5 * self.dz
        return w

    def integrate(self, field):
        """int field dmu with dmu = s^(n-1) ds domega, trapezoid in z."""
        wz = self.cell_weights_z() * np.exp(self.n * self.z)
        return float(np.sum(field * wz[:, None]) * self.angular_weight)


@dataclass(frozen=True)
class FlowState:
    u: np.ndarray  # shape (Nz, Ntheta), nonnegative
    t: float


@dataclass(frozen=True)
class FlowDiagnostics:
    t: float
    mass: float
    E: float
    I: float
    F: float
    G: float
    H_identity: float
    H_fd: float
    b_inner: float
    b_outer: float
    R_integral: float
    LP_variance: float
    k_integral: float | None


def sigma_exponent(n, m):
    return (2.0 / n) / (1.0 - m) - 1.0


# ---------------------------------------------------------------------------
# stencils
# ---------------------------------------------------------------------------

def _dz(field, dz):
    out = np.empty_like(field)
    out[1:-1] = (field[2:] - field[:-2]) / (2.0 * dz)
    out[0] = (-3.0 * field[0] + 4.0 * field[1] - field[2]) / (2.0 * dz)
    out[-1] = (3.0 * field[-1] - 4.0 * field[-2] + field[-3]) / (2.0 * dz)
    return out


def _dzz(field, dz):
    out = np.empty_like(field)
    out[1:-1] = (field[2:] - 2.0 * field[1:-1] + field[:-2]) / (dz * dz)
    out[0] = (2.0 * field[0] - 5.0 * field[1] + 4.0 * field[2] - field[3]) / (dz * dz)
    out[-1] = (2.0 * field[-1] - 5.0 * field[-2] + 4.0 * field[-3] - field[-4]) / (dz * dz)
    return out


def _dtheta(field, dtheta):
    return (np.roll(field, -1, axis=1) - np.roll(field, 1, axis=1)) / (2.0 * dtheta)


def _dthetatheta(field, dtheta):
    return (np.roll(field, -1, axis=1) - 2.0 * field + np.roll(field, 1, axis=1)) / (dtheta * dtheta)


def apply_L(field, grid):
    """Centered second-order discretisation of the diffusion operator."""
    inv_s2 = np.exp(-2.0 * grid.z)[:, None]
    out = grid.alpha ** 2 * inv_s2 * (_dzz(field, grid.dz) + (grid.n - 2.0) * _dz(field, grid.dz))
    if grid.Ntheta > 1:
        out = out + inv_s2 * _dthetatheta(field, grid.dtheta)
    return out


def grad_squared(field, grid):
    """|D_alpha field|^2 = alpha^2 (df/ds)^2 + (1/s^2)|grad_omega field|^2."""
    inv_s = np.exp(-grid.z)[:, None]
    fs = inv_s * _dz(field, grid.dz)
    out = grid.alpha ** 2 * fs ** 2
    if grid.Ntheta > 1:
        out = out + (inv_s * _dtheta(field, grid.dtheta)) ** 2
    return out


# ---------------------------------------------------------------------------
# pressure and stepping
# ---------------------------------------------------------------------------

def pressure(state, grid):
    """P = m/(1-m) u^(m-1); requires strictly positive density."""
    if np.any(state.u <= 0.0):
        raise NonPositiveDensity("pressure needs u > 0 on the whole grid")
    m = grid.m
    u = np.maximum(state.u, 1e-300)
    return m / (1.0 - m) * u ** (m - 1.0)


def _flux_divergence(g, grid):
    """e^(nz) du/dt for the conservative no-flux discretisation of L g."""
    dz = grid.dz
    z = grid.z
    zf = 0.5 * (z[1:] + z[:-1])
    face_w = grid.alpha ** 2 * np.exp((grid.n - 2.0) * zf)[:, None]
    flux = face_w * (g[1:] - g[:-1]) / dz
    out = np.empty_like(g)
    out[1:-1] = (flux[1:] - flux[:-1]) / dz
    # half cells at the walls; outside-face flux is zero
    out[0] = flux[0] / (0.5 * dz)
    out[-1] = -flux[-1] / (0.5 * dz)
    if grid.Ntheta > 1:
        out = out + np.exp((grid.n - 2.0) * z)[:, None] * _dthetatheta(g, grid.dtheta)
    return out


def _rhs(u, grid):
    g = np.maximum(u, 0.0) ** grid.m
    return np.exp(-grid.n * grid.z)[:, None] * _flux_divergence(g, grid)


def cfl_dt(state, grid, cfl=0.2):
    """Pointwise parabolic step bound for the degenerate coefficient m u^(m-1)."""
    m, dz = grid.m, grid.dz
    coeff = m * np.maximum(state.u, 1e-300) ** (m - 1.0)
    s2 = np.exp(2.0 * grid.z)[:, None]
    rate = coeff / s2 * grid.alpha ** 2 * (1.0 + abs(grid.n - 2.0) * dz) / dz ** 2
    if grid.Ntheta > 1:
        rate = rate + coeff / s2 / grid.dtheta ** 2
    return float(cfl / np.max(rate))


def step(state, grid, dt):
    """One explicit Heun (RK2) step; raises StabilityViolated on breakdown."""
    k1 = _rhs(state.u, grid)
    u1 = state.u + dt * k1
    k2 = _rhs(u1, grid)
    u_new = state.u + 0.5 * dt * (k1 + k2)
    if not np.all(np.isfinite(u_new)) or np.any(u_new < 0.0):
        raise StabilityViolated(f"negative or non-finite density at t = {state.t:.6g}")
    return FlowState(u=u_new, t=state.t + dt)


# ---------------------------------------------------------------------------
# Barenblatt family
# ---------------------------------------------------------------------------

def barenblatt_coefficients(t, a0, b0, alpha, n, m):
    """Exact (a(t), b(t)) for the self-similar family (a + b s^2)^(-1/(1-m)).

    Substituting the ansatz into the flow gives a' = 2 alpha^2 n m a b and
    b' = -2 alpha^2 m (2 nu - n) b^2 with nu = 1/(1-m), hence
    b(t) = b0/tau and a(t) = a0 tau^(n/(2 nu - n)) with
    tau = 1 + 2 alpha^2 m (2 nu - n) b0 t.
    """
    nu = 1.0 / (1.0 - m)
    rate = 2.0 * alpha ** 2 * m * (2.0 * nu - n)
    tau = 1.0 + rate * b0 * t
    return a0 * tau ** (n / (2.0 * nu - n)), b0 / tau


def barenblatt_state(grid, a0=1.0, b0=1.0, t=0.0):
    nu = 1.0 / (1.0 - grid.m)
    s2 = np.exp(2.0 * grid.z)
    u = (a0 + b0 * s2) ** (-nu)
    return FlowState(u=np.repeat(u[:, None], grid.Ntheta, axis=1), t=t)


def perturbed_barenblatt_state(grid, amplitude, mode, a0=1.0, b0=1.0,
                               eta_exponent=None):
    """Barenblatt times (1 + amplitude * g(s) * cos(mode * theta)).

    For mode >= 1 the radial envelope is g = (2s/(1+s^2))^eta, the growth rate
    of the instability eigenfunction (eta defaults to the positive root of
    eta(eta+n-2) = (d-1)/alpha^2), normalised to peak value 1 at s = 1.
    mode = 0 gives a radial bump 4 s^2/(1+s^2)^2.
    """
    from .symmetry import eta as eta_root

    base = barenblatt_state(grid, a0, b0)
    s = np.exp(grid.z)
    if mode == 0:
        g = 4.0 * s ** 2 / (1.0 + s ** 2) ** 2
        angular = np.ones(grid.Ntheta)
    else:
        if grid.Ntheta == 1:
            raise PreconditionViolated("angular perturbation needs Ntheta > 1")
        if eta_exponent is None:
            eta_exponent = eta_root(grid.alpha, grid.n, grid.d)
        g = (2.0 * s / (1.0 + s ** 2)) ** eta_exponent
        theta = np.arange(grid.Ntheta) * grid.dtheta
        angular = np.cos(mode * theta)
    u = base.u * (1.0 + amplitude * g[:, None] * angular[None, :])
    if np.any(u <= 0):
        raise PreconditionViolated("perturbation amplitude destroys positivity")
    return FlowState(u=u, t=0.0)


# ---------------------------------------------------------------------------
# curvature functionals
# ---------------------------------------------------------------------------

def _pressure_fields(state, grid):
    P = pressure(state, grid)
    dz = grid.dz
    inv_s = np.exp(-grid.z)[:, None]
    Pz = _dz(P, dz)
    Ps = inv_s * Pz
    Pss_minus = inv_s ** 2 * (_dzz(P, dz) - 2.0 * Pz)  # P'' - P'/s, one combination
    return P, Ps, Pss_minus


def bakry_emery_decomposition(state, grid):
    """Square components of R[P] integrated against u^m dmu.

    Returns (R_integral, components) where components has keys 'radial',
    'mixed', 'angular' for

        alpha^4 (1-1/n) [P'' - P'/s - Lap_omega P/(alpha^2 (n-1) s^2)]^2,
        (2 alpha^2/s^2) |grad_omega P' - grad_omega P / s|^2,
        k[P]/s^4  with  k[P] = (n-2)(alpha_fs^2 |P_tt|^2 - alpha^2 |P_t|^2).

    The closed form of the angular component is specific to d = 2.
    """
    if grid.d >= 3 and grid.Ntheta > 1:
        raise DimensionUnsupported("k[P] closed form implemented for d = 2 only")
    m, n, alpha = grid.m, grid.n, grid.alpha
    um = np.maximum(state.u, 0.0) ** m
    P, Ps, Pss_minus = _pressure_fields(state, grid)
    inv_s = np.exp(-grid.z)[:, None]
    if grid.Ntheta > 1:
        Ptt = _dthetatheta(P, grid.dtheta)
        Pt = _dtheta(P, grid.dtheta)
        lap_omega = Ptt
    else:
        Ptt = Pt = lap_omega = 0.0
    core = Pss_minus - lap_omega * inv_s ** 2 / (alpha ** 2 * (n - 1.0))
    comp_radial = alpha ** 4 * (1.0 - 1.0 / n) * grid.integrate(core ** 2 * um)
    if grid.Ntheta > 1:
        mixed = _dtheta(Ps, grid.dtheta) - inv_s * Pt
        comp_mixed = 2.0 * alpha ** 2 * grid.integrate(inv_s ** 2 * mixed ** 2 * um)
        afs2 = (grid.d - 1.0) / (n - 1.0)
        k_field = (n - 2.0) * (afs2 * Ptt ** 2 - alpha ** 2 * Pt ** 2)
        comp_angular = grid.integrate(inv_s ** 4 * k_field * um)
    else:
        comp_mixed = 0.0
        comp_angular = 0.0
    components = {"radial": comp_radial, "mixed": comp_mixed, "angular": comp_angular}
    return comp_radial + comp_mixed + comp_angular, components


def r_functional_direct(state, grid):
    """int R[P] u^m dmu from the defining expression (nested stencils).

    R[P] = (1/2) L|D_alpha P|^2 - D_alpha P . D_alpha(L P) - (1/n)(L P)^2.
    """
    m, n, alpha = grid.m, grid.n, grid.alpha
    um = np.maximum(state.u, 0.0) ** m
    P = pressure(state, grid)
    W = grad_squared(P, grid)
    LP = apply_L(P, grid)
    inv_s = np.exp(-grid.z)[:, None]
    dot = alpha ** 2 * (inv_s * _dz(P, grid.dz)) * (inv_s * _dz(LP, grid.dz))
    if grid.Ntheta > 1:
        dot = dot + (inv_s * _dtheta(P, grid.dtheta)) * (inv_s * _dtheta(LP, grid.dtheta))
    field = 0.5 * apply_L(W, grid) - dot - LP ** 2 / n
    return grid.integrate(field * um)


def angular_bound_terms(state, grid):
    """Integrals entering the d = 2 lower bound for the k[P] component."""
    if grid.Ntheta == 1 or grid.d != 2:
        raise DimensionUnsupported("angular bound needs a d = 2 grid")
    um = np.maximum(state.u, 0.0) ** grid.m
    P = pressure(state, grid)
    inv_s = np.exp(-grid.z)[:, None]
    Pt = _dtheta(P, grid.dtheta)
    grad_sq = grid.integrate(inv_s ** 4 * Pt ** 2 * um)
    grad_4 = grid.integrate(inv_s ** 4 * Pt ** 4 / P ** 2 * um)
    _, comps = bakry_emery_decomposition(state, grid)
    return comps["angular"], grad_sq, grad_4


def boundary_term(state, grid, end):
    """Sphere-integrated flux term b(s) at the inner or outer grid end.

    b(s) = oint [ d/ds (P^(m/(m-1)) |D_alpha P|^2)
                  - 2 (1-m) P^(m/(m-1)) P' L P ] s^(n-1) domega,
    where P^(m/(m-1)) = (m/(1-m))^(m/(m-1)) u^m exactly.
    """
    if end not in ("inner", "outer"):
        raise PreconditionViolated("end must be 'inner' or 'outer'")
    ring = boundary_term_rings(state, grid, edges_only=True)
    return ring[0] if end == "inner" else ring[-1]


def boundary_term_rings(state, grid, edges_only=False):
    """b(s) evaluated on every grid ring (centered stencils inside)."""
    m, n = grid.m, grid.n
    c_m = (m / (1.0 - m)) ** (m / (m - 1.0))
    um = np.maximum(state.u, 0.0) ** m
    P = pressure(state, grid)
    W = grad_squared(P, grid)
    LP = apply_L(P, grid)
    inv_s = np.exp(-grid.z)[:, None]
    Ps = inv_s * _dz(P, grid.dz)
    phi = c_m * um * W
    integrand = inv_s * _dz(phi, grid.dz) - 2.0 * (1.0 - m) * c_m * um * Ps * LP
    ring_sum = integrand.sum(axis=1) * grid.angular_weight
    b = np.exp((n - 1.0) * grid.z) * ring_sum
    if edges_only:
        return np.array([b[0], b[-1]])
    return b


# ---------------------------------------------------------------------------
# diagnostics and trajectories
# ---------------------------------------------------------------------------

def diagnostics(state, grid):
    """One time slice of the conserved and monotone quantities."""
    m, n = grid.m, grid.n
    sigma = sigma_exponent(n, m)
    u = state.u
    if np.any(u <= 0):
        raise NonPositiveDensity("diagnostics need u > 0")
    um = u ** m
    P = pressure(state, grid)
    W = grad_squared(P, grid)
    LP = apply_L(P, grid)

    mass = grid.integrate(u)
    E = grid.integrate(um)
    I = grid.integrate(u * W)
    F = E ** sigma
    G = E ** (sigma - 1.0) * I
    LP2 = grid.integrate(LP ** 2 * um)
    LP_mean = grid.integrate(LP * um) / E
    LP_var = grid.integrate((LP - LP_mean) ** 2 * um)
    R_int, comps = bakry_emery_decomposition(state, grid)
    H_identity = ((1.0 - m) * (sigma - 1.0) * I * I
                  - 2.0 * (1.0 / n - (1.0 - m)) * E * LP2
                  - 2.0 * E * R_int) / (E * E)
    b = boundary_term_rings(state, grid, edges_only=True)
    return FlowDiagnostics(
        t=state.t, mass=mass, E=E, I=I, F=F, G=G,
        H_identity=H_identity, H_fd=float("nan"),
        b_inner=float(b[0]), b_outer=float(b[1]),
        R_integral=R_int, LP_variance=LP_var,
        k_integral=comps["angular"] if grid.Ntheta > 1 else None,
    )


def _fill_h_fd(records, sigma):
    """Centered divided difference of G in t, scaled by E^(-sigma)."""
    out = list(records)
    for k in range(1, len(records) - 1):
        r0, r1, r2 = records[k - 1], records[k], records[k + 1]
        w0 = r1.t - r0.t
        w1 = r2.t - r1.t
        dG = (w0 * w0 * r2.G + (w1 * w1 - w0 * w0) * r1.G - w1 * w1 * r0.G) / (
            w0 * w1 * (w0 + w1))
        out[k] = replace(r1, H_fd=r1.E ** (-sigma) * dG)
    return out


def run(config):
    """Advance the flow per a config dict; returns (grid, records).

    Config keys: d, n, alpha (or alpha_over_fs), m (or p),
    grid: {z_min, z_max, Nz, Ntheta}, t_end, record_every (steps),
    max_steps (optional), cfl (optional),
    initial: {kind: barenblatt | perturbed_barenblatt | custom_csv,
              a?, b?, amplitude?, mode?, path?}.
    """
    from .symmetry import alpha_fs

    d = int(config["d"])
    n = float(config["n"])
    if "alpha" in config:
        alpha = float(config["alpha"])
    elif "alpha_over_fs" in config:
        alpha = float(config["alpha_over_fs"]) * alpha_fs(d, n)
    else:
        raise PreconditionViolated("config needs alpha or alpha_over_fs")
    if "m" in config:
        m = float(config["m"])
    elif "p" in config:
        m = (float(config["p"]) + 1.0) / (2.0 * float(config["p"]))
    else:
        raise PreconditionViolated("config needs m or p")
    g = config["grid"]
    grid = FlowGrid(z_min=float(g["z_min"]), z_max=float(g["z_max"]),
                    Nz=int(g["Nz"]), Ntheta=int(g.get("Ntheta", 1)),
                    d=d, alpha=alpha, n=n, m=m)

    init = config.get("initial", {"kind": "barenblatt"})
    kind = init.get("kind", "barenblatt")
    if kind == "barenblatt":
        state = barenblatt_state(grid, init.get("a", 1.0), init.get("b", 1.0))
    elif kind == "perturbed_barenblatt":
        state = perturbed_barenblatt_state(
            grid, init.get("amplitude", 0.05), init.get("mode", 1),
            init.get("a", 1.0), init.get("b", 1.0))
    elif kind == "custom_csv":
        state = load_state_csv(init["path"], grid)
    else:
        raise PreconditionViolated(f"unknown initial kind {kind!r}")

    t_end = float(config["t_end"])
    record_every = int(config.get("record_every", 10))
    max_steps = int(config.get("max_steps", 10 ** 7))
    cfl = float(config.get("cfl", 0.2))

    records = [diagnostics(state, grid)]
    steps = 0
    while state.t < t_end and steps < max_steps:
        dt = min(cfl_dt(state, grid, cfl), t_end - state.t)
        state = step(state, grid, dt)
        steps += 1
        if steps % record_every == 0 or state.t >= t_end or steps == max_steps:
            records.append(diagnostics(state, grid))
    records = _fill_h_fd(records, sigma_exponent(n, m))
    return grid, records


TRAJECTORY_COLUMNS = ("t", "mass", "E", "I", "F", "G", "H_identity", "H_fd",
                      "b_inner", "b_outer", "R_integral")


def write_trajectory_csv(records, path):
    with open(path, "w") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for r in records:
            fh.write(",".join(repr(getattr(r, c)) for c in TRAJECTORY_COLUMNS) + "\n")


def load_state_csv(path, grid):
    """Read density values; `z,value` rows (radial) or `z,theta,value` rows.

    Rows must enumerate the grid nodes in row-major (z outer, theta inner)
    order; z values are checked against the grid.
    """
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    if grid.Ntheta == 1:
        if data.shape[0] != grid.Nz:
            raise PreconditionViolated("row count does not match grid")
        if not np.allclose(data[:, 0], grid.z, atol=1e-9):
            raise PreconditionViolated("z column does not match grid nodes")
        u = data[:, -1][:, None]
    else:
        if data.shape[0] != grid.Nz * grid.Ntheta:
            raise PreconditionViolated("row count does not match grid")
        u = data[:, -1].reshape(grid.Nz, grid.Ntheta)
    if np.any(u < 0):
        raise NonPositiveDensity("custom initial data has negative values")
    return FlowState(u=u, t=0.0)
