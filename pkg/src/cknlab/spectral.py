"""Variational verification of the weighted Hardy-Poincare spectral gap.

Trial functions are separable f(s, omega) = g(s) * Y(omega) with Y either 1
or a coordinate function omega_i, so every 2-D integral reduces to a 1-D
radial quadrature times an exact sphere moment:

    oint omega_i^2 domega = |S^{d-1}|/d,
    oint |grad_omega omega_i|^2 domega = (d-1) |S^{d-1}|/d.

The Rayleigh quotient of an admissible trial bounds the optimal constant
Lambda from above; the explicit eigenfunctions g = s^2 - n/(2 delta - n)
(radial branch) and g = s^eta times omega_i (angular branch) attain it.
The quadratic form Q[f] is the same gradient integral minus
4 p alpha^2/(p-1) times the weighted L^2 integral; its sign flips exactly
at alpha = alpha_fs when tested with the angular mode.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import CertificateFailed, ConstraintViolated, PreconditionViolated
from .quadrature import DEFAULT_CFG, half_line_integral
from .radial import sphere_area
from .symmetry import Branch, eta as eta_root, spectral_gap


@dataclass(frozen=True)
class TrialFunction:
    """Separable trial g(s) * Y_i(omega); index 0 means Y = 1 (radial)."""

    radial: Callable
    radial_deriv: Callable
    angular_index: int
    label: str

    def angular_moments(self, d):
        area = sphere_area(d)
        if self.angular_index == 0:
            return area, 0.0
        return area / d, (d - 1.0) * area / d


@dataclass(frozen=True)
class WeightedMeasure:
    """Radial density of |x|^(n-d) dmu_delta, i.e. s^(n-1) (1+s^2)^(-delta) ds."""

    n: float
    delta: float

    def density(self, s):
        return s ** (self.n - 1.0) * (1.0 + s * s) ** (-self.delta)


def radial_mode(n, delta):
    """phi_0: g(s) = s^2 - n/(2 delta - n), orthogonal to 1 in dmu_(delta+1)."""
    shift = n / (2.0 * delta - n)
    return TrialFunction(
        radial=lambda s: s * s - shift,
        radial_deriv=lambda s: 2.0 * s,
        angular_index=0,
        label="radial_quadratic",
    )


def angular_mode(alpha, n, d, index=1):
    """phi_i: g(s) = s^eta with eta the positive root of eta(eta+n-2) = (d-1)/alpha^2."""
    if index < 1 or index > d:
        raise PreconditionViolated("angular index must be in 1..d")
    e = eta_root(alpha, n, d)
    return TrialFunction(
        radial=lambda s: s ** e,
        radial_deriv=lambda s: e * s ** (e - 1.0),
        angular_index=index,
        label="angular_power",
    )


def gaussian_poly_trial(coeffs, angular_index=0, label=None):
    """g(s) = sum_k c_k s^k exp(-s^2/2); decays under every admissible weight."""
    coeffs = np.asarray(coeffs, dtype=float)

    def g(s):
        s = np.asarray(s, dtype=float)
        acc = np.zeros_like(s)
        for k, c in enumerate(coeffs):
            acc += c * s ** k
        return acc * np.exp(-0.5 * s * s)

    def gprime(s):
        s = np.asarray(s, dtype=float)
        acc = np.zeros_like(s)
        for k, c in enumerate(coeffs):
            if k > 0:
                acc += c * k * s ** (k - 1.0)
            acc -= c * s ** (k + 1.0)
        return acc * np.exp(-0.5 * s * s)

    return TrialFunction(
        radial=g, radial_deriv=gprime, angular_index=angular_index,
        label=label or f"gaussian_poly_{angular_index}",
    )


def _radial_integral(fn, cfg):
    val, _ = half_line_integral(fn, cfg)
    return val


def _form_integrals(trial, alpha, n, d, delta, cfg):
    """(gradient integral, weighted L2 integral) of the separable trial."""
    mu = WeightedMeasure(n, delta).density
    mu1 = WeightedMeasure(n, delta + 1.0).density
    m0, m1 = trial.angular_moments(d)
    g, gp = trial.radial, trial.radial_deriv

    grad = m0 * alpha ** 2 * _radial_integral(lambda s: gp(s) ** 2 * mu(s), cfg)
    if m1 > 0.0:
        grad += m1 * _radial_integral(lambda s: g(s) ** 2 * mu(s) / (s * s), cfg)
    l2 = m0 * _radial_integral(lambda s: g(s) ** 2 * mu1(s), cfg)
    return grad, l2


def constraint_residual(trial, n, d, delta, cfg=DEFAULT_CFG):
    """Normalised residual of int f |x|^(n-d) dmu_(delta+1) = 0."""
    if trial.angular_index != 0:
        return 0.0  # oint omega_i domega = 0 exactly
    mu1 = WeightedMeasure(n, delta + 1.0).density
    g = trial.radial
    num = _radial_integral(lambda s: g(s) * mu1(s), cfg)
    den = _radial_integral(lambda s: np.abs(g(s)) * mu1(s), cfg)
    return abs(num) / den if den > 0 else 0.0


def project_constraint(trial, n, delta, cfg=DEFAULT_CFG):
    """Subtract the weighted mean so a radial trial satisfies the constraint."""
    if trial.angular_index != 0:
        return trial
    mu1 = WeightedMeasure(n, delta + 1.0).density
    g, gp = trial.radial, trial.radial_deriv
    num = _radial_integral(lambda s: g(s) * mu1(s), cfg)
    den = _radial_integral(lambda s: mu1(s), cfg)
    shift = num / den
    return TrialFunction(
        radial=lambda s: g(s) - shift,
        radial_deriv=gp,
        angular_index=0,
        label=trial.label + "_projected",
    )


def quadratic_form(trial, alpha, n, d, p, cfg=DEFAULT_CFG, check_constraint=True):
    """Q[f] = int |D_alpha f|^2 |x|^(n-d) dmu_delta - (4 p alpha^2/(p-1)) * L2 part.

    delta is tied to p as 2p/(p-1).  Nonnegative on the constraint space
    exactly when 4 p alpha^2/(p-1) <= Lambda.
    """
    delta = 2.0 * p / (p - 1.0)
    if check_constraint and constraint_residual(trial, n, d, delta, cfg) > 1e-10:
        raise ConstraintViolated("trial violates the orthogonality side condition")
    grad, l2 = _form_integrals(trial, alpha, n, d, delta, cfg)
    return grad - 4.0 * p * alpha ** 2 / (p - 1.0) * l2


def rayleigh(trial, alpha, n, d, delta, cfg=DEFAULT_CFG):
    """Rayleigh quotient of an admissible trial; always >= Lambda."""
    if constraint_residual(trial, n, d, delta, cfg) > 1e-10:
        raise ConstraintViolated("trial violates the orthogonality side condition")
    grad, l2 = _form_integrals(trial, alpha, n, d, delta, cfg)
    if l2 <= 0.0:
        raise ConstraintViolated("trial has vanishing weighted L2 norm")
    return grad / l2


def gap_certificate(alpha, n, d, delta, trial_family_size=20, cfg=DEFAULT_CFG,
                    seed=0, tol=1e-6):
    """Check variationally that Lambda is the bottom of the Rayleigh quotients.

    Evaluates phi_0, phi_1 and a seeded family of projected random trials;
    certifies min >= Lambda - tol and that the branch eigenfunction attains
    the minimum within tol.  Returns a JSON-ready report.
    """
    gap = spectral_gap(alpha, n, d, delta)
    rng = np.random.default_rng(seed)

    trials = [radial_mode(n, delta)]
    # s^eta is integrable against these weights only for eta < delta + 1 - n/2
    if eta_root(alpha, n, d) < delta + 1.0 - 0.5 * n:
        trials.append(angular_mode(alpha, n, d))
    for k in range(trial_family_size):
        coeffs = rng.standard_normal(5)
        idx = 0 if k % 2 == 0 else 1
        tr = gaussian_poly_trial(coeffs, idx, label=f"random_{k}_{idx}")
        trials.append(project_constraint(tr, n, delta, cfg))

    quotients = []
    for tr in trials:
        quotients.append((rayleigh(tr, alpha, n, d, delta, cfg), tr.label))
    min_q, argmin = min(quotients, key=lambda item: item[0])

    scale = max(1.0, gap.lam)
    if min_q < gap.lam - tol * scale:
        raise CertificateFailed(
            f"trial {argmin} beats Lambda: {min_q:.9g} < {gap.lam:.9g}", trial=argmin)
    expected = "radial_quadratic" if gap.branch is Branch.RADIAL else "angular_power"
    attained = abs(min_q - gap.lam) <= tol * scale
    if not attained or not argmin.startswith(expected.split("_")[0]):
        raise CertificateFailed(
            f"minimum {min_q:.9g} (by {argmin}) does not match the {gap.branch.value} "
            f"branch value {gap.lam:.9g}", trial=argmin)
    return {
        "alpha": alpha, "n": n, "d": d, "delta": delta,
        "Lambda": gap.lam, "branch": gap.branch.value,
        "min_rayleigh": min_q, "argmin_kind": argmin,
        "trials": len(trials),
    }
