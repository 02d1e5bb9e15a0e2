"""Free energies, critical exponents, cogrowth, and multifractal spectra.

The free energy t(beta) is the unique u solving P(beta psi + u zeta) = 0,
where zeta is a geometric potential (strictly negative), so the pressure is
strictly decreasing in u and bisection is unconditionally safe. Restricting
the pressure to a quotient fiber gives t_N(beta); its value at beta = 0 is
the critical exponent delta_N, which by Bowen's formula is the Hausdorff
dimension of the radial limit set cut out by the quotient.

When zeta is constant the root is available in closed form from a single
pressure evaluation (P(beta psi) shifts linearly in u), which is also what
makes the cogrowth ratio cheap: eta = lambda_N / log(2d - 1).
"""

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .errors import NumericError, ValidationError
from .potentials import GeometricPotential, Potential, combine
from .pressure import full_pressure, restricted_pressure
from .quotients import FiniteQuotient

DEFAULT_U_TOL = 1e-10
DEFAULT_BETA_RANGE = (-4.0, 4.0)
DEFAULT_BETA_STEP = 0.05


def default_beta_grid(lo=None, hi=None, step=None):
    lo = DEFAULT_BETA_RANGE[0] if lo is None else lo
    hi = DEFAULT_BETA_RANGE[1] if hi is None else hi
    step = DEFAULT_BETA_STEP if step is None else step
    if not (hi > lo and step > 0):
        raise ValidationError(f"bad beta grid [{lo}, {hi}] step {step}")
    count = int(round((hi - lo) / step))
    return np.linspace(lo, hi, count + 1)


@dataclass(frozen=True)
class FreeEnergyPoint:
    beta: float
    t: float
    sigma: float
    method: str
    residual: float      # |pressure at the root|, re-evaluated
    evaluations: int


def _check_zeta(zeta):
    if not isinstance(zeta, GeometricPotential):
        # accept plain potentials that happen to be strictly negative
        if isinstance(zeta, Potential) and zeta.max < 0:
            return
        raise ValidationError(
            "zeta must be a geometric potential (all values < 0)")


def _scope_pressure(psi, zeta, quotient, n_max, tol):
    """(evaluate, method) where evaluate(beta, u) is the scope's pressure of
    beta psi + u zeta as a PressureResult."""
    if quotient is None:
        def ev(beta, u):
            return full_pressure(combine((beta, psi), (u, zeta)), tol=tol)
        return ev, "exact-eigenvalue"
    if isinstance(quotient, FiniteQuotient):
        def ev(beta, u):
            return restricted_pressure(combine((beta, psi), (u, zeta)),
                                       quotient, tol=tol)
        return ev, "exact-eigenvalue"

    def ev(beta, u):
        return restricted_pressure(combine((beta, psi), (u, zeta)),
                                   quotient, n_max=n_max,
                                   method="extrapolated")
    return ev, "extrapolated"


def free_energy(psi, zeta, beta, quotient=None, n_max=40,
                u_tol=DEFAULT_U_TOL, u_max=1e6, tol=1e-13):
    """Solve P(beta psi + u zeta, scope) = 0 for u.

    psi may be None (treated as zero). Exact scopes certify
    |pressure at root| <= 1e-9; extrapolated scopes report sigma =
    sigma_lambda / |mean zeta| and certify the residual within 3 sigma.
    """
    _check_zeta(zeta)
    if psi is None:
        psi = Potential.constant(zeta.d, 0.0)
    if psi.d != zeta.d:
        raise ValidationError("psi and zeta have different ranks")
    zbar = float(zeta.values.mean())

    if float(np.ptp(zeta.values)) == 0.0:
        # constant zeta: P(beta psi + u zeta) = P(beta psi) + u zeta, one
        # pressure evaluation gives the root in closed form
        c = -float(zeta.values[0])
        ev, method = _scope_pressure(psi, zeta, quotient, n_max, tol)
        base = ev(beta, 0.0)
        t = base.value / c
        sigma = base.sigma / c
        residual = abs(base.value - t * c)    # exact algebra, ~eps
        return FreeEnergyPoint(float(beta), t, sigma, base.method,
                               residual, 1)

    ev, _ = _scope_pressure(psi, zeta, quotient, n_max, tol)
    evals = 0

    def P(u):
        nonlocal evals, last
        last = ev(beta, u)
        evals += 1
        return last.value

    last = None
    p0 = P(0.0)
    if p0 == 0.0:
        lo = hi = 0.0
        plo = phi = p0
    elif p0 > 0:
        lo, plo = 0.0, p0
        hi, step = 1.0, 1.0
        while (phi := P(hi)) > 0:
            lo, plo = hi, phi
            step *= 2
            hi += step
            if hi > u_max:
                raise NumericError(
                    f"free-energy bracketing failed: pressure still "
                    f"positive at u = {lo:g}")
    else:
        hi, phi = 0.0, p0
        lo, step = -1.0, 1.0
        while (plo := P(lo)) < 0:
            hi, phi = lo, plo
            step *= 2
            lo -= step
            if lo < -u_max:
                raise NumericError(
                    f"free-energy bracketing failed: pressure still "
                    f"negative at u = {hi:g}")
    if plo < phi:
        raise NumericError(
            "pressure failed to decrease across the bracket "
            f"[{lo:g}, {hi:g}]: {plo:g} -> {phi:g}")
    while hi - lo > u_tol:
        mid = 0.5 * (lo + hi)
        if P(mid) >= 0:
            lo = mid
        else:
            hi = mid
    t = 0.5 * (lo + hi)
    final = ev(beta, t)
    evals += 1
    residual = abs(final.value)
    sigma = final.sigma / abs(zbar) if final.method == "extrapolated" \
        else final.sigma
    bound = 1e-9 if final.method == "exact-eigenvalue" \
        else 3 * final.sigma + 1e-9
    if residual > max(bound, float(np.abs(zeta.values).max()) * u_tol):
        raise NumericError(
            f"free-energy root certificate failed: |P| = {residual:g} "
            f"exceeds {bound:g}")
    return FreeEnergyPoint(float(beta), t, sigma, final.method,
                           residual, evals)


def delta(zeta, quotient=None, n_max=40, **kw):
    """Critical exponent of the scope: delta = t(0), the root of
    P(u zeta) = 0. Bowen's formula reads it as the Hausdorff dimension of
    the (radial) limit set."""
    return free_energy(None, zeta, 0.0, quotient=quotient, n_max=n_max, **kw)


def bowen_dimension(zeta, ambient_dim=1.0, tol=1e-13):
    """Dimension of the full limit set: root of s -> P(s zeta).

    Warns when the symbolic value exceeds the ambient dimension, which
    signals that the contraction ratios are not realizable by a conformal
    system in that ambient space."""
    point = delta(zeta, tol=tol)
    if point.t > ambient_dim + 1e-12:
        warnings.warn(
            f"Bowen dimension {point.t:.6f} exceeds the ambient dimension "
            f"{ambient_dim:g}; the ratio data is not geometrically "
            f"realizable there", stacklevel=2)
    return point


@dataclass(frozen=True)
class CogrowthResult:
    eta: float
    sigma: float
    method: str
    fiber_rate: float    # lambda_N at f = 0
    ambient_rate: float  # log(2d - 1)


def cogrowth(quotient, n_max=40, tol=1e-13):
    """eta = delta_N / delta with unit-speed zeta, i.e. the fiber growth
    rate at zero potential over log(2d - 1). Exact for finite quotients."""
    d = quotient.d
    zero = Potential.constant(d, 0.0)
    res = restricted_pressure(zero, quotient, n_max=n_max, tol=tol)
    amb = math.log(2 * d - 1)
    return CogrowthResult(res.value / amb, res.sigma / amb, res.method,
                          res.value, amb)


# ---------------------------------------------------------------------------
# curves

@dataclass
class FreeEnergyCurve:
    betas: np.ndarray
    points: list
    quotient_tag: str = "full"

    @property
    def t_values(self):
        return np.array([p.t for p in self.points])

    @property
    def sigmas(self):
        return np.array([p.sigma for p in self.points])

    def slopes(self):
        """Sampled t'(beta): central differences, one-sided at the ends."""
        return np.gradient(self.t_values, self.betas)

    def convexity_margin(self):
        """min over interior points of (slope increment + noise allowance);
        nonnegative means consistent with convexity."""
        b, t, s = self.betas, self.t_values, self.sigmas
        left = np.diff(t) / np.diff(b)
        inc = np.diff(left)
        # each slope increment mixes three t errors
        noise = (s[:-2] + 2 * s[1:-1] + s[2:]) / np.minimum(
            np.diff(b)[:-1], np.diff(b)[1:])
        if len(inc) == 0:
            return 0.0
        return float((inc + noise + 1e-9).min())

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["beta", "t", "method", "sigma"])
            for p in self.points:
                w.writerow([f"{p.beta:.12g}", f"{p.t:.12g}", p.method,
                            f"{p.sigma:.12g}"])


def free_energy_curve(psi, zeta, betas=None, quotient=None, n_max=40,
                      threads=1, **kw):
    """t(beta) over a grid; grid points are independent and may be
    evaluated in parallel, output order is by index regardless."""
    if betas is None:
        betas = default_beta_grid()
    betas = np.asarray(betas, dtype=float)
    tag = "full" if quotient is None else quotient.describe()
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            points = list(pool.map(
                lambda b: free_energy(psi, zeta, b, quotient=quotient,
                                      n_max=n_max, **kw), betas))
    else:
        points = [free_energy(psi, zeta, b, quotient=quotient,
                              n_max=n_max, **kw) for b in betas]
    return FreeEnergyCurve(betas, points, tag)


@dataclass
class SpectrumCurve:
    """Sampled b(alpha) = -t*(-alpha) = inf_beta (t(beta) + beta alpha).

    flags: "interior" when the infimum is attained strictly inside the beta
    grid, "endpoint" when it touches the grid boundary (value unreliable,
    slope range exhausted), "outside" (NaN) beyond [alpha_minus,
    alpha_plus], "point" for the degenerate single-alpha spectrum."""

    alphas: np.ndarray
    b_values: np.ndarray
    flags: list
    alpha_minus: float
    alpha_plus: float
    attained_beta: np.ndarray
    t0: float
    quotient_tag: str = "full"

    def interior(self):
        keep = [i for i, f in enumerate(self.flags) if f == "interior"]
        return self.alphas[keep], self.b_values[keep]

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha", "b", "flag"])
            for a, b, f in zip(self.alphas, self.b_values, self.flags):
                w.writerow([f"{a:.12g}", f"{b:.12g}", f])


def legendre(curve, alphas=None, n_alphas=None):
    """Discrete Legendre conjugate of a sampled free-energy curve.

    The conjugate is taken over the sampled grid only; alpha endpoints are
    estimates from the extreme sampled slopes and flagged, never silently
    extrapolated. Raises on input that is non-convex beyond the noise
    allowance of its points."""
    margin = curve.convexity_margin()
    if margin < 0:
        raise ValidationError(
            f"free-energy curve is non-convex beyond tolerance "
            f"(margin {margin:g}); refusing Legendre conjugation")
    betas = curve.betas
    ts = curve.t_values
    slopes = curve.slopes()
    t0_idx = int(np.argmin(np.abs(betas)))
    t0 = float(ts[t0_idx])
    a_minus = float(-slopes.max())
    a_plus = float(-slopes.min())
    if a_plus - a_minus < 1e-10:
        # affine t: constant psi/zeta ratio, the spectrum is a point
        alpha = float(-slopes.mean())
        return SpectrumCurve(np.array([alpha]), np.array([t0]), ["point"],
                             alpha, alpha, np.array([betas[t0_idx]]), t0,
                             curve.quotient_tag)
    if alphas is None:
        alphas = np.linspace(a_minus, a_plus, n_alphas or len(betas))
    alphas = np.asarray(alphas, dtype=float)
    vals = np.empty(len(alphas))
    flags = []
    att = np.empty(len(alphas))
    for i, a in enumerate(alphas):
        if a < a_minus - 1e-12 or a > a_plus + 1e-12:
            vals[i] = math.nan
            att[i] = math.nan
            flags.append("outside")
            continue
        obj = ts + betas * a
        j = int(np.argmin(obj))
        vals[i] = float(obj[j])
        att[i] = float(betas[j])
        flags.append("endpoint" if j in (0, len(betas) - 1) else "interior")
    return SpectrumCurve(alphas, vals, flags, a_minus, a_plus, att, t0,
                         curve.quotient_tag)


def level_set_dimension(alpha, psi, zeta, quotient=None, curve=None,
                        betas=None, n_max=40, **kw):
    """Dimension b(alpha) of the level set where the Birkhoff ratio of psi
    to the geometry equals alpha. Returns NaN for alpha outside the sampled
    slope range: the level set is empty there."""
    if curve is None:
        curve = free_energy_curve(psi, zeta, betas=betas, quotient=quotient,
                                  n_max=n_max, **kw)
    spec = legendre(curve, np.array([float(alpha)]))
    if spec.flags == ["point"]:
        return spec.b_values[0] if abs(alpha - spec.alpha_minus) < 1e-9 \
            else math.nan
    return float(spec.b_values[0])
