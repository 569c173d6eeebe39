"""Constitutive closures for the generalized damped p-system.

The system evolves specific volume v > 0 and velocity / normalized flux u:

    v_t - u_x = 0
    u_t + p(v)_x = -alpha*u + (g(u) f(v))_x

A ModelClosure packages the constitutive functions p, g, f with analytic
derivatives, the damping constant alpha and the admissible state box.  Two
physical presets are provided: the two-moment radiative-transfer closure
(``m1_closure``) and the gamma-law gas closure (``gamma_law_closure``).

All evaluators accept scalars or numpy arrays and are pure functions, so a
closure may be shared freely between concurrent workers.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

__all__ = [
    "ModelClosure",
    "AssumptionReport",
    "HyperbolicityError",
    "m1_closure",
    "gamma_law_closure",
    "linear_closure",
    "eddington_factor",
    "radiative_pressure_1d",
    "check_assumptions",
    "characteristic_speeds",
    "wave_speed_bound",
]


class HyperbolicityError(ValueError):
    """Raised when a state has no real characteristic speeds."""


@dataclass(frozen=True)
class ModelClosure:
    """Constitutive functions and admissible box for one model.

    ``p``/``dp``/``d2p`` act on v, ``g``/``dg``/``d2g`` on u, ``f``/``df``
    on v.  ``d3p``/``d4p`` are optional; they are only needed to build the
    third and fourth profile derivatives analytically and fall back to
    finite differences of ``d2p`` when absent.
    """

    name: str
    alpha: float
    p: Callable
    dp: Callable
    d2p: Callable
    g: Callable
    dg: Callable
    d2g: Callable
    f: Callable
    df: Callable
    v_range: tuple[float, float]
    u_range: tuple[float, float]
    d3p: Callable | None = field(default=None, repr=False)
    d4p: Callable | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.alpha <= 0.0:
            raise ValueError("damping constant alpha must be positive")
        if self.v_range[0] <= 0.0 or self.v_range[0] >= self.v_range[1]:
            raise ValueError("v_range must be a nonempty interval of positive v")

    def admissible(self, v, u) -> bool:
        """True when every (v, u) sample lies inside the admissible box."""
        v = np.asarray(v)
        u = np.asarray(u)
        return bool(
            np.all(v >= self.v_range[0])
            and np.all(v <= self.v_range[1])
            and np.all(u >= self.u_range[0])
            and np.all(u <= self.u_range[1])
        )


@dataclass(frozen=True)
class AssumptionReport:
    """Result of scanning the structural assumptions over a state box."""

    hyperbolic_ok: bool
    sign_ok: bool
    smoothness_ok: bool
    min_discriminant: float
    min_gfprime_minus_pprime: float


def eddington_factor(u):
    """Variable Eddington factor chi(u) = (3 + 4u^2) / (5 + 2 sqrt(4 - 3u^2)).

    Interpolates between the isotropic limit chi(0) = 1/3 and the
    free-streaming limit chi(1) = 1.  Requires |u| <= 1.
    """
    u = np.asarray(u, dtype=float)
    if np.any(np.abs(u) > 1.0):
        raise ValueError("eddington_factor requires |u| <= 1")
    val = (3.0 + 4.0 * u**2) / (5.0 + 2.0 * np.sqrt(4.0 - 3.0 * u**2))
    return val if val.ndim else float(val)


def radiative_pressure_1d(rho, u):
    """Scalar radiative pressure P = chi(u) * rho in one space dimension.

    The rank-2 pressure tensor collapses to (1/2)((1-chi) + (3chi-1)) rho
    on the line, i.e. P lies between rho/3 (isotropic) and rho (free
    streaming).
    """
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0.0):
        raise ValueError("radiative energy rho must be nonnegative")
    val = eddington_factor(u) * rho
    return val if np.ndim(val) else float(val)


def m1_closure(sigma: float = 1.0) -> ModelClosure:
    """Two-moment radiative-transfer closure in Lagrangian form.

    p(v) = 1/(3v),  g(u) = u^2 sqrt(4-3u^2) / (2 + sqrt(4-3u^2)),
    f(v) = 1/v, with damping constant alpha = sigma (the opacity).

    The default box keeps v away from vacuum and |u| away from the square
    root singularity at |u| = 2/sqrt(3).
    """
    if sigma <= 0.0:
        raise ValueError("opacity sigma must be positive")

    def p(v):
        return 1.0 / (3.0 * v)

    def dp(v):
        return -1.0 / (3.0 * v**2)

    def d2p(v):
        return 2.0 / (3.0 * v**3)

    def d3p(v):
        return -2.0 / v**4

    def d4p(v):
        return 8.0 / v**5

    def g(u):
        s = np.sqrt(4.0 - 3.0 * np.asarray(u, dtype=float) ** 2)
        return u**2 * s / (2.0 + s)

    def dg(u):
        u = np.asarray(u, dtype=float)
        s = np.sqrt(4.0 - 3.0 * u**2)
        return 2.0 * u * s / (2.0 + s) - 6.0 * u**3 / (s * (2.0 + s) ** 2)

    def d2g(u):
        u = np.asarray(u, dtype=float)
        s = np.sqrt(4.0 - 3.0 * u**2)
        w = 2.0 + s
        return (
            2.0 * s / w
            - 30.0 * u**2 / (s * w**2)
            - 18.0 * u**4 / (s**3 * w**2)
            - 36.0 * u**4 / (s**2 * w**3)
        )

    def f(v):
        return 1.0 / np.asarray(v, dtype=float)

    def df(v):
        return -1.0 / np.asarray(v, dtype=float) ** 2

    return ModelClosure(
        name="m1",
        alpha=sigma,
        p=p,
        dp=dp,
        d2p=d2p,
        d3p=d3p,
        d4p=d4p,
        g=g,
        dg=dg,
        d2g=d2g,
        f=f,
        df=df,
        v_range=(0.05, 20.0),
        u_range=(-0.99, 0.99),
    )


def _zero(x):
    return np.zeros_like(np.asarray(x, dtype=float))


def _one(x):
    return np.ones_like(np.asarray(x, dtype=float))


def gamma_law_closure(gamma: float = 2.0, alpha: float = 1.0) -> ModelClosure:
    """Polytropic gas closure p(v) = v^-gamma with g == 0 and f == 1.

    With g identically zero the flux correction term vanishes and the
    system is exactly the compressible Euler equations with linear
    damping; the sign assumption on g*f' - p' then reduces to -p' > 0.
    """
    if gamma < 1.0:
        raise ValueError("adiabatic exponent gamma must be >= 1")

    def p(v):
        return np.asarray(v, dtype=float) ** (-gamma)

    def dp(v):
        return -gamma * np.asarray(v, dtype=float) ** (-gamma - 1.0)

    def d2p(v):
        return gamma * (gamma + 1.0) * np.asarray(v, dtype=float) ** (-gamma - 2.0)

    def d3p(v):
        return (
            -gamma
            * (gamma + 1.0)
            * (gamma + 2.0)
            * np.asarray(v, dtype=float) ** (-gamma - 3.0)
        )

    def d4p(v):
        return (
            gamma
            * (gamma + 1.0)
            * (gamma + 2.0)
            * (gamma + 3.0)
            * np.asarray(v, dtype=float) ** (-gamma - 4.0)
        )

    return ModelClosure(
        name="gamma_law",
        alpha=alpha,
        p=p,
        dp=dp,
        d2p=d2p,
        d3p=d3p,
        d4p=d4p,
        g=_zero,
        dg=_zero,
        d2g=_zero,
        f=_one,
        df=_zero,
        v_range=(0.05, 20.0),
        u_range=(-10.0, 10.0),
    )


def linear_closure(alpha: float = 1.0) -> ModelClosure:
    """Linear pressure p(v) = -v with g == 0, f == 1.

    The self-similar profile equation becomes linear and has an erf-shaped
    closed form, which makes this closure the reference case for solver
    validation.
    """

    def p(v):
        return -np.asarray(v, dtype=float)

    def dp(v):
        return -_one(v)

    return ModelClosure(
        name="linear",
        alpha=alpha,
        p=p,
        dp=dp,
        d2p=_zero,
        d3p=_zero,
        d4p=_zero,
        g=_zero,
        dg=_zero,
        d2g=_zero,
        f=_one,
        df=_zero,
        v_range=(0.05, 20.0),
        u_range=(-10.0, 10.0),
    )


def check_assumptions(
    closure: ModelClosure,
    v_box: tuple[float, float],
    u_box: tuple[float, float],
    n_samples: int = 256,
) -> AssumptionReport:
    """Scan the structural assumptions over a state box by dense sampling.

    Checks, on an ``n_samples`` x ``n_samples`` grid:

    * sign condition:   inf g(u) f'(v) - p'(v) > 0
    * hyperbolicity:    inf (g'(u) f(v))^2 - 4 (p'(v) - g(u) f'(v)) > 0
    * smoothness/sign:  g(0) = g'(0) = 0 and p' < 0 on the box

    Dense sampling is not a rigorous enclosure, but the closures at hand
    are smooth and the boxes small; 256 points per axis resolves them.
    """
    if n_samples < 2:
        raise ValueError("need at least 2 samples per axis")
    if v_box[0] > v_box[1] or u_box[0] > u_box[1]:
        raise ValueError("empty state box")

    v = np.linspace(v_box[0], v_box[1], n_samples)
    u = np.linspace(u_box[0], u_box[1], n_samples)
    vv, uu = np.meshgrid(v, u, indexing="ij")

    dp = closure.dp(vv)
    gf_sign = closure.g(uu) * closure.df(vv) - dp
    disc = (closure.dg(uu) * closure.f(vv)) ** 2 - 4.0 * (
        dp - closure.g(uu) * closure.df(vv)
    )

    min_sign = float(np.min(gf_sign))
    min_disc = float(np.min(disc))
    g0 = float(np.asarray(closure.g(0.0)))
    dg0 = float(np.asarray(closure.dg(0.0)))
    smooth = (
        g0 == 0.0
        and dg0 == 0.0
        and bool(np.all(dp < 0.0))
        and bool(np.all(np.isfinite(gf_sign)))
        and bool(np.all(np.isfinite(disc)))
    )

    return AssumptionReport(
        hyperbolic_ok=min_disc > 0.0,
        sign_ok=min_sign > 0.0,
        smoothness_ok=smooth,
        min_discriminant=min_disc,
        min_gfprime_minus_pprime=min_sign,
    )


def characteristic_speeds(closure: ModelClosure, v, u):
    """Real characteristic speeds (lam_minus, lam_plus) of the flux Jacobian.

    The flux (-u, p(v) - g(u) f(v)) has Jacobian eigenvalues solving

        lam^2 + lam * g'(u) f(v) + p'(v) - g(u) f'(v) = 0.

    Raises HyperbolicityError when the discriminant is negative.
    """
    v = np.asarray(v, dtype=float)
    u = np.asarray(u, dtype=float)
    b = closure.dg(u) * closure.f(v)
    c = closure.dp(v) - closure.g(u) * closure.df(v)
    disc = b * b - 4.0 * c
    if np.any(disc < 0.0):
        bad = np.argmax(disc < 0.0)
        vb = float(np.ravel(v)[bad]) if v.ndim else float(v)
        ub = float(np.ravel(u)[bad]) if u.ndim else float(u)
        raise HyperbolicityError(
            f"hyperbolicity lost at state (v={vb:.6g}, u={ub:.6g}): "
            f"discriminant {float(np.min(disc)):.6g} < 0"
        )
    root = np.sqrt(disc)
    lam_minus = 0.5 * (-b - root)
    lam_plus = 0.5 * (-b + root)
    if lam_minus.ndim == 0:
        return float(lam_minus), float(lam_plus)
    return lam_minus, lam_plus


def wave_speed_bound(closure: ModelClosure, v, u):
    """Elementwise max |lambda| over both characteristic families."""
    lam_minus, lam_plus = characteristic_speeds(closure, v, u)
    return np.maximum(np.abs(lam_minus), np.abs(lam_plus))
