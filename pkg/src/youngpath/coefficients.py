"""Power-type radial coefficient fields sigma(xi) = rho(|xi|).

A coefficient is either a pure power C|xi|^kappa or a user/builtin radial
profile rho with the same kappa-type behavior at zero.  All fields vanish
at the origin and are Holder of order kappa but not Lipschitz there; the
`regularize` operation clamps the profile below a dyadic radius 2^{-n},
which restores Lipschitz continuity near zero without increasing the
kappa-Holder seminorm.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import quad

QUAD_INNER_FLOOR = 1e-15


def _as_radii(xi, m):
    xi = np.asarray(xi, dtype=float)
    if xi.ndim == 0:
        return np.abs(xi)[None], "scalar"
    if xi.ndim == 1 and m == 1:
        return np.abs(xi), "flat"
    if xi.ndim == 1 and xi.shape[0] == m:
        return np.linalg.norm(xi)[None], "scalar"
    if xi.ndim == 2 and xi.shape[1] == m:
        return np.linalg.norm(xi, axis=1), "flat"
    raise ValueError(f"cannot interpret input of shape {xi.shape} for output_dim {m}")


@dataclass(frozen=True)
class Coefficient:
    """Radial vector field sigma(xi) = rho(|xi|) with rho(0) = 0.

    kind "power" is C*r^kappa; kind "radial" carries an explicit scalar
    profile rho(r).  For output_dim m > 1 a scalar profile is emitted along
    the first coordinate axis.
    """

    kind: str
    kappa: float
    scale: float = 1.0
    profile: Callable[[float], float] | None = None
    output_dim: int = 1
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in ("power", "radial"):
            raise ValueError(f"unknown kind {self.kind!r}")
        if not 0.0 < self.kappa < 1.0:
            raise ValueError("kappa must lie in (0,1)")
        if self.kind == "power" and self.scale <= 0:
            raise ValueError("power scale must be positive")
        if self.kind == "radial":
            if self.profile is None:
                raise ValueError("radial kind requires a profile")
            at0 = float(self.profile(0.0))
            if at0 != 0.0:
                raise ValueError(f"profile must vanish at 0, got {at0}")
        if self.output_dim < 1:
            raise ValueError("output_dim must be >= 1")

    def radial(self, r):
        """Scalar radial value rho(r) for r >= 0 (vectorized)."""
        r = np.asarray(r, dtype=float)
        if self.kind == "power":
            return self.scale * r ** self.kappa
        return np.vectorize(self.profile, otypes=[float])(r)

    def __call__(self, xi):
        return evaluate(self, xi)


@dataclass(frozen=True)
class RegularizedCoefficient:
    """The base coefficient with its profile frozen below radius 2^{-level}."""

    base: Coefficient
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ValueError("level must be >= 0")

    @property
    def threshold(self) -> float:
        return 2.0 ** (-self.level)

    @property
    def kappa(self) -> float:
        return self.base.kappa

    @property
    def output_dim(self) -> int:
        return self.base.output_dim

    def radial(self, r):
        r = np.asarray(r, dtype=float)
        return self.base.radial(np.maximum(r, self.threshold))

    def __call__(self, xi):
        return evaluate(self, xi)


@dataclass(frozen=True)
class SeminormEstimate:
    value: float
    samples: int
    max_ratio_pair: tuple


def evaluate(coeff, xi):
    """Pointwise field value sigma(xi); accepts scalars, m-vectors, or batches.

    Scalar-profile coefficients with output_dim m > 1 return rho(|xi|)*e1.
    """
    m = coeff.output_dim
    r, shape = _as_radii(xi, m)
    rho = coeff.radial(r)
    if m == 1:
        out = rho
        if shape == "scalar":
            return float(out[0])
        return out
    vec = np.zeros(r.shape + (m,))
    vec[..., 0] = rho
    if shape == "scalar":
        return vec[0]
    return vec


def exact_seminorm(coeff) -> float | None:
    """The kappa-Holder seminorm in closed form, where one exists.

    For C*r^kappa the difference ratio is identically C; clamping below a
    threshold only shrinks ratios, so regularized powers share the value.
    """
    base = coeff.base if isinstance(coeff, RegularizedCoefficient) else coeff
    if base.kind == "power":
        return base.scale
    return None


def _ratio(coeff, r1, r2):
    f1 = np.asarray(coeff.radial(r1), dtype=float)
    f2 = np.asarray(coeff.radial(r2), dtype=float)
    num = np.abs(f2 - f1)
    den = np.abs(r2 ** coeff.kappa - r1 ** coeff.kappa)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = num / den
    out[~np.isfinite(out)] = -np.inf
    return out


def seminorm_estimate(coeff, n_samples: int, radius: float, seed: int = 0) -> SeminormEstimate:
    """Sampled lower bound of the kappa-Holder seminorm.

    Radiality reduces the sup over vector pairs to a sup over radius pairs,
    so the sampler draws radius pairs in (0, radius] and augments them with
    a dense 1-D scan (all pairs on a coarse grid plus adjacent pairs on a
    fine grid, which captures the local-derivative sup).
    """
    if n_samples < 2:
        raise ValueError("n_samples must be >= 2")
    if radius <= 0:
        raise ValueError("radius must be positive")
    rng = np.random.default_rng(seed)
    r1 = rng.uniform(0.0, radius, n_samples)
    r2 = rng.uniform(0.0, radius, n_samples)
    keep = np.abs(r1 - r2) > 1e-14 * radius
    if not keep.any():
        raise ValueError("degenerate sampling: all pairs have equal radii")
    r1, r2 = r1[keep], r2[keep]
    cand_r1 = [r1]
    cand_r2 = [r2]
    coarse = np.linspace(radius / 512, radius, 512)
    i, j = np.triu_indices(len(coarse), k=1)
    cand_r1.append(coarse[i])
    cand_r2.append(coarse[j])
    fine = np.linspace(radius / 4096, radius, 4096)
    cand_r1.append(fine[:-1])
    cand_r2.append(fine[1:])
    best = -np.inf
    best_pair = (0.0, 0.0)
    total = 0
    for a, b in zip(cand_r1, cand_r2):
        total += len(a)
        ratios = _ratio(coeff, a, b)
        k = int(np.argmax(ratios))
        if ratios[k] > best:
            best = float(ratios[k])
            best_pair = (float(a[k]), float(b[k]))
    return SeminormEstimate(value=best, samples=total, max_ratio_pair=best_pair)


def regularize(coeff: Coefficient, n: int) -> RegularizedCoefficient:
    """Clamp the profile to its value at radius 2^{-n} for |xi| <= 2^{-n}."""
    return RegularizedCoefficient(base=coeff, level=n)


def interpolation_bound(coeff, xi1, xi2, eta: float, seminorm: float | None = None):
    """Two sides of the singular interpolation inequality.

    lhs = |sigma(xi2) - sigma(xi1)|,
    rhs = kappa/(kappa+eta) * N * (|xi2|^-eta + |xi1|^-eta) * |xi2-xi1|^(kappa+eta),
    valid for 0 <= eta <= 1-kappa and nonzero arguments; lhs <= rhs.
    Radiality makes lhs = |rho(|xi2|) - rho(|xi1|)| in every dimension.
    """
    kappa = coeff.kappa
    if not 0.0 <= eta <= 1.0 - kappa:
        raise ValueError(f"eta must lie in [0, {1 - kappa}]")
    xi1 = np.atleast_1d(np.asarray(xi1, dtype=float))
    xi2 = np.atleast_1d(np.asarray(xi2, dtype=float))
    r1 = float(np.linalg.norm(xi1))
    r2 = float(np.linalg.norm(xi2))
    if r1 == 0.0 or r2 == 0.0:
        raise ValueError("arguments must be nonzero")
    if seminorm is None:
        seminorm = exact_seminorm(coeff)
        if seminorm is None:
            seminorm = seminorm_estimate(coeff, 4096, max(r1, r2) * 2, seed=0).value
    lhs = abs(float(coeff.radial(r2)) - float(coeff.radial(r1)))
    rhs = (kappa / (kappa + eta)) * seminorm * (r2 ** (-eta) + r1 ** (-eta)) \
        * float(np.linalg.norm(xi2 - xi1)) ** (kappa + eta)
    return lhs, rhs


@dataclass(frozen=True)
class HypothesisReport:
    """Report-valued hypothesis checks; solvers warn on failures but proceed."""

    gamma: float
    kappa: float
    regime_product: float           # gamma * (1 + kappa)
    regime: str                     # "super_young" or "classical_young"
    monotone_increasing: bool
    max_profile_jump: float
    recip_integral: float           # int_0^1 dr / rho(r)
    recip_integrable: bool
    power_lower_c: float            # inf of rho(r) / r^kappa on the sample
    power_lower_ok: bool
    gradient_regularity: str = "assumed"

    def ok(self) -> bool:
        return (self.regime == "super_young" and self.monotone_increasing
                and self.recip_integrable and self.power_lower_ok)


def recip_profile_integral(coeff, upper: float = 1.0) -> float:
    """int_0^upper dr / rho(r) by substitution u = r^(1-kappa).

    The substitution flattens the kappa-power singularity at zero; the
    inner limit is floored at 1e-15 and checked against a tighter floor so
    genuinely divergent profiles report +inf instead of a junk value.
    """
    kappa = coeff.kappa
    ex = 1.0 / (1.0 - kappa)

    def w(u):
        r = u ** ex
        rho = float(np.linalg.norm(np.atleast_1d(coeff.radial(r))))
        if rho == 0.0:
            return np.inf
        return ex * u ** (ex - 1.0) / rho

    hi = upper ** (1.0 - kappa)
    try:
        val, _ = quad(w, QUAD_INNER_FLOOR, hi, limit=200)
        val_tight, _ = quad(w, QUAD_INNER_FLOOR * 1e3, hi, limit=200)
    except Exception:
        return np.inf
    if not np.isfinite(val) or abs(val - val_tight) > 1e-6 * (1 + abs(val)):
        return np.inf
    return float(val)


def check_hypotheses(coeff, gamma: float, radius: float = 1.0) -> HypothesisReport:
    """Numeric witnesses for the structural hypotheses the solvers rely on:
    the regime classification gamma*(1+kappa) vs 1, monotone continuity of
    the profile, integrability of 1/rho near zero, and the power-type
    lower bound |sigma(xi)| >= c |xi|^kappa.
    """
    base = coeff.base if isinstance(coeff, RegularizedCoefficient) else coeff
    product = gamma * (1.0 + base.kappa)
    regime = "super_young" if product < 1.0 else "classical_young"
    r = np.linspace(radius / 2048, radius, 2048)
    vals = np.asarray([float(np.linalg.norm(np.atleast_1d(coeff.radial(x)))) for x in r])
    jumps = np.abs(np.diff(vals))
    monotone = bool(np.all(np.diff(vals) >= -1e-12 * (1 + vals[:-1])))
    integral = recip_profile_integral(base, upper=radius)
    lower = vals / r ** base.kappa
    c = float(np.min(lower))
    return HypothesisReport(
        gamma=gamma,
        kappa=base.kappa,
        regime_product=product,
        regime=regime,
        monotone_increasing=monotone,
        max_profile_jump=float(np.max(jumps)),
        recip_integral=integral,
        recip_integrable=bool(np.isfinite(integral)),
        power_lower_c=c,
        power_lower_ok=c > 0.0,
    )


# ---------------- builtin radial profiles and config-text parsing ----------------

def _pure_power(kappa, C=1.0):
    return lambda r: C * r ** kappa


def _capped_power(kappa, C=1.0, cap=1.0):
    return lambda r: min(C * r ** kappa, cap)


def _power_plus_linear(kappa, C=1.0, b=1.0):
    return lambda r: C * r ** kappa + b * r


BUILTIN_PROFILES = {
    "pure_power": _pure_power,
    "capped_power": _capped_power,
    "power_plus_linear": _power_plus_linear,
}


def parse_coefficient(text: str) -> Coefficient:
    """Parse a coefficient spec like ``power C=1.0 kappa=0.5`` or
    ``radial kappa=0.5 profile=capped_power C=2 cap=1.5 m=1``."""
    tokens = text.split()
    if not tokens:
        raise ValueError("empty coefficient spec")
    kind = tokens[0]
    kv = {}
    for tok in tokens[1:]:
        if "=" not in tok:
            raise ValueError(f"expected key=value, got {tok!r}")
        k, v = tok.split("=", 1)
        kv[k] = v
    m = int(kv.pop("m", 1))
    if kind == "power":
        return Coefficient(kind="power", kappa=float(kv.pop("kappa")),
                           scale=float(kv.pop("C", 1.0)), output_dim=m)
    if kind == "radial":
        kappa = float(kv.pop("kappa"))
        name = kv.pop("profile")
        if name not in BUILTIN_PROFILES:
            raise ValueError(f"unknown profile {name!r}; builtins: {sorted(BUILTIN_PROFILES)}")
        params = {k: float(v) for k, v in kv.items()}
        profile = BUILTIN_PROFILES[name](kappa, **params)
        return Coefficient(kind="radial", kappa=kappa, profile=profile,
                           output_dim=m, name=name, params=params)
    raise ValueError(f"unknown coefficient kind {kind!r}")


def format_coefficient(coeff) -> str:
    """Inverse of parse_coefficient, for provenance headers."""
    if isinstance(coeff, RegularizedCoefficient):
        return format_coefficient(coeff.base) + f" [regularized n={coeff.level}]"
    if coeff.kind == "power":
        out = f"power C={coeff.scale!r} kappa={coeff.kappa!r}"
    else:
        extra = "".join(f" {k}={v!r}" for k, v in sorted(coeff.params.items()))
        out = f"radial kappa={coeff.kappa!r} profile={coeff.name}{extra}"
    if coeff.output_dim != 1:
        out += f" m={coeff.output_dim}"
    return out
