"""Discrete Riemann-Liouville operators and the extended pathwise integral.

All operators use product integration: the integrand is modeled as
piecewise linear on each grid cell and the singular power kernel is
integrated against that model in closed form.  On uniform grids the cell
formulas collapse to discrete convolutions, so every transform here runs
in O(n log n).

The pathwise integral of f against g pairs a left-sided derivative of
order alpha with a right-sided derivative of order 1-alpha of the
end-compensated integrand.  Conventions follow the real-valued form of the
fractional derivatives; the pairing carries an overall minus sign so that
the result agrees with the classical Young integral (checked against
closed forms in the tests; without the sign the pairing returns the
negative of int f dg).

Evaluating the operators on an internally refined copy of the grid data
(the piecewise-linear interpolant is exactly representable there) drives
the outer quadrature toward the exact integral of the piecewise-linear
pair, which is what the `refine` knobs control.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass
from math import gamma as gamma_fn

import numpy as np
from scipy.signal import fftconvolve

from youngpath.coefficients import evaluate, exact_seminorm, seminorm_estimate
from youngpath.errors import CertificateError, DivergenceError, NonIntegrableError
from youngpath.paths import GridPath, holder_norm

logger = logging.getLogger(__name__)

_FFT_THRESHOLD = 1 << 22


@dataclass(frozen=True)
class FracConfig:
    """Exponent bundle (gamma, kappa, eta, alpha) with the admissibility
    window baked in:

        (1 - gamma*(1+kappa))/gamma < eta < 1 - kappa
        1 - gamma < alpha < gamma*(kappa + eta)

    alpha defaults to the midpoint of its window; computed integrals must
    not depend on the choice (it is a conditioning knob only).
    """

    gamma: float
    kappa: float
    eta: float
    alpha: float | None = None

    def __post_init__(self):
        for name in ("gamma", "kappa", "eta"):
            v = getattr(self, name)
            if not 0.0 < v < 1.0:
                raise ValueError(f"{name} must lie in (0,1), got {v}")
        lo, hi = self.eta_window()
        if not lo < self.eta < hi:
            raise ValueError(f"eta={self.eta} outside admissible window ({lo:.6g}, {hi:.6g})")
        if self.alpha is None:
            object.__setattr__(self, "alpha", 0.5 * (self.alpha_min() + self.alpha_max()))
        if not self.alpha_min() < self.alpha < self.alpha_max():
            raise ValueError(
                f"alpha={self.alpha} outside window ({self.alpha_min():.6g}, {self.alpha_max():.6g})")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must lie in (0,1)")

    def eta_window(self) -> tuple:
        return (max(0.0, (1.0 - self.gamma * (1.0 + self.kappa)) / self.gamma),
                1.0 - self.kappa)

    def alpha_min(self) -> float:
        return 1.0 - self.gamma

    def alpha_max(self) -> float:
        return self.gamma * (self.kappa + self.eta)

    @property
    def q_exponent(self) -> float:
        """Integrability exponent q = eta / (gamma*(kappa+eta))."""
        return self.eta / (self.gamma * (self.kappa + self.eta))


@dataclass(frozen=True)
class FracFunction:
    """Grid samples of a scalar function on [a, b]."""

    values: np.ndarray
    a: float
    b: float

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or len(v) < 2:
            raise ValueError("values must be a 1-D array with >= 2 points")
        if not self.b > self.a:
            raise ValueError("need b > a")
        v = v.copy()
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    @property
    def n_points(self) -> int:
        return len(self.values)

    @property
    def spacing(self) -> float:
        return (self.b - self.a) / (self.n_points - 1)

    @classmethod
    def from_grid_path(cls, path: GridPath, component: int = 0) -> "FracFunction":
        return cls(path.values[:, component], 0.0, path.horizon)


def _conv(a, b):
    if len(a) * len(b) > _FFT_THRESHOLD:
        return fftconvolve(a, b)
    return np.convolve(a, b)


def _refine_linear(values, factor):
    """Piecewise-linear upsampling; the PL interpolant is represented exactly."""
    n = len(values)
    fine = np.arange((n - 1) * factor + 1) / factor
    return np.interp(fine, np.arange(n), values)


def _prefix_power_transform(phi, h, beta):
    """S_i = int_0^{t_i} phi_pl(s) (t_i - s)^beta ds for all i, beta > -1."""
    n = len(phi)
    k = np.arange(n + 1, dtype=float)
    km1 = np.maximum(k - 1.0, 0.0)
    P = (k ** (beta + 1) - km1 ** (beta + 1)) / (beta + 1)
    Q = (k ** (beta + 2) - km1 ** (beta + 2)) / (beta + 2)
    R = Q - km1 * P
    P[0] = R[0] = 0.0
    PR = P - R
    c1 = _conv(phi, R)
    c2 = _conv(phi, PR)
    S = np.zeros(n)
    S[1:] = c1[1:n] + c2[2:n + 1] - phi[0] * PR[2:n + 1]
    return h ** (beta + 1) * S


def _left_derivative_values(f, h, alpha):
    """Compensated left derivative on the grid; exact for piecewise-linear f.

    Node 0 carries the one-sided limit: 0 when f[0] == 0, signed infinity
    otherwise (the value f_a/(t-a)^alpha diverges there).
    """
    n = len(f)
    k = np.arange(n + 1, dtype=float)
    km1 = np.maximum(k - 1.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        Gk = (km1 ** (-alpha) - k ** (-alpha)) / alpha
        Qp = (k ** (1 - alpha) - km1 ** (1 - alpha)) / (1 - alpha)
        Rp = Qp - km1 * Gk
    Gk[0] = Gk[1] = 0.0
    Rp[0] = Rp[1] = 0.0
    GR = Gk - Rp
    W = np.cumsum(Gk)
    c1 = _conv(f, Rp)
    c2 = _conv(f, GR)
    E = np.zeros(n)
    E[1:] = (f[1:] - f[:-1]) * h ** (-alpha) / (1.0 - alpha)
    E[1:] += h ** (-alpha) * (f[1:] * W[1:n] - (c1[1:n] + c2[2:n + 1] - f[0] * GR[2:n + 1]))
    D = np.empty(n)
    idx = np.arange(1, n, dtype=float)
    D[1:] = (f[1:] / (idx * h) ** alpha + alpha * E[1:]) / gamma_fn(1.0 - alpha)
    D[0] = 0.0 if f[0] == 0.0 else np.inf * np.sign(f[0])
    return D


def _warn_if_rougher_than(f, alpha, what):
    """Median-increment exponent heuristic; warn-only precondition check."""
    n = len(f)
    if n < 64:
        return
    lag = 8
    m1 = np.median(np.abs(f[1:] - f[:-1]))
    m8 = np.median(np.abs(f[lag:] - f[:-lag]))
    if m1 <= 0 or m8 <= 0:
        return
    est = np.log(m8 / m1) / np.log(lag)
    if est <= alpha - 0.02:
        warnings.warn(
            f"{what}: input looks about {est:.2f}-Holder at grid scale, "
            f"below the requested order {alpha:.2f}; output may be inaccurate",
            stacklevel=3)


def frac_integral(f: FracFunction, alpha: float, side: str = "left") -> FracFunction:
    """Fractional integral of order alpha, left (from a) or right (from b).

    Product-integration quadrature, exact for piecewise-linear input.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    if side == "left":
        vals = _prefix_power_transform(f.values, f.spacing, alpha - 1.0) / gamma_fn(alpha)
    elif side == "right":
        rev = _prefix_power_transform(f.values[::-1], f.spacing, alpha - 1.0) / gamma_fn(alpha)
        vals = rev[::-1]
    else:
        raise ValueError("side must be 'left' or 'right'")
    return FracFunction(vals, f.a, f.b)


def frac_derivative_left(f: FracFunction, alpha: float) -> FracFunction:
    """Left fractional derivative via the compensated two-term formula,
    with the singular integral treated exactly on each piecewise-linear cell."""
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    _warn_if_rougher_than(f.values, alpha, "frac_derivative_left")
    D = _left_derivative_values(f.values, f.spacing, alpha)
    if not np.all(np.isfinite(D[1:])):
        raise DivergenceError("left fractional derivative produced non-finite values")
    return FracFunction(D, f.a, f.b)


def frac_derivative_right_compensated(g: FracFunction, alpha: float) -> FracFunction:
    """Right-sided derivative of order 1-alpha applied to g - g(b).

    This is the partner of frac_derivative_left(..., alpha) in the
    integral pairing; by reflection it reduces to a left derivative of the
    reversed, end-compensated samples.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0,1)")
    rev = g.values[::-1] - g.values[-1]
    _warn_if_rougher_than(rev, 1.0 - alpha, "frac_derivative_right_compensated")
    D = _left_derivative_values(rev, g.spacing, 1.0 - alpha)[::-1]
    if not np.all(np.isfinite(D[:-1])):
        raise DivergenceError("right fractional derivative produced non-finite values")
    return FracFunction(D, g.a, g.b)


def _weighted_edge_cells(Qnodes, h, p, offset_left):
    """int over K cells of s^p * PL(Q)(s) ds, cells at distances
    [offset, offset+h, ...] from the singular endpoint."""
    K = len(Qnodes) - 1
    s0 = offset_left + np.arange(K) * h
    s1 = s0 + h
    A = Qnodes[:-1]
    B = (Qnodes[1:] - Qnodes[:-1]) / h
    i1 = (s1 ** (p + 1) - s0 ** (p + 1)) / (p + 1)
    i2 = (s1 ** (p + 2) - s0 ** (p + 2)) / (p + 2) - s0 * i1
    return float(np.sum(A * i1 + B * i2))


def _pair_quadrature(f, g, h, alpha, gamma):
    """- int (D^alpha (f - f_a)) (D^{1-alpha} g^{b-}) ds + f_a (g_b - g_a).

    The product integrand vanishes like s^{1-alpha} at the left end and
    like (b-s)^{alpha+gamma-1} at the right end; the outermost cells are
    integrated against those weights, the middle by the trapezoid rule.
    """
    n = len(f)
    F = _left_derivative_values(f - f[0], h, alpha)
    F[0] = 0.0
    Gd = _left_derivative_values(g[::-1] - g[-1], h, 1.0 - alpha)[::-1]
    P = F * Gd
    P[0] = 0.0
    P[-1] = 0.0
    if not np.all(np.isfinite(P)):
        raise DivergenceError("pathwise integrand is not finite on the grid")
    t = np.arange(n) * h
    K = max(2, min(n // 8, n - 3))
    pL = 1.0 - alpha
    pR = alpha + gamma - 1.0
    total = 0.0
    QL = np.empty(K + 1)
    QL[1:] = P[1:K + 1] / t[1:K + 1] ** pL
    QL[0] = 2.0 * QL[1] - QL[2]
    total += _weighted_edge_cells(QL, h, pL, 0.0)
    QR = np.empty(K + 1)
    idxs = n - 2 - np.arange(K)
    QR[1:] = P[idxs] / (t[-1] - t[idxs]) ** pR
    QR[0] = 2.0 * QR[1] - QR[2]
    total += _weighted_edge_cells(QR, h, pR, 0.0)
    mid = P[K:n - K]
    total += h * (np.sum(mid) - 0.5 * mid[0] - 0.5 * mid[-1])
    return f[0] * (g[-1] - g[0]) - total


def _check_refinement_growth(values, what):
    """Declare divergence when coarse-to-fine values grow by 1.5x twice."""
    v = [abs(x) for x in values]
    if v[-1] < 1e-9:
        return
    if v[1] > 1.5 * v[0] and v[2] > 1.5 * v[1]:
        raise NonIntegrableError(
            f"{what}: value grows under refinement ({v[0]:.3g} -> {v[1]:.3g} -> {v[2]:.3g})")


def young_integral_frac(f: FracFunction, g: FracFunction, config: FracConfig,
                        interval: tuple | None = None, refine: int = 4,
                        check_divergence: bool = True) -> float:
    """Pathwise integral int_a^b f dg through the fractional-derivative pairing.

    `interval` restricts to a grid-aligned subinterval.  `refine` evaluates
    the pairing on a linearly upsampled copy of the data (see module notes).
    A two-resolution growth test flags non-integrable products.
    """
    if f.n_points != g.n_points or abs(f.spacing - g.spacing) > 1e-12 * f.spacing:
        raise ValueError("f and g must share their grid")
    fv, gv = f.values, g.values
    if interval is not None:
        ta, tb = interval
        h = f.spacing
        ia = int(round((ta - f.a) / h))
        ib = int(round((tb - f.a) / h))
        if not (0 <= ia < ib < f.n_points):
            raise ValueError("interval must be grid-aligned and inside [a,b]")
        for want, got in ((ta, f.a + ia * h), (tb, f.a + ib * h)):
            if abs(want - got) > 1e-9 * (f.b - f.a):
                raise ValueError("interval endpoints must lie on the grid")
        fv, gv = fv[ia:ib + 1], gv[ia:ib + 1]
    alpha, gamma = config.alpha, config.gamma

    def at_stride(stride):
        fs, gs = fv[::stride], gv[::stride]
        if refine > 1:
            fs = _refine_linear(fs, refine)
            gs = _refine_linear(gs, refine)
        return _pair_quadrature(fs, gs, f.spacing * stride / max(refine, 1), alpha, gamma)

    value = at_stride(1)
    n = len(fv)
    if check_divergence and (n - 1) % 4 == 0 and n > 8:
        coarse = at_stride(4)
        half = at_stride(2)
        _check_refinement_growth([coarse, half, value], "young_integral_frac")
    return value


def _lambda_prefix_values(f, g, h, alpha):
    """The extended integral Lam_t = int_0^t f dg on every grid prefix.

    Expands the right-compensated derivative of g on [0, t] and reorders
    the double integrals so every t-dependence is a power-kernel prefix
    transform; total cost is a handful of convolutions.
    """
    n = len(f)
    F = _left_derivative_values(f - f[0], h, alpha)
    F[0] = 0.0
    if not np.all(np.isfinite(F)):
        raise DivergenceError("extended-integral integrand is not finite")
    u = F * g
    C1 = _prefix_power_transform(u, h, alpha - 1.0)
    C2 = _prefix_power_transform(F, h, alpha - 1.0)
    T1 = C1 - g * C2
    beta = alpha - 2.0
    k = np.arange(n + 1, dtype=float)
    km1 = np.maximum(k - 1.0, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        P = (k ** (beta + 1) - km1 ** (beta + 1)) / (beta + 1)
        Q = (k ** (beta + 2) - km1 ** (beta + 2)) / (beta + 2)
        R = Q - km1 * P
    P[:2] = 0.0
    R[:2] = 0.0
    PR = P - R
    cA1 = _conv(u, R)
    cA2 = _conv(u, PR)
    cB1 = _conv(F, R)
    cB2 = _conv(F, PR)
    A = np.zeros(n)
    B = np.zeros(n)
    A[1:] = cA1[1:n] + cA2[2:n + 1] - u[0] * PR[2:n + 1]
    B[1:] = cB1[1:n] + cB2[2:n + 1] - F[0] * PR[2:n + 1]
    A *= h ** (beta + 1)
    B *= h ** (beta + 1)
    # nearest cell to the singular diagonal, where the compensated product
    # vanishes linearly: exact piecewise-linear treatment
    V = np.zeros(n)
    V[1:] = A[1:] - g[1:] * B[1:] + F[:-1] * (g[:-1] - g[1:]) * h ** (alpha - 1.0) / alpha
    T2 = np.zeros(n)
    T2[1:] = np.cumsum(0.5 * (V[1:] + V[:-1]) * h)
    return f[0] * (g - g[0]) - (T1 + (1.0 - alpha) * T2) / gamma_fn(alpha)


def inv_integrability(y: GridPath, p: float) -> float:
    """int_0^T |y_s|^{-p} ds with power-law treatment of zero crossings.

    Cells where the path touches or crosses zero get a local model
    |y_s| ~ c |s - s0|^beta fitted from the neighboring nodes and
    integrated in closed form; the model declares +inf when beta*p >= 1.
    Zero on a whole cell (positive measure) is +inf outright.
    """
    if p <= 0:
        raise ValueError("p must be positive")
    h = y.spacing
    r = y.radii()
    n = len(r)
    signed = y.values[:, 0] if y.dim == 1 else None

    def one_sided_beta(v_near, v_far, d_near, d_far):
        if v_near <= 0 or v_far <= 0:
            return None
        beta = np.log(v_far / v_near) / np.log(d_far / d_near)
        return min(max(beta, 1e-3), 50.0)

    def model_mass(c, beta, dist):
        # int_0^dist (c s^beta)^{-p} ds
        if beta * p >= 1.0:
            return np.inf
        return c ** (-p) * dist ** (1.0 - beta * p) / (1.0 - beta * p)

    total = 0.0
    singular_cells = set()
    # zero nodes
    zero_nodes = [i for i in range(n) if r[i] == 0.0]
    for i in zero_nodes:
        if i + 1 < n and r[i + 1] == 0.0:
            return np.inf
        if i > 0:
            singular_cells.add(i - 1)
        if i + 1 < n:
            singular_cells.add(i)
    # sign-change cells (scalar paths only)
    crossings = {}
    if signed is not None:
        for i in range(n - 1):
            if signed[i] * signed[i + 1] < 0:
                s0 = i * h + h * abs(signed[i]) / (abs(signed[i]) + abs(signed[i + 1]))
                crossings[i] = s0
                singular_cells.add(i)
    for i in sorted(singular_cells):
        if i in crossings:
            s0 = crossings[i]
            d_near = s0 - i * h
            left = None
            if i >= 1:
                left = one_sided_beta(r[i], r[i - 1], d_near, s0 - (i - 1) * h)
            beta = left if left is not None else 1.0
            total += model_mass(r[i] / d_near ** beta if d_near > 0 else np.inf, beta, d_near)
            d_near = (i + 1) * h - s0
            right = None
            if i + 2 < n:
                right = one_sided_beta(r[i + 1], r[i + 2], d_near, (i + 2) * h - s0)
            beta = right if right is not None else 1.0
            total += model_mass(r[i + 1] / d_near ** beta if d_near > 0 else np.inf, beta, d_near)
        else:
            # cell adjacent to an exact zero node
            zero_at_left = r[i] == 0.0
            j = i if not zero_at_left else i + 1          # nearest nonzero node
            j2 = j - 1 if not zero_at_left else j + 1     # next node outward
            if not 0 <= j2 < n or r[j] <= 0:
                beta = 1.0
            else:
                beta = one_sided_beta(r[j], r[j2], h, 2 * h) or 1.0
            total += model_mass(r[j] / h ** beta, beta, h)
        if not np.isfinite(total):
            return np.inf
    # regular cells by the trapezoid rule
    with np.errstate(divide="ignore"):
        w = r ** (-p)
    for i in range(n - 1):
        if i in singular_cells:
            continue
        if not (np.isfinite(w[i]) and np.isfinite(w[i + 1])):
            return np.inf
        total += 0.5 * (w[i] + w[i + 1]) * h
    return float(total)


def _sigma_columns(y: GridPath, coeff):
    """sigma(y) evaluated along the path, as an (n, m) array."""
    vals = evaluate(coeff, y.values if y.dim > 1 or coeff.output_dim > 1 else y.values[:, 0])
    vals = np.asarray(vals, dtype=float)
    if vals.ndim == 1:
        vals = vals[:, None]
    return vals


def lambda_integral(y: GridPath, x: GridPath, coeff, config: FracConfig,
                    refine: int = 8, check_divergence: bool = True) -> GridPath:
    """Extended integral path t -> int_0^t sigma(y_s) dx_s on the grid.

    Requires the integrability certificate: int |y|^{-eta} must be finite
    (CertificateError otherwise).  The integral starts at zero and is
    computed against a scalar driver.
    """
    if x.dim != 1:
        raise ValueError("the driver must be scalar")
    if y.n_points != x.n_points or abs(y.horizon - x.horizon) > 1e-12 * x.horizon:
        raise ValueError("y and x must share their grid")
    f_cols = _sigma_columns(y, coeff)
    if not f_cols.any():
        # identically vanishing integrand: the integral is zero with no
        # certificate needed (the zero path is always a fixed point)
        return GridPath(np.zeros_like(f_cols), y.horizon)
    cert = inv_integrability(y, config.eta)
    if not np.isfinite(cert):
        raise CertificateError(
            f"int |y|^-eta diverges (eta={config.eta}); the extended integral is not certified")
    xv = x.values[:, 0]
    h = y.spacing

    def compute(stride, factor):
        cols = []
        for j in range(f_cols.shape[1]):
            fj = f_cols[::stride, j]
            gj = xv[::stride]
            if factor > 1:
                fj = _refine_linear(fj, factor)
                gj = _refine_linear(gj, factor)
            lam = _lambda_prefix_values(fj, gj, h * stride / factor, config.alpha)
            cols.append(lam[::factor] if factor > 1 else lam)
        return np.stack(cols, axis=1)

    out = compute(1, refine)
    if check_divergence and (y.n_points - 1) % 4 == 0 and y.n_points > 8:
        v4 = compute(4, refine)[-1]
        v2 = compute(2, refine)[-1]
        _check_refinement_growth(
            [np.linalg.norm(v4), np.linalg.norm(v2), np.linalg.norm(out[-1])],
            "lambda_integral")
    return GridPath(out, y.horizon)


def lambda_bound(y: GridPath, x: GridPath, coeff, config: FracConfig,
                 seminorm: float | None = None) -> float:
    """A-priori Holder bound for the extended integral:

        |x|_gamma * ( sup|sigma(y)| + N |y|_gamma^(kappa+eta) *
                      (int |y|^-q)^(gamma*(kappa+eta)) ),   q = eta/(gamma*(kappa+eta)).

    All factors are measured discretely; +inf when the integrability
    integral diverges.  The measured Holder norm of the integral path is
    expected to stay below a fixed multiple of this value.
    """
    if seminorm is None:
        seminorm = exact_seminorm(coeff)
        if seminorm is None:
            seminorm = seminorm_estimate(coeff, 4096, float(np.max(y.radii())) + 1.0, seed=0).value
    gamma, kappa, eta = config.gamma, config.kappa, config.eta
    x_norm = holder_norm(x, gamma).norm
    sigma_sup = float(np.max(np.linalg.norm(_sigma_columns(y, coeff), axis=1)))
    y_norm = holder_norm(y, gamma).norm
    q = config.q_exponent
    integral = inv_integrability(y, q)
    if not np.isfinite(integral):
        return np.inf
    return x_norm * (sigma_sup + seminorm * y_norm ** (kappa + eta)
                     * integral ** (gamma * (kappa + eta)))
