"""Form-factor terms S_n and the singular probe integral.

The 2n-dimensional integrals live on (0,1)^{2n} with endpoint weights
x^(-1/2)(1-x)^(1/2) on the x axes and y^(1/2)(1-y)^(-1/2)(1-kappa y)^(-1/2)
on the y axes.  The substitution x = sin^2(pi t / 2) absorbs both endpoint
exponents, leaving smooth transformed axes that a single Gauss-Legendre
node set handles for every axis.  Dimensions beyond four (n >= 3) switch
to importance-sampled Monte Carlo with Beta-distributed coordinates.

Near a resonant direction (kappa^n approaching the positive real axis from
inside), the tensor product alone cannot resolve the (1 - kappa^n u)^-(l+1)
spike.  There the resonant factor is expanded as a geometric series and
each power reduces to one-dimensional node sums reused across all orders;
the two strategies are cross-checked against each other at moderate radii
in the test suite.
"""
from __future__ import annotations

import cmath
import math
import threading
import warnings
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConvergenceError, DomainError, PrecisionWarning

_TINY = 1e-300
_SERIES_M_CAP = 1 << 17
_RESONANT_MIN_ABS = 0.9


@dataclass(frozen=True)
class QuadratureSpec:
    """How to evaluate one of the multiple integrals.

    tensor_gauss is accepted only for n <= 2 (dimension 2n <= 4);
    monte_carlo works for any n and is the only route beyond n = 2.
    The seed feeds a counter-based generator, so a given
    (seed, mc_samples, dimension) triple yields an identical sample stream
    regardless of how callers schedule the work.
    """

    method: str = "tensor_gauss"
    nodes_per_dim: int = 64
    mc_samples: int = 200_000
    seed: int = 12345
    target_rel_error: float = 1e-9

    def __post_init__(self):
        if self.method not in ("tensor_gauss", "monte_carlo"):
            raise DomainError(f"unknown quadrature method {self.method!r}")
        if self.nodes_per_dim < 2:
            raise DomainError("nodes_per_dim must be >= 2")
        if self.mc_samples < 2:
            raise DomainError("mc_samples must be >= 2")
        if not self.target_rel_error > 0:
            raise DomainError("target_rel_error must be positive")

    def check_method(self, n: int):
        if self.method == "tensor_gauss" and n > 2:
            raise DomainError(
                "tensor_gauss is limited to n <= 2; use monte_carlo for "
                f"n = {n}"
            )


@dataclass(frozen=True)
class SnResult:
    n: int
    kappa: complex
    value: complex
    rel_error_est: float
    form: str


def _check_kappa(kappa: complex) -> complex:
    kappa = complex(kappa)
    if abs(kappa) >= 1:
        raise DomainError(f"|kappa| must be < 1, got {abs(kappa):.6g}")
    return kappa


def lambda1(x, kappa):
    """Lambda_1(x) = sqrt((1-x)(1-kappa x)/x), principal branch.

    x must lie strictly inside (0,1); quadrature weights own the endpoint
    behavior, so the endpoints themselves are never sampled.
    """
    xv = np.asarray(x, dtype=float)
    if np.any(xv <= 0.0) or np.any(xv >= 1.0):
        raise DomainError("x must lie strictly inside (0, 1)")
    kappa = _check_kappa(kappa)
    val = np.sqrt((1.0 - xv) * (1.0 - kappa * xv) / xv)
    if np.isscalar(x) or np.ndim(x) == 0:
        v = complex(val)
        return v.real if kappa.imag == 0.0 and v.imag == 0.0 else v
    return val


@lru_cache(maxsize=32)
def _gauss01(G: int):
    t, w = np.polynomial.legendre.leggauss(G)
    t = 0.5 * (t + 1.0)
    w = 0.5 * w
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


@lru_cache(maxsize=64)
def _axis_nodes(G: int, kappa: complex):
    """Nodes on (0,1) plus weights with the axis densities folded in.

    wx carries dx * Lambda_1(x); wy carries dy / Lambda_1(y).  Both are
    smooth after x = sin^2(pi t / 2): the half-power endpoint factors
    cancel against the substitution Jacobian, and sqrt(1 - kappa x) is
    analytic on the node range because Re(1 - kappa x) > 1 - |kappa| > 0.
    """
    t, w = _gauss01(G)
    s2 = np.sin(np.pi * t / 2.0) ** 2
    c2 = 1.0 - s2
    root = np.sqrt(1.0 - kappa * s2)
    wx = w * np.pi * c2 * root
    wy = w * np.pi * s2 / root
    for arr in (s2, wx, wy):
        arr.setflags(write=False)
    return s2, wx, wy


def _vandermonde_sq(v: np.ndarray) -> float:
    out = 1.0
    n = len(v)
    for i in range(n):
        for j in range(i + 1, n):
            out *= (v[j] - v[i]) ** 2
    return out


def sn_integrand_vandermonde(x, y, kappa: complex, n: int):
    """Integrand of the Vandermonde-form S_n integral, prefactor excluded.

    Equals [prod x_i y_i / (1 - kappa^n prod x_i y_i)] *
    Delta(x)^2 Delta(y)^2 / prod_{i,j}(1 - kappa x_i y_j)^2 *
    prod_i Lambda_1(x_i)/Lambda_1(y_i).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (n,) or y.shape != (n,):
        raise DomainError(f"x and y must be length-{n} vectors")
    if np.any((x <= 0) | (x >= 1)) or np.any((y <= 0) | (y >= 1)):
        raise DomainError("coordinates must lie strictly inside (0, 1)")
    kappa = _check_kappa(kappa)
    u = np.prod(x) * np.prod(y)
    first = u / (1.0 - kappa**n * u)
    cross = np.prod((1.0 - kappa * np.outer(x, y)) ** 2)
    lam = np.prod(np.sqrt((1.0 - x) * (1.0 - kappa * x) / x)) / np.prod(
        np.sqrt((1.0 - y) * (1.0 - kappa * y) / y)
    )
    return first * _vandermonde_sq(x) * _vandermonde_sq(y) / cross * lam


def sn_integrand_cauchy(x, y, kappa: complex, n: int):
    """Integrand of the Cauchy-determinant form, prefactor excluded.

    Same first factor and Lambda_1 ratios as the Vandermonde form, but the
    pair interaction enters through det(1/(1 - kappa x_i y_j)) squared.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.shape != (n,) or y.shape != (n,):
        raise DomainError(f"x and y must be length-{n} vectors")
    if np.any((x <= 0) | (x >= 1)) or np.any((y <= 0) | (y >= 1)):
        raise DomainError("coordinates must lie strictly inside (0, 1)")
    kappa = _check_kappa(kappa)
    u = np.prod(x) * np.prod(y)
    first = u / (1.0 - kappa**n * u)
    det = np.linalg.det(1.0 / (1.0 - kappa * np.outer(x, y)))
    lam = np.prod(np.sqrt((1.0 - x) * (1.0 - kappa * x) / x)) / np.prod(
        np.sqrt((1.0 - y) * (1.0 - kappa * y) / y)
    )
    return first * det * det * lam


def _prefactor(kappa: complex, n: int, form: str) -> complex:
    if form == "Sn2":
        return kappa ** (n * (n + 1)) / (math.factorial(n) ** 2 * math.pi ** (2 * n))
    if form == "Sn1":
        return kappa ** (2 * n) / (math.factorial(n) ** 2 * math.pi ** (2 * n))
    raise DomainError(f"unknown form {form!r}")


def _tensor_core(kappa: complex, n: int, power: int, G: int, form: str = "Sn2"):
    """Raw 2n-dimensional integral with resonant exponent `power`.

    The axis weights already carry the Lambda_1 densities, so this is the
    plain weighted tensor sum of the remaining smooth factor.
    """
    x, wx, wy = _axis_nodes(G, kappa)
    if n == 1:
        U = np.outer(x, x)
        den = 1.0 - kappa * U
        if form == "Sn2":
            pair = den * den
        else:
            pair = den * den  # 1x1 determinant squared: identical factor
        val = np.sum((wx[:, None] * wy[None, :]) * U / (1.0 - kappa * U) ** power / pair)
        return complex(val)
    if n != 2:
        raise DomainError("tensor_gauss is limited to n <= 2")
    kn = kappa * kappa
    X2 = x[:, None, None]
    Y1 = x[None, :, None]
    Y2 = x[None, None, :]
    W = wx[:, None, None] * wy[None, :, None] * wy[None, None, :]
    yy = (Y2 - Y1) ** 2
    total = 0.0 + 0.0j
    for a in range(G):
        x1 = x[a]
        u = (x1 * X2) * (Y1 * Y2)
        first = u / (1.0 - kn * u) ** power
        if form == "Sn2":
            num = (X2 - x1) ** 2 * yy
            den = (1.0 - kappa * x1 * Y1) * (1.0 - kappa * x1 * Y2)
            den = den * (1.0 - kappa * X2 * Y1)
            den = den * (1.0 - kappa * X2 * Y2)
            core = num / (den * den)
        else:
            c11 = 1.0 / (1.0 - kappa * x1 * Y1)
            c12 = 1.0 / (1.0 - kappa * x1 * Y2)
            c21 = 1.0 / (1.0 - kappa * X2 * Y1)
            c22 = 1.0 / (1.0 - kappa * X2 * Y2)
            det = c11 * c22 - c12 * c21
            core = det * det
        total += wx[a] * np.sum(W * first * core)
    return complex(total)


def _refined_nodes(G: int) -> int:
    return int(math.ceil(1.5 * G))


# ---------------------------------------------------------------------------
# Monte Carlo path (any n; the production route for n >= 3)

def _draw_points(rng, m: int, n: int):
    X = rng.beta(0.5, 1.5, size=(m, n))
    Y = rng.beta(1.5, 0.5, size=(m, n))
    if n > 1:
        # coincident coordinates have probability zero but are resampled
        # anyway; redraws continue the same deterministic stream
        for _ in range(100):
            bad = np.zeros(m, dtype=bool)
            for i in range(n):
                for j in range(i + 1, n):
                    bad |= X[:, i] == X[:, j]
                    bad |= Y[:, i] == Y[:, j]
            bad |= np.any((X <= 0) | (X >= 1), axis=1)
            bad |= np.any((Y <= 0) | (Y >= 1), axis=1)
            cnt = int(bad.sum())
            if cnt == 0:
                break
            X[bad] = rng.beta(0.5, 1.5, size=(cnt, n))
            Y[bad] = rng.beta(1.5, 0.5, size=(cnt, n))
    return X, Y


def _mc_core(kappa: complex, n: int, power: int, spec: QuadratureSpec, form: str):
    """Raw integral estimate and standard error by importance sampling.

    The Beta(1/2, 3/2) and Beta(3/2, 1/2) proposal densities absorb the
    endpoint weights exactly; each axis contributes the Beta normalization
    pi/2, restored here as (pi/2)^(2n).
    """
    rng = np.random.Generator(np.random.Philox(key=spec.seed))
    m = spec.mc_samples
    X, Y = _draw_points(rng, m, n)
    u = np.prod(X, axis=1) * np.prod(Y, axis=1)
    first = u / (1.0 - kappa**n * u) ** power
    A = 1.0 - kappa * np.einsum("mi,mj->mij", X, Y)
    if form == "Sn2":
        pair = np.ones(m, dtype=complex)
        for i in range(n):
            for j in range(n):
                pair *= A[:, i, j]
        core = 1.0 / (pair * pair)
        for i in range(n):
            for j in range(i + 1, n):
                core *= (X[:, j] - X[:, i]) ** 2 * (Y[:, j] - Y[:, i]) ** 2
    else:
        det = np.linalg.det(1.0 / A)
        core = det * det
    smooth = np.prod(np.sqrt(1.0 - kappa * X), axis=1) / np.prod(
        np.sqrt(1.0 - kappa * Y), axis=1
    )
    vals = first * core * smooth
    scale = (math.pi / 2.0) ** (2 * n)
    mean = complex(np.mean(vals))
    se = float(np.std(vals) / math.sqrt(m))
    return mean * scale, se * scale


# ---------------------------------------------------------------------------
# Resonant geometric-series path for the probe integral (n <= 2)

_BM_LOCK = threading.Lock()
_BM_CACHE: dict = {}
_BM_CACHE_MAX = 24


def _bm_chunk(kappa: complex, n: int, G: int, m0: int, m1: int) -> np.ndarray:
    """B_m for m in [m0, m1): the u^m moments of the non-resonant factor.

    Writing the squared Cauchy determinant as a sum over permutation pairs
    and integrating against the axis weights factorizes each u^m moment
    into one-dimensional node sums: for n = 1 a single weighted sum G_m,
    for n = 2 the combination 2 kappa^-2 (G_m^2 - T_m) with T_m built from
    the pair kernel P_m.  Everything is BLAS-shaped in the m direction.
    """
    x, wx, wy = _axis_nodes(G, kappa)
    C = 1.0 / (1.0 - kappa * np.outer(x, x))
    C2 = C * C
    mm = np.arange(m0, m1)
    Xp = np.exp(np.log(x)[:, None] * (mm[None, :] + 1))
    fx = wx[:, None] * Xp
    gy = wy[:, None] * Xp
    Gm = np.einsum("am,ab,bm->m", fx, C2, gy, optimize=True)
    if n == 1:
        return Gm
    CC = (C[:, :, None] * C[:, None, :]).reshape(G, G * G)
    P = CC.T @ fx
    gpair = (gy[:, None, :] * gy[None, :, :]).reshape(G * G, -1)
    Tm = np.einsum("pm,pm->m", P * P, gpair, optimize=True)
    return (2.0 / (kappa * kappa)) * (Gm * Gm - Tm)


def _bm_prefix(kappa: complex, n: int, G: int, upto: int) -> np.ndarray:
    """Cached B_m array covering m = 0..upto-1, extended on demand."""
    key = (kappa, n, G)
    with _BM_LOCK:
        have = _BM_CACHE.get(key)
    if have is not None and len(have) >= upto:
        return have
    start = 0 if have is None else len(have)
    parts = [] if have is None else [have]
    # the n=2 pair kernel is G^2 x chunk; keep its footprint under ~100 MB
    chunk = 2048 if n == 1 else 256
    for m0 in range(start, upto, chunk):
        parts.append(_bm_chunk(kappa, n, G, m0, min(m0 + chunk, upto)))
    full = np.concatenate(parts)
    with _BM_LOCK:
        if len(_BM_CACHE) >= _BM_CACHE_MAX:
            _BM_CACHE.clear()
        _BM_CACHE[key] = full
    return full


def _lint_series(kappa: complex, n: int, ells, G: int, rtol: float):
    """Probe values for every requested ell at once via the m expansion.

    1/(1 - kappa^n u)^(l+1) = sum_m binom(m+l, l) (kappa^n u)^m turns the
    integral into sum_m binom(m+l, l) kappa^(n m) B_m.  Useful only when
    kappa^n sits essentially on the positive real axis (then the powers
    kappa^(n m) cannot cancel); the caller enforces that.
    """
    kn = kappa**n
    q = abs(kn)
    if q >= 1.0:
        raise DomainError("|kappa^n| must be < 1")
    log_kn = cmath.log(kn)
    ells = tuple(int(e) for e in ells)
    lmax = max(ells)
    totals = {e: 0.0 + 0.0j for e in ells}
    done = {e: False for e in ells}
    chunk = 2048
    m0 = 0
    while m0 < _SERIES_M_CAP:
        m1 = min(m0 + chunk, _SERIES_M_CAP)
        bm = _bm_prefix(kappa, n, G, m1)[m0:m1]
        mm = np.arange(m0, m1)
        powers = np.exp(mm * log_kn)
        base = powers * bm
        # binom(m+l, l) built incrementally over l from the l=0 row of ones
        row = np.ones(m1 - m0)
        binom_prev_end = 1.0
        for e in range(lmax + 1):
            if e > 0:
                row = row * (mm + e) / e
            if e in totals:
                t = base * row
                totals[e] += t.sum()
                last = abs(t[-1])
                ratio = q * (1.0 + e / max(1.0, float(mm[-1])))
                if ratio < 1.0:
                    tail = last * ratio / (1.0 - ratio)
                    if tail <= rtol * max(abs(totals[e]), _TINY):
                        done[e] = True
        if all(done.values()):
            return {e: complex(totals[e]) for e in ells}
        m0 = m1
    raise ConvergenceError(
        f"resonant series did not converge within {_SERIES_M_CAP} terms at "
        f"kappa={kappa}",
        best={e: complex(totals[e]) for e in ells},
        gap=rtol,
    )


def _is_resonant(kappa: complex, n: int) -> bool:
    kn = kappa**n
    q = abs(kn)
    return q >= _RESONANT_MIN_ABS and abs(cmath.phase(kn)) <= 0.1 * (1.0 - q)


# ---------------------------------------------------------------------------
# Public operations

def s_n(kappa: complex, n: int, spec: QuadratureSpec, form: str = "Sn2") -> SnResult:
    """One form-factor term S_n.

    Parameters
    ----------
    kappa : complex, |kappa| < 1
    n : int, >= 1
    spec : QuadratureSpec
    form : {"Sn2", "Sn1"}
        Vandermonde form (default) or Cauchy-determinant form.  The two
        must agree within combined error estimates; the determinant really
        is evaluated pointwise in the Sn1 path, keeping the comparison an
        honest cross-check.

    Returns
    -------
    SnResult with a relative error estimate (node refinement gap for
    tensor quadrature, standard error for Monte Carlo).
    """
    kappa = _check_kappa(kappa)
    if n < 1:
        raise DomainError("n must be >= 1")
    if form not in ("Sn1", "Sn2"):
        raise DomainError(f"unknown form {form!r}")
    spec.check_method(n)
    pref = _prefactor(kappa, n, form)
    if spec.method == "tensor_gauss":
        G = spec.nodes_per_dim
        coarse = _tensor_core(kappa, n, 1, G, form)
        fine = _tensor_core(kappa, n, 1, _refined_nodes(G), form)
        value = pref * fine
        rel = abs(fine - coarse) / max(abs(fine), _TINY)
    else:
        raw, se = _mc_core(kappa, n, 1, spec, form)
        value = pref * raw
        rel = se / max(abs(raw), _TINY)
        if rel > spec.target_rel_error:
            warnings.warn(
                f"monte carlo standard error {rel:.2e} exceeds target "
                f"{spec.target_rel_error:.2e} at n={n}, kappa={kappa}",
                PrecisionWarning,
                stacklevel=2,
            )
    value = _realify(value, kappa)
    return SnResult(n=n, kappa=kappa, value=value, rel_error_est=rel, form=form)


def _realify(value: complex, kappa: complex):
    """Collapse numerically-real results for real kappa in [0, 1)."""
    if kappa.imag == 0.0 and kappa.real >= 0.0:
        if abs(value.imag) <= 1e-12 * max(1.0, abs(value)):
            return complex(value.real, 0.0)
    return value


def s_total(kappa: complex, n_max: int, spec: QuadratureSpec) -> complex:
    """Sum of S_n for n <= n_max, with a prefactor-scaling tail check.

    The dropped tail starts at |S_{n_max}| * |kappa|^(2(n_max+1)); when it
    exceeds the requested relative target a PrecisionWarning is issued.
    """
    kappa = _check_kappa(kappa)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    total = 0.0 + 0.0j
    last = None
    for n in range(1, n_max + 1):
        last = s_n(kappa, n, spec)
        total += last.value
    tail = abs(last.value) * abs(kappa) ** (2 * (n_max + 1))
    if tail > spec.target_rel_error * max(abs(total), _TINY):
        warnings.warn(
            f"form-factor tail estimate {tail:.2e} above target at "
            f"kappa={kappa}, n_max={n_max}",
            PrecisionWarning,
            stacklevel=2,
        )
    return total


def lint_integral(kappa: complex, n: int, ell: int, spec: QuadratureSpec) -> complex:
    """The probe integral: S_n integrand with first-factor power ell+1.

    At ell = 0 this is exactly the Vandermonde-form S_n integral without
    its constant prefactor.  Near a resonant radial approach the geometric
    m-expansion replaces the plain tensor sum (see module docstring).
    """
    kappa = _check_kappa(kappa)
    if n < 1:
        raise DomainError("n must be >= 1")
    if ell < 0:
        raise DomainError("ell must be >= 0")
    if 1.0 - abs(kappa) ** n < 1e-6:
        warnings.warn(
            f"evaluating within 1e-6 of the resonant boundary at "
            f"kappa={kappa}, n={n}: double precision digits are limited",
            PrecisionWarning,
            stacklevel=2,
        )
    spec.check_method(n)
    if spec.method == "monte_carlo":
        raw, _ = _mc_core(kappa, n, ell + 1, spec, "Sn2")
        return raw
    if _is_resonant(kappa, n):
        G = max(128, spec.nodes_per_dim)
        rtol = min(1e-8, max(spec.target_rel_error, 1e-12))
        return _lint_series(kappa, n, (ell,), G, rtol)[ell]
    return _tensor_core(kappa, n, ell + 1, spec.nodes_per_dim, "Sn2")


def d_ell_s_n(kappa: complex, n: int, ell: int, radius: float) -> complex:
    """ell-th derivative of S_n at kappa by the Cauchy integral formula.

    Trapezoidal sampling on the contour circle is spectrally accurate for
    this analytic integrand; the contour must stay inside |kappa| < 1.
    """
    kappa = _check_kappa(kappa)
    if n < 1:
        raise DomainError("n must be >= 1")
    if ell < 1:
        raise DomainError("ell must be >= 1")
    if not radius > 0:
        raise DomainError("radius must be positive")
    if abs(kappa) + radius >= 1.0:
        raise DomainError(
            f"contour of radius {radius:.6g} around kappa={kappa} crosses "
            "the unit circle"
        )
    if radius < 1e-3:
        warnings.warn(
            f"contour radius {radius:.2e} amplifies evaluation noise by "
            f"{radius ** (-ell):.2e}",
            PrecisionWarning,
            stacklevel=2,
        )
    P = max(32, 8 * ell)
    G = 64 if n == 1 else 48
    theta = 2.0 * math.pi * np.arange(P) / P
    acc = 0.0 + 0.0j
    for j in range(P):
        z = kappa + radius * cmath.exp(1j * theta[j])
        pref = _prefactor(z, n, "Sn2")
        sval = pref * _tensor_core(z, n, 1, G, "Sn2")
        acc += sval * cmath.exp(-1j * ell * theta[j])
    return math.factorial(ell) * acc / (P * radius**ell)
