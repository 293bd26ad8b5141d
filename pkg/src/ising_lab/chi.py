"""Diagonal susceptibility assembly and parameter sweeps.

beta^-1 chi_d = 1 - M^2 + 2 sum_{N>=1} (D(N) - M^2) = 1 + M^2 (2 S - 1).
The N and -N terms of the underlying lattice sum coincide and N = 0
contributes 1 - M^2, which is where the closed assembly comes from.
Three routes are exposed and kept strictly independent so they can
cross-check each other: Toeplitz determinants summed directly, the
Fredholm form of S, and the form-factor integrals.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import ConvergenceError, DomainError
from .fredholm import _s_fredholm_terms
from .integrals import QuadratureSpec, s_n
from .params import CouplingK, magnetization
from .parallel import parallel_map
from .toeplitz import diagonal_correlation

_ROUTES = ("fredholm", "toeplitz_direct", "integral")
_N_MAX_TOEPLITZ = 64
_INTEGRAL_N_MAX = 2


@dataclass(frozen=True)
class ChiResult:
    k: complex
    beta_inv_chi_d: complex
    route: str
    terms_used: int
    est_error: float
    flagged: bool = False


def _assemble(m2, s):
    return 1.0 + m2 * (2.0 * s - 1.0)


def chi_d(k: CouplingK, tol: float, route: str) -> ChiResult:
    """beta^-1 chi_d by the requested route.

    Parameters
    ----------
    k : CouplingK
    tol : float
        Tolerance handed to the underlying summation; the reported
        est_error is the propagated bound, and results whose tail failed
        to converge under the route caps come back flagged instead of
        raising.
    route : {"fredholm", "toeplitz_direct", "integral"}
    """
    if route not in _ROUTES:
        raise DomainError(f"unknown route {route!r}; expected one of {_ROUTES}")
    if not tol > 0:
        raise DomainError("tol must be positive")
    m = magnetization(k)
    m2 = m * m
    if route == "fredholm":
        try:
            s, terms, s_err = _s_fredholm_terms(k, tol)
        except ConvergenceError as exc:
            return _flagged(k, route, exc)
        value = _assemble(m2, s)
        return _finish(k, value, route, terms, 2.0 * abs(m2) * s_err)
    if route == "toeplitz_direct":
        return _chi_toeplitz(k, tol, m2)
    return _chi_integral(k, tol, m2)


def _flagged(k: CouplingK, route: str, exc: ConvergenceError) -> ChiResult:
    best = exc.best if exc.best is not None else math.nan
    gap = exc.gap if exc.gap is not None else math.inf
    m2 = magnetization(k) ** 2
    value = _assemble(m2, best) if best == best else complex(math.nan)
    return ChiResult(
        k=k.k, beta_inv_chi_d=value, route=route, terms_used=0,
        est_error=float(abs(gap)), flagged=True,
    )


def _chi_toeplitz(k: CouplingK, tol: float, m2) -> ChiResult:
    total = 1.0 - m2
    dev_prev = None
    tail = math.inf
    used = 0
    for N in range(1, _N_MAX_TOEPLITZ + 1):
        dev = diagonal_correlation(k, N).value - m2
        total = total + 2.0 * dev
        used = N
        mag = abs(dev)
        if dev_prev not in (None, 0.0):
            ratio = min(0.98, mag / dev_prev)
            tail = 2.0 * mag * ratio / (1.0 - ratio)
            if tail < tol / 4.0:
                break
        if mag == 0.0:
            tail = 0.0
            break
        dev_prev = mag
    flagged = tail > tol
    return _finish(k, total, "toeplitz_direct", used, float(tail), flagged)


def _chi_integral(k: CouplingK, tol: float, m2) -> ChiResult:
    spec = QuadratureSpec(method="tensor_gauss", nodes_per_dim=64,
                          target_rel_error=tol)
    kappa = k.kappa
    total = 0.0 + 0.0j
    err = 0.0
    last = None
    for n in range(1, _INTEGRAL_N_MAX + 1):
        last = s_n(kappa, n, spec)
        total += last.value
        err += last.rel_error_est * abs(last.value)
    tail = abs(last.value) * abs(kappa) ** (2 * (_INTEGRAL_N_MAX + 1))
    s_err = err + tail
    value = _assemble(m2, total)
    return _finish(k, value, "integral", _INTEGRAL_N_MAX, 2.0 * abs(m2) * s_err)


def _finish(k: CouplingK, value, route, terms, est_error, flagged=False) -> ChiResult:
    value = complex(value)
    if k.mode == "physical":
        if abs(value.imag) > 1e-10 * max(1.0, abs(value)):
            raise RuntimeError(f"physical chi_d came out complex: {value!r}")
        value = value.real
    return ChiResult(
        k=k.k if k.mode != "physical" else k.k.real,
        beta_inv_chi_d=value,
        route=route,
        terms_used=terms,
        est_error=float(est_error),
        flagged=flagged,
    )


def sweep(grid, route: str, tol: float = 1e-8):
    """One ChiResult per grid point, evaluated in parallel, order preserved.

    A point that raises a domain or convergence error becomes a flagged
    NaN row; the sweep itself never aborts on one bad point.
    """
    grid = list(grid)

    def one(kv):
        try:
            k = kv if isinstance(kv, CouplingK) else CouplingK.physical(kv)
            return chi_d(k, tol, route)
        except (DomainError, ConvergenceError, RuntimeError):
            kk = kv.k if isinstance(kv, CouplingK) else complex(kv)
            return ChiResult(
                k=kk, beta_inv_chi_d=complex(math.nan), route=route,
                terms_used=0, est_error=math.inf, flagged=True,
            )

    return parallel_map(one, grid)
