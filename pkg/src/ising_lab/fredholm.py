"""Truncated Hankel operators, det(I - K_N), and the correlation sum S.

K_N = H_N(Lambda) H_N(Lambda^-1) with H_N(psi) the Hankel matrix built
from coefficients at degrees N + i + j + 1.  The identity
D(N) = M^2 det(I - K_N) ties this module to the Toeplitz route and is the
central cross-check of the library.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import ConvergenceError, DomainError
from .params import CouplingK, SeriesCoeffs, _lambda_pair

_CUTOFF_CAP = 4096
_N_CAP = 512
_DET_TOL_FLOOR = 1e-15


@dataclass(frozen=True)
class HankelTruncation:
    """cutoff x cutoff window of a Hankel operator with shift N.

    entries[i, j] is the series coefficient at degree N + i + j + 1;
    tail_bound dominates the summed magnitude of every omitted coefficient
    (degrees above N + 2*cutoff - 1).
    """

    N: int
    cutoff: int
    entries: np.ndarray
    tail_bound: float

    def __post_init__(self):
        self.entries.setflags(write=False)


@dataclass(frozen=True)
class FredholmResult:
    N: int
    det_value: complex
    cutoff_used: int
    est_error: float


def hankel_matrix(coeffs: SeriesCoeffs, N: int, cutoff: int) -> HankelTruncation:
    """Build the truncated Hankel matrix (coeff at degree N+i+j+1).

    Raises a hard error naming the required degree when the series is too
    short to fill the window.
    """
    if N < 1 or cutoff < 1:
        raise DomainError("N and cutoff must be >= 1")
    need = N + 2 * cutoff - 1
    if coeffs.max_degree < need:
        raise ValueError(
            f"series too short: need coefficients up to degree {need}, "
            f"series ends at degree {coeffs.max_degree}"
        )
    band = coeffs.window(N + 1, need)
    mat = scipy.linalg.hankel(band[:cutoff], band[cutoff - 1 :])
    tail = _geometric_tail_from(coeffs, need)
    return HankelTruncation(N=N, cutoff=cutoff, entries=mat, tail_bound=tail)


def _geometric_tail_from(coeffs: SeriesCoeffs, beyond: int) -> float:
    """Sum bound for |coeff(m)|, m > beyond, from the observed decay ratio."""
    last = abs(coeffs.coeff(beyond))
    if last == 0.0:
        return 0.0
    prev = abs(coeffs.coeff(beyond - 1))
    if prev == 0.0:
        return last
    ratio = min(0.999, last / prev)
    return last * ratio / (1.0 - ratio)


def _det_at(kval: complex, N: int, cutoff: int) -> complex:
    """det(I - K_N) at one fixed truncation cutoff."""
    length = N + 2 * cutoff + 2
    lam, lam_inv = _lambda_pair(kval, length)
    a = hankel_matrix(lam, N, cutoff).entries
    b = hankel_matrix(lam_inv, N, cutoff).entries
    eye = np.eye(cutoff, dtype=complex)
    sign, logabs = np.linalg.slogdet(eye - a @ b)
    return complex(sign * np.exp(logabs))


def fredholm_det(k: CouplingK, N: int, tol: float) -> FredholmResult:
    """det(I - K_N), truncation cutoff chosen adaptively.

    The cutoff doubles until a doubling moves the value by less than tol;
    that final move is recorded as est_error.  Entries decay like
    |k|^(N+i+j+1), which fixes the starting cutoff.
    """
    if N < 1:
        raise DomainError("N must be >= 1")
    if not tol > 0:
        raise DomainError("tol must be positive")
    a = abs(k.k)
    if a == 0.0:
        return FredholmResult(N=N, det_value=1.0 + 0.0j, cutoff_used=1, est_error=0.0)
    la = math.log(a)
    start = math.ceil((math.log(tol * (1.0 - a)) - N * la) / (2.0 * la))
    cutoff = max(4, start)
    kval = complex(k.k)
    value = _det_at(kval, N, cutoff)
    while True:
        if 2 * cutoff > _CUTOFF_CAP:
            raise ConvergenceError(
                f"cutoff cap {_CUTOFF_CAP} reached at N={N} without meeting "
                f"tol={tol:.3g}",
                best=value,
                gap=tol,
            )
        refined = _det_at(kval, N, 2 * cutoff)
        gap = abs(refined - value)
        cutoff *= 2
        value = refined
        if gap < tol:
            return FredholmResult(
                N=N, det_value=value, cutoff_used=cutoff, est_error=gap
            )


def _s_fredholm_terms(k: CouplingK, tol: float):
    """Sum det(I - K_N) - 1 over N with budgeted per-term tolerances.

    Returns (S, terms_used, est_error).  Per-term determinant tolerances
    form a geometric budget summing to tol/2; the dropped tail is bounded
    by another tol/2, so the accumulated error stays below 2*tol as
    promised by s_via_fredholm.
    """
    if not tol > 0:
        raise DomainError("tol must be positive")
    q = min(0.98, abs(k.k) ** 2)
    s = 0.0 + 0.0j
    prev = None
    rising = 0
    spent = 0.0
    for N in range(1, _N_CAP + 1):
        tol_n = max(tol * (1.0 - q) * q ** (N - 1) / 2.0, _DET_TOL_FLOOR)
        res = fredholm_det(k, N, tol_n)
        spent += res.est_error
        t = res.det_value - 1.0
        s += t
        mag = abs(t)
        if prev is not None and mag > prev:
            rising += 1
            if rising >= 3:
                raise ConvergenceError(
                    f"terms det(I-K_N)-1 grew for 3 consecutive N at k={k.k}: "
                    "divergence suspected",
                    best=s,
                    gap=mag,
                )
        else:
            rising = 0
        q_emp = q if prev in (None, 0.0) else min(0.98, mag / prev)
        tail = mag * q_emp / (1.0 - q_emp)
        if mag < tol / 2.0 and tail < tol / 2.0:
            return s, N, spent + tail
        prev = mag
    raise ConvergenceError(
        f"correlation sum did not satisfy tol={tol:.3g} within {_N_CAP} terms",
        best=s,
        gap=tol,
    )


def s_via_fredholm(k: CouplingK, tol: float) -> complex:
    """S = sum_{N>=1} (det(I - K_N) - 1), accumulated error <= 2*tol."""
    s, _, _ = _s_fredholm_terms(k, tol)
    return s
