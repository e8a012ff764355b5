"""Wigner-matrix eigenvalue statistics and their concentration certificates.

A symmetric N x N matrix with independent upper-triangle entries drawn from
one catalog law (entries scaled by 1/sqrt(N)) induces, on its ordered
eigenvalue vector, a spectral-gap constant sigma_N^2 = 2*sigma^2/N, where
sigma^2 is the certified constant of the entry law. Linear eigenvalue
statistics S_N = sum_j (f(lambda_j) - E f(lambda_j)) and their recentered
second-order version S~_N = S_N - sum_j (lambda_j - E lambda_j) E f'(lambda_j)
then inherit exponential-moment and tail certificates (route wigner-lss).

Expectations E lambda_j, E f(lambda_j), E f'(lambda_j) are not known in
closed form; they are estimated on an independent calibration run and their
standard errors are propagated into the verification slack.

f is restricted to polynomials; the exponential-moment certificate further
needs a finite uniform bound on f'', so it is only issued for degree <= 2.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import sqrt

import numpy as np
from numpy.polynomial import Polynomial

from ._util import substream, worker_count
from .bounds import (EXP_MOMENT_COEFF, EXP_THRESHOLD, Certificate,
                     MissingHypothesisError)
from .measures import CoordinateDist, coordinate_sigma2

_EIG_CHUNK = 128  # draws per batched eigensolver call
MAX_DISCARD_FRACTION = 1e-3
JACOBI_MAX_SIZE = 64


@dataclass(frozen=True)
class WignerEnsemble:
    """Symmetric random matrix: entry law (catalog) and size N."""

    size: int
    entry: CoordinateDist

    def __post_init__(self):
        if self.size < 2:
            raise ValueError("need N >= 2")
        coordinate_sigma2(self.entry)  # raises for uncertified entry laws

    @property
    def sigma2(self):
        return coordinate_sigma2(self.entry)

    @property
    def sigma_n2(self):
        """Spectral-gap constant of the ordered-eigenvalue distribution."""
        return 2.0 * self.sigma2 / self.size


@dataclass(frozen=True)
class EigenSample:
    """Ordered eigenvalues per draw, plus the discarded-draw count."""

    eigenvalues: np.ndarray  # (M, N), each row ascending
    discarded: int = 0

    @property
    def draws(self):
        return self.eigenvalues.shape[0]


def _draw_entries(rng, ens, count):
    from .measures import draw_coordinate
    return draw_coordinate(rng, ens.entry, count)


def _build_matrices(ens, seed, start, stop):
    n = ens.size
    iu = np.triu_indices(n)
    mats = np.empty((stop - start, n, n))
    root_n = sqrt(n)
    for i, draw in enumerate(range(start, stop)):
        rng = substream(seed, draw)
        vals = _draw_entries(rng, ens, iu[0].size) / root_n
        m = np.zeros((n, n))
        m[iu] = vals
        m.T[iu] = vals
        mats[i] = m
    return mats


def _eig_chunk(ens, seed, start, stop):
    mats = _build_matrices(ens, seed, start, stop)
    try:
        return np.linalg.eigvalsh(mats), 0
    except np.linalg.LinAlgError:
        # retry one matrix at a time so a single bad draw only costs itself
        rows, discarded = [], 0
        for m in mats:
            try:
                rows.append(np.linalg.eigvalsh(m))
            except np.linalg.LinAlgError:
                discarded += 1
        if rows:
            return np.vstack(rows), discarded
        return np.empty((0, ens.size)), discarded


def sample_ensemble(ens, draws, seed, workers=None):
    """Eigenvalue sample of ``draws`` independent matrices.

    Deterministic in (seed, draws): each draw owns a counter-keyed substream,
    so thread count and chunking cannot change the numbers. Solver failures
    discard the draw; more than 0.1% of them is an error.
    """
    if draws < 1:
        raise ValueError("need draws >= 1")
    spans = [(s, min(s + _EIG_CHUNK, draws)) for s in range(0, draws, _EIG_CHUNK)]
    workers = workers or worker_count()
    if workers > 1 and len(spans) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda sp: _eig_chunk(ens, seed, *sp), spans))
    else:
        parts = [_eig_chunk(ens, seed, *sp) for sp in spans]
    eigs = np.vstack([p[0] for p in parts])
    discarded = sum(p[1] for p in parts)
    if discarded > MAX_DISCARD_FRACTION * draws:
        raise RuntimeError("eigensolver discarded %d of %d draws" % (discarded, draws))
    return EigenSample(eigs, discarded)


def jacobi_eigenvalues(matrix, tol=1e-14, max_sweeps=60):
    """Cyclic Jacobi eigenvalues of a small symmetric matrix, ascending.

    Independent of the LAPACK path on purpose: this is the oracle the
    production solver is checked against. Limited to N <= 64.
    """
    a = np.array(matrix, dtype=np.float64)
    n = a.shape[0]
    if a.shape != (n, n):
        raise ValueError("matrix must be square")
    if n > JACOBI_MAX_SIZE:
        raise ValueError("the Jacobi oracle is limited to N <= %d" % JACOBI_MAX_SIZE)
    if not np.allclose(a, a.T, atol=1e-12):
        raise ValueError("matrix must be symmetric")
    scale = np.max(np.abs(a)) or 1.0
    for _ in range(max_sweeps):
        off = 0.0
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                off = max(off, abs(apq))
                if abs(apq) <= tol * scale:
                    continue
                theta = 0.5 * (a[q, q] - a[p, p]) / apq
                t = math.copysign(1.0, theta) / (abs(theta) + sqrt(theta * theta + 1.0))
                c = 1.0 / sqrt(t * t + 1.0)
                s = t * c
                rp, rq = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * rp - s * rq
                a[q, :] = s * rp + c * rq
                cp, cq = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * cp - s * cq
                a[:, q] = s * cp + c * cq
        if off <= tol * scale:
            break
    return np.sort(np.diag(a))


# -- statistics ------------------------------------------------------------------

def as_polynomial(coeffs):
    """1-D polynomial from ascending coefficients."""
    return Polynomial(np.asarray(coeffs, dtype=np.float64))


def second_derivative_bound(poly):
    """Uniform bound on |f''|; only degree <= 2 polynomials have one."""
    p2 = poly.deriv(2)
    if p2.degree() > 0 and np.any(p2.coef[1:] != 0.0):
        raise MissingHypothesisError(
            "f'' is unbounded on R for polynomials of degree > 2; "
            "no exponential-moment certificate can be issued")
    return abs(float(p2.coef[0])) if p2.coef.size else 0.0


@dataclass(frozen=True)
class Calibration:
    """Independent-run estimates of the per-index eigenvalue expectations."""

    mean_lambda: np.ndarray
    se_lambda: np.ndarray
    sum_f: float          # sum_j E f(lambda_j)
    se_sum_f: float
    mean_fprime: np.ndarray
    se_fprime: np.ndarray
    se_shift: float       # SE of sum_j mean_lambda_j * mean_fprime_j
    grad_l2: float        # (E sum_j f'(lambda_j)^2)^(1/2)
    grad_l2_se: float
    draws: int

    def to_dict(self):
        return {"draws": self.draws, "sum_f": self.sum_f, "se_sum_f": self.se_sum_f,
                "grad_l2": self.grad_l2, "grad_l2_se": self.grad_l2_se,
                "se_shift": self.se_shift,
                "mean_lambda": self.mean_lambda.tolist(),
                "se_lambda": self.se_lambda.tolist(),
                "mean_fprime": self.mean_fprime.tolist(),
                "se_fprime": self.se_fprime.tolist()}


def calibrate(ens, poly, draws, seed, workers=None):
    """Estimate E lambda_j, E f(lambda_j), E f'(lambda_j) on a dedicated run.

    The seed must be independent of any evaluation seed (the certificates
    treat these as constants, so reusing draws would correlate the errors).
    """
    if draws < 500:
        raise ValueError("calibration needs at least 500 draws")
    sample = sample_ensemble(ens, draws, seed, workers=workers)
    eig = sample.eigenvalues
    m = eig.shape[0]
    fvals = poly(eig)
    fprime = poly.deriv(1)(eig)
    mean_lambda = eig.mean(axis=0)
    se_lambda = eig.std(axis=0, ddof=1) / sqrt(m)
    sum_f_per_draw = fvals.sum(axis=1)
    mean_fprime = fprime.mean(axis=0)
    se_fprime = fprime.std(axis=0, ddof=1) / sqrt(m)
    shift_per_draw = eig @ mean_fprime
    gradsq_per_draw = (fprime * fprime).sum(axis=1)
    grad_l2_sq = float(gradsq_per_draw.mean())
    grad_l2 = sqrt(max(grad_l2_sq, 0.0))
    grad_l2_se = (float(gradsq_per_draw.std(ddof=1)) / sqrt(m)
                  / (2.0 * grad_l2) if grad_l2 > 0 else 0.0)
    return Calibration(
        mean_lambda, se_lambda,
        float(sum_f_per_draw.mean()), float(sum_f_per_draw.std(ddof=1)) / sqrt(m),
        mean_fprime, se_fprime,
        float(shift_per_draw.std(ddof=1)) / sqrt(m),
        grad_l2, grad_l2_se, m)


def linear_stat(sample, poly, cal):
    """Per-draw S_N = sum_j f(lambda_j) - sum_j E f(lambda_j)."""
    if cal is None:
        raise ValueError("linear statistics need a calibration run")
    return poly(sample.eigenvalues).sum(axis=1) - cal.sum_f


def recentered_stat(sample, poly, cal):
    """Per-draw S~_N: S_N minus its first-order eigenvalue fluctuation."""
    if cal is None:
        raise ValueError("recentered statistics need a calibration run")
    s_n = linear_stat(sample, poly, cal)
    shift = (sample.eigenvalues - cal.mean_lambda) @ cal.mean_fprime
    return s_n - shift


def calibration_shift_bound(sample, cal):
    """Conservative bound on how far calibration error can shift any S~_N.

    Three first-order contributions: the error of sum_j E f(lambda_j), the
    error of the fixed shift sum_j E lambda_j * E f'(lambda_j), and (by
    Cauchy-Schwarz over the per-draw fluctuations) the per-index errors of
    E f'(lambda_j).
    """
    centered = sample.eigenvalues - cal.mean_lambda
    fluct = sqrt(float(np.mean(np.sum(centered * centered, axis=1))))
    return cal.se_sum_f + cal.se_shift + fluct * sqrt(float(np.sum(cal.se_fprime**2)))


def exp_calibration_se(rate, shift_bound, estimate):
    """SE-style slack on an exp-moment estimate from a uniform statistic shift.

    |exp(a|s+eps|^(1/2)) - exp(a|s|^(1/2))| <= (exp(a*sqrt(|eps|)) - 1) * exp(a|s|^(1/2)).
    """
    return (math.exp(rate * sqrt(max(shift_bound, 0.0))) - 1.0) * estimate


def rmt_certificates(ens, poly, cal):
    """(exp-moment certificate for S~_N, tail certificate for S_N), route wigner-lss.

    The exp-moment rate is c N^(1/4) / (sqrt(2) sigma ||f''||^(1/2)) with
    sigma the entry-law constant; the tail curve uses the calibration
    estimate of (E sum_j f'(lambda_j)^2)^(1/2).
    """
    fpp = second_derivative_bound(poly)
    if fpp <= 0:
        raise MissingHypothesisError("need a positive uniform bound on |f''|")
    sigma = sqrt(ens.sigma2)
    n = ens.size
    rate = EXP_MOMENT_COEFF * n**0.25 / (sqrt(2.0) * sigma * sqrt(fpp))
    exp_cert = Certificate(
        "expMoment", "wigner-lss",
        {"c": EXP_MOMENT_COEFF, "sigma": sigma, "matrix_size": n, "fpp_inf": fpp,
         "sigma_n2": ens.sigma_n2, "rate": rate, "power": 0.5,
         "threshold": EXP_THRESHOLD})
    tail_cert = Certificate(
        "tail", "wigner-lss",
        {"sigma": sigma, "d": 2, "matrix_size": n,
         "grad_l2": cal.grad_l2, "fpp_inf": fpp})
    return exp_cert, tail_cert
