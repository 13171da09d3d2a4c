"""End-to-end recovery of a Robinson approximation with a certified error bound.

``recover`` normalizes a nonnegative kernel in an L^p norm (finite p > 5),
estimates the ordered-shape deviation, clips large values at a threshold
derived from that estimate, and picks the window width depending on whether
the clipped kernel still shows positive deviation ("case1") or not ("case2").
The approximation itself is always built from the normalized input; only the
width differs between cases.  ``recover_bounded`` is the no-clipping variant
for kernels that are already bounded.

Reported deviation values and the theoretical bound are in normalized units;
the measured cut-norm error is in the units of the original input.
"""

from __future__ import annotations

import dataclasses
import math
import time
from typing import Optional

import numpy as np

from .core import StepGraphon, cutoff, is_robinson, lp_norm, refine
from .cutnorm import DEFAULT_DISPATCH_CAP, cut_norm
from .deviation import EXACT_DEVIATION_CAP, DeviationCertificate, deviation_exact, deviation_heuristic
from .approx import RobinsonApprox, robinson_approx


def estimate_deviation(w: StepGraphon, refinement: int = 2, restarts: int = 50,
                       seed: int = 0) -> DeviationCertificate:
    """Deviation with an automatic exact/heuristic switch.

    Exact enumeration runs at the largest refinement r <= ``refinement`` that
    keeps the refined grid within EXACT_DEVIATION_CAP cells (possibly r = 1,
    coarser than requested but still certified); larger inputs fall back to
    the sweep heuristic at the requested refinement.
    """
    want = max(1, int(refinement))
    r_exact = min(want, EXACT_DEVIATION_CAP // w.n)
    if r_exact >= 1:
        return deviation_exact(w, refinement=r_exact)
    return deviation_heuristic(w, refinement=want, restarts=restarts, seed=seed)


def theoretical_bound(p, lam: float, inf_norm: Optional[float] = None) -> float:
    """Certified cut-norm error bound as a function of the deviation estimate.

    Finite p > 5: 78 * lam^((p-5)/(5p-5)).  p = inf: 44 * lam^(1/5) when the
    values stay within [0, 1] (inf_norm omitted or <= 1), otherwise the
    sup-norm-scaled variant 44 * inf_norm^(4/5) * lam^(1/5).
    """
    if lam < 0:
        raise ValueError("deviation must be >= 0")
    if lam == 0:
        return 0.0
    if math.isinf(p):
        if inf_norm is None or inf_norm <= 1.0 + 1e-12:
            return 44.0 * lam ** 0.2
        return 44.0 * inf_norm ** 0.8 * lam ** 0.2
    p = float(p)
    if p <= 5:
        raise ValueError("norm index must exceed 5")
    return 78.0 * lam ** ((p - 5.0) / (5.0 * p - 5.0))


def proposition_constants(w: StepGraphon, p, refinement: int = 2,
                          restarts: int = 50, seed: int = 0):
    """Window width and block count used by the finite-p region analysis.

    alpha = ||w||_inf^(-p/(3p-2)) * lam^(2p/(5p-2)),
    m     = ceil(lam^(-(p-2)/(5p-2))),

    with the limiting exponents (-1/3, 2/5, -1/5) at p = inf.  Requires a
    nonnegative kernel with lpNorm(w, p) <= 1 and a positive deviation
    estimate.  Returns ``(alpha, m)``; ``m`` feeds compute_regions.
    """
    if w.values.min() < -1e-12:
        raise ValueError("kernel must be nonnegative")
    if lp_norm(w, p) > 1.0 + 1e-9:
        raise ValueError("lpNorm(w, p) must be <= 1")
    lam = estimate_deviation(w, refinement, restarts, seed).value
    if lam <= 0:
        raise ValueError("deviation estimate is zero; constants undefined")
    sup = lp_norm(w, np.inf)
    if math.isinf(p):
        ea, el, em = -1.0 / 3.0, 0.4, -0.2
    else:
        p = float(p)
        if p <= 1:
            raise ValueError("norm index must exceed 1")
        ea = -p / (3.0 * p - 2.0)
        el = 2.0 * p / (5.0 * p - 2.0)
        em = -(p - 2.0) / (5.0 * p - 2.0)
    alpha = sup ** ea * lam ** el
    m = max(1, math.ceil(lam ** em - 1e-9))
    return float(alpha), int(m)


@dataclasses.dataclass(frozen=True)
class RecoveryReport:
    """Everything the pipeline decided and measured.

    ``deviation_input`` / ``deviation_cutoff`` and ``theory_bound`` refer to
    the normalized kernel; ``measured_error`` is in original units.
    """

    case_taken: str                      # alpha-zero | case1 | case2 |
                                         # bounded-corollary | fallback-min-alpha
    p: float
    alpha: float
    normalization_scale: float
    cutoff_threshold: Optional[float]
    deviation_input: float
    deviation_cutoff: Optional[float]
    deviation_mode: str
    theory_bound: float
    measured_error: float
    measured_error_exact: bool
    approx_mode: str
    approx_grid: int
    robinson_validated: bool
    timings: dict
    warning: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "caseTaken": self.case_taken,
            "p": "inf" if math.isinf(self.p) else self.p,
            "alpha": self.alpha,
            "normalizationScale": self.normalization_scale,
            "M": self.cutoff_threshold,
            "lambdaW": self.deviation_input,
            "lambdaWM": self.deviation_cutoff,
            "lambdaMode": self.deviation_mode,
            "theoreticalBound": self.theory_bound,
            "measuredError": self.measured_error,
            "measuredErrorExact": self.measured_error_exact,
            "approxMode": self.approx_mode,
            "approxGrid": self.approx_grid,
            "robinsonValidated": self.robinson_validated,
            "timings": self.timings,
            "warning": self.warning,
        }


def measured_cut_error(w: StepGraphon, approx: RobinsonApprox,
                       cap: int = DEFAULT_DISPATCH_CAP, restarts: int = 50,
                       seed: int = 0):
    """Cut norm of (w - approx) on the common refinement.  Returns (value, exact)."""
    n, g = w.n, approx.grid_n
    common = math.lcm(n, g)
    diff = refine(w, common // n) - refine(StepGraphon(approx.values), common // g)
    res = cut_norm(diff, cap=cap, restarts=restarts, seed=seed)
    return res.value, res.exact


def _rescale_approx(ra: RobinsonApprox, scale: float) -> RobinsonApprox:
    if scale == 1.0:
        return ra
    vals = scale * ra.values
    vals.flags.writeable = False
    return RobinsonApprox(values=vals, alpha=ra.alpha, grid_n=ra.grid_n,
                          mode=ra.mode, robinson_validated=ra.robinson_validated)


def _identity_approx(w: StepGraphon):
    vals = np.array(w.values)
    vals.flags.writeable = False
    validated = bool(is_robinson(w, 1e-12).robinson)
    return RobinsonApprox(values=vals, alpha=0.0, grid_n=w.n,
                          mode="identity", robinson_validated=validated)


def recover(w: StepGraphon, p: float = 6.0, refinement: int = 2,
            restarts: int = 50, seed: int = 0, grid_n: Optional[int] = None,
            approx_mode: str = "auto", cutnorm_cap: int = DEFAULT_DISPATCH_CAP,
            cutnorm_restarts: int = 50):
    """Normalize in L^p, estimate the deviation, clip, approximate.

    Returns ``(RobinsonApprox, RecoveryReport)`` with the approximation in
    original units.  Requires a nonnegative kernel and a finite p > 5; use
    :func:`recover_bounded` for the p = inf route.

    A zero deviation estimate takes the identity path only when the matrix
    itself passes the Robinson check; otherwise (possible only with heuristic
    estimates) the pipeline falls back to the smallest positive width 1/n and
    flags the report, so every emitted approximation is Robinson.
    """
    p = float(p)
    if math.isinf(p):
        raise ValueError("p = inf is the bounded route; call recover_bounded")
    if not p > 5:
        raise ValueError("norm index p must exceed 5")
    if w.values.min() < 0:
        raise ValueError("kernel must be nonnegative")

    timings = {}
    t0 = time.perf_counter()
    scale = lp_norm(w, p)
    wn = w if scale in (0.0, 1.0) else (1.0 / scale) * w
    timings["normalize"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    cert = estimate_deviation(wn, refinement, restarts, seed)
    lam = cert.value
    timings["deviation"] = time.perf_counter() - t0

    if lam == 0.0 and is_robinson(w, 1e-12).robinson:
        approx = _identity_approx(w)
        report = RecoveryReport(
            case_taken="alpha-zero", p=p, alpha=0.0,
            normalization_scale=scale or 1.0, cutoff_threshold=None,
            deviation_input=0.0, deviation_cutoff=None,
            deviation_mode=cert.mode, theory_bound=0.0,
            measured_error=0.0, measured_error_exact=True,
            approx_mode="identity", approx_grid=w.n,
            robinson_validated=True, timings=timings, warning=None)
        return approx, report

    warning = None
    if lam == 0.0:
        # estimator blind spot (heuristic paths only: exact enumeration always
        # detects a pointwise violation).  A width of 0 would emit the
        # non-Robinson input itself, so use the smallest positive width.
        case = "fallback-min-alpha"
        warning = ("deviation estimate is zero but the matrix is not "
                   "Robinson; falling back to the smallest positive width")
        alpha = 1.0 / wn.n
        threshold = None
        lam_m = None
    else:
        t0 = time.perf_counter()
        threshold = 2.0 * lam ** (-1.0 / (p - 1.0))
        clip = cutoff(wn, threshold)
        cert_m = estimate_deviation(clip.graphon, refinement, restarts, seed)
        lam_m = cert_m.value
        timings["cutoff"] = time.perf_counter() - t0

        if lam_m > 0.0:
            case = "case1"
            alpha = lp_norm(clip.graphon, np.inf) ** (-0.4) * lam_m ** 0.4
        else:
            case = "case2"
            alpha = threshold ** (-0.4) * lam ** 0.4
        if alpha >= 1.0:
            alpha = 1.0 - 1e-9
            warning = "window width clamped below 1"

    t0 = time.perf_counter()
    ra = robinson_approx(wn, alpha, grid_n=grid_n, mode=approx_mode)
    approx = _rescale_approx(ra, scale)
    timings["approx"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err, err_exact = measured_cut_error(w, approx, cutnorm_cap, cutnorm_restarts, seed)
    timings["measureError"] = time.perf_counter() - t0

    report = RecoveryReport(
        case_taken=case, p=p, alpha=float(alpha), normalization_scale=scale,
        cutoff_threshold=threshold, deviation_input=lam,
        deviation_cutoff=lam_m, deviation_mode=cert.mode,
        theory_bound=theoretical_bound(p, lam),
        measured_error=err, measured_error_exact=err_exact,
        approx_mode=ra.mode, approx_grid=ra.grid_n,
        robinson_validated=ra.robinson_validated,
        timings=timings, warning=warning)
    return approx, report


def recover_bounded(w: StepGraphon, refinement: int = 2, restarts: int = 50,
                    seed: int = 0, grid_n: Optional[int] = None,
                    approx_mode: str = "auto",
                    cutnorm_cap: int = DEFAULT_DISPATCH_CAP,
                    cutnorm_restarts: int = 50):
    """Bounded-kernel recovery: width straight from the deviation estimate.

    Values within [0, 1]: alpha = ||w||_inf^(-1/3) lam^(2/5), bound
    44 lam^(1/5).  General bounded kernels: alpha = ||w||_inf^(-2/5)
    lam^(2/5), bound 44 ||w||_inf^(4/5) lam^(1/5) (both formulas are what the
    sup-norm rescaling route evaluates to on the original values, so no
    explicit rescaling is performed).

    A zero deviation estimate on a non-Robinson matrix falls back to the
    smallest positive width 1/n with a report warning.  Returns
    ``(RobinsonApprox, RecoveryReport)``.
    """
    sup = lp_norm(w, np.inf)
    unit = w.values.min() >= -1e-12 and w.values.max() <= 1.0 + 1e-12

    timings = {}
    t0 = time.perf_counter()
    cert = estimate_deviation(w, refinement, restarts, seed)
    lam = cert.value
    timings["deviation"] = time.perf_counter() - t0

    warning = None
    if lam == 0.0:
        if is_robinson(w, 1e-12).robinson:
            approx = _identity_approx(w)
            report = RecoveryReport(
                case_taken="alpha-zero", p=math.inf, alpha=0.0,
                normalization_scale=1.0, cutoff_threshold=None,
                deviation_input=0.0, deviation_cutoff=None,
                deviation_mode=cert.mode, theory_bound=0.0,
                measured_error=0.0, measured_error_exact=True,
                approx_mode="identity", approx_grid=w.n,
                robinson_validated=True, timings=timings, warning=None)
            return approx, report
        # zero estimate on a non-Robinson matrix: width 0 would be invalid
        case = "fallback-min-alpha"
        alpha = 1.0 / w.n
        warning = ("deviation estimate is zero but the matrix is not "
                   "Robinson; falling back to the smallest positive width")
        bound = 0.0
    elif unit:
        case = "bounded-corollary"
        alpha = sup ** (-1.0 / 3.0) * lam ** 0.4
        bound = theoretical_bound(math.inf, lam)
    else:
        case = "bounded-corollary"
        alpha = sup ** (-0.4) * lam ** 0.4
        bound = theoretical_bound(math.inf, lam, inf_norm=sup)
    if alpha >= 1.0:
        alpha = 1.0 - 1e-9
        warning = "window width clamped below 1"

    t0 = time.perf_counter()
    ra = robinson_approx(w, alpha, grid_n=grid_n, mode=approx_mode)
    timings["approx"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    err, err_exact = measured_cut_error(w, ra, cutnorm_cap, cutnorm_restarts, seed)
    timings["measureError"] = time.perf_counter() - t0

    report = RecoveryReport(
        case_taken=case, p=math.inf, alpha=float(alpha),
        normalization_scale=1.0, cutoff_threshold=None,
        deviation_input=lam, deviation_cutoff=None, deviation_mode=cert.mode,
        theory_bound=bound, measured_error=err, measured_error_exact=err_exact,
        approx_mode=ra.mode, approx_grid=ra.grid_n,
        robinson_validated=ra.robinson_validated,
        timings=timings, warning=warning)
    return ra, report
