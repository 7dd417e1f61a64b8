"""Nonlinear least squares and the spectroscopy/coherence fit library.

The engine is a damped Gauss-Newton (Levenberg-Marquardt) minimizer of
unweighted squared residuals with a numerically differenced Jacobian.
One-sigma parameter errors come from the linearized covariance
rss/(n-p) * inv(J^T J). Everything is deterministic for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
import json
import math

import numpy as np

from .constants import H_PLANCK, MU_B


class DegenerateFitError(RuntimeError):
    """No identifiable model content in the data (singular normal matrix)."""


class ExtractionError(RuntimeError):
    """A step of the peak-splitting extraction failed; message names it."""


@dataclass(frozen=True)
class FitResult:
    params: dict
    sigmas: dict
    rss: float
    converged: bool
    n_iter: int

    def to_dict(self) -> dict:
        return {"params": dict(self.params), "sigmas": dict(self.sigmas),
                "rss": self.rss, "converged": self.converged, "n_iter": self.n_iter}

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, **kw)


@dataclass(frozen=True)
class PeakDecision:
    kind: str             # 'single' or 'double'
    j_mhz: float
    j_sigma: float
    chi_ratio: float


# ---------------------------------------------------------------------------
# engine

_LAMBDA0 = 1e-3
_LAMBDA_UP = 7.0
_LAMBDA_DOWN = 0.35
_LAMBDA_MAX = 1e14


_DIFF_STEP = float(np.finfo(float).eps) ** (1.0 / 3.0)  # central-difference optimum


def _jacobian(residual, p, r0):
    n, npar = r0.size, p.size
    jac = np.empty((n, npar))
    for i in range(npar):
        h = _DIFF_STEP * max(abs(p[i]), 0.1)
        pp = p.copy(); pp[i] += h
        pm = p.copy(); pm[i] -= h
        jac[:, i] = (residual(pp) - residual(pm)) / (2.0 * h)
    return jac


def _clip(p, bounds):
    if bounds is None:
        return p
    lo, hi = bounds
    return np.clip(p, lo, hi)


def nlls_fit(model, x, y, init, names, bounds=None,
             max_iter: int = 200, ftol: float = 1e-12, xtol: float = 1e-12) -> FitResult:
    """Levenberg-Marquardt fit of model(x, p) to y.

    model maps (x, parameter array) to predicted y. bounds, when given, is
    a (lo, hi) pair of arrays; steps are projected into the box. Returns
    best-so-far parameters with converged=False when the iteration budget
    runs out; raises DegenerateFitError when no parameter affects the model
    at the starting point.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    p = _clip(np.asarray(init, dtype=float).copy(), bounds)
    if y.size <= p.size:
        raise ValueError("need more data points than parameters")
    if not np.all(np.isfinite(p)):
        raise ValueError("initial parameters must be finite")

    residual = lambda q: model(x, q) - y
    r = residual(p)
    rss = float(r @ r)
    # Below this the fit is exact to the accuracy the differenced Jacobian
    # can resolve; treat as converged rather than polishing noise.
    rss_floor = 100.0 * np.finfo(float).eps ** (4.0 / 3.0) * max(float(y @ y), 1e-300)
    lam = _LAMBDA0
    converged = False
    it = 0
    jac = _jacobian(residual, p, r)
    if not np.any(np.abs(jac) > 0):
        raise DegenerateFitError("model insensitive to every parameter at the initial point")

    def evaluate(delta):
        if not np.all(np.isfinite(delta)):
            return None
        q = _clip(p + delta, bounds)
        rq = residual(q)
        rssq = float(rq @ rq)
        if math.isfinite(rssq) and rssq <= rss:
            return q, rq, rssq
        return None

    for it in range(1, max_iter + 1):
        a = jac.T @ jac
        g = jac.T @ r
        d = np.diag(a).copy()
        d[d <= 0] = max(d.max(), 1.0)
        # Pure Gauss-Newton first: lands exactly on well-posed problems;
        # damped fallback with escalating lambda otherwise.
        accepted = None
        try:
            accepted = evaluate(np.linalg.solve(a, -g))
        except np.linalg.LinAlgError:
            pass
        while accepted is None and lam < _LAMBDA_MAX:
            try:
                accepted = evaluate(np.linalg.solve(a + lam * np.diag(d), -g))
            except np.linalg.LinAlgError:
                accepted = None
            if accepted is None:
                lam *= _LAMBDA_UP
        if accepted is None:
            converged = rss <= rss_floor or bool(np.all(np.abs(g) <= 1e-14 * max(rss, 1.0)))
            break
        p_new, r_new, rss_new = accepted
        small_step = bool(np.all(np.abs(p_new - p) <= xtol * (np.abs(p) + xtol)))
        small_f = (rss - rss_new) <= ftol * max(rss, 1e-300)
        was_below = rss <= rss_floor
        p, r, rss = p_new, r_new, rss_new
        lam = max(lam * _LAMBDA_DOWN, 1e-12)
        # below the numerical floor, allow one polishing pass then stop
        if small_step or small_f or rss == 0.0 or (rss <= rss_floor and was_below):
            converged = True
            break
        jac = _jacobian(residual, p, r)

    jac = _jacobian(residual, p, r)
    sigmas = _sigmas_from_normal(jac, rss, y.size, p.size)
    return FitResult(params={nm: float(v) for nm, v in zip(names, p)},
                     sigmas={nm: float(s) for nm, s in zip(names, sigmas)},
                     rss=rss, converged=converged, n_iter=it)


def _sigmas_from_normal(jac, rss, n, npar):
    """One-sigma errors from rss/(n-p) * pinv(J^T J); inf on null directions."""
    a = jac.T @ jac
    scale = rss / max(n - npar, 1)
    w, v = np.linalg.eigh(a)
    wmax = w.max() if w.size else 0.0
    if wmax <= 0:
        return np.full(npar, math.inf)
    good = w > 1e-14 * wmax
    inv_w = np.where(good, 1.0 / np.where(good, w, 1.0), 0.0)
    cov = (v * inv_w) @ v.T * scale
    sig = np.sqrt(np.maximum(np.diag(cov), 0.0))
    null_dir = ~good
    if null_dir.any():
        comp = np.abs(v[:, null_dir]).max(axis=1)
        sig[comp > 1e-8] = math.inf
    return sig


# ---------------------------------------------------------------------------
# gaussian peak models

def _gauss(x, a, center, sigma):
    return a / math.sqrt(2.0 * math.pi * sigma**2) * np.exp(-((x - center) ** 2) / (2.0 * sigma**2))


def single_gaussian_model(x, p):
    a, f_a, sigma, b, c = p
    return _gauss(x, a, f_a, sigma) + b * x + c


def _line_through_ends(x, y):
    if x[-1] == x[0]:
        return 0.0, float(np.mean(y))
    b = (y[-1] - y[0]) / (x[-1] - x[0])
    return float(b), float(y[0] - b * x[0])


def _width_estimate(x, ym, ipk):
    half = ym[ipk] / 2.0
    lo = ipk
    while lo > 0 and ym[lo] > half:
        lo -= 1
    hi = ipk
    while hi < len(ym) - 1 and ym[hi] > half:
        hi += 1
    fwhm = abs(x[hi] - x[lo])
    if fwhm <= 0:
        fwhm = abs(x[-1] - x[0]) / 10.0
    return max(fwhm / 2.3548, abs(x[-1] - x[0]) / len(x))


def fit_single_gaussian(trace) -> FitResult:
    """Fit A/sqrt(2 pi s^2) exp(-(f-f_a)^2/2s^2) + B f + C.

    Seeds: center at the argmax after median subtraction, width from the
    half-maximum crossing, area from the peak integral, line from the trace
    endpoints.
    """
    x, y = (np.asarray(v, dtype=float) for v in trace)
    if x.size < 10:
        raise ValueError("need at least 10 points for a peak fit")
    ym = y - np.median(y)
    ipk = int(np.argmax(ym))
    if ym[ipk] <= 0:
        raise DegenerateFitError("no peak above the median")
    sigma0 = _width_estimate(x, ym, ipk)
    a0 = float(np.trapezoid(np.clip(ym, 0, None), x))
    if a0 <= 0:
        a0 = ym[ipk] * sigma0 * math.sqrt(2.0 * math.pi)
    b0, c0 = _line_through_ends(x, y)
    init = [a0, x[ipk], sigma0, b0, c0]
    return nlls_fit(single_gaussian_model, x, y, init,
                    names=("a", "f_a", "sigma", "b", "c"))


def double_gaussian_model_fixed(fixed_f_a, fixed_sigma):
    def model(x, p):
        a_a, a_b, f_b, b, c = p
        return (_gauss(x, a_a, fixed_f_a, fixed_sigma)
                + _gauss(x, a_b, f_b, fixed_sigma) + b * x + c)
    return model


def fit_double_gaussian(trace, fixed_f_a: float, fixed_sigma: float) -> FitResult:
    """Shared-width double-Gaussian fit with (f_a, sigma) frozen.

    Free parameters: both areas, the second center and the linear
    background. The second center seeds at the largest residual of a
    linear prefit plus symmetric fallbacks at f_a +- 3 sigma; the
    lowest-rss candidate wins deterministically.
    """
    x, y = (np.asarray(v, dtype=float) for v in trace)
    model = double_gaussian_model_fixed(fixed_f_a, fixed_sigma)
    # Linear prefit with only the first peak: A_a, B, C enter linearly.
    g1 = _gauss(x, 1.0, fixed_f_a, fixed_sigma)
    basis = np.column_stack([g1, x, np.ones_like(x)])
    coef, *_ = np.linalg.lstsq(basis, y, rcond=None)
    a_a0 = max(float(coef[0]), 0.0)
    resid = y - basis @ coef
    f_b_res = float(x[int(np.argmax(resid))])
    a_b_res = max(float(resid.max()) * fixed_sigma * math.sqrt(2.0 * math.pi), 1e-12)
    best = None
    for f_b0 in (f_b_res, fixed_f_a + 3.0 * fixed_sigma, fixed_f_a - 3.0 * fixed_sigma):
        init = [a_a0, a_b_res, f_b0, float(coef[1]), float(coef[2])]
        fit = nlls_fit(model, x, y, init, names=("a_a", "a_b", "f_b", "b", "c"))
        if best is None or fit.rss < best.rss:
            best = fit
    return best


def extract_j(undriven, driven) -> PeakDecision:
    """Peak-splitting coupling extraction (five-step procedure).

    1. single-Gaussian fit of the undriven trace -> (f_a, sigma);
    2. double-Gaussian fit of the driven trace with (f_a, sigma) frozen;
    3. single-Gaussian fit of the driven trace;
    4. if (chi2_single - chi2_double)/chi2_double >= 0.1 the trace shows
       two peaks: J = (f_a - f_b)/2 with f_b's one-sigma as the error;
    5. otherwise a single peak and J = 0.

    Frequencies are in GHz; the returned coupling is in MHz. chi-square is
    the plain residual sum of squares.
    """
    try:
        single_u = fit_single_gaussian(undriven)
    except (DegenerateFitError, ValueError) as exc:
        raise ExtractionError(f"step 1 (undriven single fit) failed: {exc}") from exc
    f_a, sigma = single_u.params["f_a"], single_u.params["sigma"]
    try:
        double_d = fit_double_gaussian(driven, f_a, sigma)
    except (DegenerateFitError, ValueError) as exc:
        raise ExtractionError(f"step 2 (driven double fit) failed: {exc}") from exc
    try:
        single_d = fit_single_gaussian(driven)
    except (DegenerateFitError, ValueError) as exc:
        raise ExtractionError(f"step 3 (driven single fit) failed: {exc}") from exc
    chi_double = double_d.rss
    chi_single = single_d.rss
    if chi_double <= 0:
        chi_ratio = 0.0 if chi_single <= 0 else math.inf
    else:
        chi_ratio = (chi_single - chi_double) / chi_double
    if chi_ratio >= 0.1:
        j_ghz = (f_a - double_d.params["f_b"]) / 2.0
        return PeakDecision(kind="double", j_mhz=j_ghz * 1e3,
                            j_sigma=double_d.sigmas["f_b"] * 1e3, chi_ratio=chi_ratio)
    return PeakDecision(kind="single", j_mhz=0.0, j_sigma=0.0, chi_ratio=chi_ratio)


# ---------------------------------------------------------------------------
# resonator

def resonator_model_complex(f, p):
    f_r0, q_c, q_i, alpha = p
    return 1.0 - (1.0 + 1j * alpha) / (1.0 + q_c / q_i + 2j * q_c * (f - f_r0) / f_r0)


def fit_resonator(trace) -> FitResult:
    """Complex-transmission resonator fit for (f_r0, Q_c, Q_i, alpha).

    The trace is (f, complex S21) with the background already divided out;
    real and imaginary residuals are stacked.
    """
    f, s21 = trace
    f = np.asarray(f, dtype=float)
    s21 = np.asarray(s21, dtype=complex)
    mag = np.abs(s21)
    i0 = int(np.argmin(mag))
    f_r0_0 = float(f[i0])
    depth = float(np.clip(1.0 - mag[i0], 1e-6, 1.0 - 1e-9))
    below = mag < 1.0 - depth / 2.0
    if below.any():
        span = f[below]
        fwhm = float(span.max() - span.min())
    else:
        fwhm = float(f[-1] - f[0]) / 10.0
    fwhm = max(fwhm, (f[1] - f[0]) if f.size > 1 else 1e-6)
    q_l = f_r0_0 / fwhm
    q_c0 = q_l / depth
    q_i0 = q_l / max(1.0 - depth, 1e-6)

    def model(xs, p):
        pred = resonator_model_complex(xs[: xs.size // 2], p)
        return np.concatenate([pred.real, pred.imag])

    xs = np.concatenate([f, f])
    ys = np.concatenate([s21.real, s21.imag])
    lo = np.array([f.min(), 1e-3, 1e-3, -100.0])
    hi = np.array([f.max(), 1e12, 1e12, 100.0])
    return nlls_fit(model, xs, ys, [f_r0_0, q_c0, q_i0, 0.0],
                    names=("f_r0", "q_c", "q_i", "alpha"), bounds=(lo, hi))


# ---------------------------------------------------------------------------
# current-phase-relation fits

def _cpr_shape(x, skew):
    return np.sin(x + skew * np.sin(x))


def cpr_model(skewed: bool):
    def model(c, p):
        if skewed:
            pref, c0, period, offs, skew = p
            return pref * _cpr_shape(2.0 * math.pi * (c - c0) / period, skew) + offs
        pref, c0, period, offs = p
        return pref * np.sin(2.0 * math.pi * (c - c0) / period) + offs
    return model


def fit_cpr(trace, skewed: bool = False) -> FitResult:
    """Fit a (skewed) sinusoidal frequency-versus-control curve.

    Reported e_sigma is the sine prefactor divided by two, i.e. one fourth
    of the peak-to-peak dispersion of the fitted curve. control_zero is
    reduced into [0, period) and the prefactor canonicalized positive.
    """
    c, y = (np.asarray(v, dtype=float) for v in trace)
    names = ("prefactor", "control_zero", "control_period", "offset") + (("skew",) if skewed else ())
    model = cpr_model(skewed)
    offs0 = float(np.mean(y))
    pref0 = float((y.max() - y.min()) / 2.0)
    span = float(c[-1] - c[0])
    # dominant non-DC FFT component on the (near-)uniform grid
    yf = np.fft.rfft(y - offs0)
    k = int(np.argmax(np.abs(yf[1:])) + 1)
    period0 = span / k
    best = None
    for frac in (0.0, 0.25, 0.5, 0.75):
        init = [pref0, float(c[0]) + frac * period0, period0, offs0] + ([0.0] if skewed else [])
        probe = nlls_fit(model, c, y, init, names=names, max_iter=25)
        if best is None or probe.rss < best.rss:
            best = probe
    fit = nlls_fit(model, c, y, [best.params[n] for n in names], names=names)
    p = dict(fit.params)
    s = dict(fit.sigmas)
    if p["control_period"] < 0:
        # negating the period negates the whole oscillation
        p["control_period"] = -p["control_period"]
        p["prefactor"] = -p["prefactor"]
    if p["prefactor"] < 0:
        # half-period shift restores a positive prefactor (skew flips too)
        p["prefactor"] = -p["prefactor"]
        p["control_zero"] -= p["control_period"] / 2.0
        if skewed:
            p["skew"] = -p["skew"]
    p["control_zero"] %= p["control_period"]
    params = {"e_sigma": p["prefactor"] / 2.0, "offset": p["offset"],
              "control_zero": p["control_zero"], "control_period": p["control_period"]}
    sigmas = {"e_sigma": s["prefactor"] / 2.0, "offset": s["offset"],
              "control_zero": s["control_zero"], "control_period": s["control_period"]}
    if skewed:
        params["skew"] = p["skew"]
        sigmas["skew"] = s["skew"]
    return FitResult(params=params, sigmas=sigmas, rss=fit.rss,
                     converged=fit.converged, n_iter=fit.n_iter)


# ---------------------------------------------------------------------------
# coherence fits

def t1_model(t, p):
    a, t1, c = p
    return a * np.exp(-t / t1) + c


def fit_t1(trace) -> FitResult:
    """Exponential decay a exp(-t/T1) + c with T1 > 0 enforced."""
    t, y = (np.asarray(v, dtype=float) for v in trace)
    if np.ptp(y) == 0.0:
        return FitResult(params={"a": 0.0, "t1": math.nan, "c": float(y[0])},
                         sigmas={"a": math.inf, "t1": math.inf, "c": 0.0},
                         rss=0.0, converged=False, n_iter=0)
    c0 = float(y[-1])
    a0 = float(y[0] - c0)
    if a0 == 0.0:
        a0 = float(np.ptp(y))
    t1_0 = float(max(t[-1] - t[0], 1e-9)) / 3.0
    span = float(max(t[-1] - t[0], 1e-9))
    lo = np.array([-np.inf, span * 1e-6, -np.inf])
    hi = np.array([np.inf, np.inf, np.inf])
    return nlls_fit(t1_model, t, y, [a0, t1_0, c0], names=("a", "t1", "c"),
                    bounds=(lo, hi))


def decaying_oscillation_model(d_exponent: int):
    def model(t, p):
        a, period, phi, t2, c, e = p
        env = np.exp(-((t / t2) ** (d_exponent + 1)))
        return a * np.cos(2.0 * math.pi * t / period - phi) * env + c + e * t
    return model


def fit_decaying_oscillation(trace, d_exponent: int = 1) -> FitResult:
    """Decaying oscillation a cos(2 pi t/p - phi) exp(-(t/T2)^(d+1)) + c + e t.

    d = 1 (Gaussian envelope) by default; d is fixed, not fitted.
    """
    if d_exponent not in (0, 1, 2):
        raise ValueError("d_exponent must be 0, 1 or 2")
    t, y = (np.asarray(v, dtype=float) for v in trace)
    model = decaying_oscillation_model(d_exponent)
    c0 = float(np.mean(y))
    a0 = float((y.max() - y.min()) / 2.0)
    span = float(max(t[-1] - t[0], 1e-12))
    yf = np.fft.rfft(y - c0)
    k = int(np.argmax(np.abs(yf[1:])) + 1)
    p0 = span / k
    t2_0 = span / 2.0
    names = ("a", "period", "phi", "t2", "c", "e")
    lo = np.array([-np.inf, span * 1e-4, -np.inf, span * 1e-4, -np.inf, -np.inf])
    hi = np.array([np.inf, np.inf, np.inf, np.inf, np.inf, np.inf])
    best = None
    for phi0 in (0.0, math.pi / 2.0, math.pi, 3.0 * math.pi / 2.0):
        probe = nlls_fit(model, t, y, [a0, p0, phi0, t2_0, c0, 0.0], names=names,
                         bounds=(lo, hi), max_iter=30)
        if best is None or probe.rss < best.rss:
            best = probe
    return nlls_fit(model, t, y, [best.params[n] for n in names], names=names,
                    bounds=(lo, hi))


# ---------------------------------------------------------------------------
# scalar extractions and map processing

def g_factor_and_dispersion(f_max: float, f_min: float, b: float):
    """g-factor from the mean spin-flip frequency and the flux dispersion df.

    g = h (f_max + f_min) / (2 mu_B B), df = (f_max - f_min)/2; frequencies
    in GHz, field in tesla.
    """
    if b <= 0:
        raise ValueError("field magnitude must be > 0")
    if not (f_max >= f_min >= 0):
        raise ValueError("need f_max >= f_min >= 0")
    g = H_PLANCK * (f_max + f_min) * 1e9 / (2.0 * MU_B * b)
    df = (f_max - f_min) / 2.0
    return g, df


@dataclass(frozen=True)
class SnrFidelity:
    snr: float
    fidelity: float
    threshold: float
    reliable: bool


def _hist_double_gaussian(samples, seed_mu2):
    """Shared-width two-Gaussian fit to a sample histogram; returns
    (mu1, mu2, sigma, amp2_fraction, ok)."""
    samples = np.asarray(samples, dtype=float)
    nbins = int(np.clip(samples.size // 50, 20, 80))
    counts, edges = np.histogram(samples, bins=nbins)
    centers = 0.5 * (edges[:-1] + edges[1:])
    mu1_0 = float(centers[int(np.argmax(counts))])
    sig0 = max(float(np.std(samples)) / 2.0, (edges[1] - edges[0]))
    a1_0 = float(counts.max())
    a2_0 = max(a1_0 / 4.0, 1.0)

    def model(xc, p):
        a1, mu1, a2, mu2, sig = p
        return (a1 * np.exp(-((xc - mu1) ** 2) / (2 * sig**2))
                + a2 * np.exp(-((xc - mu2) ** 2) / (2 * sig**2)))

    lo = np.array([0.0, centers.min(), 0.0, centers.min(), sig0 * 1e-3])
    hi = np.array([np.inf, centers.max(), np.inf, centers.max(), np.inf])
    try:
        fit = nlls_fit(model, centers, counts.astype(float),
                       [a1_0, mu1_0, a2_0, seed_mu2, sig0],
                       names=("a1", "mu1", "a2", "mu2", "sigma"), bounds=(lo, hi))
    except (DegenerateFitError, ValueError):
        return mu1_0, mu1_0, float(np.std(samples)), 0.0, False
    p = fit.params
    total = p["a1"] + p["a2"]
    frac2 = p["a2"] / total if total > 0 else 0.0
    separated = abs(p["mu1"] - p["mu2"]) > p["sigma"] / 2.0
    ok = fit.converged and frac2 > 0.02 and separated
    return p["mu1"], p["mu2"], p["sigma"], frac2, ok


def snr_and_fidelity(hist_down, hist_up, threshold: float = None) -> SnrFidelity:
    """Readout contrast and fidelity from single-shot outcome samples.

    SNR = |mu_up - mu_down| / (2 sigma) using the fit of the initialization
    without a pi-pulse (hist_down). F = 1 - P(up|down)/2 - P(down|up)/2 at
    the supplied threshold, or at the threshold maximizing F (ties resolve
    to the lower threshold). Unimodal histograms fall back to per-histogram
    single-Gaussian statistics with reliable=False.
    """
    down = np.asarray(hist_down, dtype=float)
    up = np.asarray(hist_up, dtype=float)
    if down.size == 0 or up.size == 0:
        raise ValueError("both sample sets must be non-empty")
    mu1, mu2, sigma, _, ok = _hist_double_gaussian(down, float(np.median(up)))
    if ok:
        snr = abs(mu1 - mu2) / (2.0 * sigma)
    else:
        snr = abs(float(np.mean(up)) - float(np.mean(down))) / (2.0 * max(float(np.std(down)), 1e-300))
    up_is_high = float(np.mean(up)) >= float(np.mean(down))

    def fidelity_at(th):
        if up_is_high:
            p_up_given_down = float(np.mean(down > th))
            p_down_given_up = float(np.mean(up <= th))
        else:
            p_up_given_down = float(np.mean(down <= th))
            p_down_given_up = float(np.mean(up > th))
        return 1.0 - p_up_given_down / 2.0 - p_down_given_up / 2.0

    if threshold is None:
        # scan the sorted union of samples; ties resolve to the lower value
        pool = np.unique(np.concatenate([down, up]))
        best_f, best_th = -math.inf, float(pool[0])
        for th in pool:
            fv = fidelity_at(th)
            if fv > best_f:
                best_f, best_th = fv, float(th)
        threshold = best_th
    return SnrFidelity(snr=snr, fidelity=fidelity_at(threshold),
                       threshold=float(threshold), reliable=ok)


def median_subtract(map2d, axis: int = -1) -> np.ndarray:
    """Subtract each trace's median along the frequency axis."""
    m = np.asarray(map2d, dtype=float)
    if m.size == 0:
        raise ValueError("map must be non-empty")
    return m - np.median(m, axis=axis, keepdims=True)


def background_divide(mag, f_ghz, res_freqs_ghz, exclusion_mhz: float = 20.0):
    """Divide out the frequency-dependent background of a |S21|(control, f) map.

    For each frequency column the background is the median over the control
    rows whose resonance estimate is more than `exclusion_mhz` away from
    that frequency; the output is 10 log10(|S21|/background). Columns with
    no admissible rows fall back to the plain column median and are flagged.
    """
    mag = np.asarray(mag, dtype=float)
    f = np.asarray(f_ghz, dtype=float)
    res = np.asarray(res_freqs_ghz, dtype=float)
    if mag.shape != (res.size, f.size):
        raise ValueError("map shape must be (len(res_freqs), len(f))")
    out = np.empty_like(mag)
    flagged = np.zeros(f.size, dtype=bool)
    for jcol in range(f.size):
        admissible = np.abs(f[jcol] - res) * 1e3 > exclusion_mhz
        col = mag[:, jcol]
        if admissible.any():
            bg = np.median(col[admissible])
        else:
            bg = np.median(col)
            flagged[jcol] = True
        out[:, jcol] = 10.0 * np.log10(col / bg)
    return out, flagged


def flux_axis_map(control_values, control_zero: float, control_period: float) -> np.ndarray:
    """Map flux-control values to Phi/Phi0 = (c - c0)/period."""
    if control_period == 0:
        raise ValueError("control period must be nonzero")
    return (np.asarray(control_values, dtype=float) - control_zero) / control_period
