"""Statistics for benchmark results: decay fits, gate errors and consistency checks.

For ``n`` qubits with ``D = 2**n`` the mean fidelity after ``l`` steps is
modeled as ``1/D + (1 - 1/D) (1 - d_m) (1 - d_g)**l`` where an average error
``eps`` corresponds to the depolarizing probability ``d = D eps / (D - 1)``.
"""
from __future__ import annotations

import math
import warnings
from collections import defaultdict
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import least_squares
from scipy.special import gammaincc

from .sim import RunRecord, depolarizing_probability

__all__ = [
    "AnalysisError",
    "BootstrapResult",
    "DecayFit",
    "EPGError",
    "EPGResult",
    "FitError",
    "LengthPoint",
    "aggregate",
    "bootstrap",
    "build_report",
    "chi_square_pvalue",
    "epg_from_eps",
    "extract_epg",
    "fit_decay",
    "interleaved_eps",
    "linearized_epo_estimate",
    "model_fidelity",
    "plot_rows",
    "scatter_prediction",
    "window_fits",
]


class AnalysisError(ValueError):
    pass


class FitError(AnalysisError):
    def __init__(self, message: str, x0=None, residuals=None):
        self.x0 = x0
        self.residuals = residuals
        detail = f" (initial guess {x0}, residuals {residuals})" if x0 is not None else ""
        super().__init__(message + detail)


class EPGError(AnalysisError):
    pass


def model_fidelity(length, eps_g: float, eps_m: float, n: int):
    dim = 2**n
    dg = depolarizing_probability(eps_g, n)
    dm = depolarizing_probability(eps_m, n)
    return 1 / dim + (1 - 1 / dim) * (1 - dm) * (1 - dg) ** np.asarray(length, dtype=float)


@dataclass(frozen=True)
class LengthPoint:
    length: int
    mean_fidelity: float
    sem: float
    n_sequences: int
    fidelities: tuple[float, ...] = ()
    runs: tuple[int, ...] = ()


def _point(length: int, fids: np.ndarray, runs: np.ndarray) -> LengthPoint:
    sem = float(np.std(fids, ddof=1) / math.sqrt(len(fids))) if len(fids) > 1 else 0.0
    return LengthPoint(length, float(np.mean(fids)), sem, len(fids), tuple(float(f) for f in fids),
                       tuple(int(r) for r in runs))


def aggregate(records, lengths=None) -> list[LengthPoint]:
    """Per-length mean and standard error of the per-sequence success fractions."""
    buckets: dict[int, list[RunRecord]] = defaultdict(list)
    for r in records:
        buckets[r.length].append(r)
    wanted = sorted(buckets) if lengths is None else list(lengths)
    if not wanted:
        raise AnalysisError("no records to aggregate")
    out = []
    for length in wanted:
        recs = buckets.get(length)
        if not recs:
            raise AnalysisError(f"no records for length {length}")
        runs = np.array([r.runs for r in recs])
        fids = np.array([r.successes for r in recs]) / runs
        out.append(_point(length, fids, runs))
    return out


@dataclass(frozen=True)
class DecayFit:
    n_qubits: int
    eps_g: float
    eps_m: float
    se_eps_g: float
    se_eps_m: float
    chi2: float
    dof: int
    p_value: float
    lengths: tuple[int, ...]
    covariance: np.ndarray = field(repr=False, compare=False, default=None)
    se_source: str = "covariance"
    samples: np.ndarray | None = field(repr=False, compare=False, default=None)

    def __call__(self, length):
        return model_fidelity(length, self.eps_g, self.eps_m, self.n_qubits)

    def with_bootstrap(self, boot: BootstrapResult) -> DecayFit:
        return replace(self, se_eps_g=boot.se_eps_g, se_eps_m=boot.se_eps_m, se_source="bootstrap",
                       samples=boot.samples)


def _sigmas(points: list[LengthPoint], sem_floor: float) -> np.ndarray:
    out = []
    for p in points:
        s = p.sem
        if s <= 0:
            total = sum(p.runs) if p.runs else 0
            f = p.mean_fidelity
            s = math.sqrt(f * (1 - f) / total) if total else 0.0
        out.append(s if s > 0 else sem_floor)
    return np.array(out)


def _initial_guess(lengths, means, n):
    dim = 2**n
    top = (dim - 1) / dim
    y = np.clip((means - 1 / dim) / (1 - 1 / dim), 1e-6, 1.0)
    slope, intercept = np.polyfit(lengths, np.log(y), 1)
    dg = 1 - math.exp(min(slope, 0.0))
    dm = 1 - math.exp(min(intercept, 0.0))
    return np.clip([dg / (dim / (dim - 1)), dm / (dim / (dim - 1))], 0.0, top)


def _saturation_cut(points, n, margin, allow):
    floor = 1 / 2**n + margin
    for i, p in enumerate(points):
        if p.mean_fidelity <= floor:
            if allow or i == len(points) - 1:
                break
            warnings.warn(f"mean fidelity saturates at length {p.length}; later lengths are dropped",
                          stacklevel=3)
            return points[: i + 1]
    return points


def fit_decay(points: list[LengthPoint], n_qubits: int, sem_floor: float = 1e-3,
              saturation_margin: float = 0.0, allow_saturated: bool = False) -> DecayFit:
    """Weighted least-squares fit of ``(eps_g, eps_m)`` with weights ``1/sem**2``.

    Parameter errors come from the Jacobian with the given (absolute) sigmas.
    Zero-spread lengths use the binomial standard error at the observed
    fidelity, or ``sem_floor`` if that is zero too.
    """
    points = sorted(points, key=lambda p: p.length)
    points = _saturation_cut(points, n_qubits, saturation_margin, allow_saturated)
    lengths = np.array([p.length for p in points], dtype=float)
    if len(set(lengths)) < 3:
        raise AnalysisError("a decay fit needs at least three distinct lengths")
    means = np.array([p.mean_fidelity for p in points])
    sig = _sigmas(points, sem_floor)
    top = (2**n_qubits - 1) / 2**n_qubits

    def resid(x):
        return (model_fidelity(lengths, x[0], x[1], n_qubits) - means) / sig

    x0 = _initial_guess(lengths, means, n_qubits)
    res = least_squares(resid, x0, bounds=([0.0, 0.0], [top, top]), method="trf",
                        xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=10000)
    if not res.success:
        raise FitError(f"decay fit did not converge: {res.message}", list(x0), list(res.fun))
    jac = res.jac
    cov = np.linalg.pinv(jac.T @ jac)
    chi2 = float(np.sum(res.fun**2))
    dof = len(points) - 2
    return DecayFit(n_qubits, float(res.x[0]), float(res.x[1]), float(math.sqrt(max(cov[0, 0], 0))),
                    float(math.sqrt(max(cov[1, 1], 0))), chi2, dof, chi_square_pvalue(chi2, dof),
                    tuple(int(v) for v in lengths), cov)


def chi_square_pvalue(chi2: float, dof: int) -> float:
    """Upper-tail probability of the chi-square distribution."""
    if chi2 < 0 or dof < 1:
        raise ValueError("need chi2 >= 0 and dof >= 1")
    return float(gammaincc(dof / 2, chi2 / 2))


def interleaved_eps(eps_g: float, eps_G: float, n: int) -> float:
    """Error per interleaved step for independent depolarizing step and gate errors."""
    k = 2**n / (2**n - 1)
    return (1 - (1 - k * eps_g) * (1 - k * eps_G)) / k


def epg_from_eps(eps_g: float, eps_g_prime: float, n: int) -> float:
    k = 2**n / (2**n - 1)
    base = 1 - k * eps_g
    if base <= 0:
        raise EPGError(f"eps_g = {eps_g} saturates the decay; the gate error is undefined")
    return (1 - (1 - k * eps_g_prime) / base) / k


@dataclass(frozen=True)
class EPGResult:
    eps_G: float
    se_eps_G: float
    eps_g: float
    eps_g_prime: float


def extract_epg(fit_base: DecayFit, fit_interleaved: DecayFit, n: int | None = None) -> EPGResult:
    """Gate error from the base and interleaved fits.

    With bootstrap samples on both fits the error is the spread of the
    per-sample gate errors; otherwise the two fit errors are propagated in
    quadrature.
    """
    n = fit_base.n_qubits if n is None else n
    if fit_interleaved.n_qubits != n or fit_base.n_qubits != n:
        raise AnalysisError("fits are for different qubit counts")
    a, b = fit_base.eps_g, fit_interleaved.eps_g
    eps_G = epg_from_eps(a, b, n)
    if fit_base.samples is not None and fit_interleaved.samples is not None:
        m = min(len(fit_base.samples), len(fit_interleaved.samples))
        vals = [epg_from_eps(x, y, n) for x, y in zip(fit_base.samples[:m, 0], fit_interleaved.samples[:m, 0])
                if 1 - 2**n / (2**n - 1) * x > 0]
        se = float(np.std(vals, ddof=1))
    else:
        k = 2**n / (2**n - 1)
        d_prime = 1 / (1 - k * a)
        d_base = -(1 - k * b) / (1 - k * a) ** 2
        se = math.hypot(d_prime * fit_interleaved.se_eps_g, d_base * fit_base.se_eps_g)
    return EPGResult(eps_G, se, a, b)


@dataclass(frozen=True)
class BootstrapResult:
    se_eps_g: float
    se_eps_m: float
    samples: np.ndarray
    failures: int = 0


def bootstrap(records, n_qubits: int, B: int = 1000, rng: np.random.Generator | None = None,
              **fit_kwargs) -> BootstrapResult:
    """Partially parametric bootstrap of the decay-fit parameters.

    Each resample draws, per length, as many sequences as were measured
    (with replacement) and replaces each drawn fidelity by a fresh binomial
    fraction over that sequence's run count.
    """
    if B < 100:
        raise ValueError("use at least 100 bootstrap resamples")
    rng = np.random.default_rng() if rng is None else rng
    points = aggregate(records)
    samples, failures = [], 0
    for _ in range(B):
        resampled = []
        for p in points:
            fids = np.array(p.fidelities)
            runs = np.array(p.runs)
            idx = rng.integers(0, len(fids), size=len(fids))
            new = rng.binomial(runs[idx], fids[idx]) / runs[idx]
            resampled.append(_point(p.length, new, runs[idx]))
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore")
                f = fit_decay(resampled, n_qubits, **fit_kwargs)
        except FitError:
            failures += 1
            continue
        samples.append((f.eps_g, f.eps_m))
    arr = np.array(samples)
    return BootstrapResult(float(np.std(arr[:, 0], ddof=1)), float(np.std(arr[:, 1], ddof=1)), arr, failures)


def window_fits(points: list[LengthPoint], windows, n_qubits: int, **fit_kwargs) -> list[DecayFit]:
    """Independent fits over sub-ranges; each window is an iterable of lengths."""
    fits = []
    by_length = {p.length: p for p in points}
    for w in windows:
        w = list(w)
        missing = [length for length in w if length not in by_length]
        if missing:
            raise AnalysisError(f"window lengths {missing} have no data")
        if len(w) < 3:
            raise AnalysisError(f"window {w} has fewer than three lengths")
        if len(w) == 3:
            warnings.warn(f"window {w} leaves one degree of freedom; its significance is low", stacklevel=2)
        fits.append(fit_decay([by_length[length] for length in w], n_qubits, **fit_kwargs))
    return fits


def binomial_sd(p: float, runs: int) -> float:
    return math.sqrt(p * (1 - p) / runs)


def scatter_prediction(length: int, table, fit: DecayFit, runs: int, eps_G: float) -> float:
    """Expected SD of per-sequence fidelity at ``length`` for two qubits.

    Sequences differ in how many ``G`` gates their random steps need; with a
    per-gate error ``eps_G`` that makes their fidelities spread.  This is
    combined in quadrature with binomial sampling at the model fidelity.
    """
    n = fit.n_qubits
    if n != 2:
        raise AnalysisError("scatter prediction is defined for two qubits")
    dim = 2**n
    keep = 1 - depolarizing_probability(eps_G, n)
    dist = table.cost_distribution()
    m1 = float(sum(w * keep**k for k, w in dist.items()))
    m2 = float(sum(w * keep ** (2 * k) for k, w in dist.items()))
    step_keep = 1 - depolarizing_probability(fit.eps_g, n)
    rest = min(step_keep / m1, 1.0) if m1 > 0 else 0.0
    amp = (1 - 1 / dim) * (1 - depolarizing_probability(fit.eps_m, n)) * rest**length
    var_gates = amp**2 * max(m2**length - m1 ** (2 * length), 0.0)
    p = float(fit(length))
    return math.sqrt(var_gates + binomial_sd(p, runs) ** 2)


def linearized_epo_estimate(one_qubit_step_error: float, pulses_per_1q_step: float, eps_G: float,
                            g_per_step: float, pulses_per_2q_step: float) -> tuple[float, float]:
    """Per-pulse error ``e1`` and the resulting error estimate for a two-qubit step."""
    vals = (one_qubit_step_error, pulses_per_1q_step, eps_G, g_per_step, pulses_per_2q_step)
    if any(v < 0 for v in vals):
        raise ValueError("inputs must be nonnegative")
    e1 = 1.2 * one_qubit_step_error / pulses_per_1q_step
    return e1, g_per_step * eps_G + pulses_per_2q_step * e1


def plot_rows(points: list[LengthPoint], fit: DecayFit, set_name: str = "base") -> list[dict]:
    return [{"set": set_name, "length": p.length, "mean": p.mean_fidelity, "sem": p.sem,
             "fitted": float(fit(p.length))} for p in points]


def _fit_dict(fit: DecayFit) -> dict:
    return {"eps_g": fit.eps_g, "se_eps_g": fit.se_eps_g, "eps_m": fit.eps_m, "se_eps_m": fit.se_eps_m,
            "chi2": fit.chi2, "dof": fit.dof, "p": fit.p_value, "lengths": list(fit.lengths),
            "se_source": fit.se_source}


def build_report(records, n_qubits: int, B: int = 1000, rng: np.random.Generator | None = None,
                 windows=None, **fit_kwargs) -> tuple[dict, list[dict]]:
    """Fit both sets, bootstrap their errors and extract the gate error.

    Returns the report dictionary and rows for a plotting CSV.
    """
    rng = np.random.default_rng() if rng is None else rng
    base = [r for r in records if r.set == "base"]
    inter = [r for r in records if r.set == "interleaved"]
    if not base:
        raise AnalysisError("no base-set records")
    rows = []
    points = aggregate(base)
    fit = fit_decay(points, n_qubits, **fit_kwargs)
    fit = fit.with_bootstrap(bootstrap(base, n_qubits, B, rng, **fit_kwargs))
    rows += plot_rows(points, fit, "base")
    report = _fit_dict(fit)
    report.update(eps_G=None, se_eps_G=None, interleaved=None)
    if inter:
        ipoints = aggregate(inter)
        ifit = fit_decay(ipoints, n_qubits, **fit_kwargs)
        ifit = ifit.with_bootstrap(bootstrap(inter, n_qubits, B, rng, **fit_kwargs))
        rows += plot_rows(ipoints, ifit, "interleaved")
        epg = extract_epg(fit, ifit, n_qubits)
        report.update(eps_G=epg.eps_G, se_eps_G=epg.se_eps_G, interleaved=_fit_dict(ifit))
    if windows is None:
        lengths = [p.length for p in points]
        windows = [lengths[:4], lengths[-3:]] if len(lengths) >= 6 else []
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        report["windows"] = [dict(_fit_dict(f), window=list(w))
                             for w, f in zip(windows, window_fits(points, windows, n_qubits, **fit_kwargs))]
    return report, rows
