"""Maximizing |Ω/Ω₀|, parameter sweeps, and least-squares fits of Rabi data."""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, replace

import numpy as np
from scipy.optimize import least_squares

from .comb import PhysicalContext, fmt, round_sig
from .schemes import CavityDetuned, mz_shifted_curve, rabi

GOLDEN = (math.sqrt(5) - 1) / 2
DEGENERATE_LEVEL = 1e-12
# convergence also requires the scaled gradient (see fit_model) below this
GRADIENT_TOL = 1e-6


def golden_section_max(f, lo, hi, tol=1e-6, max_iter=200):
    """Maximize a unimodal `f` on [lo, hi]; returns (x, f(x))."""
    a, b = float(lo), float(hi)
    x1 = b - GOLDEN * (b - a)
    x2 = a + GOLDEN * (b - a)
    f1, f2 = f(x1), f(x2)
    for _ in range(max_iter):
        if b - a <= tol:
            break
        if f1 >= f2:
            b, x2, f2 = x2, x1, f1
            x1 = b - GOLDEN * (b - a)
            f1 = f(x1)
        else:
            a, x1, f1 = x1, x2, f2
            x2 = a + GOLDEN * (b - a)
            f2 = f(x2)
    return (x1, f1) if f1 >= f2 else (x2, f2)


@dataclass(frozen=True)
class Optimum:
    argmax: dict
    value: float
    degenerate: bool
    evaluations: int

    def to_dict(self, precision=12):
        return {
            "argmax": {k: round_sig(v, precision) for k, v in self.argmax.items()},
            "max_abs": round_sig(self.value, precision),
            "degenerate": self.degenerate,
            "evaluations": self.evaluations,
        }


def _objective(template):
    count = [0]

    def f(**values):
        count[0] += 1
        return rabi(replace(template, **values)).abs

    return f, count


def maximize(template, bounds, grid=201, tol=1e-6):
    """Maximize |Ω/Ω₀| over one or two fields of `template`.

    `bounds` maps field names (``phi``, ``delta``, ``slow_phase``,
    ``fast_phase``, ``carrier_phase``) to (low, high). A coarse grid of
    `grid` points per axis picks the best cell, which is then refined by
    golden-section search (cyclic over the coordinates in 2-D) to a bracket
    of `tol`. An objective that never exceeds 1e-12 on the grid is reported
    as degenerate.
    """
    names = list(bounds)
    if not 1 <= len(names) <= 2:
        raise ValueError("maximize takes one or two free parameters")
    for name in names:
        if not hasattr(template, name):
            raise ValueError(f"{type(template).__name__} has no parameter {name!r}")
        lo, hi = bounds[name]
        if not (math.isfinite(lo) and math.isfinite(hi) and lo < hi):
            raise ValueError(f"bad bounds for {name}: {bounds[name]!r}")
    if grid < 200:
        raise ValueError("grid needs at least 200 points per axis")
    f, count = _objective(template)
    axes = [np.linspace(*bounds[name], grid) for name in names]
    mesh = np.meshgrid(*axes, indexing="ij")
    values = np.empty(mesh[0].shape)
    for idx in np.ndindex(values.shape):
        values[idx] = f(**{n: float(m[idx]) for n, m in zip(names, mesh)})
    best = np.unravel_index(int(np.argmax(values)), values.shape)
    point = {n: float(ax[i]) for n, ax, i in zip(names, axes, best)}
    top = float(values[best])
    if top < DEGENERATE_LEVEL:
        return Optimum(point, top, True, count[0])

    brackets = {}
    for n, ax, i in zip(names, axes, best):
        step = ax[1] - ax[0]
        brackets[n] = (max(ax[0], ax[i] - step), min(ax[-1], ax[i] + step))
    for _ in range(50 if len(names) > 1 else 1):
        moved = 0.0
        for n in names:
            others = {k: v for k, v in point.items() if k != n}
            x, fx = golden_section_max(lambda v: f(**others, **{n: v}), *brackets[n], tol=tol)
            if fx >= top:
                moved = max(moved, abs(x - point[n]))
                point[n], top = x, fx
        if moved < tol:
            break
        if len(names) > 1:
            # re-centre the brackets on the moved point
            for n, ax in zip(names, axes):
                step = ax[1] - ax[0]
                brackets[n] = (max(ax[0], point[n] - step), min(ax[-1], point[n] + step))
    return Optimum(point, top, False, count[0])


@dataclass(frozen=True)
class SweepSpec:
    scheme: object
    parameter: str
    start: float
    stop: float
    steps: int

    def __post_init__(self):
        if not hasattr(self.scheme, self.parameter):
            raise ValueError(f"{type(self.scheme).__name__} has no parameter {self.parameter!r}")
        if not self.start < self.stop:
            raise ValueError("sweep needs start < stop")
        if self.steps < 2:
            raise ValueError("sweep needs at least two steps")


def sweep(spec):
    """Rows (value, re, im, abs) of Ω/Ω₀ on a uniform grid, endpoints included."""
    rows = []
    for v in np.linspace(spec.start, spec.stop, spec.steps):
        w = rabi(replace(spec.scheme, **{spec.parameter: float(v)})).omega_over_omega0
        rows.append((float(v), w.real, w.imag, abs(w)))
    return np.array(rows)


def sweep_to_csv(rows, precision=12):
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["param", "re", "im", "abs"])
    for row in rows:
        writer.writerow([fmt(v, precision) for v in row])
    return buf.getvalue()


def sweep_to_dicts(rows, precision=12):
    keys = ("param", "re", "im", "abs")
    return [{k: round_sig(v, precision) for k, v in zip(keys, row)} for row in rows]


# --- least-squares fits -----------------------------------------------------

class DataFormatError(ValueError):
    """Malformed fit-data file; the message names the row and column."""


@dataclass(frozen=True)
class FitData:
    x: np.ndarray
    omega: np.ndarray
    sigma: np.ndarray

    def __post_init__(self):
        x, y, s = (np.asarray(a, dtype=float) for a in (self.x, self.omega, self.sigma))
        if not (x.shape == y.shape == s.shape and x.ndim == 1):
            raise ValueError("x, omega and sigma must be equal-length vectors")
        if x.size < 5:
            raise ValueError(f"a fit needs at least 5 points, got {x.size}")
        if np.any(s <= 0):
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "omega", y)
        object.__setattr__(self, "sigma", s)

    def to_csv(self, precision=12):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["x", "omega", "sigma"])
        for row in zip(self.x, self.omega, self.sigma):
            writer.writerow([fmt(v, precision) for v in row])
        return buf.getvalue()


def read_fit_data(text):
    """Parse ``x,omega,sigma`` CSV text into :class:`FitData`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    expected = ["x", "omega", "sigma"]
    if header is None or [h.strip() for h in header] != expected:
        raise DataFormatError(f"row 1: header must be {','.join(expected)}, got {header!r}")
    cols = [[], [], []]
    for rowno, row in enumerate(reader, start=2):
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != 3:
            raise DataFormatError(f"row {rowno}: expected 3 columns, got {len(row)}")
        for j, (name, cell) in enumerate(zip(expected, row)):
            try:
                value = float(cell)
            except ValueError:
                raise DataFormatError(f"row {rowno}, column {name!r}: not a number: {cell!r}") from None
            if not math.isfinite(value):
                raise DataFormatError(f"row {rowno}, column {name!r}: not finite")
            if name == "sigma" and value <= 0:
                raise DataFormatError(f"row {rowno}, column 'sigma': must be positive")
            cols[j].append(value)
    if len(cols[0]) < 5:
        raise DataFormatError(f"need at least 5 data rows, got {len(cols[0])}")
    return FitData(*map(np.array, cols))


MODELS = {
    # model name -> (shape parameter, bounds for it)
    "mz-shifted": ("phi", (0.0, 3.0)),
    "cavity": ("delta", (-0.999, 0.999)),
}


def model_curve(model, x, shape_value, ctx=PhysicalContext()):
    """Unscaled |Ω/Ω₀| at abscissae `x` for a fit model.

    mz-shifted: x is the path difference Δx in metres and `shape_value` is φ.
    cavity: x is φ and `shape_value` is the cavity detuning δ.
    """
    x = np.asarray(x, dtype=float)
    if model == "mz-shifted":
        return mz_shifted_curve(shape_value, ctx.dk * x)
    if model == "cavity":
        return np.array([rabi(CavityDetuned(float(p), shape_value)).abs for p in x])
    raise ValueError(f"unknown fit model {model!r}; choose from {sorted(MODELS)}")


@dataclass
class FitReport:
    model: str
    fitted: dict
    residual_rms: float
    iterations: int
    converged: bool
    covariance_diag: list
    gradient_norm: float = 0.0
    message: str = ""

    def to_dict(self, precision=12):
        doc = asdict(self)
        doc["fitted"] = {k: round_sig(v, precision) for k, v in self.fitted.items()}
        doc["residual_rms"] = round_sig(self.residual_rms, precision)
        doc["covariance_diag"] = [round_sig(v, precision) for v in self.covariance_diag]
        doc["gradient_norm"] = round_sig(self.gradient_norm, precision)
        return doc

    def to_json(self, precision=12):
        return json.dumps(self.to_dict(precision), indent=2)


def _best_scale(y, m, w):
    den = np.sum(w * m * m)
    return float(np.sum(w * y * m) / den) if den > 0 else 0.0


def initial_guess(data, model, ctx=PhysicalContext(), points=50):
    """Best (scale, shape) over a 50-point grid of the shape parameter."""
    name, (lo, hi) = MODELS[model]
    w = 1.0 / data.sigma**2
    best = None
    for v in np.linspace(lo, hi, points):
        m = model_curve(model, data.x, float(v), ctx)
        scale = _best_scale(data.omega, m, w)
        chi2 = float(np.sum(w * (data.omega - scale * m) ** 2))
        if best is None or chi2 < best[0]:
            best = (chi2, scale, float(v))
    return {"scale": best[1], name: best[2]}


def fit_model(data, model, initial=None, ctx=PhysicalContext(), max_iterations=200, rtol=1e-10):
    """Weighted least-squares fit of scale·|Ω/Ω₀| to Rabi-frequency data.

    Only the y-axis scale and one shape parameter are floated: φ for
    ``mz-shifted`` (data against path difference) and δ for ``cavity``
    (data against φ). Iteration stops when the relative change of the cost
    drops below `rtol` or after `max_iterations`. A singular Jacobian at the
    solution yields a non-converged report rather than an exception.

    The reported gradient norm is max|J^T r| / (||J|| ||y/sigma||) for the
    weighted residuals r, which is scale free; a converged fit has it below
    1e-6.
    """
    if model not in MODELS:
        raise ValueError(f"unknown fit model {model!r}; choose from {sorted(MODELS)}")
    name, (lo, hi) = MODELS[model]
    start = dict(initial) if initial else initial_guess(data, model, ctx)
    x0 = np.array([start["scale"], start[name]], dtype=float)
    x0[1] = min(max(x0[1], lo), hi)

    def residuals(params):
        return (params[0] * model_curve(model, data.x, params[1], ctx) - data.omega) / data.sigma

    try:
        res = least_squares(
            residuals,
            x0,
            bounds=([-np.inf, lo], [np.inf, hi]),
            method="trf",
            x_scale="jac",
            ftol=rtol,
            xtol=1e-12,
            gtol=1e-12,
            max_nfev=max_iterations,
        )
    except (ValueError, np.linalg.LinAlgError) as exc:
        return FitReport(model, {"scale": x0[0], name: x0[1]}, math.nan, 0, False, [math.nan] * 2,
                         math.nan, f"solver failed: {exc}")

    fitted = {"scale": float(res.x[0]), name: float(res.x[1])}
    raw = res.fun * data.sigma
    rms = float(np.sqrt(np.mean(raw**2)))
    jac = res.jac
    denom = np.linalg.norm(jac, 2) * np.linalg.norm(data.omega / data.sigma)
    grad = float(np.max(np.abs(jac.T @ res.fun)) / denom) if denom > 0 else math.nan
    message = res.message
    singular = True
    cov = [math.nan, math.nan]
    if np.all(np.isfinite(jac)):
        _, sv, vt = np.linalg.svd(jac, full_matrices=False)
        if sv.size and sv[-1] > 1e-12 * sv[0]:
            singular = False
            # diag of (J^T J)^-1 with J already weighted by 1/sigma
            cov = [float(v) for v in np.sum(vt.T**2 / sv**2, axis=1)]
    converged = bool(res.success) and not singular and grad < GRADIENT_TOL
    if singular:
        message = f"singular normal equations at solution; {message}"
    elif not grad < GRADIENT_TOL:
        message = f"gradient {grad:.3g} above tolerance; {message}"
    return FitReport(model, fitted, rms, int(res.nfev), converged, cov, grad, message)


def synthetic_data(model, scale, shape_value, x, noise_frac=0.0, rng=None, ctx=PhysicalContext()):
    """Model curve with Gaussian noise of `noise_frac` of each point's value.

    The sigma column holds each point's noise level, floored at 1e-3 of the
    curve peak so that zeros of the curve keep a finite weight.
    """
    clean = scale * model_curve(model, x, shape_value, ctx)
    peak = float(np.max(np.abs(clean))) or 1.0
    sd = noise_frac * np.abs(clean)
    if noise_frac > 0:
        rng = np.random.default_rng() if rng is None else rng
        y = clean + sd * rng.standard_normal(clean.shape)
    else:
        y = clean.copy()
    sigma = np.maximum(sd, 1e-3 * peak)
    return FitData(np.asarray(x, dtype=float), y, sigma)


def fit_recovery_rate(phi=0.764, trials=500, points=50, noise_frac=0.03, tolerance=0.02, seed=0,
                      ctx=PhysicalContext()):
    """Fraction of seeded noisy mz-shifted fits that recover φ within `tolerance`.

    Each trial draws from its own stream seeded by (seed, trial), so the
    result is independent of evaluation order.
    """
    x = np.linspace(0.0, 2 * math.pi, points, endpoint=False) / ctx.dk
    hits = 0
    for trial in range(trials):
        rng = np.random.default_rng([seed, trial])
        data = synthetic_data("mz-shifted", 1.0, phi, x, noise_frac, rng, ctx)
        report = fit_model(data, "mz-shifted", ctx=ctx)
        if report.converged and abs(report.fitted["phi"] - phi) <= tolerance * phi:
            hits += 1
    return hits / trials
