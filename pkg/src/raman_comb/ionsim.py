"""Monte-Carlo Rabi-flopping experiment: pump to the dark state, drive, count.

Each shot draws a quasi-static Rabi frequency Ω(1 + noise·N(0,1)), turns
the flop probability into a bright/dark outcome (with optical pumping
toward bright from leaked detection light), then draws a Poisson photon
count from the bright or dark mean.
"""
import csv
import io
import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .comb import fmt, round_sig

# detection pulse length; only the photon means depend on it and they are inputs
DETECTION_WINDOW = 1e-3


def flop_probability(omega, tau):
    """sin²(Ωτ/2): bright-state population after a resonant pulse."""
    omega = np.asarray(omega, dtype=float)
    tau = np.asarray(tau, dtype=float)
    if np.any(omega < 0) or np.any(tau < 0):
        raise ValueError("omega and tau must be non-negative")
    p = np.sin(0.5 * omega * tau) ** 2
    return float(p) if p.ndim == 0 else p


def estimate_p_bright(counts, bright_mean, dark_mean):
    """Bright-state fraction inferred from mean photon counts, clipped to [0, 1]."""
    counts = np.asarray(counts, dtype=float)
    if counts.size == 0:
        raise ValueError("no counts given")
    if not bright_mean > dark_mean:
        raise ValueError("bright_mean must exceed dark_mean")
    p = (counts.mean() - dark_mean) / (bright_mean - dark_mean)
    return float(min(max(p, 0.0), 1.0))


@dataclass(frozen=True)
class FlopConfig:
    """Rabi-flop experiment settings.

    The photon means default to 10 (bright) and 0.2 (dark) per detection
    window; these are illustrative values, not measured ones.
    """

    rabi_frequency: float = 2 * math.pi * 2e3
    max_pulse_time: float = 2e-3
    points: int = 100
    shots_per_point: int = 100
    amplitude_noise_frac: float = 0.0
    leakage_rate: float = 0.0
    bright_mean: float = 10.0
    dark_mean: float = 0.2
    rng_seed: int = 0

    def __post_init__(self):
        for name in ("rabi_frequency", "max_pulse_time", "amplitude_noise_frac", "leakage_rate", "dark_mean"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value >= 0):
                raise ValueError(f"{name} must be finite and non-negative, got {value!r}")
        if self.points < 2:
            raise ValueError("points must be at least 2")
        if self.shots_per_point < 1:
            raise ValueError("shots_per_point must be at least 1")
        if not self.bright_mean > self.dark_mean:
            raise ValueError("bright_mean must exceed dark_mean")

    @classmethod
    def from_dict(cls, doc):
        known = {f.name for f in fields(cls)}
        unknown = set(doc) - known
        if unknown:
            raise ValueError(f"unknown FlopConfig keys: {sorted(unknown)}")
        return cls(**doc)

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))

    def to_json(self):
        return json.dumps(asdict(self), indent=2)


@dataclass(frozen=True, eq=False)
class FlopCurve:
    tau: np.ndarray
    mean_photons: np.ndarray
    p_bright: np.ndarray
    stddev: np.ndarray

    def rows(self):
        return zip(self.tau, self.mean_photons, self.p_bright, self.stddev)

    def to_csv(self, precision=12):
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["tau_s", "mean_photons", "p_bright", "stddev"])
        for row in self.rows():
            writer.writerow([fmt(float(v), precision) for v in row])
        return buf.getvalue()

    def to_dicts(self, precision=12):
        keys = ("tau_s", "mean_photons", "p_bright", "stddev")
        return [{k: round_sig(float(v), precision) for k, v in zip(keys, row)} for row in self.rows()]


def point_rng(seed, index):
    """Independent reproducible stream for grid point `index`."""
    return np.random.default_rng([int(seed), int(index)])


def simulate_point(cfg, tau, rng):
    """Photon counts of all shots at pulse length `tau`."""
    n = cfg.shots_per_point
    omega = cfg.rabi_frequency * (1.0 + cfg.amplitude_noise_frac * rng.standard_normal(n))
    p = np.sin(0.5 * omega * tau) ** 2
    if cfg.leakage_rate > 0:
        p = p + (1.0 - p) * (-math.expm1(-cfg.leakage_rate * tau))
    bright = rng.random(n) < p
    return rng.poisson(np.where(bright, cfg.bright_mean, cfg.dark_mean))


def simulate_curve(cfg):
    """Averaged photon counts on a uniform pulse-time grid from 0 to max_pulse_time."""
    taus = np.linspace(0.0, cfg.max_pulse_time, cfg.points)
    mean = np.empty(cfg.points)
    p_est = np.empty(cfg.points)
    sd = np.empty(cfg.points)
    for i, tau in enumerate(taus):
        counts = simulate_point(cfg, tau, point_rng(cfg.rng_seed, i))
        mean[i] = counts.mean()
        sd[i] = counts.std(ddof=1) if counts.size > 1 else 0.0
        p_est[i] = estimate_p_bright(counts, cfg.bright_mean, cfg.dark_mean)
    return FlopCurve(taus, mean, p_est, sd)


def dephased_probability(omega, tau, noise_frac):
    """Shot-averaged sin²(Ω'τ/2) for Gaussian jitter of Ω: ½(1 − e^{−(σΩτ)²/2} cos Ωτ)."""
    tau = np.asarray(tau, dtype=float)
    envelope = np.exp(-0.5 * (noise_frac * omega * tau) ** 2)
    return 0.5 * (1.0 - envelope * np.cos(omega * tau))
