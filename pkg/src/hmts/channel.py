"""Geostationary spot-beam channel model.

Receiver SNR = beam-center SNR minus a location attenuation (parabolic
antenna radiation pattern over a uniformly populated disk) minus a weather
attenuation drawn from an empirical distribution, plus a class offset for
professional terminals.
"""

from __future__ import annotations

import csv
import functools
import math
import os
from dataclasses import dataclass
from importlib import resources

import numpy as np

from .errors import ParameterError

__all__ = [
    "BeamConfig",
    "WeatherCdf",
    "Receiver",
    "bessel_j1",
    "J1_FIRST_ZERO",
    "pattern_attenuation",
    "beam_edge_angle",
    "location_attenuation_cdf",
    "attenuation_at_disk_fraction",
    "sample_weather",
    "generate_population",
    "write_population",
    "read_population",
    "default_weather_cdf",
]

SPEED_OF_LIGHT = 299_792_458.0
GEO_ALTITUDE_M = 35_786_000.0
PROFESSIONAL_OFFSET_DB = 5.0

J1_FIRST_ZERO = 3.8317059702075125


def bessel_j1(x):
    """First-order Bessel function of the first kind.

    Power series up to |x| = 12, Hankel asymptotic expansion beyond;
    absolute accuracy around 1e-10.  Accepts scalars or arrays.
    """
    x = np.asarray(x, dtype=float)
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)

    small = np.abs(x) <= 12.0
    if small.any():
        xs = x[small]
        half = 0.5 * xs
        term = half.copy()
        acc = term.copy()
        h2 = half * half
        for k in range(1, 40):
            term = -term * h2 / (k * (k + 1))
            acc += term
        out[small] = acc
    if (~small).any():
        xl = x[~small]
        ax = np.abs(xl)
        mu = 4.0
        p = np.ones_like(ax)
        q = np.zeros_like(ax)
        term = np.ones_like(ax)
        sign_p, sign_q = 1.0, 1.0
        for k in range(1, 11):
            term = term * (mu - (2 * k - 1) ** 2) / (8.0 * k * ax)
            if k % 2:  # odd k feeds Q
                q += sign_q * term
                sign_q = -sign_q
            else:
                sign_p = -sign_p
                p += sign_p * term
        chi = ax - 0.75 * math.pi
        val = np.sqrt(2.0 / (math.pi * ax)) * (p * np.cos(chi) - q * np.sin(chi))
        out[~small] = np.where(xl < 0, -val, val)  # J1 is odd
    return out[0] if scalar else out


@dataclass(frozen=True)
class BeamConfig:
    """Spot-beam parameters; the beam edge is where the pattern is
    ``edge_attenuation_db`` below boresight."""

    snr_max_db: float
    antenna_diameter_m: float = 1.5
    frequency_hz: float = 20e9
    edge_attenuation_db: float = 4.0
    satellite_altitude_m: float = GEO_ALTITUDE_M

    def __post_init__(self):
        if self.antenna_diameter_m <= 0:
            raise ParameterError("antenna diameter must be > 0")
        if self.frequency_hz <= 0:
            raise ParameterError("frequency must be > 0")
        if self.edge_attenuation_db <= 0:
            raise ParameterError("edge attenuation must be > 0")
        if self.satellite_altitude_m <= 0:
            raise ParameterError("satellite altitude must be > 0")

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.frequency_hz

    @property
    def first_null_angle_rad(self) -> float:
        s = J1_FIRST_ZERO * self.wavelength_m / (math.pi * self.antenna_diameter_m)
        return math.asin(s) if s < 1.0 else 0.5 * math.pi


def pattern_attenuation(off_axis_angle_rad, cfg: BeamConfig):
    """Radiation-pattern attenuation (dB >= 0) of a parabolic antenna.

    Valid up to the first pattern null; zero at boresight and strictly
    increasing in between.
    """
    angle = np.asarray(off_axis_angle_rad, dtype=float)
    scalar = angle.ndim == 0
    angle = np.abs(np.atleast_1d(angle))
    null = cfg.first_null_angle_rad
    if np.any(angle >= null):
        raise ParameterError(
            f"angle beyond the first pattern null ({null:.6g} rad)"
        )
    u = np.sin(angle) * math.pi * cfg.antenna_diameter_m / cfg.wavelength_m
    ratio = np.ones_like(u)
    nz = u > 0
    ratio[nz] = 2.0 * bessel_j1(u[nz]) / u[nz]
    att = -20.0 * np.log10(ratio)
    att = np.maximum(att, 0.0)
    return float(att[0]) if scalar else att


@functools.lru_cache(maxsize=None)
def beam_edge_angle(cfg: BeamConfig) -> float:
    """Off-axis angle (rad) at which the pattern attenuation equals the
    configured edge attenuation."""
    lo, hi = 0.0, cfg.first_null_angle_rad * (1.0 - 1e-12)
    target = cfg.edge_attenuation_db
    if pattern_attenuation(hi, cfg) < target:
        raise ParameterError("edge attenuation not reached before the first null")
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pattern_attenuation(mid, cfg) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def location_attenuation_cdf(attenuation_db: float, cfg: BeamConfig) -> float:
    """P(location attenuation <= a) for a uniformly populated beam disk.

    Equals the squared ratio of ground radii; the ground radius uses the
    flat-Earth mapping r = altitude * tan(angle), adequate at sub-degree
    beam widths.
    """
    a = float(attenuation_db)
    if not 0.0 <= a <= cfg.edge_attenuation_db:
        raise ParameterError(
            f"attenuation must lie in [0, {cfg.edge_attenuation_db}], got {a}"
        )
    edge = beam_edge_angle(cfg)
    if a == 0.0:
        return 0.0
    lo, hi = 0.0, edge
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if pattern_attenuation(mid, cfg) < a:
            lo = mid
        else:
            hi = mid
    angle = 0.5 * (lo + hi)
    return (math.tan(angle) / math.tan(edge)) ** 2


def attenuation_at_disk_fraction(radius_fraction, cfg: BeamConfig):
    """Location attenuation at a given fraction of the beam-edge ground
    radius (inverse of the location CDF up to the square)."""
    frac = np.asarray(radius_fraction, dtype=float)
    if np.any(frac < 0) or np.any(frac > 1):
        raise ParameterError("radius fraction must lie in [0, 1]")
    edge = beam_edge_angle(cfg)
    angle = np.arctan(frac * math.tan(edge))
    return pattern_attenuation(angle, cfg)


@dataclass(frozen=True)
class WeatherCdf:
    """Piecewise-linear CDF of the weather attenuation in dB."""

    points: tuple[tuple[float, float], ...]  # (attenuation_db, cum_prob)

    def __post_init__(self):
        pts = tuple((float(a), float(p)) for a, p in self.points)
        object.__setattr__(self, "points", pts)
        if not pts:
            raise ParameterError("weather CDF needs at least one breakpoint")
        attens = [a for a, _ in pts]
        probs = [p for _, p in pts]
        if any(a < 0 for a in attens) or any(b < a for a, b in zip(attens, attens[1:])):
            raise ParameterError("attenuations must be nonnegative and nondecreasing")
        if any(not 0 <= p <= 1 for p in probs) or any(q < p for p, q in zip(probs, probs[1:])):
            raise ParameterError("probabilities must be nondecreasing within [0, 1]")
        if probs[-1] != 1.0:
            raise ParameterError("the last cumulative probability must be 1")

    @property
    def max_attenuation_db(self) -> float:
        return self.points[-1][0]

    @classmethod
    def from_csv(cls, path: str | os.PathLike) -> "WeatherCdf":
        pts = []
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = None
            for lineno, row in enumerate(reader, start=1):
                if not row or row[0].lstrip().startswith("#"):
                    continue
                if header is None:
                    header = [c.strip() for c in row]
                    if header != ["attenuation_db", "cumulative_probability"]:
                        raise ParameterError(
                            f"{path}: line {lineno}: expected header "
                            "attenuation_db,cumulative_probability"
                        )
                    continue
                try:
                    pts.append((float(row[0]), float(row[1])))
                except (ValueError, IndexError):
                    raise ParameterError(f"{path}: line {lineno}: bad breakpoint {row!r}") from None
        if not pts:
            raise ParameterError(f"{path}: no breakpoints found")
        return cls(points=tuple(pts))

    def to_csv(self, path: str | os.PathLike) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["attenuation_db", "cumulative_probability"])
            for a, p in self.points:
                writer.writerow([f"{a:.6g}", f"{p:.6g}"])


def default_weather_cdf() -> WeatherCdf:
    """Placeholder attenuation distribution shipped with the package."""
    ref = resources.files("hmts.data").joinpath("weather_cdf.csv")
    with resources.as_file(ref) as path:
        return WeatherCdf.from_csv(path)


def sample_weather(cdf: WeatherCdf, rng, size=None):
    """Inverse-CDF draws with linear interpolation between breakpoints."""
    rng = np.random.default_rng(rng)
    u = rng.random(size)
    probs = np.array([p for _, p in cdf.points])
    attens = np.array([a for a, _ in cdf.points])
    return np.interp(u, probs, attens)


@dataclass(frozen=True)
class Receiver:
    """One terminal: SNR, class, and the number of receivers it serves."""

    snr_db: float
    terminal_class: str = "personal"
    weight: int = 1

    def __post_init__(self):
        if self.terminal_class not in ("personal", "professional"):
            raise ParameterError(f"unknown terminal class {self.terminal_class!r}")
        if self.weight < 1:
            raise ParameterError("weight must be >= 1")


def generate_population(
    n: int,
    cfg: BeamConfig,
    cdf: WeatherCdf,
    professional_share: float = 0.0,
    professional_weight: int = 1,
    seed=0,
) -> list[Receiver]:
    """Draw a terminal population serving ``n`` receivers.

    Roughly ``professional_share * n`` receivers sit behind professional
    terminals (``professional_weight`` receivers each, +5 dB); the rest
    use personal terminals.  With the default weight 1 every served
    receiver is its own population entry.  For weights above 1 the
    terminal count is kept even so the population can always be paired,
    at the cost of a dropped terminal when the split comes out odd.
    """
    if n < 2 or n % 2:
        raise ParameterError(f"n must be even and >= 2, got {n}")
    if not 0.0 <= professional_share <= 1.0:
        raise ParameterError("professional_share must lie in [0, 1]")
    if professional_weight < 1:
        raise ParameterError("professional_weight must be >= 1")
    prof_terms = round(n * professional_share / professional_weight)
    prof_terms = min(prof_terms, n // professional_weight)
    personal = n - prof_terms * professional_weight
    if (personal + prof_terms) % 2:
        if personal > 0:
            personal -= 1
        else:
            prof_terms -= 1
    total = personal + prof_terms
    rng = np.random.default_rng(seed)
    loc = attenuation_at_disk_fraction(np.sqrt(rng.random(total)), cfg)
    weather = sample_weather(cdf, rng, total)
    base = cfg.snr_max_db - loc - weather
    receivers = []
    for k in range(total):
        if k < prof_terms:
            receivers.append(
                Receiver(
                    snr_db=float(base[k]) + PROFESSIONAL_OFFSET_DB,
                    terminal_class="professional",
                    weight=professional_weight,
                )
            )
        else:
            receivers.append(Receiver(snr_db=float(base[k])))
    return receivers


def write_population(receivers, path: str | os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["snr_db", "class", "weight"])
        for r in receivers:
            writer.writerow([f"{r.snr_db:.10g}", r.terminal_class, r.weight])


def read_population(path: str | os.PathLike) -> list[Receiver]:
    receivers = []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = None
        for lineno, row in enumerate(reader, start=1):
            if not row or row[0].lstrip().startswith("#"):
                continue
            if header is None:
                header = [c.strip() for c in row]
                if header != ["snr_db", "class", "weight"]:
                    raise ParameterError(
                        f"{path}: line {lineno}: expected header snr_db,class,weight"
                    )
                continue
            try:
                receivers.append(
                    Receiver(float(row[0]), row[1].strip(), int(row[2]))
                )
            except (ValueError, IndexError):
                raise ParameterError(f"{path}: line {lineno}: bad receiver row {row!r}") from None
    if not receivers:
        raise ParameterError(f"{path}: no receivers found")
    return receivers
