"""Independent reference computations used to validate the package.

Everything here deliberately avoids the code paths under test: mutual
information uses Gauss-Hermite quadrature instead of Monte-Carlo, the
equal-rate point enumerates segment-diagonal intersections instead of
building a hull, matchings are enumerated via permutations, and the
Bessel function is integrated numerically.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from numpy.polynomial.hermite import hermgauss


def mi_quadrature(symbols, tx_labels, cond_labels, snr_db, order=48):
    """Mutual information (bit/symbol) between the message selected by
    ``tx_labels`` and the AWGN channel output, conditioned on the message
    classes of ``cond_labels`` being known at the receiver.

    ``tx_labels[i]`` is the message carried by symbol i; symbols sharing a
    ``cond_labels`` value form the known conditioning class (pass a
    constant to condition on nothing).  Gauss-Hermite quadrature over the
    complex noise makes this deterministic and independent of any
    Monte-Carlo sampling.
    """
    symbols = np.asarray(symbols, dtype=complex)
    m = len(symbols)
    n0 = 10.0 ** (-snr_db / 10.0)
    sigma = math.sqrt(n0 / 2.0)
    nodes, weights = hermgauss(order)
    # complex noise n = sigma*sqrt(2)*(t1 + i t2) with weight w1*w2/pi
    noise = sigma * math.sqrt(2.0) * (nodes[:, None] + 1j * nodes[None, :])
    wgrid = (weights[:, None] * weights[None, :]) / math.pi

    total = 0.0
    classes = {}
    for i in range(m):
        classes.setdefault(cond_labels[i], []).append(i)
    info_bits = None
    for i in range(m):
        cond = classes[cond_labels[i]]
        same_msg = [j for j in cond if tx_labels[j] == tx_labels[i]]
        n_msgs = len({tx_labels[j] for j in cond})
        if info_bits is None:
            info_bits = math.log2(n_msgs)
        y = symbols[i] + noise
        d2 = np.abs(y[:, :, None] - symbols[np.asarray(cond)][None, None, :]) ** 2
        logw = -d2 / n0
        hi = logw.max(axis=2, keepdims=True)
        lse_all = hi[:, :, 0] + np.log(np.exp(logw - hi).sum(axis=2))
        d2s = np.abs(y[:, :, None] - symbols[np.asarray(same_msg)][None, None, :]) ** 2
        logws = -d2s / n0
        his = logws.max(axis=2, keepdims=True)
        lse_same = his[:, :, 0] + np.log(np.exp(logws - his).sum(axis=2))
        total += float(np.sum(wgrid * (lse_all - lse_same))) / math.log(2.0)
    return info_bits - total / m


def stream_mi_quadrature(constellation, stream, snr_db, order=48):
    """Quadrature MI of a Constellation stream (same semantics as the
    package estimator: HE marginalises LE, LE conditions on HE)."""
    labels = constellation.labels
    if stream == "single":
        tx = labels
        cond = ("",) * len(labels)
    elif stream == "HE":
        tx = constellation.stream_labels("HE")
        cond = ("",) * len(labels)
    elif stream == "LE":
        tx = labels
        cond = constellation.stream_labels("HE")
    else:
        raise ValueError(stream)
    return mi_quadrature(constellation.symbols, tx, cond, snr_db, order=order)


def qpsk_mi(snr_db, order=48):
    """Single-stream QPSK mutual information via quadrature."""
    symbols = np.exp(1j * np.radians(np.array([45.0, 135.0, 225.0, 315.0])))
    labels = ("00", "01", "11", "10")
    return mi_quadrature(symbols, labels, ("",) * 4, snr_db, order=order)


def invert_mi_grid(mi_fn, target, lo=-10.0, hi=30.0, step=0.01):
    """Fine-grid inversion: smallest SNR on the grid with MI >= target."""
    snr = lo
    while snr <= hi:
        if mi_fn(snr) >= target:
            return snr
        snr += step
    raise ValueError(f"target {target} not reached below {hi} dB")


def max_min_rate_exhaustive(points):
    """max over time-sharing mixtures of two operating points of
    min(r1, r2), by enumerating segment-diagonal intersections."""
    pts = [(0.0, 0.0)]
    for p in points:
        x = p[0] if isinstance(p, tuple) else p.r1
        y = p[1] if isinstance(p, tuple) else p.r2
        pts.extend([(x, y), (x, 0.0), (0.0, y)])
    best = max(min(x, y) for x, y in pts)
    for (x1, y1), (x2, y2) in itertools.combinations(pts, 2):
        denom = (x2 - x1) - (y2 - y1)
        if denom == 0.0:
            continue
        t = (y1 - x1) / denom
        if 0.0 <= t <= 1.0:
            best = max(best, x1 + t * (x2 - x1))
    return best


def ts_common_rate_search(rates, weights, rel_tol=1e-9):
    """Largest feasible common per-receiver rate by refining a rate grid.

    Feasible means sum_i r * w_i / R_i <= 1.  Independent of the
    closed-form harmonic expression.
    """
    lo = 0.0
    hi = min(r / w for r, w in zip(rates, weights))

    def feasible(r):
        return sum(r * w / rate for rate, w in zip(rates, weights)) <= 1.0

    for _ in range(6):
        grid = np.linspace(lo, hi, 1001)
        ok = [r for r in grid if feasible(r)]
        best = ok[-1]
        span = (hi - lo) / 1000.0
        lo, hi = best, min(best + span, hi)
        if span <= rel_tol * max(best, 1e-300):
            break
    return best


def two_rate_ts_grid(r1, r2, n=200001):
    """Grid search of max over t in [0,1] of min(t*r1, (1-t)*r2)."""
    t = np.linspace(0.0, 1.0, n)
    return float(np.max(np.minimum(t * r1, (1.0 - t) * r2)))


def all_matchings(n):
    """Every perfect matching of range(n), via permutation dedup."""
    seen = set()
    for perm in itertools.permutations(range(n)):
        pairs = frozenset(
            frozenset((perm[2 * k], perm[2 * k + 1])) for k in range(n // 2)
        )
        seen.add(pairs)
    return [
        tuple(tuple(sorted(p)) for p in sorted(m, key=sorted)) for m in seen
    ]


def matching_delta(snrs, pairs):
    return sum(abs(snrs[i] - snrs[j]) for i, j in pairs) / len(pairs)


def bessel_j1_simpson(x, n=40001):
    """J1 via Simpson quadrature of its integral representation."""
    tau = np.linspace(0.0, math.pi, n)
    integrand = np.cos(tau - x * np.sin(tau))
    h = tau[1] - tau[0]
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return float(h / 3.0 * np.sum(weights * integrand) / math.pi)
