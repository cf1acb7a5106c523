"""Modified Bessel functions of integer order and the first-order Marcum Q-function.

Everything here works with exponentially scaled Bessel values,
``ive(k, z) = exp(-z) * I_k(z)``, so arguments in the thousands neither
overflow nor lose the log-domain tail of ``Q_1``.
"""

import math

import numpy as np

__all__ = [
    "bessel_i0",
    "bessel_i0e",
    "bessel_i1e",
    "bessel_ratio_sequence",
    "i1_i0_complement",
    "marcum_q1",
    "log_marcum_q1",
]

# Power series below this |x|, Hankel asymptotic expansion above.  At the
# crossover the asymptotic truncation error is ~exp(-2x), far below 1e-16.
_SERIES_CUTOFF = 25.0
_SERIES_TERMS = 70
_ASYMPTOTIC_TERMS = 30


def _series_scaled(x, order):
    # exp(-|x|) * sum (x/2)^(2k+order) / (k! (k+order)!), for |x| <= cutoff
    q = 0.25 * x * x
    term = np.ones_like(x) if order == 0 else 0.5 * x
    total = term.copy()
    qmax = float(np.max(q)) if q.size else 0.0
    for k in range(1, _SERIES_TERMS):
        term = term * q / (k * (k + order))
        total = total + term
        # terms fall monotonically once k exceeds the largest x/2
        if k * k > qmax and np.all(term <= 1e-17 * total):
            break
    return total * np.exp(-np.abs(x))


def _asymptotic_scaled(x, order):
    # exp(-x) I_nu(x) ~ 1/sqrt(2 pi x) * sum_k (-1)^k a_k(nu) / x^k, x > 0
    mu = 4.0 * order * order
    term = np.ones_like(x)
    total = term.copy()
    for k in range(1, _ASYMPTOTIC_TERMS):
        term = -term * (mu - (2 * k - 1) ** 2) / (k * 8.0 * x)
        total = total + term
    return total / np.sqrt(2.0 * np.pi * x)


def _scaled(x, order):
    arr = np.asarray(x, dtype=float)
    ax = np.abs(arr)
    out = np.empty_like(ax)
    small = ax <= _SERIES_CUTOFF
    if np.any(small):
        out[small] = _series_scaled(ax[small], order)
    if np.any(~small):
        out[~small] = _asymptotic_scaled(ax[~small], order)
    if order == 1:
        out = np.where(arr < 0, -out, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def bessel_i0e(x):
    """Exponentially scaled ``I_0``: ``exp(-|x|) * I_0(x)``."""
    return _scaled(x, 0)


def bessel_i1e(x):
    """Exponentially scaled ``I_1``: ``exp(-|x|) * I_1(x)`` (odd in ``x``)."""
    return _scaled(x, 1)


def i1_i0_complement(x):
    """``1 - I_1(x) / I_0(x)`` without cancellation at large ``x``.

    Past the series cutoff the two Hankel expansions are subtracted term by
    term, so the result keeps full relative accuracy where it falls like
    ``1 / 2x``.  The ratio is odd, so negative ``x`` gives ``2 - f(|x|)``.
    """
    signed = np.asarray(x, dtype=float)
    arr = np.abs(signed)
    out = np.empty_like(arr)
    small = arr <= _SERIES_CUTOFF
    if np.any(small):
        xs = arr[small]
        out[small] = 1.0 - _series_scaled(xs, 1) / _series_scaled(xs, 0)
    if np.any(~small):
        xl = arr[~small]
        c0 = np.ones_like(xl)
        c1 = np.ones_like(xl)
        s0 = c0.copy()
        diff = np.zeros_like(xl)
        for k in range(1, _ASYMPTOTIC_TERMS):
            c0 = -c0 * (0.0 - (2 * k - 1) ** 2) / (k * 8.0 * xl)
            c1 = -c1 * (4.0 - (2 * k - 1) ** 2) / (k * 8.0 * xl)
            s0 = s0 + c0
            diff = diff + (c0 - c1)
        out[~small] = diff / s0
    out = np.where(signed < 0, 2.0 - out, out)
    if np.ndim(x) == 0:
        return float(out)
    return out


def bessel_i0(x):
    """Modified Bessel function of the first kind, order zero.

    Overflows to ``inf`` past ``|x| ~ 713``; use :func:`bessel_i0e` there.
    """
    with np.errstate(over="ignore"):
        return bessel_i0e(x) * np.exp(np.abs(x))


def bessel_ratio_sequence(z, kmax):
    """Ratios ``I_k(z) / I_{k-1}(z)`` for ``k = 1..kmax`` by backward recurrence.

    Uses ``I_k / I_{k-1} = 1 / (2k/z + I_{k+1} / I_k)``, which is stable in the
    downward direction.  The start order is chosen so that the contamination
    from the truncated tail has decayed below double precision by ``kmax``.

    Returns a list whose element ``k`` is the ratio for order ``k``; element 0
    is unused.
    """
    if z <= 0.0:
        raise ValueError("z must be positive")
    start = kmax + 20 + int(math.ceil(math.sqrt(80.0 * (z + 1.0))))
    nu = start + 1.0
    ratio = z / (nu - 0.5 + math.sqrt((nu + 0.5) ** 2 + z * z))
    two_over_z = 2.0 / z
    ratios = [0.0] * (kmax + 1)
    for k in range(start, 0, -1):
        ratio = 1.0 / (k * two_over_z + ratio)
        if k <= kmax:
            ratios[k] = ratio
    return ratios


_EPS = 1e-18


def _scaled_bessel_sum(z, r, first):
    """``sum_{k >= first} r^k * ive(k, z)`` for ``0 < r <= 1``, ``z >= 0``."""
    if z == 0.0:
        # a*b can underflow; ive(0, 0) = 1 and ive(k, 0) = 0 for k >= 1
        return 1.0 if first == 0 else 0.0
    i0 = float(bessel_i0e(z))
    if r == 0.0:
        # b/a can underflow too; only the k = 0 term survives
        return i0 if first == 0 else 0.0
    if r < 1.0:
        k_geo = 40.0 / -math.log(r)
    else:
        k_geo = math.inf
    # ive(k, z) / ive(0, z) ~ exp(-k^2 / 2z), below 1e-18 once k^2 > 83 z
    kmax = int(min(k_geo, math.sqrt(100.0 * z))) + 16
    while True:
        ratios = bessel_ratio_sequence(z, kmax)
        term = i0
        total = i0 if first == 0 else 0.0
        converged = False
        for k in range(1, kmax + 1):
            term *= r * ratios[k]
            total += term
            if term <= _EPS * total or term == 0.0:
                converged = True
                break
        if converged:
            return total
        kmax *= 2


def _check_args(a, b):
    a = float(a)
    b = float(b)
    if not (a >= 0.0 and b >= 0.0):
        raise ValueError(f"marcum_q1 requires a >= 0 and b >= 0, got a={a}, b={b}")
    return a, b


def log_marcum_q1(a, b):
    """Natural log of ``Q_1(a, b)``, accurate even where ``Q_1`` underflows."""
    a, b = _check_args(a, b)
    if b == 0.0:
        return 0.0
    if math.isinf(b):
        return -math.inf
    if a == 0.0:
        return -0.5 * b * b
    if a < b:
        return -0.5 * (b - a) ** 2 + math.log(_scaled_bessel_sum(a * b, a / b, 0))
    return math.log1p(-_complement_a_ge_b(a, b))


def _complement_a_ge_b(a, b):
    # 1 - Q_1(a, b) for a >= b > 0
    log_pref = -0.5 * (a - b) ** 2
    # the sum is at most 1/2; below this the complement is under 1e-18
    if log_pref < -42.0:
        return 0.0
    return math.exp(log_pref) * _scaled_bessel_sum(a * b, b / a, 1)


def _marcum_scalar(a, b):
    a, b = _check_args(a, b)
    if b == 0.0:
        return 1.0
    if math.isinf(b):
        return 0.0
    if a == 0.0:
        return math.exp(-0.5 * b * b)
    if a < b:
        log_pref = -0.5 * (b - a) ** 2
        if log_pref < -750.0:
            return 0.0
        return math.exp(log_pref) * _scaled_bessel_sum(a * b, a / b, 0)
    return 1.0 - _complement_a_ge_b(a, b)


def _scaled_bessel_sum_vec(z, r, first, kmin=0):
    """Array form of :func:`_scaled_bessel_sum`, ``z > 0`` elementwise.

    The backward recurrence runs over all elements at once and the sum is
    accumulated in Horner form in the same sweep::

        S / ive(0, z) = 1 + r R_1 (1 + r R_2 (1 + ... (1 + r R_K)))

    with ``R_k = I_k / I_{k-1}``.  Elements whose truncated term is not below
    the tolerance are redone with a doubled ``K``.
    """
    i0 = bessel_i0e(z)
    with np.errstate(divide="ignore"):
        k_geo = np.where(r < 1.0, 40.0 / -np.log(np.where(r < 1.0, r, 0.5)), np.inf)
    kmax = int(np.max(np.minimum(k_geo, np.sqrt(100.0 * z)))) + 16
    kmax = max(kmax, kmin)
    start = kmax + 20 + int(math.ceil(math.sqrt(80.0 * (float(np.max(z)) + 1.0))))
    nu = start + 1.0
    ratio = z / (nu - 0.5 + np.sqrt((nu + 0.5) ** 2 + z * z))
    with np.errstate(over="ignore"):
        # subnormal z: 2/z overflows to inf and the ratios collapse to 0, as they should
        two_over_z = 2.0 / z
    h = np.ones_like(z)
    last = np.ones_like(z)  # product of r R_k over k = 1..kmax
    with np.errstate(over="ignore"):
        for k in range(start, 1, -1):
            ratio = 1.0 / (k * two_over_z + ratio)
            if k <= kmax:
                step = r * ratio
                h = 1.0 + step * h
                last = last * step
        ratio = 1.0 / (two_over_z + ratio)
    step = r * ratio
    last = last * step
    tail = step * h  # sum over k >= 1, normalized by ive(0, z)
    total = i0 * (1.0 + tail) if first == 0 else i0 * tail
    bad = ~(last <= _EPS * (1.0 + tail))
    if np.any(bad):
        total[bad] = _scaled_bessel_sum_vec(z[bad], r[bad], first, 2 * kmax)
    return total


def _marcum_array(a, b):
    a, b = np.broadcast_arrays(np.asarray(a, dtype=float), np.asarray(b, dtype=float))
    if not (np.all(a >= 0.0) and np.all(b >= 0.0)):
        raise ValueError("marcum_q1 requires a >= 0 and b >= 0")
    out = np.empty(a.shape)
    a_flat, b_flat, o = a.ravel(), b.ravel(), out.reshape(-1)
    o[:] = np.nan
    zero_b = b_flat == 0.0
    inf_b = np.isinf(b_flat)
    zero_a = (a_flat == 0.0) & ~zero_b & ~inf_b
    o[zero_b] = 1.0
    o[inf_b & ~zero_b] = 0.0
    o[zero_a] = np.exp(-0.5 * b_flat[zero_a] ** 2)
    rest = ~(zero_b | inf_b | zero_a)
    with np.errstate(over="ignore"):
        lo = rest & (a_flat < b_flat)
        hi = rest & (a_flat >= b_flat)
        log_pref = -0.5 * (a_flat - b_flat) ** 2
    # a < b: Q is the prefactor times a sum of at most exp(ab) * ... <= 1
    under = lo & (log_pref < -750.0)
    o[under] = 0.0
    lo &= ~under
    # a >= b: complement below 1e-18 is invisible next to 1
    full = hi & (log_pref < -42.0)
    o[full] = 1.0
    hi &= ~full
    for mask, first in ((lo, 0), (hi, 1)):
        if not np.any(mask):
            continue
        aa, bb = a_flat[mask], b_flat[mask]
        z = aa * bb
        r = aa / bb if first == 0 else bb / aa
        sums = np.full_like(z, 1.0 if first == 0 else 0.0)
        pos = z > 0.0
        if np.any(pos):
            sums[pos] = _scaled_bessel_sum_vec(z[pos], r[pos], first)
        part = np.exp(log_pref[mask]) * sums
        o[mask] = part if first == 0 else 1.0 - part
    return out


def marcum_q1(a, b):
    """First-order Marcum Q-function.

    ``Q_1(a, b) = integral_b^inf x exp(-(x^2 + a^2)/2) I_0(a x) dx``.

    Evaluated with the Neumann series in scaled Bessel functions::

        a < b:   Q_1 = exp(-(b-a)^2/2) * sum_{k>=0} (a/b)^k ive(k, ab)
        a >= b:  Q_1 = 1 - exp(-(a-b)^2/2) * sum_{k>=1} (b/a)^k ive(k, ab)

    Both sums have positive terms only, so there is no cancellation.  Accepts
    scalars or arrays (broadcast); arrays run one recurrence sweep for all
    elements.
    """
    if np.ndim(a) == 0 and np.ndim(b) == 0:
        return _marcum_scalar(a, b)
    return _marcum_array(a, b)
