"""Pure-Python/numpy fallback for the special-function kernels.

Same interface as the compiled ``expfdr._kernels`` extension: regularized
incomplete gamma (lower ``p`` / upper ``q``) and regularized incomplete
beta, as scalars and as vectorized variants with a scalar shape parameter.

Series and continued-fraction algorithms follow the classic numerical
recipes: the gamma series for x < a + 1, a modified Lentz continued
fraction otherwise; the beta continued fraction with the symmetry switch
at x = (a + 1)/(a + b + 2).
"""

import math

import numpy as np

BACKEND = "python"

_EPS = 1e-16
_FPMIN = 1e-300
_ITMAX = 3000
_LN_2PI = math.log(2.0 * math.pi)


def _stirling_corr(a: float) -> float:
    """lgamma(a) minus its Stirling main term, for a >= 30."""
    inva2 = 1.0 / (a * a)
    return (1.0 / 12.0 - (1.0 / 360.0 - (1.0 / 1260.0 - inva2 / 1680.0) * inva2) * inva2) / a


def _log_gamma_prefactor(a: float, x: float) -> float:
    """log(x^a e^-x / Gamma(a)), cancellation-free for large a via Stirling."""
    if a < 30.0:
        return -x + a * math.log(x) - math.lgamma(a)
    t = (x - a) / a
    return (a * (math.log1p(t) - t) + 0.5 * (math.log(a) - _LN_2PI)
            - _stirling_corr(a))


def _gser(a: float, x: float) -> float:
    """Series expansion of the regularized lower incomplete gamma."""
    ap = a
    summ = 1.0 / a
    delt = summ
    for _ in range(_ITMAX):
        ap += 1.0
        delt *= x / ap
        summ += delt
        if abs(delt) < abs(summ) * _EPS:
            break
    return summ * math.exp(_log_gamma_prefactor(a, x))


def _gcf(a: float, x: float) -> float:
    """Lentz continued fraction for the regularized upper incomplete gamma."""
    b = x + 1.0 - a
    c = 1.0 / _FPMIN
    d = 1.0 / b
    h = d
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = b + an / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < _EPS:
            break
    return math.exp(_log_gamma_prefactor(a, x)) * h


def gammainc_p(a: float, x: float) -> float:
    """Regularized lower incomplete gamma P(a, x) for a > 0, x >= 0."""
    if x <= 0.0:
        return 0.0
    if x < a + 1.0:
        return _gser(a, x)
    return 1.0 - _gcf(a, x)


def gammainc_q(a: float, x: float) -> float:
    """Regularized upper incomplete gamma Q(a, x) = 1 - P(a, x)."""
    if x <= 0.0:
        return 1.0
    if x < a + 1.0:
        return 1.0 - _gser(a, x)
    return _gcf(a, x)


def _betacf(a: float, b: float, x: float) -> float:
    """Lentz continued fraction for the incomplete beta."""
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _FPMIN:
        d = _FPMIN
    d = 1.0 / d
    h = d
    for m in range(1, _ITMAX):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _FPMIN:
            d = _FPMIN
        c = 1.0 + aa / c
        if abs(c) < _FPMIN:
            c = _FPMIN
        d = 1.0 / d
        delt = d * c
        h *= delt
        if abs(delt - 1.0) < _EPS:
            break
    return h


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    front = math.exp(
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def _log_gamma_prefactor_vec(a: float, x: np.ndarray) -> np.ndarray:
    if a < 30.0:
        return -x + a * np.log(x) - math.lgamma(a)
    t = (x - a) / a
    return (a * (np.log1p(t) - t) + 0.5 * (math.log(a) - _LN_2PI)
            - _stirling_corr(a))


def _gser_vec(a: float, x: np.ndarray) -> np.ndarray:
    ap = np.full_like(x, a)
    summ = np.full_like(x, 1.0 / a)
    delt = summ.copy()
    active = x > 0.0
    for _ in range(_ITMAX):
        ap[active] += 1.0
        delt[active] *= x[active] / ap[active]
        summ[active] += delt[active]
        active &= np.abs(delt) >= np.abs(summ) * _EPS
        if not active.any():
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        out = summ * np.exp(_log_gamma_prefactor_vec(a, x))
    return np.where(x > 0.0, out, 0.0)


def _gcf_vec(a: float, x: np.ndarray) -> np.ndarray:
    b = x + 1.0 - a
    c = np.full_like(x, 1.0 / _FPMIN)
    d = 1.0 / b
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for i in range(1, _ITMAX):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
        c = b + an / c
        np.copyto(c, _FPMIN, where=np.abs(c) < _FPMIN)
        d = 1.0 / d
        delt = d * c
        h[active] *= delt[active]
        active &= np.abs(delt - 1.0) >= _EPS
        if not active.any():
            break
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.exp(_log_gamma_prefactor_vec(a, x)) * h
    return np.where(x > 0.0, out, 1.0)


def gammainc_p_vec(a: float, x: np.ndarray) -> np.ndarray:
    """Vectorized P(a, x) with scalar a."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    lo = x < a + 1.0
    hi = ~lo
    if lo.any():
        out[lo] = _gser_vec(a, x[lo])
    if hi.any():
        out[hi] = 1.0 - _gcf_vec(a, x[hi])
    return out


def gammainc_q_vec(a: float, x: np.ndarray) -> np.ndarray:
    """Vectorized Q(a, x) with scalar a."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    lo = x < a + 1.0
    hi = ~lo
    if lo.any():
        out[lo] = 1.0 - _gser_vec(a, x[lo])
    if hi.any():
        out[hi] = _gcf_vec(a, x[hi])
    return out


def _betacf_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = np.ones_like(x)
    d = 1.0 - qab * x / qap
    np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
    d = 1.0 / d
    h = d.copy()
    active = np.ones(x.shape, dtype=bool)
    for m in range(1, _ITMAX):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _FPMIN, where=np.abs(c) < _FPMIN)
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        np.copyto(d, _FPMIN, where=np.abs(d) < _FPMIN)
        c = 1.0 + aa / c
        np.copyto(c, _FPMIN, where=np.abs(c) < _FPMIN)
        d = 1.0 / d
        delt = d * c
        h[active] *= delt[active]
        active &= np.abs(delt - 1.0) >= _EPS
        if not active.any():
            break
    return h


def betainc_reg_vec(a: float, b: float, x: np.ndarray) -> np.ndarray:
    """Vectorized I_x(a, b) with scalar a, b."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    out = np.empty_like(x)
    inside = (x > 0.0) & (x < 1.0)
    out[x <= 0.0] = 0.0
    out[x >= 1.0] = 1.0
    if not inside.any():
        return out
    xi = x[inside]
    lnbeta = math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
    front = np.exp(lnbeta + a * np.log(xi) + b * np.log1p(-xi))
    res = np.empty_like(xi)
    direct = xi < (a + 1.0) / (a + b + 2.0)
    if direct.any():
        res[direct] = front[direct] * _betacf_vec(a, b, xi[direct]) / a
    flip = ~direct
    if flip.any():
        res[flip] = 1.0 - front[flip] * _betacf_vec(b, a, 1.0 - xi[flip]) / b
    out[inside] = res
    return out
