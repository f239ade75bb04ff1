"""Gauss-Laguerre moments of velocity distributions.

Used as the independent numerical check on the closed-form closures. The
integration variable is ``s = alpha c / v`` and the rule carries the gamma
weight ``s**(alpha-1) exp(-s)``, so integrands of the form
polynomial x gamma density are integrated essentially exactly.
"""
from __future__ import annotations

from functools import lru_cache

import numpy as np
from scipy.linalg import eigh_tridiagonal
from scipy.special import gammaln, xlogy

from .errors import QuadratureError

DEFAULT_NODES = 64
MAX_NODES = 512
DEFAULT_RTOL = 1e-9


@lru_cache(maxsize=64)
def gamma_rule(n: int, alpha: float) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Nodes, normalized weights and log-weight of an ``n``-point rule.

    Weights are normalized to sum to one, i.e. they integrate against the
    gamma probability density rather than the bare weight function.
    """
    # Golub-Welsch on the Jacobi matrix of L^(alpha-1); avoids gamma(alpha) overflow
    k = np.arange(n, dtype=float)
    s, vec = eigh_tridiagonal(2.0 * k + alpha, np.sqrt(k[1:] * (k[1:] + alpha - 1.0)))
    w = vec[0] ** 2
    w = w / w.sum()
    # log of s**(alpha-1) e**(-s); gamma(alpha) cancels against the normalization
    log_weight = xlogy(alpha - 1.0, s) - s
    for arr in (s, w, log_weight):
        arr.setflags(write=False)
    return s, w, log_weight


def _estimate(f, k, v, alpha, n, central):
    s, w, log_weight = gamma_rule(n, float(alpha))
    c = v * s / alpha
    # f(c) dc = [f(c) (v/alpha) e^s s^(1-alpha)] * s^(alpha-1) e^-s ds, up to gamma(alpha)
    fc = np.asarray(f(c), dtype=float)
    with np.errstate(divide="ignore"):
        log_abs = np.log(np.abs(fc))
    scaled = np.sign(fc) * np.exp(log_abs - log_weight + _log_gamma_alpha(alpha)) * (v / alpha)
    base = (c - v) if central else c
    return float(np.sum(w * base**k * scaled))


@lru_cache(maxsize=64)
def _log_gamma_alpha(alpha):
    return float(gammaln(alpha))


def moment_quadrature(
    f,
    k: int,
    rho: float,
    v: float,
    alpha: float,
    *,
    central: bool = True,
    nodes: int = DEFAULT_NODES,
    rtol: float = DEFAULT_RTOL,
    max_nodes: int = MAX_NODES,
) -> float:
    """Numerically integrate ``(c - v)**k f(c)`` over ``c in [0, inf)``.

    The node count starts at ``nodes`` and doubles until two successive
    estimates agree to ``rtol``, relative to the larger of the estimate and
    the natural moment scale ``rho (v / sqrt(alpha))**k`` (so vanishing
    moments converge too).

    Args:
        f: vectorized callable returning the phase density at velocities ``c``.
        k: moment order (>= 0).
        rho: density, used only for the convergence scale.
        v: mean velocity; sets the node scaling and the centre.
        alpha: shape parameter of the weight function.
        central: integrate ``(c - v)**k`` if True, else ``c**k``.

    Raises:
        QuadratureError: if ``max_nodes`` is reached without convergence.
    """
    if k < 0:
        raise ValueError("moment order must be >= 0")
    if v <= 0:
        raise ValueError("mean velocity must be > 0")
    scale = abs(rho) * (v / np.sqrt(alpha)) ** k
    n = nodes
    prev = _estimate(f, k, v, alpha, n, central)
    diff = None
    while 2 * n <= max_nodes:
        n *= 2
        cur = _estimate(f, k, v, alpha, n, central)
        diff = abs(cur - prev)
        if not np.isfinite(cur):
            break
        if diff <= rtol * max(abs(cur), scale):
            return float(cur)
        prev = cur
    raise QuadratureError(
        f"no convergence to rtol={rtol} within {max_nodes} nodes", estimate=prev, error=diff
    )
