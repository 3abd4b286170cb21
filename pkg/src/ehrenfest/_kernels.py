"""Compiled inner loops for the Numerov shooting solver and the tridiagonal oracle.

Numerov is written for ``w_i = (1 + h**2 f_i / 12) psi_i`` with
``f = 2 (eps - V) / hbar**2``, which turns the scheme into the symmetric
three-term recurrence ``w[i+1] = (2 - g_i) w[i] - w[i-1]``,
``g = 12 x / (12 + x)``, ``x = h**2 f``. Because ``g`` increases with ``eps``
the number of sign changes of ``w`` is a Sturm count and is monotone in the
energy.
"""

import numpy as np
from numba import njit

_PIVMIN = 1e-300
_BIG = 1e150


@njit(cache=True)
def numerov_count(v, scale, eps, odd):
    """Number of half-line nodes of the parity-reduced Numerov solution.

    ``v`` is the potential on ``q_i = i h`` for ``i = 0..N`` (Dirichlet at
    ``i = N``); ``scale = 2 h**2 / hbar**2``. Equals the number of states of
    that parity below ``eps``.
    """
    n = v.shape[0] - 1
    count = 0
    if odd:
        x = scale * (eps - v[1])
        r = 2.0 - 12.0 * x / (12.0 + x)
        start = 2
    else:
        x = scale * (eps - v[0])
        r = 1.0 - 6.0 * x / (12.0 + x)
        start = 1
    if r < 0.0:
        count += 1
    for i in range(start, n):
        if abs(r) < _PIVMIN:
            r = _PIVMIN
        x = scale * (eps - v[i])
        r = 2.0 - 12.0 * x / (12.0 + x) - 1.0 / r
        if r < 0.0:
            count += 1
    return count


@njit(cache=True)
def numerov_shoot(v, scale, eps, odd, match):
    """Half-line Numerov solution matched at index ``match``.

    Integrates outward from ``q = 0`` with the parity condition and inward
    from the Dirichlet end, rescaling on the fly to avoid overflow, and glues
    the two branches at ``match``. Returns ``psi`` (unnormalised).
    """
    n = v.shape[0] - 1
    g = np.empty(n + 1)
    for i in range(n + 1):
        x = scale * (eps - v[i])
        g[i] = 12.0 * x / (12.0 + x)
    w = np.zeros(n + 1)

    if odd:
        w[0] = 0.0
        w[1] = 1.0
    else:
        w[0] = 1.0
        w[1] = 1.0 - 0.5 * g[0]
    for i in range(1, match):
        w[i + 1] = (2.0 - g[i]) * w[i] - w[i - 1]
        if abs(w[i + 1]) > _BIG:
            for j in range(i + 2):
                w[j] /= _BIG
    left = w[match]

    tail = np.zeros(n + 1)
    tail[n] = 0.0
    tail[n - 1] = 1.0
    for i in range(n - 1, match, -1):
        tail[i - 1] = (2.0 - g[i]) * tail[i] - tail[i + 1]
        if abs(tail[i - 1]) > _BIG:
            for j in range(i - 1, n + 1):
                tail[j] /= _BIG
    right = tail[match]

    if right != 0.0:
        f = left / right
        for i in range(match + 1, n + 1):
            w[i] = tail[i] * f
    psi = np.empty(n + 1)
    for i in range(n + 1):
        x = scale * (eps - v[i])
        psi[i] = w[i] / (1.0 + x / 12.0)
    return psi


@njit(cache=True)
def tridiag_count(diag, off2, shift):
    """Eigenvalues of a symmetric tridiagonal matrix below ``shift``.

    ``off2`` holds the squared off-diagonal entries. Classic LDL^T pivot
    recurrence with a pivot floor.
    """
    n = diag.shape[0]
    count = 0
    d = diag[0] - shift
    if d < 0.0:
        count += 1
    for i in range(1, n):
        if abs(d) < _PIVMIN:
            d = -_PIVMIN
        d = diag[i] - shift - off2[i - 1] / d
        if d < 0.0:
            count += 1
    return count
