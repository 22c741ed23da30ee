"""Pure numpy implementations of the hot kernels.

Used when the compiled ``_ckernels`` extension is missing, or when
``DWPAP_PURE=1`` is set in the environment.
"""

import numpy as np


def trig_eval(t, freqs, coefs):
    """Evaluate ``sum_k coefs[k] * exp(1j * freqs[k] * t)`` on a grid.

    ``t`` has shape (n,), ``freqs`` (K,), ``coefs`` (K, d). Returns (n, d).
    """
    t = np.ascontiguousarray(t, dtype=np.float64)
    freqs = np.ascontiguousarray(freqs, dtype=np.float64)
    coefs = np.ascontiguousarray(coefs, dtype=np.complex128)
    if freqs.size == 0:
        return np.zeros((t.size, coefs.shape[1] if coefs.ndim == 2 else 1), np.complex128)
    phase = np.exp(1j * np.outer(t, freqs))
    return phase @ coefs


def horner(coeffs, x):
    """Evaluate a real polynomial, coefficients ordered low to high degree."""
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for c in reversed(coeffs):
        out = out * x + c
    return out


def romberg_refine(F, width):
    """Richardson-extrapolated Simpson value and error estimate per panel.

    ``F`` holds samples at the nine eighth-points of each panel, shape
    (p, 9, d); ``width`` is (p,). Simpson sums on 3, 5 and 9 points give two
    Boole values ``B1``, ``B2``; the result is ``B2 + (B2 - B1) / 63`` with
    error estimate ``max_d |B2 - B1| / 63``. Also returns ``max_d |B2|``.
    """
    w = width[:, None]
    f = [F[:, k] for k in range(9)]
    s1 = w / 6.0 * (f[0] + 4.0 * f[4] + f[8])
    s2 = w / 12.0 * (f[0] + 4.0 * f[2] + 2.0 * f[4] + 4.0 * f[6] + f[8])
    s4 = w / 24.0 * (f[0] + 4.0 * (f[1] + f[3] + f[5] + f[7]) + 2.0 * (f[2] + f[4] + f[6]) + f[8])
    b1 = s2 + (s2 - s1) / 15.0
    b2 = s4 + (s4 - s2) / 15.0
    diff = b2 - b1
    return b2 + diff / 63.0, np.abs(diff).max(axis=1) / 63.0, np.abs(b2).max(axis=1)
