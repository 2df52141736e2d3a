"""Wigner 3j coefficients and the angular weights of the exchange term."""

from __future__ import annotations

import math
from functools import lru_cache

__all__ = ["exchange_weights", "wigner_3j"]


def wigner_3j(j1: int, j2: int, j3: int, m1: int, m2: int, m3: int) -> float:
    """Wigner 3j symbol by the Racah sum with exact integer factorials.

    Stable far beyond the l, L <= 12 range used for the exchange assembly.
    """
    if m1 + m2 + m3 != 0:
        return 0.0
    if not abs(j1 - j2) <= j3 <= j1 + j2:
        return 0.0
    if abs(m1) > j1 or abs(m2) > j2 or abs(m3) > j3:
        return 0.0
    f = math.factorial
    t_min = max(0, j2 - j3 - m1, j1 - j3 + m2)
    t_max = min(j1 + j2 - j3, j1 - m1, j2 + m2)
    total = 0.0
    for t in range(t_min, t_max + 1):
        den = (
            f(t)
            * f(j1 + j2 - j3 - t)
            * f(j1 - m1 - t)
            * f(j2 + m2 - t)
            * f(j3 - j2 + m1 + t)
            * f(j3 - j1 - m2 + t)
        )
        total += (-1.0) ** t / den
    triangle = (
        f(j1 + j2 - j3) * f(j1 - j2 + j3) * f(-j1 + j2 + j3) / f(j1 + j2 + j3 + 1)
    )
    pref = math.sqrt(
        triangle
        * f(j1 + m1)
        * f(j1 - m1)
        * f(j2 + m2)
        * f(j2 - m2)
        * f(j3 + m3)
        * f(j3 - m3)
    )
    return (-1.0) ** (j1 - j2 - m3) * pref * total


@lru_cache(maxsize=None)
def exchange_weights(l_max: int) -> dict:
    """Angular factors A_L(l, l') = (2l+1)(2l'+1) [w3j(l, L, l'; 0,0,0)]^2.

    Returns {(l, l'): [(L, A_L), ...]} over even-parity L in the triangle
    range.  The normalization is pinned by exact direct/exchange
    cancellation for a fully occupied rank-one s orbital.
    """
    table = {}
    for l in range(l_max + 1):
        for lp in range(l_max + 1):
            entries = []
            for L in range(abs(l - lp), l + lp + 1):
                if (l + lp + L) % 2 != 0:
                    continue
                w = wigner_3j(l, L, lp, 0, 0, 0)
                entries.append((L, (2 * l + 1) * (2 * lp + 1) * w * w))
            table[(l, lp)] = entries
    return table
