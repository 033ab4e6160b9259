"""Pinned random streams.

All randomness in the package comes from numpy's PCG64 bit generator, read as
raw 64-bit words so the derived variates do not depend on numpy's own
(version-dependent) transforms:

* uniform on [0, 1): top 53 bits of a word times 2**-53;
* standard normal: Marsaglia's polar method on consecutive uniform pairs,
  both variates of an accepted pair are used in order.
"""
import numpy as np

_TWO_POW_M53 = 2.0 ** -53


class Stream:
    def __init__(self, seed: int):
        self._bits = np.random.PCG64(int(seed))

    def uniform(self, n: int) -> np.ndarray:
        raw = self._bits.random_raw(n)
        return (raw >> np.uint64(11)).astype(np.float64) * _TWO_POW_M53

    def normal(self, n: int) -> np.ndarray:
        out = np.empty(n)
        filled = 0
        while filled < n:
            need = n - filled
            # acceptance rate is pi/4; over-draw so one pass usually suffices
            pairs = int(need / 2 / 0.78) + 8
            u = 2.0 * self.uniform(2 * pairs) - 1.0
            a, b = u[0::2], u[1::2]
            s = a * a + b * b
            ok = (s < 1.0) & (s > 0.0)
            a, b, s = a[ok], b[ok], s[ok]
            f = np.sqrt(-2.0 * np.log(s) / s)
            vals = np.empty(2 * a.size)
            vals[0::2] = a * f
            vals[1::2] = b * f
            take = min(need, vals.size)
            out[filled:filled + take] = vals[:take]
            filled += take
        return out
