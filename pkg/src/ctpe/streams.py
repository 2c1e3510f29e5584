"""Deterministic, splittable random-number streams.

A stream is identified by a 64-bit seed plus an integer path; the pair is
hashed into a Philox key through :class:`numpy.random.SeedSequence`, so

* the same ``(seed, path)`` always reproduces the same sequence, and
* streams with different paths are statistically independent.

Paths are plain tuples of integers.  The conventional layout in this package
is ``(run, purpose)`` or ``(run, iteration, purpose)``: a multi-seed sweep
gives run ``s`` the stream ``root.child(s)`` and each consumer derives its
own purpose substream, so parallel runs never share a generator.
"""

from dataclasses import dataclass, field

import numpy as np

__all__ = ["RngStream", "rademacher_rotated", "PURPOSE_STATE", "PURPOSE_NOISE"]

# purpose indices used by the observation/training machinery
PURPOSE_STATE = 0
PURPOSE_NOISE = 1


@dataclass
class RngStream:
    """Counter-based random stream keyed by (seed, path)."""

    seed: int
    path: tuple = ()
    _gen: np.random.Generator | None = field(default=None, repr=False, compare=False)

    def child(self, *indices: int) -> "RngStream":
        """Derive an independent stream by extending the path."""
        return RngStream(self.seed, self.path + tuple(int(i) for i in indices))

    def generator(self) -> np.random.Generator:
        """The stream's generator (created lazily, then persistent)."""
        if self._gen is None:
            ss = np.random.SeedSequence(entropy=self.seed, spawn_key=self.path)
            self._gen = np.random.Generator(np.random.Philox(ss))
        return self._gen

    def gaussian(self, n: int) -> np.ndarray:
        """n i.i.d. standard normal variates."""
        if n < 1:
            raise ValueError("gaussian: n must be >= 1")
        return self.generator().standard_normal(n)

    def uniform(self, n: int) -> np.ndarray:
        """n i.i.d. uniform(0, 1) variates."""
        if n < 1:
            raise ValueError("uniform: n must be >= 1")
        return self.generator().uniform(size=n)

    def rademacher(self, n: int) -> np.ndarray:
        """n i.i.d. signs, +1 or -1 with equal probability."""
        if n < 1:
            raise ValueError("rademacher: n must be >= 1")
        return np.where(self.generator().uniform(size=n) < 0.5, -1.0, 1.0)


def rademacher_rotated(hessian, stream: RngStream) -> np.ndarray:
    """Noise with identity covariance whose quadratic form in ``hessian`` is exact.

    Returns ``P^T zeta`` where ``hessian = P^T D P`` is an eigendecomposition
    and ``zeta`` has i.i.d. Rademacher components.  By construction
    ``xi^T hessian xi = trace(hessian)`` holds for every draw, which removes
    the quadratic-form variance that Gaussian noise would contribute.
    """
    h = np.asarray(hessian, dtype=float)
    if h.ndim != 2 or h.shape[0] != h.shape[1]:
        raise ValueError("rademacher_rotated: hessian must be a square matrix")
    if not np.allclose(h, h.T, atol=1e-10, rtol=1e-8):
        raise ValueError("rademacher_rotated: hessian must be symmetric")
    d = h.shape[0]
    zeta = stream.rademacher(d)
    if d == 1:
        return zeta
    # eigh returns H = V diag(w) V^T, i.e. P = V^T in the decomposition above
    _, vecs = np.linalg.eigh(h)
    return vecs @ zeta
