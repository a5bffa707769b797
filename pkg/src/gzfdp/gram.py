"""Geometry of the inverse Gram matrix G = (H H^dag)^-1.

Everything the precoders and ordering heuristics need is derived from G:
principal submatrices, border vectors, and the Schur complements
ghat(n, nu) that act as modified water-filling floors. User indices are
1-based throughout this module, matching the row numbering of H.
"""

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .exceptions import ParameterError, RankDeficiencyError

CONDITION_LIMIT = 1e12


def clamp_low(n, nu):
    """Lowest interfering user index for user n at depth nu (floor at 0)."""
    return max(n - nu, 0)


def clamp_high(n, nu, n_users):
    """Highest affected user index for user n at depth nu (ceiling at N)."""
    return min(n + nu, n_users)


def build_gram(channel, noise_power):
    """Factor H H^dag and return the derived :class:`GramGeometry`.

    Raises :class:`RankDeficiencyError` when the condition estimate of
    H H^dag exceeds 1e12.
    """
    if noise_power <= 0:
        raise ParameterError("noise_power must be strictly positive")
    h = channel.entries if hasattr(channel, "entries") else np.asarray(channel)
    h = np.asarray(h, dtype=np.complex128)

    sing = np.linalg.svd(h, compute_uv=False)
    smin, smax = sing[-1], sing[0]
    if smin == 0.0 or (smax / smin) ** 2 > CONDITION_LIMIT:
        raise RankDeficiencyError(
            "H H^dag is numerically singular: smallest singular value of H "
            "is %.3e (condition estimate %.3e > %.0e)"
            % (smin, np.inf if smin == 0 else (smax / smin) ** 2, CONDITION_LIMIT),
            smallest_singular_value=float(smin))

    hh = h @ h.conj().T
    hh = (hh + hh.conj().T) / 2.0
    factor = cho_factor(hh, lower=True)
    gram = cho_solve(factor, np.eye(h.shape[0], dtype=np.complex128))
    gram = (gram + gram.conj().T) / 2.0
    return GramGeometry(gram, noise_power, channel=h, hh_factor=factor)


class GramGeometry:
    """Hermitian positive-definite G with cached Schur complements.

    Read-only after construction; the (n, nu) -> ghat cache is populated
    lazily with idempotent writes, so concurrent queries are safe.
    """

    def __init__(self, gram, noise_power, channel=None, hh_factor=None):
        gram = np.asarray(gram, dtype=np.complex128)
        if gram.ndim != 2 or gram.shape[0] != gram.shape[1]:
            raise ParameterError("G must be square, got shape %s" % (gram.shape,))
        if noise_power <= 0:
            raise ParameterError("noise_power must be strictly positive")
        herm_gap = np.linalg.norm(gram - gram.conj().T)
        if herm_gap > 1e-10 * max(np.linalg.norm(gram), 1e-300):
            raise ParameterError("G is not Hermitian (gap %.3e)" % herm_gap)
        eigvals = np.linalg.eigvalsh(gram)
        if eigvals[0] <= 0:
            raise RankDeficiencyError(
                "G is not positive definite (min eigenvalue %.3e)" % eigvals[0])
        gram.setflags(write=False)
        self.gram = gram
        self.n_users = gram.shape[0]
        self.noise_power = float(noise_power)
        self._channel = channel
        self._hh_factor = hh_factor
        self._ghat_cache = {}

    def _check_indices(self, n, nu):
        if not 1 <= n <= self.n_users:
            raise ParameterError("user index n=%d out of range 1..%d"
                                 % (n, self.n_users))
        if not 0 <= nu <= self.n_users - 1:
            raise ParameterError("depth nu=%d out of range 0..%d"
                                 % (nu, self.n_users - 1))

    def principal_submatrix(self, n, nu):
        """Block of G spanning users n .. min(n+nu, N), inclusive."""
        self._check_indices(n, nu)
        hi = clamp_high(n, nu, self.n_users)
        return self.gram[n - 1:hi, n - 1:hi]

    def border_vector(self, n, nu):
        """Conjugated off-diagonal slice [g(n,n+1), ..., g(n, n+nu)]^dag.

        Clamped at the boundary; users beyond N contribute nothing.
        """
        self._check_indices(n, nu)
        hi = clamp_high(n, nu, self.n_users)
        return self.gram[n - 1, n:hi].conj()

    def schur_ghat(self, n, nu):
        """Schur complement of g(n,n) in the block spanning users n..n+nu.

        This is the modified water-filling floor of user n at depth nu;
        nu = 0 (or an empty border) returns g(n,n) itself.
        """
        self._check_indices(n, nu)
        key = (n, nu)
        cached = self._ghat_cache.get(key)
        if cached is not None:
            return cached
        border = self.border_vector(n, nu)
        if border.size == 0:
            value = float(self.gram[n - 1, n - 1].real)
        else:
            hi = clamp_high(n, nu, self.n_users)
            block = self.gram[n:hi, n:hi]
            solved = cho_solve(cho_factor(block, lower=True), border)
            value = float((self.gram[n - 1, n - 1] - border.conj() @ solved).real)
        self._ghat_cache[key] = value
        return value

    def ghat_chain(self, n):
        """All depths for user n: (ghat(n,0), ..., ghat(n,N-1)), non-increasing."""
        return np.array([self.schur_ghat(n, nu) for nu in range(self.n_users)])

    def ghat_vector(self, nu):
        """ghat(n, nu) for every user n at a fixed depth."""
        return np.array([self.schur_ghat(n, nu) for n in range(1, self.n_users + 1)])

    def solve_hh(self, rhs):
        """Solve (H H^dag) x = rhs against the cached factorization."""
        if self._hh_factor is None:
            raise ParameterError(
                "this geometry was built from a raw G; no H H^dag factor available")
        return cho_solve(self._hh_factor, rhs)

    @property
    def channel(self):
        return self._channel
