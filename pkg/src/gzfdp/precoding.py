"""Precoder construction: linear ZF, banded GZF-DP, ZF-DP and UG-DP.

Each builder returns a :class:`PrecoderSolution` holding the precoder P,
the effective channel F = H P, per-user powers/rates and the water
level(s). Rates are in bits per channel use. The module also exposes
sklearn-style estimator wrappers (fit on a channel matrix, read fitted
attributes) so the precoders compose with that ecosystem.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import cho_factor, cho_solve
from sklearn.base import BaseEstimator

from .channels import ChannelMatrix
from .exceptions import ParameterError, RankDeficiencyError
from .gram import GramGeometry, build_gram

OBJECTIVE_SUM = "sum"
OBJECTIVE_MIN = "min"

FAMILY_ZF = "zf"
FAMILY_GZFDP = "gzfdp"
FAMILY_ZFDP = "zfdp"
FAMILY_UGDP = "ugdp"


@dataclass
class PrecoderSolution:
    """Precoder P, effective channel F and the resulting rate allocation."""

    family: str
    precoder: np.ndarray      # M x N
    effective: np.ndarray     # N x N
    diag_gains: np.ndarray    # nonnegative |f_nn| (or b_n r_nn magnitudes)
    user_rates: np.ndarray    # bits / channel use
    water_level: object       # scalar 1/lambda, or per-user vector in min mode
    total_power: float
    nu: int = None
    group_size: int = None
    objective: str = OBJECTIVE_SUM

    @property
    def sum_rate(self):
        return float(self.user_rates.sum())

    @property
    def min_rate(self):
        return float(self.user_rates.min())

    def label(self):
        if self.family == FAMILY_GZFDP:
            base = "gzfdp(nu=%d)" % self.nu
        elif self.family == FAMILY_UGDP:
            base = "ugdp(Ng=%d)" % self.group_size
        else:
            base = self.family
        return base if self.objective == OBJECTIVE_SUM else base + ":min"


def water_fill(floors, budget):
    """Exact active-set water filling: find w with sum([w - floors]^+) = budget.

    The constraint is piecewise linear in w, so sorting the floors and
    scanning for the active count is exact to machine precision.
    """
    floors = np.asarray(floors, dtype=float)
    if budget <= 0:
        raise ParameterError("power budget must be strictly positive")
    order = np.sort(floors)
    csum = np.cumsum(order)
    for k in range(len(order), 0, -1):
        level = (budget + csum[k - 1]) / k
        if level > order[k - 1]:
            return level
    raise ParameterError("water filling failed; floors %r, budget %r"
                         % (floors, budget))


def _as_gram(h, gram, noise_power):
    if gram is None:
        gram = build_gram(h, noise_power)
    return gram


def _assemble_banded_f(geometry, diag_values, nu):
    """Build F column by column from the diagonal values and the border solves."""
    n_users = geometry.n_users
    eff = np.zeros((n_users, n_users), dtype=np.complex128)
    for n in range(1, n_users + 1):
        fnn = diag_values[n - 1]
        eff[n - 1, n - 1] = fnn
        if fnn == 0.0 or nu == 0:
            continue
        border = geometry.border_vector(n, nu)
        if border.size == 0:
            continue
        sub = geometry.gram[n:min(n + nu, n_users), n:min(n + nu, n_users)]
        eff[n:n + border.size, n - 1] = -fnn * np.linalg.solve(sub, border)
    return eff


def _finish_gzf(h, geometry, eff, rates, water_level, nu, objective, family):
    hmat = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h)
    if geometry.channel is not None:
        precoder = hmat.conj().T @ geometry.solve_hh(eff)
    else:
        precoder = hmat.conj().T @ (geometry.gram @ eff)
    total = float(np.trace(eff.conj().T @ geometry.gram @ eff).real)
    return PrecoderSolution(
        family=family,
        precoder=precoder,
        effective=eff,
        diag_gains=np.abs(np.diag(eff)),
        user_rates=rates,
        water_level=water_level,
        total_power=total,
        nu=nu,
        objective=objective,
    )


def build_gzfdp_sumrate(h, gram=None, nu=0, power_budget=1.0, noise_power=1.0):
    """Sum-rate optimal banded precoder of depth nu.

    The diagonal gains come from water filling over the Schur floors
    ghat(n, nu); the sub-diagonal entries of each column cancel the
    border coupling. nu = 0 reproduces the linear ZF precoder exactly.
    """
    if power_budget <= 0 or not math.isfinite(power_budget):
        raise ParameterError("power_budget must be positive and finite")
    geometry = _as_gram(h, gram, noise_power)
    if not 0 <= nu <= geometry.n_users - 1:
        raise ParameterError("nu=%d out of range 0..%d" % (nu, geometry.n_users - 1))
    ghat = geometry.ghat_vector(nu)
    level = water_fill(ghat, power_budget / noise_power)
    diag = np.sqrt(noise_power * np.maximum(level / ghat - 1.0, 0.0))
    rates = np.maximum(np.log2(level / ghat), 0.0)
    eff = _assemble_banded_f(geometry, diag, nu)
    family = FAMILY_ZF if nu == 0 else FAMILY_GZFDP
    return _finish_gzf(h, geometry, eff, rates, level, nu, OBJECTIVE_SUM, family)


def build_zf(h, gram=None, power_budget=1.0, noise_power=1.0):
    """Linear zero-forcing precoder (diagonal F, classic water filling)."""
    return build_gzfdp_sumrate(h, gram, 0, power_budget, noise_power)


def build_gzfdp_minrate(h, gram=None, nu=0, power_budget=1.0, noise_power=1.0):
    """Max-min fair banded precoder: every user gets the same rate.

    The common rate has the closed form log2(1 + P_T / (N0 * sum ghat)),
    with identical diagonal gains and per-user water levels ghat * 2^rate.
    """
    if power_budget <= 0 or not math.isfinite(power_budget):
        raise ParameterError("power_budget must be positive and finite")
    geometry = _as_gram(h, gram, noise_power)
    if not 0 <= nu <= geometry.n_users - 1:
        raise ParameterError("nu=%d out of range 0..%d" % (nu, geometry.n_users - 1))
    ghat = geometry.ghat_vector(nu)
    rate = math.log2(1.0 + power_budget / (noise_power * ghat.sum()))
    fnn = math.sqrt(noise_power * (2.0 ** rate - 1.0))
    diag = np.full(geometry.n_users, fnn)
    levels = ghat * 2.0 ** rate  # per-user water levels 1/lambda_n
    rates = np.full(geometry.n_users, rate)
    eff = _assemble_banded_f(geometry, diag, nu)
    family = FAMILY_ZF if nu == 0 else FAMILY_GZFDP
    return _finish_gzf(h, geometry, eff, rates, levels, nu, OBJECTIVE_MIN, family)


def _lq_nonneg(mat):
    """LQ factorization mat = L Q with Q having orthonormal rows and
    the diagonal of L real and nonnegative."""
    q, r = np.linalg.qr(mat.conj().T)
    diag = np.diag(r)
    phases = np.ones_like(diag)
    nonzero = np.abs(diag) > 0
    phases[nonzero] = diag[nonzero] / np.abs(diag[nonzero])
    q = q * phases.conj()[None, :]
    r = r * phases.conj()[:, None]
    return r.conj().T, q.conj().T


def _triangular_power_fill(r_mat, u_rows, power_budget, noise_power, family,
                           group_size=None, nu=None):
    """Shared tail of the ZF-DP / UG-DP builders: water-fill over |r_nn|^2."""
    r_diag = np.abs(np.diag(r_mat))
    if np.min(r_diag) <= 0 or np.min(r_diag) ** 2 < 1e-24 * np.max(r_diag) ** 2:
        raise RankDeficiencyError(
            "triangular factor has a (near-)zero diagonal entry (min %.3e)"
            % np.min(r_diag))
    floors = noise_power / r_diag ** 2
    level = water_fill(floors, power_budget)
    b = np.sqrt(np.maximum(level - floors, 0.0))
    eff = r_mat @ np.diag(b)
    rates = np.maximum(np.log2(level / floors), 0.0)
    precoder = u_rows.conj().T @ np.diag(b)
    return PrecoderSolution(
        family=family,
        precoder=precoder,
        effective=eff,
        diag_gains=np.abs(np.diag(eff)),
        user_rates=rates,
        water_level=level,
        total_power=float((b ** 2).sum()),
        nu=nu,
        group_size=group_size,
        objective=OBJECTIVE_SUM,
    )


def build_zfdp(h, power_budget=1.0, noise_power=1.0):
    """Full successive-interference precoder from the lower-triangular
    decomposition H = R U (U with orthonormal rows)."""
    if power_budget <= 0 or not math.isfinite(power_budget):
        raise ParameterError("power_budget must be positive and finite")
    hmat = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h)
    sing = np.linalg.svd(hmat, compute_uv=False)
    if sing[-1] == 0 or (sing[0] / sing[-1]) ** 2 > 1e12:
        raise RankDeficiencyError(
            "channel is rank deficient (smallest singular value %.3e)" % sing[-1],
            smallest_singular_value=float(sing[-1]))
    r_mat, u_rows = _lq_nonneg(hmat)
    return _triangular_power_fill(r_mat, u_rows, power_budget, noise_power,
                                  FAMILY_ZFDP)


def build_ugdp(h, group_size, power_budget=1.0, noise_power=1.0):
    """Grouped precoder: inter-group interference is zero-forced, the
    triangular intra-group part is left for successive encoding."""
    if power_budget <= 0 or not math.isfinite(power_budget):
        raise ParameterError("power_budget must be positive and finite")
    hmat = h.entries if isinstance(h, ChannelMatrix) else np.asarray(h)
    n_users, n_antennas = hmat.shape
    if group_size < 1 or n_users % group_size != 0:
        raise ParameterError(
            "group size %d must divide the user count %d" % (group_size, n_users))
    r_full = np.zeros((n_users, n_users), dtype=np.complex128)
    u_rows = np.zeros((n_users, n_antennas), dtype=np.complex128)
    for start in range(0, n_users, group_size):
        idx = np.arange(start, start + group_size)
        rest = np.setdiff1d(np.arange(n_users), idx)
        h_grp = hmat[idx]
        if rest.size:
            h_bar = hmat[rest]
            bar_gram = h_bar @ h_bar.conj().T
            s = np.linalg.svd(h_bar, compute_uv=False)
            if s[-1] == 0 or (s[0] / s[-1]) ** 2 > 1e12:
                raise RankDeficiencyError(
                    "out-of-group rows are rank deficient (group at user %d)"
                    % (start + 1),
                    smallest_singular_value=float(s[-1]))
            projected = h_grp - (h_grp @ h_bar.conj().T) @ np.linalg.solve(
                bar_gram, h_bar)
        else:
            projected = h_grp
        r_grp, u_grp = _lq_nonneg(projected)
        r_full[np.ix_(idx, idx)] = r_grp
        u_rows[idx] = u_grp
    return _triangular_power_fill(r_full, u_rows, power_budget, noise_power,
                                  FAMILY_UGDP, group_size=group_size)


def rates_from_ghat(ghat, power_budget, noise_power, objective):
    """Rate vector implied by the Schur floors alone (no matrix assembly).

    Used by the ordering search, where only the objective value matters.
    """
    ghat = np.asarray(ghat, dtype=float)
    if objective == OBJECTIVE_SUM:
        level = water_fill(ghat, power_budget / noise_power)
        return np.maximum(np.log2(level / ghat), 0.0)
    if objective == OBJECTIVE_MIN:
        rate = math.log2(1.0 + power_budget / (noise_power * ghat.sum()))
        return np.full(len(ghat), rate)
    raise ParameterError("unknown objective %r" % objective)


class _FittedPrecoderMixin:
    """Shared fit plumbing: accepts a ChannelMatrix or a complex ndarray."""

    def _solve(self, hmat):
        raise NotImplementedError

    def fit(self, X, y=None):
        channel = X if isinstance(X, ChannelMatrix) else ChannelMatrix(np.asarray(X))
        solution = self._solve(channel)
        self.solution_ = solution
        self.precoder_ = solution.precoder
        self.effective_ = solution.effective
        self.user_rates_ = solution.user_rates
        self.sum_rate_ = solution.sum_rate
        self.min_rate_ = solution.min_rate
        self.water_level_ = solution.water_level
        self.total_power_ = solution.total_power
        self.n_users_ = channel.n_users
        return self

    def transform(self, X):
        """Map blocks of user symbols (rows of shape N) to antenna signals."""
        return np.asarray(X) @ self.precoder_.T


class ZeroForcingPrecoder(_FittedPrecoderMixin, BaseEstimator):
    """Linear ZF: diagonal effective channel, water-filled powers."""

    def __init__(self, power_budget=1.0, noise_power=1.0):
        self.power_budget = power_budget
        self.noise_power = noise_power

    def _solve(self, channel):
        return build_zf(channel, None, self.power_budget, self.noise_power)


class GzfDpPrecoder(_FittedPrecoderMixin, BaseEstimator):
    """Banded precoder of depth nu; objective 'sum' or 'min'."""

    def __init__(self, nu=1, objective=OBJECTIVE_SUM, power_budget=1.0,
                 noise_power=1.0):
        self.nu = nu
        self.objective = objective
        self.power_budget = power_budget
        self.noise_power = noise_power

    def _solve(self, channel):
        if self.objective == OBJECTIVE_SUM:
            return build_gzfdp_sumrate(channel, None, self.nu,
                                       self.power_budget, self.noise_power)
        if self.objective == OBJECTIVE_MIN:
            return build_gzfdp_minrate(channel, None, self.nu,
                                       self.power_budget, self.noise_power)
        raise ParameterError("objective must be 'sum' or 'min', got %r"
                             % self.objective)


class ZfDpPrecoder(_FittedPrecoderMixin, BaseEstimator):
    """Fully lower-triangular effective channel via the LQ route."""

    def __init__(self, power_budget=1.0, noise_power=1.0):
        self.power_budget = power_budget
        self.noise_power = noise_power

    def _solve(self, channel):
        return build_zfdp(channel, self.power_budget, self.noise_power)


class UgDpPrecoder(_FittedPrecoderMixin, BaseEstimator):
    """Block-triangular effective channel over user groups of fixed size."""

    def __init__(self, group_size=2, power_budget=1.0, noise_power=1.0):
        self.group_size = group_size
        self.power_budget = power_budget
        self.noise_power = noise_power

    def _solve(self, channel):
        return build_ugdp(channel, self.group_size, self.power_budget,
                          self.noise_power)
