"""User-ordering search: the determinant-greedy heuristic for the sum
rate, the diagonal sort for the minimum rate, brute-force enumeration,
and seeded random baselines.

Permutations are 1-based tuples: position k of ``perm`` holds the
original index of the user served in slot k. All determinant scans use
a deterministic tie-break (lowest original user index, lexicographic
for index sets).
"""

import itertools
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .channels import ChannelMatrix
from .exceptions import CapabilityError, ParameterError
from .gram import GramGeometry
from .precoding import OBJECTIVE_MIN, OBJECTIVE_SUM, rates_from_ghat

METHOD_IDENTITY = "identity"
METHOD_ALG1 = "alg1"
METHOD_ALG2 = "alg2"
METHOD_BRUTE_SUM = "brute-sum"
METHOD_BRUTE_MIN = "brute-min"
METHOD_RANDOM = "random"

BRUTE_FORCE_MAX_USERS = 9


@dataclass(frozen=True)
class UserOrdering:
    """A permutation of the user indices 1..N plus its provenance."""

    perm: tuple
    method: str
    objective_value: Optional[float] = None
    note: str = ""

    def __post_init__(self):
        n = len(self.perm)
        if sorted(self.perm) != list(range(1, n + 1)):
            raise ParameterError(
                "perm must be a permutation of 1..%d, got %r" % (n, self.perm))

    @property
    def n_users(self):
        return len(self.perm)


def identity_ordering(n_users, method=METHOD_IDENTITY, note=""):
    return UserOrdering(perm=tuple(range(1, n_users + 1)), method=method, note=note)


def apply_ordering(channel, ordering):
    """Permute the rows of H: row k of the result is row perm(k) of the input."""
    h = channel.entries if isinstance(channel, ChannelMatrix) else np.asarray(channel)
    perm = ordering.perm if isinstance(ordering, UserOrdering) else tuple(ordering)
    if sorted(perm) != list(range(1, h.shape[0] + 1)):
        raise ParameterError(
            "perm must be a permutation of 1..%d, got %r" % (h.shape[0], perm))
    rows = np.asarray(perm) - 1
    source = channel.source if isinstance(channel, ChannelMatrix) else "fixture"
    return ChannelMatrix(entries=h[rows], source=source)


def permuted_gram(gram, perm):
    """Q G Q^dag for the row permutation encoded by ``perm`` (1-based)."""
    g = gram.gram if isinstance(gram, GramGeometry) else np.asarray(gram)
    rows = np.asarray(perm) - 1
    return g[np.ix_(rows, rows)]


def _ghat_of_permuted(gmat, perm, nu):
    """Schur floors of the permuted Gram matrix, computed directly."""
    rows = np.asarray(perm) - 1
    gp = gmat[np.ix_(rows, rows)]
    n = len(perm)
    out = np.empty(n)
    for k in range(n):
        hi = min(k + nu, n - 1)
        border = gp[k, k + 1:hi + 1].conj()
        if border.size == 0:
            out[k] = gp[k, k].real
        else:
            sub = gp[k + 1:hi + 1, k + 1:hi + 1]
            out[k] = (gp[k, k] - border.conj() @ np.linalg.solve(sub, border)).real
    return out


def evaluate_ordering(gram, perm, nu, objective, power_budget, noise_power):
    """Objective value (sum rate or common minimum rate) under an ordering."""
    gmat = gram.gram if isinstance(gram, GramGeometry) else np.asarray(gram)
    perm = perm.perm if isinstance(perm, UserOrdering) else tuple(perm)
    ghat = _ghat_of_permuted(gmat, perm, nu)
    rates = rates_from_ghat(ghat, power_budget, noise_power, objective)
    return float(rates.sum()) if objective == OBJECTIVE_SUM else float(rates[0])


def _det_of(gmat, index_set):
    """Determinant of the principal block of G on a 1-based index set."""
    if not index_set:
        return 1.0
    rows = np.asarray(sorted(index_set)) - 1
    return float(np.linalg.det(gmat[np.ix_(rows, rows)]).real)


def order_alg1(gram, nu):
    """Determinant-greedy ordering for the sum-rate objective.

    Stage 1 scans all C(N, nu+1) index sets for the one minimizing the
    leading principal-block determinant; afterwards the front user is
    repeatedly chosen to maximize the trailing-block determinant and the
    working set refilled with the determinant-minimizing candidate. Ties
    break toward the lowest original user index.
    """
    gmat = gram.gram if isinstance(gram, GramGeometry) else np.asarray(gram)
    n_users = gmat.shape[0]
    if nu == 0:
        return identity_ordering(
            n_users, method=METHOD_ALG1,
            note="depth 0 is ordering-invariant; identity returned")
    if not 1 <= nu <= n_users - 1:
        raise ParameterError("nu=%d out of range 0..%d" % (nu, n_users - 1))

    # stage 1: best nu+1 front users (lexicographically-smallest tie-break
    # comes free from itertools.combinations order + strict '<').
    best_set, best_det = None, math.inf
    for combo in itertools.combinations(range(1, n_users + 1), nu + 1):
        det = _det_of(gmat, combo)
        if det < best_det:
            best_set, best_det = set(combo), det
    working = best_set                      # J1: current front window
    placed = []                             # U: ordering under construction
    remaining = set(range(1, n_users + 1))  # I1: users not yet placed

    def pick_front(candidates, window):
        # the user whose removal from the window maximizes the trailing det
        best_user, best = None, -math.inf
        for user in sorted(candidates):
            det = _det_of(gmat, window - {user})
            if det > best:
                best_user, best = user, det
        return best_user

    # staged loop: place the front user out of the previous window (never
    # the user that was just refilled, so the fixed floor stays unchanged),
    # then refill the window from the outside users.
    just_added = None
    while True:
        candidates = set(working) - ({just_added} if just_added is not None else set())
        chosen = pick_front(candidates, set(working))
        placed.append(chosen)
        remaining.discard(chosen)
        window = set(working) - {chosen}
        outside = remaining - window
        if not outside:
            break
        # refill: scan the outside users for the determinant-minimizing window
        best_user, best_det = None, math.inf
        for user in sorted(outside):
            det = _det_of(gmat, window | {user})
            if det < best_det:
                best_user, best_det = user, det
        working = window | {best_user}
        just_added = best_user

    # tail: recursively place the remaining window users by maximizing the
    # trailing-block determinant at each step.
    window = set(working) - {placed[-1]}
    while window:
        chosen = pick_front(window, set(window))
        placed.append(chosen)
        window.discard(chosen)

    return UserOrdering(perm=tuple(placed), method=METHOD_ALG1)


def order_alg2(gram):
    """Minimum-rate ordering: sort users by diagonal of G, largest first.

    The smallest diagonal ends up last, where its floor cannot be
    improved by any ordering. Ties break toward the lower index.
    """
    gmat = gram.gram if isinstance(gram, GramGeometry) else np.asarray(gram)
    diag = np.diag(gmat).real
    order = sorted(range(len(diag)), key=lambda i: (-diag[i], i))
    return UserOrdering(perm=tuple(i + 1 for i in order), method=METHOD_ALG2)


def order_bruteforce(gram, nu, objective, power_budget, noise_power):
    """Exhaustive argmax over all N! orderings of the full rate objective.

    Guarded at N <= 9; the first permutation in lexicographic order wins
    ties, so concurrent evaluation schedules cannot change the result.
    """
    gmat = gram.gram if isinstance(gram, GramGeometry) else np.asarray(gram)
    n_users = gmat.shape[0]
    if n_users > BRUTE_FORCE_MAX_USERS:
        raise CapabilityError(
            "brute force enumerates N! orderings and is capped at N=%d "
            "(got N=%d); use order_alg1 or order_alg2 instead"
            % (BRUTE_FORCE_MAX_USERS, n_users))
    if objective not in (OBJECTIVE_SUM, OBJECTIVE_MIN):
        raise ParameterError("objective must be 'sum' or 'min', got %r" % objective)
    best_perm, best_value = None, -math.inf
    for perm in itertools.permutations(range(1, n_users + 1)):
        value = evaluate_ordering(gmat, perm, nu, objective, power_budget,
                                  noise_power)
        if value > best_value:
            best_perm, best_value = perm, value
    method = METHOD_BRUTE_SUM if objective == OBJECTIVE_SUM else METHOD_BRUTE_MIN
    return UserOrdering(perm=best_perm, method=method, objective_value=best_value)


def order_random(n_users, seed):
    """Seeded uniformly-random permutation (baseline for averaged curves)."""
    rng = np.random.default_rng(seed)
    perm = tuple(int(i) + 1 for i in rng.permutation(n_users))
    return UserOrdering(perm=perm, method=METHOD_RANDOM, note="seed=%r" % (seed,))
