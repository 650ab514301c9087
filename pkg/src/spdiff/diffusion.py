"""Similarity-preferential diffusion on a user-item bipartite network.

One kernel covers the whole family. For a target user ``i`` the first pass
spreads unit resource from i's items to users,

    f_ij = sum_a a_ia a_ja / (k_a^lam * k_j^(1-lam)),

and the second pass raises the user resource to ``theta`` and spreads it
back to items,

    f_ib = sum_j a_jb f_ij^theta / (k_j^lam * k_b^(1-lam)).

``lam=1`` is preferential mass diffusion, ``lam=0`` preferential heat
conduction; ``theta=1`` recovers the classic MD, HC and their hybrid.

Two evaluation routes exist. :func:`similarity`/:func:`score_items` work
on one target in O(sum of neighbour degrees). :func:`similarity_matrix`/
:func:`scores_from_similarity` handle a block of targets with sparse
matrix products. Both accumulate every sum in the same (ascending index)
order and give bit-identical scores.
"""

from collections.abc import Mapping
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ColdUserError, DimensionError, SpecError

__all__ = [
    "DiffusionParams", "ALGORITHMS", "params_for", "DegreePowers",
    "similarity", "score_items", "recommend", "recommend_all",
    "similarity_matrix", "scores_from_similarity", "score_matrix",
    "RecommendationList", "RecommendationSet",
]


@dataclass(frozen=True)
class DiffusionParams:
    """Hybrid weight ``lam`` in [0, 1] and similarity preference ``theta`` > 0."""

    lam: float = 1.0
    theta: float = 1.0

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise SpecError(f"lambda must lie in [0, 1], got {self.lam}")
        if not self.theta > 0.0 or not np.isfinite(self.theta):
            raise SpecError(f"theta must be a finite positive number, got {self.theta}")


# selector -> (fixed lam or None, fixed theta or None)
ALGORITHMS = {
    "md": (1.0, 1.0),
    "hc": (0.0, 1.0),
    "spmd": (1.0, None),
    "sphc": (0.0, None),
    "hybrid": (None, 1.0),
    "hybrid-pref": (None, None),
}


def params_for(algo, lam=None, theta=None):
    """Resolve an algorithm selector plus free parameters to DiffusionParams."""
    try:
        fixed_lam, fixed_theta = ALGORITHMS[algo]
    except KeyError:
        raise SpecError(f"unknown algorithm {algo!r}; choose from {sorted(ALGORITHMS)}") from None
    if fixed_lam is not None:
        lam = fixed_lam
    if fixed_theta is not None:
        theta = fixed_theta
    if lam is None or theta is None:
        raise SpecError(f"algorithm {algo!r} needs {'lambda' if lam is None else 'theta'}")
    return DiffusionParams(lam, theta)


def _degree_power(deg, exponent):
    out = np.zeros(len(deg))
    nz = deg > 0
    out[nz] = np.power(deg[nz].astype(np.float64), exponent)
    return out


class DegreePowers:
    """Degree powers needed by the kernel for one value of ``lam``.

    Zero-degree nodes get a factor of 0, so they neither receive nor pass
    on resource.
    """

    def __init__(self, g, lam):
        self.lam = lam
        self.item_first = _degree_power(g.item_degree, -lam)        # k_a^-lam
        self.user_first = _degree_power(g.user_degree, lam - 1.0)   # k_j^(lam-1)
        self.user_second = _degree_power(g.user_degree, -lam)       # k_j^-lam
        self.item_second = _degree_power(g.item_degree, lam - 1.0)  # k_b^(lam-1)


@lru_cache(maxsize=8)
def _powers_cached(g, lam):
    return DegreePowers(g, lam)


def _powers(g, lam):
    return _powers_cached(g, float(lam))


def _gather(indptr, indices, rows):
    """Concatenate the adjacency rows ``rows``; also return their lengths."""
    starts = indptr[rows]
    lengths = indptr[rows + 1] - starts
    total = int(lengths.sum())
    offsets = np.repeat(starts - np.cumsum(lengths) + lengths, lengths)
    return indices[offsets + np.arange(total)], lengths


def _check_target(g, target):
    if not 0 <= target < g.num_users:
        raise DimensionError(f"user index {target} out of range [0, {g.num_users})")
    if g.user_degree[target] == 0:
        raise ColdUserError(f"user {target} has no training links")


def similarity(g, target, params):
    """First diffusion pass: resource ``f_ij`` reaching every user ``j``.

    The target itself is included. Users sharing no item with the target
    get exactly 0.
    """
    _check_target(g, target)
    pw = _powers(g, params.lam)
    items = g.user_adj(target)
    users, lengths = _gather(g.item_indptr, g.item_users, items)
    f = np.bincount(users, weights=np.repeat(pw.item_first[items], lengths),
                    minlength=g.num_users)
    return f * pw.user_first


def _preferential_weights(f, theta, user_second):
    w = np.zeros_like(f)
    nz = f > 0
    w[nz] = np.power(f[nz], theta)
    return w * user_second


def score_items(g, target, f, params):
    """Second diffusion pass: final resource of every item.

    Users with zero similarity are skipped before exponentiation, so 0^theta
    is 0 for every theta > 0.
    """
    pw = _powers(g, params.lam)
    w = _preferential_weights(np.asarray(f, dtype=np.float64), params.theta, pw.user_second)
    users = np.flatnonzero(w)
    items, lengths = _gather(g.user_indptr, g.user_items, users)
    s = np.bincount(items, weights=np.repeat(w[users], lengths), minlength=g.num_items)
    return s * pw.item_second


@dataclass(frozen=True)
class RecommendationList:
    """Uncollected items of ``user`` by descending score, ties by ascending index."""

    user: int
    items: np.ndarray
    scores: np.ndarray

    def __len__(self):
        return len(self.items)

    def top(self, L):
        return RecommendationList(self.user, self.items[:L], self.scores[:L])

    def pairs(self):
        return list(zip(self.items.tolist(), self.scores.tolist()))


def _rank(user, scores, collected):
    candidates = np.flatnonzero(~collected)
    # stable sort on negated scores keeps ascending index inside ties
    order = np.argsort(-scores[candidates], kind="stable")
    items = candidates[order]
    return RecommendationList(int(user), items, scores[items])


def recommend(g, target, params, L=None):
    """Ranked recommendation list for one user, optionally truncated to ``L``."""
    f = similarity(g, target, params)
    s = score_items(g, target, f, params)
    collected = np.zeros(g.num_items, dtype=bool)
    collected[g.user_adj(target)] = True
    rec = _rank(target, s, collected)
    return rec if L is None else rec.top(L)


# -- batched route ------------------------------------------------------------

def similarity_matrix(g, lam, users):
    """``f_ij`` for every user ``j`` (rows) and each target in ``users`` (columns)."""
    pw = _powers(g, lam)
    users = np.asarray(users, dtype=np.int64)
    x = g.adjacency[users].T.toarray()
    x *= pw.item_first[:, None]
    f = g.adjacency @ np.ascontiguousarray(x)
    f *= pw.user_first[:, None]
    return f


def scores_from_similarity(g, f, lam, theta):
    """Item scores (targets x items) from a :func:`similarity_matrix` block."""
    pw = _powers(g, lam)
    w = _preferential_weights(f, theta, pw.user_second[:, None])
    s = g.adjacency_t @ w
    s *= pw.item_second[:, None]
    return np.ascontiguousarray(s.T)


def score_matrix(g, params, users=None):
    """Scores of all items for each target user (rows follow ``users``)."""
    if users is None:
        users = np.flatnonzero(g.user_degree > 0)
    f = similarity_matrix(g, params.lam, users)
    return scores_from_similarity(g, f, params.lam, params.theta)


class RecommendationSet(Mapping):
    """Full recommendation lists for a population of users.

    Holds one dense score row per user that has training links; the
    per-user :class:`RecommendationList` is built on access and cut to
    ``L`` items when ``L`` is set. ``skipped`` counts the cold users left
    out. Metrics always read the full score rows.
    """

    def __init__(self, users, scores, collected, skipped=0, L=None):
        self.users = np.asarray(users, dtype=np.int64)
        self.scores = scores
        self.collected = collected
        self.skipped = int(skipped)
        self.L = L
        self._top = {}
        self.row_of = {u: k for k, u in enumerate(self.users.tolist())}

    @classmethod
    def from_graph(cls, g, scores, users, skipped=0, L=None):
        return cls(users, scores, g.collected_mask(users), skipped, L)

    @classmethod
    def from_lists(cls, lists, num_items, skipped=0):
        """Rebuild from RecommendationLists; items absent from a list count as collected."""
        users = sorted(lists)
        scores = np.zeros((len(users), num_items))
        collected = np.ones((len(users), num_items), dtype=bool)
        for k, u in enumerate(users):
            rec = lists[u]
            scores[k, rec.items] = rec.scores
            collected[k, rec.items] = False
        return cls(users, scores, collected, skipped)

    @property
    def num_items(self):
        return self.scores.shape[1]

    def __getitem__(self, user):
        k = self.row_of[user]
        rec = _rank(user, self.scores[k], self.collected[k])
        return rec if self.L is None else rec.top(self.L)

    def __iter__(self):
        return iter(self.users.tolist())

    def __len__(self):
        return len(self.users)

    def uncollected_counts(self):
        return self.num_items - self.collected.sum(axis=1)

    def top_mask(self, L):
        """Boolean rows marking each user's top-``L`` items under the list tie rule."""
        if L in self._top:
            return self._top[L]
        masked = np.where(self.collected, -np.inf, self.scores)
        n_unc = self.uncollected_counts()
        top = ~self.collected
        long_rows = np.flatnonzero(n_unc > L)
        if len(long_rows):
            m = masked[long_rows]
            # value of the L-th best item; ties at it are filled by lowest index
            cut = -np.partition(-m, L - 1, axis=1)[:, L - 1]
            above = m > cut[:, None]
            at = m == cut[:, None]
            room = L - above.sum(axis=1)
            at &= np.cumsum(at, axis=1) <= room[:, None]
            top[long_rows] = above | at
        top.flags.writeable = False
        self._top[L] = top
        return top

    def rank_stats(self, users, items):
        """Tie-block position of each (user, item) among the user's uncollected items.

        Returns ``(greater, equal, n_uncollected)`` where ``greater`` counts
        strictly better items and ``equal`` the tie block including the item.
        """
        users = np.asarray(users, dtype=np.int64)
        items = np.asarray(items, dtype=np.int64)
        rows = np.array([self.row_of[u] for u in users.tolist()], dtype=np.int64)
        greater = np.zeros(len(rows), dtype=np.int64)
        equal = np.zeros(len(rows), dtype=np.int64)
        n_unc = self.uncollected_counts()[rows] if len(rows) else np.zeros(0, dtype=np.int64)
        if not len(rows):
            return greater, equal, n_unc
        order = np.argsort(rows, kind="stable")
        bounds = np.flatnonzero(np.diff(rows[order])) + 1
        for group in np.split(order, bounds):
            r = rows[group[0]]
            values = np.sort(self.scores[r][~self.collected[r]])
            v = self.scores[r, items[group]]
            lo = np.searchsorted(values, v, side="left")
            hi = np.searchsorted(values, v, side="right")
            greater[group] = len(values) - hi
            equal[group] = hi - lo
        return greater, equal, n_unc


def recommend_all(g, params, L=None, workers=1, block_size=256):
    """Recommendations for every user with training links.

    Returns a :class:`RecommendationSet` whose lists are cut to ``L`` when
    given. Each user's row depends on nothing but the graph, so the result
    is identical for any ``workers`` and ``block_size``.
    """
    warm = np.flatnonzero(g.user_degree > 0)
    skipped = g.num_users - len(warm)
    blocks = [warm[k:k + block_size] for k in range(0, len(warm), block_size)]

    def run(block):
        return score_matrix(g, params, block)

    if workers > 1 and len(blocks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, blocks))
    else:
        parts = [run(b) for b in blocks]
    scores = np.vstack(parts) if parts else np.zeros((0, g.num_items))
    return RecommendationSet.from_graph(g, scores, warm, skipped, L)
