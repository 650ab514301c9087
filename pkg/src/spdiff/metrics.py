"""Accuracy and diversity metrics for recommendation lists.

All functions take a :class:`~spdiff.diffusion.RecommendationSet` (as
returned by ``recommend_all``) or a plain mapping of user ->
:class:`~spdiff.diffusion.RecommendationList`. Ranking score needs FULL
lists; top-``L`` metrics use the list tie rule (descending score, then
ascending item index).
"""

from dataclasses import asdict, dataclass
import math

import numpy as np

from .diffusion import RecommendationSet
from .errors import DimensionError, InsufficientPopulationError

__all__ = [
    "MetricsReport", "CSV_HEADER", "ranking_score", "precision_at",
    "hamming_mean", "novelty_mean", "evaluate",
]

CSV_HEADER = ("algorithm", "lambda", "theta", "seed", "L", "RS", "P", "H", "N",
              "links_evaluated", "links_skipped", "users_evaluated")


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


@dataclass(frozen=True)
class MetricsReport:
    """Ranking score, precision, Hamming distance and novelty for one run.

    Undefined values (e.g. RS and P for an empty probe set) are ``None``.
    """

    ranking_score: float | None
    precision: float | None
    hamming: float | None
    novelty: float | None
    L: int
    links_evaluated: int
    links_skipped: int
    users_evaluated: int

    def to_text(self):
        return "".join(f"{k}={_fmt(v)}\n" for k, v in asdict(self).items())

    def csv_row(self, algorithm="", lam=None, theta=None, seed=None):
        values = (algorithm, lam, theta, seed, self.L, self.ranking_score, self.precision,
                  self.hamming, self.novelty, self.links_evaluated, self.links_skipped,
                  self.users_evaluated)
        return ",".join(_fmt(v) for v in values)


def _as_set(recs, num_items=None):
    if isinstance(recs, RecommendationSet):
        return recs
    if num_items is None:
        num_items = 1 + max((int(r.items.max()) for r in recs.values() if len(r)), default=-1)
    return RecommendationSet.from_lists(recs, num_items)


def _check_probe(probe, g):
    if not len(probe):
        return
    if probe.users.min() < 0 or probe.users.max() >= g.num_users:
        raise DimensionError("probe user index outside the graph")
    if probe.items.min() < 0 or probe.items.max() >= g.num_items:
        raise DimensionError("probe item index outside the graph")


def _evaluable(recs, probe):
    known = np.isin(probe.users, recs.users)
    return probe.users[known], probe.items[known], int((~known).sum())


def ranking_score(recs, probe, g, catalog_size=None):
    """Mean relative rank of probe items among each user's uncollected items.

    Tied items share the average of the positions their block spans.
    Probe links of users without a list (cold users) are skipped. Returns
    ``(rs, skipped)``; ``rs`` is ``None`` when nothing is evaluable.

    By default a position is divided by the user's number of uncollected
    items. Passing ``catalog_size`` divides by that fixed count instead
    (e.g. every item of the raw dataset, including ones that never pass
    the rating threshold), for comparison with results reported under a
    fixed-catalogue normalisation.
    """
    _check_probe(probe, g)
    recs = _as_set(recs, g.num_items)
    users, items, skipped = _evaluable(recs, probe)
    if not len(users):
        return None, skipped
    greater, equal, n_unc = recs.rank_stats(users, items)
    denominator = n_unc if catalog_size is None else catalog_size
    per_link = (greater + (equal + 1) / 2.0) / denominator
    return math.fsum(per_link.tolist()) / len(per_link), skipped


def precision_at(recs, probe, L):
    """Mean fraction of each top-``L`` list found in the user's probe links.

    Averaged over users with at least one probe link and a list; ``None``
    if there are none.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    recs = _as_set(recs)
    users, items, _ = _evaluable(recs, probe)
    if not len(users):
        return None
    top = recs.top_mask(L)
    rows = np.array([recs.row_of[u] for u in users.tolist()], dtype=np.int64)
    hits = int(top[rows, items].sum())
    n_users = len(np.unique(users))
    return hits / (L * n_users)


def hamming_mean(recs, L):
    """Mean of ``1 - overlap/L`` over all unordered pairs of users with lists.

    Summed pairwise overlap equals sum over items of C(c, 2), where ``c``
    counts the lists containing the item, so the pair loop is never formed.
    """
    recs = _as_set(recs)
    n = len(recs)
    if n < 2:
        raise InsufficientPopulationError("need at least two users with lists")
    counts = recs.top_mask(L).sum(axis=0).astype(np.int64)
    overlap = int((counts * (counts - 1) // 2).sum())
    pairs = n * (n - 1) // 2
    return 1.0 - overlap / (L * pairs)


def novelty_mean(recs, g, L):
    """Mean training degree of the items in each top-``L`` list, averaged over users.

    A list shorter than ``L`` is divided by its own length; empty lists
    are ignored. Returns ``None`` if no user has a non-empty list.
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    recs = _as_set(recs, g.num_items)
    top = recs.top_mask(L)
    sizes = top.sum(axis=1)
    degree_sums = top.astype(np.int64) @ g.item_degree.astype(np.int64)
    keep = sizes > 0
    if not keep.any():
        return None
    per_user = degree_sums[keep] / sizes[keep]
    return math.fsum(per_user.tolist()) / int(keep.sum())


def evaluate(recs, probe, g, L=20, catalog_size=None):
    """All four metrics bundled into a :class:`MetricsReport`."""
    recs = _as_set(recs, g.num_items)
    rs, skipped = ranking_score(recs, probe, g, catalog_size)
    try:
        h = hamming_mean(recs, L)
    except InsufficientPopulationError:
        h = None
    return MetricsReport(
        ranking_score=rs,
        precision=precision_at(recs, probe, L),
        hamming=h,
        novelty=novelty_mean(recs, g, L),
        L=L,
        links_evaluated=len(probe) - skipped,
        links_skipped=skipped,
        users_evaluated=len(recs),
    )
