"""Immutable user-item bipartite network.

Both directions of the adjacency are stored in compressed form (an
``indptr``/``indices`` pair, as in CSR), so neighbour iteration is O(deg)
from either side and degrees are O(1) lookups.
"""

from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import DimensionError, DuplicateLinkError

__all__ = ["LinkSet", "BipartiteGraph", "build_graph", "degree_of_item", "degree_of_user"]


def _readonly(a):
    a.flags.writeable = False
    return a


class LinkSet:
    """Ordered collection of (user_index, item_index) pairs.

    Used for raw data as well as the training, testing and probe sets.
    """

    __slots__ = ("users", "items")

    def __init__(self, users=(), items=()):
        users = np.asarray(users, dtype=np.int64).reshape(-1)
        items = np.asarray(items, dtype=np.int64).reshape(-1)
        if users.shape != items.shape:
            raise ValueError("users and items must have the same length")
        self.users = _readonly(users)
        self.items = _readonly(items)

    @classmethod
    def from_pairs(cls, pairs):
        arr = np.asarray(list(pairs), dtype=np.int64).reshape(-1, 2)
        return cls(arr[:, 0], arr[:, 1])

    def __len__(self):
        return len(self.users)

    def __iter__(self):
        return zip(self.users.tolist(), self.items.tolist())

    def __eq__(self, other):
        if not isinstance(other, LinkSet):
            return NotImplemented
        return np.array_equal(self.users, other.users) and np.array_equal(self.items, other.items)

    def __repr__(self):
        return f"LinkSet(n={len(self)})"

    def pairs(self):
        return np.column_stack([self.users, self.items])

    def as_set(self):
        return set(iter(self))

    def take(self, indices):
        indices = np.asarray(indices, dtype=np.int64)
        return LinkSet(self.users[indices], self.items[indices])

    def concat(self, other):
        return LinkSet(np.concatenate([self.users, other.users]),
                       np.concatenate([self.items, other.items]))


def _compress(rows, cols, n_rows):
    order = np.lexsort((cols, rows))
    counts = np.bincount(rows, minlength=n_rows)
    indptr = np.zeros(n_rows + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, cols[order], counts


class BipartiteGraph:
    """Binary user-item adjacency with degree arrays.

    Instances are built by :func:`build_graph` and never mutated; all arrays
    are flagged read-only, so one graph may be shared by any number of
    workers.
    """

    def __init__(self, num_users, num_items, user_indptr, user_items,
                 item_indptr, item_users, user_degree, item_degree):
        self.num_users = int(num_users)
        self.num_items = int(num_items)
        self.user_indptr = _readonly(user_indptr)
        self.user_items = _readonly(user_items)
        self.item_indptr = _readonly(item_indptr)
        self.item_users = _readonly(item_users)
        self.user_degree = _readonly(user_degree)
        self.item_degree = _readonly(item_degree)

    def __repr__(self):
        return (f"BipartiteGraph(num_users={self.num_users}, "
                f"num_items={self.num_items}, num_links={self.num_links})")

    @property
    def num_links(self):
        return len(self.user_items)

    def user_adj(self, user):
        """Sorted item indices collected by ``user``."""
        if not 0 <= user < self.num_users:
            raise DimensionError(f"user index {user} out of range [0, {self.num_users})")
        return self.user_items[self.user_indptr[user]:self.user_indptr[user + 1]]

    def item_adj(self, item):
        """Sorted user indices that collected ``item``."""
        if not 0 <= item < self.num_items:
            raise DimensionError(f"item index {item} out of range [0, {self.num_items})")
        return self.item_users[self.item_indptr[item]:self.item_indptr[item + 1]]

    def links(self):
        """All links in user-major, item-ascending order."""
        users = np.repeat(np.arange(self.num_users, dtype=np.int64), self.user_degree)
        return LinkSet(users, self.user_items)

    @cached_property
    def adjacency(self):
        """Users x items CSR matrix of ones."""
        data = np.ones(self.num_links)
        return sp.csr_matrix((data, self.user_items, self.user_indptr),
                             shape=(self.num_users, self.num_items))

    @cached_property
    def adjacency_t(self):
        """Items x users CSR matrix of ones (column view of the adjacency)."""
        data = np.ones(self.num_links)
        return sp.csr_matrix((data, self.item_users, self.item_indptr),
                             shape=(self.num_items, self.num_users))

    def collected_mask(self, users=None):
        """Dense boolean matrix marking collected items for ``users``."""
        users = np.arange(self.num_users) if users is None else np.asarray(users)
        return self.adjacency[users].toarray().astype(bool)


def build_graph(links, num_users, num_items):
    """Build a :class:`BipartiteGraph` from a :class:`LinkSet`.

    Raises :class:`DimensionError` for out-of-range indices and
    :class:`DuplicateLinkError` if a pair occurs more than once.
    """
    users, items = links.users, links.items
    if len(users):
        bad = (users < 0) | (users >= num_users) | (items < 0) | (items >= num_items)
        if bad.any():
            k = int(np.flatnonzero(bad)[0])
            raise DimensionError(
                f"link ({users[k]}, {items[k]}) outside {num_users} users x {num_items} items")

    user_indptr, user_items, user_degree = _compress(users, items, num_users)
    # duplicates are adjacent once each row is sorted
    same_row = np.repeat(np.arange(num_users), user_degree)
    dup = (np.diff(user_items) == 0) & (np.diff(same_row) == 0)
    if dup.any():
        k = int(np.flatnonzero(dup)[0])
        raise DuplicateLinkError(f"duplicate link ({same_row[k]}, {user_items[k]})")

    item_indptr, item_users, item_degree = _compress(items, users, num_items)
    return BipartiteGraph(num_users, num_items, user_indptr, user_items,
                          item_indptr, item_users, user_degree, item_degree)


def degree_of_item(g, item):
    if not 0 <= item < g.num_items:
        raise DimensionError(f"item index {item} out of range [0, {g.num_items})")
    return int(g.item_degree[item])


def degree_of_user(g, user):
    if not 0 <= user < g.num_users:
        raise DimensionError(f"user index {user} out of range [0, {g.num_users})")
    return int(g.user_degree[user])
