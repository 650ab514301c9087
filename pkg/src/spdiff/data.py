"""Rating files, thresholding, seeded splits and a synthetic data generator."""

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
import io

import numpy as np

from .errors import ParseError, RatingRangeError, SpecError
from .graph import LinkSet

__all__ = [
    "RatingRecord", "IdMap", "SplitSpec", "parse_ratings", "read_ratings",
    "threshold_filter", "split_two", "split_three", "split_sparsity",
    "synth_dataset", "round_half_up", "rng_for", "write_manifest",
    "read_manifest", "write_idmap", "read_idmap",
]

RATING_MIN, RATING_MAX = 1, 5


@dataclass(frozen=True)
class RatingRecord:
    raw_user_id: int
    raw_item_id: int
    rating: int
    timestamp: int | None = None


class IdMap:
    """Bijection between raw dataset IDs and dense 0-based indices."""

    def __init__(self, user_ids=(), item_ids=()):
        self.user_ids = list(user_ids)
        self.item_ids = list(item_ids)
        self.user_index = {u: k for k, u in enumerate(self.user_ids)}
        self.item_index = {a: k for k, a in enumerate(self.item_ids)}
        if len(self.user_index) != len(self.user_ids) or len(self.item_index) != len(self.item_ids):
            raise ValueError("raw IDs must be unique")

    @property
    def num_users(self):
        return len(self.user_ids)

    @property
    def num_items(self):
        return len(self.item_ids)

    def _add_user(self, raw):
        k = self.user_index.get(raw)
        if k is None:
            k = self.user_index[raw] = len(self.user_ids)
            self.user_ids.append(raw)
        return k

    def _add_item(self, raw):
        k = self.item_index.get(raw)
        if k is None:
            k = self.item_index[raw] = len(self.item_ids)
            self.item_ids.append(raw)
        return k

    def to_raw(self, links):
        """Translate a LinkSet back to a list of raw (user, item) ID pairs."""
        return [(self.user_ids[u], self.item_ids[a]) for u, a in links]

    def from_raw(self, pairs):
        """Translate raw ID pairs to a LinkSet; unknown IDs raise KeyError."""
        pairs = list(pairs)
        users = [self.user_index[u] for u, _ in pairs]
        items = [self.item_index[a] for _, a in pairs]
        return LinkSet(users, items)


@dataclass(frozen=True)
class SplitSpec:
    """Fractions and seed for a random division of a link set.

    ``sparsity_p`` is the training fraction used by the sparsity study;
    the other fields drive the two- and three-way splits.
    """

    probe_fraction: float = 0.1
    testing_fraction: float | None = None
    seed: int = 0
    sparsity_p: float | None = None

    def __post_init__(self):
        for name in ("probe_fraction", "testing_fraction", "sparsity_p"):
            v = getattr(self, name)
            if v is not None and not 0.0 < v < 1.0:
                raise SpecError(f"{name} must lie in (0, 1), got {v}")
        if self.testing_fraction is not None and self.probe_fraction + self.testing_fraction >= 1.0:
            raise SpecError("probe_fraction + testing_fraction must be < 1")


def parse_ratings(source, delimiter="\t"):
    """Parse ``user, item, rating[, timestamp]`` lines into RatingRecords.

    ``source`` is a text stream, a string, or any iterable of lines.
    ``delimiter=None`` splits on runs of whitespace. Blank lines and
    ``#`` comment lines are skipped; line numbers in errors are 1-based.
    """
    if isinstance(source, str):
        source = io.StringIO(source)
    records = []
    for lineno, line in enumerate(source, start=1):
        line = line.strip("\r\n")
        if not line.strip() or line.startswith("#"):
            continue
        fields = line.split(delimiter) if delimiter not in (None, " ") else line.split()
        if len(fields) < 3:
            raise ParseError(f"expected at least 3 fields, got {len(fields)}", lineno)
        try:
            values = [int(f) for f in fields[:4]]
        except ValueError:
            raise ParseError(f"non-integer field in {line!r}", lineno) from None
        rating = values[2]
        if not RATING_MIN <= rating <= RATING_MAX:
            raise RatingRangeError(f"rating {rating} outside {RATING_MIN}..{RATING_MAX}", lineno)
        ts = values[3] if len(values) > 3 else None
        records.append(RatingRecord(values[0], values[1], rating, ts))
    return records


def read_ratings(path, delimiter="\t"):
    with open(path, encoding="utf-8") as fh:
        try:
            return parse_ratings(fh, delimiter)
        except ParseError as exc:
            raise ParseError(f"{path}: {exc}") from exc


def threshold_filter(records, min_rating=3):
    """Keep ratings ``>= min_rating`` as binary links.

    Raw IDs are remapped densely in order of first appearance among the
    kept records; repeated (user, item) pairs keep only the first one.
    Returns ``(links, idmap)``.
    """
    if not RATING_MIN <= min_rating <= RATING_MAX:
        raise SpecError(f"min_rating must lie in {RATING_MIN}..{RATING_MAX}")
    idmap = IdMap()
    seen = set()
    users, items = [], []
    for r in records:
        if r.rating < min_rating:
            continue
        u = idmap._add_user(r.raw_user_id)
        a = idmap._add_item(r.raw_item_id)
        if (u, a) in seen:
            continue
        seen.add((u, a))
        users.append(u)
        items.append(a)
    return LinkSet(users, items), idmap


def round_half_up(fraction, count):
    """``round(fraction * count)`` with halves rounded up.

    The fraction is taken at its shortest decimal repr, so 0.15 * 10 gives
    2 rather than the binary-float 1.4999...
    """
    exact = Decimal(repr(float(fraction))) * int(count)
    return int(exact.quantize(Decimal(1), rounding=ROUND_HALF_UP))


def rng_for(seed):
    """PCG64 generator; stream is identical on every platform for a given seed."""
    return np.random.Generator(np.random.PCG64(seed))


def _partition(links, sizes, seed):
    # shuffle once and cut consecutive blocks; each part keeps input order
    perm = rng_for(seed).permutation(len(links))
    parts, start = [], 0
    for size in sizes:
        parts.append(links.take(np.sort(perm[start:start + size])))
        start += size
    parts.append(links.take(np.sort(perm[start:])))
    return parts


def split_two(links, spec):
    """Random training/probe division; returns ``(train, probe)``."""
    n_probe = round_half_up(spec.probe_fraction, len(links))
    probe, train = _partition(links, [n_probe], spec.seed)
    return train, probe


def split_three(links, spec):
    """Random training/testing/probe division; returns ``(train, testing, probe)``."""
    if spec.testing_fraction is None:
        raise SpecError("split_three needs testing_fraction")
    n_probe = round_half_up(spec.probe_fraction, len(links))
    n_test = round_half_up(spec.testing_fraction, len(links))
    if n_probe + n_test >= len(links) and len(links):
        raise SpecError("split leaves no training links")
    probe, testing, train = _partition(links, [n_probe, n_test], spec.seed)
    return train, testing, probe


def split_sparsity(links, p, seed):
    """Training set is a random fraction ``p`` of the links; the probe set is the rest.

    The probe is cut from the front of the same shuffle used by
    :func:`split_two`, so ``p=0.9`` reproduces the 90/10 split of that seed
    whenever the sizes agree.
    """
    if not 0.0 < p < 1.0:
        raise SpecError(f"p must lie in (0, 1), got {p}")
    n_train = round_half_up(p, len(links))
    if n_train == 0:
        raise SpecError(f"p={p} leaves no training links")
    probe, train = _partition(links, [len(links) - n_train], seed)
    return train, probe


def synth_dataset(num_users, num_items, num_links, seed):
    """Random duplicate-free link set with a heavy-tailed item popularity.

    Users are drawn uniformly. Items follow preferential attachment: the
    chance of picking an item is proportional to its current degree + 1.
    Draws hitting an existing pair are rejected and redrawn.
    """
    if num_users < 1 or num_items < 1 or num_links < 0:
        raise SpecError("dimensions must be positive")
    if num_links > num_users * num_items:
        raise SpecError(f"{num_links} links do not fit in {num_users} x {num_items}")
    rng = rng_for(seed)
    # urn: one ticket per item plus one per link already attached to it
    urn = np.empty(num_items + num_links, dtype=np.int64)
    urn[:num_items] = np.arange(num_items)
    urn_len = num_items
    seen = set()
    users = np.empty(num_links, dtype=np.int64)
    items = np.empty(num_links, dtype=np.int64)
    n = 0
    while n < num_links:
        block = max(1024, 2 * (num_links - n))
        block = min(block, 1 << 16)
        u_draw = rng.integers(0, num_users, size=block)
        a_draw = rng.random(block)
        for u, x in zip(u_draw.tolist(), a_draw.tolist()):
            a = int(urn[int(x * urn_len)])
            key = u * num_items + a
            if key in seen:
                continue
            seen.add(key)
            users[n], items[n] = u, a
            urn[urn_len] = a
            urn_len += 1
            n += 1
            if n == num_links:
                break
    return LinkSet(users, items)


# -- manifests ---------------------------------------------------------------

def write_manifest(fh, header, parts, idmap):
    """Write split parts as raw-ID pairs.

    ``header`` is a mapping echoed as ``# key=value`` lines; ``parts`` maps a
    section name (``probe``, ``testing``) to a LinkSet.
    """
    fh.write("# spdiff split manifest\n")
    for key, value in header.items():
        fh.write(f"# {key}={value}\n")
    for name, links in parts.items():
        fh.write(f"[{name}]\n")
        for u, a in idmap.to_raw(links):
            fh.write(f"{u}\t{a}\n")


def read_manifest(fh):
    """Inverse of :func:`write_manifest`; returns ``(header, {section: raw pairs})``."""
    header, parts, current = {}, {}, None
    for lineno, line in enumerate(fh, start=1):
        line = line.rstrip("\n")
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = body.split("=", 1)
                header[key.strip()] = value.strip()
            continue
        if line.startswith("[") and line.endswith("]"):
            current = parts.setdefault(line[1:-1], [])
            continue
        if current is None:
            raise ParseError("pair before any [section]", lineno)
        try:
            u, a = line.split("\t")
            current.append((int(u), int(a)))
        except ValueError:
            raise ParseError(f"bad manifest pair {line!r}", lineno) from None
    return header, parts


def write_idmap(fh, idmap):
    fh.write("kind\tindex\traw_id\n")
    for k, raw in enumerate(idmap.user_ids):
        fh.write(f"user\t{k}\t{raw}\n")
    for k, raw in enumerate(idmap.item_ids):
        fh.write(f"item\t{k}\t{raw}\n")


def read_idmap(fh):
    users, items = [], []
    for line in fh:
        if line.startswith("#") or line.startswith("kind\t"):
            continue
        kind, k, raw = line.rstrip("\n").split("\t")
        target = users if kind == "user" else items
        if int(k) != len(target):
            raise ParseError(f"idmap index {k} out of order")
        target.append(int(raw))
    return IdMap(users, items)
