"""Shared loader: MovieLens 100k if present, otherwise a synthetic stand-in."""

import os
from pathlib import Path

from spdiff import read_ratings, synth_dataset, threshold_filter

ML100K = Path(os.environ.get("SPDIFF_ML100K",
                             Path(__file__).resolve().parents[1] / "data" / "ml-100k" / "u.data"))


def load():
    """Return (links, num_users, num_items, label)."""
    if ML100K.exists():
        links, idmap = threshold_filter(read_ratings(ML100K), 3)
        return links, idmap.num_users, idmap.num_items, "MovieLens 100k"
    links = synth_dataset(900, 1600, 80000, seed=0)
    return links, 900, 1600, "synthetic (MovieLens not found)"
