"""Fetch MovieLens 100k ratings into data/ml-100k/u.data.

Tries the GroupLens archive first. If that host is unreachable, falls back
to the copy bundled with the RecBole wheel (fetched with ``pip download``
from whatever index pip is configured for) and rewrites its ``.inter``
file into the original tab-separated ``u.data`` layout.
"""

import argparse
import hashlib
import io
from pathlib import Path
import subprocess
import sys
import tempfile
import urllib.request
import zipfile

GROUPLENS = "https://files.grouplens.org/datasets/movielens/ml-100k.zip"
WHEEL = "recbole==1.2.1"
INTER = "recbole/dataset_example/ml-100k/ml-100k.inter"


def from_grouplens(timeout):
    with urllib.request.urlopen(GROUPLENS, timeout=timeout) as resp:
        archive = zipfile.ZipFile(io.BytesIO(resp.read()))
    return archive.read("ml-100k/u.data")


def from_recbole():
    with tempfile.TemporaryDirectory() as tmp:
        subprocess.run([sys.executable, "-m", "pip", "download", "--no-deps", "-q",
                        "-d", tmp, WHEEL], check=True)
        wheel = next(Path(tmp).glob("recbole-*.whl"))
        lines = zipfile.ZipFile(wheel).read(INTER).decode().splitlines()
    # first line is a typed header (user_id:token ...)
    return "".join(line + "\n" for line in lines[1:]).encode()


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    parser.add_argument("--out", default=Path(__file__).resolve().parents[1] / "data" / "ml-100k",
                        type=Path)
    parser.add_argument("--timeout", type=float, default=20.0)
    args = parser.parse_args(argv)

    try:
        payload = from_grouplens(args.timeout)
        source = "grouplens"
    except OSError as exc:
        print(f"grouplens unavailable ({exc}); using the RecBole copy", file=sys.stderr)
        payload = from_recbole()
        source = "recbole wheel"

    n = payload.count(b"\n")
    if n != 100_000:
        sys.exit(f"expected 100000 ratings, got {n}")
    args.out.mkdir(parents=True, exist_ok=True)
    (args.out / "u.data").write_bytes(payload)
    print(f"wrote {args.out / 'u.data'} from {source}: {n} lines, "
          f"sha256 {hashlib.sha256(payload).hexdigest()[:16]}")


if __name__ == "__main__":
    main()
