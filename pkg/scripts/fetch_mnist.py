#!/usr/bin/env python3
"""Place the four MNIST IDX files into a local data directory.

The benchmark never downloads data at runtime; this helper stages the files
once.  It tries, in order:

1. files already present in the target directory (no-op),
2. gzipped or raw IDX files found in --source,
3. the npm package ``mnist-data``, which bundles the raw IDX files
   (useful on machines whose only network access is a package mirror).

Usage: python scripts/fetch_mnist.py [--dest data/mnist] [--source DIR]
Then point the CLI at the files with ARFF_DATA_DIR=<dest>.
"""

import argparse
import gzip
import shutil
import subprocess
import sys
import tarfile
import tempfile
from pathlib import Path

FILES = (
    "train-images-idx3-ubyte",
    "train-labels-idx1-ubyte",
    "t10k-images-idx3-ubyte",
    "t10k-labels-idx1-ubyte",
)


def have_all(dest: Path) -> bool:
    return all((dest / name).is_file() for name in FILES)


def stage_from_dir(source: Path, dest: Path) -> bool:
    found = 0
    for name in FILES:
        raw = source / name
        gz = source / (name + ".gz")
        if raw.is_file():
            shutil.copyfile(raw, dest / name)
            found += 1
        elif gz.is_file():
            with gzip.open(gz, "rb") as fin, open(dest / name, "wb") as fout:
                shutil.copyfileobj(fin, fout)
            found += 1
    return found == len(FILES)


def stage_from_npm(dest: Path) -> bool:
    npm = shutil.which("npm")
    if npm is None:
        return False
    with tempfile.TemporaryDirectory() as tmp:
        try:
            out = subprocess.run(
                [npm, "pack", "mnist-data", "--pack-destination", tmp],
                capture_output=True, text=True, check=True, timeout=300,
            )
        except (subprocess.CalledProcessError, subprocess.TimeoutExpired) as exc:
            print(f"npm pack mnist-data failed: {exc}", file=sys.stderr)
            return False
        tarball = Path(tmp) / out.stdout.strip().splitlines()[-1]
        with tarfile.open(tarball) as tar:
            for name in FILES:
                member = tar.getmember(f"package/data/{name}")
                with tar.extractfile(member) as fin, open(dest / name, "wb") as fout:
                    shutil.copyfileobj(fin, fout)
    return True


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--dest", type=Path, default=Path("data/mnist"))
    parser.add_argument("--source", type=Path, help="directory with existing (gzipped) IDX files")
    args = parser.parse_args()
    dest = args.dest
    dest.mkdir(parents=True, exist_ok=True)
    if have_all(dest):
        print(f"already staged in {dest}")
        return 0
    if args.source and stage_from_dir(args.source, dest):
        print(f"staged from {args.source} into {dest}")
        return 0
    if stage_from_npm(dest):
        print(f"staged from the npm 'mnist-data' package into {dest}")
        return 0
    print(
        "could not stage MNIST: supply --source with the IDX files "
        "(train/t10k images and labels, optionally gzipped)",
        file=sys.stderr,
    )
    return 1


if __name__ == "__main__":
    raise SystemExit(main())
