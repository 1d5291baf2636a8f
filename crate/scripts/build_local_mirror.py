#!/usr/bin/env python3
"""Rebuild UCI-layout dataset files from copies redistributed on PyPI.

For sandboxes that cannot reach archive.ics.uci.edu. The output directory
can be used as ``TABENC_MIRROR``; every file carries the name the registry
expects. Files are re-serialized into the original UCI column order, so they
are row-for-row faithful only where the upstream copy was (see PROVENANCE.md
written next to them).

Usage: build_local_mirror.py OUT_DIR [--work DIR]
"""

import argparse
import hashlib
import re
import sys
import tarfile
import urllib.request
import zipfile
from pathlib import Path

INDEX = "https://pypi.org/simple/{}/"

SOURCES = {
    "responsibly": ("responsibly", "responsibly-0.1.2-py3-none-any.whl"),
    "keel": ("keel-ds", "keel_ds-0.2.5-py3-none-any.whl"),
    "orange": ("orange", "Orange-2.7.8.tar.gz"),
}

PROVENANCE = """\
| file | rows | source | notes |
|------|------|--------|-------|
"""


def fetch(project, filename, work):
    target = work / filename
    index = urllib.request.urlopen(INDEX.format(project), timeout=60).read().decode()
    m = re.search(r'href="([^"]*/' + re.escape(filename) + r')#sha256=([0-9a-f]{64})"', index)
    if not m:
        sys.exit(f"{filename} not listed in the {project} index")
    url, digest = m.group(1), m.group(2)
    if url.startswith("../"):
        url = urllib.request.urljoin(INDEX.format(project), url)
    if not target.exists() or hashlib.sha256(target.read_bytes()).hexdigest() != digest:
        print(f"downloading {filename}", file=sys.stderr)
        data = urllib.request.urlopen(url, timeout=600).read()
        if hashlib.sha256(data).hexdigest() != digest:
            sys.exit(f"{filename}: checksum mismatch")
        target.write_bytes(data)
    return target


def wheel_member(path, member):
    with zipfile.ZipFile(path) as z:
        return z.read(member).decode()


def tar_member(path, member):
    with tarfile.open(path) as t:
        return t.extractfile(member).read().decode()


def orange_rows(text):
    lines = text.splitlines()[3:]
    return [line.split("\t") for line in lines if line.strip()]


def write(out, name, rows, source, notes, table):
    body = "".join(",".join(r) + "\n" for r in rows)
    (out / name).write_text(body)
    table.append(f"| {name} | {len(rows)} | {source} | {notes} |")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("out", type=Path)
    ap.add_argument("--work", type=Path, default=Path("/tmp/tabenc-mirror-src"))
    args = ap.parse_args()
    args.out.mkdir(parents=True, exist_ok=True)
    args.work.mkdir(parents=True, exist_ok=True)
    src = {k: fetch(p, f, args.work) for k, (p, f) in SOURCES.items()}
    table = []

    for name in ("adult.data", "german.data"):
        folder = name.split(".")[0]
        raw = wheel_member(src["responsibly"], f"responsibly/dataset/{folder}/{name}")
        (args.out / name).write_text(raw)
        rows = sum(1 for line in raw.splitlines() if line.strip())
        table.append(f"| {name} | {rows} | {SOURCES['responsibly'][1]} | verbatim |")

    keel = "keel_ds/data/balanced/raw/{}.dat"
    rows = [r.split(",") for r in wheel_member(src["keel"], keel.format("mushroom")).split()]
    write(args.out, "agaricus-lepiota.data", [[r[-1]] + r[:-1] for r in rows], SOURCES["keel"][1],
          "rows with missing stalk-root absent upstream; class moved to first column", table)
    rows = [[c.strip() for c in line.split(",")]
            for line in wheel_member(src["keel"], keel.format("spambase")).splitlines() if line.strip()]
    write(args.out, "spambase.data", rows, SOURCES["keel"][1], "duplicate rows absent upstream", table)
    rows = [line.split(",") for line in wheel_member(src["keel"], keel.format("contraceptive")).split()]
    write(args.out, "cmc.data", rows, SOURCES["keel"][1], "verbatim values", table)

    base = "Orange-2.7.8/Orange/datasets/{}.tab"
    rename = {"v-high": "vhigh", "5-more": "5more", "v-good": "vgood"}
    rows = [[rename.get(c, c) for c in r] for r in orange_rows(tar_member(src["orange"], base.format("car")))]
    write(args.out, "car.data", rows, SOURCES["orange"][1], "value names mapped back to UCI spelling", table)
    rows = orange_rows(tar_member(src["orange"], base.format("balance-scale")))
    write(args.out, "balance-scale.data", rows, SOURCES["orange"][1], "verbatim values", table)
    rows = orange_rows(tar_member(src["orange"], base.format("breast-cancer-wisconsin")))
    write(args.out, "breast-cancer-wisconsin.data", [[str(i + 1)] + r for i, r in enumerate(rows)],
          SOURCES["orange"][1], "rows with missing bare-nuclei absent upstream; id column is a row number", table)

    sums = []
    for path in sorted(args.out.glob("*.data")):
        sums.append(f"{hashlib.sha256(path.read_bytes()).hexdigest()}  {path.name}")
    (args.out / "SHA256SUMS").write_text("\n".join(sums) + "\n")
    (args.out / "PROVENANCE.md").write_text(
        "# Local dataset mirror\n\nNo copy of nursery.data or the bank marketing archive was found.\n\n"
        + PROVENANCE + "\n".join(table) + "\n")
    print("\n".join(sums))


if __name__ == "__main__":
    main()
