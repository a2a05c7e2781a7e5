"""Reference baseline submissions used by the demo scripts and the
end-to-end suite. Each stub is a self-contained, stdlib-only ``main.py``
honoring the submission contract:

    python3 main.py --task <ctr|topn> --train P --valid P --test-input P --output P
"""

from __future__ import annotations

import io
import zipfile

_COMMON = '''\
import argparse
import csv


def parse_args():
    parser = argparse.ArgumentParser()
    parser.add_argument("--task", required=True, choices=["ctr", "topn"])
    parser.add_argument("--train", required=True)
    parser.add_argument("--valid", required=True)
    parser.add_argument("--test-input", dest="test_input", required=True)
    parser.add_argument("--output", required=True)
    return parser.parse_args()


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\\n")
        writer.writerow(header)
        writer.writerows(rows)
'''

RANDOM_STUB = _COMMON + '''

import random

SEED = 20240501  # fixed so reruns reproduce bit-identical predictions


def main():
    args = parse_args()
    rng = random.Random(SEED)
    if args.task == "ctr":
        header, rows = read_csv(args.test_input)
        row_id_col = header.index("row_id")
        out = [[row[row_id_col], f"{rng.random():.10f}"] for row in rows]
        write_csv(args.output, ["row_id", "score"], out)
        return
    _, users = read_csv(args.test_input)
    train_header, train_rows = read_csv(args.train)
    item_col = train_header.index("item_id")
    user_col = train_header.index("user_id")
    catalog = sorted({row[item_col] for row in train_rows})
    seen = {}
    for row in train_rows:
        seen.setdefault(row[user_col], set()).add(row[item_col])
    out = []
    for (user,) in users:
        candidates = [i for i in catalog if i not in seen.get(user, set())] or catalog
        picks = rng.sample(candidates, min(10, len(candidates)))
        out.extend([user, item, rank + 1] for rank, item in enumerate(picks))
    write_csv(args.output, ["user_id", "item_id", "rank"], out)


if __name__ == "__main__":
    main()
'''

POPULARITY_STUB = _COMMON + '''

def main():
    args = parse_args()
    train_header, train_rows = read_csv(args.train)
    if args.task == "ctr":
        header, rows = read_csv(args.test_input)
        item_col = train_header.index("item_id")
        # the label is whichever train column the test input lacks
        features = set(header) - {"row_id"}
        label_col = train_header.index((set(train_header) - features).pop())
        shown = {}
        clicked = {}
        for row in train_rows:
            shown[row[item_col]] = shown.get(row[item_col], 0) + 1
            clicked[row[item_col]] = clicked.get(row[item_col], 0) + int(row[label_col])
        overall = (sum(clicked.values()) + 1) / (len(train_rows) + 2)
        row_id_col = header.index("row_id")
        item_idx = header.index("item_id")
        out = []
        for row in rows:
            item = row[item_idx]
            # Laplace-smoothed historical click rate of the item
            rate = (clicked.get(item, 0) + 1) / (shown.get(item, 0) + 2) if item in shown else overall
            out.append([row[row_id_col], f"{rate:.10f}"])
        write_csv(args.output, ["row_id", "score"], out)
        return
    item_col = train_header.index("item_id")
    user_col = train_header.index("user_id")
    counts = {}
    seen = {}
    for row in train_rows:
        counts[row[item_col]] = counts.get(row[item_col], 0) + 1
        seen.setdefault(row[user_col], set()).add(row[item_col])
    by_popularity = sorted(counts, key=lambda i: (-counts[i], i))
    _, users = read_csv(args.test_input)
    out = []
    for (user,) in users:
        candidates = [i for i in by_popularity if i not in seen.get(user, set())] or by_popularity
        out.extend([user, item, rank + 1] for rank, item in enumerate(candidates[:10]))
    write_csv(args.output, ["user_id", "item_id", "rank"], out)


if __name__ == "__main__":
    main()
'''


def build_archive(files: dict[str, str]) -> bytes:
    """Deterministic zip (fixed member timestamps) of in-memory sources."""
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", compression=zipfile.ZIP_DEFLATED) as zf:
        for name in sorted(files):
            info = zipfile.ZipInfo(name, date_time=(2020, 1, 1, 0, 0, 0))
            zf.writestr(info, files[name])
    return buf.getvalue()


def random_scorer_archive() -> bytes:
    return build_archive({"main.py": RANDOM_STUB})


def popularity_baseline_archive() -> bytes:
    return build_archive({"main.py": POPULARITY_STUB})
