import pytest

from rboard.config import PlatformConfig
from rboard.platform import Platform
from rboard.stubs import build_archive
from rboard.synth import CTR_SCHEMA_DOC, TOPN_SCHEMA_DOC, make_ctr_dataset, make_topn_dataset

QUICK_CONFIG = PlatformConfig(wall_timeout_seconds=30.0, workers=2)


@pytest.fixture
def platform(tmp_path):
    return Platform(tmp_path / "root", QUICK_CONFIG)


def register_ctr(platform, dataset_id="ctr-a", seed=1001, data_seed=11, **sizes):
    schema_doc = dict(CTR_SCHEMA_DOC, split={"secret_seed": seed})
    return platform.register_dataset_payload(
        dataset_id=dataset_id,
        task="ctr",
        name=dataset_id,
        schema_doc=schema_doc,
        raw_bytes=make_ctr_dataset(data_seed, **sizes),
    )


def register_topn(platform, dataset_id="topn-a", seed=2002, data_seed=22, **sizes):
    schema_doc = dict(TOPN_SCHEMA_DOC, split={"secret_seed": seed})
    return platform.register_dataset_payload(
        dataset_id=dataset_id,
        task="topn",
        name=dataset_id,
        schema_doc=schema_doc,
        raw_bytes=make_topn_dataset(data_seed, **sizes),
    )


# Tiny submission stubs exercising the sandbox contract.

SLEEP_FOREVER = """\
import time
while True:
    time.sleep(0.5)
"""

SLEEP_THEN_SUCCEED = """\
import argparse, csv, time

parser = argparse.ArgumentParser()
for flag in ("--task", "--train", "--valid", "--output"):
    parser.add_argument(flag)
parser.add_argument("--test-input", dest="test_input")
args = parser.parse_args()

time.sleep(5)
with open(args.test_input, newline="") as fh:
    rows = list(csv.reader(fh))
row_id = rows[0].index("row_id")
with open(args.output, "w", newline="") as fh:
    writer = csv.writer(fh, lineterminator="\\n")
    writer.writerow(["row_id", "score"])
    for row in rows[1:]:
        writer.writerow([row[row_id], "0.5"])
"""

CONSTANT_SCORER = """\
import argparse, csv

parser = argparse.ArgumentParser()
for flag in ("--task", "--train", "--valid", "--output"):
    parser.add_argument(flag)
parser.add_argument("--test-input", dest="test_input")
args = parser.parse_args()

with open(args.test_input, newline="") as fh:
    rows = list(csv.reader(fh))

if args.task == "ctr":
    row_id = rows[0].index("row_id")
    out = [["row_id", "score"]] + [[row[row_id], "0.5"] for row in rows[1:]]
else:
    with open(args.train, newline="") as fh:
        train = list(csv.reader(fh))
    items = sorted({row[train[0].index("item_id")] for row in train[1:]})[:10]
    out = [["user_id", "item_id", "rank"]]
    for (user,) in rows[1:]:
        out.extend([user, item, str(i + 1)] for i, item in enumerate(items))

with open(args.output, "w", newline="") as fh:
    csv.writer(fh, lineterminator="\\n").writerows(out)
"""

EXIT_THREE = """\
import sys
print("about to fail")
sys.exit(3)
"""


def stub_archive(source: str) -> bytes:
    return build_archive({"main.py": source})
