#!/usr/bin/env python3
"""Generate seeded synthetic datasets (raw CSV + schema document) so they can
be registered with `rboard dataset register`.

Usage: python scripts/make_synthetic.py [outdir] [--seed N]
"""

import argparse
import json
from pathlib import Path

from rboard.synth import CTR_SCHEMA_DOC, TOPN_SCHEMA_DOC, make_ctr_dataset, make_topn_dataset


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("outdir", nargs="?", default="synthetic")
    parser.add_argument("--seed", type=int, default=1)
    parser.add_argument("--datasets-per-task", type=int, default=2)
    args = parser.parse_args()

    out = Path(args.outdir)
    out.mkdir(parents=True, exist_ok=True)
    for n in range(args.datasets_per_task):
        seed = args.seed + n
        (out / f"ctr-{n}.csv").write_bytes(make_ctr_dataset(seed))
        (out / f"ctr-{n}.schema.json").write_text(
            json.dumps(dict(CTR_SCHEMA_DOC, name=f"Synthetic CTR {n}"), indent=2)
        )
        (out / f"topn-{n}.csv").write_bytes(make_topn_dataset(seed + 100))
        (out / f"topn-{n}.schema.json").write_text(
            json.dumps(dict(TOPN_SCHEMA_DOC, name=f"Synthetic top-N {n}"), indent=2)
        )
    print(f"wrote {2 * args.datasets_per_task} datasets to {out}/")
    print("register one with:")
    print(
        f"  rboard dataset register --task ctr --id demo-ctr "
        f"--schema {out}/ctr-0.schema.json --raw {out}/ctr-0.csv"
    )


if __name__ == "__main__":
    main()
