"""Regenerate tests/manifest.json (the seeded cases behind the acceptance suites)."""

import json
import random
from pathlib import Path

from finexch.oracle import make_manifest

MASTER_SEED = 20240601

COUNTS = {"ht": 500, "iid": 100, "merge": 100, "shrinkage": 100, "agreement": 60, "extend": 60}


def frt_entries(seed):
    rng = random.Random(f"frt:{seed}")
    return [{"seed": rng.randrange(2**31), "m": m, "k": k, "suite": "frt"}
            for m, k in ((4, 2), (5, 2), (4, 3)) for _ in range(50)]


def main():
    entries = []
    for suite, count in COUNTS.items():
        entries += make_manifest(suite, MASTER_SEED, count)
    entries += frt_entries(MASTER_SEED)
    path = Path(__file__).resolve().parent.parent / "tests" / "manifest.json"
    lines = ",\n".join("  " + json.dumps(e) for e in entries)
    path.write_text(f'{{"master_seed": {MASTER_SEED}, "cases": [\n{lines}\n]}}\n')
    print(f"wrote {len(entries)} cases to {path}")


if __name__ == "__main__":
    main()
