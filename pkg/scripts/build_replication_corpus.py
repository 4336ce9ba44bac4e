#!/usr/bin/env python3
"""Regenerate the bundled replication corpus files.

The corpus is fully determined by the published table cells held in
pausecue.replication; this script just rewrites the JSONL files under
src/pausecue/data/ (or a directory of your choice) so they never drift from
the cell definitions.
"""

import argparse
from pathlib import Path

from pausecue import replication


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    default = Path(__file__).resolve().parent.parent / "src" / "pausecue" / "data"
    parser.add_argument("--out", type=Path, default=default)
    args = parser.parse_args()
    records_path, pauses_path = replication.write_corpus(args.out)
    print(f"wrote {records_path} ({len(replication.build_records())} records)")
    print(f"wrote {pauses_path} ({len(replication.build_pauses())} pauses)")


if __name__ == "__main__":
    main()
