#!/usr/bin/env python3
"""Segment the two bundled worked-example transcripts and print the results.

Runs the full pipeline (fragmentize, classify, replay) over the fixtures in
tests/fixtures/ and shows the chosen operation, runner-up scores and the
recovered segment tree for each passage.
"""

from pathlib import Path

from pausecue import classifier, fragments

FIXTURES = Path(__file__).resolve().parent.parent / "tests" / "fixtures"


def run(name: str) -> None:
    tokens = fragments.read_transcript(FIXTURES / f"{name}.jsonl")
    frags = fragments.fragmentize(tokens)
    result = classifier.segment_discourse(frags)
    print(f"== {name} ==")
    for frag, cls in zip(frags, result.classifications):
        text = " ".join(frag.surfaces)
        op = cls.operation
        print(f"  {op.kind.value:8s} (pops {op.pop_count})  "
              f"[{frag.initial_token_class}]  {text}")
        runners = ", ".join(f"{o.kind.value}={s:g}" for o, s in cls.alternatives[1:])
        print(f"           score {cls.score:g}; runners-up: {runners}")
    print("  tree:")
    for line in result.tree.render().splitlines():
        print(f"    {line}")
    print()


def main() -> None:
    for name in ("directions_intro", "directions_resume"):
        run(name)


if __name__ == "__main__":
    main()
