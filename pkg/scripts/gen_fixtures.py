#!/usr/bin/env python3
"""Regenerate the committed toy fixtures and an optional demo corpus.

The weights/vocab under tests/fixtures/ are deterministic (seeded), so
rerunning this script reproduces them byte-identically.  With --demo-dir,
also synthesizes a small WAV corpus for exercising the CLI end to end.
"""

import argparse
import sys
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(REPO / "tests"))

from helpers import synth_clip

from rnnfuzz.audio import save_wav
from rnnfuzz.sut import make_random_weights, save_vocab, save_weights

VOCAB = ["-", "a", "e", "i", "o", "n", "s", "t", "r", " "]
WEIGHTS_SEED = 3
INPUT_DIM = 20
HIDDEN_DIM = 16


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--fixtures-dir", default=str(REPO / "tests" / "fixtures"))
    ap.add_argument("--demo-dir", default=None, help="Also write train/ and seeds/ WAV corpora here.")
    args = ap.parse_args()

    fixtures = Path(args.fixtures_dir)
    fixtures.mkdir(parents=True, exist_ok=True)
    weights = make_random_weights(INPUT_DIM, HIDDEN_DIM, len(VOCAB), WEIGHTS_SEED)
    save_weights(weights, fixtures / "toy_weights.txt")
    save_vocab(VOCAB, fixtures / "toy_vocab.txt")
    print(f"fixtures -> {fixtures}")

    if args.demo_dir:
        demo = Path(args.demo_dir)
        (demo / "train").mkdir(parents=True, exist_ok=True)
        (demo / "seeds").mkdir(parents=True, exist_ok=True)
        for i in range(40):
            save_wav(synth_clip(100 + i, 0.5), demo / "train" / f"train{i:03d}.wav")
        for i in range(20):
            save_wav(synth_clip(160 + i, 0.5), demo / "seeds" / f"seed{i:03d}.wav")
        print(f"demo corpus -> {demo}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
