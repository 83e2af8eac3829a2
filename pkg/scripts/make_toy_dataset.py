#!/usr/bin/env python3
"""Generate a small synthetic Nepali FAQ dataset for smoke runs.

Questions are template + filler-word combinations over a handful of
maternal-health categories, one canonical answer per category, so the
retrieval backend can be overfit quickly and the splits are non-trivial.
"""

import argparse
import json

import numpy as np

CATEGORIES = {
    "समय": (
        ["गर्भावस्था कति समय हुन्छ", "गर्भ कति हप्ता रहन्छ", "बच्चा कहिले जन्मिन्छ"],
        "गर्भावस्था करिब चालीस हप्ता हुन्छ",
    ),
    "खाना": (
        ["गर्भमा के खाने", "कस्तो खाना राम्रो हुन्छ", "पोषण कस्तो चाहिन्छ"],
        "हरियो सागसब्जी र फलफूल राम्रो हुन्छ",
    ),
    "व्यायाम": (
        ["व्यायाम गर्न हुन्छ", "कस्तो व्यायाम राम्रो", "योग गर्न मिल्छ"],
        "हल्का व्यायाम गर्न मिल्छ",
    ),
    "जाँच": (
        ["जाँच कहिले गराउने", "कति पटक जाँच गर्ने", "चिकित्सक कहिले भेट्ने"],
        "हरेक महिना जाँच गराउनुहोस्",
    ),
}

FILLERS = ["कृपया", "अलि", "राम्ररी", "छिटै", "सधैं", "अहिले"]


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--out", default="toy_dataset.jsonl")
    parser.add_argument("--per-category", type=int, default=25)
    parser.add_argument("--seed", type=int, default=7)
    args = parser.parse_args()

    rng = np.random.default_rng(args.seed)
    n = 0
    with open(args.out, "w", encoding="utf-8") as fh:
        for name, (questions, answer) in CATEGORIES.items():
            for k in range(args.per_category):
                base = questions[k % len(questions)]
                filler = FILLERS[int(rng.integers(len(FILLERS)))]
                rec = {
                    "question": f"{base} {filler} {k}",
                    "answer": answer,
                    "category": name,
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")
                n += 1
    print(f"wrote {n} pairs to {args.out}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
