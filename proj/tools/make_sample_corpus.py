#!/usr/bin/env python3
"""Builds data/moby_dick_sample.txt from the chapter files of the
@stdlib/datasets-moby-dick npm package (Project Gutenberg text, public domain).

usage: make_sample_corpus.py PACKAGE_DATA_DIR OUT [--lines N] [--width W]
"""
import argparse
import pathlib
import re
import textwrap


def chapters(data_dir):
    files = sorted(data_dir.glob("chapter_*.txt"),
                   key=lambda p: int(re.search(r"(\d+)", p.name).group(1)))
    for f in files:
        yield f.read_text(encoding="utf-8")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("data_dir", type=pathlib.Path)
    ap.add_argument("out", type=pathlib.Path)
    ap.add_argument("--lines", type=int, default=6000)
    ap.add_argument("--width", type=int, default=64)
    args = ap.parse_args()

    out = []
    for text in chapters(args.data_dir):
        text = text.replace("—", "--")
        for para in re.split(r"\n\s*\n", text):
            para = " ".join(para.split())
            if not para:
                continue
            out.extend(textwrap.wrap(para, width=args.width))
            if len(out) >= args.lines:
                break
        if len(out) >= args.lines:
            break
    out = out[: args.lines]
    args.out.write_text("\n".join(out) + "\n", encoding="utf-8")


if __name__ == "__main__":
    main()
