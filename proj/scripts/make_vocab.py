#!/usr/bin/env python3
# Copyright 2026 The tokenlens Authors
# SPDX-License-Identifier: Apache-2.0
"""Writes a byte-level vocab.json/merges.txt pair from a list of merges.

Ids 0..255 are the single bytes, then one id per merge in order.

usage: make_vocab.py OUT_DIR "l r" ["l r" ...]
"""
import json
import os
import sys


def byte_to_unicode():
    bs = list(range(ord("!"), ord("~") + 1)) + list(range(0xA1, 0xAC + 1)) + list(range(0xAE, 0xFF + 1))
    cs = bs[:]
    n = 0
    for b in range(256):
        if b not in bs:
            bs.append(b)
            cs.append(256 + n)
            n += 1
    return dict(zip(bs, map(chr, cs)))


def main():
    out_dir, merges = sys.argv[1], sys.argv[2:]
    table = byte_to_unicode()
    vocab = {table[b]: b for b in range(256)}
    for m in merges:
        left, right = m.split(" ")
        vocab[left + right] = len(vocab)
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "vocab.json"), "w", encoding="utf-8") as f:
        json.dump(vocab, f, ensure_ascii=False, indent=0)
        f.write("\n")
    with open(os.path.join(out_dir, "merges.txt"), "w", encoding="utf-8") as f:
        f.write("#version: 0.2\n")
        for m in merges:
            f.write(m + "\n")


if __name__ == "__main__":
    main()
