#!/usr/bin/env python3
# Copyright 2026 The tokenlens Authors
# SPDX-License-Identifier: Apache-2.0
"""Packs a directory tree of repos into corpus JSON Lines.

SRC/<repo>/<path...> becomes {"repo_name": repo, "path": path, "content": ...,
"license": LICENSE}. Records are sorted by (repo, path).

usage: build_fixture_corpus.py SRC OUT [--license TAG]
"""
import argparse
import json
import os


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("src")
    ap.add_argument("out")
    ap.add_argument("--license", default="mit")
    args = ap.parse_args()
    records = []
    for repo in sorted(os.listdir(args.src)):
        root = os.path.join(args.src, repo)
        if not os.path.isdir(root):
            continue
        for dirpath, _, files in os.walk(root):
            for name in files:
                full = os.path.join(dirpath, name)
                rel = os.path.relpath(full, root).replace(os.sep, "/")
                with open(full, encoding="utf-8") as fh:
                    content = fh.read()
                records.append({"repo_name": repo, "path": rel, "content": content, "license": args.license})
    records.sort(key=lambda r: (r["repo_name"], r["path"]))
    with open(args.out, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps(r, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
