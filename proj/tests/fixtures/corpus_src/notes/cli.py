import sys

from notes import add_note
from search import search, tag_counts

USAGE = """usage:
  cli.py add TEXT [#tag ...]
  cli.py find TERM
  cli.py tags
"""


def main(args):
    if not args:
        print(USAGE)
        return 2
    cmd, rest = args[0], args[1:]
    if cmd == "add":
        tags = [a[1:] for a in rest if a.startswith("#")]
        words = [a for a in rest if not a.startswith("#")]
        n = add_note(" ".join(words), tags)
        print(f"saved note #{n}")
    elif cmd == "find":
        for i, note in search(" ".join(rest)):
            print(f"{i:>3}  {note['text']}")
    elif cmd == "tags":
        for tag, count in tag_counts().items():
            print(tag, count)
    else:
        print(USAGE)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
