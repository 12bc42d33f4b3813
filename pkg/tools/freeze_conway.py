"""Regenerate src/dieudonne/_conway_table.py from the checkpoint JSON."""

import json
import sys

HEADER = '''"""Conway polynomial table for p <= 13, m <= 12 (generated file).

Keys are (p, m); values are little-endian coefficient tuples over {0..p-1}
of the monic Conway polynomial of F_{p^m}.  Regenerate with
tools/gen_conway.py + tools/freeze_conway.py.
"""

CONWAY_TABLE = {
'''


def main(src, dst):
    with open(src) as fh:
        stored = json.load(fh)
    table = {tuple(map(int, k.split(","))): tuple(v) for k, v in stored.items()}
    with open(dst, "w") as fh:
        fh.write(HEADER)
        for key in sorted(table):
            fh.write(f"    {key}: {table[key]},\n")
        fh.write("}\n")
    print(f"wrote {len(table)} entries to {dst}")


if __name__ == "__main__":
    main(sys.argv[1], sys.argv[2])
