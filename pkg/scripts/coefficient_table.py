"""Write the Crofton coefficient table for sigma in {-1, 0, 1} as CSV."""

import argparse
from pathlib import Path

from crofton.cli import emit_theorem_table


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--k-max", type=int, default=10)
    ap.add_argument("--n-max", type=int, default=10)
    ap.add_argument("--out", type=Path, default=Path("runs/coefficient_table.csv"))
    args = ap.parse_args()
    text = emit_theorem_table(args.k_max, args.n_max)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(text)
    print(f"{text.count(chr(10)) - 1} rows -> {args.out}")


if __name__ == "__main__":
    main()
