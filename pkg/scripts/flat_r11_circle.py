"""Unit circle in R^{1,1}: Monte Carlo epsilon sweep against the two-precision quadrature value.

Runs the sweep at increasing sample sizes to show how the error of the
extrapolated value shrinks.
"""

import argparse
import json
from pathlib import Path

from crofton import bodies as B
from crofton import engine as E
from crofton.intrinsic_volumes import mu1_curve_flat
from crofton.pseudo_linalg import standard_form


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--N", type=int, nargs="+", default=[2 * 10**6, 8 * 10**6])
    ap.add_argument("--eps", default="0.2,0.1,0.05,0.025")
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument("--out", type=Path, default=Path("runs/flat_r11_circle.json"))
    args = ap.parse_args()
    eps = [float(x) for x in args.eps.split(",")]
    circle = B.unit_circle()
    lo, hi = mu1_curve_flat(circle, "double"), mu1_curve_flat(circle, "mp")
    print(f"quadrature: double {lo:.15g}  mp {hi:.15g}  |diff| {abs(lo - hi):.2e}")
    records = []
    for n in args.N:
        sw = E.epsilon_sweep(circle, standard_form((1, 1)), 1, eps, n, args.seed)
        rel = abs(sw.extrapolated - hi) / abs(hi)
        gap = sw.extrapolated.real - sw.extrapolated.imag
        print(f"N={n:>10d}  {sw.extrapolated.real:.6f}{sw.extrapolated.imag:+.6f}i  rel {rel:.2%}  "
              f"re-im {gap:+.4f} (error {sw.error_re_minus_im:.4f})")
        records.append({"N": n, "eps": eps, "per_eps": [list(r) for r in sw.csv_rows()],
                        "extrapolated": [sw.extrapolated.real, sw.extrapolated.imag], "rel_err": rel,
                        "re_minus_im": gap, "error_re_minus_im": sw.error_re_minus_im})
    args.out.parent.mkdir(parents=True, exist_ok=True)
    args.out.write_text(json.dumps({"oracle": [hi.real, hi.imag], "oracle_double": [lo.real, lo.imag],
                                    "runs": records}, indent=2) + "\n")
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
