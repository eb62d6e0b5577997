"""Exhaustive counting scan: maximal weighted-sum to bound ratios per (N, T, set)."""

import argparse

from fputkin.counting import bound_ratio_scan, write_report_csv


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    parser.add_argument("--exponents", type=float, nargs="+", default=[0.5, 0.8])
    parser.add_argument("--k-cells", type=int, default=32)
    parser.add_argument("--csv", help="write every cell to this CSV file")
    args = parser.parse_args()

    rows = bound_ratio_scan(args.sizes, args.exponents, k_cells=args.k_cells)
    print("N,T,set,max_ratio,argmax_k,argmax_m")
    for r in rows:
        print(f"{r.N},{r.T:.4g},{r.set_name},{r.max_ratio:.4f},{r.argmax_k:.5f},{r.argmax_m:.2f}")
    if args.csv:
        write_report_csv([rep for r in rows for rep in r.reports], args.csv)


if __name__ == "__main__":
    main()
