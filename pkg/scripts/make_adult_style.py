"""Write an Adult-style CSV usable with ``fcbc --dataset``."""
import argparse

from fcbc.synthetic import adult_style_frame

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=1000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", default="adult_style.csv")
    args = ap.parse_args()
    adult_style_frame(args.n, args.seed).to_csv(args.out, index=False)
    print(args.out)
