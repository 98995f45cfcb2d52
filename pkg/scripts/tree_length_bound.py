"""Tree length of slope codes against intersection with the base triangulation.

Prints one row per slope and the fitted affine bound for two families:
Fibonacci slopes and slopes (1, n).
"""
import argparse
from dataclasses import dataclass

from mcshane.flips import LabelTree, Slope, torus, tree_vs_intersection_bound


@dataclass
class Config:
    fib_terms: int = 12
    ones: int = 30


def fibonacci_slopes(n):
    a, b, out = 1, 1, []
    for _ in range(n):
        a, b = b, a + b
        out.append(Slope(b, a))
    return out


def report(name, rep):
    print(f"## {name}")
    print("slope,tree_length,intersection")
    for s, lam, i in rep.rows:
        print(f"{s},{lam},{i}")
    print(f"# fitted: length <= {rep.slope_coef:.4f} * intersection + {rep.offset:.4f}; holds={rep.holds}; max ratio {rep.max_ratio:.4f}")


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--fib-terms", type=int, default=Config.fib_terms)
    p.add_argument("--ones", type=int, default=Config.ones)
    args = p.parse_args()
    cfg = Config(args.fib_terms, args.ones)
    tree = LabelTree(torus())
    report("fibonacci", tree_vs_intersection_bound(tree, fibonacci_slopes(cfg.fib_terms)))
    report("(1, n)", tree_vs_intersection_bound(tree, [Slope(1, n) for n in range(1, cfg.ones + 1)]))


if __name__ == "__main__":
    main()
