"""Closed form against Monte Carlo on random problems, in both estimator modes.

The dual estimator should agree with the closed form; the primal ridge fit on
the training rows shows how far finite splits move the answer.
"""

import argparse

from gnn_risk.cli import oracle_battery


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--problems", type=int, default=20)
    ap.add_argument("--trials", type=int, default=100_000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    dual = oracle_battery(args.problems, args.trials, args.seed, "dual")
    primal = oracle_battery(args.problems, args.trials, args.seed, "primal")
    print("problem,n,d,n_train,c,closed_form,dual_mean,dual_z,primal_mean,primal_rel_gap")
    for r, p in zip(dual, primal):
        rel = (p["oracle_mean"] - r["closed_form"]) / r["closed_form"]
        print(
            f"{r['problem']},{r['n']},{r['d']},{r['n_train']},{r['c']:.4f},{r['closed_form']:.5f},"
            f"{r['oracle_mean']:.5f},{r['z_score']:+.2f},{p['oracle_mean']:.5f},{rel:+.3f}"
        )
    print(f"max |z| (dual): {max(abs(r['z_score']) for r in dual):.3f}")


if __name__ == "__main__":
    main()
