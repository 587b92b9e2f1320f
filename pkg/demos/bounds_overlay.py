"""Simulated mean regret next to the closed-form upper bounds.

Three variables, three arms with known gaps; LLR and per-arm UCB1 share every
environment draw. Prints both curves with their bounds at each checkpoint.

    python3 demos/bounds_overlay.py --horizon 100000 --runs 20
"""

import argparse

import numpy as np

from linbandits import (ActionVector, EnvironmentSpec, ExperimentPlan, ExplicitArms, PolicyConfig,
                        bound_params, certify_ground_truth, mean_trace, run_experiment,
                        theorem1_bound, theorem2_bound)
from linbandits.oracles import arm_gaps


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=100_000)
    ap.add_argument("--runs", type=int, default=20)
    args = ap.parse_args()

    arms = ExplicitArms((ActionVector(3, (0, 1), (0.5, 0.5)), ActionVector(3, (1, 2), (0.5, 0.5)),
                         ActionVector(3, (2,), (1.0,))), 3)
    means = [0.9, 0.5, 0.1]
    truth = certify_ground_truth(arms, means)
    gaps = arm_gaps(arms, truth)
    print(f"arm values {[round(a.value(means), 3) for a in arms.arms]}, "
          f"gaps {np.round(gaps, 3).tolist()}")

    plan = ExperimentPlan(EnvironmentSpec.bernoulli(means), arms,
                          (PolicyConfig("LLR"), PolicyConfig("NaiveUCB1")), args.horizon, args.runs)
    traces = run_experiment(plan)
    cps, llr = mean_trace([t for t in traces if t.policy_label == "LLR"])
    _, naive = mean_trace([t for t in traces if t.policy_label == "NaiveUCB1"])
    b2 = theorem2_bound(bound_params(arms, truth), cps)
    b1 = theorem1_bound(gaps[gaps > 0], cps)
    print(f"\n{'t':>8}{'LLR':>10}{'LLR bound':>14}{'UCB1':>10}{'UCB1 bound':>14}")
    for k in range(0, len(cps), max(1, len(cps) // 15)):
        print(f"{int(cps[k]):>8}{llr[k]:>10.2f}{b2[k]:>14.1f}{naive[k]:>10.2f}{b1[k]:>14.1f}")


if __name__ == "__main__":
    main()
