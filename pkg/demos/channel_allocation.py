"""Channel allocation: LLR against per-matching UCB1 on the two Bernoulli instances.

Prints the final regret table and the normalized regret (regret / ln t) curve,
which levels off when regret grows logarithmically.

    python3 demos/channel_allocation.py --horizon 200000 --runs 5
"""

import argparse
import math

from linbandits import ExperimentPlan, PolicyConfig, mean_trace, run_experiment, summarize


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=200_000)
    ap.add_argument("--runs", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    policies = (PolicyConfig("LLR"), PolicyConfig("NaiveUCB1"))
    for which in ("q7m4", "q9m5"):
        plan = ExperimentPlan.paper(which, policies, args.horizon, args.runs, args.seed)
        traces = run_experiment(plan)
        print(f"\n== {which}: {plan.action_set.users} users, {plan.action_set.channels} channels, "
              f"{args.runs} runs ==")
        print(summarize(traces, which).table())

        curves = {p.label: mean_trace([t for t in traces if t.policy_label == p.label])
                  for p in policies}
        cps = curves["LLR"][0]
        print(f"\n{'t':>10}" + "".join(f"{label + ' R/ln t':>20}" for label in curves))
        for k in range(0, len(cps), max(1, len(cps) // 12)):
            t = int(cps[k])
            if t < 2:
                continue
            row = "".join(f"{curves[label][1][k] / math.log(t):>20.1f}" for label in curves)
            print(f"{t:>10}{row}")


if __name__ == "__main__":
    main()
