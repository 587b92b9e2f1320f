"""Cost-minimizing index policy (LLC) on a random shortest-path instance.

Edges carry Bernoulli delays; only the edges of the chosen path are observed.
Prints the instance, then mean regret, regret / ln t and the LLC bound over time.

    python3 demos/shortest_path_llc.py --horizon 20000 --runs 4
"""

import argparse
import math

from linbandits import (ExperimentPlan, PolicyConfig, bound_params, mean_trace,
                        random_path_instance, run_experiment, theorem2_bound)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--horizon", type=int, default=20_000)
    ap.add_argument("--runs", type=int, default=4)
    ap.add_argument("--instance-seed", type=int, default=0)
    args = ap.parse_args()

    env, problem, truth = random_path_instance(seed=args.instance_seed)
    print(f"{problem.n_nodes} nodes, {problem.n_vars} edges, source {problem.source}, "
          f"destination {problem.dest}")
    for k, (u, v) in enumerate(problem.edges):
        print(f"  edge {k:>2}: {u} -> {v}  mean delay {env.means[k]:.1f}")
    print(f"cheapest path uses edges {truth.optimal_arm.indices}, expected delay "
          f"{truth.optimal_value:.1f}, gap to the next path {truth.delta_min:.1f}")

    plan = ExperimentPlan(env, problem, (PolicyConfig("LLC"),), args.horizon, args.runs)
    cps, mean = mean_trace(run_experiment(plan))
    params = bound_params(problem, truth, L=problem.n_vars)
    print(f"\n{'t':>8}{'regret':>12}{'regret/ln t':>14}{'bound':>14}")
    for k in range(0, len(cps), max(1, len(cps) // 15)):
        t = int(cps[k])
        if t >= 2:
            print(f"{t:>8}{mean[k]:>12.1f}{mean[k] / math.log(t):>14.2f}"
                  f"{float(theorem2_bound(params, t)):>14.3g}")


if __name__ == "__main__":
    main()
