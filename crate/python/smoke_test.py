"""Smoke test for the ramplab_py extension.

Build and install first:
    pip install --no-build-isolation -e crates/py
"""

import ramplab_py as rl


def main():
    maps, jsonl = rl.experts("sword", 6, 12, seed=0)
    assert len(maps) == 12 and jsonl.count("\n") > 0

    obs = rl.observation(maps[0])
    assert len(obs) == 4 * 6 * 6 + 7
    assert rl.action_count("sword", 6) == 6 * 6 + 4

    expert_plan = rl.plan(maps[0])
    assert expert_plan, "ground-truth model should solve an expert instance"

    domain = rl.learn("sword", jsonl)
    assert domain.startswith("(define (domain")
    learned = rl.plan(maps[0], domain_pddl=domain)
    if learned is not None:
        assert len(learned) >= len(expert_plan)

    csv = rl.offline("sword", 6, "nsam_p", count=10, folds=2, train=8)
    assert csv.splitlines()[0] == "task,size,algo,seed_or_fold,bucket,n,success_rate,cum_min_len,wall_ms"
    svg = rl.report(csv)
    assert svg.startswith("<svg")

    online = rl.online("sword", 6, 2, [0], ["ramp", "ppo"], budget_bi=100, budget_be=50)
    assert online == rl.online("sword", 6, 2, [0], ["ramp", "ppo"], budget_bi=100, budget_be=50)

    try:
        rl.generate("minecraft", 6, 0)
    except ValueError:
        pass
    else:
        raise AssertionError("unknown task must raise ValueError")

    print("ok: plan", " ".join(expert_plan))


if __name__ == "__main__":
    main()
