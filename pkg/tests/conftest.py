import numpy as np
import pytest

from hipt.env import bundled_layouts, load_layout, reset, step
from hipt.env.features import observation_dim
from hipt.nets import NetworkSpec, init_params


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion at the end of the run."""
    results = {}
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "") in ("setup", "call"):
                name = nodeid.split("::")[-1]
                ok = results.get(name, True) and rep.passed
                results[name] = ok and outcome == "passed"
    if results:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in sorted(results.items()):
            terminalreporter.write_line(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'}")


@pytest.fixture(scope="session")
def layouts():
    return bundled_layouts()


@pytest.fixture(scope="session")
def cramped():
    return load_layout("cramped_room")


@pytest.fixture(scope="session")
def cramped_dim(cramped):
    return observation_dim(cramped)


def random_walk_states(layout, n_states, seed=0, horizon=400):
    """Reachable states sampled along random-action trajectories."""
    rng = np.random.default_rng(seed)
    states = []
    state = reset(layout)
    while len(states) < n_states:
        if state.tick >= horizon:
            state = reset(layout)
        joint = (int(rng.integers(0, 6)), int(rng.integers(0, 6)))
        state = step(state, joint, layout).next_state
        states.append(state)
    return states


@pytest.fixture(scope="session")
def tiny_flat_spec(cramped_dim):
    return NetworkSpec(cramped_dim, (16, 16), "tanh", None, num_priors=1, num_actions=6)


@pytest.fixture(scope="session")
def tiny_hier_spec(cramped_dim):
    return NetworkSpec(cramped_dim, (16, 16), "tanh", None, num_priors=3, num_actions=6)


@pytest.fixture()
def tiny_flat_params(tiny_flat_spec):
    return init_params(tiny_flat_spec, 0)
