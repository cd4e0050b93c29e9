import json
import pathlib

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

ORACLES = json.loads((pathlib.Path(__file__).parent / "data" / "oracles.json").read_text())


def oracle(key):
    """Frozen brute-force value (see tools/gen_oracles.py) as a complex number or list of them."""
    v = ORACLES[key]
    if isinstance(v, list) and v and isinstance(v[0], list):
        return [complex(*x) for x in v]
    if isinstance(v, list):
        return complex(*v)
    return v


def rel(a, b):
    a, b = complex(a), complex(b)
    s = max(abs(a), abs(b))
    return abs(a - b) / s if s else 0.0


@pytest.fixture
def canonical_bases():
    from ellhyp.gamma import BasePair
    return BasePair(0.11, 0.23)


ACCEPTANCE_KEY = pytest.StashKey[list]()


@pytest.fixture
def acceptance_log(request):
    """Collects one summary line per acceptance criterion; printed at the end of the run."""
    lines = request.config.stash.setdefault(ACCEPTANCE_KEY, [])

    def log(line):
        lines.append(line)
        print(line)
    return log


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines, key=lambda s: int(s.split("criterion ")[1].split(":")[0])):
            terminalreporter.write_line(line)
