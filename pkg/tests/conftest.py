import pytest

from gridbalance.agent import AgentParams
from gridbalance.pricing import PricingParams
from gridbalance.protocol import ProtocolConfig
from gridbalance.scenario import GraphSpec, Scenario, paper_preset

PRESET_X1 = (57.3, 98.1, 75.2, 85.7, 90.9, 93.4, 52.2, 69.9, 62.9, 80.0)
PRESET_W = (45.0, 98.0, 67.0, 80.0, 90.0, 93.0, 50.0, 50.0, 57.0, 72.0)


def make_scenario(wtp, demands, capacity, kind="complete", edges=(), mode="static",
                  tau=10.0, sigmoid="zero_centered", a=1.0, k=4.0, alpha=0.05, **proto):
    n = len(wtp)
    graph = GraphSpec("edges", n, edges=tuple(edges)) if kind == "edges" else GraphSpec(kind, n)
    return Scenario(
        graph=graph,
        wtp=tuple(wtp),
        initial_demand=tuple(demands),
        pricing=PricingParams(capacity=capacity, a=a, k=k, sigmoid_kind=sigmoid, tau=tau),
        agent=AgentParams(alpha=alpha),
        protocol=ProtocolConfig(mode=mode, **proto),
    )


@pytest.fixture
def preset():
    return paper_preset()


_criteria: dict[str, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(id, text): acceptance criterion")


def pytest_runtest_makereport(item, call):
    marker = item.get_closest_marker("criterion")
    if marker is None or call.when != "call":
        return
    cid, text = marker.args
    _criteria[cid] = (text, "PASS" if call.excinfo is None else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for cid in sorted(_criteria, key=lambda c: (int("".join(ch for ch in c if ch.isdigit())), c)):
        text, status = _criteria[cid]
        terminalreporter.write_line(f"{status} criterion {cid}: {text}")
