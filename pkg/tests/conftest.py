import pytest

from manetpki.curve import default_params
from manetpki.hashing import default_fixtures
from manetpki.resources import data_path
from manetpki.simnet import load_scenario, run_scenario


@pytest.fixture(scope="session")
def params():
    return default_params()


@pytest.fixture(scope="session")
def oracle(params):
    return default_fixtures(params)


@pytest.fixture(scope="session")
def example_run():
    return run_scenario(load_scenario(data_path("paper-example.scn")))


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed"):
        for rep in terminalreporter.stats.get(outcome, []):
            if rep.when != "call":
                continue
            props = dict(rep.user_properties)
            if "criterion" in props:
                lines.append((props["criterion"], outcome.upper()[:4], props.get("label", "")))
    if lines:
        terminalreporter.section("acceptance criteria")
        for num, verdict, label in sorted(lines):
            terminalreporter.write_line(f"criterion {num}: {verdict}  {label}")
