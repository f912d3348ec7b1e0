import pytest

ACCEPTANCE = "test_acceptance.py"
UNIT_OUTCOMES: dict[str, str] = {}


def pytest_collection_modifyitems(session, config, items):
    # criterion 12 aggregates the unit examples, so acceptance runs last
    items.sort(key=lambda item: item.fspath.basename == ACCEPTANCE)


@pytest.hookimpl(tryfirst=True)
def pytest_runtest_logreport(report):
    if ACCEPTANCE in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        prev = UNIT_OUTCOMES.get(report.nodeid)
        if prev != "failed":
            UNIT_OUTCOMES[report.nodeid] = report.outcome
