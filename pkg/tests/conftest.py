from hypothesis import settings

settings.register_profile("repro", derandomize=True, deadline=None, print_blob=True)
settings.load_profile("repro")

_criteria = {}
_outcomes = {}


def pytest_collection_modifyitems(items):
    for item in items:
        if item.module.__name__.endswith("test_acceptance") and item.function.__doc__:
            _criteria[item.nodeid] = item.function.__doc__.strip().splitlines()[0]


def pytest_runtest_logreport(report):
    if report.nodeid in _criteria and (report.when == "call" or report.failed):
        _outcomes.setdefault(report.nodeid, "PASS" if report.passed else "FAIL")
        if report.failed:
            _outcomes[report.nodeid] = "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, text in _criteria.items():
        terminalreporter.write_line(f"{_outcomes.get(nodeid, 'SKIP'):4}  {text}")
