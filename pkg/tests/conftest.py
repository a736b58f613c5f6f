import os

import pytest

# keep sweeps serial inside the test process
os.environ.setdefault("EVMCHECK_WORKERS", "1")


def pytest_collection_modifyitems(config, items):
    for item in items:
        if "test_acceptance" in item.nodeid:
            item.add_marker(pytest.mark.slow)


def pytest_terminal_summary(terminalreporter):
    try:
        import test_acceptance
    except ImportError:
        return
    if not test_acceptance.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(test_acceptance.RESULTS):
        terminalreporter.write_line(test_acceptance.format_line(n))
