import pytest

_KEY = pytest.StashKey[dict]()


def pytest_configure(config):
    config.stash[_KEY] = {}


@pytest.fixture
def criterion(request):
    """record(number, title, passed, detail) for the acceptance summary."""
    log = request.config.stash[_KEY]

    def record(number, title, passed, detail=""):
        log[number] = (title, bool(passed), detail)
        return passed

    return record


def pytest_terminal_summary(terminalreporter, config):
    log = config.stash.get(_KEY, {})
    if not log:
        return
    terminalreporter.write_sep("=", "acceptance criteria")
    for number in sorted(log):
        title, passed, detail = log[number]
        tag = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"[{tag}] criterion {number:2d}: {title}  {detail}")
