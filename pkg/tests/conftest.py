import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

from hypothesis import HealthCheck, settings  # noqa: E402

settings.register_profile(
    "repo", max_examples=40, deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile("repo")


def pytest_terminal_summary(terminalreporter):
    import _support

    if not _support.ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_support.ACCEPTANCE):
        terminalreporter.write_line(_support.ACCEPTANCE[k])
