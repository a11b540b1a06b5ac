import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import acceptance_log  # noqa: E402


def _key(k: str):
    num = "".join(ch for ch in k if ch.isdigit())
    return int(num), k


def pytest_terminal_summary(terminalreporter):
    if not acceptance_log.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_log.LINES, key=_key):
        terminalreporter.write_line(acceptance_log.LINES[k])
