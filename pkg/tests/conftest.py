import json
from pathlib import Path

import pytest

from seirq_control.cli import main


@pytest.fixture(scope="session")
def batch_dir(tmp_path_factory):
    """The full horizon x delay batch written once through the CLI."""
    out = tmp_path_factory.mktemp("batch")
    assert main(["run", "--batch", "--jobs", "4", "--output", str(out)]) == 0
    return out


def load_summary(run_dir: Path) -> dict:
    return json.loads((Path(run_dir) / "summary.json").read_text())


# one line per acceptance criterion, echoed in the terminal summary
ACCEPTANCE_LINES: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
