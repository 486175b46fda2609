import os
import sys
import tempfile
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

# keep the stratum cache out of the working tree unless the caller chose one
os.environ.setdefault("TROPICAL_CACHE_DIR", tempfile.mkdtemp(prefix="tropical-cache-"))

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
