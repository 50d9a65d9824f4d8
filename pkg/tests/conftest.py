import sys
from pathlib import Path

# make the shared oracle helpers importable as a plain module
sys.path.insert(0, str(Path(__file__).parent))


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    if module is None or not module.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(module.TITLES):
        verdict = module.RESULTS.get(number)
        if verdict is None:
            terminalreporter.write_line(f"criterion {number} [{module.TITLES[number]}]: NOT RUN")
        else:
            terminalreporter.write_line(verdict.line(number))
