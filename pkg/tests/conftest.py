from helpers import ACCEPTANCE_RESULTS

ACCEPTANCE_CRITERIA = range(1, 12)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in ACCEPTANCE_CRITERIA:
        passed, detail = ACCEPTANCE_RESULTS.get(n, (False, "not reached"))
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if passed else 'FAIL'}  {detail}")
