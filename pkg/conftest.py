import re

collect_ignore = ["examples"]

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One PASS/FAIL line per acceptance criterion, outside capture."""
    verdicts = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m:
                continue
            number, name = int(m.group(1)), m.group(2)
            if key == "passed" and getattr(rep, "when", "call") != "call":
                continue
            status = "PASS" if key == "passed" else "FAIL"
            if verdicts.get(number, (None, "PASS"))[1] != "FAIL":
                verdicts[number] = (name, status)
    if verdicts:
        terminalreporter.write_line("")
        for number in sorted(verdicts):
            name, status = verdicts[number]
            terminalreporter.write_line(
                f"[acceptance] criterion {number:>2}: {status}  {name.replace('_', ' ')}"
            )
