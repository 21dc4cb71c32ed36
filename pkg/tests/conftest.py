import re
from collections import defaultdict

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results = defaultdict(list)
_details = defaultdict(list)


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        k = int(m.group(1))
        _results[k].append(report.outcome)
        _details[k] += [v for name, v in report.user_properties if name == "detail"]


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_results):
        ok = all(o == "passed" for o in _results[k])
        line = f"ACCEPTANCE criterion {k}: {'PASS' if ok else 'FAIL'}"
        if _details[k]:
            line += "  (" + "; ".join(_details[k]) + ")"
        terminalreporter.write_line(line)
