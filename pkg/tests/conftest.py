import os
import re
import sys

from hypothesis import HealthCheck, settings

sys.path.insert(0, os.path.dirname(__file__))

settings.register_profile(
    "default",
    max_examples=40,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.register_profile("thorough", parent=settings.get_profile("default"), max_examples=500)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter):
    results = {}
    for outcome in ("passed", "failed", "error", "skipped"):
        for rep in terminalreporter.stats.get(outcome, []):
            m = _CRITERION.search(getattr(rep, "nodeid", ""))
            if not m or getattr(rep, "when", "call") not in ("call", "setup"):
                continue
            key = int(m.group(1))
            status = "PASS" if outcome == "passed" else outcome.upper()
            if results.get(key, ("PASS",))[0] == "PASS" or status != "PASS":
                detail = "; ".join(str(v) for k, v in getattr(rep, "user_properties", []) if k == "detail")
                results[key] = (status, m.group(2), detail)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        status, name, detail = results[key]
        line = f"criterion {key:2d}: {status:7s} {name}"
        terminalreporter.write_line(line + (f"  [{detail}]" if detail else ""))
