import os

from hypothesis import HealthCheck, settings

os.environ.setdefault("BDS_JOBS", "1")

settings.register_profile(
    "default", deadline=None, max_examples=40, suppress_health_check=[HealthCheck.too_slow]
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE = {}


def record(criterion: int, passed: bool, detail: str):
    """Store one acceptance sub-check; criteria pass only if every sub-check does."""
    ok, details = ACCEPTANCE.get(criterion, (True, []))
    ACCEPTANCE[criterion] = (ok and passed, details + [detail])


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(ACCEPTANCE):
        ok, details = ACCEPTANCE[crit]
        terminalreporter.write_line(f"criterion {crit:2d}: {'PASS' if ok else 'FAIL'}  " + "; ".join(details))
