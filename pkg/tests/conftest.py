import re


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if report.when != "call" or "test_acceptance" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    match = re.match(r"test_criterion_(\d+)_(.*)", name)
    if not match:
        return
    number, slug = match.groups()
    verdict = "PASS" if report.passed else "FAIL"
    print(f"\n[acceptance criterion {number}] {verdict}: {slug.replace('_', ' ')}",
          flush=True)
