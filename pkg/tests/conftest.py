def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for res in sorted(test_acceptance.RESULTS, key=lambda r: r.cid):
            terminalreporter.write_line(res.line())
