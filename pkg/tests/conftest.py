def pytest_terminal_summary(terminalreporter):
    mod = __import__("sys").modules.get("test_acceptance") or __import__("sys").modules.get("tests.test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    order = ["C1", "C2", "C3", "C4", "C5", "C6", "C6+", "C7", "C7+", "C8", "C9", "C10", "C11", "C12"]
    for cid in order:
        if cid in results:
            terminalreporter.write_line(results[cid])
