def pytest_terminal_summary(terminalreporter):
    """One PASS/FAIL line per acceptance criterion."""
    results: dict[str, bool] = {}
    for key in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) != "call":
                continue
            props = dict(getattr(rep, "user_properties", []))
            name = props.get("criterion")
            if name is None:
                continue
            results[name] = results.get(name, True) and key == "passed"
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results):
        terminalreporter.write_line(f"{'PASS' if results[name] else 'FAIL'}  {name}")
