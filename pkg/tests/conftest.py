from hypothesis import settings

settings.register_profile("wwb", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("wwb")


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import LINES
    except ImportError:
        return
    if LINES:
        terminalreporter.section("acceptance criteria")
        for num in sorted(LINES):
            terminalreporter.write_line(LINES[num])
