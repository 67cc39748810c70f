import contextlib

ACCEPTANCE = []


@contextlib.contextmanager
def criterion(number: int, title: str):
    """Record one PASS/FAIL line; the body fills ``info`` with a short summary."""
    info = {}
    try:
        yield info
    except BaseException as exc:
        ACCEPTANCE.append((number, "FAIL", title, info.get("detail") or repr(exc)[:200]))
        raise
    ACCEPTANCE.append((number, "PASS", title, info.get("detail", "")))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number, verdict, title, detail in sorted(ACCEPTANCE):
        terminalreporter.write_line(f"[{verdict}] criterion {number}: {title} :: {detail}")
