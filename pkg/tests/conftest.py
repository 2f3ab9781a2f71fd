import pytest

# Acceptance results recorded by tests/test_acceptance.py; printed as a
# one-line-per-criterion table at the end of the run.
_ACCEPTANCE: dict[int, dict] = {}


@pytest.fixture
def criterion():
    """Recorder: criterion(num, name, ok, detail='', sub='')."""

    def record(num: int, name: str, ok: bool, detail: str = "", sub: str = "") -> None:
        entry = _ACCEPTANCE.setdefault(int(num), {"name": name, "subs": {}})
        entry["subs"][sub or "-"] = (bool(ok), detail)

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_ACCEPTANCE):
        entry = _ACCEPTANCE[num]
        ok = all(flag for flag, _ in entry["subs"].values())
        terminalreporter.write_line(
            f"criterion {num:2d} [{'PASS' if ok else 'FAIL'}] {entry['name']}"
        )
        for sub, (sub_ok, detail) in sorted(entry["subs"].items()):
            if detail and (not sub_ok or len(entry["subs"]) > 1):
                mark = " ok " if sub_ok else "FAIL"
                terminalreporter.write_line(f"    [{mark}] {sub}: {detail}")
