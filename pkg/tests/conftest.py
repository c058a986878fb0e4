import pytest

# Acceptance criteria record one line each here; printed at the end of the run.
ACCEPTANCE: dict[int, list[tuple[str, bool, str]]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        checks = ACCEPTANCE[n]
        ok = all(c[1] for c in checks)
        failed = [f"{name}: {detail}" for name, good, detail in checks if not good]
        tr.write_line(f"ACC {n:2d} {'PASS' if ok else 'FAIL'}" + ("" if ok else "  [" + "; ".join(failed) + "]"))


@pytest.fixture
def record():
    def _record(n: int, name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE.setdefault(n, []).append((name, bool(ok), detail))
        print(f"ACC {n} {name}: {'PASS' if ok else 'FAIL'} {detail}")
        return bool(ok)
    return _record
