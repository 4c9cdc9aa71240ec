import os
import shutil
import sys
import textwrap
from pathlib import Path

import pytest

from vmtkit.model import load_vmt
from vmtkit.solver import SolverHandle, fallback_command

TESTS = Path(__file__).parent
DATA = TESTS / "data"
CORPUS = TESTS / "corpus"
GOLDEN = TESTS / "golden"

HAVE_Z3 = shutil.which("z3") is not None


def real_solver() -> SolverHandle:
    """z3 when installed, otherwise the bundled Boolean DPLL solver."""
    if HAVE_Z3:
        return SolverHandle(["z3", "-in"])
    return SolverHandle(fallback_command())


@pytest.fixture(scope="session")
def example_text() -> str:
    return (DATA / "worked_example.vmt").read_text()


@pytest.fixture
def example_doc(example_text):
    return load_vmt(example_text)


@pytest.fixture(scope="session")
def solver() -> SolverHandle:
    return real_solver()


@pytest.fixture(scope="session")
def smt_solver() -> SolverHandle:
    """A solver with arithmetic support; skips when none is installed."""
    if not HAVE_Z3:
        pytest.skip("no SMT solver with arithmetic installed")
    return SolverHandle(["z3", "-in"])


@pytest.fixture(scope="session")
def dpll_solver() -> SolverHandle:
    return SolverHandle(fallback_command())


# Replies are separated by ";; next" lines; the n-th call gets the n-th reply
# (the last one repeats). A reply "#exit N" exits with status N and no output.
STUB = textwrap.dedent("""\
    import sys
    log, replies = sys.argv[1], sys.argv[2]
    with open(log, "a") as f:
        f.write(sys.stdin.read() + "\\n;; ----\\n")
    calls = open(log).read().count(";; ----")
    answers = open(replies).read().split("\\n;; next\\n")
    reply = answers[min(calls, len(answers)) - 1]
    if reply.startswith("#exit "):
        sys.exit(int(reply.split()[1]))
    sys.stdout.write(reply)
""")


class StubSolver:
    """Scripted solver: answers queries in order and records every script it receives."""

    def __init__(self, tmp: Path, answers: list[str]):
        self.dir = tmp
        self.script = tmp / "stub_solver.py"
        self.script.write_text(STUB)
        self.log = tmp / "stub.log"
        self.log.write_text("")
        (tmp / "answers.txt").write_text("\n;; next\n".join(answers))
        self.handle = SolverHandle([sys.executable, str(self.script), str(self.log), str(tmp / "answers.txt")])

    @property
    def scripts(self) -> list[str]:
        parts = self.log.read_text().split("\n;; ----\n")
        return [p for p in parts if p.strip()]


@pytest.fixture
def stub_solver(tmp_path):
    def make(*answers: str) -> StubSolver:
        return StubSolver(tmp_path, list(answers))
    return make


# ---------------------------------------------------------------------------
# acceptance summary: one PASS/FAIL line per criterion

_ACCEPTANCE: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    if report.when == "call" or report.outcome != "passed":
        prev = _ACCEPTANCE.get(name)
        outcome = "PASS" if report.outcome == "passed" else ("SKIP" if report.outcome == "skipped" else "FAIL")
        if prev in (None, "PASS"):
            _ACCEPTANCE[name] = outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]} {name}")


def pytest_configure(config):
    os.environ.pop("VMTKIT_SOLVER", None)
