import json
from pathlib import Path

import pytest

from splax.data import parse_squad
from splax.tokenizer import Vocab

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def mini_v11_path() -> Path:
    return DATA_DIR / "squad_mini_v11.json"


@pytest.fixture(scope="session")
def mini_v20_path() -> Path:
    return DATA_DIR / "squad_mini_v20.json"


@pytest.fixture(scope="session")
def mini_examples(mini_v11_path):
    return parse_squad(mini_v11_path)


@pytest.fixture(scope="session")
def mini_vocab(mini_examples) -> Vocab:
    from splax.pipeline import derive_vocab

    return derive_vocab(mini_examples)


@pytest.fixture(scope="session")
def differential_fixture():
    return json.loads((DATA_DIR / "metrics_differential.json").read_text())


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    """One pass/fail line per acceptance criterion."""
    lines = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" in nodeid and getattr(rep, "when", "call") == "call":
                lines.append((nodeid.split("::", 1)[1], outcome == "passed"))
    if lines:
        terminalreporter.write_sep("-", "acceptance criteria")
        for name, ok in sorted(lines):
            terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}: {name}")
