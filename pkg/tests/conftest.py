import numpy as np
import pytest
from hypothesis import settings

from varlab.corpus import builtin_corpus_path, load_corpus

settings.register_profile("varlab", deadline=None, max_examples=60, derandomize=True)
settings.load_profile("varlab")

_ACCEPTANCE: dict = {}


@pytest.fixture(scope="session")
def corpus():
    return load_corpus(builtin_corpus_path())


@pytest.fixture(scope="session")
def corpus_by_id(corpus):
    return {inst.id: inst for inst in corpus}


@pytest.fixture
def acceptance():
    """Record one line per acceptance criterion; printed in the terminal summary."""

    def record(number: int, title: str, passed: bool, detail: str = ""):
        line = f"criterion {number:>2} {'PASS' if passed else 'FAIL'}  {title}"
        if detail:
            line += f"  ({detail})"
        _ACCEPTANCE[number] = line
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        terminalreporter.write_line(_ACCEPTANCE[k])


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)
