import os
import sys

import pytest

sys.path.insert(0, os.path.dirname(__file__))

from difffuzz.corpus import load_corpus, load_refactorings, mini_corpus_paths
from difffuzz.execution import InProcessExecutor


@pytest.fixture(scope="session")
def mini_problems():
    return load_corpus(mini_corpus_paths()[0])


@pytest.fixture(scope="session")
def mini_refactorings():
    return load_refactorings(mini_corpus_paths()[1])


@pytest.fixture(scope="session")
def inprocess():
    return InProcessExecutor()


def adapter_script_path() -> str | None:
    """Location of the subprocess adapter shim, when the adapter package is
    present next to this one."""
    override = os.environ.get("DIFFFUZZ_ADAPTER")
    if override and os.path.exists(override):
        return override
    candidate = os.path.join(os.path.dirname(os.path.dirname(
        os.path.abspath(__file__))), "adapter", "target_adapter.py")
    return candidate if os.path.exists(candidate) else None
