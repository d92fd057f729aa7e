import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

import pytest

from spatialqa.pipeline import GeneratorConfig, generate_corpus


def small_config(**kw) -> GeneratorConfig:
    counts = {"train": {"YN": 60, "FR": 60}, "dev": {"YN": 10, "FR": 10}, "test": {"YN": 10, "FR": 10}}
    return GeneratorConfig(**{"seed": 7, "counts": counts, **kw})


@pytest.fixture(scope="session")
def small_corpus():
    return generate_corpus(small_config())


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    if not mod or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, (title, ok, detail) in sorted(mod.RESULTS.items()):
        extra = f" ({detail})" if detail else ""
        terminalreporter.write_line(f"criterion {number} {'PASS' if ok else 'FAIL'}: {title}{extra}")
