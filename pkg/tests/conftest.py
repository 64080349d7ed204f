import pytest
from hypothesis import HealthCheck, settings, strategies as st

from ggqm.words import reduce

settings.register_profile(
    "default",
    max_examples=100,
    deadline=None,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def letters(rank: int):
    return st.integers(1, rank).flatmap(lambda g: st.sampled_from([g, -g]))


def words(rank: int, max_size: int = 12):
    return st.lists(letters(rank), max_size=max_size).map(reduce)


def nonempty_words(rank: int, max_size: int = 12):
    return words(rank, max_size).filter(bool)


@pytest.fixture(scope="session")
def g2():
    from ggqm.surface import genus_surface

    return genus_surface(2)


@pytest.fixture(scope="session")
def t2():
    from ggqm.surface import torus

    return torus()


# acceptance criteria record their verdicts here; printed in the summary
ACCEPTANCE: dict[int, str] = {}


def record(number: int, title: str, ok: bool, detail: str = "") -> None:
    line = f"criterion {number} {title}: {'PASS' if ok else 'FAIL'}"
    if detail:
        line += f" ({detail})"
    ACCEPTANCE[number] = line
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE):
            terminalreporter.write_line(ACCEPTANCE[k])
