import pytest

from mlec_game.model import Der, GridTariff, Scenario

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def make_scenario(n_locations, ders, sells, base, total, alpha, buy=15.0):
    return Scenario(
        n_locations=n_locations,
        ders=tuple(Der(i, loc, cap) for i, loc, cap in ders),
        tariff=GridTariff(buy, tuple(sells)),
        base_demand=tuple(base),
        total_demand=total,
        alpha=alpha,
    )


@pytest.fixture
def monopoly():
    return make_scenario(1, [(1, 1, 10.0)], [50.0], [5.0], 5.0, 0.0)


@pytest.fixture
def three_sites():
    def build(alpha):
        return make_scenario(
            3, [(p, p, 10.0) for p in (1, 2, 3)], [50.0, 45.0, 40.0], [5.0] * 3, 15.0, alpha
        )

    return build
