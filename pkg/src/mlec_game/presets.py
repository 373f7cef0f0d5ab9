"""The case-study market instances.

``fig2``: one location, one/two/hundred competing DERs, no migration.
``fig3``/``fig4``: 3 resp. 10 locations with one DER each, migration
fraction swept from 0 to 1 in steps of 0.1.
"""

from __future__ import annotations

from .model import Der, Scenario, default_tariff, validate_scenario

BASE_DEMAND = 5.0
DER_CAPACITY = 10.0
ALPHA_GRID = tuple(round(0.1 * k, 1) for k in range(11))


class UnknownPreset(KeyError):
    pass


def single_location(n_ders: int, alpha: float = 0.0) -> Scenario:
    return Scenario(
        n_locations=1,
        ders=tuple(Der(p, 1, DER_CAPACITY) for p in range(1, n_ders + 1)),
        tariff=default_tariff(1),
        base_demand=(BASE_DEMAND,),
        total_demand=BASE_DEMAND,
        alpha=alpha,
        name=f"N1_P{n_ders}_a{alpha:.1f}",
    )


def one_der_per_location(n_locations: int, alpha: float) -> Scenario:
    return Scenario(
        n_locations=n_locations,
        ders=tuple(Der(p, p, DER_CAPACITY) for p in range(1, n_locations + 1)),
        tariff=default_tariff(n_locations),
        base_demand=(BASE_DEMAND,) * n_locations,
        total_demand=BASE_DEMAND * n_locations,
        alpha=alpha,
        name=f"N{n_locations}_P{n_locations}_a{alpha:.1f}",
    )


def preset(name: str) -> list[Scenario]:
    if name == "fig2":
        scenarios = [single_location(p) for p in (1, 2, 100)]
    elif name == "fig3":
        scenarios = [one_der_per_location(3, a) for a in ALPHA_GRID]
    elif name == "fig4":
        scenarios = [one_der_per_location(10, a) for a in ALPHA_GRID]
    else:
        raise UnknownPreset(name)
    return [validate_scenario(s) for s in scenarios]


PRESETS = ("fig2", "fig3", "fig4")
