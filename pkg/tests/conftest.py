import pytest

from tsvplan.model import (Block, Design, Floorplan, Layer, Material, Stack,
                           TechnologyParams, TsvFarm)

MM = 1e-3
UM = 1e-6
SILICON = Material("silicon", 149.0)


def make_tech(**kw):
    args = dict(footprint_width=2 * MM, footprint_height=2 * MM,
                grid_cell=100 * UM, ambient=298.15, package_resistance=10.0)
    args.update(kw)
    return TechnologyParams(**args)


def make_design(blocks=(), farms=(), num_layers=2, tech=None, thickness=10 * UM):
    tech = tech or make_tech()
    layers = tuple(Layer(i, thickness, SILICON) for i in range(num_layers))
    return Design(Stack(layers, tech), Floorplan(tuple(blocks), tuple(farms)),
                  materials=(SILICON,))


def block(name, layer, x, y, w, h, power=0.0, kind="macro", leakage=0.0):
    return Block(name, layer, x * MM, y * MM, w * MM, h * MM, power,
                 leakage_ref=leakage, kind=kind)


def farm(name, x, y, w, h, start=0, end=1, k_lat=0.5, k_met=173.0, clients=()):
    return TsvFarm(name, x * MM, y * MM, w * MM, h * MM, start, end,
                   k_lat, k_met, area=w * h * MM * MM, clients=tuple(clients))


@pytest.fixture
def two_layer_design():
    return make_design(
        blocks=(block("alpha", 0, 0.0, 0.0, 0.5, 0.5, power=1.0),
                block("beta", 1, 1.5, 1.5, 0.5, 0.5, power=0.5)),
        farms=(farm("bus", 0.8, 0.8, 0.4, 0.4, clients=("alpha", "beta")),),
    )
