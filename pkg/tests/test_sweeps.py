import pytest

from tsvplan.errors import DesignError
from tsvplan.model import validate
from tsvplan.sweeps import (default_values, set_farm_conductivity,
                            with_memory_layers)
from tsvplan.benchmarks import corememory_design


class TestSetFarmConductivity:
    def test_overrides_every_farm(self):
        d = set_farm_conductivity(corememory_design(), 2.75)
        assert all(f.k_lateral == 2.75 for f in d.floorplan.farms)
        assert validate(d) == []

    def test_rejects_nonpositive(self):
        with pytest.raises(DesignError):
            set_farm_conductivity(corememory_design(), 0.0)


class TestWithMemoryLayers:
    def test_identity_when_count_matches(self):
        d = corememory_design()
        assert with_memory_layers(d, 1) is d

    def test_extension_clones_template_layer(self):
        d = corememory_design()
        d4 = with_memory_layers(d, 4)
        assert d4.stack.num_layers == 5
        assert validate(d4) == []
        # template blocks replicated per new layer with unique names
        mem_blocks = [b for b in d4.floorplan.blocks if b.name.startswith("mem")]
        assert len(mem_blocks) == 2 * 4
        assert len({b.name for b in d4.floorplan.blocks}) == len(d4.floorplan.blocks)
        # farms landing on the old top now land on the new top
        assert all(f.end_layer == 4 for f in d4.floorplan.farms)

    def test_extension_preserves_power_scaling(self):
        d = corememory_design()
        base = sum(b.power for b in d.floorplan.blocks if b.layer == 1)
        d3 = with_memory_layers(d, 3)
        for layer in (1, 2, 3):
            layer_power = sum(b.power for b in d3.floorplan.blocks
                              if b.layer == layer)
            assert layer_power == pytest.approx(base)

    def test_shrink_is_inverse_of_extension(self):
        d = corememory_design()
        d4 = with_memory_layers(d, 4)
        back = with_memory_layers(d4, 1)
        assert back.stack.num_layers == 2
        assert validate(back) == []
        assert all(f.end_layer == 1 for f in back.floorplan.farms)
        assert {b.name for b in back.floorplan.blocks} \
            == {b.name for b in d.floorplan.blocks}

    def test_requires_two_layers(self):
        from conftest import make_design, block
        single = make_design(blocks=(block("b", 0, 0.2, 0.2, 0.4, 0.4),),
                             num_layers=1)
        with pytest.raises(DesignError):
            with_memory_layers(single, 2)


def test_default_axis_values():
    d = corememory_design()
    assert default_values(d, "layers") == [1, 2, 3, 4]
    ks = default_values(d, "k_farm")
    assert ks[0] == pytest.approx(d.stack.tech.k_farm_min)
    assert ks[-1] == pytest.approx(d.stack.tech.k_farm_max)
    assert all(a < b for a, b in zip(ks, ks[1:]))
