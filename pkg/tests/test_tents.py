"""Tent pitching: hand-traced sequences, causality, tiling, determinism."""

import io
import math

import numpy as np
import pytest

from tentdg.mesh import (
    WavespeedMap,
    make_interval_mesh,
    make_lshape_graded,
    make_rect_mesh,
    make_square_mesh,
)
from tentdg.tents import (
    Tent,
    TentSlab,
    causality_margin,
    dump_slab,
    edge_safety_factor,
    layers,
    pitch,
    validate,
)

UNIT = WavespeedMap.uniform(1.0)


def test_edge_safety_factor_values():
    assert edge_safety_factor(0.5, 1) == 0.5
    assert edge_safety_factor(0.5, 2) == pytest.approx(0.5 / math.sqrt(2.0))


def test_two_element_interval_hand_trace():
    # [0,1] with two elements, c = 1, gamma = 1/2: every edge advance is 0.25
    mesh = make_interval_mesh(0.0, 1.0, 2)
    slab = pitch(mesh, UNIT, T=1.0, gamma=0.5)
    got = [(t.pitch_vertex, t.t_bottom, t.t_top, t.deps) for t in slab.tents]
    assert got == [
        (0, 0.0, 0.25, ()),
        (1, 0.0, 0.25, (0,)),
        (2, 0.0, 0.5, (1,)),
        (0, 0.25, 0.5, (1,)),
        (1, 0.25, 0.75, (2, 3)),
        (0, 0.5, 1.0, (4,)),
        (2, 0.5, 1.0, (4,)),
        (1, 0.75, 1.0, (5, 6)),
    ]
    assert slab.tents[4].rim_times == {0: 0.5, 2: 0.5}
    assert slab.tents[1].star == (0, 1)
    assert slab.layers == ((0,), (1,), (2, 3), (4,), (5, 6), (7,))
    assert layers(slab) == slab.layers
    assert validate(slab, mesh, UNIT) == []


def test_single_element_short_horizon():
    # cap at T = 0.25 finishes each vertex in one advance: two tents total
    mesh = make_interval_mesh(0.0, 1.0, 1)
    slab = pitch(mesh, UNIT, T=0.25, gamma=0.5)
    assert slab.num_tents == 2
    assert [(t.pitch_vertex, t.t_top) for t in slab.tents] == [(0, 0.25), (1, 0.25)]
    assert slab.tents[1].deps == (0,)
    assert slab.tents[1].rim_times == {0: 0.25}
    assert slab.layers == ((0,), (1,))
    assert validate(slab, mesh, UNIT) == []


def test_all_tents_make_progress_and_front_finishes_flat():
    mesh = make_square_mesh(0.25)
    slab = pitch(mesh, UNIT, T=0.5, gamma=0.5)
    assert all(t.height > 0 for t in slab.tents)
    assert max(t.t_top for t in slab.tents) == 0.5
    assert validate(slab, mesh, UNIT) == []


@pytest.mark.parametrize("gamma", [0.3, 0.5, 0.9])
def test_causality_invariant_on_triangles(gamma):
    # the sqrt(2) edge derate keeps facet gradients within gamma on triangles
    mesh = make_square_mesh(0.25)
    slab = pitch(mesh, UNIT, T=0.4, gamma=gamma)
    assert causality_margin(slab, mesh, UNIT) <= gamma + 1e-12
    assert validate(slab, mesh, UNIT) == []


def test_causality_invariant_heterogeneous():
    xs = [0.0, 0.6, 1.2, 1.6, 2.0]
    ys = [0.0, 0.5, 1.0]
    mesh = make_rect_mesh(xs, ys, material_fn=lambda p: 0 if p[0] < 1.2 else 1)
    speeds = WavespeedMap({0: 1.0, 1: 3.0})
    slab = pitch(mesh, speeds, T=0.6, gamma=0.5)
    assert causality_margin(slab, mesh, speeds) <= 0.5 + 1e-12
    assert validate(slab, mesh, speeds) == []
    # fast-region tents are flatter: the largest advance next to c = 3
    # elements is a third of the slow-region one over equal edges
    fast = [t.height for t in slab.tents if np.all(
        mesh.vertices[t.pitch_vertex] >= [1.6, 0.0]) and t.t_top < 0.6]
    slow = [t.height for t in slab.tents if np.all(
        mesh.vertices[t.pitch_vertex] <= [0.6, 1.0]) and t.t_top < 0.6]
    assert fast and slow
    assert max(fast) < max(slow)


def test_interface_facets_recorded_on_material_boundary():
    mesh = make_interval_mesh(0.0, 2.0, 10,
                              material_fn=lambda x: 0 if x < 1.2 else 1)
    speeds = WavespeedMap({0: 1.0, 1: 3.0})
    slab = pitch(mesh, speeds, T=0.2, gamma=0.5)
    for tent in slab.tents:
        if tent.pitch_vertex == 6:
            assert tent.interface_facets == ((6,),)
        else:
            assert tent.interface_facets == ()

    xs = [0.0, 1.0, 1.2, 2.0]
    ys = [0.0, 0.5, 1.0]
    mesh2 = make_rect_mesh(xs, ys, material_fn=lambda p: 0 if p[0] < 1.2 else 1)
    slab2 = pitch(mesh2, speeds, T=0.2, gamma=0.5)
    on_line = {v for v in range(mesh2.num_vertices)
               if mesh2.vertices[v, 0] == pytest.approx(1.2)}
    for tent in slab2.tents:
        facets = tent.interface_facets
        if tent.pitch_vertex in on_line:
            assert facets
            for f in facets:
                assert tent.pitch_vertex in f
                assert all(mesh2.vertices[v, 0] == pytest.approx(1.2) for v in f)
        else:
            assert facets == ()


def test_lshape_slab_validates():
    mesh = make_lshape_graded(0.5, mu=1.0 / 3.0)
    slab = pitch(mesh, UNIT, T=0.3, gamma=0.5)
    assert validate(slab, mesh, UNIT) == []
    assert causality_margin(slab, mesh, UNIT) <= 0.5 + 1e-12


def test_pitch_is_deterministic():
    mesh = make_square_mesh(1.0 / 3.0)
    a = pitch(mesh, UNIT, T=0.7, gamma=0.5)
    b = pitch(mesh, UNIT, T=0.7, gamma=0.5)
    assert a == b


def test_validate_flags_non_spacelike_facet():
    # handcrafted slab over one element: first tent overshoots the causal
    # cap (slope 1.2 > 1) but chains and tiles cleanly, so exactly one
    # violation comes back and it names the facet
    mesh = make_interval_mesh(0.0, 1.0, 1)
    t0 = Tent(id=0, pitch_vertex=0, star=(0,), t_bottom=0.0, t_top=1.2,
              rim_times={1: 0.0}, deps=(), interface_facets=())
    t1 = Tent(id=1, pitch_vertex=1, star=(0,), t_bottom=0.0, t_top=1.2,
              rim_times={0: 1.2}, deps=(0,), interface_facets=())
    slab = TentSlab(tents=(t0, t1), layers=((0,), (1,)), T=1.2)
    bad = validate(slab, mesh, UNIT)
    assert len(bad) == 1
    assert "space-like" in bad[0]
    assert "tent 0" in bad[0] and "element 0" in bad[0]


def test_validate_flags_broken_chaining():
    mesh = make_interval_mesh(0.0, 1.0, 2)
    slab = pitch(mesh, UNIT, T=0.5, gamma=0.5)
    tampered = list(slab.tents)
    victim = tampered[3]
    tampered[3] = Tent(id=victim.id, pitch_vertex=victim.pitch_vertex,
                       star=victim.star, t_bottom=victim.t_bottom + 0.01,
                       t_top=victim.t_top, rim_times=victim.rim_times,
                       deps=victim.deps, interface_facets=victim.interface_facets)
    bad = validate(TentSlab(tuple(tampered), slab.layers, slab.T), mesh, UNIT)
    assert any("chain" in b for b in bad)


def test_layer_count_bounded_by_tent_count():
    mesh = make_square_mesh(0.5)
    slab = pitch(mesh, UNIT, T=0.3, gamma=0.5)
    assert len(slab.layers) <= slab.num_tents
    assert sorted(t for layer in slab.layers for t in layer) == \
        list(range(slab.num_tents))
    for layer_idx, layer in enumerate(slab.layers):
        for tid in layer:
            for d in slab.tents[tid].deps:
                dep_layer = next(i for i, l in enumerate(slab.layers) if d in l)
                assert dep_layer < layer_idx


def test_dump_slab_format():
    mesh = make_interval_mesh(0.0, 1.0, 1)
    slab = pitch(mesh, UNIT, T=0.25, gamma=0.5)
    buf = io.StringIO()
    dump_slab(slab, buf)
    assert buf.getvalue() == (
        "# id vertex t_bottom t_top deps\n"
        "0 0 0 0.25 -\n"
        "1 1 0 0.25 0\n"
    )


def test_pitch_parameter_validation():
    mesh = make_interval_mesh(0.0, 1.0, 2)
    with pytest.raises(ValueError, match="gamma"):
        pitch(mesh, UNIT, T=1.0, gamma=1.0)
    with pytest.raises(ValueError, match="gamma"):
        pitch(mesh, UNIT, T=1.0, gamma=0.0)
    with pytest.raises(ValueError, match="exceed"):
        pitch(mesh, UNIT, T=0.0, gamma=0.5)
    with pytest.raises(ValueError, match="exceed"):
        pitch(mesh, UNIT, T=1.0, gamma=0.5, t_start=1.0)


def test_pitch_from_nonzero_start():
    mesh = make_interval_mesh(0.0, 1.0, 3)
    slab = pitch(mesh, UNIT, T=0.9, gamma=0.5, t_start=0.4)
    assert slab.t_start == 0.4
    assert not validate(slab, mesh, UNIT)
    assert all(t.t_bottom >= 0.4 for t in slab.tents)
    assert max(t.t_top for t in slab.tents) == 0.9
