import numpy as np
import pytest
import scipy.io

from dec_phs import operators as ops
from dec_phs.complex import generate_two_triangle_mesh
from dec_phs.errors import ConfigError, NonManifold
from dec_phs.io import dump_matrix, loads_strict, mesh_from_dict, mesh_to_dict, svg_line_plot


def test_strict_json():
    assert loads_strict('{"a": 1.5}') == {"a": 1.5}
    for bad in ('{"a": NaN}', '{"a": -Infinity}', '{"a": 1} x', "{"):
        with pytest.raises(ConfigError):
            loads_strict(bad)


def test_mesh_dict_round_trip_keeps_orientation():
    K, _ = generate_two_triangle_mesh()
    K2 = mesh_from_dict(mesh_to_dict(K))
    for k in range(3):
        assert np.array_equal(K.simplices[k], K2.simplices[k])
        assert np.array_equal(K.orientation[k], K2.orientation[k])


@pytest.mark.parametrize(
    "data",
    [
        {"vertices": [[0, 0]], "simplices": []},
        {"dimension": 2, "vertices": [[0, 0, 0]], "simplices": [[0, 1, 2]]},
        {"dimension": 2, "vertices": [[0, 0], [1, 0], [0, 1]], "simplices": [[0, 1]]},
        {"dimension": 0, "vertices": [[0]], "simplices": [[0]]},
    ],
)
def test_mesh_dict_validation(data):
    with pytest.raises(ConfigError):
        mesh_from_dict(data)


def test_structural_mesh_errors_propagate():
    data = {
        "dimension": 2,
        "vertices": [[0, 0], [1, 0], [0.5, 1], [0.5, -1], [0.5, 0.5]],
        "simplices": [[0, 1, 2], [1, 0, 3], [0, 1, 4]],
    }
    with pytest.raises(NonManifold):
        mesh_from_dict(data)


def test_matrix_dump(tmp_path):
    K, _ = generate_two_triangle_mesh()
    d0 = ops.coboundary(K, 0).matrix
    dump_matrix(tmp_path / "d0.mtx", d0)
    back = scipy.io.mmread(str(tmp_path / "d0.mtx"))
    assert np.array_equal(back.toarray(), d0.toarray())


def test_svg_plot_is_well_formed():
    import xml.etree.ElementTree as ET

    t = np.linspace(0, 1, 5000)
    svg = svg_line_plot(t, {"a": np.sin(t), "b": np.full_like(t, 2.0)}, "demo")
    root = ET.fromstring(svg)
    assert root.tag.endswith("svg")
    assert len([e for e in root.iter() if e.tag.endswith("polyline")]) == 2
