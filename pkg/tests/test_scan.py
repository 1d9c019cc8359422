import json

import numpy as np
import pytest

from oracles import min_choi_eig
from phasecov.errors import ConfigError
from phasecov.scan import (CONTAINMENTS, PREDICATES, AxisRange, ScanConfig, csv_text, scan_region,
                           write_svg)


def small(steps=21, **kw):
    ax = lambda: AxisRange(-1.5, 1.5, steps)
    return ScanConfig(ax(), ax(), ax(), **kw)


def test_identity_point_is_on_every_boundary():
    pt = lambda v: AxisRange(v, v, 1)
    res = scan_region(ScanConfig(pt(1.0), pt(1.0), pt(0.0), predicates=("cp", "positive", "class_l")))
    for p in ("cp", "positive", "class_l"):
        assert res.counts()[p] == {"holds": 0, "marginal": 1, "fails": 0}


def test_config_validation_names_field():
    for cfg, fld in [(ScanConfig(lam=AxisRange(-1, 1, 1)), "lambda.steps"),
                     (ScanConfig(t_z=AxisRange(float("inf"), 1, 5)), "t_z.min/max"),
                     (ScanConfig(lambda_z=AxisRange(1, -1, 5)), "lambda_z.max"),
                     (ScanConfig(predicates=("cp", "bogus")), "predicates"),
                     (ScanConfig(tol=-1), "tol"), (ScanConfig(threads=0), "threads")]:
        with pytest.raises(ConfigError) as exc:
            cfg.validate()
        assert exc.value.field == fld
    with pytest.raises(ConfigError):
        ScanConfig.from_dict({"lam": {"min": 0, "max": 1, "steps": 3}, "colour": "red"})


def test_config_round_trip():
    cfg = small(predicates=("cp", "class_l"), slices=(0.0, 0.3))
    again = ScanConfig.from_dict(json.loads(json.dumps(cfg.to_dict())))
    assert again == cfg


def test_all_containments_hold_on_coarse_grid():
    res = scan_region(small(31, predicates=tuple(PREDICATES)))
    assert set(res.containment_violations()) == {f"{a}<={b}" for a, b in CONTAINMENTS}
    assert all(v == 0 for v in res.containment_violations().values())
    counts = res.counts()
    inside = lambda p: counts[p]["holds"] + counts[p]["marginal"]
    assert inside("polyhedron") < inside("cp") < inside("positive")
    assert inside("class_l") <= inside("class_l_rotated") <= inside("cp")


def test_cp_scan_matches_choi():
    res = scan_region(small(11, predicates=("cp",)))
    lam, lz, tz = np.meshgrid(*res.axes, indexing="ij")
    for i in np.ndindex(res.shape):
        code = res.codes["cp"][i]
        e = min_choi_eig(lam[i], lz[i], tz[i])
        if code == 1:
            assert e >= -1e-10
        elif code == -1:
            assert e < 1e-10


def test_threads_do_not_change_output():
    a = scan_region(small(25, predicates=tuple(PREDICATES)))
    b = scan_region(small(25, predicates=tuple(PREDICATES), threads=4))
    assert csv_text(a) == csv_text(b)
    ja, jb = a.to_json_dict(), b.to_json_dict()
    assert ja.pop("config")["threads"] == 1 and jb.pop("config")["threads"] == 4
    assert json.dumps(ja) == json.dumps(jb)


def test_counts_invariant_under_axis_permutation():
    # permute the roles of the three grid axes by evaluating on transposed meshes
    res = scan_region(small(17, predicates=tuple(PREDICATES)))
    ax = res.axes[0]
    for perm in [(1, 0, 2), (2, 1, 0), (0, 2, 1), (1, 2, 0)]:
        grids = np.meshgrid(ax, ax, ax, indexing="ij")
        coords = [g.transpose(perm) for g in grids]
        for p, fn in PREDICATES.items():
            codes = np.sign(np.where(np.abs(fn(*coords)) <= res.config.tol, 0, fn(*coords)))
            for c in (1, 0, -1):
                assert np.count_nonzero(codes == c) == np.count_nonzero(res.codes[p] == c)


def test_csv_layout():
    res = scan_region(ScanConfig(AxisRange(0, 1, 2), AxisRange(0, 1, 2), AxisRange(0, 0, 1), predicates=("cp",)))
    lines = csv_text(res).splitlines()
    assert lines[0] == "# phasecov/1 region columns=lambda,lambda_z,t_z,cp"
    assert lines[1] == "lambda,lambda_z,t_z,cp"
    assert len(lines) == 2 + 4
    assert lines[2] == "0.0,0.0,0.0,holds"


def test_svg_is_deterministic(tmp_path):
    res = scan_region(small(21, predicates=("cp", "polyhedron"), slices=(0.0, 0.5)))
    write_svg(res, tmp_path / "a.svg")
    write_svg(res, tmp_path / "b.svg")
    a = (tmp_path / "a.svg").read_bytes()
    assert a == (tmp_path / "b.svg").read_bytes()
    assert a.startswith(b"<?xml") and b"t_z = 0.45" in a  # nearest grid value
