import math

import pytest

from trajcount.core import (BBox, ConfigError, DetectionRecord, HyperParams,
                            bbox_center, load_params, save_params, set_param,
                            validate_params)


def test_bbox_center_values():
    assert bbox_center(BBox(0, 0, 10, 20)) == (5, 10)
    assert bbox_center(BBox(100, 50, 0.5, 0.5)) == (100.25, 50.25)
    assert bbox_center(BBox(3, 7, 4, 2)) == (5, 8)


def test_bbox_rejects_empty_extent():
    with pytest.raises(ValueError):
        BBox(0, 0, 0, 5)
    with pytest.raises(ValueError):
        BBox(0, 0, 5, -1)


def test_detection_record_validation():
    b = BBox(0, 0, 10, 10)
    DetectionRecord(frame=0, bbox=b, confidence=0.5)
    with pytest.raises(ValueError):
        DetectionRecord(frame=-1, bbox=b, confidence=0.5)
    with pytest.raises(ValueError):
        DetectionRecord(frame=0, bbox=b, confidence=1.7)
    with pytest.raises(ValueError):
        DetectionRecord(frame=0, bbox=b, confidence=0.5, track_id=-3)


def test_default_params_are_valid():
    assert validate_params(HyperParams()).ok


def test_param_violations_reported():
    r = validate_params(HyperParams(lambda2=1.5))
    assert not r.ok and any("lambda2" in v for v in r.violations)
    r = validate_params(HyperParams(k_min=1))
    assert not r.ok and any("k_min" in v for v in r.violations)
    r = validate_params(HyperParams(k_min=9, k_max=4))
    assert not r.ok


def test_default_lambda_values():
    p = HyperParams()
    assert p.lambda1 == 0.25
    assert p.lambda2 == 0.75
    assert p.lambda3 == 0.25
    assert p.lambda4 == 0.9
    assert p.lambda5 == 100.0
    assert p.lambda6 == 3
    assert p.lambda7 == 5.0
    assert p.lambda8_floor == 5 and p.lambda8_frac == 0.05
    assert p.lambda9 == 3
    assert (p.k_min, p.k_max) == (2, 15)


def test_config_round_trip(tmp_path):
    p = HyperParams(lambda2=0.8, lambda5=250.0, lambda6=4, angle_degrees=True)
    f = tmp_path / "params.cfg"
    save_params(p, f)
    assert load_params(f) == p


def test_partial_config_keeps_defaults(tmp_path):
    f = tmp_path / "partial.cfg"
    f.write_text("lambda2 = 0.9\n# a comment\n\nlambda6 = 7\n")
    p = load_params(f)
    assert p.lambda2 == 0.9 and p.lambda6 == 7
    assert p.lambda1 == HyperParams().lambda1


def test_unknown_config_key_rejected(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("lambda99 = 3\n")
    with pytest.raises(ConfigError):
        load_params(f)


def test_non_finite_value_rejected(tmp_path):
    f = tmp_path / "bad.cfg"
    f.write_text("lambda5 = inf\n")
    with pytest.raises(ConfigError):
        load_params(f)


def test_set_param_overrides():
    p = set_param(HyperParams(), "lambda4", "0.7")
    assert p.lambda4 == 0.7
    p = set_param(p, "gamma_is_grid_size", "false")
    assert p.gamma_is_grid_size is False
    with pytest.raises(ConfigError):
        set_param(p, "nope", "1")
    with pytest.raises(ConfigError):
        set_param(p, "lambda6", "2.5")


def test_config_floats_survive_exactly(tmp_path):
    p = HyperParams(lambda8_frac=1 / 3, lambda5=math.pi)
    f = tmp_path / "exact.cfg"
    save_params(p, f)
    q = load_params(f)
    assert q.lambda8_frac == p.lambda8_frac and q.lambda5 == p.lambda5
