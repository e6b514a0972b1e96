import math

import pytest
from hypothesis import given, strategies as st

from kgrm.errors import ConfigError, DomainError
from kgrm.quantities import (INFINITE, MassMode, PhysicalConfig, kinematic_sample,
                             lorentz_factor, quasi_static_config, validate_config)


def test_default_natural_units_accepted():
    cfg = validate_config(PhysicalConfig(1.0, 1.0, -1.0, 1.0, MassMode.RELATIVISTIC, False))
    assert cfg.c2 == 1.0 and not cfg.quasi_static


def test_infinite_c_with_rest_mass_accepted():
    cfg = validate_config(PhysicalConfig(c=INFINITE, mass_mode=MassMode.REST))
    assert cfg.quasi_static
    assert cfg.inv_c2 == 0.0


def test_infinite_c_with_relativistic_mass_rejected():
    with pytest.raises(ConfigError):
        validate_config(PhysicalConfig(c=INFINITE, mass_mode=MassMode.RELATIVISTIC))


@pytest.mark.parametrize("kwargs", [dict(hbar=0.0), dict(m0=-1.0), dict(c=0.0), dict(c=-2.0),
                                    dict(q=math.nan), dict(c=2.0, quasi_static=True,
                                                           mass_mode=MassMode.REST)])
def test_invalid_configs(kwargs):
    with pytest.raises(ConfigError):
        validate_config(PhysicalConfig(**kwargs))


def test_c2_undefined_when_infinite():
    with pytest.raises(ConfigError):
        quasi_static_config().c2


def test_dict_round_trip():
    for cfg in (PhysicalConfig(hbar=2.0, c=3.0, q=0.5, m0=4.0, mass_mode="effective"),
                quasi_static_config(q=-2.0)):
        assert PhysicalConfig.from_dict(cfg.to_dict()) == cfg


def test_from_dict_rejects_unknown_keys():
    with pytest.raises(ConfigError):
        PhysicalConfig.from_dict({"hbar": 1.0, "speed": 2.0})
    with pytest.raises(ConfigError):
        PhysicalConfig.from_dict({"mass_mode": "heavy"})


def test_lorentz_factor_examples(natural):
    assert lorentz_factor(0.0, natural) == 1.0
    assert lorentz_factor(0.6, natural) == pytest.approx(1.25, rel=1e-15)
    with pytest.raises(DomainError):
        lorentz_factor(1.0, natural)
    with pytest.raises(DomainError):
        lorentz_factor([0.8, 0.7], natural)


def test_lorentz_factor_scales_with_c():
    assert lorentz_factor(1.8, PhysicalConfig(c=3.0)) == pytest.approx(1.25, rel=1e-15)
    assert lorentz_factor(1e6, quasi_static_config()) == 1.0


def test_kinematic_sample_vector(natural):
    s = kinematic_sample([0.36, 0.48], natural)
    assert s.gamma == pytest.approx(1.25)
    assert s.v.shape == (2,)


@given(st.floats(0.0, 0.999), st.floats(0.0, 0.999))
def test_lorentz_factor_monotone(a, b):
    cfg = PhysicalConfig()
    lo, hi = sorted((a, b))
    assert lorentz_factor(lo, cfg) <= lorentz_factor(hi, cfg)
