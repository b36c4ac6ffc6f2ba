"""Physical constants, unit conventions, and material parameters."""

import math

import numpy as np
import pytest

from sivphonon import (
    CONST,
    DIAMOND,
    MaterialParams,
    ValidationError,
    angular_to_cyclic,
    cyclic_to_angular,
    wave_speeds,
)
from sivphonon.constants import TWO_PI, material_from_config


def test_si_defining_constants():
    assert CONST.h == 6.62607015e-34
    assert CONST.k_B == 1.380649e-23
    assert CONST.hbar == CONST.h / TWO_PI


def test_frequency_conversions_round_trip():
    nu = 46e9
    assert cyclic_to_angular(nu) == pytest.approx(TWO_PI * nu, rel=1e-15)
    assert angular_to_cyclic(cyclic_to_angular(nu)) == pytest.approx(nu, rel=1e-15)


def test_diamond_parameters():
    assert DIAMOND.rho == 3515.0
    assert DIAMOND.E == 1050e9
    assert DIAMOND.nu == 0.2


def test_lame_constants_from_engineering_moduli():
    m = MaterialParams(rho=1000.0, E=200e9, nu=0.3)
    mu = m.E / (2.0 * (1.0 + m.nu))
    lam = m.E * m.nu / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu))
    assert m.shear_modulus == pytest.approx(mu, rel=1e-14)
    assert m.lame_lambda == pytest.approx(lam, rel=1e-14)


def test_diamond_wave_speeds():
    # independent evaluation of v_t = sqrt(mu/rho), v_l = sqrt((lam+2mu)/rho)
    v_t, v_l = wave_speeds(DIAMOND)
    assert v_t == pytest.approx(11156.458749755358, rel=1e-12)
    assert v_l == pytest.approx(18218.420848872927, rel=1e-12)
    assert v_l > v_t


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(rho=-1.0, E=1e9, nu=0.2),
        dict(rho=1000.0, E=0.0, nu=0.2),
        dict(rho=1000.0, E=1e9, nu=0.5),
        dict(rho=1000.0, E=1e9, nu=-1.5),
    ],
)
def test_material_validation(kwargs):
    with pytest.raises(ValidationError):
        MaterialParams(**kwargs)


def test_material_from_config():
    m = material_from_config({"rho_kg_m3": 2200.0, "youngs_Pa": 70e9, "poisson": 0.17})
    assert (m.rho, m.E, m.nu) == (2200.0, 70e9, 0.17)


def test_material_from_config_missing_field():
    with pytest.raises(ValidationError):
        material_from_config({"rho_kg_m3": 2200.0})
