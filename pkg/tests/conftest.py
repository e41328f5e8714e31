"""Shared fixtures: the reference device and its measured parameters."""

import numpy as np
import pytest

from magnonlink import (FieldBias, MaterialGeometry, OpticalDriveParams,
                        ShotNoiseRun, SystemParams)

TWO_PI = 2.0 * np.pi

# Reference-device numbers used throughout: a 10.45 GHz copper cavity with
# kappa/2pi = 3.3 MHz, kappa_c/2pi = 25 MHz, coupled at g/2pi = 63 MHz to a
# 0.75 mm YIG sphere with gamma/2pi = 1.1 MHz; the measured magnon-light
# rate is zeta/2pi = 0.18 mHz.
OMEGA_C_HZ = 10.45e9
KAPPA_HZ = 3.3e6
KAPPA_C_HZ = 25.0e6
GAMMA_HZ = 1.1e6
G_HZ = 63.0e6
ZETA_HZ = 1.8e-4

SPHERE_VOLUME = (4.0 * np.pi / 3.0) * (0.38e-3) ** 3
CAVITY_VOLUME = 21e-3 * 19e-3 * 3e-3
GILBERT_ALPHA = GAMMA_HZ / (2.0 * OMEGA_C_HZ)


@pytest.fixture
def device():
    return SystemParams.from_hz(OMEGA_C_HZ, OMEGA_C_HZ, KAPPA_HZ, KAPPA_C_HZ,
                                GAMMA_HZ, G_HZ, ZETA_HZ)


@pytest.fixture
def geometry():
    return MaterialGeometry(
        spin_density=2.1e28,
        verdet=380.0,
        sample_length=0.75e-3,
        sample_volume=SPHERE_VOLUME,
        cavity_volume=CAVITY_VOLUME,
        gilbert_alpha=GILBERT_ALPHA,
        bare_kittel_freq=TWO_PI * OMEGA_C_HZ,
    )


@pytest.fixture
def drive():
    return OpticalDriveParams(power=0.015, carrier_angular_freq=TWO_PI * 200e12)


@pytest.fixture
def bias():
    return FieldBias(static_field=0.31, field_per_current=0.05,
                     reference_current=0.4,
                     reference_kittel_freq=TWO_PI * OMEGA_C_HZ)


@pytest.fixture
def shot_noise_run():
    """The published heterodyne calibration point: -41 dBm drive, 36.8 dB SNR."""
    return ShotNoiseRun(
        microwave_power=1e-3 * 10.0 ** (-41.0 / 10.0),
        probe_photon_flux=1.2e17,
        resolution_bandwidth=TWO_PI * 100.0,
        coil_coupling=TWO_PI * 1.5e6,
        magnon_freq=TWO_PI * 9.5e9,
        measured_snr=10.0 ** (36.8 / 10.0),
    )
