"""Shot-noise magnetic sensitivity budgeting for CW ODMR.

eta = 0.77 * (1/gyro) * fwhm / (contrast * sqrt(rate)): the 0.77 prefactor
is the slope factor of a Lorentzian line read out at the point of maximum
slope, taken as-is rather than re-derived.  Sweeps against laser power use
the photo-emission saturation curve (contrast and width held fixed), and
sweeps against microwave power use the two-level saturation response,
whose figure of merit (1+s)^{3/2}/s is minimized at s = 2, i.e. 3 dB
above the saturation power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .spectrum import MwResponseParams, SaturationParams, mw_response, photon_rate
from .spin_model import PhysicalConstants

SLOPE_PREFACTOR = 0.77          # Lorentzian max-slope readout factor
_SELF_CONSISTENCY_RTOL = 1e-12


def estimate_sensitivity(
    contrast: float,
    fwhm_hz: float,
    rate_cps: float,
    consts: PhysicalConstants = PhysicalConstants(),
) -> float:
    """Shot-noise-limited DC sensitivity in T/sqrt(Hz)."""
    if not (contrast > 0 and fwhm_hz > 0 and rate_cps > 0):
        raise ValueError("contrast, fwhm_hz and rate_cps must all be positive")
    return (
        SLOPE_PREFACTOR
        / consts.gyro_hz_per_t
        * fwhm_hz
        / (contrast * math.sqrt(rate_cps))
    )


@dataclass(frozen=True)
class SensitivityBudget:
    """The (C, linewidth, photon rate) triple with its sensitivity."""

    contrast: float
    fwhm_hz: float
    rate_cps: float
    eta_t_per_sqrt_hz: float
    consts: PhysicalConstants = PhysicalConstants()

    def __post_init__(self) -> None:
        if not (
            self.contrast > 0
            and self.fwhm_hz > 0
            and self.rate_cps > 0
            and self.eta_t_per_sqrt_hz > 0
        ):
            raise ValueError("all budget entries must be positive")
        expected = estimate_sensitivity(
            self.contrast, self.fwhm_hz, self.rate_cps, self.consts
        )
        if abs(self.eta_t_per_sqrt_hz - expected) > _SELF_CONSISTENCY_RTOL * expected:
            raise ValueError("eta_t_per_sqrt_hz inconsistent with (C, fwhm, rate)")


def sensitivity_budget(
    contrast: float,
    fwhm_hz: float,
    rate_cps: float,
    consts: PhysicalConstants = PhysicalConstants(),
) -> SensitivityBudget:
    eta = estimate_sensitivity(contrast, fwhm_hz, rate_cps, consts)
    return SensitivityBudget(contrast, fwhm_hz, rate_cps, eta, consts)


@dataclass(frozen=True, eq=False)
class LaserSweep:
    """Sensitivity vs laser power at fixed contrast and linewidth."""

    powers_mw: np.ndarray
    rate_cps: np.ndarray
    eta_t_per_sqrt_hz: np.ndarray


def laser_sweep_sensitivity(
    powers_mw,
    contrast: float,
    fwhm_hz: float,
    sat: SaturationParams = SaturationParams(),
    consts: PhysicalConstants = PhysicalConstants(),
) -> LaserSweep:
    """eta(P) table: the photon rate saturates, so eta falls monotonically."""
    powers = np.asarray(powers_mw, dtype=float).ravel()
    if powers.size == 0 or np.any(powers <= 0):
        raise ValueError("laser powers must be positive")
    rates = np.array([photon_rate(p, sat) for p in powers])
    etas = np.array(
        [estimate_sensitivity(contrast, fwhm_hz, r, consts) for r in rates]
    )
    return LaserSweep(powers, rates, etas)


@dataclass(frozen=True, eq=False)
class MwSweep:
    """Sensitivity vs MW power with the broadening/contrast trade-off."""

    mw_dbm: np.ndarray
    contrast: np.ndarray
    fwhm_hz: np.ndarray
    eta_t_per_sqrt_hz: np.ndarray
    optimum_dbm: float


def mw_sweep_sensitivity(
    mw_dbm_list,
    mw: MwResponseParams = MwResponseParams(),
    rate_cps: float = 206.4e6,
    consts: PhysicalConstants = PhysicalConstants(),
) -> MwSweep:
    """eta(P_mw) table plus its argmin over the supplied grid."""
    if not (rate_cps > 0):
        raise ValueError("rate_cps must be positive")
    dbm = np.asarray(mw_dbm_list, dtype=float).ravel()
    if dbm.size == 0:
        raise ValueError("mw power list must not be empty")
    contrasts = np.empty_like(dbm)
    fwhms = np.empty_like(dbm)
    for i, p in enumerate(dbm):
        contrasts[i], fwhms[i] = mw_response(p, mw)
    etas = np.array(
        [
            estimate_sensitivity(c, w, rate_cps, consts)
            for c, w in zip(contrasts, fwhms)
        ]
    )
    return MwSweep(dbm, contrasts, fwhms, etas, float(dbm[int(np.argmin(etas))]))


def mw_optimum_dbm(mw: MwResponseParams = MwResponseParams()) -> float:
    """Analytic MW optimum: s* = 2, i.e. p_sat + 10 log10(2) in dBm.

    eta is proportional to (1+s)^{3/2}/s under the adopted response model
    and that ratio has a single interior minimum at s = 2.
    """
    return mw.p_sat_dbm + 10.0 * math.log10(2.0)


def project_saturation(
    eta_at_p: float, p_mw: float, sat: SaturationParams = SaturationParams()
) -> float:
    """Project a measured eta at laser power P to the saturated-count limit.

    eta scales as 1/sqrt(rate), so eta_sat = eta(P) * sqrt(I(P)/I_s).
    """
    if not (eta_at_p > 0 and p_mw > 0):
        raise ValueError("eta_at_p and p_mw must be positive")
    return eta_at_p * math.sqrt(photon_rate(p_mw, sat) / sat.i_s_cps)
