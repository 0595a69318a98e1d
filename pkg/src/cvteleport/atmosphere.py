"""Elliptic-beam model of a turbulent free-space channel.

Turbulence deflects the beam centroid and deforms the spot into a random
ellipse; the intensity transmittance follows from the overlap of that ellipse
with the circular receiver aperture.  Sampling many beam realizations yields
the probability distribution of the transmittance (PDT) and its exceedance.
"""

from __future__ import annotations

import hashlib
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from . import specfun

__all__ = [
    "SPOT_EXPANDING",
    "SPOT_SHRINKING",
    "ChannelModelError",
    "EllipticBeamParams",
    "DerivedBeamParams",
    "BeamSample",
    "TransmittanceEnsemble",
    "EmpiricalPdt",
    "derive_params",
    "beam_substream",
    "sample_beam",
    "spot_radii",
    "effective_spot_radius",
    "shape_functions",
    "centered_transmittance",
    "aperture_transmittance",
    "sample_transmittance_ensemble",
    "empirical_pdt",
    "exceedance",
    "fraction_below",
    "ensemble_hash",
    "params_hash",
    "ensemble_to_csv",
]

# Sign conventions for the random spot size, W^2 = w0^2 exp(sign * Theta).
# The log-moment formulas make the mean of Theta the log of a quantity >= 1,
# so only the expanding sign reproduces a beam that broadens in turbulence;
# the shrinking variant is kept selectable for sensitivity analysis.
SPOT_EXPANDING = +1
SPOT_SHRINKING = -1

# |1/W1 - 1/W2| * aperture below this value counts as a circular beam; the
# asymmetry correction has a |W1^2 - W2^2| denominator and vanishes in that
# limit.
_DEGENERATE_TOL = 1e-6
# Clamp tolerances: floating-point noise only.  Anything worse aborts.
_CLAMP_TOL_HIGH = 1e-9
_CLAMP_TOL_LOW = 1e-12
# Below this x = (aperture * xi)^2, evaluate the shape-function logs via
# series to dodge the cancellation in 1 - exp(-x) I0(x).
_SHAPE_SERIES_CUTOFF = 1e-3


class ChannelModelError(RuntimeError):
    """The transmittance formula produced a value outside [0, 1]."""


@dataclass(frozen=True)
class EllipticBeamParams:
    """Physical channel constants, SI units.

    wavelength and w0 (initial beam-spot radius) in meters, propagation
    length in meters, receiver aperture radius in meters, eta_m the
    deterministic intensity attenuation, cn2 the index-of-refraction
    structure constant in m^(-2/3).
    """

    wavelength: float
    w0: float
    length: float
    aperture: float
    eta_m: float
    cn2: float

    def __post_init__(self) -> None:
        for name in ("wavelength", "w0", "length", "aperture", "eta_m", "cn2"):
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be positive and finite, got {value!r}")
        if self.eta_m > 1.0:
            raise ValueError(f"eta_m must be <= 1, got {self.eta_m}")


@dataclass(frozen=True)
class DerivedBeamParams:
    """Wavenumber, Fresnel/Rytov parameters and the beam-vector moments."""

    k: float
    fresnel_omega: float
    rytov2: float
    theta_mean: float
    x0_var: float
    theta_var: float
    theta_cov: float
    w0: float
    spot_sign: int


@dataclass(frozen=True)
class BeamSample:
    """One random beam realization: centroid offset, log spot sizes, tilt."""

    x0: float
    y0: float
    theta1: float
    theta2: float
    chi: float


@dataclass(frozen=True)
class TransmittanceEnsemble:
    """Seeded collection of amplitude transmissions T = sqrt(eta_m * eta)."""

    samples: np.ndarray
    seed: int
    params: EllipticBeamParams
    spot_sign: int = SPOT_EXPANDING
    selection_efficiency: float = 1.0

    def __len__(self) -> int:
        return self.samples.size


@dataclass(frozen=True)
class EmpiricalPdt:
    """Normalized transmittance histogram on [0, 1]."""

    bin_edges: np.ndarray
    probabilities: np.ndarray

    @property
    def bin_centers(self) -> np.ndarray:
        return 0.5 * (self.bin_edges[:-1] + self.bin_edges[1:])


def derive_params(
    params: EllipticBeamParams, spot_sign: int = SPOT_EXPANDING
) -> DerivedBeamParams:
    """Rytov/Fresnel parameters and beam-vector moments for a channel."""
    if spot_sign not in (SPOT_EXPANDING, SPOT_SHRINKING):
        raise ValueError(f"spot_sign must be +1 or -1, got {spot_sign}")
    k = 2.0 * math.pi / params.wavelength
    omega = k * params.w0**2 / (2.0 * params.length)
    rytov2 = 1.23 * params.cn2 * k ** (7.0 / 6.0) * params.length ** (11.0 / 6.0)
    strength = rytov2 * omega ** (5.0 / 6.0)
    broadened = (1.0 + 2.96 * strength) ** 2
    theta_mean = math.log(
        broadened / (omega**2 * math.sqrt(broadened + 1.2 * strength))
    )
    x0_var = 0.33 * params.w0**2 * rytov2 * omega ** (-7.0 / 6.0)
    theta_var = math.log1p(1.2 * strength / broadened)
    theta_cov = math.log1p(-0.8 * strength / broadened)
    return DerivedBeamParams(
        k=k,
        fresnel_omega=omega,
        rytov2=rytov2,
        theta_mean=theta_mean,
        x0_var=x0_var,
        theta_var=theta_var,
        theta_cov=theta_cov,
        w0=params.w0,
        spot_sign=spot_sign,
    )


def beam_substream(seed: int, index: int) -> np.random.Generator:
    """Counter-based generator for sample ``index`` of ensemble ``seed``.

    Keying the Philox stream by (seed, index) makes every sample
    reproducible on its own, independent of how work is distributed
    across workers.
    """
    return np.random.Generator(np.random.Philox(key=[seed, index]))


def sample_beam(derived: DerivedBeamParams, rng: np.random.Generator) -> BeamSample:
    """Draw one beam realization from its substream.

    Consumes exactly four standard normals (centroid x, centroid y, two
    spot-shape variates) and one uniform (ellipse orientation).  The
    correlated (theta1, theta2) pair uses the symmetric square root of
    its 2x2 covariance.
    """
    z = rng.standard_normal(4)
    chi = rng.uniform(0.0, math.pi / 2.0)
    x0_sd = math.sqrt(derived.x0_var)
    root_plus = math.sqrt(max(derived.theta_var + derived.theta_cov, 0.0))
    root_minus = math.sqrt(max(derived.theta_var - derived.theta_cov, 0.0))
    diag = 0.5 * (root_plus + root_minus)
    off = 0.5 * (root_plus - root_minus)
    return BeamSample(
        x0=x0_sd * z[0],
        y0=x0_sd * z[1],
        theta1=derived.theta_mean + diag * z[2] + off * z[3],
        theta2=derived.theta_mean + off * z[2] + diag * z[3],
        chi=chi,
    )


def spot_radii(derived: DerivedBeamParams, sample: BeamSample) -> tuple[float, float]:
    """Semi-axes (W1, W2) of the random elliptic spot."""
    w1 = derived.w0 * math.exp(0.5 * derived.spot_sign * sample.theta1)
    w2 = derived.w0 * math.exp(0.5 * derived.spot_sign * sample.theta2)
    return w1, w2


def effective_spot_radius(w1: float, w2: float, chi: float, aperture: float) -> float:
    """Effective circular spot radius seen by the aperture.

    For a symmetric spot (w1 == w2 == W) the Lambert identity
    W(z e^z) = z collapses this to exactly W, for any orientation.
    """
    a2 = aperture * aperture
    exponent = (a2 / w1**2) * (1.0 + 2.0 * math.cos(chi) ** 2) + (
        a2 / w2**2
    ) * (1.0 + 2.0 * math.sin(chi) ** 2)
    arg = (4.0 * a2 / (w1 * w2)) * math.exp(exponent)
    return math.sqrt(4.0 * a2 / specfun.lambert_w0(arg))


def shape_functions(xi: float, aperture: float) -> tuple[float, float]:
    """Scale R(xi) and sharpness lambda(xi) of the aperture-edge profile."""
    x = (aperture * xi) ** 2
    if x < _SHAPE_SERIES_CUTOFF:
        # 2(1 - e^(-x/2)) / x and (1 - e^(-x) I0(x)) / x as series
        numerator = 1.0 - x / 4.0 + x * x / 24.0 - x**3 / 192.0
        denominator = 1.0 - 0.75 * x + (5.0 / 12.0) * x * x - (35.0 / 192.0) * x**3
        log_ratio = math.log(numerator / denominator)
        sharpness = 2.0 * specfun.bessel_i1_scaled(x) / denominator / log_ratio
    else:
        numerator = -2.0 * math.expm1(-0.5 * x)
        denominator = 1.0 - specfun.bessel_i0_scaled(x)
        log_ratio = math.log(numerator / denominator)
        sharpness = 2.0 * x * specfun.bessel_i1_scaled(x) / denominator / log_ratio
    scale = math.exp(-math.log(log_ratio) / sharpness)
    return scale, sharpness


def _edge_profile(base: float, sharpness: float) -> float:
    # exp(-base**sharpness) without overflowing the inner power
    if base <= 0.0:
        return 1.0
    exponent = sharpness * math.log(base)
    if exponent > 700.0:
        return 0.0
    return math.exp(-math.exp(exponent))


def centered_transmittance(w1: float, w2: float, aperture: float) -> float:
    """Transmittance of a centered elliptic spot through the aperture."""
    a2 = aperture * aperture
    u = a2 * (1.0 / w1**2 - 1.0 / w2**2)
    v = a2 * (1.0 / w1**2 + 1.0 / w2**2)
    symmetric_part = specfun.bessel_i0_scaled(u) * math.exp(abs(u) - v)
    xi = 1.0 / w1 - 1.0 / w2
    if abs(xi) * aperture < _DEGENERATE_TOL:
        asymmetry = 0.0
    else:
        scale, sharpness = shape_functions(xi, aperture)
        base = ((w1 + w2) ** 2 / abs(w1**2 - w2**2)) / scale
        asymmetry = (
            2.0
            * -math.expm1(-0.5 * a2 * xi * xi)
            * _edge_profile(base, sharpness)
        )
    return 1.0 - symmetric_part - asymmetry


def aperture_transmittance(
    sample: BeamSample, derived: DerivedBeamParams, aperture: float
) -> float:
    """Intensity transmittance eta of one beam realization, clamped to [0, 1].

    Raises ChannelModelError when the unclamped value exceeds [0, 1] by more
    than floating-point noise.
    """
    w1, w2 = spot_radii(derived, sample)
    eta0 = centered_transmittance(w1, w2, aperture)
    r0 = math.hypot(sample.x0, sample.y0)
    if r0 == 0.0:
        pointing = 1.0
    else:
        w_eff = effective_spot_radius(w1, w2, sample.chi, aperture)
        scale, sharpness = shape_functions(2.0 / w_eff, aperture)
        pointing = _edge_profile((r0 / aperture) / scale, sharpness)
    eta = eta0 * pointing
    if eta > 1.0 + _CLAMP_TOL_HIGH or eta < -_CLAMP_TOL_LOW:
        raise ChannelModelError(
            f"transmittance {eta!r} outside [0, 1] beyond tolerance "
            f"(spot {w1:.4g}/{w2:.4g} m, offset {r0:.4g} m)"
        )
    return min(max(eta, 0.0), 1.0)


def _transmittance_at(
    index: int,
    seed: int,
    derived: DerivedBeamParams,
    params: EllipticBeamParams,
) -> float:
    rng = beam_substream(seed, index)
    sample = sample_beam(derived, rng)
    try:
        eta = aperture_transmittance(sample, derived, params.aperture)
    except ChannelModelError as exc:
        raise ChannelModelError(f"sample {index}: {exc}") from exc
    return math.sqrt(params.eta_m * eta)


def sample_transmittance_ensemble(
    params: EllipticBeamParams,
    n: int,
    seed: int,
    spot_sign: int = SPOT_EXPANDING,
    threads: int = 1,
) -> TransmittanceEnsemble:
    """Draw n amplitude-transmission samples T = sqrt(eta_m * eta).

    Bit-reproducible for fixed (seed, params, n) whatever the thread count,
    because sample i only ever reads the substream keyed by (seed, i).
    """
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    if seed < 0:
        raise ValueError(f"seed must be >= 0, got {seed}")
    derived = derive_params(params, spot_sign=spot_sign)
    values = np.empty(n)

    def fill(lo: int, hi: int) -> None:
        for i in range(lo, hi):
            values[i] = _transmittance_at(i, seed, derived, params)

    if threads <= 1:
        fill(0, n)
    else:
        chunk = -(-n // threads)
        bounds = [(lo, min(lo + chunk, n)) for lo in range(0, n, chunk)]
        with ThreadPoolExecutor(max_workers=threads) as pool:
            for future in [pool.submit(fill, lo, hi) for lo, hi in bounds]:
                future.result()
    return TransmittanceEnsemble(
        samples=values, seed=seed, params=params, spot_sign=spot_sign
    )


def empirical_pdt(ensemble: TransmittanceEnsemble, bins: int) -> EmpiricalPdt:
    """Normalized histogram of the transmission samples over [0, 1]."""
    if bins < 2:
        raise ValueError(f"bins must be >= 2, got {bins}")
    counts, edges = np.histogram(ensemble.samples, bins=bins, range=(0.0, 1.0))
    return EmpiricalPdt(bin_edges=edges, probabilities=counts / ensemble.samples.size)


def exceedance(ensemble: TransmittanceEnsemble, t_min: float) -> float:
    """Fraction of samples with T >= t_min (the postselection efficiency)."""
    if not 0.0 <= t_min <= 1.0:
        raise ValueError(f"t_min must lie in [0, 1], got {t_min}")
    return int(np.count_nonzero(ensemble.samples >= t_min)) / ensemble.samples.size


def fraction_below(ensemble: TransmittanceEnsemble, t_min: float) -> float:
    """Complement of the exceedance: fraction of samples with T < t_min."""
    if not 0.0 <= t_min <= 1.0:
        raise ValueError(f"t_min must lie in [0, 1], got {t_min}")
    return int(np.count_nonzero(ensemble.samples < t_min)) / ensemble.samples.size


def params_hash(params: EllipticBeamParams) -> str:
    """Hash of the channel constants, for provenance headers."""
    text = ",".join(
        repr(getattr(params, name))
        for name in ("wavelength", "w0", "length", "aperture", "eta_m", "cn2")
    )
    return hashlib.sha256(text.encode()).hexdigest()


def ensemble_hash(ensemble: TransmittanceEnsemble) -> str:
    """Content hash of the sample values."""
    return hashlib.sha256(np.ascontiguousarray(ensemble.samples).tobytes()).hexdigest()


def ensemble_to_csv(ensemble: TransmittanceEnsemble) -> str:
    """One amplitude transmission per line, with a provenance header."""
    lines = [
        f"# seed={ensemble.seed} n={ensemble.samples.size} "
        f"spot_sign={ensemble.spot_sign:+d} params_sha256={params_hash(ensemble.params)}",
        "transmission",
    ]
    lines.extend(f"{t:.17g}" for t in ensemble.samples)
    return "\n".join(lines) + "\n"


def postselected(
    ensemble: TransmittanceEnsemble, mask: np.ndarray, efficiency: float
) -> TransmittanceEnsemble:
    """Ensemble restricted to ``mask``, with the efficiency bookkeeping."""
    return replace(
        ensemble,
        samples=ensemble.samples[mask],
        selection_efficiency=ensemble.selection_efficiency * efficiency,
    )
