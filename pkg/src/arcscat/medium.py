"""Material parameters of the Biot thermoelastic medium and derived constants.

Everything here is an immutable value object; the helpers are cheap and
deterministic so callers recompute rather than cache.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

from .errors import ConfluentWavenumbersError

CONFLUENCE_RTOL = 1e-10


@dataclass(frozen=True)
class MediumParams:
    """Lamé moduli, density, thermal diffusivity, coupling constants, frequency.

    Defaults are the benchmark medium (rho=mu=kappa=1, lambda=2, eta=0.2,
    gamma=0.1); only ``omega`` has to be supplied.
    """

    omega: float
    lam: float = 2.0
    mu: float = 1.0
    rho: float = 1.0
    kappa: float = 1.0
    gamma: float = 0.1
    eta: float = 0.2

    def __post_init__(self):
        for name in ("omega", "lam", "mu", "rho", "kappa", "gamma", "eta"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if self.mu <= 0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.lam + self.mu <= 0:
            raise ValueError(f"lambda + mu must be positive, got {self.lam + self.mu}")
        if self.rho <= 0:
            raise ValueError(f"rho must be positive, got {self.rho}")
        if self.kappa <= 0:
            raise ValueError(f"kappa must be positive, got {self.kappa}")
        if self.omega <= 0:
            raise ValueError(f"omega must be positive, got {self.omega}")

    @property
    def lam2mu(self) -> float:
        return self.lam + 2.0 * self.mu

    def replace(self, **changes) -> "MediumParams":
        fields = dict(
            omega=self.omega, lam=self.lam, mu=self.mu, rho=self.rho,
            kappa=self.kappa, gamma=self.gamma, eta=self.eta,
        )
        fields.update(changes)
        return MediumParams(**fields)


@dataclass(frozen=True)
class WaveNumbers:
    kp: float
    ks: float
    q: complex
    epsilon: float
    k1: complex
    k2: complex

    @property
    def delta(self) -> complex:
        """k1**2 - k2**2, the denominator of every coupled kernel."""
        return self.k1 ** 2 - self.k2 ** 2


@dataclass(frozen=True)
class SpectralConstants:
    c_lm: float
    c1_lm: float
    c2_lm: float
    cluster_a: complex
    cluster_b: complex


@dataclass(frozen=True)
class RegularizationConstants:
    c1: complex
    c2: complex
    c3: complex


def compute_wavenumbers(m: MediumParams) -> WaveNumbers:
    """Longitudinal/transverse wavenumbers and the coupled pair k1, k2.

    k1**2 and k2**2 are the roots of z**2 - (q(1+eps) + kp**2) z + q kp**2;
    principal square roots give Re k > 0 and Im k > 0 because q is purely
    imaginary with positive imaginary part. k1 is the root with the larger
    real part.
    """
    kp = m.omega * math.sqrt(m.rho / m.lam2mu)
    ks = m.omega * math.sqrt(m.rho / m.mu)
    q = 1j * m.omega / m.kappa
    eps = m.gamma * m.eta * m.kappa / m.lam2mu

    b = q * (1.0 + eps) + kp ** 2
    c = q * kp ** 2
    disc = cmath.sqrt(b * b - 4.0 * c)
    # pick the sign that avoids cancellation, recover the other root via Vieta
    z1 = 0.5 * (b + disc) if abs(b + disc) >= abs(b - disc) else 0.5 * (b - disc)
    z2 = c / z1
    ka, kb = cmath.sqrt(z1), cmath.sqrt(z2)
    k1, k2 = (ka, kb) if ka.real >= kb.real else (kb, ka)

    scale = max(abs(k1) ** 2, abs(k2) ** 2)
    if abs(k1 ** 2 - k2 ** 2) < CONFLUENCE_RTOL * scale:
        raise ConfluentWavenumbersError("confluent wavenumbers: k1**2 == k2**2")
    return WaveNumbers(kp=kp, ks=ks, q=q, epsilon=eps, k1=k1, k2=k2)


def spectral_constants(m: MediumParams) -> SpectralConstants:
    """Cluster points -1/4 and -1/4 + C**2 with C = mu / (2 (lambda + 2 mu))."""
    c_lm = m.mu / (2.0 * m.lam2mu)
    c1_lm = (m.lam + 3.0 * m.mu) / (2.0 * m.mu * m.lam2mu)
    c2_lm = 2.0 * m.mu * (m.lam + m.mu) / m.lam2mu
    return SpectralConstants(
        c_lm=c_lm,
        c1_lm=c1_lm,
        c2_lm=c2_lm,
        cluster_a=complex(-0.25),
        cluster_b=complex(-0.25 + c_lm ** 2),
    )


def regularization_constants(m: MediumParams, w: WaveNumbers | None = None) -> RegularizationConstants:
    if w is None:
        w = compute_wavenumbers(m)
    delta = w.delta
    if abs(delta) < CONFLUENCE_RTOL * max(abs(w.k1) ** 2, abs(w.k2) ** 2):
        raise ConfluentWavenumbersError("confluent wavenumbers: k1**2 == k2**2")
    L = m.lam2mu
    iweg = 1j * m.omega * m.eta * m.gamma
    k1s, k2s, kps = w.k1 ** 2, w.k2 ** 2, w.kp ** 2
    c1 = (iweg * (kps + k1s) - k1s * (k1s - w.q) * L) / delta
    c2 = (iweg * (kps + k2s) - k2s * (k2s - w.q) * L) / delta
    c3 = 2.0 * m.mu / delta * (iweg / L - k2s + w.q)
    return RegularizationConstants(c1=c1, c2=c2, c3=c3)
