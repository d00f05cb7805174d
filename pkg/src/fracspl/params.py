"""Physical and fractional constants of the single-phase-lag heat model."""

from __future__ import annotations

from dataclasses import dataclass

__all__ = ["ModelParams"]


@dataclass(frozen=True)
class ModelParams:
    """Constants of ``rho c tq D^a u_t + a tq D^a u + rho c u_t + L u = F``.

    ``tau_q_alpha`` is the lag parameter already raised to the fractional
    power, i.e. the factor ``tq = tau_q**alpha`` that multiplies the Caputo
    terms.
    """

    alpha: float
    tau_q_alpha: float
    rho: float = 1.0
    c: float = 1.0
    a: float = 0.0

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must lie in (0, 1), got {self.alpha!r}")
        for name in ("tau_q_alpha", "rho", "c"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")
        if not self.a >= 0:
            raise ValueError(f"a must be nonnegative, got {self.a!r}")

    @classmethod
    def from_tau_q(cls, alpha: float, tau_q: float, **kwargs) -> "ModelParams":
        return cls(alpha=alpha, tau_q_alpha=tau_q**alpha, **kwargs)

    @property
    def rho_c(self) -> float:
        return self.rho * self.c
