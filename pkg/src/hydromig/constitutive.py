"""van Genuchten-Mualem capillary pressure and mobility laws.

All functions accept scalars or numpy arrays. Saturation-dependent
quantities are written in terms of the gas saturation ``S_g`` through the
gas-side effective saturation ``u = 1 - S_le`` so that the region near
liquid saturation (``S_g -> 0``), where the physics happens, is evaluated
without cancellation.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Lower bound on the effective liquid saturation; p_c diverges at S_le = 0.
EPS_SAT = 1e-9


@dataclass(frozen=True)
class RockParams:
    """Per-subdomain rock description.

    Attributes
    ----------
    k : intrinsic permeability [m^2]
    phi : porosity [-]
    P_r : vGM pressure scale [Pa]
    n : vGM exponent [-]; ``m = 1 - 1/n``
    S_lr, S_gr : residual liquid / gas saturations [-]
    """

    k: float
    phi: float
    P_r: float
    n: float
    S_lr: float
    S_gr: float = 0.0
    name: str = field(default="", compare=False)

    def __post_init__(self):
        if not self.k > 0:
            raise ValueError(f"permeability must be positive, got k={self.k}")
        if not 0 < self.phi < 1:
            raise ValueError(f"porosity must lie in (0, 1), got phi={self.phi}")
        if not self.P_r > 0:
            raise ValueError(f"P_r must be positive, got {self.P_r}")
        if not self.n > 1:
            raise ValueError(f"vGM exponent n must exceed 1, got n={self.n}")
        if self.S_lr < 0 or self.S_gr < 0 or self.S_lr + self.S_gr >= 1:
            raise ValueError(
                f"residual saturations need S_lr, S_gr >= 0 and S_lr + S_gr < 1 "
                f"(got {self.S_lr}, {self.S_gr})"
            )

    @property
    def m(self) -> float:
        return 1.0 - 1.0 / self.n

    @property
    def mobile_range(self) -> float:
        return 1.0 - self.S_lr - self.S_gr

    @property
    def S_g_max(self) -> float:
        """Gas saturation at which S_le reaches EPS_SAT."""
        return self.S_gr + (1.0 - EPS_SAT) * self.mobile_range


def effective_saturation(S_l, rock: RockParams):
    """Effective liquid saturation, clamped to [0, 1]."""
    S_le = (np.asarray(S_l, dtype=float) - rock.S_lr) / rock.mobile_range
    return np.clip(S_le, 0.0, 1.0)[()]


def _gas_effective(S_g, rock: RockParams):
    # u = 1 - S_le, computed from S_g directly
    u = (np.asarray(S_g, dtype=float) - rock.S_gr) / rock.mobile_range
    return np.clip(u, 0.0, 1.0)


def _check_range(S_g, rock: RockParams):
    if np.any(np.asarray(S_g) > rock.S_g_max):
        raise ValueError(
            f"gas saturation beyond {rock.S_g_max:.12g}: capillary pressure "
            "overflows as S_le -> 0"
        )


def pc(S_g, rock: RockParams):
    """Capillary pressure p_g - p_l [Pa]; zero entry pressure."""
    _check_range(S_g, rock)
    u = _gas_effective(S_g, rock)
    # S_le^(-1/m) - 1 without cancellation near S_le = 1
    w = np.expm1(-np.log1p(-u) / rock.m)
    return (rock.P_r * w ** (1.0 / rock.n))[()]


def dpc_dSg(S_g, rock: RockParams):
    """Analytic derivative of :func:`pc` with respect to S_g [Pa].

    Infinite at S_le = 1 (vGM has p_c ~ u^(1/n) there), zero on the flat
    part S_g < S_gr.
    """
    _check_range(S_g, rock)
    S_g = np.asarray(S_g, dtype=float)
    u = _gas_effective(S_g, rock)
    n, m = rock.n, rock.m
    log_sle = np.log1p(-u)
    w = np.expm1(-log_sle / m)
    with np.errstate(divide="ignore", invalid="ignore"):
        d = (rock.P_r / (n * m * rock.mobile_range)) * w ** (1.0 / n - 1.0) * np.exp(
            -(1.0 / m + 1.0) * log_sle
        )
    d = np.where(u <= 0.0, np.inf, d)
    d = np.where(S_g < rock.S_gr, 0.0, d)
    return d[()]


def pc_inverse_analytic(pi, rock: RockParams):
    """Closed-form vGM inverse: gas saturation with p_c(S_g) = pi.

    Returns 0 for pi <= 0 and clamps to ``rock.S_g_max``.
    """
    pi = np.asarray(pi, dtype=float)
    x = np.where(pi > 0, pi / rock.P_r, 0.0) ** rock.n
    # u = 1 - (1 + x)^(-m)
    u = -np.expm1(-rock.m * np.log1p(x))
    u = np.minimum(u, 1.0 - EPS_SAT)
    S_g = np.where(pi > 0, rock.S_gr + u * rock.mobile_range, 0.0)
    return S_g[()]


def mobilities(S_l, rock: RockParams, mu_l: float, mu_g: float):
    """Phase mobilities (lambda_l, lambda_g) [1/(Pa s)] at liquid saturation S_l."""
    S_g = 1.0 - np.asarray(S_l, dtype=float)
    return mobilities_from_gas(S_g, rock, mu_l, mu_g)


def mobilities_from_gas(S_g, rock: RockParams, mu_l: float, mu_g: float):
    u = _gas_effective(S_g, rock)
    m = rock.m
    with np.errstate(divide="ignore"):
        log_sle = np.log1p(-u)
        # 1 - S_le^(1/m), accurate near S_le = 1
        v = -np.expm1(log_sle / m)
        lam_l = np.sqrt(1.0 - u) * (1.0 - np.exp(m * np.log(v))) ** 2 / mu_l
        lam_g = np.sqrt(u) * np.exp(2.0 * m * np.log(v)) / mu_g
    # exact limits at the endpoints
    lam_l = np.where(u <= 0.0, 1.0 / mu_l, np.where(u >= 1.0, 0.0, lam_l))
    lam_g = np.where(u <= 0.0, 0.0, np.where(u >= 1.0, 1.0 / mu_g, lam_g))
    return lam_l[()], lam_g[()]
