"""Constitutive data and evolution matrices for plane waves with time-dependent amplitude.

With ``u = Re{u(t) exp(i k n.x)}`` and ``nu = Re{nu(t) exp(i k n.x)}`` the
phonon/phason balance laws reduce to ``dq/dt = A q``.  ``A`` is 6x6 when the
phason field can be eliminated algebraically (no self-action, or a purely
conservative one) and 9x9 when phason friction keeps ``nu`` as a state.

All quantities are SI internally: Pa, Pa/m^2, Pa*s/m^2, kg/m^3, 1/m.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
import math
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

import numpy as np

from .errors import ConfigError, InadmissibleParametersError, SingularConfigurationError
from .units import parse_quantity

__all__ = [
    "GPA",
    "QC_MATERIAL",
    "SelfActionMode",
    "ConstitutiveParams",
    "DerivedCoefficients",
    "WaveConfig",
    "SystemMatrix",
    "Violation",
    "derive_coefficients",
    "check_energy_positivity",
    "require_admissible",
    "build_K",
    "build_K123",
    "assemble_system",
    "quasicrystal_params",
    "params_from_mapping",
    "params_to_mapping",
    "load_params",
    "PARAM_NAMES",
]

GPA = 1e9

# Lame constants, phason stiffness combinations and density used for the quasicrystal runs
QC_MATERIAL = {
    "lam": 85 * GPA,
    "mu": 65 * GPA,
    "zeta": 0.044 * GPA,
    "gamma": 0.0198 * GPA,
    "rho": 5100.0,
}

DEFAULT_K2P_FRACTION = 0.1


class SelfActionMode(str, Enum):
    NONE = "none"
    CONSERVATIVE = "conservative"
    DISSIPATIVE = "dissipative"
    COMPLETE = "complete"

    @property
    def size(self) -> int:
        return 6 if self in (SelfActionMode.NONE, SelfActionMode.CONSERVATIVE) else 9

    @property
    def has_friction(self) -> bool:
        return self.size == 9

    @classmethod
    def parse(cls, text: "str | SelfActionMode") -> "SelfActionMode":
        if isinstance(text, cls):
            return text
        key = str(text).strip().lower().replace("-", "").replace("_", "")
        aliases = {
            "none": cls.NONE, "no": cls.NONE, "noselfaction": cls.NONE,
            "conservative": cls.CONSERVATIVE,
            "dissipative": cls.DISSIPATIVE,
            "complete": cls.COMPLETE, "full": cls.COMPLETE,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown self-action mode {text!r}") from None


@dataclass(frozen=True)
class DerivedCoefficients:
    """Combinations of the energy coefficients that enter the balance equations."""

    xi: float     # lambda + mu
    alpha: float  # k3 + k3'/2
    zeta: float   # k2 + k2'
    gamma: float  # k1 + k2 - k2'
    chi: float    # k3'/2


@dataclass(frozen=True)
class ConstitutiveParams:
    """Raw coefficients of the quadratic free energy plus self-action and inertia.

    ``varsigma`` (phason friction) may be ``None`` for the modes without
    friction.  ``k0 >= 0`` is left to :func:`check_energy_positivity` so that
    it can be reported like the other positivity conditions.
    """

    lam: float
    mu: float
    k1: float
    k2: float
    k2p: float
    k3: float
    k3p: float
    k0: float = 0.0
    varsigma: float | None = None
    rho: float = QC_MATERIAL["rho"]

    def __post_init__(self):
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is not None and not math.isfinite(v):
                raise ValueError(f"{f.name} must be finite, got {v}")
        if not self.rho > 0:
            raise ValueError(f"mass density must be positive, got {self.rho}")
        if self.varsigma is not None and not self.varsigma > 0:
            raise ValueError(f"phason friction must be positive, got {self.varsigma}")

    @classmethod
    def from_derived(cls, lam, mu, chi, alpha, zeta, gamma, k0=0.0, varsigma=None,
                     rho=QC_MATERIAL["rho"], k2p_fraction=DEFAULT_K2P_FRACTION):
        """Raw coefficients reproducing the given ``(chi, alpha, zeta, gamma)``.

        The split of ``zeta`` into ``k2 + k2'`` is not fixed by the balance
        equations; ``k2' = k2p_fraction * zeta``.  The default 0.1 keeps the
        whole coupling range 0 <= chi <= 1.5 GPa (alpha = 0) energy-admissible
        for the quasicrystal data.
        """
        k3p = 2.0 * chi
        k3 = alpha - chi
        k2p = k2p_fraction * zeta
        k2 = zeta - k2p
        k1 = gamma - k2 + k2p
        return cls(lam=lam, mu=mu, k1=k1, k2=k2, k2p=k2p, k3=k3, k3p=k3p,
                   k0=k0, varsigma=varsigma, rho=rho)

    @classmethod
    def from_gpa(cls, **kwargs):
        """Construct from GPa-valued stiffnesses (``k0`` in GPa/m^2, ``varsigma`` in GPa*s/m^2).

        ``rho`` stays in kg/m^3.  Accepts raw fields or the derived set
        ``chi, alpha, zeta, gamma`` (routed to :meth:`from_derived`).
        """
        out = {}
        for key, value in kwargs.items():
            scale = 1.0 if key in ("rho", "k2p_fraction") or value is None else GPA
            out[key] = None if value is None else value * scale
        if "chi" in out:
            return cls.from_derived(**out)
        return cls(**out)

    @property
    def derived(self) -> DerivedCoefficients:
        return derive_coefficients(self)

    @property
    def phi(self) -> float | None:
        return None if self.varsigma is None else math.log(self.varsigma)

    def with_value(self, name: str, value: float) -> "ConstitutiveParams":
        """Copy with one named parameter changed (raw, derived, ``phi`` or alias)."""
        name = _canonical(name)
        if name in ("lam", "mu", "k1", "k2", "k2p", "k3", "k3p", "k0", "varsigma", "rho"):
            return dataclasses.replace(self, **{name: value})
        if name == "phi":
            return dataclasses.replace(self, varsigma=math.exp(value))
        d = self.derived
        if name == "chi":
            return dataclasses.replace(self, k3p=2.0 * value, k3=d.alpha - value)
        if name == "alpha":
            return dataclasses.replace(self, k3=value - d.chi)
        if name == "zeta":
            frac = self.k2p / d.zeta if d.zeta != 0 else DEFAULT_K2P_FRACTION
            k2p = frac * value
            k2 = value - k2p
            return dataclasses.replace(self, k2p=k2p, k2=k2, k1=d.gamma - k2 + k2p)
        if name == "gamma":
            return dataclasses.replace(self, k1=value - self.k2 + self.k2p)
        raise KeyError(f"unknown parameter {name!r}")

    def value_of(self, name: str) -> float | None:
        name = _canonical(name)
        if name == "phi":
            return self.phi
        if name in ("chi", "alpha", "zeta", "gamma", "xi"):
            return getattr(self.derived, name)
        return getattr(self, name)


PARAM_NAMES = ("lambda", "mu", "k1", "k2", "k2p", "k3", "k3p", "k0", "varsigma", "phi",
               "rho", "chi", "alpha", "zeta", "gamma")

_ALIASES = {"lambda": "lam", "k2'": "k2p", "k3'": "k3p", "sigma": "varsigma"}


def _canonical(name: str) -> str:
    return _ALIASES.get(name, name)


def derive_coefficients(p: ConstitutiveParams) -> DerivedCoefficients:
    return DerivedCoefficients(
        xi=p.lam + p.mu,
        alpha=p.k3 + 0.5 * p.k3p,
        zeta=p.k2 + p.k2p,
        gamma=p.k1 + p.k2 - p.k2p,
        chi=0.5 * p.k3p,
    )


# --------------------------------------------------------------------------
# energy positivity


@dataclass(frozen=True)
class Violation:
    """A failed positivity condition; ``margin`` is the signed slack (<= 0 here)."""

    name: str
    lhs: float
    rhs: float
    margin: float

    def __str__(self):
        return f"{self.name} violated: lhs={self.lhs:.6g}, rhs={self.rhs:.6g}, margin={self.margin:.6g}"


def _sqrt_or_nan(x: float) -> float:
    return math.sqrt(x) if x >= 0 else math.nan


def check_energy_positivity(p: ConstitutiveParams) -> list[Violation]:
    """Conditions for the free energy to be non-negative definite.

    Strictness follows the published list (all strict except ``k0 >= 0``).
    An empty list means the point is admissible.
    """
    checks = [
        ("mu > 0", p.mu, 0.0, ">"),
        ("k2 > 0", p.k2, 0.0, ">"),
        ("2k2 + 3k1 > 0", 2 * p.k2 + 3 * p.k1, 0.0, ">"),
        ("k2' > 0", p.k2p, 0.0, ">"),
        ("k3' < 2 sqrt(mu k2)", p.k3p, 2.0 * _sqrt_or_nan(p.mu * p.k2), "<"),
        ("3k3 + k3' < sqrt((2mu + 3lambda)(2k2 + 3k1))", 3 * p.k3 + p.k3p,
         _sqrt_or_nan((2 * p.mu + 3 * p.lam) * (2 * p.k2 + 3 * p.k1)), "<"),
        ("k0 >= 0", p.k0, 0.0, ">="),
    ]
    out = []
    for name, lhs, rhs, op in checks:
        margin = rhs - lhs if op == "<" else lhs - rhs
        ok = margin >= 0 if op == ">=" else margin > 0
        if not ok:  # nan margins land here too
            out.append(Violation(name, float(lhs), float(rhs), float(margin)))
    return out


def require_admissible(p: ConstitutiveParams, allow_inadmissible: bool = False, value=None):
    violations = check_energy_positivity(p)
    if violations and not allow_inadmissible:
        raise InadmissibleParametersError(violations, value)
    return violations


# --------------------------------------------------------------------------
# wave and assembly


@dataclass(frozen=True)
class WaveConfig:
    k: float = 1.0
    n: tuple[float, float, float] = (1.0, 0.0, 0.0)

    def __post_init__(self):
        if not (math.isfinite(self.k) and self.k > 0):
            raise ValueError(f"wavenumber must be positive, got {self.k}")
        n = tuple(float(c) for c in self.n)
        if len(n) != 3:
            raise ValueError("propagation direction must have 3 components")
        if abs(math.sqrt(sum(c * c for c in n)) - 1.0) > 1e-12:
            raise ValueError(f"propagation direction {n} is not a unit vector")
        object.__setattr__(self, "n", n)

    @classmethod
    def along(cls, direction, k: float = 1.0) -> "WaveConfig":
        v = np.asarray(direction, dtype=float)
        return cls(k=k, n=tuple(v / np.linalg.norm(v)))

    @property
    def nn(self) -> np.ndarray:
        v = np.asarray(self.n)
        return np.outer(v, v)


def _check_denominator(value: float, scale: float, label: str):
    if value == 0.0 or abs(value) <= 1e-14 * scale:
        raise SingularConfigurationError(f"{label} vanishes ({value!r})")


def _iso(a: float, b: float, nn: np.ndarray) -> np.ndarray:
    return a * np.eye(3) + b * nn


def build_K(mode, p: ConstitutiveParams, d: DerivedCoefficients, w: WaveConfig) -> np.ndarray:
    """Reduced acoustic tensor for the modes where the phason field is slaved to ``u``."""
    mode = SelfActionMode.parse(mode)
    k2 = w.k * w.k
    chi, alpha, zeta, gamma = d.chi, d.alpha, d.zeta, d.gamma
    scale = abs(zeta) + abs(gamma)
    if mode is SelfActionMode.NONE:
        _check_denominator(zeta, scale, "zeta")
        _check_denominator(zeta + gamma, scale, "zeta + gamma")
        a = p.mu - chi**2 / zeta
        b = p.lam + p.mu - (alpha + chi) ** 2 / (zeta + gamma) + chi**2 / zeta
    elif mode is SelfActionMode.CONSERVATIVE:
        den1 = p.k0 + zeta * k2
        den2 = p.k0 + (zeta + gamma) * k2
        scale = abs(p.k0) + scale * k2
        _check_denominator(den1, scale, "k0 + zeta k^2")
        _check_denominator(den2, scale, "k0 + (zeta + gamma) k^2")
        a = p.mu - chi**2 * k2 / den1
        b = p.lam + p.mu - k2 * ((alpha + chi) ** 2 / den2 - chi**2 / den1)
    else:
        raise ValueError(f"build_K applies to the 6x6 modes, not {mode.value}")
    return -(k2 / p.rho) * _iso(a, b, w.nn)


def build_K123(mode, p: ConstitutiveParams, d: DerivedCoefficients, w: WaveConfig):
    """Blocks ``(K1, K2, K3)`` of the 9x9 matrix for the modes with phason friction."""
    mode = SelfActionMode.parse(mode)
    if not mode.has_friction:
        raise ValueError(f"build_K123 applies to the 9x9 modes, not {mode.value}")
    vs = p.varsigma
    if vs is None or vs == 0.0:
        raise SingularConfigurationError("phason friction varsigma is zero or unset")
    k2 = w.k * w.k
    nn = w.nn
    K1 = -k2 * _iso(p.mu / p.rho, (p.lam + p.mu) / p.rho, nn)
    K2 = -k2 * _iso(d.chi, d.alpha, nn)
    zeta = d.zeta + p.k0 / k2 if mode is SelfActionMode.COMPLETE else d.zeta
    K3 = -k2 * _iso(zeta / vs, d.gamma / vs, nn)
    return K1, K2, K3


@dataclass(frozen=True, eq=False)
class SystemMatrix:
    """Assembled real evolution matrix together with the blocks it was built from."""

    mode: SelfActionMode
    A: np.ndarray
    blocks: dict
    params: ConstitutiveParams
    wave: WaveConfig
    derived: DerivedCoefficients

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def matrix_hash(self) -> str:
        h = hashlib.sha256()
        h.update(self.mode.value.encode())
        h.update(np.ascontiguousarray(self.A, dtype=float).tobytes())
        return h.hexdigest()[:16]

    def __array__(self, dtype=None, copy=None):
        return self.A if dtype is None else self.A.astype(dtype)


def assemble_system(mode, p: ConstitutiveParams, w: WaveConfig | None = None,
                    d: DerivedCoefficients | None = None) -> SystemMatrix:
    """Evolution matrix for ``q = [u, du/dt]`` (6x6) or ``q = [u, du/dt, nu]`` (9x9).

    ``d`` overrides :func:`derive_coefficients` when the caller works directly
    with ``(chi, alpha, zeta, gamma)``.
    """
    mode = SelfActionMode.parse(mode)
    w = WaveConfig() if w is None else w
    d = derive_coefficients(p) if d is None else d
    I3 = np.eye(3)
    if mode.size == 6:
        K = build_K(mode, p, d, w)
        A = np.zeros((6, 6))
        A[0:3, 3:6] = I3
        A[3:6, 0:3] = K
        blocks = {"K": K}
    else:
        K1, K2, K3 = build_K123(mode, p, d, w)
        A = np.zeros((9, 9))
        A[0:3, 3:6] = I3
        A[3:6, 0:3] = K1
        A[3:6, 6:9] = K2 / p.rho
        A[6:9, 0:3] = K2 / p.varsigma
        A[6:9, 6:9] = K3
        blocks = {"K1": K1, "K2": K2, "K3": K3}
    A.flags.writeable = False
    for b in blocks.values():
        b.flags.writeable = False
    return SystemMatrix(mode=mode, A=A, blocks=blocks, params=p, wave=w, derived=d)


def quasicrystal_params(chi=0.0, alpha=0.0, k0=0.0, varsigma=None, phi=None,
                 k2p_fraction=DEFAULT_K2P_FRACTION) -> ConstitutiveParams:
    """Quasicrystal data set (lambda=85, mu=65, zeta=0.044, gamma=0.0198 GPa; rho=5100) in SI.

    ``phi`` sets ``varsigma = exp(phi)`` Pa*s/m^2.
    """
    if phi is not None:
        if varsigma is not None:
            raise ValueError("give either varsigma or phi, not both")
        varsigma = math.exp(phi)
    m = QC_MATERIAL
    return ConstitutiveParams.from_derived(
        lam=m["lam"], mu=m["mu"], chi=chi, alpha=alpha, zeta=m["zeta"], gamma=m["gamma"],
        k0=k0, varsigma=varsigma, rho=m["rho"], k2p_fraction=k2p_fraction,
    )


# --------------------------------------------------------------------------
# parameter files

_QUANTITY_DIMS = {
    "lambda": "stress", "mu": "stress",
    "k1": "stress", "k2": "stress", "k2p": "stress", "k3": "stress", "k3p": "stress",
    "chi": "stress", "alpha": "stress", "zeta": "stress", "gamma": "stress",
    "k0": "stress/area", "varsigma": "friction", "rho": "density",
}
_RAW_KEYS = ("k1", "k2", "k2p", "k3", "k3p")
_DERIVED_KEYS = ("chi", "alpha", "zeta", "gamma")


def params_from_mapping(m: dict, base: ConstitutiveParams | None = None) -> ConstitutiveParams:
    """Build parameters from unit-annotated strings, e.g. ``{"chi": "0.1GPa", "phi": 19}``.

    Keys not given fall back to ``base`` (default: the quasicrystal data set
    with ``chi = alpha = k0 = 0``).  Raw (``k1 .. k3p``) and derived
    (``chi, alpha, zeta, gamma``) keys may not be mixed.
    """
    m = dict(m)
    unknown = set(m) - set(_QUANTITY_DIMS) - {"phi", "k2p_fraction"}
    if unknown:
        raise ConfigError(f"unknown parameter keys: {sorted(unknown)}")
    raw = [k for k in _RAW_KEYS if k in m]
    der = [k for k in _DERIVED_KEYS if k in m]
    if raw and der:
        raise ConfigError(f"cannot mix raw {raw} and derived {der} coefficients")
    if "phi" in m and "varsigma" in m:
        raise ConfigError("give either varsigma or phi, not both")

    si = {k: parse_quantity(v, _QUANTITY_DIMS[k]) for k, v in m.items() if k in _QUANTITY_DIMS}
    p = quasicrystal_params() if base is None else base
    if "k2p_fraction" in m:
        frac = float(m["k2p_fraction"])
        d = p.derived
        p = ConstitutiveParams.from_derived(p.lam, p.mu, d.chi, d.alpha, d.zeta, d.gamma,
                                            p.k0, p.varsigma, p.rho, k2p_fraction=frac)
    for key in ("lambda", "mu", "k0", "varsigma", "rho", *_RAW_KEYS, *_DERIVED_KEYS):
        if key in si:
            p = p.with_value(key, si[key])
    if "phi" in m:
        if isinstance(m["phi"], str):
            raise ConfigError("phi is dimensionless; give a bare number")
        p = p.with_value("phi", float(m["phi"]))
    return p


def params_to_mapping(p: ConstitutiveParams) -> dict:
    """Unit-annotated SI representation; round-trips through :func:`params_from_mapping`."""
    out = {
        "lambda": f"{p.lam!r}Pa", "mu": f"{p.mu!r}Pa",
        "k1": f"{p.k1!r}Pa", "k2": f"{p.k2!r}Pa", "k2p": f"{p.k2p!r}Pa",
        "k3": f"{p.k3!r}Pa", "k3p": f"{p.k3p!r}Pa",
        "k0": f"{p.k0!r}Pa/m^2", "rho": f"{p.rho!r}kg/m^3",
    }
    if p.varsigma is not None:
        out["varsigma"] = f"{p.varsigma!r}Pa*s/m^2"
    return out


def load_params(path) -> ConstitutiveParams:
    path = Path(path)
    try:
        data = json.loads(path.read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: expected a JSON object")
    return params_from_mapping(data)
