"""Model parameter sets for the bursting models.

Units are fixed throughout the package: mV, ms, nS, pA, pF, uM (calcium),
mM (sodium). No internal rescaling is performed anywhere.
"""
from __future__ import annotations

from dataclasses import dataclass, fields, replace


class InvalidParameterError(ValueError):
    """Raised when a parameter value violates a model precondition."""


@dataclass(frozen=True)
class ModelParams:
    """Full parameter set shared by the 7D model and its 4D reduction.

    The capacitance is written C in the parameter table and c in the voltage
    equation; it is the single field ``c`` here.
    """

    # conductances (nS)
    g_l: float
    g_na: float
    g_k: float
    g_syn: float
    g_can: float
    # reversal potentials (mV)
    e_l: float
    e_na: float
    e_k: float
    e_syn: float
    e_can: float
    # gate half-activations (mV; k_can in uM)
    theta_h: float
    theta_m: float
    theta_n: float
    theta_s: float
    k_can: float
    # gate slopes (mV; sigma_can in uM)
    sigma_h: float
    sigma_m: float
    sigma_n: float
    sigma_s: float
    sigma_can: float
    # time constants (ms)
    t_h: float
    t_m: float
    t_n: float
    tau_s: float
    # pump / scaling constants
    k_na: float     # mM
    na_b: float     # mM
    k_ca: float     # 1/ms
    ca_b: float     # uM
    k_ip3: float    # uM/ms
    # other
    c: float        # pF
    k: float        # dimensionless
    r_pump: float   # pA
    # slow rates
    eps: float
    alpha: float    # mM/(pA ms)

    def __post_init__(self):
        for name in ("g_l", "g_na", "g_k", "g_syn", "g_can"):
            if getattr(self, name) < 0:
                raise InvalidParameterError(f"{name} must be >= 0")
        if self.c <= 0:
            raise InvalidParameterError("capacitance c must be > 0")
        for name in ("t_h", "t_m", "t_n", "tau_s"):
            if getattr(self, name) <= 0:
                raise InvalidParameterError(f"{name} must be > 0")
        if self.k_na <= 0:
            raise InvalidParameterError("k_na must be > 0")
        if self.k < 0:
            raise InvalidParameterError("k must be >= 0")
        for name in ("sigma_h", "sigma_m", "sigma_n", "sigma_s", "sigma_can"):
            if getattr(self, name) == 0:
                raise InvalidParameterError(f"{name} must be nonzero")

    def override(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def to_text(self) -> str:
        """Serialize as one ``name = value`` line per parameter.

        Names follow the published parameter tables; values carry 17
        significant digits so the round trip is lossless.
        """
        lines = [f"{name} = {getattr(self, field):.17g}"
                 for field, name in _SERIAL_NAMES]
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ModelParams":
        values = {}
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise InvalidParameterError(
                    f"line {lineno}: expected 'name = value', got {raw!r}")
            name, _, val = line.partition("=")
            name = name.strip()
            if name not in _FIELD_BY_NAME:
                raise InvalidParameterError(f"line {lineno}: unknown parameter {name!r}")
            if name in values:
                raise InvalidParameterError(f"line {lineno}: duplicate parameter {name!r}")
            values[name] = float(val)
        missing = [n for _, n in _SERIAL_NAMES if n not in values]
        if missing:
            raise InvalidParameterError(f"missing parameters: {', '.join(missing)}")
        return cls(**{_FIELD_BY_NAME[n]: v for n, v in values.items()})


# (python field, serialized name) in the order of the parameter tables
_SERIAL_NAMES = [
    ("g_l", "g_L"), ("g_na", "g_Na"), ("g_k", "g_K"),
    ("g_syn", "g_syn"), ("g_can", "g_CAN"),
    ("e_l", "E_L"), ("e_na", "E_Na"), ("e_k", "E_K"),
    ("e_syn", "E_syn"), ("e_can", "E_CAN"),
    ("theta_h", "theta_h"), ("theta_m", "theta_m"), ("theta_n", "theta_n"),
    ("theta_s", "theta_s"), ("k_can", "k_CAN"),
    ("sigma_h", "sigma_h"), ("sigma_m", "sigma_m"), ("sigma_n", "sigma_n"),
    ("sigma_s", "sigma_s"), ("sigma_can", "sigma_CAN"),
    ("t_h", "t_h"), ("t_m", "t_m"), ("t_n", "t_n"), ("tau_s", "tau_s"),
    ("k_na", "k_Na"), ("na_b", "Na_b"), ("k_ca", "k_Ca"),
    ("ca_b", "Ca_b"), ("k_ip3", "k_IP3"),
    ("c", "C"), ("k", "k"), ("r_pump", "r_pump"),
    ("eps", "epsilon"), ("alpha", "alpha"),
]
_FIELD_BY_NAME = {name: field for field, name in _SERIAL_NAMES}

assert len(_SERIAL_NAMES) == len(fields(ModelParams))


FULL7D = ModelParams(
    g_l=3.0, g_na=150.0, g_k=30.0, g_syn=2.5, g_can=4.0,
    e_l=-60.0, e_na=85.0, e_k=-75.0, e_syn=0.0, e_can=0.0,
    theta_h=-30.0, theta_m=-36.0, theta_n=-30.0, theta_s=15.0, k_can=0.9,
    sigma_h=5.0, sigma_m=-8.5, sigma_n=-5.0, sigma_s=-3.0, sigma_can=-0.05,
    t_h=15.0, t_m=1.0, t_n=30.0, tau_s=15.0,
    k_na=10.0, na_b=5.0, k_ca=22.5, ca_b=0.05, k_ip3=1200.0,
    c=45.0, k=1.0, r_pump=200.0,
    eps=7e-4, alpha=6.6e-5,
)

# The reduced model keeps the 7D values except for the published overrides.
REDUCED4D = FULL7D.override(
    g_k=15.0, theta_s=10.0,
    g_can=10.0, k_can=0.25,
    sigma_s=-8.0, k_ca=60.0,
    k_ip3=1700.0,
    k=10.0, r_pump=1500.0,
    eps=0.005,
)
