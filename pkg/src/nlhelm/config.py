"""Experiment parameter bundle shared by the analysis drivers and the CLI."""
from dataclasses import dataclass, replace
from typing import Optional, Union

from .discretization import Grid
from .dispersion import cutoff_k0, solve_ktilde
from .kernels import Family, KernelSpec
from .pml import PmlProfile, choose_sigma0
from .source import SourceFunction

AUTO_TARGET = 1e-10
CASE_GUARD = 1e-9


def parse_sigma0(value):
    """Accept a number, 'auto' or 'auto:<target>'."""
    if isinstance(value, tuple):
        return ("auto", float(value[1]))
    if isinstance(value, (int, float)):
        if value < 0:
            raise ValueError("sigma0 must be nonnegative")
        return float(value)
    text = str(value).strip().lower()
    if text == "auto":
        return ("auto", AUTO_TARGET)
    if text.startswith("auto:"):
        target = float(text[5:])
        if not 0 < target < 1:
            raise ValueError("auto target must lie in (0, 1)")
        return ("auto", target)
    return parse_sigma0(float(text))


@dataclass(frozen=True)
class ExperimentConfig:
    kernel: Family = Family.EXPONENTIAL
    delta: float = 1.0 / 16
    k: float = 1.6
    l: float = 10.0
    d: float = 10.0
    sigma0: Union[float, tuple] = ("auto", AUTO_TARGET)
    h: Optional[float] = None
    case: str = "auto"
    source_support: Optional[float] = None  # None: cut off at l
    unmodified_kernel: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kernel", Family.parse(self.kernel))
        object.__setattr__(self, "sigma0", parse_sigma0(self.sigma0))
        for name in ("delta", "k", "l", "d"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.h is not None:
            if not self.h > 0:
                raise ValueError("h must be positive")
            Grid.build(self.h, self.l, self.d, self.kernel_spec())
        if self.case not in ("auto", "case1", "case2"):
            raise ValueError("case must be auto, case1 or case2")

    def with_(self, **changes):
        return replace(self, **changes)

    def kernel_spec(self):
        return KernelSpec(self.kernel, self.delta)

    def dispersion(self):
        return solve_ktilde(self.kernel_spec(), self.k)

    def select_case(self):
        if self.case != "auto":
            return self.case
        k0 = cutoff_k0(self.kernel_spec())
        if abs(self.k - k0) <= CASE_GUARD * k0:
            raise ValueError(f"k={self.k} is within the guard band of k0={k0}; pass --case")
        return "case1" if self.k < k0 else "case2"

    def decay_amplitude(self):
        if self.kernel is Family.EXPONENTIAL:
            return 1.0 / (1.0 - (self.delta * self.k) ** 2) ** 2
        return 1.0

    def sigma0_value(self):
        if isinstance(self.sigma0, float):
            return self.sigma0
        if self.select_case() == "case2":
            return 0.0
        kt = self.dispersion().ktilde
        return choose_sigma0(kt.real, self.d, self.sigma0[1], self.decay_amplitude())

    def pml(self):
        return PmlProfile(self.l, self.d, self.sigma0_value())

    def source(self):
        support = self.l if self.source_support is None else self.source_support
        return SourceFunction.gaussian_narrow(self.k, support=support)

    def grid(self, h=None):
        return Grid.build(h or self.h, self.l, self.d, self.kernel_spec())

    def describe(self):
        return {"k": self.k, "delta": self.delta, "sigma0": self.sigma0_value(), "d": self.d,
                "kernel": self.kernel.value, "case": self.select_case()}


CONFIG_KEYS = {f for f in ExperimentConfig.__dataclass_fields__}


def read_config_file(path):
    """Parse ``key = value`` lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value'")
            key, value = (p.strip() for p in line.split("=", 1))
            key = key.replace("-", "_")
            if key not in CONFIG_KEYS and key not in ("output",):
                raise ValueError(f"{path}:{lineno}: unknown key {key!r}")
            out[key] = value
    return out
