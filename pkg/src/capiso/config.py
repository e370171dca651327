"""Run configuration: a plain ``key = value`` file with dotted keys.

Blank lines and ``#`` comments are ignored.  Lists are comma separated.
Every key has a default (see ``DEFAULTS``); unknown keys are errors.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import pi
from pathlib import Path

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config", "parse_config"]


class ConfigError(ValueError):
    """Invalid configuration (unknown key, bad value or violated precondition)."""


def _floats(text: str) -> list:
    return [float(_angle(t)) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list:
    return [int(t) for t in text.split(",") if t.strip()]


def _angle(text: str) -> float:
    """Float, also accepting ``pi``, ``pi/k`` and ``k*pi/m``."""
    t = text.strip().replace(" ", "")
    if "pi" not in t:
        return float(t)
    num, _, den = t.partition("/")
    num = num.replace("*pi", "").replace("pi", "") or "1"
    return float(num) * pi / (float(den) if den else 1.0)


def _bool(text: str) -> bool:
    t = text.strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (parser, default, description)
DEFAULTS = {
    "n": (_ints, [2, 3], "dimensions to run"),
    "lambda": (_floats, [-0.5, 0.0, 0.5], "capillarity parameters in (-1, 1)"),
    "seed": (int, 0, "master seed"),
    "out": (str, "capiso-out", "output directory"),
    "grid.resolution": (int, 128, "polar intervals"),
    "grid.azimuth": (int, 64, "azimuthal nodes for translation searches (n = 3)"),
    "identities.ensemble": (int, 50, "random graphs per (n, lambda)"),
    "identities.amplitude": (float, 0.15, "relative size of the random graph perturbations"),
    "fuglede.s_list": (_floats, [1e-3, 1.78e-3, 3.16e-3, 5.62e-3, 1e-2, 1.78e-2, 3.16e-2,
                                 5.62e-2, 1e-1], "expansion amplitudes"),
    "fuglede.ensemble": (int, 50, "chain and strong-probe ensemble size"),
    "fuglede.cap": (float, 0.05, "C^1 cap of chain perturbations"),
    "fuglede.strong_cap": (_floats, [0.01, 0.5], "C^1 range of strong-probe perturbations"),
    "fuglede.stability": (float, 0.05, "allowed relative change of max ratios under doubling"),
    "sharpness.t_list": (_floats, [1e-3, 2.15e-3, 4.64e-3, 1e-2, 2.15e-2, 4.64e-2, 1e-1],
                         "family parameters in (0, 0.1]"),
    "sharpness.samples": (int, 1_000_000, "Monte Carlo pairs"),
    "sharpness.ensemble": (int, 50, "random axisymmetric graphs for the factor-20 bound"),
    "select.k_list": (_ints, [16, 32, 64, 128, 256, 512], "penalty parameters"),
    "select.Lambda": (float, 0.0, "volume penalty (0 selects 4n)"),
    "select.max_iters": (int, 5000, "iteration cap"),
    "select.tol": (float, 1e-8, "relative gradient tolerance"),
    "select.gradient": (str, "analytic", "analytic or finite-difference"),
    "select.resolution": (int, 128, "polar intervals for the optimizer"),
    "cone.omega": (_floats, [pi / 6, pi / 4, pi / 3, pi / 2], "cone half-angles in (0, pi/2]"),
    "oracle.samples": (int, 1_000_000, "Monte Carlo points per estimate"),
    "oracle.sigmas": (float, 3.0, "agreement band in standard errors"),
    "eval.graph": (str, "bubble", "bubble, perturbed or a path to a file of nodal values"),
    "eval.coeffs": (_floats, [0.1, -0.05, 0.02], "zonal Fourier coefficients for 'perturbed'"),
    "eval.target": (str, "capillarity", "capillarity or cone"),
    "plot": (_bool, True, "write plot.svg"),
}


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: v[1] for k, v in DEFAULTS.items()})

    def __getitem__(self, key: str):
        return self.values[key]

    def with_overrides(self, **kw) -> "RunConfig":
        v = dict(self.values)
        for k, val in kw.items():
            v[k.replace("__", ".")] = val
        cfg = RunConfig(v)
        cfg.validate()
        return cfg

    @property
    def params(self) -> list:
        from .geometry import CapParams

        return [CapParams(n, lam) for n in self["n"] for lam in self["lambda"]]

    def validate(self) -> None:
        v = self.values
        if not v["n"] or any(n < 2 for n in v["n"]):
            raise ConfigError("n must be a list of integers >= 2")
        if not v["lambda"] or any(not -1.0 < x < 1.0 for x in v["lambda"]):
            raise ConfigError("lambda values must lie in (-1, 1)")
        if v["grid.resolution"] < 16 or v["grid.resolution"] % 2:
            raise ConfigError("grid.resolution must be an even integer >= 16")
        if v["grid.azimuth"] < 8 or v["grid.azimuth"] % 2:
            raise ConfigError("grid.azimuth must be an even integer >= 8")
        for key in ("identities.ensemble", "fuglede.ensemble", "sharpness.ensemble"):
            if v[key] < 1:
                raise ConfigError(f"{key} must be positive")
        s = v["fuglede.s_list"]
        if len(s) < 5 or any(x <= 0 for x in s) or sorted(s) != s:
            raise ConfigError("fuglede.s_list needs >= 5 increasing positive values")
        if not 0 < v["fuglede.cap"] <= 0.05:
            raise ConfigError("fuglede.cap must lie in (0, 0.05]")
        lo_hi = v["fuglede.strong_cap"]
        if len(lo_hi) != 2 or not 0 < lo_hi[0] < lo_hi[1] < 1:
            raise ConfigError("fuglede.strong_cap must be 'lo, hi' with 0 < lo < hi < 1")
        t = v["sharpness.t_list"]
        if len(t) < 6 or any(x <= 0 for x in t) or t[-1] > 0.1 or sorted(t) != t:
            raise ConfigError("sharpness.t_list needs >= 6 increasing values in (0, 0.1]")
        if v["sharpness.samples"] < 1_000_000 or v["oracle.samples"] < 10_000:
            raise ConfigError("sharpness.samples >= 1e6 and oracle.samples >= 1e4 required")
        from .selection import k_lambda

        k = v["select.k_list"]
        if len(k) < 5 or sorted(k) != k:
            raise ConfigError("select.k_list needs >= 5 increasing values")
        kmin = max(k_lambda(lam) for lam in v["lambda"])
        if k[0] < kmin:
            raise ConfigError(f"select.k_list values must be >= k_lambda = {kmin}")
        if v["select.Lambda"] != 0 and v["select.Lambda"] <= 2 * max(v["n"]):
            raise ConfigError("select.Lambda must exceed 2n")
        if v["select.gradient"] not in ("analytic", "finite-difference"):
            raise ConfigError("select.gradient must be analytic or finite-difference")
        if v["select.max_iters"] < 1 or v["select.tol"] <= 0 or v["select.resolution"] < 16:
            raise ConfigError("invalid optimizer settings")
        if not v["cone.omega"] or any(not 0 < w <= pi / 2 + 1e-15 for w in v["cone.omega"]):
            raise ConfigError("cone.omega values must lie in (0, pi/2]")
        if v["oracle.sigmas"] <= 0:
            raise ConfigError("oracle.sigmas must be positive")
        if v["eval.target"] not in ("capillarity", "cone"):
            raise ConfigError("eval.target must be capillarity or cone")


def parse_config(text: str) -> RunConfig:
    cfg = RunConfig()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if key not in DEFAULTS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            cfg.values[key] = DEFAULTS[key][0](value.strip())
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key!r}: {exc}") from None
    cfg.validate()
    return cfg


def load_config(path: str | Path | None) -> RunConfig:
    if path is None:
        cfg = RunConfig()
        cfg.validate()
        return cfg
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}") from None
    return parse_config(text)
