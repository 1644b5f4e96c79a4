"""Run configuration: line-oriented `key = value` files with dotted keys.

Unknown keys are rejected with the offending key named. `resolve` returns the
fully materialized key/value mapping (defaults filled in) used for the config
echo written beside every run; its sha256 is the run's config digest.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .data import SynthSpec
from .graph import NetworkSpec
from .lif import LifParams
from .optim import ADAMW, SGD_MOMENTUM, MsgConfig, OptimizerState
from .surrogate import ARCTAN, FAMILIES, PIECEWISE_LINEAR, SurrogateSpec


class ConfigError(ValueError):
    """Bad config file: unknown key, bad value, or missing requirement."""


def _bool(v: str) -> bool:
    low = v.strip().lower()
    if low in ("true", "yes", "1", "on"):
        return True
    if low in ("false", "no", "0", "off"):
        return False
    raise ValueError(f"not a boolean: {v!r}")


def _int_list(v: str) -> tuple[int, ...]:
    return tuple(int(x) for x in v.replace(",", " ").split())


# key -> (parser, default). str defaults stay unparsed in the echo.
_SCHEMA: dict[str, tuple] = {
    "network.layer_sizes": (_int_list, "784,300,10"),
    "network.timesteps": (int, "4"),
    "network.tau": (float, "2.0"),
    "network.v_th": (float, "0.5"),
    "network.v_reset": (float, "0.0"),
    "network.reset_detach": (_bool, "true"),
    "surrogate.family": (str, ARCTAN),
    "surrogate.alpha": (float, "2.0"),
    "msg.p": (float, "0.0"),
    "msg.inverted_scaling": (_bool, "false"),
    "two.enabled": (_bool, "true"),
    "two.beta": (float, "0.9"),
    "optim.kind": (str, ADAMW),
    "optim.lr": (float, "0.05"),
    "optim.weight_decay": (float, "1e-4"),
    "optim.momentum": (float, "0.9"),
    "optim.beta1": (float, "0.9"),
    "optim.beta2": (float, "0.999"),
    "optim.eps": (float, "1e-8"),
    "schedule.lr_min": (float, "0.0"),
    "schedule.epochs": (int, "5"),
    "data.source": (str, "synthetic"),
    "data.train_images": (str, ""),
    "data.train_labels": (str, ""),
    "data.test_images": (str, ""),
    "data.test_labels": (str, ""),
    "data.normalize": (_bool, "true"),
    "synth.num_classes": (int, "4"),
    "synth.dim": (int, "32"),
    "synth.informative_start": (int, "4"),
    "synth.noise_sigma": (float, "0.2"),
    "synth.pattern_scale": (float, "1.0"),
    "synth.seed": (int, "0"),
    "synth.n_train": (int, "2048"),
    "synth.n_test": (int, "512"),
    "batch_size": (int, "128"),
    "seed": (int, "0"),
    "out_dir": (str, "runs/out"),
    "precision": (str, "f32"),
}

_ENUMS = {
    "surrogate.family": FAMILIES,
    "optim.kind": (ADAMW, SGD_MOMENTUM),
    "data.source": ("idx", "synthetic"),
    "precision": ("f32", "f64"),
}


def parse_file(path) -> dict[str, str]:
    """Parse key = value lines; '#' starts a comment."""
    raw: dict[str, str] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{lineno}: expected key = value")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
    return raw


def resolve(raw: dict[str, str] | None = None, **overrides) -> dict[str, str]:
    """Fill defaults, reject unknown keys, return the echo mapping."""
    merged = {k: default for k, (_, default) in _SCHEMA.items()}
    for source in (raw or {}), overrides:
        for key, value in source.items():
            if key not in _SCHEMA:
                raise ConfigError(f"unknown config key: {key}")
            merged[key] = str(value)
    for key, allowed in _ENUMS.items():
        if merged[key] not in allowed:
            raise ConfigError(
                f"config key {key}: {merged[key]!r} not one of {allowed}")
    return merged


def echo_text(resolved: dict[str, str]) -> str:
    return "".join(f"{k} = {resolved[k]}\n" for k in sorted(resolved))


def digest(resolved: dict[str, str]) -> str:
    return hashlib.sha256(echo_text(resolved).encode("utf-8")).hexdigest()


@dataclass
class RunConfig:
    """Typed view over a resolved config mapping."""

    resolved: dict[str, str]

    def __post_init__(self):
        parsed = {}
        for key, (parser, _) in _SCHEMA.items():
            try:
                parsed[key] = parser(self.resolved[key])
            except (ValueError, KeyError) as exc:
                raise ConfigError(f"config key {key}: {exc}") from exc
        self._v = parsed

    def __getitem__(self, key: str):
        return self._v[key]

    @property
    def dtype(self):
        return np.float32 if self._v["precision"] == "f32" else np.float64

    def network_spec(self) -> NetworkSpec:
        v = self._v
        try:
            return NetworkSpec(
                layer_sizes=v["network.layer_sizes"],
                timesteps=v["network.timesteps"],
                lif=LifParams(tau=v["network.tau"], v_th=v["network.v_th"],
                              v_reset=v["network.v_reset"]),
                surrogate=SurrogateSpec(family=v["surrogate.family"],
                                        alpha=v["surrogate.alpha"]),
                reset_detach=v["network.reset_detach"],
            )
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def msg_config(self) -> MsgConfig:
        return MsgConfig(p=self._v["msg.p"],
                         inverted_scaling=self._v["msg.inverted_scaling"])

    def optimizer_state(self) -> OptimizerState:
        v = self._v
        return OptimizerState(kind=v["optim.kind"], momentum=v["optim.momentum"],
                              beta1=v["optim.beta1"], beta2=v["optim.beta2"],
                              eps=v["optim.eps"],
                              weight_decay=v["optim.weight_decay"])

    def synth_spec(self) -> SynthSpec:
        v = self._v
        try:
            return self._synth_spec()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    def _synth_spec(self) -> SynthSpec:
        v = self._v
        return SynthSpec(num_classes=v["synth.num_classes"], dim=v["synth.dim"],
                         timesteps=v["network.timesteps"],
                         informative_start=v["synth.informative_start"],
                         noise_sigma=v["synth.noise_sigma"],
                         pattern_scale=v["synth.pattern_scale"],
                         seed=v["synth.seed"])

    def digest(self) -> str:
        return digest(self.resolved)


def load(path=None, **overrides) -> RunConfig:
    raw = parse_file(path) if path else {}
    return RunConfig(resolve(raw, **overrides))
