"""Experiment configs: YAML parsing with line-anchored errors, serialization, presets.

A config document looks like::

    horizon: 100000
    reps: 200
    seed: 7
    arms: [gaussian(1.7, 1), gaussian(3.7, 3)]
    policies:
      - label: log^1.6
        spec: r-ucb(f=logpow(1, 1.6))
      - r-ucb(f=logpow(1, 2))      # label defaults to the policy text
"""
from __future__ import annotations

import math

import yaml

from ._parse import ParseError
from .distributions import BanditInstance, parse_arm
from .policies import parse_policy
from .simulator import MASK64, ExperimentConfig, default_checkpoints

KEYS = ("horizon", "reps", "seed", "checkpoints", "arms", "policies")
REQUIRED = ("horizon", "reps", "seed", "arms", "policies")
PRESET_HORIZON = 100_000
PRESET_REPS = 200
PRESET_SEED = 20_200_607


class ConfigError(ValueError):
    pass


def _as_int(value, name, where, lo=None, hi=None) -> int:
    if isinstance(value, bool):
        raise ConfigError(f"{where}: {name} must be an integer, got {value!r}")
    if isinstance(value, str):
        try:
            value = float(value) if any(c in value for c in ".eE") else int(value)
        except ValueError:
            raise ConfigError(f"{where}: {name} must be an integer, got {value!r}") from None
    if isinstance(value, float):
        if not (math.isfinite(value) and value == int(value)):
            raise ConfigError(f"{where}: {name} must be an integer, got {value!r}")
        value = int(value)
    if not isinstance(value, int):
        raise ConfigError(f"{where}: {name} must be an integer, got {value!r}")
    if (lo is not None and value < lo) or (hi is not None and value > hi):
        raise ConfigError(f"{where}: {name} = {value} is out of range")
    return value


def config_from_mapping(data: dict, lines: dict | None = None, source: str = "<config>") -> ExperimentConfig:
    """Build a config from plain data; ``lines`` maps keys (and list items) to line numbers."""
    lines = lines or {}

    def where(key, i=None):
        line = lines.get((key, i)) or lines.get(key)
        return f"{source}:{line}" if line else source

    if not isinstance(data, dict):
        raise ConfigError(f"{source}: the config must be a mapping")
    for key in data:
        if key not in KEYS:
            raise ConfigError(f"{where(key)}: unknown key {key!r} (allowed: {', '.join(KEYS)})")
    for key in REQUIRED:
        if key not in data:
            raise ConfigError(f"{source}: missing required key {key!r}")

    horizon = _as_int(data["horizon"], "horizon", where("horizon"), lo=1)
    reps = _as_int(data["reps"], "reps", where("reps"), lo=1)
    seed = _as_int(data["seed"], "seed", where("seed"), lo=0, hi=MASK64)

    arms_raw = data["arms"]
    if not isinstance(arms_raw, list) or not arms_raw:
        raise ConfigError(f"{where('arms')}: arms must be a nonempty list of distributions")
    arms = []
    for i, text in enumerate(arms_raw):
        if not isinstance(text, str):
            raise ConfigError(f"{where('arms', i)}: arm {i} must be a string like gaussian(0, 1)")
        try:
            arms.append(parse_arm(text))
        except (ParseError, ValueError, TypeError) as e:
            raise ConfigError(f"{where('arms', i)}: arm {i}: {e}") from None

    pols_raw = data["policies"]
    if not isinstance(pols_raw, list) or not pols_raw:
        raise ConfigError(f"{where('policies')}: policies must be a nonempty list")
    policies = []
    for i, item in enumerate(pols_raw):
        if isinstance(item, str):
            label, text = item, item
        elif isinstance(item, dict):
            extra = set(item) - {"label", "spec"}
            if extra or "spec" not in item:
                raise ConfigError(
                    f"{where('policies', i)}: policy {i} needs keys 'spec' and optionally 'label'"
                )
            text = item["spec"]
            label = str(item.get("label", text))
        else:
            raise ConfigError(f"{where('policies', i)}: policy {i} must be a string or a mapping")
        try:
            policies.append((label, parse_policy(str(text))))
        except (ParseError, ValueError, TypeError) as e:
            raise ConfigError(f"{where('policies', i)}: policy {i}: {e}") from None

    cps = data.get("checkpoints")
    if cps is not None:
        if not isinstance(cps, list):
            raise ConfigError(f"{where('checkpoints')}: checkpoints must be a list of rounds")
        cps = [_as_int(c, "checkpoint", where("checkpoints", i), lo=1) for i, c in enumerate(cps)]
    try:
        return ExperimentConfig(BanditInstance(tuple(arms)), tuple(policies), horizon, reps, seed,
                                None if cps is None else tuple(cps))
    except ValueError as e:
        raise ConfigError(f"{source}: {e}") from None


def _split_flow(text: str) -> list[str]:
    """Split ``[a(1,2), b]`` at top-level commas; YAML alone would also split inside parentheses."""
    inner = text.strip()[1:-1]
    items, depth, cur = [], 0, []
    for ch in inner:
        if ch in "([":
            depth += 1
        elif ch in ")]":
            depth -= 1
        if ch == "," and depth == 0:
            items.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    items.append("".join(cur))
    items = [i.strip().strip("'\"") for i in items]
    return [] if items == [""] else items


def _regroup_flow_lists(root, data, document) -> None:
    # unquoted call strings inside [..] get cut at their inner commas by YAML
    if not isinstance(root, yaml.MappingNode) or not isinstance(data, dict):
        return
    for knode, vnode in root.value:
        if (
            knode.value in ("arms", "policies")
            and isinstance(vnode, yaml.SequenceNode)
            and vnode.flow_style
            and all(isinstance(v, yaml.ScalarNode) for v in vnode.value)
        ):
            data[knode.value] = _split_flow(document[vnode.start_mark.index:vnode.end_mark.index])


def _line_index(root) -> dict:
    out = {}
    if isinstance(root, yaml.MappingNode):
        for knode, vnode in root.value:
            key = knode.value
            out[key] = knode.start_mark.line + 1
            if isinstance(vnode, yaml.SequenceNode):
                for i, item in enumerate(vnode.value):
                    out[(key, i)] = item.start_mark.line + 1
    return out


def parse_config(document: str, source: str = "<config>") -> ExperimentConfig:
    try:
        root = yaml.compose(document)
        data = yaml.safe_load(document)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        at = f"{source}:{mark.line + 1}" if mark else source
        raise ConfigError(f"{at}: invalid YAML: {getattr(e, 'problem', e)}") from None
    if data is None:
        raise ConfigError(f"{source}: empty config")
    _regroup_flow_lists(root, data, document)
    return config_from_mapping(data, _line_index(root), source)


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), str(path))


def config_to_mapping(config: ExperimentConfig) -> dict:
    out = {
        "horizon": config.horizon,
        "reps": config.reps,
        "seed": config.master_seed,
    }
    if config.checkpoints != default_checkpoints(config.horizon):
        out["checkpoints"] = list(config.checkpoints)
    out["arms"] = [a.to_text() for a in config.instance.arms]
    out["policies"] = [{"label": lab, "spec": spec.to_text()} for lab, spec in config.policies]
    return out


def serialize(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config_to_mapping(config), sort_keys=False, default_flow_style=None)


def with_overrides(config: ExperimentConfig, horizon=None, reps=None, seed=None) -> ExperimentConfig:
    """Copy of ``config`` with CLI overrides; checkpoints follow a changed horizon."""
    h = config.horizon if horizon is None else horizon
    cps = config.checkpoints
    if h != config.horizon:
        extra = [c for c in cps if c not in default_checkpoints(config.horizon)]
        cps = default_checkpoints(h, extra=extra)
    return ExperimentConfig(
        config.instance, config.policies, h,
        config.reps if reps is None else reps,
        config.master_seed if seed is None else seed,
        cps,
    )


# --------------------------------------------------------------------------
# presets

_PRESETS = {
    "scaling-rucb": (
        ["gaussian(1.7,1)", "gaussian(3.7,3)"],
        [("log^1.6", "r-ucb(f=logpow(1,1.6))"), ("log^2", "r-ucb(f=logpow(1,2))")],
        (),
    ),
    "scaling-rucbg": (
        ["gaussian(1.7,1)", "gaussian(3.7,3)"],
        [("log^1.6", "r-ucb-g(f=logpow(1,1.6))"), ("log^2", "r-ucb-g(f=logpow(1,2))")],
        (),
    ),
    "prior-info": (
        ["gaussian(0,1)", "gaussian(1,10)"],
        [("log", "r-ucb(f=logpow(1,1))"), ("512+log", "r-ucb(f=affine(512,logpow(1,1)))")],
        (),
    ),
    # sigma-aware UCB told sigma=1 while the optimal arm has sigma=10
    "inconsistency": (
        ["gaussian(1.5,10)", "gaussian(1,0.1)"],
        [("alpha-ucb", "alpha-ucb(sigma=1,alpha=2)"), ("r-ucb log^2", "r-ucb(f=logpow(1,2))")],
        (10_000,),
    ),
}

PRESET_NAMES = tuple(_PRESETS)


def preset(name: str, horizon: int = PRESET_HORIZON, reps: int = PRESET_REPS,
           seed: int = PRESET_SEED) -> ExperimentConfig:
    if name not in _PRESETS:
        raise ConfigError(f"unknown preset {name!r}; choose from {', '.join(_PRESETS)}")
    arms, pols, extra = _PRESETS[name]
    return ExperimentConfig(
        BanditInstance(tuple(parse_arm(a) for a in arms)),
        tuple((lab, parse_policy(p)) for lab, p in pols),
        horizon, reps, seed,
        default_checkpoints(horizon, extra=extra),
    )
