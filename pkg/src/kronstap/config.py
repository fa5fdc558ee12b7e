"""Flat ``key = value`` experiment configuration files.

Grammar, one entry per line::

    # comment
    section.key = value

Blank lines and lines starting with ``#`` are ignored. Keys are dotted and
must be one of :data:`SCHEMA`; list values are comma separated. Every
error names the line it came from.
"""
import math
from dataclasses import fields

from .errors import ConfigError
from .experiments import ExperimentConfig, ScenarioParams


def _int(text):
    return int(text)


def _float(text):
    value = float(text)
    if math.isnan(value):
        raise ValueError("NaN is not allowed")
    return value


def _str(text):
    if not text:
        raise ValueError("empty value")
    return text


def _list(conv):
    def parse(text):
        items = [t.strip() for t in text.split(",")]
        if not all(items):
            raise ValueError("empty list item")
        return tuple(conv(t) for t in items)
    return parse


def _number(text):
    value = _float(text)
    return int(value) if value.is_integer() else value


_SCENARIO_TYPES = {f.name: (_int if f.type is int else _float) for f in fields(ScenarioParams)}

#: key -> (converter, ExperimentConfig field or ``scenario.<field>``)
SCHEMA = {
    "experiment.name": (_str, "experiment"),
    "experiment.axis": (_list(_number), "axis"),
    "experiment.trials": (_int, "trials"),
    "experiment.seed": (_int, "seed"),
    "experiment.methods": (_list(_str), "methods"),
    "experiment.test_size": (_int, "test_size"),
    "experiment.train_size": (_int, "train_size"),
    "experiment.workers": (_int, "workers"),
    "experiment.output": (_str, "output"),
    "estimator.r_a": (_int, "r_a"),
    "estimator.r_b": (_int, "r_b"),
    "estimator.tol": (_float, "tol"),
    "estimator.max_iter": (_int, "max_iter"),
    "estimator.lowrank_rank": (_int, "lowrank_rank"),
    "target.amplitude": (_float, "target_amplitude"),
    "target.doppler_guard": (_float, "doppler_guard"),
    "corruption.fraction": (_float, "corruption_fraction"),
    "corruption.amp_low": (_float, "corruption_amp_low"),
    "corruption.amp_high": (_float, "corruption_amp_high"),
}
SCHEMA.update({f"scenario.{name}": (conv, f"scenario.{name}")
               for name, conv in _SCENARIO_TYPES.items()})

REQUIRED = ("experiment.name", "experiment.axis")


def parse_config_text(text, source="<config>"):
    """Parse config text into ``{key: (value, line)}`` with typed values."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value', got {line!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in SCHEMA:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r}")
        if key in entries:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r} "
                              f"(first set on line {entries[key][1]})")
        conv, _ = SCHEMA[key]
        try:
            entries[key] = (conv(value), lineno)
        except ValueError as exc:
            raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from None
    return entries


def build_experiment_config(entries, source="<config>", seed=None, output=None):
    """Turn parsed entries into a validated :class:`ExperimentConfig`.

    ``seed`` and ``output``, when given, override the file.
    """
    missing = [k for k in REQUIRED if k not in entries]
    if missing:
        raise ConfigError(f"{source}: missing required key(s) {', '.join(missing)}")
    top, scenario = {}, {}
    amp = [None, None]
    for key, (value, _) in entries.items():
        target = SCHEMA[key][1]
        if target.startswith("scenario."):
            scenario[target.split(".", 1)[1]] = value
        elif target == "corruption_amp_low":
            amp[0] = value
        elif target == "corruption_amp_high":
            amp[1] = value
        else:
            top[target] = value
    if amp != [None, None]:
        default = ExperimentConfig.__dataclass_fields__["corruption_amp"].default
        top["corruption_amp"] = tuple(d if v is None else v for v, d in zip(amp, default))
    if seed is not None:
        top["seed"] = seed
    if output is not None:
        top["output"] = output
    try:
        return ExperimentConfig(scenario=ScenarioParams(**scenario), **top)
    except ConfigError as exc:
        raise ConfigError(f"{source}: {exc}") from None


def load_experiment_config(path, seed=None, output=None):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    return build_experiment_config(parse_config_text(text, str(path)), str(path), seed, output)
