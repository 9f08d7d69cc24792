"""Line-oriented experiment configuration.

Files hold ``key = value`` pairs, optionally grouped under ``[section]``
headers (sections only organize; keys are global and must be unique).
Values are scalars, bare tokens, or bracketed comma lists.  Omitted keys
fall back to published defaults: the canonical budget grid, the
per-budget detector confidence schedule, and the safe/risky replay
intensity schedules for the learners that define them.
"""

from __future__ import annotations

from dataclasses import dataclass


class ConfigError(ValueError):
    def __init__(self, message: str, line_no: int | None = None):
        if line_no is not None:
            message = f"line {line_no}: {message}"
        super().__init__(message)


CANONICAL_BUDGETS = (1.0, 0.5, 0.2, 0.1, 0.05, 0.01)

# Detector confidence per budget: tighter detection at generous budgets,
# looser (faster-firing) detection when labels are scarce.
ALPHA_THETA_TABLE = {1.0: 0.002, 0.5: 0.05, 0.2: 0.1, 0.1: 0.1, 0.05: 0.2, 0.01: 0.2}

# Replay intensity schedules keyed by (learner, profile).  Scalars apply to
# every budget; dict entries are keyed by budget value.
LAMBDA_SCHEDULES = {
    ("aht", "safe"): {1.0: 1, 0.5: 1, 0.2: 1, 0.1: 1, 0.05: 1, 0.01: 10},
    ("aht", "risky"): {1.0: 100, 0.5: 100, 0.2: 100, 0.1: 1000, 0.05: 1000, 0.01: 1000},
    ("sgd", "safe"): 10,
    ("sgd", "risky"): 1000,
}

LEARNERS = ("nb", "sgd", "ht", "aht")
QUERIES = ("random", "randvar", "selective")
STRATEGIES = ("baseline", "uw", "ew", "se")
ENSEMBLES = ("none", "switching", "elevating")
WINDOW_POLICIES = ("fixed", "dynamic", "adwin")

_KNOWN_KEYS = {
    "stream",
    "length",
    "learner",
    "query",
    "strategy",
    "budgets",
    "alpha_theta",
    "lambda_max",
    "window_policy",
    "dynamic_intensity",
    "gamma",
    "ensemble",
    "alpha_e",
    "seeds",
    "output",
    "learning_rate",
    "loss",
    "classes",
    "label_column",
    "delimiter",
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Fully resolved experiment grid: budgets x seeds x strategies."""

    stream: str
    learner: str
    query: str
    strategies: tuple[str, ...]
    budgets: tuple[float, ...]
    alpha_theta: tuple[float, ...]
    lambda_max: tuple[int, ...]
    window_policy: str
    window_limit: int
    dynamic_intensity: bool
    gamma: float
    ensemble: str
    alpha_e: float
    seeds: tuple[int, ...]
    length: int | None = None
    output: str | None = None
    learning_rate: float = 0.01
    loss: str = "hinge"
    classes: int | None = None
    label_column: int = -1
    delimiter: str = ","

    def cell_count(self) -> int:
        return len(self.strategies) * len(self.budgets) * len(self.seeds)


def _parse_scalar(token: str):
    token = token.strip()
    if token.lower() in ("true", "false"):
        return token.lower() == "true"
    try:
        return int(token)
    except ValueError:
        pass
    try:
        return float(token)
    except ValueError:
        pass
    return token


def _parse_value(raw: str, line_no: int):
    raw = raw.strip()
    if raw.startswith("["):
        if not raw.endswith("]"):
            raise ConfigError("unterminated list", line_no)
        inner = raw[1:-1].strip()
        if not inner:
            return []
        return [_parse_scalar(tok) for tok in inner.split(",")]
    if not raw:
        raise ConfigError("empty value", line_no)
    return _parse_scalar(raw)


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text into a fully resolved ExperimentConfig."""
    values: dict[str, object] = {}
    lines: dict[str, int] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if stripped.startswith("[") and stripped.endswith("]"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"expected key = value, got {stripped!r}", line_no)
        key, _, raw = stripped.partition("=")
        key = key.strip().lower()
        if key not in _KNOWN_KEYS:
            raise ConfigError(f"unknown key {key!r}", line_no)
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line_no)
        values[key] = _parse_value(raw, line_no)
        lines[key] = line_no
    return _resolve(values, lines)


def load_config(path: str) -> ExperimentConfig:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_config(handle.read())


def _require_str(values, key, allowed, default=None, lines=None):
    if key not in values:
        if default is None:
            raise ConfigError(f"missing required key {key!r}")
        return default
    value = str(values[key]).lower()
    if allowed is not None and value not in allowed:
        raise ConfigError(
            f"{key} must be one of {', '.join(allowed)}; got {value!r}", lines.get(key)
        )
    return value


def _float_list(values, key, lines) -> list[float] | None:
    if key not in values:
        return None
    raw = values[key]
    if not isinstance(raw, list):
        raw = [raw]
    out = []
    for item in raw:
        if not isinstance(item, (int, float)) or isinstance(item, bool):
            raise ConfigError(f"{key} entries must be numbers", lines.get(key))
        out.append(float(item))
    return out


def _resolve_alpha(budgets: list[float], explicit: list[float] | None, lines) -> list[float]:
    if explicit is not None:
        if len(explicit) != len(budgets):
            raise ConfigError(
                f"alpha_theta has {len(explicit)} entries for {len(budgets)} budgets",
                lines.get("alpha_theta"),
            )
        return explicit
    resolved = []
    for b in budgets:
        if b not in ALPHA_THETA_TABLE:
            raise ConfigError(
                f"no default alpha_theta for budget {b}; supply alpha_theta explicitly",
                lines.get("budgets"),
            )
        resolved.append(ALPHA_THETA_TABLE[b])
    return resolved


def _resolve_lambda(budgets: list[float], spec, learner: str, lines) -> list[int]:
    line = lines.get("lambda_max")
    if isinstance(spec, str):
        profile = spec.lower()
        if profile not in ("risky", "safe"):
            raise ConfigError(f"lambda_max token must be risky or safe, got {spec!r}", line)
        schedule = LAMBDA_SCHEDULES.get((learner, profile))
        if schedule is None:
            raise ConfigError(
                f"no published {profile} schedule for learner {learner!r}; "
                "give lambda_max numerically",
                line,
            )
        if isinstance(schedule, int):
            return [schedule] * len(budgets)
        out = []
        for b in budgets:
            if b not in schedule:
                raise ConfigError(
                    f"no {profile} lambda_max for budget {b}; give lambda_max numerically",
                    line,
                )
            out.append(schedule[b])
        return out
    if isinstance(spec, list):
        if len(spec) != len(budgets):
            raise ConfigError(
                f"lambda_max has {len(spec)} entries for {len(budgets)} budgets", line
            )
        entries = spec
    else:
        entries = [spec] * len(budgets)
    out = []
    for item in entries:
        if not isinstance(item, int) or isinstance(item, bool) or item < 0:
            raise ConfigError("lambda_max entries must be non-negative integers", line)
        out.append(item)
    return out


def _parse_window_policy(raw: str, line) -> tuple[str, int]:
    token = raw.strip().lower()
    limit = 1000
    if "(" in token:
        if not token.endswith(")"):
            raise ConfigError(f"malformed window_policy {raw!r}", line)
        token, _, inner = token.partition("(")
        try:
            limit = int(inner[:-1])
        except ValueError:
            raise ConfigError(f"window_policy limit must be an integer in {raw!r}", line) from None
        if limit < 1:
            raise ConfigError("window_policy limit must be >= 1", line)
    if token not in WINDOW_POLICIES:
        raise ConfigError(
            f"window_policy must be one of {', '.join(WINDOW_POLICIES)}; got {token!r}", line
        )
    if token == "adwin" and "(" in raw:
        raise ConfigError("adwin window_policy takes no limit", line)
    return token, limit


def _resolve(values: dict, lines: dict) -> ExperimentConfig:
    if "stream" not in values:
        raise ConfigError("missing required key 'stream'")
    stream = str(values["stream"])
    learner = _require_str(values, "learner", LEARNERS, lines=lines)
    query = _require_str(values, "query", QUERIES, default="randvar", lines=lines)
    raw_strategy = values.get("strategy", "baseline")
    if not isinstance(raw_strategy, list):
        raw_strategy = [raw_strategy]
    strategies = []
    for item in raw_strategy:
        token = str(item).lower()
        if token not in STRATEGIES:
            raise ConfigError(
                f"strategy must be one of {', '.join(STRATEGIES)}; got {token!r}",
                lines.get("strategy"),
            )
        strategies.append(token)
    budgets = _float_list(values, "budgets", lines)
    if budgets is None:
        budgets = list(CANONICAL_BUDGETS)
    for b in budgets:
        if not 0.0 < b <= 1.0:
            raise ConfigError(f"budgets must lie in (0, 1]; got {b}", lines.get("budgets"))
    alpha_theta = _resolve_alpha(budgets, _float_list(values, "alpha_theta", lines), lines)
    needs_lambda = any(s != "baseline" for s in strategies)
    if needs_lambda:
        spec = values.get("lambda_max", "risky")
        lambda_max = _resolve_lambda(budgets, spec, learner, lines)
    else:
        lambda_max = [0] * len(budgets)
    window_policy, window_limit = _parse_window_policy(
        str(values.get("window_policy", "adwin")), lines.get("window_policy")
    )
    dynamic_intensity = values.get("dynamic_intensity", False)
    if not isinstance(dynamic_intensity, bool):
        raise ConfigError("dynamic_intensity must be true or false", lines.get("dynamic_intensity"))
    gamma = float(values.get("gamma", 4.0))
    if gamma <= 0.0:
        raise ConfigError("gamma must be positive", lines.get("gamma"))
    ensemble = _require_str(values, "ensemble", ENSEMBLES, default="none", lines=lines)
    if ensemble != "none" and strategies == ["baseline"]:
        raise ConfigError(
            "an ensemble needs a non-baseline strategy for its risky slot",
            lines.get("ensemble"),
        )
    alpha_e = float(values.get("alpha_e", 0.05))
    if not 0.0 <= alpha_e <= 1.0:
        raise ConfigError("alpha_e must lie in [0, 1]", lines.get("alpha_e"))
    raw_seeds = values.get("seeds", [1])
    if not isinstance(raw_seeds, list):
        raw_seeds = [raw_seeds]
    seeds = []
    for s in raw_seeds:
        if not isinstance(s, int) or isinstance(s, bool) or s < 0:
            raise ConfigError("seeds must be non-negative integers", lines.get("seeds"))
        seeds.append(s)
    if not seeds:
        raise ConfigError("seeds must not be empty", lines.get("seeds"))
    length = values.get("length")
    if length is not None and (not isinstance(length, int) or length < 1):
        raise ConfigError("length must be a positive integer", lines.get("length"))
    loss = _require_str(values, "loss", ("hinge", "logistic"), default="hinge", lines=lines)
    learning_rate = float(values.get("learning_rate", 0.01))
    if learning_rate <= 0.0:
        raise ConfigError("learning_rate must be positive", lines.get("learning_rate"))
    classes = values.get("classes")
    if classes is not None and (not isinstance(classes, int) or classes < 2):
        raise ConfigError("classes must be an integer >= 2", lines.get("classes"))
    label_column = values.get("label_column", -1)
    if not isinstance(label_column, int) or isinstance(label_column, bool):
        raise ConfigError("label_column must be an integer", lines.get("label_column"))
    output = values.get("output")
    return ExperimentConfig(
        stream=stream,
        learner=learner,
        query=query,
        strategies=tuple(strategies),
        budgets=tuple(budgets),
        alpha_theta=tuple(alpha_theta),
        lambda_max=tuple(lambda_max),
        window_policy=window_policy,
        window_limit=window_limit,
        dynamic_intensity=bool(dynamic_intensity),
        gamma=gamma,
        ensemble=ensemble,
        alpha_e=alpha_e,
        seeds=tuple(seeds),
        length=length,
        output=str(output) if output is not None else None,
        learning_rate=learning_rate,
        loss=loss,
        classes=classes,
        label_column=label_column,
        delimiter=str(values.get("delimiter", ",")),
    )
