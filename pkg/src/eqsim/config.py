"""Experiment config: a flat ``key = value`` text format, parsed strictly.

Lines hold one assignment each, ``#`` starts a comment, list values are comma
separated, and ``[equalizer.<name>]`` headers open per-equalizer sections.
Unknown keys are errors; omitted optional keys take the documented defaults.
Numbers serialize with 17 significant digits so a round trip is lossless.
"""

import math
import re
from dataclasses import dataclass, field, replace

from .errors import ParseError

EQUALIZER_MODES = ("lms", "cma", "fse_cma", "mlp")

_DEFAULT_MASTER_SEED = 12345
_DEFAULT_OUTPUT_DIR = "results"
_DEFAULT_TRANSIENT_FRACTION = 0.5
_DEFAULT_N_TRAIN = 1000

# defaults for omitted channel_taps, keyed by channel_oversample
_DEFAULT_TAPS_BY_L = {
    1: (1.0, 0.5, 0.2),
    2: (1.0, 0.6, 0.5, 0.25, 0.2, 0.1),
}

_SECTION_RE = re.compile(r"^\[equalizer\.([A-Za-z0-9_-]+)\]$")

_TOP_KEYS = (
    "scheme",
    "n_symbols",
    "n_train",
    "snr_db",
    "channel_taps",
    "channel_oversample",
    "master_seed",
    "output_dir",
    "transient_fraction",
)
_LINEAR_KEYS = ("mode", "taps", "mu", "decision_delay", "decision_directed")
_MLP_KEYS = ("mode", "window", "decision_delay", "hidden", "eta", "goal_mse", "max_epochs")
_ALL_EQ_KEYS = tuple(dict.fromkeys(_LINEAR_KEYS + _MLP_KEYS))


def format_float(x: float) -> str:
    """17 significant digits; lossless for 64-bit floats."""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def format_complex(z: complex) -> str:
    if z.imag == 0:
        return format_float(z.real)
    sign = "+" if z.imag >= 0 else "-"
    return f"{format_float(z.real)}{sign}{format_float(abs(z.imag))}j"


@dataclass(frozen=True)
class EqualizerConfig:
    """One equalizer instance; fields not used by the mode stay None."""

    name: str
    mode: str
    taps: int | None = None
    mu: float | None = None
    decision_delay: int | None = None
    decision_directed: bool | None = None
    window: int | None = None
    hidden: int | None = None
    eta: float | None = None
    goal_mse: float | None = None
    max_epochs: int | None = None


@dataclass(frozen=True)
class ExperimentConfig:
    scheme: int
    n_symbols: int
    snr_db: float
    n_train: int = _DEFAULT_N_TRAIN
    channel_taps: tuple[complex, ...] = ()
    channel_oversample: int = 1
    master_seed: int = _DEFAULT_MASTER_SEED
    output_dir: str = _DEFAULT_OUTPUT_DIR
    transient_fraction: float = _DEFAULT_TRANSIENT_FRACTION
    equalizers: tuple[EqualizerConfig, ...] = ()
    source_text: str = field(compare=False, default="", repr=False)


def _parse_int(raw: str, lineno: int, key: str) -> int:
    try:
        return int(raw)
    except ValueError:
        raise ParseError(f"key '{key}' needs an integer, got '{raw}'", lineno) from None


def _parse_float(raw: str, lineno: int, key: str) -> float:
    try:
        value = float(raw)
    except ValueError:
        raise ParseError(f"key '{key}' needs a number, got '{raw}'", lineno) from None
    if math.isnan(value):
        raise ParseError(f"key '{key}' must not be NaN", lineno)
    return value


def _parse_bool(raw: str, lineno: int, key: str) -> bool:
    if raw == "true":
        return True
    if raw == "false":
        return False
    raise ParseError(f"key '{key}' needs 'true' or 'false', got '{raw}'", lineno)


def _parse_taps(raw: str, lineno: int) -> tuple[complex, ...]:
    taps = []
    for token in raw.split(","):
        token = token.strip()
        try:
            taps.append(complex(token))
        except ValueError:
            raise ParseError(f"bad channel tap '{token}'", lineno) from None
    return tuple(taps)


def _split_lines(text: str):
    """Yield (lineno, content) with comments and blank lines removed."""
    for lineno, line in enumerate(text.splitlines(), start=1):
        content = line.split("#", 1)[0].strip()
        if content:
            yield lineno, content


def fill_equalizer_defaults(name: str, mode: str, given: dict) -> EqualizerConfig:
    """Complete an equalizer config with the per-mode defaults."""
    cfg = EqualizerConfig(name=name, mode=mode, **given)
    if mode == "mlp":
        return replace(
            cfg,
            window=cfg.window if cfg.window is not None else 5,
            decision_delay=cfg.decision_delay if cfg.decision_delay is not None else 2,
            hidden=cfg.hidden if cfg.hidden is not None else 8,
            eta=cfg.eta if cfg.eta is not None else 0.05,
            goal_mse=cfg.goal_mse if cfg.goal_mse is not None else 1e-4,
            max_epochs=cfg.max_epochs if cfg.max_epochs is not None else 5000,
        )
    oversample = 2 if mode == "fse_cma" else 1
    taps = cfg.taps if cfg.taps is not None else 11 * oversample
    return replace(
        cfg,
        taps=taps,
        mu=cfg.mu if cfg.mu is not None else (0.01 if mode == "lms" else 0.001),
        decision_delay=cfg.decision_delay if cfg.decision_delay is not None else (taps // 2) // oversample,
        decision_directed=(cfg.decision_directed if cfg.decision_directed is not None else True)
        if mode == "lms"
        else None,
    )


_EQ_KEY_PARSERS = {
    "taps": _parse_int,
    "decision_delay": _parse_int,
    "window": _parse_int,
    "hidden": _parse_int,
    "max_epochs": _parse_int,
    "mu": _parse_float,
    "eta": _parse_float,
    "goal_mse": _parse_float,
}


def _build_equalizer(name: str, section_lineno: int, entries: dict) -> EqualizerConfig:
    if "mode" not in entries:
        raise ParseError(f"equalizer '{name}' has no mode", section_lineno)
    mode_raw, mode_lineno = entries.pop("mode")
    if mode_raw not in EQUALIZER_MODES:
        raise ParseError(f"unknown equalizer mode '{mode_raw}'", mode_lineno)
    allowed = _MLP_KEYS if mode_raw == "mlp" else _LINEAR_KEYS
    if mode_raw != "lms":
        allowed = tuple(k for k in allowed if k != "decision_directed")
    given = {}
    for key, (raw, lineno) in entries.items():
        if key not in allowed:
            raise ParseError(f"key '{key}' does not apply to mode '{mode_raw}'", lineno)
        if key == "decision_directed":
            given[key] = _parse_bool(raw, lineno, key)
        else:
            given[key] = _EQ_KEY_PARSERS[key](raw, lineno, key)
    cfg = fill_equalizer_defaults(name, mode_raw, given)
    _validate_equalizer(cfg, section_lineno)
    return cfg


def _validate_equalizer(cfg: EqualizerConfig, lineno: int) -> None:
    def bad(msg):
        raise ParseError(f"equalizer '{cfg.name}': {msg}", lineno)

    if cfg.mode == "mlp":
        if cfg.window < 1 or cfg.hidden < 1 or cfg.max_epochs < 1:
            bad("window, hidden and max_epochs must be >= 1")
        if cfg.eta <= 0 or cfg.goal_mse <= 0:
            bad("eta and goal_mse must be positive")
    else:
        if cfg.taps < 1:
            bad("taps must be >= 1")
        if cfg.mu <= 0:
            bad("mu must be positive")
    if cfg.decision_delay < 0:
        bad("decision_delay must be nonnegative")


def parse_config(text: str) -> ExperimentConfig:
    """Parse config text; raises ParseError naming the offending line."""
    top: dict[str, tuple[str, int]] = {}
    sections: list[tuple[str, int, dict]] = []
    current: dict | None = None
    for lineno, content in _split_lines(text):
        m = _SECTION_RE.match(content)
        if m:
            name = m.group(1)
            if any(s[0] == name for s in sections):
                raise ParseError(f"duplicate equalizer section '{name}'", lineno)
            current = {}
            sections.append((name, lineno, current))
            continue
        if content.startswith("["):
            raise ParseError(f"malformed section header '{content}'", lineno)
        if "=" not in content:
            raise ParseError(f"expected 'key = value', got '{content}'", lineno)
        key, raw = (part.strip() for part in content.split("=", 1))
        if current is None:
            if key not in _TOP_KEYS:
                raise ParseError(f"unknown key '{key}'", lineno)
            if key in top:
                raise ParseError(f"key '{key}' given twice", lineno)
            top[key] = (raw, lineno)
        else:
            if key not in _ALL_EQ_KEYS:
                raise ParseError(f"unknown equalizer key '{key}'", lineno)
            if key in current:
                raise ParseError(f"key '{key}' given twice", lineno)
            current[key] = (raw, lineno)

    def need(key):
        if key not in top:
            raise ParseError(f"missing required key '{key}'")
        return top[key]

    scheme_raw, scheme_line = need("scheme")
    scheme = _parse_int(scheme_raw, scheme_line, "scheme")
    if scheme not in (4, 16):
        raise ParseError("scheme must be 4 or 16", scheme_line)

    n_symbols_raw, n_symbols_line = need("n_symbols")
    n_symbols = _parse_int(n_symbols_raw, n_symbols_line, "n_symbols")
    if n_symbols < 1:
        raise ParseError("n_symbols must be >= 1", n_symbols_line)

    snr_raw, snr_line = need("snr_db")
    snr_db = _parse_float(snr_raw, snr_line, "snr_db")
    if math.isinf(snr_db) and snr_db < 0:
        raise ParseError("snr_db must be finite or +inf", snr_line)

    if "n_train" in top:
        n_train_raw, n_train_line = top["n_train"]
        n_train = _parse_int(n_train_raw, n_train_line, "n_train")
        if not 0 <= n_train <= n_symbols:
            raise ParseError("n_train must be in [0, n_symbols]", n_train_line)
    else:
        n_train = min(_DEFAULT_N_TRAIN, n_symbols)

    if "channel_oversample" in top:
        l_raw, l_line = top["channel_oversample"]
        oversample = _parse_int(l_raw, l_line, "channel_oversample")
        if oversample not in (1, 2):
            raise ParseError("channel_oversample must be 1 or 2", l_line)
    else:
        oversample = 1

    if "channel_taps" in top:
        taps_raw, taps_line = top["channel_taps"]
        taps = _parse_taps(taps_raw, taps_line)
        if not any(abs(t) > 0 for t in taps):
            raise ParseError("channel_taps needs at least one nonzero tap", taps_line)
    else:
        raw_taps = _DEFAULT_TAPS_BY_L[oversample]
        norm = math.sqrt(sum(t * t for t in raw_taps))
        taps = tuple(complex(t / norm) for t in raw_taps)

    if "master_seed" in top:
        seed_raw, seed_line = top["master_seed"]
        master_seed = _parse_int(seed_raw, seed_line, "master_seed")
        if master_seed < 0:
            raise ParseError("master_seed must be nonnegative", seed_line)
    else:
        master_seed = _DEFAULT_MASTER_SEED

    output_dir = top["output_dir"][0] if "output_dir" in top else _DEFAULT_OUTPUT_DIR

    if "transient_fraction" in top:
        tf_raw, tf_line = top["transient_fraction"]
        transient_fraction = _parse_float(tf_raw, tf_line, "transient_fraction")
        if not 0 <= transient_fraction < 1:
            raise ParseError("transient_fraction must be in [0, 1)", tf_line)
    else:
        transient_fraction = _DEFAULT_TRANSIENT_FRACTION

    if not sections:
        raise ParseError("config defines no equalizer sections")
    equalizers = tuple(_build_equalizer(name, lineno, entries) for name, lineno, entries in sections)
    for eq in equalizers:
        if eq.mode == "fse_cma" and oversample != 2:
            raise ParseError(f"equalizer '{eq.name}' needs channel_oversample = 2")

    return ExperimentConfig(
        scheme=scheme,
        n_symbols=n_symbols,
        snr_db=snr_db,
        n_train=n_train,
        channel_taps=taps,
        channel_oversample=oversample,
        master_seed=master_seed,
        output_dir=output_dir,
        transient_fraction=transient_fraction,
        equalizers=equalizers,
        source_text=text,
    )


def serialize_config(cfg: ExperimentConfig) -> str:
    """Canonical text form; parse(serialize(cfg)) equals cfg."""
    lines = [
        f"scheme = {cfg.scheme}",
        f"n_symbols = {cfg.n_symbols}",
        f"n_train = {cfg.n_train}",
        f"snr_db = {format_float(cfg.snr_db)}",
        f"channel_taps = {', '.join(format_complex(t) for t in cfg.channel_taps)}",
        f"channel_oversample = {cfg.channel_oversample}",
        f"master_seed = {cfg.master_seed}",
        f"output_dir = {cfg.output_dir}",
        f"transient_fraction = {format_float(cfg.transient_fraction)}",
    ]
    for eq in cfg.equalizers:
        lines.append("")
        lines.append(f"[equalizer.{eq.name}]")
        lines.append(f"mode = {eq.mode}")
        if eq.mode == "mlp":
            lines.append(f"window = {eq.window}")
            lines.append(f"decision_delay = {eq.decision_delay}")
            lines.append(f"hidden = {eq.hidden}")
            lines.append(f"eta = {format_float(eq.eta)}")
            lines.append(f"goal_mse = {format_float(eq.goal_mse)}")
            lines.append(f"max_epochs = {eq.max_epochs}")
        else:
            lines.append(f"taps = {eq.taps}")
            lines.append(f"mu = {format_float(eq.mu)}")
            lines.append(f"decision_delay = {eq.decision_delay}")
            if eq.mode == "lms":
                lines.append(f"decision_directed = {'true' if eq.decision_directed else 'false'}")
    return "\n".join(lines) + "\n"
