"""End-to-end experiment runner: one shared received stream, every configured
equalizer scored on it, results emitted as CSV files."""

import hashlib
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable

import numpy as np

from .channel import DEFAULT_TAPS_T2, ChannelSpec, transmit
from .config import (
    EqualizerConfig,
    ExperimentConfig,
    fill_equalizer_defaults,
    format_float,
    serialize_config,
)
from .errors import ConfigurationError, EqsimError
from .linear_eq import LinearEqualizer
from .metrics import EqReport, evm_rms, residual_isi_db, scatter_export, symbol_error_rate
from .mlp_eq import MlpEqualizer, build_training_set, equalize, train
from .signal import ModScheme, SymbolFrame, make_frame, qam_demodulate

RESULT_FORMAT_TAG = "eqsim-results-v1"

# seed stream ids; every random draw in a run comes from
# SeedSequence([master_seed, stream])
_STREAM_FRAME = 0
_STREAM_NOISE = 1
_STREAM_EQ_BASE = 100
_STREAM_TRIAL_BASE = 1_000_000

_ROTATIONS = (1 + 0j, 1j, -1 + 0j, -1j)

Progress = Callable[[str], None] | None


def derive_seed(master_seed: int, stream: int) -> int:
    """Deterministic 64-bit sub-seed for one named random stream."""
    return int(np.random.SeedSequence([master_seed, stream]).generate_state(1, np.uint64)[0])


@dataclass
class EqualizerResult:
    """Scores plus the adaptation curve for one equalizer."""

    name: str
    mode: str
    report: EqReport
    curve: np.ndarray  # per-epoch MSE (mlp) or per-symbol squared error term
    converged_at: int | None  # epochs to goal (mlp) or symbols to settle


@dataclass
class ResultBundle:
    format_tag: str
    config_text: str
    received_checksum: str
    results: tuple[EqualizerResult, ...]


def _checksum(received: np.ndarray) -> str:
    return hashlib.sha256(received.tobytes()).hexdigest()


def _symbols_to_settle(curve: np.ndarray, window: int = 500, factor: float = 2.0) -> int:
    """First index whose trailing `window` mean is within `factor` of the final one."""
    n = curve.size
    if n <= window:
        return n
    csum = np.concatenate([[0.0], np.cumsum(curve)])
    means = (csum[window:] - csum[:-window]) / window  # means[i] over [i, i+window)
    target = factor * means[-1]
    hits = np.nonzero(means <= target)[0]
    return int(hits[0]) if hits.size else n


def _score(
    outputs: np.ndarray,
    delay: int,
    frame: SymbolFrame,
    skip: int,
    residual: float | None,
) -> EqReport:
    """Score aligned outputs against the transmitted frame, post transient."""
    start = max(skip, delay)
    region = outputs[start:]
    ref = frame.symbols[start - delay : outputs.size - delay]
    scheme = frame.scheme
    k = scheme.bits_per_symbol
    true_bits = frame.bits[(start - delay) * k : (outputs.size - delay) * k]
    ser, ber = symbol_error_rate(qam_demodulate(region, scheme), true_bits, scheme)
    return EqReport(
        ser=ser,
        ber=ber,
        evm_rms=evm_rms(region, ref),
        mse_vs_tx=float(np.mean(np.abs(region - ref) ** 2)),
        residual_isi_db=residual,
        scatter=scatter_export(outputs, skip),
    )


def _best_alignment(outputs: np.ndarray, frame: SymbolFrame, skip: int, max_delay: int) -> tuple[int, complex]:
    """Delay and quadrant rotation minimizing EVM for blind equalizers."""
    best = (np.inf, 0, 1 + 0j)
    for delay in range(max_delay):
        start = max(skip, delay)
        if start >= outputs.size:
            continue
        region = outputs[start:]
        ref = frame.symbols[start - delay : outputs.size - delay]
        for rot in _ROTATIONS:
            evm = evm_rms(rot * region, ref)
            if evm < best[0]:
                best = (evm, delay, rot)
    return best[1], best[2]


def _run_linear(
    eq_cfg: EqualizerConfig,
    scheme: ModScheme,
    frame: SymbolFrame,
    received: np.ndarray,
    channel: ChannelSpec,
    n_train: int,
    skip: int,
) -> EqualizerResult:
    eq = LinearEqualizer(
        eq_cfg.mode,
        scheme,
        n_taps=eq_cfg.taps,
        mu=eq_cfg.mu,
        decision_delay=eq_cfg.decision_delay,
        decision_directed=bool(eq_cfg.decision_directed),
    )
    if eq_cfg.mode == "fse_cma":
        stream = received
        taps_seen = channel.taps
    else:
        stream = received[:: channel.oversample_l]
        taps_seen = channel.taps[:: channel.oversample_l]
    training = frame.symbols[:n_train] if eq_cfg.mode == "lms" else None
    outputs, traces = eq.run(stream, training=training)
    if eq_cfg.mode == "lms":
        curve = np.array([abs(t.error_e) ** 2 for t in traces])
        delay, rot = eq.decision_delay, 1 + 0j
    else:
        curve = np.array([t.error_e**2 for t in traces])
        delay, rot = _best_alignment(outputs, frame, skip, eq.n_taps)
    residual = residual_isi_db(taps_seen, eq.impulse_response, eq.oversample_l)
    report = _score(rot * outputs, delay, frame, skip, residual)
    return EqualizerResult(
        name=eq_cfg.name,
        mode=eq_cfg.mode,
        report=report,
        curve=curve,
        converged_at=_symbols_to_settle(curve),
    )


def _run_mlp(
    eq_cfg: EqualizerConfig,
    scheme: ModScheme,
    frame: SymbolFrame,
    received: np.ndarray,
    channel: ChannelSpec,
    n_train: int,
    skip: int,
    seed: int,
) -> EqualizerResult:
    if n_train < 1:
        raise ConfigurationError("mlp equalizer needs n_train >= 1")
    eq = MlpEqualizer(
        window_k=eq_cfg.window,
        decision_delay=eq_cfg.decision_delay,
        hidden=eq_cfg.hidden,
        eta=eq_cfg.eta,
        goal_mse=eq_cfg.goal_mse,
        max_epochs=eq_cfg.max_epochs,
    )
    stream = received[:: channel.oversample_l]
    x, t_i, t_q = build_training_set(stream[:n_train], frame.symbols[:n_train], eq.window_k, eq.decision_delay)
    record = train(eq, x, t_i, t_q, seed)
    outputs = equalize(eq, stream)
    report = _score(outputs, eq.decision_delay, frame, skip, residual=None)
    return EqualizerResult(
        name=eq_cfg.name,
        mode=eq_cfg.mode,
        report=report,
        curve=record.epoch_mse,
        converged_at=record.epochs_to_goal,
    )


def run_experiment(cfg: ExperimentConfig, progress: Progress = None) -> ResultBundle:
    """Run every configured equalizer on one shared received stream.

    The frame and the noise come from seed streams derived from master_seed;
    equalizer k additionally gets its own initialization seed. All equalizers
    consume the identical received samples, which is asserted by checksum.
    """
    say = progress or (lambda _msg: None)
    scheme = ModScheme(cfg.scheme)
    frame = make_frame(cfg.n_symbols, scheme, derive_seed(cfg.master_seed, _STREAM_FRAME))
    channel = ChannelSpec(
        taps=np.asarray(cfg.channel_taps, dtype=np.complex128),
        oversample_l=cfg.channel_oversample,
        snr_db=cfg.snr_db,
    )
    say(f"transmitting {cfg.n_symbols} {cfg.scheme}-QAM symbols at {format_float(cfg.snr_db)} dB")
    received = transmit(frame, channel, derive_seed(cfg.master_seed, _STREAM_NOISE))
    received.setflags(write=False)
    checksum = _checksum(received)
    skip = int(cfg.n_symbols * cfg.transient_fraction)
    results = []
    for k, eq_cfg in enumerate(cfg.equalizers):
        say(f"running equalizer '{eq_cfg.name}' ({eq_cfg.mode})")
        seed_k = derive_seed(cfg.master_seed, _STREAM_EQ_BASE + k)
        try:
            if eq_cfg.mode == "mlp":
                result = _run_mlp(eq_cfg, scheme, frame, received, channel, cfg.n_train, skip, seed_k)
            else:
                result = _run_linear(eq_cfg, scheme, frame, received, channel, cfg.n_train, skip)
        except EqsimError:
            raise
        except Exception as exc:
            raise EqsimError(f"equalizer '{eq_cfg.name}' failed: {exc}") from exc
        if _checksum(received) != checksum:
            raise EqsimError(f"equalizer '{eq_cfg.name}' modified the shared received stream")
        results.append(result)
    return ResultBundle(
        format_tag=RESULT_FORMAT_TAG,
        config_text=cfg.source_text,
        received_checksum=checksum,
        results=tuple(results),
    )


def _write_text(path: Path, text: str) -> None:
    try:
        path.write_text(text, encoding="utf-8", newline="")
    except OSError as exc:
        raise EqsimError(f"failed writing {path}: {exc}") from exc


def emit_outputs(bundle: ResultBundle, out_dir: Path | str) -> list[Path]:
    """Write summary.csv, per-equalizer scatter and curve CSVs, and config.echo."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EqsimError(f"cannot create output directory {out_dir}: {exc}") from exc
    written = []

    rows = ["name,ser,ber,evm_rms,residual_isi_db,epochs_or_symbols_to_converge"]
    for r in bundle.results:
        rep = r.report
        rows.append(
            ",".join(
                [
                    r.name,
                    format_float(rep.ser),
                    format_float(rep.ber),
                    format_float(rep.evm_rms),
                    "" if rep.residual_isi_db is None else format_float(rep.residual_isi_db),
                    "" if r.converged_at is None else str(r.converged_at),
                ]
            )
        )
    summary = out_dir / "summary.csv"
    _write_text(summary, "\n".join(rows) + "\n")
    written.append(summary)

    for r in bundle.results:
        scatter_path = out_dir / f"scatter_{r.name}.csv"
        lines = ["re,im"]
        lines.extend(f"{format_float(z.real)},{format_float(z.imag)}" for z in r.report.scatter)
        _write_text(scatter_path, "\n".join(lines) + "\n")
        written.append(scatter_path)

        curve_path = out_dir / f"curve_{r.name}.csv"
        lines = ["index,mse"]
        lines.extend(f"{i},{format_float(v)}" for i, v in enumerate(r.curve))
        _write_text(curve_path, "\n".join(lines) + "\n")
        written.append(curve_path)

    echo = out_dir / "config.echo"
    _write_text(echo, bundle.config_text)
    written.append(echo)
    return written


def default_compare_config() -> ExperimentConfig:
    """The documented default comparison scenario: 4-QAM through the default
    half-symbol-spaced channel at 20 dB, 1000 training symbols, 200k symbols
    total so the post-transient region holds 100k test symbols."""
    cfg = ExperimentConfig(
        scheme=4,
        n_symbols=200_000,
        snr_db=20.0,
        n_train=1000,
        channel_taps=tuple(complex(t) for t in DEFAULT_TAPS_T2),
        channel_oversample=2,
        equalizers=_compare_equalizers(),
    )
    return replace(cfg, source_text=serialize_config(cfg))


def _compare_equalizers() -> tuple[EqualizerConfig, ...]:
    return tuple(
        fill_equalizer_defaults(mode, mode, {}) for mode in ("lms", "cma", "fse_cma", "mlp")
    )


def compare_preset(base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Force the standard four-equalizer set onto a scenario (or the default one)."""
    if base is None:
        return default_compare_config()
    if base.channel_oversample != 2:
        raise ConfigurationError("compare needs channel_oversample = 2 so FSE-CMA can run")
    cfg = replace(base, equalizers=_compare_equalizers())
    return replace(cfg, source_text=serialize_config(cfg))


def sweep_experiment(
    cfg: ExperimentConfig,
    snrs: list[float],
    progress: Progress = None,
) -> list[tuple[float, ResultBundle]]:
    """Run the config once per SNR; each trial gets an independent seed."""
    say = progress or (lambda _msg: None)
    out = []
    for trial, snr in enumerate(snrs):
        say(f"sweep trial {trial}: snr_db = {format_float(snr)}")
        trial_cfg = replace(
            cfg,
            snr_db=snr,
            master_seed=derive_seed(cfg.master_seed, _STREAM_TRIAL_BASE + trial),
        )
        out.append((snr, run_experiment(trial_cfg, progress)))
    return out


def emit_sweep(results: list[tuple[float, ResultBundle]], cfg: ExperimentConfig, out_dir: Path | str) -> list[Path]:
    """Write sweep.csv (one row per SNR and equalizer) plus config.echo."""
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise EqsimError(f"cannot create output directory {out_dir}: {exc}") from exc
    rows = ["snr_db,name,ser,ber,evm_rms"]
    for snr, bundle in results:
        for r in bundle.results:
            rep = r.report
            rows.append(
                ",".join(
                    [
                        format_float(snr),
                        r.name,
                        format_float(rep.ser),
                        format_float(rep.ber),
                        format_float(rep.evm_rms),
                    ]
                )
            )
    sweep_path = out_dir / "sweep.csv"
    _write_text(sweep_path, "\n".join(rows) + "\n")
    echo = out_dir / "config.echo"
    _write_text(echo, cfg.source_text)
    return [sweep_path, echo]
