"""Experiment orchestration: config parsing, Monte Carlo runs, CSV output.

Every experiment is a pure function of its :class:`ExperimentConfig`.
Per-frame random streams derive from ``SeedSequence([master_seed, frame])``,
so serial and worker-pool runs produce byte-identical CSVs.

CSV schemas (first line is a ``#`` comment with the config hash and tool
version):

- ``ccdf``:  scheme,K,gamma_db,ccdf_empirical,ccdf_theoretical
- ``ber``:   scheme,snr_db,bits,errors,ber
- ``psd``:   scheme,freq_norm,psd_db
- ``table``: scheme,snr_db_ber_1e2,snr_db_ber_1e3,papr_db_k512,papr_db_k1024,psd_floor_db
"""

from __future__ import annotations

import dataclasses
import enum
import hashlib
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__ as _version
from . import compander as _comp
from . import metrics as _metrics
from . import modem as _modem
from .compander import CompanderKind, CompanderSpec
from .metrics import BerRunConfig, CcdfKind
from .modem import Constellation
from .prototype import build_phydyas

__all__ = [
    "ConfigError",
    "ExperimentKind",
    "ExperimentConfig",
    "default_scheme",
    "parse_config",
    "run",
]


class ConfigError(ValueError):
    """Invalid or contradictory experiment configuration."""


class ExperimentKind(str, enum.Enum):
    CCDF = "ccdf"
    BER = "ber"
    PSD = "psd"
    TABLE = "table"


_SCHEME_ORDER = ("identity", "mulaw", "uniform", "linear")


def default_scheme(name: str, **overrides) -> CompanderSpec:
    """Default parameterization of one scheme, by CLI name.

    The uniform/linear/mu defaults are the calibrated set whose PAPR
    reductions reproduce the intended scheme ordering; see the README.
    """
    builders = {
        "identity": CompanderSpec.identity,
        "mulaw": CompanderSpec.mulaw,
        "uniform": CompanderSpec.uniform,
        "linear": CompanderSpec.linear,
    }
    try:
        spec = builders[name]()
    except KeyError:
        raise ConfigError(f"unknown scheme {name!r}") from None
    if overrides:
        spec = dataclasses.replace(spec, **overrides)
    return spec


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: ExperimentKind
    schemes: tuple[str, ...] = _SCHEME_ORDER
    subcarriers: int = 512
    blocks: int = 50
    symbols_total: int = 10_000
    constellation: Constellation = Constellation.QPSK
    seed: int = 1
    snr_grid_db: tuple[float, ...] = tuple(float(v) for v in range(0, 19, 3))
    gamma_grid_db: tuple[float, ...] = tuple(
        float(v) for v in np.round(np.arange(0.0, 14.0001, 0.05), 6)
    )
    output_path: str = "results.csv"
    c: float | None = None
    cutoff: float | None = None
    mu: float | None = None
    sigma: float | None = None
    oversample: int = 1
    min_errors: int = 100
    max_bits: int = 200_000
    workers: int = 1
    dump_iq: str | None = None

    def __post_init__(self) -> None:
        if not 64 <= self.subcarriers <= 4096:
            raise ConfigError("subcarriers must lie in [64, 4096]")
        if self.subcarriers % 2:
            raise ConfigError("subcarriers must be even")
        if self.blocks < 1 or self.symbols_total < 1:
            raise ConfigError("blocks and symbols_total must be positive")
        if self.oversample < 1:
            raise ConfigError("oversample must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if self.min_errors < 1 or self.max_bits < 1:
            raise ConfigError("min_errors and max_bits must be positive")
        if len(self.snr_grid_db) and np.any(np.diff(self.snr_grid_db) <= 0):
            raise ConfigError("snr_grid_db must be ascending")
        if np.any(np.diff(self.gamma_grid_db) <= 0):
            raise ConfigError("gamma_grid_db must be ascending")
        for name in self.schemes:
            if name not in _SCHEME_ORDER:
                raise ConfigError(f"unknown scheme {name!r}")
        try:
            for name in self.schemes:
                self.spec_for(name)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None

    def spec_for(self, name: str) -> CompanderSpec:
        overrides: dict = {}
        if name in ("uniform", "linear") and self.c is not None:
            overrides["c"] = self.c
        if name == "linear" and self.cutoff is not None:
            overrides["cutoff"] = self.cutoff
        if name == "mulaw" and self.mu is not None:
            overrides["mu"] = self.mu
        if name in ("uniform", "linear") and self.sigma is not None:
            overrides["sigma"] = self.sigma
        return default_scheme(name, **overrides)

    # knobs that cannot influence the CSV rows stay out of the config hash
    _NON_IDENTITY_FIELDS = ("output_path", "workers", "dump_iq")

    def canonical_text(self) -> str:
        pairs = []
        for f in dataclasses.fields(self):
            if f.name in self._NON_IDENTITY_FIELDS:
                continue
            value = getattr(self, f.name)
            if isinstance(value, enum.Enum):
                value = value.value
            pairs.append(f"{f.name}={value!r}")
        return "\n".join(pairs)

    def digest(self) -> str:
        return hashlib.sha256(self.canonical_text().encode()).hexdigest()[:16]


# ---------------------------------------------------------------------------
# config file / flag parsing
# ---------------------------------------------------------------------------

_LIST_KEYS = {"snr_db": "snr_grid_db", "gamma_db": "gamma_grid_db", "schemes": "schemes"}
_SCALAR_KEYS = {
    "experiment": str,
    "scheme": str,
    "subcarriers": int,
    "blocks": int,
    "symbols": int,
    "constellation": str,
    "seed": int,
    "out": str,
    "c": float,
    "cutoff": float,
    "mu": float,
    "sigma": float,
    "oversample": int,
    "min_errors": int,
    "max_bits": int,
    "workers": int,
    "dump_iq": str,
}


def _parse_number_list(text: str) -> tuple[float, ...]:
    text = text.strip()
    if ":" in text and "," not in text:
        parts = [float(v) for v in text.split(":")]
        if len(parts) != 3:
            raise ConfigError(f"range syntax is start:stop:step, got {text!r}")
        start, stop, step = parts
        if step <= 0:
            raise ConfigError("range step must be positive")
        return tuple(float(v) for v in np.round(np.arange(start, stop + step / 2, step), 9))
    return tuple(float(v) for v in text.split(",") if v.strip())


def _read_config_file(path: Path) -> dict:
    raw: dict = {}
    for lineno, line in enumerate(path.read_text().splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, value = (part.strip() for part in line.split("=", 1))
        raw[key] = value
    return raw


def parse_config(path: str | Path | None = None, overrides: dict | None = None) -> ExperimentConfig:
    """Build an :class:`ExperimentConfig` from a flat key=value file plus
    overriding flag values (flags win)."""
    raw: dict = {}
    if path is not None:
        p = Path(path)
        if not p.exists():
            raise ConfigError(f"config file not found: {p}")
        raw.update(_read_config_file(p))
    for key, value in (overrides or {}).items():
        if value is not None:
            raw[key] = value

    kwargs: dict = {}
    for key, value in raw.items():
        if key in _LIST_KEYS:
            target = _LIST_KEYS[key]
            if target == "schemes":
                kwargs[target] = tuple(
                    v.strip() for v in str(value).split(",") if v.strip()
                )
            else:
                kwargs[target] = (
                    _parse_number_list(value) if isinstance(value, str) else tuple(value)
                )
        elif key in _SCALAR_KEYS:
            caster = _SCALAR_KEYS[key]
            try:
                kwargs[key] = caster(value)
            except (TypeError, ValueError):
                raise ConfigError(f"field {key!r}: cannot parse {value!r}") from None
        else:
            raise ConfigError(f"unknown config key {key!r}")

    if "experiment" not in kwargs:
        raise ConfigError("field 'experiment' is required")
    experiment_raw = str(kwargs.pop("experiment")).lower()
    try:
        experiment = ExperimentKind(experiment_raw)
    except ValueError:
        raise ConfigError(f"field 'experiment': unknown value {experiment_raw!r}") from None

    scheme = kwargs.pop("scheme", None)
    if scheme is not None and "schemes" not in kwargs:
        scheme = str(scheme).lower()
        if scheme == "all":
            kwargs["schemes"] = _SCHEME_ORDER
        else:
            kwargs["schemes"] = (scheme,)

    if "constellation" in kwargs:
        try:
            kwargs["constellation"] = Constellation(str(kwargs["constellation"]).lower())
        except ValueError:
            raise ConfigError("field 'constellation': expected qpsk or qam16") from None

    rename = {"symbols": "symbols_total", "out": "output_path"}
    for src, dst in rename.items():
        if src in kwargs:
            kwargs[dst] = kwargs.pop(src)

    try:
        return ExperimentConfig(experiment=experiment, **kwargs)
    except TypeError as exc:
        raise ConfigError(str(exc)) from None


# ---------------------------------------------------------------------------
# per-frame Monte Carlo work (top level for pickling into worker pools)
# ---------------------------------------------------------------------------

def _make_frame(config: ExperimentConfig, frame_idx: int, oversample: int):
    k = config.subcarriers
    n = k * oversample
    filt = build_phydyas(4, n)
    rng = np.random.default_rng(np.random.SeedSequence([config.seed, frame_idx]))
    bps = _modem.bits_per_symbol(config.constellation)
    bits = rng.integers(0, 2, size=(k, config.blocks, bps))
    block = _modem.QamSymbolBlock(k, config.blocks, _modem.map_bits(bits, config.constellation))
    return _modem.synthesize(_modem.oqam_stagger(block), filt)


def _ccdf_frame_paprs(args: tuple) -> dict[str, list[float]]:
    config, frame_idx = args
    frame = _make_frame(config, frame_idx, oversample=1)
    out: dict[str, list[float]] = {}
    for name in config.schemes:
        tx = _comp.apply_to_frame(frame, config.spec_for(name))
        paprs = _metrics.papr_per_interval(tx)
        out[name] = list(paprs[_metrics.steady_interval_slice(tx)])
    return out


def _psd_frame_segments(args: tuple) -> dict[str, np.ndarray]:
    config, frame_idx = args
    frame = _make_frame(config, frame_idx, oversample=config.oversample)
    out = {}
    for name in config.schemes:
        tx = _comp.apply_to_frame(frame, config.spec_for(name))
        out[name] = tx.steady_samples()
    return out


def _map_frames(worker, config: ExperimentConfig, n_frames: int):
    args = [(config, idx) for idx in range(n_frames)]
    if config.workers == 1:
        return [worker(a) for a in args]
    with ProcessPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(worker, args, chunksize=max(1, n_frames // (4 * config.workers))))


# ---------------------------------------------------------------------------
# experiments
# ---------------------------------------------------------------------------

def _fmt(value: float) -> str:
    if isinstance(value, float) and math.isnan(value):
        return ""
    return f"{value:.10g}"


def _write_csv(path: Path, header: list[str], rows: list[list], config: ExperimentConfig) -> None:
    lines = [f"# fbmc-sim v{_version} config={config.digest()}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else _fmt(v) for v in row))
    path.write_text("\n".join(lines) + "\n")


def _theoretical_curve(config: ExperimentConfig, name: str, grid: np.ndarray):
    filt = build_phydyas(4, config.subcarriers)
    alpha_t = _metrics.steady_state_alpha_t(filt, config.subcarriers)
    # steady-state mean power is 1/alpha_t under the unit-energy conventions
    common = dict(alpha_t=alpha_t, mean_power=1.0 / alpha_t, n_samples=config.subcarriers)
    kind = {
        "identity": CcdfKind.THEORETICAL_CONVENTIONAL,
        "uniform": CcdfKind.THEORETICAL_UNIFORM,
        "linear": CcdfKind.THEORETICAL_LINEAR,
    }.get(name)
    if kind is None:
        return None
    spec = None
    if name != "identity":
        spec = config.spec_for(name)
        if spec.sigma is None:
            sigma = math.sqrt(config.subcarriers / 2.0)  # unit-energy constellation
            spec = dataclasses.replace(spec, sigma=sigma)
    return _metrics.ccdf_theoretical(kind, grid, spec=spec, **common)


def _run_ccdf(config: ExperimentConfig, out_path: Path) -> None:
    n_frames = max(1, math.ceil(config.symbols_total / config.blocks))
    results = _map_frames(_ccdf_frame_paprs, config, n_frames)
    grid = np.asarray(config.gamma_grid_db)
    rows: list[list] = []
    for name in config.schemes:
        paprs = np.concatenate([np.asarray(r[name]) for r in results])
        emp = _metrics.ccdf_empirical(paprs, grid)
        theo = _theoretical_curve(config, name, grid)
        for i, gamma in enumerate(grid):
            theo_val = float(theo.prob_exceed[i]) if theo is not None else math.nan
            rows.append([name, config.subcarriers, float(gamma), float(emp.prob_exceed[i]), theo_val])
    _write_csv(out_path, ["scheme", "K", "gamma_db", "ccdf_empirical", "ccdf_theoretical"], rows, config)
    if config.dump_iq:
        frame = _make_frame(config, 0, oversample=1)
        _modem.write_iq(frame.samples, config.dump_iq)


def _ber_point(args: tuple) -> tuple[str, float, int, int, float]:
    config, name, snr_idx = args
    snr_db = config.snr_grid_db[snr_idx]
    seed = int(np.random.SeedSequence([config.seed, 977, snr_idx]).generate_state(1)[0])
    point = _metrics.ber_run(
        BerRunConfig(
            scheme=config.spec_for(name),
            snr_db=snr_db,
            min_errors=config.min_errors,
            max_bits=config.max_bits,
            seed=seed,
            subcarriers=config.subcarriers,
            constellation=config.constellation,
        )
    )
    return name, float(snr_db), point.bits, point.errors, point.ber


def _run_ber(config: ExperimentConfig, out_path: Path) -> None:
    if not config.snr_grid_db:
        raise ConfigError("ber experiment needs a nonempty snr grid")
    args = [
        (config, name, snr_idx)
        for name in config.schemes
        for snr_idx in range(len(config.snr_grid_db))
    ]
    if config.workers == 1:
        rows = [list(_ber_point(a)) for a in args]
    else:
        with ProcessPoolExecutor(max_workers=config.workers) as pool:
            rows = [list(r) for r in pool.map(_ber_point, args)]
    _write_csv(out_path, ["scheme", "snr_db", "bits", "errors", "ber"], rows, config)


def _run_psd(config: ExperimentConfig, out_path: Path) -> None:
    psd_config = config if config.oversample > 1 else dataclasses.replace(config, oversample=2)
    n_frames = max(1, math.ceil(min(config.symbols_total, 200) / config.blocks))
    results = _map_frames(_psd_frame_segments, psd_config, n_frames)
    rows: list[list] = []
    for name in config.schemes:
        samples = np.concatenate([r[name] for r in results])
        segment = min(1024, 2 ** int(math.log2(samples.size)))
        est = _metrics.psd_welch(samples, segment, 0.5)
        for f, p in zip(est.freq_norm, est.psd_db):
            rows.append([name, float(f), float(p)])
    _write_csv(out_path, ["scheme", "freq_norm", "psd_db"], rows, config)


def _snr_at_ber(points: list[tuple[float, float]], target: float) -> float:
    """Log-interpolated SNR where BER first drops to ``target``; NaN if never."""
    for (s0, b0), (s1, b1) in zip(points, points[1:]):
        if b0 > target >= b1:
            if b1 <= 0:
                b1 = target / 10.0
            t = (math.log10(b0) - math.log10(target)) / (math.log10(b0) - math.log10(b1))
            return s0 + t * (s1 - s0)
    if points and points[0][1] <= target:
        return points[0][0]
    return math.nan


def _run_table(config: ExperimentConfig, out_path: Path) -> None:
    rows: list[list] = []
    ccdf_cols: dict[str, dict[int, float]] = {name: {} for name in config.schemes}
    for k in (512, 1024):
        sub = dataclasses.replace(
            config,
            subcarriers=k,
            symbols_total=min(config.symbols_total, 4000),
        )
        n_frames = max(1, math.ceil(sub.symbols_total / sub.blocks))
        results = _map_frames(_ccdf_frame_paprs, sub, n_frames)
        for name in config.schemes:
            paprs = np.concatenate([np.asarray(r[name]) for r in results])
            curve = _metrics.ccdf_empirical(paprs, np.asarray(sub.gamma_grid_db))
            try:
                ccdf_cols[name][k] = _metrics.ccdf_crossing_db(curve, 1e-2)
            except ValueError:
                ccdf_cols[name][k] = math.nan

    psd_floors: dict[str, float] = {}
    psd_config = dataclasses.replace(config, oversample=2, symbols_total=120, blocks=30)
    results = _map_frames(_psd_frame_segments, psd_config, 4)
    for name in config.schemes:
        samples = np.concatenate([r[name] for r in results])
        est = _metrics.psd_welch(samples, 1024, 0.5)
        psd_floors[name] = _metrics.oob_floor_db(est, (-0.4, -0.1))

    for name in config.schemes:
        spec = config.spec_for(name)
        points = []
        for snr_idx, snr_db in enumerate(config.snr_grid_db):
            seed = int(np.random.SeedSequence([config.seed, 977, snr_idx]).generate_state(1)[0])
            point = _metrics.ber_run(
                BerRunConfig(
                    scheme=spec,
                    snr_db=snr_db,
                    min_errors=config.min_errors,
                    max_bits=config.max_bits,
                    seed=seed,
                    constellation=config.constellation,
                )
            )
            points.append((float(snr_db), point.ber))
        rows.append(
            [
                name,
                _snr_at_ber(points, 1e-2),
                _snr_at_ber(points, 1e-3),
                ccdf_cols[name].get(512, math.nan),
                ccdf_cols[name].get(1024, math.nan),
                psd_floors[name],
            ]
        )
    _write_csv(
        out_path,
        ["scheme", "snr_db_ber_1e2", "snr_db_ber_1e3", "papr_db_k512", "papr_db_k1024", "psd_floor_db"],
        rows,
        config,
    )


_RUNNERS = {
    ExperimentKind.CCDF: _run_ccdf,
    ExperimentKind.BER: _run_ber,
    ExperimentKind.PSD: _run_psd,
    ExperimentKind.TABLE: _run_table,
}


def run(config: ExperimentConfig) -> list[Path]:
    """Execute one experiment; returns the written file paths."""
    out_path = Path(config.output_path)
    if out_path.parent and not out_path.parent.exists():
        raise ConfigError(f"output directory does not exist: {out_path.parent}")
    _RUNNERS[config.experiment](config, out_path)
    return [out_path]
