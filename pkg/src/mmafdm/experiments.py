"""Config-driven Monte Carlo BER sweeps, bound curves and CSV output."""
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
import csv
import hashlib
import io
import math
import time

import numpy as np

from mmafdm import __version__
from mmafdm.analysis import abep_bound_curve, pair_count
from mmafdm.baselines import AFDMIM, MMAFDMIM, ClassicalAFDM
from mmafdm.channel import awgn, sample_effective_channels
from mmafdm.codec import SystemParams
from mmafdm.detector import DEFAULT_BUDGET, search
from mmafdm.modes import build_modes

SCHEMES = ("MM_AFDM_IM", "AFDM", "AFDM_IM")
CSV_COLUMNS = ("snr_db", "frames", "bit_errors", "ber", "frame_errors", "seed", "scheme")
BOUND_COLUMNS = ("snr_db", "abep_bound", "geometry_draws", "pair_count")


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    """Flat experiment description.

    ``N, G, M, k, U`` describe MM-AFDM-IM. The baselines reuse them: for
    ``AFDM`` ``U`` is the QAM order; for ``AFDM_IM`` ``k`` is the number of
    active chirps per block and ``U`` the QAM order (``M`` is ignored).
    """

    scheme: str = "MM_AFDM_IM"
    N: int = 4
    G: int = 1
    M: int = 4
    k: int = 2
    U: int = 2
    parent: str = "QAM"
    c2: float = (math.sqrt(5.0) - 1.0) / 2.0
    P: int = 3
    d_max: int = 1
    alpha_max: float = 1.0
    snr_db: tuple = (0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0)
    min_frame_errors: int = 200
    max_frames: int = 1_000_000
    chunk_frames: int = 1000
    seed: int = 0
    workers: int = 1
    geometry_draws: int = 100
    budget: int = DEFAULT_BUDGET

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ConfigError(f"unknown scheme {self.scheme!r}; expected one of {', '.join(SCHEMES)}")
        snr = tuple(float(s) for s in self.snr_db)
        object.__setattr__(self, "snr_db", snr)
        if any(b <= a for a, b in zip(snr, snr[1:])):
            raise ConfigError("snr_db must be strictly increasing")
        if self.max_frames < 1 or self.chunk_frames < 1 or self.min_frame_errors < 1:
            raise ConfigError("max_frames, chunk_frames and min_frame_errors must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.P < 1 or self.d_max < 0 or self.alpha_max < 0 or self.d_max >= self.N:
            raise ConfigError("need P >= 1, 0 <= d_max < N and alpha_max >= 0")
        try:
            self.build_scheme()
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc

    @property
    def system(self):
        return SystemParams(self.N, self.G, self.M, self.k, self.U, c2=self.c2, alpha_max=self.alpha_max)

    def build_scheme(self):
        if self.scheme == "MM_AFDM_IM":
            sp = self.system
            return MMAFDMIM(sp, build_modes(self.parent, self.M, self.U), self.budget)
        if self.scheme == "AFDM":
            return ClassicalAFDM(self.N, self.U, c2=self.c2, alpha_max=self.alpha_max, budget=self.budget)
        return AFDMIM(self.N, self.G, self.k, self.U, c2=self.c2, alpha_max=self.alpha_max, budget=self.budget)

    @property
    def spectral_efficiency(self):
        s = self.build_scheme()
        return s.B / s.N

    def to_text(self):
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "snr_db":
                v = ", ".join(repr(x) for x in v)
            lines.append(f"{f.name} = {v}")
        return "\n".join(lines) + "\n"

    def config_hash(self):
        """Hash of everything that determines the results (``workers`` excluded)."""
        text = self.to_text().replace(f"workers = {self.workers}\n", "")
        return hashlib.sha256(text.encode()).hexdigest()[:16]


_INT_KEYS = {f.name for f in fields(ExperimentConfig) if f.type is int}
_FLOAT_KEYS = {f.name for f in fields(ExperimentConfig) if f.type is float}


def parse_config(text, **overrides):
    """Parse ``key = value`` lines (``#`` starts a comment) into an :class:`ExperimentConfig`."""
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        key, val = (s.strip() for s in line.split("=", 1))
        if key not in known:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"line {lineno}: duplicate key {key!r}")
        try:
            if key == "snr_db":
                values[key] = tuple(float(v) for v in val.replace(",", " ").split())
            elif key in _INT_KEYS:
                values[key] = int(val, 0)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            else:
                values[key] = val.upper() if key in ("scheme", "parent") else val
        except ValueError as exc:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from exc
    values.update({k: v for k, v in overrides.items() if v is not None})
    return ExperimentConfig(**values)


def load_config(path, **overrides):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), **overrides)


def check_comparison_set(configs):
    """Refuse a comparison set whose schemes differ in spectral efficiency ``B/N``."""
    rates = {}
    for cfg in configs:
        s = cfg.build_scheme()
        rates[cfg.scheme] = (s.B, s.N)
    values = {B * 1.0 / N for B, N in rates.values()}
    if len(values) > 1:
        detail = ", ".join(f"{name}: {B}/{N} = {B / N:g}" for name, (B, N) in rates.items())
        raise ConfigError(f"spectral efficiencies differ ({detail}); comparison refused")
    return values.pop()


@dataclass
class PointRecord:
    snr_db: float
    frames: int
    bit_errors: int
    ber: float
    frame_errors: int
    wall_time: float = float("nan")


@dataclass
class SweepResult:
    scheme: str
    seed: int
    records: list = field(default_factory=list)
    metadata: dict = field(default_factory=dict)


def snr_to_n0(snr_db):
    """``N0 = 10^(-SNR/10)`` with ``SNR = Es/N0`` and unit symbol energy; ``+inf`` dB gives 0."""
    return 0.0 if math.isinf(snr_db) and snr_db > 0 else 10.0 ** (-snr_db / 10.0)


def _chunk_rng(seed, point, chunk):
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(point, chunk)))


_SCHEME_CACHE = {}


def _scheme_for(cfg):
    key = cfg.config_hash()
    if key not in _SCHEME_CACHE:
        _SCHEME_CACHE[key] = cfg.build_scheme()
    return _SCHEME_CACHE[key]


def run_chunk(cfg, point, chunk, frames):
    """Simulate one chunk of frames; returns ``(bit_errors, frame_errors)``.

    The random stream depends only on ``(seed, point, chunk)``.
    """
    scheme = _scheme_for(cfg)
    rng = _chunk_rng(cfg.seed, point, chunk)
    values = rng.integers(0, 1 << scheme.B, size=frames, dtype=np.int64)
    H = sample_effective_channels(frames, cfg.P, cfg.d_max, cfg.alpha_max, rng, scheme.daft)
    x = scheme.frames(values)
    y = np.einsum("fij,fj->fi", H, x) + awgn(x.shape, snr_to_n0(cfg.snr_db[point]), rng)
    detected, _ = search(y, H, scheme.groups)
    diff = (values ^ detected).astype(np.uint64)
    return int(np.bitwise_count(diff).sum()), int(np.count_nonzero(diff))


def _run_chunk_args(args):
    return run_chunk(*args)


def _chunk_sizes(cfg):
    done = 0
    while done < cfg.max_frames:
        size = min(cfg.chunk_frames, cfg.max_frames - done)
        yield size
        done += size


def _run_point(cfg, point, pool):
    frames = bit_errors = frame_errors = 0
    sizes = list(_chunk_sizes(cfg))
    c = 0
    wave = cfg.workers if pool is not None else 1
    while c < len(sizes):
        batch = [(cfg, point, i, sizes[i]) for i in range(c, min(c + wave, len(sizes)))]
        results = pool.map(_run_chunk_args, batch) if pool is not None else map(_run_chunk_args, batch)
        for (_, _, _, size), (be, fe) in zip(batch, results):
            frames += size
            bit_errors += be
            frame_errors += fe
            c += 1
            if frame_errors >= cfg.min_frame_errors:
                return frames, bit_errors, frame_errors
    return frames, bit_errors, frame_errors


def run_ber_sweep(cfg, workers=None):
    """Monte Carlo BER versus SNR for ``cfg.scheme``.

    Each SNR point runs chunks of ``chunk_frames`` frames (fresh bits, channel
    and noise per frame) until ``min_frame_errors`` frame errors or
    ``max_frames`` frames. Chunks are merged in index order and the stop rule is
    evaluated per chunk, so the result does not depend on the worker count.
    """
    if workers is not None:
        cfg = replace(cfg, workers=workers)
    scheme = cfg.build_scheme()
    result = SweepResult(cfg.scheme, cfg.seed, metadata={
        "config_hash": cfg.config_hash(),
        "code_version": __version__,
        "seed": cfg.seed,
        "scheme": cfg.scheme,
        "bits_per_frame": scheme.B,
        "spectral_efficiency": scheme.B / scheme.N,
        "stop_rule": f"min_frame_errors={cfg.min_frame_errors}, max_frames={cfg.max_frames}",
        "chunk_frames": cfg.chunk_frames,
        "channel_redraw": "per frame",
        "snr_definition": "Es/N0 with unit average symbol energy",
    })
    pool = ProcessPoolExecutor(cfg.workers) if cfg.workers > 1 else None
    try:
        for point, snr in enumerate(cfg.snr_db):
            t0 = time.perf_counter()
            frames, be, fe = _run_point(cfg, point, pool)
            result.records.append(PointRecord(
                snr, frames, be, be / (frames * scheme.B), fe, time.perf_counter() - t0))
    finally:
        if pool is not None:
            pool.shutdown()
    return result


def run_benchmark_afdm(cfg, workers=None):
    return run_ber_sweep(replace(cfg, scheme="AFDM"), workers)


def run_benchmark_afdm_im(cfg, workers=None):
    return run_ber_sweep(replace(cfg, scheme="AFDM_IM"), workers)


def _fmt(v):
    return format(v, ".17g") if isinstance(v, float) else str(v)


def format_csv(result):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for r in result.records:
        w.writerow([_fmt(float(r.snr_db)), r.frames, r.bit_errors, _fmt(float(r.ber)),
                    r.frame_errors, result.seed, result.scheme])
    return buf.getvalue()


def emit_csv(result, path):
    """Write one row per SNR point: ``snr_db, frames, bit_errors, ber, frame_errors, seed, scheme``."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_csv(result))


def read_csv(path):
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        with open(path, encoding="utf-8") as fh:
            header = fh.readline().strip().split(",")
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected header {header}")
        return SweepResult(scheme="", seed=0)
    res = SweepResult(rows[0]["scheme"], int(rows[0]["seed"]))
    for row in rows:
        res.records.append(PointRecord(float(row["snr_db"]), int(row["frames"]), int(row["bit_errors"]),
                                       float(row["ber"]), int(row["frame_errors"])))
    return res


def run_bound(cfg, R=None):
    """Geometry-averaged union bound for ``cfg`` (MM-AFDM-IM only), one row per SNR point."""
    if cfg.scheme != "MM_AFDM_IM":
        raise ConfigError("the analytical bound is defined for MM_AFDM_IM only")
    R = cfg.geometry_draws if R is None else R
    sp = cfg.system
    ms = build_modes(cfg.parent, cfg.M, cfg.U)
    n0s = [snr_to_n0(s) for s in cfg.snr_db]
    if any(n0 == 0 for n0 in n0s):
        raise ConfigError("the bound needs finite SNR points")
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0xB0,)))
    curve = abep_bound_curve(sp, ms, n0s, rng, R=R, P=cfg.P, d_max=cfg.d_max, alpha_max=cfg.alpha_max)
    return [(s, float(b), R, pair_count(sp)) for s, b in zip(cfg.snr_db, curve)]


def emit_bound_csv(rows, path):
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(BOUND_COLUMNS)
        for snr, b, R, pc in rows:
            w.writerow([_fmt(float(snr)), _fmt(float(b)), R, pc])
