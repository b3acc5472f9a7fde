"""A small deterministic diffusion-transformer stand-in.

The network is a stack of pre-norm residual blocks, each contributing an
attention residual and an MLP residual, with all normalization, shift,
scale, and gate parameters driven by a sinusoidal timestep embedding.  It is
untrained: weights come from a seeded generator, with the square projections
QR-orthogonalized so signals neither explode nor die through depth.  What
matters is that the forward map is smooth in both its input and the
timestep, so feature trajectories along a sampling run are forecastable.

The cumulative feature returned by :func:`forward_full` is exactly the input
plus the sum of all residual contributions; the per-stream breakdown is kept
on the trace so depth-proportional caching baselines can be built against
the same forward pass.
"""

import hashlib
import json
import math
import struct
from dataclasses import asdict, dataclass

import numpy as np

from .errors import ConfigError, FormatError, ShapeMismatchError
from .kernels import attention_core, layernorm_rows

# Effectively scale-free layer norm: with this epsilon, doubling the input
# changes normalized rows only at the 1e-13 level for unit-variance data.
LN_EPS = 1e-12

# Geometric frequency range of the timestep embedding, in radians over the
# unit time interval.  The top end keeps every modulation parameter smooth
# across a handful of sampling steps.
EMBED_FREQ_MIN = 1.0
EMBED_FREQ_MAX = 8.0

MAGIC = b"FQCA"
FORMAT_VERSION = 1


@dataclass(frozen=True)
class ToyDitConfig:
    """Shape and seeding of the toy denoiser."""

    layers: int = 8
    channels: int = 64
    tokens: int = 16
    heads: int = 4
    seed: int = 0
    embed_dim: int = 32
    mlp_ratio: int = 4
    gate_scale: float = 2.0

    def __post_init__(self):
        for name in ("layers", "channels", "tokens", "heads", "embed_dim", "mlp_ratio"):
            value = getattr(self, name)
            if not isinstance(value, int) or value < 1:
                raise ConfigError(f"model.{name} must be a positive integer, got {value!r}")
        if self.channels % self.heads != 0:
            raise ConfigError(
                f"model.channels ({self.channels}) must be divisible by "
                f"model.heads ({self.heads})"
            )
        if self.embed_dim % 2 != 0:
            raise ConfigError(f"model.embed_dim must be even, got {self.embed_dim}")
        if not isinstance(self.seed, int):
            raise ConfigError(f"model.seed must be an integer, got {self.seed!r}")


def config_hash(cfg: ToyDitConfig) -> str:
    """Stable short hash of a model configuration."""
    blob = json.dumps(asdict(cfg), sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _orthogonal(rng, n: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    return q


@dataclass(frozen=True)
class _Block:
    wq: np.ndarray
    wk: np.ndarray
    wv: np.ndarray
    wo: np.ndarray
    w1: np.ndarray
    w2: np.ndarray
    mod_w: np.ndarray
    mod_b: np.ndarray


class ToyDit:
    """Weight container; all draws come from one generator in a fixed order.

    Per block the order is: the four square attention projections, the two
    MLP projections, then the modulation head.  The shared embedding MLP is
    drawn first.  Keeping the order fixed makes a config's weights a pure
    function of its seed.
    """

    def __init__(self, config: ToyDitConfig):
        self.config = config
        c, d = config.channels, config.embed_dim
        hidden = config.mlp_ratio * c
        rng = np.random.default_rng(config.seed)
        self.emb_w = rng.standard_normal((d, d)) / math.sqrt(d)
        self.emb_b = 0.1 * rng.standard_normal(d)
        blocks = []
        for _ in range(config.layers):
            wq = _orthogonal(rng, c)
            wk = _orthogonal(rng, c)
            wv = _orthogonal(rng, c)
            wo = _orthogonal(rng, c)
            q1, _ = np.linalg.qr(rng.standard_normal((hidden, c)))
            w1 = q1.T.copy()
            q2, _ = np.linalg.qr(rng.standard_normal((hidden, c)))
            w2 = q2
            mod_w = rng.standard_normal((6 * c, d)) / math.sqrt(d)
            mod_b = 0.1 * rng.standard_normal(6 * c)
            blocks.append(_Block(wq, wk, wv, wo, w1, w2, mod_w, mod_b))
        self.blocks = tuple(blocks)


def init_model(config: ToyDitConfig) -> ToyDit:
    return ToyDit(config)


def timestep_embedding(t: float, dim: int) -> np.ndarray:
    """Sinusoidal features of a scalar time, geometric frequency ladder."""
    half = dim // 2
    if half < 1:
        raise ValueError("embedding dimension must be at least 2")
    if half == 1:
        freqs = np.array([EMBED_FREQ_MIN])
    else:
        ratio = EMBED_FREQ_MAX / EMBED_FREQ_MIN
        freqs = EMBED_FREQ_MIN * ratio ** (np.arange(half) / (half - 1))
    angles = freqs * t
    return np.concatenate([np.sin(angles), np.cos(angles)])


def _silu(x: np.ndarray) -> np.ndarray:
    return x / (1.0 + np.exp(-x))


@dataclass(frozen=True)
class ForwardTrace:
    """One forward pass: the input, every residual stream, and their sum."""

    x: np.ndarray
    t: float
    residuals: tuple  # 2 * layers tensors, attention then MLP per block
    output: np.ndarray  # x + sum of residuals


def forward_full(model: ToyDit, x: np.ndarray, t: float) -> ForwardTrace:
    """Run every block and return the cumulative feature with its breakdown.

    ``x`` is (tokens, channels); ``t`` is the sampling time in [0, 1].
    """
    cfg = model.config
    x = np.asarray(x, dtype=np.float64)
    if x.shape != (cfg.tokens, cfg.channels):
        raise ShapeMismatchError(
            f"input shape {x.shape} does not match ({cfg.tokens}, {cfg.channels})"
        )
    if not np.isfinite(x).all():
        raise ValueError("input contains non-finite entries")
    if not 0.0 <= t <= 1.0:
        raise ValueError(f"time must lie in [0, 1], got {t}")

    c = cfg.channels
    emb = timestep_embedding(t, cfg.embed_dim)
    g = _silu(model.emb_w @ emb + model.emb_b)

    h = x.copy()
    residuals = []
    for block in model.blocks:
        p = block.mod_w @ g + block.mod_b
        shift_a, scale_a, gate_a = p[0:c], p[c : 2 * c], p[2 * c : 3 * c]
        shift_m, scale_m, gate_m = p[3 * c : 4 * c], p[4 * c : 5 * c], p[5 * c : 6 * c]

        u = layernorm_rows(h, LN_EPS) * (1.0 + scale_a) + shift_a
        ctx = attention_core(u @ block.wq, u @ block.wk, u @ block.wv, cfg.heads)
        r = (cfg.gate_scale * gate_a) * (ctx @ block.wo)
        residuals.append(r)
        h = h + r

        u = layernorm_rows(h, LN_EPS) * (1.0 + scale_m) + shift_m
        r = (cfg.gate_scale * gate_m) * (_silu(u @ block.w1) @ block.w2)
        residuals.append(r)
        h = h + r

    return ForwardTrace(x, float(t), tuple(residuals), h)


def model_forward_macs(cfg: ToyDitConfig) -> int:
    """MAC count of one forward pass under the package's accounting model.

    Matrix products count rows * inner * cols; norms, activations, and
    elementwise modulation count one MAC per element touched.
    """
    t, c, d = cfg.tokens, cfg.channels, cfg.embed_dim
    hidden = cfg.mlp_ratio * c
    heads_dim = c  # scores and context each touch every channel once per token pair
    emb = d * d + d
    per_block = 6 * c * d  # modulation head
    per_block += 2 * (2 * t * c)  # two layer norms
    per_block += 2 * (2 * t * c)  # scale and shift, both sublayers
    per_block += 3 * t * c * c  # q, k, v projections
    per_block += t * t * heads_dim  # attention scores over all heads
    per_block += t * t * cfg.heads  # softmax exponentials
    per_block += t * t * heads_dim  # context accumulation
    per_block += t * c * c  # output projection
    per_block += t * c * hidden + t * hidden + t * hidden * c  # the MLP
    per_block += 2 * (t * c)  # the two gates
    return emb + cfg.layers * per_block


@dataclass(frozen=True)
class SampleResult:
    """States and network outputs of one Euler sampling run."""

    states: np.ndarray  # (steps + 1, tokens, channels)
    outputs: np.ndarray  # (steps, tokens, channels)
    times: np.ndarray  # (steps,)


def sample(model: ToyDit, steps: int, noise_seed: int, step_hook=None) -> SampleResult:
    """Integrate x' = v(x, t) with forward Euler from seeded Gaussian noise.

    Time runs t_k = k / steps with dt = 1 / steps.  When ``step_hook`` is
    given it is called as ``step_hook(model, k, t, x)`` and must return the
    velocity to use at that step; otherwise the full network runs each step.
    """
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    cfg = model.config
    rng = np.random.default_rng(noise_seed)
    x = rng.standard_normal((cfg.tokens, cfg.channels))
    dt = 1.0 / steps
    states = [x.copy()]
    outputs = []
    times = np.arange(steps) / steps
    for k in range(steps):
        t = float(times[k])
        if step_hook is not None:
            v = step_hook(model, k, t, x)
        else:
            v = forward_full(model, x, t).output
        outputs.append(v)
        x = x + dt * v
        states.append(x.copy())
    return SampleResult(np.stack(states), np.stack(outputs), times)


# ------------------------------------------------------------- trajectory io


def dump_trajectory(path, outputs: np.ndarray, seed: int, cfg_hash: str) -> None:
    """Write a step-major float64 trajectory with a JSON header.

    Layout: magic ``FQCA``, u16 format version, u32 header length, the UTF-8
    JSON header, then steps * tokens * channels little-endian float64.
    """
    arr = np.ascontiguousarray(outputs, dtype=np.float64)
    if arr.ndim != 3:
        raise ShapeMismatchError(f"trajectory must be 3-D, got shape {arr.shape}")
    header = {
        "steps": int(arr.shape[0]),
        "tokens": int(arr.shape[1]),
        "channels": int(arr.shape[2]),
        "seed": int(seed),
        "config_hash": cfg_hash,
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<H", FORMAT_VERSION))
        fh.write(struct.pack("<I", len(blob)))
        fh.write(blob)
        fh.write(arr.astype("<f8").tobytes())


def load_trajectory(path):
    """Read a trajectory file back; returns (outputs, header dict)."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 10 or raw[:4] != MAGIC:
        raise FormatError("bad magic; not a trajectory file")
    (version,) = struct.unpack("<H", raw[4:6])
    if version != FORMAT_VERSION:
        raise FormatError(f"unsupported format version {version}")
    (hlen,) = struct.unpack("<I", raw[6:10])
    if len(raw) < 10 + hlen:
        raise FormatError("truncated header")
    try:
        header = json.loads(raw[10 : 10 + hlen].decode("utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise FormatError(f"unreadable header: {exc}") from exc
    for key in ("steps", "tokens", "channels", "seed", "config_hash"):
        if key not in header:
            raise FormatError(f"header missing field {key!r}")
    shape = (header["steps"], header["tokens"], header["channels"])
    expected = 8 * shape[0] * shape[1] * shape[2]
    payload = raw[10 + hlen :]
    if len(payload) != expected:
        raise FormatError(
            f"payload holds {len(payload)} bytes, header promises {expected}"
        )
    outputs = np.frombuffer(payload, dtype="<f8").reshape(shape).astype(np.float64)
    return outputs, header
