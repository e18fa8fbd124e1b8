"""Run configuration: tolerances, guards, and the key=value config file format.

A single :class:`RunConfig` instance travels through the CLI; library
functions take explicit keyword arguments but default to the values of
:data:`DEFAULTS`. Unknown keys in a config file are rejected.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field, fields, replace

from .errors import ConfigError

#: Angular normalization of the classical flow: S_t = expm(t * S / OMEGA).
OMEGA = 2.0 * 3.141592653589793238


@dataclass(frozen=True)
class RunConfig:
    """Numerical knobs shared by the library and the CLI."""

    # grid
    n: int = 32
    h_mode: str = "selfdual"          # selfdual | explicit
    h: float = 0.0                    # used only when h_mode == "explicit"

    # guards
    kernel_max_n: int = 64            # wigner_kernel memory guard
    experiment_max_n: int = 48        # fio / norm-equivalence guard
    inverse_cond_max: float = 1e8     # inverse_kernel conditioning guard
    memory_cap_gib: float = 2.0       # perf-suite budget

    # caustic scan
    caustic_t_max: float = 100.0
    caustic_dt: float = 1e-3
    caustic_tol: float = 1e-10

    # flow normalization (exposed; default the 2*pi convention)
    omega: float = OMEGA

    # modulation-norm machinery
    stft_stride: int = 8              # decimation stride for 4d quasi-norms
    membership_radius: float = 4.0    # off-tube radius R for the pass gate
    membership_tol: float = 1e-3      # off-tube mass threshold beyond R
    membership_exponent_margin: float = 1.0  # fitted slope must exceed s + this

    # split-step
    step_tol: float = 1e-9            # per-step series tolerance (KN symbols)
    drift_max: float = 1e-3           # unitarity drift guard

    # misc
    threads: int = 1
    out_dir: str = "."

    def grid_step(self) -> float:
        if self.h_mode == "selfdual":
            return float(self.n) ** -0.5
        if self.h_mode == "explicit":
            if self.h <= 0:
                raise ConfigError("explicit h_mode requires h > 0")
            return self.h
        raise ConfigError(f"unknown h_mode: {self.h_mode!r}")


DEFAULTS = RunConfig()

_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _parse_value(key: str, raw: str):
    typ = _FIELD_TYPES[key]
    raw = raw.strip()
    try:
        if typ in ("int", int):
            return int(raw)
        if typ in ("float", float):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"bad value for {key}: {raw!r}") from exc


def parse_config_text(text: str, base: RunConfig | None = None) -> RunConfig:
    """Parse ``key=value`` lines (``#`` comments and blanks ignored)."""
    cfg = base if base is not None else DEFAULTS
    updates = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"line {lineno}: expected key=value, got {line!r}")
        key, raw = stripped.split("=", 1)
        key = key.strip()
        if key not in _FIELD_TYPES:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        updates[key] = _parse_value(key, raw)
    out = replace(cfg, **updates)
    out.grid_step()  # validate h_mode/h combination eagerly
    return out


def load_config(path: str, base: RunConfig | None = None) -> RunConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config_text(fh.read(), base=base)


def thread_count(cli_value: int | None = None) -> int:
    """Worker count: CLI flag wins, then WIG_THREADS, then 1."""
    if cli_value is not None and cli_value > 0:
        return cli_value
    env = os.environ.get("WIG_THREADS", "")
    if env.strip():
        try:
            v = int(env)
            if v > 0:
                return v
        except ValueError:
            pass
    return 1
