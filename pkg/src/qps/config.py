"""Experiment configuration: parsers for frequency, potential and grid strings, validation and key-value files."""
from __future__ import annotations

import dataclasses
import json
import math
import re
from dataclasses import dataclass, field

from .arithmetic import Frequency, expand_continued_fraction, make_liouville
from .cocycle import Potential
from .errors import ConfigError

SUBCOMMANDS = ("lyapunov", "acceleration", "ids", "holder", "ldt", "green-check", "riesz",
               "acceptance")
_DYADIC = re.compile(r"^\s*([0-9.eE+-]+)\s*/\s*2\^k\s+k\s*=\s*(\d+)\s*\.\.\s*(\d+)\s*$")
_COMPLEX = re.compile(r"^[0-9.eE+\-j ]+$")


def parse_omega(text: str) -> Frequency:
    """``golden``, ``sqrt2``, ``cf:a1,a2,...``, ``liouville:beta=B,levels=N`` or a float literal."""
    text = text.strip()
    low = text.lower()
    if low == "golden":
        return Frequency.golden()
    if low in ("sqrt2", "silver"):
        return Frequency.silver()
    if low.startswith("cf:"):
        try:
            quotients = [int(a) for a in low[3:].split(",") if a.strip()]
        except ValueError:
            raise ConfigError("omega", f"bad continued fraction {text!r}") from None
        if not quotients or min(quotients) < 1:
            raise ConfigError("omega", "partial quotients must be positive integers")
        return Frequency.from_quotients(quotients)
    if low.startswith("liouville:"):
        opts = _key_values("omega", low[len("liouville:"):])
        try:
            beta = float(opts.pop("beta"))
            levels = int(opts.pop("levels", 4))
        except (KeyError, ValueError):
            raise ConfigError("omega", "liouville needs beta=<float>[,levels=<int>]") from None
        if opts:
            raise ConfigError("omega", f"unknown liouville options {sorted(opts)}")
        return make_liouville(beta, levels)
    try:
        x = float(text)
    except ValueError:
        raise ConfigError("omega", f"unrecognised frequency {text!r}") from None
    if not 0 < x < 1:
        raise ConfigError("omega", "a float frequency must lie in (0, 1)")
    quotients = expand_continued_fraction(x, 40)
    return Frequency.from_quotients(quotients, float_hint=x)


def _key_values(field_name, text):
    out = {}
    for part in text.split(","):
        if not part.strip():
            continue
        if "=" not in part:
            raise ConfigError(field_name, f"expected key=value, got {part!r}")
        key, value = part.split("=", 1)
        out[key.strip()] = value.strip()
    return out


def parse_potential(text: str) -> Potential:
    """``amo:lambda=L``, ``zero`` or ``trig:k=c,...`` with complex ``c`` such as ``0.5+0.1j``."""
    text = text.strip()
    low = text.lower()
    if low == "zero":
        return Potential.zero()
    if low.startswith("amo:"):
        opts = _key_values("potential", low[4:])
        try:
            lam = float(opts.pop("lambda"))
        except (KeyError, ValueError):
            raise ConfigError("potential", "amo needs lambda=<float>") from None
        if opts:
            raise ConfigError("potential", f"unknown amo options {sorted(opts)}")
        return Potential.amo(lam)
    if low.startswith("trig:"):
        opts = _key_values("potential", low[5:])
        table = {}
        for k, c in opts.items():
            if not _COMPLEX.match(c):
                raise ConfigError("potential", f"bad coefficient {c!r}")
            try:
                table[int(k)] = complex(c.replace(" ", ""))
            except ValueError:
                raise ConfigError("potential", f"bad coefficient {k}={c}") from None
        try:
            return Potential.from_mapping(table, name=text)
        except ValueError as exc:
            raise ConfigError("potential", str(exc)) from None
    raise ConfigError("potential", f"unrecognised potential {text!r}")


def parse_grid(text: str, field_name="eps") -> tuple:
    """``start:stop:step`` (stop included) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(x) for x in text.split(":"))
            if step <= 0 or stop < start:
                raise ConfigError(field_name, "need step > 0 and stop >= start")
            count = int(math.floor((stop - start) / step + 1e-9)) + 1
            return tuple(round(start + j * step, 12) for j in range(count))
        return tuple(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(field_name, f"bad grid {text!r}") from None


def parse_etas(text: str) -> tuple:
    """``1e-2/2^k k=0..10`` or a comma list."""
    m = _DYADIC.match(text)
    if m:
        base, k0, k1 = float(m.group(1)), int(m.group(2)), int(m.group(3))
        return tuple(base / 2 ** k for k in range(k0, k1 + 1))
    return parse_grid(text, "etas")


def parse_complex(text: str, field_name="energy") -> complex:
    try:
        return complex(str(text).replace(" ", ""))
    except ValueError:
        raise ConfigError(field_name, f"bad number {text!r}") from None


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    omega: str = "golden"
    potential: str = "amo:lambda=3"
    energy: complex = 0j
    m: int = 1000
    N: int = 2048
    n_theta: int = 2048
    eps: tuple = (0.0,)
    etas: tuple = tuple(1e-2 / 2 ** k for k in range(11))
    delta: float = 0.3
    theta: float = 0.0
    energies: tuple = ()
    window: tuple = (0.01, 0.05)
    thresholds: tuple = (0.1, 0.2, 0.3)
    R: float = 2.0
    output: str | None = None
    threads: int | None = None
    seed: int = 0
    suite: str = "primary"
    criteria: tuple = ()

    def validate(self) -> "ExperimentConfig":
        if self.subcommand not in SUBCOMMANDS:
            raise ConfigError("subcommand", f"must be one of {SUBCOMMANDS}")
        for name in ("m", "N"):
            if getattr(self, name) < 1:
                raise ConfigError(name, "must be >= 1")
        n = self.n_theta
        if n < 64 or n & (n - 1):
            raise ConfigError("n_theta", "must be a power of two >= 64")
        if any(abs(e) > 1 for e in self.eps):
            raise ConfigError("eps", "|eps| must be <= 1")
        if any(e <= 0 for e in self.etas):
            raise ConfigError("etas", "must be positive")
        if not 0 < self.delta < 1:
            raise ConfigError("delta", "must lie in (0, 1)")
        if len(self.window) != 2 or not 0 < self.window[0] < self.window[1]:
            raise ConfigError("window", "need 0 < eps_min < eps_max")
        if self.R <= 1:
            raise ConfigError("R", "must exceed 1")
        if self.threads is not None and self.threads < 1:
            raise ConfigError("threads", "must be >= 1")
        if self.suite != "primary":
            raise ConfigError("suite", "only the 'primary' suite exists")
        if list(self.energies) != sorted(self.energies):
            raise ConfigError("energies", "grid must be sorted")
        self.frequency()
        self.potential_obj()
        return self

    def frequency(self) -> Frequency:
        return parse_omega(self.omega)

    def potential_obj(self) -> Potential:
        return parse_potential(self.potential)

    def to_json(self) -> dict:
        out = dataclasses.asdict(self)
        out["energy"] = [self.energy.real, self.energy.imag]
        for key in ("eps", "etas", "energies", "window", "thresholds", "criteria"):
            out[key] = list(out[key])
        return out

    @classmethod
    def from_json(cls, obj) -> "ExperimentConfig":
        data = dict(obj)
        re_, im_ = data.pop("energy", (0.0, 0.0))
        for key in ("eps", "etas", "energies", "window", "thresholds", "criteria"):
            if key in data:
                data[key] = tuple(data[key])
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ConfigError(sorted(unknown)[0], "unknown field")
        return cls(energy=complex(re_, im_), **data)

    def dumps(self) -> str:
        return json.dumps(self.to_json(), sort_keys=True)


# key-value file keys -> (field, parser)
_FIELD_PARSERS = {
    "omega": ("omega", str.strip),
    "potential": ("potential", str.strip),
    "energy": ("energy", parse_complex),
    "m": ("m", int),
    "N": ("N", int),
    "ntheta": ("n_theta", int),
    "n_theta": ("n_theta", int),
    "eps": ("eps", parse_grid),
    "eta": ("etas", parse_etas),
    "etas": ("etas", parse_etas),
    "delta": ("delta", float),
    "theta": ("theta", float),
    "energies": ("energies", lambda s: parse_grid(s, "energies")),
    "window": ("window", lambda s: parse_grid(s, "window")),
    "thresholds": ("thresholds", lambda s: parse_grid(s, "thresholds")),
    "R": ("R", float),
    "output": ("output", str.strip),
    "threads": ("threads", int),
    "seed": ("seed", int),
    "suite": ("suite", str.strip),
    "criteria": ("criteria", lambda s: tuple(int(x) for x in s.split(",") if x.strip())),
}


def parse_value(key: str, raw: str):
    if key not in _FIELD_PARSERS:
        raise ConfigError(key, "unknown key")
    name, parser = _FIELD_PARSERS[key]
    try:
        return name, parser(raw)
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(key, str(exc)) from None


def read_config_file(path) -> dict:
    """``key = value`` lines; ``#`` starts a comment.  Errors name the offending line."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            key, sep, raw = line.partition("=")
            if not sep:
                raise ConfigError(f"line {lineno}", "expected key = value")
            try:
                name, value = parse_value(key.strip(), raw.strip())
            except ConfigError as exc:
                raise ConfigError(f"line {lineno}", str(exc)) from None
            values[name] = value
    return values
