"""Plain-text file formats: FRF data, time-domain records, configs, models.

All formats are whitespace-delimited columns with '#' comment lines, so
they stay inspectable and diffable. Floats are written with %.17g, which
round-trips double precision exactly.
"""

import math

import numpy as np

from .errors import ConfigError, ParseError
from .lti import FrequencyResponse

FLOAT_FMT = "%.17g"


def _fmt(x):
    return FLOAT_FMT % float(x)


def _data_lines(path):
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    out = []
    for lineno, line in enumerate(raw, start=1):
        stripped = line.strip()
        if stripped and not stripped.startswith("#"):
            out.append((lineno, stripped))
    return raw, out


def _parse_header(raw, path, keys):
    for line in raw:
        line = line.strip()
        if not line.startswith("#"):
            break
        fields = dict(tok.split("=", 1) for tok in line[1:].split() if "=" in tok)
        if all(k in fields for k in keys):
            return fields
    raise ParseError(f"{path}: missing header line with {' '.join(k + '=' for k in keys)}")


def parse_frf(path):
    """Read a frequency-response file: '# ts=<s> units=<hz|rad_s>' then 'freq re im' rows."""
    raw, lines = _data_lines(path)
    header = _parse_header(raw, path, ("ts", "units"))
    try:
        ts = float(header["ts"])
    except ValueError as exc:
        raise ParseError(f"{path}: bad ts value {header['ts']!r}") from exc
    units = header["units"]
    if units not in ("hz", "rad_s"):
        raise ParseError(f"{path}: units must be 'hz' or 'rad_s', got {units!r}")
    if not lines:
        raise ParseError(f"{path}: no samples")
    freqs, values = [], []
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            f, re, im = (float(p) for p in parts)
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric field") from exc
        freqs.append(f)
        values.append(complex(re, im))
    omegas = np.asarray(freqs)
    if units == "hz":
        omegas = 2.0 * math.pi * omegas
    try:
        return FrequencyResponse(omegas, np.asarray(values), ts)
    except ValueError as exc:
        raise ParseError(f"{path}: {exc}") from exc


def emit_frf(frf, path):
    """Write a frequency-response file in rad/s (the canonical form)."""
    with open(path, "w") as fh:
        fh.write(f"# ts={_fmt(frf.ts)} units=rad_s\n")
        for w, v in zip(frf.omegas, frf.values):
            fh.write(f"{_fmt(w)} {_fmt(v.real)} {_fmt(v.imag)}\n")


def parse_tio(path):
    """Read a time-domain record: '# ts=<s>' then 'k u y' rows with uniform k."""
    raw, lines = _data_lines(path)
    header = _parse_header(raw, path, ("ts",))
    try:
        ts = float(header["ts"])
    except ValueError as exc:
        raise ParseError(f"{path}: bad ts value {header['ts']!r}") from exc
    if ts <= 0:
        raise ParseError(f"{path}: ts must be positive")
    if not lines:
        raise ParseError(f"{path}: no samples")
    ks, us, ys = [], [], []
    for lineno, line in lines:
        parts = line.split()
        if len(parts) != 3:
            raise ParseError(f"{path}:{lineno}: expected 3 columns, got {len(parts)}")
        try:
            k, u, y = float(parts[0]), float(parts[1]), float(parts[2])
        except ValueError as exc:
            raise ParseError(f"{path}:{lineno}: non-numeric field") from exc
        ks.append(k)
        us.append(u)
        ys.append(y)
    ks = np.asarray(ks)
    if len(ks) > 1 and not np.allclose(np.diff(ks), ks[1] - ks[0]):
        raise ParseError(f"{path}: sample indices are not uniformly spaced")
    return np.asarray(us), np.asarray(ys), ts


def emit_tio(u, y, ts, path):
    with open(path, "w") as fh:
        fh.write(f"# ts={_fmt(ts)}\n")
        for k, (uk, yk) in enumerate(zip(u, y)):
            fh.write(f"{k} {_fmt(uk)} {_fmt(yk)}\n")


def parse_config(path, overrides=None):
    """Flat 'key = value' config file; later duplicates and overrides win."""
    cfg = {}
    try:
        with open(path) as fh:
            raw = fh.readlines()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    for lineno, line in enumerate(raw, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in stripped.split("=", 1))
        cfg[key] = value
    if overrides:
        cfg.update(overrides)
    return cfg


def write_model_file(path, payload):
    """key = value lines plus whitespace-separated vector blocks."""
    with open(path, "w") as fh:
        fh.write("# sprident model file\n")
        for key, value in payload.items():
            if isinstance(value, (list, tuple, np.ndarray)):
                fh.write(f"{key} = " + " ".join(_fmt(x) for x in np.asarray(value).ravel()) + "\n")
            elif isinstance(value, float):
                fh.write(f"{key} = {_fmt(value)}\n")
            else:
                fh.write(f"{key} = {value}\n")


def read_model_file(path):
    """Inverse of write_model_file; vector values come back as float arrays."""
    raw, lines = _data_lines(path)
    payload = {}
    for lineno, line in lines:
        if "=" not in line:
            raise ParseError(f"{path}:{lineno}: expected 'key = value'")
        key, value = (s.strip() for s in line.split("=", 1))
        parts = value.split()
        if len(parts) > 1:
            try:
                payload[key] = np.array([float(p) for p in parts])
                continue
            except ValueError:
                pass
        try:
            payload[key] = float(value)
        except ValueError:
            payload[key] = value
    return payload
