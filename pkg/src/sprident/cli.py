"""Command-line front end: `sprident fit` and `sprident check`.

`fit` drives the full pipeline from a flat key=value config file
(optionally overridden by --key value flags) and emits model, bode,
nyquist and diagnostics files. `check` re-evaluates an existing model
against a frequency-response file.
"""

import argparse
import os
import sys
from dataclasses import dataclass

import numpy as np

from . import gobf, io_formats, okid, sprfit
from .errors import (ConfigError, EvaluationError, InfeasibleError,
                     NumericalError, ParseError, SprIdentError)
from .lti import RationalTf, eval_freq, spr_margin, ss_poles

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_PARSE = 3
EXIT_INFEASIBLE = 4
EXIT_NUMERICAL = 5


@dataclass
class PipelineConfig:
    frf: str = None
    tio: str = None
    basis: str = None            # okid | laguerre | kautz
    a: float = None
    b: float = None
    c: float = None
    n_funcs: int = 8
    feedthrough: bool = True
    epsilon: float = None        # None: 1e-3 relative to median |G|
    mode: str = "absolute"
    p_window: int = 20
    hankel_rows: int = None
    hankel_cols: int = None
    sv_threshold: float = okid.SV_RTOL_DEFAULT
    order: int = None
    out_dir: str = "."
    grid_mult: int = 4


_BOOL = {"1": True, "true": True, "yes": True, "0": False, "false": False, "no": False}


def _coerce(key, value, target):
    if target is bool:
        try:
            return _BOOL[value.lower()]
        except KeyError:
            raise ConfigError(f"config key {key!r}: expected boolean, got {value!r}")
    try:
        return target(value)
    except ValueError:
        raise ConfigError(f"config key {key!r}: expected {target.__name__}, got {value!r}")


_TYPES = {
    "frf": str, "tio": str, "basis": str, "mode": str, "out_dir": str,
    "a": float, "b": float, "c": float, "epsilon": float, "sv_threshold": float,
    "n_funcs": int, "p_window": int, "hankel_rows": int, "hankel_cols": int,
    "order": int, "grid_mult": int, "feedthrough": bool,
}


def resolve_config(raw):
    """Validate a raw string map into a PipelineConfig."""
    cfg = PipelineConfig()
    for key, value in raw.items():
        if key not in _TYPES:
            raise ConfigError(f"unknown config key {key!r}")
        setattr(cfg, key, _coerce(key, value, _TYPES[key]))
    if cfg.basis not in ("okid", "laguerre", "kautz"):
        raise ConfigError("config key 'basis' must be one of okid, laguerre, kautz")
    if cfg.frf is None:
        raise ConfigError("config key 'frf' is required")
    if cfg.basis == "okid" and cfg.tio is None:
        raise ConfigError("basis=okid requires a time-domain input ('tio')")
    if cfg.basis == "laguerre" and cfg.a is None:
        raise ConfigError("basis=laguerre requires parameter 'a'")
    if cfg.basis == "kautz" and (cfg.b is None or cfg.c is None):
        raise ConfigError("basis=kautz requires parameters 'b' and 'c'")
    if cfg.mode not in (sprfit.MODE_ABSOLUTE, sprfit.MODE_RATIO):
        raise ConfigError("config key 'mode' must be 'absolute' or 'ratio'")
    if cfg.grid_mult < 1:
        raise ConfigError("config key 'grid_mult' must be >= 1")
    return cfg


def _echo_lines(cfg):
    items = sorted(vars(cfg).items())
    return [f"# config: {k}={v}" for k, v in items]


def _tagged(exc, stage):
    exc.stage = stage
    return exc


def run_pipeline(cfg):
    """Run parse -> (okid) -> basis -> fit -> emit. Returns the output paths."""
    written = []
    try:
        try:
            data = io_formats.parse_frf(cfg.frf)
        except SprIdentError as exc:
            raise _tagged(exc, "parse")

        okid_diag = None
        poles = None
        try:
            if cfg.basis == "okid":
                u, y, ts = io_formats.parse_tio(cfg.tio)
                ocfg = okid.OkidConfig(p_window=cfg.p_window,
                                       hankel_rows=cfg.hankel_rows,
                                       hankel_cols=cfg.hankel_cols,
                                       sv_threshold=cfg.sv_threshold,
                                       order=cfg.order)
                model, okid_diag = okid.okid_era_pipeline(u, y, ocfg, ts=ts)
                poles = ss_poles(model)
                basis = gobf.basis_from_poles(poles, cfg.n_funcs, ts=data.ts,
                                              include_feedthrough=cfg.feedthrough)
            elif cfg.basis == "laguerre":
                basis = gobf.laguerre_basis(cfg.a, cfg.n_funcs, ts=data.ts,
                                            include_feedthrough=cfg.feedthrough)
            else:
                basis = gobf.kautz_basis(cfg.b, cfg.c, cfg.n_funcs, ts=data.ts,
                                         include_feedthrough=cfg.feedthrough)
        except ParseError as exc:
            raise _tagged(exc, "parse")
        except (ValueError, SprIdentError) as exc:
            raise _tagged(exc, "basis")

        epsilon = cfg.epsilon
        if epsilon is None:
            epsilon = 1e-3 * float(np.median(np.abs(data.values)))
        try:
            fit_cfg = sprfit.SprFitConfig(epsilon=epsilon, mode=cfg.mode)
            result = sprfit.fit_spr(data, basis, fit_cfg,
                                    verify_grid_mult=cfg.grid_mult)
        except (ValueError, SprIdentError) as exc:
            raise _tagged(exc, "fit")

        try:
            written = _emit_outputs(cfg, data, basis, result, epsilon, okid_diag, poles)
        except OSError as exc:
            raise _tagged(ConfigError(f"cannot write outputs: {exc}"), "emit")
        return written
    except BaseException:
        for path in written:
            if os.path.exists(path):
                os.unlink(path)
        raise


def _emit_outputs(cfg, data, basis, result, epsilon, okid_diag, poles):
    os.makedirs(cfg.out_dir, exist_ok=True)
    echo = _echo_lines(cfg)
    fmt = io_formats._fmt
    model_path = os.path.join(cfg.out_dir, "model.txt")
    bode_path = os.path.join(cfg.out_dir, "bode.txt")
    nyquist_path = os.path.join(cfg.out_dir, "nyquist.txt")
    diag_path = os.path.join(cfg.out_dir, "diagnostics.txt")
    written = []

    payload = {
        "ts": data.ts,
        "basis": cfg.basis,
        "n_funcs": cfg.n_funcs,
        "feedthrough": int(cfg.feedthrough),
        "epsilon": float(epsilon),
        "mode": cfg.mode,
        "objective": result.objective,
        "min_real_part": result.min_real_part,
        "dense_min_real_part": result.dense_min_real_part,
        "kkt_stationarity": result.kkt["stationarity"],
        "kkt_primal": result.kkt["primal_feasibility"],
        "kkt_dual": result.kkt["dual_feasibility"],
        "kkt_complementarity": result.kkt["complementarity"],
        "n_active": len(result.active_set),
        "theta": result.theta,
        "num": result.fitted_tf.num,
        "den": result.fitted_tf.den,
    }
    for key, val in (("a", cfg.a), ("b", cfg.b), ("c", cfg.c)):
        if val is not None:
            payload[key] = float(val)
    io_formats.write_model_file(model_path, payload)
    with open(model_path, "a") as fh:
        fh.write("\n".join(echo) + "\n")
    written.append(model_path)

    ghat = eval_freq(result.fitted_tf, data.omegas)
    with open(bode_path, "w") as fh:
        fh.write("\n".join(echo) + "\n")
        fh.write("# omega abs_data angle_data abs_fit angle_fit\n")
        for w, g, gh in zip(data.omegas, data.values, ghat):
            fh.write(" ".join(fmt(x) for x in
                              (w, abs(g), np.angle(g), abs(gh), np.angle(gh))) + "\n")
    written.append(bode_path)

    dense = np.linspace(0.0, np.pi / data.ts, cfg.grid_mult * data.omegas.size)
    g_dense_re = np.interp(dense, data.omegas, data.values.real)
    g_dense_im = np.interp(dense, data.omegas, data.values.imag)
    gh_dense = eval_freq(result.fitted_tf, dense)
    with open(nyquist_path, "w") as fh:
        fh.write("\n".join(echo) + "\n")
        fh.write("# omega re_data im_data re_fit im_fit  (data interpolated)\n")
        for row in zip(dense, g_dense_re, g_dense_im, gh_dense.real, gh_dense.imag):
            fh.write(" ".join(fmt(x) for x in row) + "\n")
    written.append(nyquist_path)

    with open(diag_path, "w") as fh:
        fh.write("\n".join(echo) + "\n")
        fh.write(f"epsilon = {fmt(epsilon)}\n")
        fh.write(f"dense_spr_margin = {fmt(result.dense_min_real_part)}\n")
        fh.write(f"active_constraints = {len(result.active_set)}\n")
        for key, val in result.kkt.items():
            fh.write(f"kkt_{key} = {fmt(val)}\n")
        if okid_diag is not None:
            fh.write("okid_singular_values = "
                     + " ".join(fmt(s) for s in okid_diag.singular_values) + "\n")
            fh.write(f"okid_retained_order = {okid_diag.retained_order}\n")
            fh.write(f"okid_ls_residual = {fmt(okid_diag.ls_residual)}\n")
            fh.write("recovered_poles = "
                     + " ".join(f"{fmt(p.real)}{'+' if p.imag >= 0 else '-'}{fmt(abs(p.imag))}j"
                                for p in poles) + "\n")
    written.append(diag_path)
    return written


def run_check(model_path, frf_path, grid_mult):
    payload = io_formats.read_model_file(model_path)
    for key in ("num", "den", "ts", "epsilon"):
        if key not in payload:
            raise ParseError(f"{model_path}: missing '{key}'")
    tf = RationalTf(np.atleast_1d(payload["num"]), np.atleast_1d(payload["den"]),
                    float(payload["ts"]))
    data = io_formats.parse_frf(frf_path)
    ghat = eval_freq(tf, data.omegas)
    fit_err = float(np.max(np.abs(data.values - ghat)) / np.max(np.abs(data.values)))
    dense = np.linspace(0.0, np.pi / data.ts, grid_mult * data.omegas.size)
    _, margin = spr_margin(tf, dense)
    eps = float(payload["epsilon"])
    print(f"relative_fit_error = {fit_err:.6e}")
    print(f"spr_margin = {margin:.6e}")
    print(f"epsilon = {eps:.6e}")
    print(f"spr_satisfied = {int(margin >= eps - 1e-6)}")
    return EXIT_OK


def _parse_overrides(extra):
    overrides = {}
    i = 0
    while i < len(extra):
        tok = extra[i]
        if not tok.startswith("--") or i + 1 >= len(extra):
            raise ConfigError(f"expected '--key value' override, got {tok!r}")
        overrides[tok[2:].replace("-", "_")] = extra[i + 1]
        i += 2
    return overrides


def main(argv=None):
    parser = argparse.ArgumentParser(prog="sprident",
                                     description="SPR transfer-function estimation")
    sub = parser.add_subparsers(dest="command", required=True)
    p_fit = sub.add_parser("fit", help="run the identification pipeline")
    p_fit.add_argument("--config", required=True)
    p_check = sub.add_parser("check", help="re-evaluate an existing model")
    p_check.add_argument("model")
    p_check.add_argument("--frf", required=True)
    p_check.add_argument("--grid-mult", type=int, default=4)
    args, extra = parser.parse_known_args(argv)

    try:
        if args.command == "fit":
            raw = io_formats.parse_config(args.config, _parse_overrides(extra))
            cfg = resolve_config(raw)
            written = run_pipeline(cfg)
            for path in written:
                print(path)
            return EXIT_OK
        if extra:
            raise ConfigError(f"unrecognized arguments: {' '.join(extra)}")
        return run_check(args.model, args.frf, args.grid_mult)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ParseError as exc:
        print(f"parse error [{getattr(exc, 'stage', 'parse')}]: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except InfeasibleError as exc:
        print(f"infeasible [{getattr(exc, 'stage', 'fit')}]: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (NumericalError, EvaluationError, ValueError) as exc:
        print(f"numerical failure [{getattr(exc, 'stage', '?')}]: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
