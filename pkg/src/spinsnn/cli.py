"""``spinsnn`` command line: device characterisation, learning and inference runs.

Every subcommand takes ``--config`` (YAML, see :mod:`spinsnn.config`) and
``--seed``; the global seed expands into one named stream per command so
commands never perturb each other's draws.  Failures print one JSON line on
stderr and exit nonzero.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__, parallel
from .bench import BaselineConfig, CostTable, EnergyLedger, report
from .config import ConfigError, dump_config, load_config, section
from .constants import K_B
from .crossbar import Mode, load_weights, save_weights
from .csvio import write_csv
from .datasets import DEFAULT_DIR, load_mnist
from .devices import DwDeviceState, MtjParams
from .magnetodynamics import (PulseTrain, SheGeometry, SwitchingCurve, calibrate_anisotropy,
                              simulate, switching_curve)
from .magnetodynamics.presets import DEFAULT_DT, VOLATILE_DT, VOLATILE_PRESET, preset
from .magnetodynamics.switching import SWITCHING_HEADER, TRAJECTORY_HEADER, switching_rows
from .neurons import TimestepSchedule
from .plasticity import (STDP_HEADER, STDP_PROB_HEADER, HomeostasisParams, LateralInhibition,
                         StdpMode, StdpParams, stdp_curve)
from .rng import RngStream
from .synapses import INTERVAL_HEADER, calibrate_volatile_amplitude, interval_sweep

BUNDLED_WEIGHTS = DEFAULT_DIR.parent / "weights"


class CliError(Exception):
    pass


# ---------------------------------------------------------------------------
# config -> model objects


def magnet_from_config(cfg: dict):
    m = section(cfg, "magnet")
    p, she = preset(m["preset"])
    changes = {k: m[c] for k, c in (("Ms", "Ms_A_per_m"), ("Ku2", "Ku2_J_per_m3"),
                                     ("volume", "volume_nm3"), ("alpha", "alpha"),
                                     ("temperature", "temperature_K"),
                                     ("polarization", "polarization")) if m[c] is not None}
    p = p.replace(**changes) if changes else p
    s = section(cfg, "she")
    if any(v is not None for v in s.values()):
        base = she or SheGeometry(0.3, 40e-9, 2e-9)
        she = SheGeometry(s["theta_sh"] if s["theta_sh"] is not None else base.theta_sh,
                          s["width_nm"] if s["width_nm"] is not None else base.w_fm,
                          s["thickness_nm"] if s["thickness_nm"] is not None else base.t_hm)
    default_dt = VOLATILE_DT if m["preset"] == "volatile" else DEFAULT_DT
    dt = m["dt_ps"] if m["dt_ps"] is not None else default_dt
    return p, she, dt


def stdp_from_config(cfg: dict) -> StdpParams:
    s = section(cfg, "stdp")
    return StdpParams(A_plus=s["A_plus"], A_minus=s["A_minus"], tau_plus=s["tau_plus_us"],
                      tau_minus=s["tau_minus_us"], mode=s["mode"], p_max=s["p_max"],
                      t_prog=s["t_prog_ns"], window_span=s["window_span"],
                      I0_plus=s["I0_plus_uA"], I0_minus=s["I0_minus_uA"])


def mtj_from_config(cfg: dict) -> MtjParams:
    d = section(cfg, "device")
    return MtjParams(G_P=d["G_P_uS"], G_AP=d["G_AP_uS"], V_h=d["V_h_V"])


def dw_from_config(cfg: dict) -> DwDeviceState:
    d = section(cfg, "device")
    L = d["track_length_nm"]
    mobility = L / (d["cal_current_uA"] * d["cal_time_ns"])
    r_hm = d["pair_energy_fJ"] / (2 * d["cal_current_uA"] ** 2 * d["cal_time_ns"])
    return DwDeviceState(L=L, mobility=mobility, R_HM=r_hm, mtj=mtj_from_config(cfg))


def network_from_config(cfg: dict, n_neurons: int | None = None):
    from .network import NetworkConfig

    n = section(cfg, "network")
    stdp = StdpParams(A_plus=n["A_plus"], A_minus=n["A_minus"], tau_plus=n["tau_ns"],
                      tau_minus=n["tau_ns"], p_max=n["p_max"],
                      mode=StdpMode.PROBABILISTIC if n["probabilistic"] else StdpMode.ANALOG)
    dw = dw_from_config(cfg)
    return NetworkConfig(
        n_neurons=n_neurons or n["n_neurons"], timesteps=n["timesteps"],
        peak_probability=n["peak_probability"],
        schedule=TimestepSchedule(n["write_ns"], n["read_ns"], n["reset_ns"]),
        read_voltage=n["read_voltage_V"], mtj=dw.mtj, synapse=dw, neuron=dw,
        G_s=1.0 / dw.R_HM, stdp=stdp, silent_depression=n["silent_depression"],
        homeostasis=HomeostasisParams(n["theta_increment"], n["theta_decay_us"]),
        inhibition=LateralInhibition(n["inhibition"] > 0, max(n["inhibition"], 0.0)),
        init_high=n["init_high"])


def costs_from_config(cfg: dict) -> CostTable:
    e = section(cfg, "energy")
    return CostTable(**{k[:-3]: v for k, v in e.items() if k.endswith("_fJ")})


# ---------------------------------------------------------------------------
# commands


def _stream(args, name: str) -> RngStream:
    return RngStream(args.seed).named(name)


def _summary(msg: str, args):
    # human-readable notes go to stderr so stdout can carry CSV
    if not args.quiet:
        print(msg, file=sys.stderr)


def cmd_characterize_switching(args, cfg):
    p, she, dt = magnet_from_config(cfg)
    s = section(cfg, "switching")
    rng = _stream(args, "characterize-switching")
    if args.calibrate:
        kt = K_B * p.temperature / p.volume
        p = calibrate_anisotropy(p, s["calibrate_target_uA"], s["pulse_width_ns"], dt,
                                 rng.named("calibrate"), she, n_trials=s["calibrate_n_trials"],
                                 bracket=(s["calibrate_min_kT"] * kt, s["calibrate_max_kT"] * kt))
        _summary(f"calibrated Ku2 = {p.Ku2:.9g} J/m^3 (E_B = {p.barrier_kT:.4g} kT)", args)
    currents = np.linspace(s["current_min_uA"], s["current_max_uA"], s["n_points"])
    results = switching_curve(p, currents, s["pulse_width_ns"], s["n_trials"], dt, rng.named("grid"),
                              she, thermalize=s["thermalize_ns"])
    write_csv(args.out, SWITCHING_HEADER, switching_rows(results))
    curve = SwitchingCurve.from_results(results)
    try:
        i50, width, r2 = curve.fit()
        _summary(f"sigmoid fit: I50 = {i50:.6g} A, width = {width:.6g} A, R^2 = {r2:.6f}", args)
    except (RuntimeError, ValueError) as exc:
        _summary(f"sigmoid fit failed: {exc}", args)


def parse_pulses(text: str) -> PulseTrain:
    """``AMP_uA:WIDTH_ns[@START_ns]`` items separated by commas; starts default to back-to-back."""
    segs, t = [], 0.0
    for item in filter(None, (x.strip() for x in text.split(","))):
        try:
            body, _, start = item.partition("@")
            amp, width = body.split(":")
            amp, width = float(amp) * 1e-6, float(width) * 1e-9
            t0 = float(start) * 1e-9 if start else t
        except ValueError:
            raise CliError(f"bad pulse {item!r}; expected AMP_uA:WIDTH_ns[@START_ns]") from None
        segs.append((t0, width, amp))
        t = t0 + width
    if not segs:
        raise CliError("no pulses given")
    return PulseTrain(tuple(segs))


def cmd_simulate_device(args, cfg):
    p, she, dt = magnet_from_config(cfg)
    train = parse_pulses(args.pulses)
    duration = args.duration_ns * 1e-9 if args.duration_ns else train.total_span + args.settle_ns * 1e-9
    traj = simulate(p, p.easy_axis, train, dt, _stream(args, "simulate-device"), she,
                    stride=args.stride, duration=duration)
    write_csv(args.out, TRAJECTORY_HEADER, traj.rows())


def cmd_stdp_curve(args, cfg):
    s = section(cfg, "stdp")
    p = stdp_from_config(cfg)
    n = s["n_points"]
    if n < 3:
        raise CliError("stdp.n_points must be >= 3")
    span = p.window_span
    lo, hi = -min(p.negative_window, span * p.tau_minus), span * p.tau_plus
    neg = np.linspace(lo, 0.0, n // 2, endpoint=False)
    pos = np.linspace(0.0, hi, n - n // 2)
    header = STDP_PROB_HEADER if p.mode is StdpMode.PROBABILISTIC else STDP_HEADER
    write_csv(args.out, header, stdp_curve(p, np.concatenate([neg, pos])))


def cmd_stp_ltp_sweep(args, cfg):
    # the volatile stack unless the config names it with overrides
    if cfg["magnet"]["preset"] == "volatile":
        magnet = magnet_from_config(cfg)[0]
    else:
        magnet = VOLATILE_PRESET
    s = section(cfg, "stp_ltp")
    dt = s["dt_ps"]
    rng = _stream(args, "stp-ltp-sweep")
    amp = args.amplitude_uA * 1e-6 if args.amplitude_uA is not None else s["amplitude_uA"]
    if amp is None:
        cal = calibrate_volatile_amplitude(magnet, s["calibrate_amplitudes_uA"],
                                           s["calibrate_n_trials"], dt, rng.named("calibrate"))
        amp = cal.amplitude
        _summary(f"calibrated amplitude {amp:.6g} A: P(3 ns) = {cal.p_fast:.3f}, "
                 f"P(6 ns) = {cal.p_slow:.3f}", args)
    points = interval_sweep(magnet, amp, s["intervals_ns"], s["n_trials"], dt, rng.named("sweep"),
                            s["n_pulses"], s["pulse_width_ns"])
    write_csv(args.out, ("amplitude_A",) + INTERVAL_HEADER,
              [(amp, q.interval, q.probability, q.stderr, q.n_trials) for q in points])


def _mnist(args, split):
    try:
        return load_mnist(split, args.mnist)
    except FileNotFoundError as exc:
        raise CliError(str(exc)) from None


def _model_paths(weights: str):
    w = Path(weights)
    return w, w.with_name(w.name + ".thresholds"), w.with_name(w.name + ".ledger.json")


def cmd_train_unsupervised(args, cfg):
    from .network import train_unsupervised

    net = network_from_config(cfg, args.neurons)
    n = cfg["network"]
    ds = _mnist(args, "train")
    n_train = args.n_train if args.n_train is not None else n["n_train"]
    x = ds.scaled()[:n_train or None]
    res = train_unsupervised(x, net, args.epochs, _stream(args, "train-unsupervised"))
    res.ledger.costs = costs_from_config(cfg)
    w, th, led = _model_paths(args.out)
    save_weights(w, res.weights)
    save_weights(th, res.thresholds[None, :])
    res.ledger.save(led)
    _summary(f"trained {net.n_neurons} neurons on {len(x)} images x {args.epochs} epochs; "
             f"max spike share {res.max_spike_share:.3f}; wrote {w}, {th}, {led}", args)


def cmd_eval(args, cfg):
    from .network import assign_labels, classify, network_response

    w, th, _ = _model_paths(args.weights)
    weights = load_weights(w)
    theta = load_weights(th)[0] if th.exists() else np.ones(weights.shape[1])
    net = network_from_config(cfg, weights.shape[1])
    n = cfg["network"]
    n_label = args.n_label if args.n_label is not None else n["n_label"]
    n_test = args.n_test if args.n_test is not None else n["n_test"]
    tr, te = _mnist(args, "train"), _mnist(args, "test")
    rng = _stream(args, "eval")
    counts = network_response(weights, theta, tr.scaled()[:n_label or None], net, rng.named("labeled"))
    assignment = assign_labels(counts, tr.labels[:n_label or None], np.arange(10))
    xt, yt = te.scaled()[:n_test or None], te.labels[:n_test or None]
    test_counts = network_response(weights, theta, xt, net, rng.named("test"))
    pred = classify(test_counts, assignment)
    acc = float(np.mean(pred == yt))
    write_csv(args.out, ("n_label", "n_test", "accuracy", "unused_neurons"),
              [(len(counts), len(yt), acc, int(np.sum(assignment.labels < 0)))])
    if args.results:
        header = ("image_index", "true_label", "predicted") + tuple(
            f"spike_count_{j}" for j in range(test_counts.shape[1]))
        write_csv(args.results, header, ([k, int(yt[k]), int(pred[k])] + list(test_counts[k])
                                         for k in range(len(yt))))


def cmd_infer(args, cfg):
    from .network import FeedforwardConfig, infer_feedforward

    if args.weights:
        weights = args.weights
    else:
        bundled = (BUNDLED_WEIGHTS / "topology.txt").read_text().strip()
        if args.topology != bundled:
            raise CliError(f"--weights required: bundled weights are for {bundled!r}")
        weights = sorted(str(p) for p in BUNDLED_WEIGHTS.glob("layer*.txt"))
    f = section(cfg, "feedforward")
    ff = FeedforwardConfig(peak_probability=f["peak_probability"], mode=Mode(f["crossbar_mode"]),
                           stochastic_center=f["stochastic_center"],
                           stochastic_slope=f["stochastic_slope"], batch=cfg["feedforward"]["batch"])
    te = _mnist(args, "test")
    n = args.n_test if args.n_test is not None else cfg["network"]["n_test"]
    x, y = te.scaled()[:n or None], te.labels[:n or None]
    ledger = EnergyLedger(costs_from_config(cfg))
    res = infer_feedforward(args.topology, weights, x, args.mode, args.timesteps,
                            _stream(args, "infer"), ff, ledger)
    header = ("image_index", "true_label", "predicted") + tuple(
        f"spike_count_{j}" for j in range(res.scores.shape[1]))
    write_csv(args.out, header, ([k, int(y[k]), int(res.predictions[k])] + list(res.scores[k])
                                 for k in range(len(y))))
    if args.ledger:
        ledger.save(args.ledger)
    _summary(f"accuracy {np.mean(res.predictions == y):.4f} on {len(y)} images "
             f"({args.mode}, {args.timesteps} timesteps)", args)


def cmd_energy_report(args, cfg):
    ledger = EnergyLedger.load(args.ledger)
    e = cfg["energy"]
    baseline_j = args.baseline if args.baseline is not None else e["baseline_J"]
    baseline = None
    if baseline_j is not None:
        baseline = BaselineConfig(baseline_j, e["baseline_note"] or "user-supplied")
    rep = report(ledger, baseline, args.inferences)
    if args.out:
        Path(args.out).write_text(rep.csv())
        sys.stdout.write(rep.text())
    else:
        sys.stdout.write(rep.csv())
        if not args.quiet:
            sys.stderr.write(rep.text())


def cmd_show_config(args, cfg):
    sys.stdout.write(dump_config(cfg))


# ---------------------------------------------------------------------------
# parser


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        _fail("usage", message, 2)


def _fail(kind: str, message: str, code: int = 1):
    sys.stderr.write(json.dumps({"error": kind, "message": str(message).splitlines()[0] if message else ""},
                                sort_keys=True) + "\n")
    sys.exit(code)


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="spinsnn", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    common = _Parser(add_help=False)
    common.add_argument("--config", help="YAML config file")
    common.add_argument("--seed", type=int, help="global seed (overrides config)")
    common.add_argument("--threads", type=int, help="worker cap (default: all cores)")
    common.add_argument("--quiet", action="store_true", help="no summary on stderr")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, fn, help_):
        p = sub.add_parser(name, parents=[common], help=help_)
        p.set_defaults(func=fn)
        return p

    p = add("characterize-switching", cmd_characterize_switching, "switching probability grid")
    p.add_argument("--out", default="-")
    p.add_argument("--calibrate", action="store_true", help="tune Ku2 to the calibration target first")

    p = add("simulate-device", cmd_simulate_device, "magnetization trajectory under a pulse train")
    p.add_argument("--pulses", required=True, help="AMP_uA:WIDTH_ns[@START_ns],...")
    p.add_argument("--duration-ns", type=float)
    p.add_argument("--settle-ns", type=float, default=2.0)
    p.add_argument("--stride", type=int, default=10)
    p.add_argument("--out", default="-")

    p = add("stdp-curve", cmd_stdp_curve, "weight change or flip probability against spike delay")
    p.add_argument("--out", default="-")

    p = add("stp-ltp-sweep", cmd_stp_ltp_sweep, "volatile synapse switching against pulse interval")
    p.add_argument("--amplitude-uA", type=float)
    p.add_argument("--out", default="-")

    p = add("train-unsupervised", cmd_train_unsupervised, "STDP training on MNIST")
    p.add_argument("--mnist", help="IDX directory (default: $SPINSNN_MNIST_DIR, then bundled)")
    p.add_argument("--neurons", type=int)
    p.add_argument("--epochs", type=int, default=1)
    p.add_argument("--n-train", type=int)
    p.add_argument("--out", required=True, help="weight file; thresholds and ledger are written beside it")

    p = add("eval", cmd_eval, "label assignment and test accuracy of trained weights")
    p.add_argument("--weights", required=True)
    p.add_argument("--mnist")
    p.add_argument("--n-label", type=int)
    p.add_argument("--n-test", type=int)
    p.add_argument("--out", default="-")
    p.add_argument("--results", help="per-image CSV (index, label, prediction, spike counts)")

    p = add("infer", cmd_infer, "converted feedforward SNN inference from weight files")
    p.add_argument("--topology", required=True)
    p.add_argument("--weights", nargs="+")
    p.add_argument("--mode", choices=("if", "stochastic"), default="if")
    p.add_argument("--timesteps", type=int, default=50)
    p.add_argument("--mnist")
    p.add_argument("--n-test", type=int)
    p.add_argument("--out", default="-")
    p.add_argument("--ledger", help="write the energy ledger (JSON) here")

    p = add("energy-report", cmd_energy_report, "per-event energy breakdown of a ledger")
    p.add_argument("--ledger", required=True)
    p.add_argument("--baseline", type=float, help="CMOS energy per inference [J], user-supplied")
    p.add_argument("--inferences", type=int, default=0)
    p.add_argument("--out")

    add("show-config", cmd_show_config, "print the effective configuration")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.seed is None:
            args.seed = cfg["seed"]
        parallel.set_workers(args.threads if args.threads is not None else cfg["threads"])
        args.func(args, cfg)
    except (CliError, ConfigError) as exc:
        _fail(type(exc).__name__, exc)
    except (ValueError, KeyError, OSError, TypeError) as exc:
        _fail(type(exc).__name__, exc)
    return 0


if __name__ == "__main__":
    sys.exit(main())
