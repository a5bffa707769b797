"""Declarative Monte Carlo experiment runner.

An experiment spec (YAML text, see ``specs/`` for shipped examples)
names a channel model, a list of precoder configurations, an optional
sweep axis and the trial count. Every precoder in a trial sees the same
channel draw, so all reported comparisons are paired. Reports are
deterministic for a fixed spec, byte for byte.
"""

import hashlib
import io
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
import yaml

from . import channels as ch
from .exceptions import (GzfdpError, ParameterError, RankDeficiencyError,
                         SpecValidationError)
from .gram import build_gram
from .ordering import (apply_ordering, identity_ordering, order_alg1,
                       order_alg2, order_bruteforce, order_random)
from .precoding import (OBJECTIVE_MIN, OBJECTIVE_SUM, build_gzfdp_minrate,
                        build_gzfdp_sumrate, build_ugdp, build_zfdp)

TOOL_VERSION = "0.1.0"

CSV_HEADER = "sweep,label,mean_rate_bits,stderr,trials"

_FAMILIES = ("zf", "gzfdp", "zfdp", "ugdp")
_ORDERINGS = ("identity", "alg1", "alg2", "brute", "random")
_SWEEP_AXES = ("power_db", "users", "beta")
_CHANNEL_KINDS = ("fixture", "iid", "kronecker", "fdmimo")

MAX_FAILED_TRIAL_FRACTION = 0.01


@dataclass(frozen=True)
class PrecoderConfig:
    family: str
    nu: int = 0
    group_size: int = 2
    objective: str = OBJECTIVE_SUM
    ordering: str = "identity"
    ordering_k: int = 0  # only for random: number of averaged orderings

    def label(self):
        if self.family == "gzfdp":
            base = "gzfdp(nu=%d)" % self.nu
        elif self.family == "ugdp":
            base = "ugdp(Ng=%d)" % self.group_size
        else:
            base = self.family
        if self.objective == OBJECTIVE_MIN:
            base += ":min"
        if self.ordering != "identity":
            suffix = self.ordering
            if self.ordering == "random":
                suffix = "random:%d" % self.ordering_k
            base += "+" + suffix
        return base


@dataclass
class ExperimentSpec:
    channel: dict
    precoders: tuple
    trials: int
    seed: int
    noise_power: float = 1.0
    power_db: Optional[float] = None
    sweep_axis: Optional[str] = None
    sweep_values: tuple = ()

    def spec_hash(self):
        canon = repr((sorted(self.channel.items()), self.precoders, self.trials,
                      self.seed, self.noise_power, self.power_db,
                      self.sweep_axis, tuple(self.sweep_values)))
        return hashlib.sha256(canon.encode()).hexdigest()[:12]


@dataclass
class RateReport:
    rows: list  # (sweep_value, label, mean, stderr, trials)
    seed: int
    spec_hash: str
    tool_version: str = TOOL_VERSION
    failed_trials: int = 0


def _validate(raw):
    problems = []

    def need(cond, msg):
        if not cond:
            problems.append(msg)
        return cond

    if not isinstance(raw, dict):
        raise SpecValidationError(["spec must be a mapping at top level"])

    channel = raw.get("channel")
    if need(isinstance(channel, dict), "missing or non-mapping 'channel' section"):
        kind = channel.get("kind")
        if need(kind in _CHANNEL_KINDS,
                "channel.kind must be one of %s, got %r" % (_CHANNEL_KINDS, kind)):
            if kind == "fixture":
                need("path" in channel, "fixture channel needs a 'path'")
            elif kind in ("iid", "kronecker"):
                for key in ("n_users", "n_antennas"):
                    need(isinstance(channel.get(key), int) and channel[key] >= 1,
                         "channel.%s must be a positive integer" % key)
                if kind == "kronecker":
                    for key in ("beta_t", "beta_r"):
                        val = channel.get(key, 0.0)
                        need(isinstance(val, (int, float)) and 0 <= val < 1,
                             "channel.%s must lie in [0,1)" % key)

    trials = raw.get("trials", 1)
    need(isinstance(trials, int) and trials >= 1, "trials must be a positive integer")
    if isinstance(channel, dict) and channel.get("kind") == "fixture":
        need(trials == 1, "fixture channels force trials = 1")

    seed = raw.get("seed")
    need(isinstance(seed, int), "seed must be a 64-bit integer")

    noise = raw.get("noise_power", 1.0)
    need(isinstance(noise, (int, float)) and noise > 0,
         "noise_power must be strictly positive")

    precoders = raw.get("precoders")
    if need(isinstance(precoders, list) and precoders,
            "need a non-empty 'precoders' list"):
        for i, cfg in enumerate(precoders):
            if not need(isinstance(cfg, dict), "precoders[%d] must be a mapping" % i):
                continue
            fam = cfg.get("family")
            need(fam in _FAMILIES,
                 "precoders[%d].family must be one of %s" % (i, _FAMILIES))
            obj = cfg.get("objective", "sum")
            need(obj in (OBJECTIVE_SUM, OBJECTIVE_MIN),
                 "precoders[%d].objective must be 'sum' or 'min'" % i)
            if fam in ("zfdp", "ugdp"):
                need(obj != OBJECTIVE_MIN,
                     "precoders[%d]: %s supports the sum objective only" % (i, fam))
            ordering = str(cfg.get("ordering", "identity"))
            base = ordering.split(":", 1)[0]
            need(base in _ORDERINGS,
                 "precoders[%d].ordering must be one of %s" % (i, _ORDERINGS))
            if base == "random":
                parts = ordering.split(":", 1)
                need(len(parts) == 2 and parts[1].isdigit() and int(parts[1]) >= 1,
                     "precoders[%d].ordering 'random:k' needs a positive k" % i)

    sweep = raw.get("sweep")
    power_db = raw.get("power_db")
    if sweep is None:
        need(isinstance(power_db, (int, float)),
             "need 'power_db' when no sweep is given")
    else:
        if need(isinstance(sweep, dict), "'sweep' must be a mapping"):
            axis = sweep.get("axis")
            if need(axis in _SWEEP_AXES,
                    "sweep.axis must be one of %s, got %r" % (_SWEEP_AXES, axis)):
                values = sweep.get("values")
                if axis == "power_db" and values is None:
                    ok = all(isinstance(sweep.get(k), (int, float))
                             for k in ("lo", "hi", "step"))
                    need(ok, "power_db sweep needs 'values' or lo/hi/step")
                else:
                    need(isinstance(values, list) and values,
                         "sweep.values must be a non-empty list")
                if axis != "power_db":
                    need(isinstance(power_db, (int, float)),
                         "need a fixed 'power_db' for a %s sweep" % axis)

    unknown = set(raw) - {"channel", "precoders", "trials", "seed",
                          "noise_power", "power_db", "sweep"}
    need(not unknown, "unknown top-level keys: %s" % sorted(unknown))

    if problems:
        raise SpecValidationError(problems)


def _parse_precoder(cfg):
    ordering = str(cfg.get("ordering", "identity"))
    ordering_k = 0
    if ordering.startswith("random"):
        ordering, _, k = ordering.partition(":")
        ordering_k = int(k)
    return PrecoderConfig(
        family=cfg["family"],
        nu=int(cfg.get("nu", 0)),
        group_size=int(cfg.get("group_size", 2)),
        objective=cfg.get("objective", OBJECTIVE_SUM),
        ordering=ordering,
        ordering_k=ordering_k,
    )


def parse_spec(text):
    """Parse and validate a YAML experiment spec; raise with all violations."""
    raw = yaml.safe_load(text)
    _validate(raw)
    sweep = raw.get("sweep")
    axis, values = None, ()
    if sweep is not None:
        axis = sweep["axis"]
        if "values" in sweep and sweep["values"] is not None:
            values = tuple(sweep["values"])
        else:
            lo, hi, step = sweep["lo"], sweep["hi"], sweep["step"]
            values = tuple(np.arange(lo, hi + step / 2, step).tolist())
    return ExperimentSpec(
        channel=dict(raw["channel"]),
        precoders=tuple(_parse_precoder(c) for c in raw["precoders"]),
        trials=int(raw.get("trials", 1)),
        seed=int(raw["seed"]),
        noise_power=float(raw.get("noise_power", 1.0)),
        power_db=(float(raw["power_db"]) if raw.get("power_db") is not None else None),
        sweep_axis=axis,
        sweep_values=values,
    )


def load_spec(path):
    with open(path, "r", encoding="utf-8") as fh:
        return parse_spec(fh.read())


def _trial_seed(master_seed, sweep_index, trial):
    seq = np.random.SeedSequence([int(master_seed) & (2 ** 63 - 1),
                                  sweep_index, trial])
    return int(seq.generate_state(1, np.uint64)[0])


def _draw_channel(spec, sweep_value, sweep_index, trial):
    cfg = spec.channel
    kind = cfg["kind"]
    if kind == "fixture":
        return ch.load_channel_fixture(cfg["path"])
    # the channel only depends on the sweep for users/beta axes; keep the
    # same draws across a power sweep so curves are paired along the axis
    idx = 0 if spec.sweep_axis in (None, "power_db") else sweep_index
    seed = _trial_seed(spec.seed, idx, trial)
    if kind == "iid":
        n = cfg["n_users"]
        if spec.sweep_axis == "users":
            n = int(sweep_value)
        return ch.gen_iid_gaussian(n, cfg["n_antennas"], seed)
    if kind == "kronecker":
        beta_t = float(cfg.get("beta_t", 0.0))
        beta_r = float(cfg.get("beta_r", 0.0))
        if spec.sweep_axis == "beta":
            beta_t = beta_r = float(sweep_value)
        n = cfg["n_users"]
        if spec.sweep_axis == "users":
            n = int(sweep_value)
        return ch.gen_kronecker_rayleigh(
            n, cfg["n_antennas"], ch.CorrelationSpec(beta_t, beta_r), seed)
    if kind == "fdmimo":
        geom_kwargs = {k: v for k, v in cfg.items() if k not in ("kind",)}
        return ch.gen_fdmimo_los(ch.FdMimoGeometry(**geom_kwargs))
    raise ParameterError("unknown channel kind %r" % kind)


def _choose_ordering(cfg, gram, power_linear, noise_power, seed):
    if cfg.ordering == "identity":
        return [identity_ordering(gram.n_users)]
    if cfg.ordering == "alg1":
        return [order_alg1(gram, min(max(cfg.nu, 1), gram.n_users - 1))]
    if cfg.ordering == "alg2":
        return [order_alg2(gram)]
    if cfg.ordering == "brute":
        return [order_bruteforce(gram, cfg.nu, cfg.objective, power_linear,
                                 noise_power)]
    if cfg.ordering == "random":
        return [order_random(gram.n_users, np.random.SeedSequence([seed, j]))
                for j in range(cfg.ordering_k)]
    raise ParameterError("unknown ordering %r" % cfg.ordering)


def _evaluate(cfg, channel, power_linear, noise_power, trial_seed):
    gram = build_gram(channel, noise_power)
    orderings = _choose_ordering(cfg, gram, power_linear, noise_power, trial_seed)
    values = []
    for ordering in orderings:
        hp = apply_ordering(channel, ordering)
        if cfg.family == "zf":
            sol = build_gzfdp_sumrate(hp, None, 0, power_linear, noise_power)
        elif cfg.family == "gzfdp":
            if cfg.objective == OBJECTIVE_MIN:
                sol = build_gzfdp_minrate(hp, None, cfg.nu, power_linear,
                                          noise_power)
            else:
                sol = build_gzfdp_sumrate(hp, None, cfg.nu, power_linear,
                                          noise_power)
        elif cfg.family == "zfdp":
            sol = build_zfdp(hp, power_linear, noise_power)
        elif cfg.family == "ugdp":
            sol = build_ugdp(hp, cfg.group_size, power_linear, noise_power)
        else:
            raise ParameterError("unknown family %r" % cfg.family)
        values.append(sol.min_rate if cfg.objective == OBJECTIVE_MIN
                      else sol.sum_rate)
    return float(np.mean(values))


def db_to_linear(db):
    return 10.0 ** (db / 10.0)


def run_experiment(spec):
    """Run all trials for every sweep point and aggregate paired rates."""
    sweep_values = spec.sweep_values if spec.sweep_axis else (None,)
    rows = []
    failed_total = 0
    for sweep_index, sweep_value in enumerate(sweep_values):
        if spec.sweep_axis == "power_db":
            power_linear = db_to_linear(float(sweep_value))
        else:
            power_linear = db_to_linear(float(spec.power_db))
        samples = [[] for _ in spec.precoders]
        failed = 0
        for trial in range(spec.trials):
            try:
                channel = _draw_channel(spec, sweep_value, sweep_index, trial)
                trial_values = [
                    _evaluate(cfg, channel, power_linear, spec.noise_power,
                              _trial_seed(spec.seed, sweep_index, trial))
                    for cfg in spec.precoders
                ]
            except RankDeficiencyError:
                failed += 1
                continue
            for bucket, value in zip(samples, trial_values):
                bucket.append(value)
        if failed and failed / spec.trials >= MAX_FAILED_TRIAL_FRACTION:
            raise RankDeficiencyError(
                "%d of %d trials hit rank-deficient channels at sweep "
                "point %r (limit is %.0f%%)"
                % (failed, spec.trials, sweep_value,
                   100 * MAX_FAILED_TRIAL_FRACTION))
        failed_total += failed
        sweep_repr = (float(sweep_value) if sweep_value is not None
                      else float(spec.power_db))
        for cfg, bucket in zip(spec.precoders, samples):
            vals = np.asarray(bucket, dtype=float)
            mean = float(vals.mean())
            stderr = float(vals.std(ddof=1) / math.sqrt(len(vals))) \
                if len(vals) > 1 else 0.0
            rows.append((sweep_repr, cfg.label(), mean, stderr, len(vals)))
    rows.sort(key=lambda r: (r[0], r[1]))
    return RateReport(rows=rows, seed=spec.seed, spec_hash=spec.spec_hash(),
                      failed_trials=failed_total)


def report_to_csv(report):
    buf = io.StringIO()
    buf.write(CSV_HEADER + "\n")
    for sweep_value, label, mean, stderr, trials in report.rows:
        buf.write("%.17g,%s,%.17g,%.17g,%d\n"
                  % (sweep_value, label, mean, stderr, trials))
    return buf.getvalue()


def emit_report(report, path):
    """Write the CSV; re-reading yields identical rows."""
    text = report_to_csv(report)
    with open(path, "w", encoding="ascii", newline="\n") as fh:
        fh.write(text)


def read_report_rows(path):
    rows = []
    with open(path, "r", encoding="ascii") as fh:
        header = fh.readline().strip()
        if header != CSV_HEADER:
            raise GzfdpError("unexpected report header %r" % header)
        for line in fh:
            sweep, label, mean, stderr, trials = line.strip().split(",")
            rows.append((float(sweep), label, float(mean), float(stderr),
                         int(trials)))
    return rows
