"""Configuration-driven command line: solve single instances, run sweeps,
export cone programs, and score policies.

The config is INI-style with known sections and keys only; anything
unrecognized is rejected with its location. Exit codes: 0 success,
2 configuration error, 3 infeasible constraint.
"""

from __future__ import annotations

import argparse
import configparser
import sys
from dataclasses import dataclass
from pathlib import Path

from . import baselines, conic_export, evaluation, mad_dro, wasserstein_dro
from .core_model import InfeasibleConstraintError, ModelParams, Policy
from .distributions import (
    Beta,
    DemandDistribution,
    Empirical,
    Lognormal,
    MomentSummary,
    SampleSet,
    Uniform,
    estimate_moments,
    load_samples,
    sample,
    solver_support,
)


class ConfigError(Exception):
    pass


_SCHEMA = {
    "model": {"p", "c", "c_m", "delta", "delta_grid"},
    "support": {"lo", "hi"},
    "distribution": {"kind", "lo", "hi", "log_mean", "log_std", "alpha", "beta", "file", "values"},
    "methods": {"names"},
    "wasserstein": {"C", "epsilon"},
    "wtc": {"tau", "tau_grid"},
    "experiment": {"n_in", "n_eval", "n_trials", "base_seed", "known_sample_size"},
    "moments": {"mean", "mad"},
    "samples": {"file", "values"},
    "output": {"dir"},
}


@dataclass
class RunConfig:
    raw: configparser.ConfigParser
    path: Path

    def has(self, section: str, key: str) -> bool:
        return self.raw.has_option(section, key)

    def get(self, section: str, key: str, required: bool = False) -> str | None:
        if not self.raw.has_option(section, key):
            if required:
                raise ConfigError(f"missing required key [{section}] {key}")
            return None
        return self.raw.get(section, key)

    def get_float(self, section: str, key: str, required: bool = False) -> float | None:
        text = self.get(section, key, required)
        if text is None:
            return None
        try:
            return float(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be a number, got {text!r}") from None

    def get_int(self, section: str, key: str, default: int | None = None) -> int | None:
        text = self.get(section, key)
        if text is None:
            return default
        try:
            return int(text)
        except ValueError:
            raise ConfigError(f"[{section}] {key} must be an integer, got {text!r}") from None


def load_config(path: str | Path) -> RunConfig:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # keys are case-sensitive ('C' vs 'c_m')
    try:
        parser.read(path)
    except configparser.Error as err:
        raise ConfigError(f"cannot parse {path}: {err}") from None
    for section in parser.sections():
        if section not in _SCHEMA:
            raise ConfigError(f"unknown section [{section}] in {path}")
        for key in parser.options(section):
            if key not in _SCHEMA[section]:
                raise ConfigError(f"unknown key [{section}] {key} in {path}")
    return RunConfig(parser, path)


def _parse_grid(text: str, location: str) -> tuple[float, ...]:
    text = text.strip()
    try:
        if ":" in text:
            start, stop, step = (float(t) for t in text.split(":"))
            if step <= 0:
                raise ValueError
            values, v, k = [], start, 0
            while v <= stop + 1e-12:
                values.append(round(v, 12))
                k += 1
                v = start + k * step
            return tuple(values)
        return tuple(float(t) for t in text.split(","))
    except ValueError:
        raise ConfigError(f"{location} must be 'start:stop:step' or a comma list, got {text!r}") from None


def _model_params(cfg: RunConfig, delta: float, support: tuple[float, float]) -> ModelParams:
    p = cfg.get_float("model", "p", required=True)
    c = cfg.get_float("model", "c", required=True)
    c_m = cfg.get_float("model", "c_m", required=True)
    try:
        return ModelParams(p, c, c_m, delta, support[0], support[1])
    except ValueError as err:
        raise ConfigError(f"invalid model parameters: {err}") from None


def _distribution(cfg: RunConfig) -> DemandDistribution:
    kind = cfg.get("distribution", "kind", required=True)
    try:
        if kind == "uniform":
            return Uniform(cfg.get_float("distribution", "lo", True), cfg.get_float("distribution", "hi", True))
        if kind == "lognormal":
            return Lognormal(
                cfg.get_float("distribution", "log_mean", True),
                cfg.get_float("distribution", "log_std", True),
            )
        if kind == "beta":
            return Beta(
                cfg.get_float("distribution", "alpha", True),
                cfg.get_float("distribution", "beta", True),
            )
        if kind == "empirical":
            return Empirical(tuple(_config_samples(cfg, section="distribution").values))
    except ValueError as err:
        raise ConfigError(f"invalid [distribution]: {err}") from None
    raise ConfigError(f"[distribution] kind must be uniform|lognormal|beta|empirical, got {kind!r}")


def _config_samples(cfg: RunConfig, section: str = "samples") -> SampleSet:
    file = cfg.get(section, "file")
    if file is not None:
        path = Path(file)
        if not path.is_absolute():
            path = cfg.path.parent / path
        if not path.exists():
            raise ConfigError(f"[{section}] file not found: {path}")
        return load_samples(path)
    values = cfg.get(section, "values")
    if values is not None:
        try:
            return SampleSet([float(t) for t in values.split(",")])
        except ValueError as err:
            raise ConfigError(f"[{section}] values: {err}") from None
    raise ConfigError(f"missing required key [{section}] file (or values)")


def _obtain_samples(cfg: RunConfig, seed_override: int | None = None) -> SampleSet:
    """Samples from [samples], or drawn from [distribution] when absent."""
    if cfg.raw.has_section("samples"):
        return _config_samples(cfg)
    dist = _distribution(cfg)
    n_in = cfg.get_int("experiment", "n_in", 10)
    base_seed = seed_override if seed_override is not None else cfg.get_int("experiment", "base_seed", 0)
    return sample(dist, n_in, (base_seed, 0, 0))


def _support(cfg: RunConfig, samples: SampleSet | None) -> tuple[float, float]:
    lo_text, hi_text = cfg.get("support", "lo"), cfg.get("support", "hi")
    if hi_text is None and lo_text is None:
        if cfg.raw.has_section("distribution"):
            dist = _distribution(cfg)
            if samples is None and isinstance(dist, (Lognormal, Empirical)):
                raise ConfigError("[support] is required when no samples are available")
            return solver_support(dist, samples)
        raise ConfigError("missing required section [support] (or [distribution])")
    if hi_text == "auto":
        if samples is None:
            raise ConfigError("[support] hi = auto needs samples")
        lo = float(lo_text) if lo_text is not None else 0.0
        return lo, solver_support(Empirical(tuple(samples.values)), samples)[1]
    try:
        return float(lo_text if lo_text is not None else 0.0), float(hi_text)
    except ValueError:
        raise ConfigError(f"[support] lo/hi must be numbers, got {lo_text!r}/{hi_text!r}") from None


def _epsilon(cfg: RunConfig, n: int) -> float:
    eps = cfg.get_float("wasserstein", "epsilon")
    if eps is not None:
        return eps
    C = cfg.get_float("wasserstein", "C")
    return wasserstein_dro.radius_from_samples(n, 0.1 if C is None else C)


def _single_delta(cfg: RunConfig) -> float:
    delta = cfg.get_float("model", "delta")
    if delta is None:
        raise ConfigError("missing required key [model] delta (solve/eval/export need one value)")
    return delta


def _out_dir(cfg: RunConfig, override: str | None) -> Path:
    text = override or cfg.get("output", "dir") or "."
    out = Path(text)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _cmd_solve(args) -> int:
    cfg = load_config(args.config)
    method = args.method or (cfg.get("methods", "names", required=True).split(",")[0].strip())
    delta = _single_delta(cfg)
    tau = cfg.get_float("wtc", "tau")

    if method == "benchmark":
        params = _model_params(cfg, delta, (0.0, 1.0))
        res = baselines.uniform_benchmark_solve(params)
        print(f"method=benchmark x={res.policy.x:.6f} q={res.policy.q:.6f} value={res.value:.6f}")
        return 0

    if method == "mad" and cfg.raw.has_section("moments"):
        moments = MomentSummary(
            cfg.get_float("moments", "mean", True), cfg.get_float("moments", "mad", True)
        )
        samples = None
    else:
        samples = _obtain_samples(cfg, args.seed)
        moments = estimate_moments(samples) if method == "mad" else None
    support = _support(cfg, samples)
    params = _model_params(cfg, delta, support)

    if method == "mad":
        amb = mad_dro.MadAmbiguity(moments, support[0], support[1])
        res = (
            mad_dro.solve_closed_form(params, amb)
            if tau is None
            else mad_dro.solve_wtc_constrained(params, amb, tau)
        )
        print(
            f"method=mad x={res.policy.x:.6f} q={res.policy.q:.6f} "
            f"value={res.value:.6f} case={res.case_label}"
        )
        return 0
    if method == "wasserstein":
        eps = _epsilon(cfg, len(samples))
        amb = wasserstein_dro.WassersteinAmbiguity(samples, eps, support[0], support[1])
        res = (
            wasserstein_dro.solve(params, amb)
            if tau is None
            else wasserstein_dro.solve_wtc_constrained(params, amb, tau)
        )
        print(f"method=wasserstein x={res.policy.x:.6f} q={res.policy.q:.6f} value={res.value:.6f}")
        return 0
    if method in ("saa", "nqr"):
        res = baselines.saa_solve(params, samples, restrict_equal=(method == "nqr"))
        print(f"method={method} x={res.policy.x:.6f} q={res.policy.q:.6f} value={res.value:.6f}")
        return 0
    raise ConfigError(f"unknown method {method!r}")


def _trial_config(cfg: RunConfig, seed_override: int | None) -> evaluation.TrialConfig:
    dist = _distribution(cfg)
    names = cfg.get("methods", "names", required=True)
    methods = tuple(m.strip() for m in names.split(",") if m.strip())
    delta_text = cfg.get("model", "delta_grid")
    if delta_text is not None:
        delta_grid = _parse_grid(delta_text, "[model] delta_grid")
    elif cfg.has("model", "delta"):
        delta_grid = (cfg.get_float("model", "delta"),)
    else:
        delta_grid = evaluation.DEFAULT_DELTA_GRID
    tau_text = cfg.get("wtc", "tau_grid")
    tau_grid = _parse_grid(tau_text, "[wtc] tau_grid") if tau_text is not None else None
    base_seed = seed_override if seed_override is not None else cfg.get_int("experiment", "base_seed", 0)
    C = cfg.get_float("wasserstein", "C")
    try:
        return evaluation.TrialConfig(
            true_dist=dist,
            methods=methods,
            delta_grid=delta_grid,
            tau=cfg.get_float("wtc", "tau"),
            tau_grid=tau_grid,
            n_in=cfg.get_int("experiment", "n_in", 10),
            n_eval=cfg.get_int("experiment", "n_eval", 10_000),
            n_trials=cfg.get_int("experiment", "n_trials", 50),
            base_seed=base_seed,
            wasserstein_C=0.1 if C is None else C,
            known_sample_size=cfg.get_int("experiment", "known_sample_size", 100_000),
        )
    except ValueError as err:
        raise ConfigError(str(err)) from None


def _cmd_experiment(args) -> int:
    cfg = load_config(args.config)
    config = _trial_config(cfg, args.seed)
    params = _model_params(cfg, 0.0, (0.0, 1.0))
    report = evaluation.run_experiment(config, params, jobs=args.jobs)
    out = _out_dir(cfg, args.out) / "experiment.csv"
    out.write_text(evaluation.report_to_csv(report))
    for key, message in report.failed.items():
        print(f"cell {key} failed: {message}", file=sys.stderr)
    print(out)
    return 0


def _cmd_export_conic(args) -> int:
    cfg = load_config(args.config)
    samples = _obtain_samples(cfg, args.seed)
    support = _support(cfg, samples)
    params = _model_params(cfg, _single_delta(cfg), support)
    eps = _epsilon(cfg, len(samples))
    tau = args.tau if args.tau is not None else cfg.get_float("wtc", "tau")
    amb = wasserstein_dro.WassersteinAmbiguity(samples, eps, support[0], support[1])
    program = conic_export.build_socp(params, amb, tau)
    name = f"conic_n{len(samples)}.qrcp" if tau is None else f"conic_n{len(samples)}_tau{tau:g}.qrcp"
    out = _out_dir(cfg, args.out) / name
    out.write_text(conic_export.serialize(program))
    print(out)
    return 0


def _load_policy(path: str) -> Policy:
    tokens = Path(path).read_text().split()
    if len(tokens) != 2:
        raise ConfigError(f"policy file {path} must hold exactly two decimals: x q")
    return Policy(float(tokens[0]), float(tokens[1]))


def _cmd_eval(args) -> int:
    cfg = load_config(args.config)
    policy = _load_policy(args.policy)
    dist = _distribution(cfg)
    base_seed = args.seed if args.seed is not None else cfg.get_int("experiment", "base_seed", 0)
    n_eval = cfg.get_int("experiment", "n_eval", 10_000)
    params = _model_params(cfg, _single_delta(cfg), (0.0, 1.0))
    eval_samples = sample(dist, n_eval, (base_seed, 0, 1))
    profit = evaluation.mc_expected_profit(params, policy, eval_samples)
    try:
        wtc = evaluation.mc_wtc_ratio(params, policy, eval_samples)
        wtc_text = f"{wtc:.6f}"
    except ValueError:
        wtc_text = "undefined"
    print(f"x={policy.x:.6f} q={policy.q:.6f} profit={profit:.6f} wtc_ratio={wtc_text}")
    return 0


def run(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="qrdro", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", required=True, help="path to the INI config")
        p.add_argument("--seed", type=int, default=None, help="override [experiment] base_seed")

    p_solve = sub.add_parser("solve", help="solve one instance and print the policy")
    common(p_solve)
    p_solve.add_argument("--method", default=None, help="mad|wasserstein|saa|nqr|benchmark")
    p_solve.set_defaults(handler=_cmd_solve)

    p_exp = sub.add_parser("experiment", help="run the full sweep and write CSV")
    common(p_exp)
    p_exp.add_argument("--out", default=None, help="output directory")
    p_exp.add_argument("--jobs", type=int, default=1, help="parallel trial workers")
    p_exp.set_defaults(handler=_cmd_experiment)

    p_conic = sub.add_parser("export-conic", help="write the serialized cone program")
    common(p_conic)
    p_conic.add_argument("--out", default=None)
    p_conic.add_argument("--tau", type=float, default=None)
    p_conic.set_defaults(handler=_cmd_export_conic)

    p_eval = sub.add_parser("eval", help="score a policy file on a distribution")
    common(p_eval)
    p_eval.add_argument("--policy", required=True, help="text file with 'x q'")
    p_eval.set_defaults(handler=_cmd_eval)

    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as err:
        print(f"config error: {err}", file=sys.stderr)
        return 2
    except InfeasibleConstraintError as err:
        print(f"infeasible: {err}", file=sys.stderr)
        return 3


def main() -> int:
    return run(sys.argv[1:])


if __name__ == "__main__":
    sys.exit(main())
