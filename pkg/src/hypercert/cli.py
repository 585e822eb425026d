"""Batch experiment runner with machine-readable JSON/CSV reports.

Subcommands: chsh, selftest, bounds, certify, tomo.  A run is a deterministic
function of (config, seed): reports embed the seed and a hash of the
effective config and contain no timestamps, so identical invocations produce
byte-identical files.  Exit codes: 0 success/PASS, 1 protocol-level rejection
(no Bell violation, certification mismatch, or FAIL verdict), 2 usage error.
"""

import argparse
import hashlib
import json
import os
import sys
import tempfile
from dataclasses import dataclass, replace

import numpy as np

from . import bounds as bounds_mod
from . import chsh as chsh_mod
from . import isometry, optics, tomography
from .chsh import DOF_POL, DOF_SPAT
from .rng import substream
from .states import BellLabel, HyperBellLabel, NoiseSpec, hyper_bell_vector, source_density

SCHEMA_VERSION = 1


class ConfigError(Exception):
    pass


@dataclass(frozen=True)
class ExperimentConfig:
    label: HyperBellLabel = HyperBellLabel(BellLabel.PHI_PLUS, BellLabel.PHI_PLUS)
    noise: NoiseSpec = NoiseSpec()
    copies: int = 10000
    chsh_shots: int = 100000
    tomography_shots: int = 100000
    seed: int = 0
    out: str = "out"
    hardware_model: bool = False
    source_label: HyperBellLabel | None = None  # actual emitted label; defaults to the claim

    def __post_init__(self):
        if self.copies < 2 or self.copies % 2 != 0:
            raise ConfigError(f"copies must be a positive even number, got {self.copies}")
        if self.chsh_shots < 1 or self.tomography_shots < 1:
            raise ConfigError("shot counts must be >= 1")

    @property
    def emitted_label(self) -> HyperBellLabel:
        return self.source_label or self.label

    def as_dict(self) -> dict:
        return {
            "label": self.label.key,
            "noise": self.noise.as_dict(),
            "copies": self.copies,
            "chsh_shots": self.chsh_shots,
            "tomography_shots": self.tomography_shots,
            "seed": self.seed,
            "out": self.out,
            "hardware_model": self.hardware_model,
            "source_label": self.source_label.key if self.source_label else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        d = dict(d)
        try:
            kwargs = {}
            if "label" in d:
                kwargs["label"] = HyperBellLabel.parse(d.pop("label"))
            if d.get("source_label") is not None:
                kwargs["source_label"] = HyperBellLabel.parse(d.pop("source_label"))
            d.pop("source_label", None)
            if "noise" in d:
                kwargs["noise"] = NoiseSpec.from_dict(d.pop("noise"))
            for key in ("copies", "chsh_shots", "tomography_shots", "seed", "out", "hardware_model"):
                if key in d:
                    kwargs[key] = d.pop(key)
            if d:
                raise ConfigError(f"unknown config keys: {sorted(d)}")
            return cls(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    @classmethod
    def from_file(cls, path: str) -> "ExperimentConfig":
        try:
            with open(path) as fh:
                doc = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError("config root must be a JSON object")
        return cls.from_dict(doc)

    def hash(self) -> str:
        doc = self.as_dict()
        doc.pop("out")  # the target directory does not affect any result
        blob = json.dumps(doc, sort_keys=True).encode()
        return hashlib.sha256(blob).hexdigest()


def _atomic_write(path: str, text: str) -> None:
    d = os.path.dirname(path) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-", text=True)
    try:
        with os.fdopen(fd, "w") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _write_report(cfg: ExperimentConfig, name: str, body: dict) -> str:
    os.makedirs(cfg.out, exist_ok=True)
    report = {
        "schema_version": SCHEMA_VERSION,
        "seed": cfg.seed,
        "config_sha256": cfg.hash(),
        **body,
    }
    path = os.path.join(cfg.out, name)
    _atomic_write(path, json.dumps(report, indent=2) + "\n")
    return path


def _source_state(cfg: ExperimentConfig):
    """Pure vector for an ideal source, density operator otherwise."""
    if cfg.noise.is_ideal:
        return hyper_bell_vector(cfg.emitted_label)
    return source_density(cfg.emitted_label, cfg.noise)


def _run_chsh(cfg: ExperimentConfig) -> dict:
    state = _source_state(cfg)
    if cfg.hardware_model:
        return optics.chsh_hardware_sampled(
            state, cfg.label, cfg.chsh_shots, cfg.seed,
            alice_rotation_pol=cfg.noise.rotation_angle_pol,
            alice_rotation_spat=cfg.noise.rotation_angle_spat,
        )
    settings = chsh_mod.canonical_settings(
        cfg.label, cfg.noise.rotation_angle_pol, cfg.noise.rotation_angle_spat
    )
    return {
        dof: chsh_mod.chsh_sampled(state, settings, dof, cfg.chsh_shots, cfg.seed)
        for dof in (DOF_POL, DOF_SPAT)
    }


def cmd_chsh(cfg: ExperimentConfig, export_shots: bool = False) -> int:
    reports = _run_chsh(cfg)
    violation = all(reports[d].i_value > 2.0 for d in (DOF_POL, DOF_SPAT))
    body = {
        "command": "chsh",
        "label": cfg.label.key,
        "noise": cfg.noise.as_dict(),
        "hardware_model": cfg.hardware_model,
        "shots_per_pair": cfg.chsh_shots,
        "reports": {d: reports[d].as_dict() for d in (DOF_POL, DOF_SPAT)},
        "violation": violation,
    }
    _write_report(cfg, "chsh_report.json", body)
    if export_shots:
        lines = []
        for dof in (DOF_POL, DOF_SPAT):
            for rec in chsh_mod.iter_shot_records(reports[dof]):
                lines.append(json.dumps(rec))
        _atomic_write(os.path.join(cfg.out, "shots.jsonl"), "\n".join(lines) + "\n")
    return 0 if violation else 1


_PAIR_TO_POL = {}
for _pol in BellLabel:
    for _pair in isometry.success_rule(HyperBellLabel(_pol, BellLabel.PHI_PLUS)):
        _PAIR_TO_POL[_pair] = _pol


def _sample_counts(probabilities: dict, n: int, gen) -> dict:
    keys = sorted(probabilities)
    p = np.clip(np.array([probabilities[k] for k in keys]), 0.0, None)
    p = p / p.sum()
    c = gen.multinomial(n, p)
    return {k: int(c[i]) for i, k in enumerate(keys) if c[i]}


def cmd_selftest(cfg: ExperimentConfig) -> int:
    state = _source_state(cfg)
    m = cfg.copies
    # copies are i.i.d., so a random half/half split reduces to the exact half sizes
    n1 = m // 2

    cfg1 = isometry.IsometryConfig.canonical(DOF_SPAT).with_alice_rotation(cfg.noise.rotation_angle_spat)
    cfg2 = isometry.IsometryConfig.canonical(DOF_POL).with_alice_rotation(cfg.noise.rotation_angle_pol)
    step1 = isometry.run_step1_spatial(state, cfg.label, cfg1)
    step2 = isometry.run_step2_polarization(state, cfg.label, cfg2)

    c1 = _sample_counts(step1.branch_probabilities(), n1, substream(cfg.seed, "selftest", "step1"))
    c2 = _sample_counts(step2.branch_probabilities(), m - n1, substream(cfg.seed, "selftest", "step2"))

    acc1 = sum(n for k, n in c1.items() if BellLabel.parse(k) == cfg.label.spat) / n1
    accepted_pairs = {f"{a.key}|{b.key}" for a, b in isometry.success_rule(cfg.label)}
    acc2 = sum(n for k, n in c2.items() if k in accepted_pairs) / (m - n1)

    certified_spat = BellLabel.parse(max(c1, key=c1.get))
    votes = {pol: 0 for pol in BellLabel}
    for k, n in c2.items():
        a, b = k.split("|")
        pol = _PAIR_TO_POL.get((BellLabel.parse(a), BellLabel.parse(b)))
        if pol is not None:
            votes[pol] += n
    certified_pol = max(votes, key=lambda p: votes[p])
    certified = HyperBellLabel(certified_pol, certified_spat)
    match = certified == cfg.label

    body = {
        "command": "selftest",
        "label": cfg.label.key,
        "noise": cfg.noise.as_dict(),
        "copies": m,
        "step1": {
            "copies": n1,
            "outcome_counts": c1,
            "exact_probabilities": step1.branch_probabilities(),
            "acceptance_rate": acc1,
            "exact_acceptance": step1.acceptance_probability,
            "extracted_fidelity": step1.extracted_fidelity,
        },
        "step2": {
            "copies": m - n1,
            "outcome_counts": c2,
            "exact_probabilities": step2.branch_probabilities(),
            "acceptance_rate": acc2,
            "exact_acceptance": step2.acceptance_probability,
            "extracted_fidelity": step2.extracted_fidelity,
            "bd_applied": step2.bd_applied,
        },
        "certified": certified.key,
        "matches_claim": match,
    }
    _write_report(cfg, "selftest_report.json", body)
    return 0 if match else 1


def _parse_sweep(spec: str):
    try:
        lo, hi, points = spec.split(":")
        lo, hi, points = float(lo), float(hi), int(points)
    except ValueError as exc:
        raise ConfigError(f"--sweep expects LO:HI:POINTS, got {spec!r}") from exc
    if points < 1 or hi < lo:
        raise ConfigError("sweep needs hi >= lo and points >= 1")
    if lo > 0:
        return np.logspace(np.log10(lo), np.log10(hi), points)
    return np.linspace(lo, hi, points)


def cmd_bounds(cfg: ExperimentConfig, eps_p=None, eps_s=None, sweep=None) -> int:
    if eps_p is None or eps_s is None:
        prior = os.path.join(cfg.out, "chsh_report.json")
        if not os.path.exists(prior):
            raise ConfigError("bounds needs --epsilon-p/--epsilon-s or a prior chsh report in --out")
        with open(prior) as fh:
            doc = json.load(fh)
        eps_p = doc["reports"]["P"]["epsilon"] if eps_p is None else eps_p
        eps_s = doc["reports"]["S"]["epsilon"] if eps_s is None else eps_s
    clamped = []
    if eps_p < 0 or eps_s < 0:
        print("warning: negative deficit clamped to 0", file=sys.stderr)
        clamped = [d for d, e in (("P", eps_p), ("S", eps_s)) if e < 0]
        eps_p, eps_s = max(0.0, eps_p), max(0.0, eps_s)
    fb = bounds_mod.total_bound(eps_p, eps_s)
    body = {
        "command": "bounds",
        "epsilon_p": eps_p,
        "epsilon_s": eps_s,
        "clamped_inputs": clamped,
        "bound": fb.as_dict(),
    }
    if sweep is not None:
        rows = bounds_mod.sweep_bounds(_parse_sweep(sweep))
        os.makedirs(cfg.out, exist_ok=True)
        bounds_mod.write_sweep_csv(os.path.join(cfg.out, "sweep.csv"), rows)
        body["sweep_csv"] = "sweep.csv"
        body["sweep_points"] = len(rows)
    _write_report(cfg, "bounds_report.json", body)
    return 0


def cmd_tomo(cfg: ExperimentConfig) -> int:
    state = _source_state(cfg)
    rho = state if state.ndim == 2 else None
    counts = tomography.simulate_tomography(state if rho is None else rho, cfg.tomography_shots, cfg.seed)
    os.makedirs(cfg.out, exist_ok=True)
    tomography.write_counts(os.path.join(cfg.out, "counts.jsonl"), counts)
    rho_hat = tomography.reconstruct(counts)
    fids = tomography.dof_fidelities(rho_hat, cfg.label)
    body = {
        "command": "tomo",
        "label": cfg.label.key,
        "noise": cfg.noise.as_dict(),
        "shots_per_setting": cfg.tomography_shots,
        "counts_file": "counts.jsonl",
        "fidelities": fids.as_dict(),
    }
    _write_report(cfg, "tomo_report.json", body)
    return 0


EPSILON_CONFIDENCE_SIGMAS = 4.0


def cmd_certify(cfg: ExperimentConfig) -> int:
    chsh_reports = _run_chsh(cfg)
    # the sampled violation is only known up to its standard error, so the
    # deficit fed to the bounds is inflated to a conservative confidence level
    eps_p = max(0.0, chsh_reports[DOF_POL].epsilon_raw
                + EPSILON_CONFIDENCE_SIGMAS * chsh_reports[DOF_POL].stderr)
    eps_s = max(0.0, chsh_reports[DOF_SPAT].epsilon_raw
                + EPSILON_CONFIDENCE_SIGMAS * chsh_reports[DOF_SPAT].stderr)
    fb = bounds_mod.total_bound(eps_p, eps_s)

    state = _source_state(cfg)
    counts = tomography.simulate_tomography(state, cfg.tomography_shots, cfg.seed)
    rho_hat = tomography.reconstruct(counts)
    fids = tomography.dof_fidelities(rho_hat, cfg.label)

    passed = (
        fids.f_p >= fb.f_p_lb and fids.f_s >= fb.f_s_lb and fids.f_t_product >= fb.f_t_lb
    )
    body = {
        "command": "certify",
        "label": cfg.label.key,
        "noise": cfg.noise.as_dict(),
        "hardware_model": cfg.hardware_model,
        "chsh_shots_per_pair": cfg.chsh_shots,
        "tomography_shots_per_setting": cfg.tomography_shots,
        "chsh": {d: chsh_reports[d].as_dict() for d in (DOF_POL, DOF_SPAT)},
        "epsilon_confidence_sigmas": EPSILON_CONFIDENCE_SIGMAS,
        "epsilons": {"P": eps_p, "S": eps_s},
        "bounds": fb.as_dict(),
        "measured_fidelities": fids.as_dict(),
        "verdict": "PASS" if passed else "FAIL",
    }
    _write_report(cfg, "certify_report.json", body)
    return 0 if passed else 1


def _build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hypercert",
        description="Hyperentanglement CHSH tests, swap-isometry self-testing, robust bounds, tomography.",
    )
    sub = p.add_subparsers(dest="command", required=True)
    for name, helptext in (
        ("chsh", "sampled CHSH test in both DOFs"),
        ("selftest", "two-step swap-isometry certification over an ensemble"),
        ("bounds", "fidelity lower bounds from CHSH deficits"),
        ("certify", "full pipeline: CHSH -> bounds -> tomography -> verdict"),
        ("tomo", "simulated state tomography of the source"),
    ):
        sp = sub.add_parser(name, help=helptext)
        sp.add_argument("--config", help="JSON config file")
        sp.add_argument("--seed", type=int)
        sp.add_argument("--shots", type=int, help="shots per CHSH setting pair (tomo: per setting)")
        sp.add_argument("--copies", type=int)
        sp.add_argument("--label", help="target hyper Bell label, e.g. 'phi+,psi-'")
        sp.add_argument("--hardware-model", action="store_true", default=None)
        sp.add_argument("--out", help="output directory")
        if name == "chsh":
            sp.add_argument("--export-shots", action="store_true")
        if name == "bounds":
            sp.add_argument("--epsilon-p", type=float)
            sp.add_argument("--epsilon-s", type=float)
            sp.add_argument("--sweep", help="LO:HI:POINTS deficit grid for the CSV table")
    return p


def _effective_config(args) -> ExperimentConfig:
    cfg = ExperimentConfig.from_file(args.config) if args.config else ExperimentConfig()
    try:
        updates = {}
        if args.seed is not None:
            updates["seed"] = args.seed
        if args.copies is not None:
            updates["copies"] = args.copies
        if args.label is not None:
            updates["label"] = HyperBellLabel.parse(args.label)
        if args.out is not None:
            updates["out"] = args.out
        if args.hardware_model is not None:
            updates["hardware_model"] = args.hardware_model
        if args.shots is not None:
            if args.command == "tomo":
                updates["tomography_shots"] = args.shots
            else:
                updates["chsh_shots"] = args.shots
        return replace(cfg, **updates)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = _effective_config(args)
        if args.command == "chsh":
            return cmd_chsh(cfg, export_shots=args.export_shots)
        if args.command == "selftest":
            return cmd_selftest(cfg)
        if args.command == "bounds":
            return cmd_bounds(cfg, args.epsilon_p, args.epsilon_s, args.sweep)
        if args.command == "certify":
            return cmd_certify(cfg)
        if args.command == "tomo":
            return cmd_tomo(cfg)
        raise ConfigError(f"unknown command {args.command!r}")
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
