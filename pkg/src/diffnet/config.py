"""Experiment configuration: TOML loading with strict validation."""

import sys
from dataclasses import dataclass, fields

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .clime import ClimeConfig
from .simulate import StudyDesign


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything one pipeline run needs; loaded from a TOML document.

    Unknown keys are rejected so typos cannot silently disable options.
    """

    # simulation design
    M: int = 3
    p: int = 30
    q: int = 30
    n_case: int = 30
    n_control: int = 30
    rho_list: tuple = (0.4, 0.4, 0.4)
    structure: str = "hub"
    temporal_rho_case: float = 0.5
    temporal_rho_control: float = 0.6
    share_base: bool = True
    hub_groups: int = 5
    sw_neighbors: int = 10
    sw_rewire_prob: float = 0.05

    # precision estimation
    clime_target_density: float = 0.5
    clime_grid_size: int = 20
    clime_grid_lo: float = 0.01
    clime_grid_hi: float = 1.0

    # regression
    gamma: float = 10.0
    n_lambda1: int = 10
    n_lambda2: int = 10
    grid_lo: float = 0.05
    cv_folds: int = 5
    max_iter: int = 500
    sis_keep: int = 0          # 0 disables screening

    # ensemble and evaluation
    n_bootstrap: int = 100
    tau: float = 0.5
    select_tau: bool = True    # maximize TPR + TDR against the truth
    with_baseline: bool = False

    # run control
    replications: int = 1
    seed: int = 0
    threads: int = 1
    out_dir: str = "results"

    def study_design(self, seed=None, rho_list=None):
        return StudyDesign(
            M=self.M, p=self.p, q=self.q,
            n_case=self.n_case, n_control=self.n_control,
            rho_list=tuple(rho_list if rho_list is not None else self.rho_list),
            structure=self.structure,
            temporal_rho_case=self.temporal_rho_case,
            temporal_rho_control=self.temporal_rho_control,
            seed=self.seed if seed is None else seed,
            share_base=self.share_base,
            hub_groups=self.hub_groups,
            sw_neighbors=self.sw_neighbors,
            sw_rewire_prob=self.sw_rewire_prob,
        )

    def clime_config(self):
        return ClimeConfig(
            target_density=self.clime_target_density,
            grid_size=self.clime_grid_size,
            grid_lo=self.clime_grid_lo,
            grid_hi=self.clime_grid_hi,
        )


def from_dict(doc):
    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(doc) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    if "rho_list" in doc:
        doc = dict(doc)
        doc["rho_list"] = tuple(doc["rho_list"])
    cfg = ExperimentConfig(**doc)
    # surface bad values now, not mid-pipeline
    cfg.study_design()
    cfg.clime_config()
    if cfg.replications < 1 or cfg.n_bootstrap < 1 or cfg.threads < 1:
        raise ValueError("replications, n_bootstrap, threads must be >= 1")
    if not (0.0 <= cfg.tau < 1.0):
        raise ValueError("tau must lie in [0, 1)")
    return cfg


def load(path):
    with open(path, "rb") as fh:
        return from_dict(tomllib.load(fh))
