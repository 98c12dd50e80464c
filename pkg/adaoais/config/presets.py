"""
实验预设
expN-{sgd,adam,adagrad} 为完整规模；expN-*-fast 为桌面规模：
  exp1-fast: N=1000, T=10000, 10 runs（T 缩小 3 倍）
  exp2-fast: N=500,  T=3000,  50 runs（N/2, T/10, runs/4）
  exp3-fast: N=1000, T=2000,  20 runs（T/5, runs/5）
"""

from typing import Any, Dict

_EXPERIMENTS: Dict[str, Dict[str, Any]] = {
    "exp1": {
        "target": "gaussian",
        "runs": 10,
        "proposal": {"family": "gaussian", "mean": (10.0, -10.0),
                     "covariance": ((40.0, 0.0), (0.0, 40.0))},
        "phi": {"lower": (-1.0, -1.0), "upper": (1.0, 1.0)},
    },
    "exp2": {
        "target": "mixture",
        "runs": 200,
        "proposal": {"family": "gaussian", "mean": (10.0, -10.0),
                     "covariance": ((40.0, 0.0), (0.0, 40.0))},
        "phi": {"lower": (-1.0, -1.0), "upper": (1.0, 1.0)},
    },
    "exp3": {
        "target": "logitnormal",
        "runs": 100,
        "proposal": {"family": "beta", "alpha": 1.0, "beta": 1.0},
        "phi": {"lower": (0.25,), "upper": (0.75,)},
    },
}

_OPTIMIZERS: Dict[str, Dict[str, Any]] = {
    "sgd": {"name": "sgd", "rate": 1e-4, "schedule": "inv_sqrt"},
    "adam": {"name": "adam", "rate": 0.01, "schedule": "constant",
             "beta1": 0.9, "beta2": 0.999, "eps": 1e-8},
    "adagrad": {"name": "adagrad", "rate": 0.1, "schedule": "constant", "eps": 1e-8},
}

_FULL_ITERATIONS = {
    ("exp1", "sgd"): 10000,
    ("exp1", "adam"): 30000,
    ("exp1", "adagrad"): 30000,
    ("exp2", "sgd"): 30000,
    ("exp2", "adam"): 30000,
    ("exp2", "adagrad"): 30000,
    ("exp3", "sgd"): 10000,
    ("exp3", "adam"): 10000,
    ("exp3", "adagrad"): 10000,
}

_FAST_SCALE = {
    "exp1": {"n_particles": 1000, "iterations": 10000, "runs": 10},
    "exp2": {"n_particles": 500, "iterations": 3000, "runs": 50},
    "exp3": {"n_particles": 1000, "iterations": 2000, "runs": 20},
}

FULL_PARTICLES = 1000
DEFAULT_MASTER_SEED = 2023


def _build_presets() -> Dict[str, Dict[str, Dict[str, Any]]]:
    presets = {}
    for experiment, spec in _EXPERIMENTS.items():
        for optimizer, opt_spec in _OPTIMIZERS.items():
            name = f"{experiment}-{optimizer}"
            base = {
                "experiment": {
                    "name": name,
                    "target": spec["target"],
                    "n_particles": FULL_PARTICLES,
                    "iterations": _FULL_ITERATIONS[(experiment, optimizer)],
                    "runs": spec["runs"],
                    "master_seed": DEFAULT_MASTER_SEED,
                    "thin": 1,
                },
                "proposal": dict(spec["proposal"]),
                "phi": dict(spec["phi"]),
                "optimizer": dict(opt_spec),
            }
            presets[name] = base

            fast = {section: dict(values) for section, values in base.items()}
            fast["experiment"].update(_FAST_SCALE[experiment])
            fast["experiment"]["name"] = f"{name}-fast"
            presets[f"{name}-fast"] = fast
    return presets


PRESETS = _build_presets()
