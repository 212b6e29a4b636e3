"""그림 재현 명령의 기본 실행 구성 (명령줄 옵션과 --config 파일로 덮어쓸 수 있음)"""

import copy
from typing import Any, Dict

# 유전자 회로: 𝒮 = (0.25, 0.75), ℓ(z) = min{10(|z − 0.5| − 0.25), 3}
FIG2_PRESET: Dict[str, Any] = {
    "system": {"kind": "genetic_circuit", "parameters": {"alpha": 1.0}},
    "grid": {"nodes": [101], "lower": [0.0], "upper": [1.0]},
    "full_grid": {"nodes": [101, 101], "lower": [0.0, 0.0], "upper": [1.0, 1.0]},
    "payoff": {"target_lower": [0.25], "target_upper": [0.75], "slope": 10.0, "cap": 3.0},
    "solve": {"t_final": -0.5, "eta": 0.1, "eps": [1.0, 0.01], "scheme": "euler", "dilation_cells": 1},
    "verify": {"n_samples": 1000, "decay_trials": 100},
    "seed": 0,
}

# MRN: 𝒮 = ℝ × (.4, .6) × (.4, .6), ℓ(z) = min{10 max(|z₂ − .5| − .1, |z₃ − .5| − .1), 4}
FIG3_PRESET: Dict[str, Any] = {
    "system": {"kind": "mrn", "parameters": {"n_metabolites": 20, "seed": 7}},
    "grid": {"nodes": [41, 41, 41], "lower": [0.0, 0.0, 0.0], "upper": [1.0, 1.0, 1.0]},
    "payoff": {
        "target_lower": [None, 0.4, 0.4],
        "target_upper": [None, 0.6, 0.6],
        "slope": 10.0,
        "cap": 4.0,
        "free_dims": [0],
    },
    "solve": {
        "t_final": -3.0,
        "eta": 0.5,
        "eps": [0.01],
        "scheme": "euler",
        "snapshot_times": [-2.75, -2.5, -2.25, -2.0, -1.75, -1.5, -1.25, -1.0, -0.75, -0.5, -0.25, 0.0],
    },
    "verify": {"n_samples": 200, "decay_trials": 20, "lyapunov": "nominal"},
    "experiment": {
        "initial_states": [[0.0, 0.025, 0.1], [0.0, 0.15, 0.1]],
        "n_disturbances": 20,
        "seed": 0,
    },
    "seed": 0,
}

PRESETS = {"reproduce-fig2": FIG2_PRESET, "reproduce-fig3": FIG3_PRESET}


def preset_document(command: str) -> Dict[str, Any]:
    """명령의 기본 구성 사본"""
    return copy.deepcopy(PRESETS[command])
