"""Built-in scenarios.

``circle2d`` / ``sphere3d``: attraction-only consumption model on the unit
disk / ball with chi = 20 and u0 = v0 = 20 exp(-30 |x|^2), dt = 1e-5.
``sphere3d_ar``: the same ball with a repellent w0 = v0 (base of the xi sweep).
``lyapunov2d``: small chi, xi inside the range where the weighted L^k
functional is expected to decay.
"""

from __future__ import annotations

BELL = {"kind": "gaussian", "amplitude": 20.0, "sharpness": 30.0}


def _bell(dim: int) -> dict:
    return {**BELL, "center": [0.0] * dim}


PRESETS: dict[str, dict] = {
    "circle2d": {
        "name": "circle2d",
        "description": "2D unit disk, attraction only, chi=20",
        "domain": {"kind": "disk", "center": [0.0, 0.0], "radius": 1.0},
        "cells_per_axis": 128,
        "model": {"variant": "attraction_only", "chi": 20.0, "xi": 0.0,
                  "dt": 1e-5, "t_end": 0.01},
        "initial": {"u": _bell(2), "v": _bell(2)},
        "output": {"directory": "runs/circle2d", "cadence": 1, "snapshot_every": 0},
    },
    "sphere3d": {
        "name": "sphere3d",
        "description": "3D unit ball, attraction only, chi=20",
        "domain": {"kind": "ball", "center": [0.0, 0.0, 0.0], "radius": 1.0},
        "cells_per_axis": 64,
        "model": {"variant": "attraction_only", "chi": 20.0, "xi": 0.0,
                  "dt": 1e-5, "t_end": 0.05},
        "initial": {"u": _bell(3), "v": _bell(3)},
        "output": {"directory": "runs/sphere3d", "cadence": 1, "snapshot_every": 0},
    },
    "sphere3d_ar": {
        "name": "sphere3d_ar",
        "description": "3D unit ball, attraction-repulsion, chi=20, w0=v0",
        "domain": {"kind": "ball", "center": [0.0, 0.0, 0.0], "radius": 1.0},
        "cells_per_axis": 32,
        "model": {"variant": "attraction_repulsion", "chi": 20.0, "xi": 5.0,
                  "dt": 1e-5, "t_end": 0.03},
        "initial": {"u": _bell(3), "v": _bell(3), "w": _bell(3)},
        "output": {"directory": "runs/sphere3d_ar", "cadence": 1, "snapshot_every": 0},
    },
    "lyapunov2d": {
        "name": "lyapunov2d",
        "description": "2D disk, v_sup0 = w_sup0 = 1, chi = xi = half the admissible limit 1/(10 k sup) for k = 1.5",
        "domain": {"kind": "disk", "center": [0.0, 0.0], "radius": 1.0},
        "cells_per_axis": 64,
        "model": {"variant": "attraction_repulsion", "chi": 1.0 / 30.0, "xi": 1.0 / 30.0,
                  "dt": 1e-5, "t_end": 5e-3},
        # v, w bells sit on cell centres of the 64^2 lattice so that v_sup0 = w_sup0 = 1 exactly
        "initial": {
            "u": {"kind": "gaussian", "amplitude": 20.0, "sharpness": 30.0, "center": [0.0, 0.0]},
            "v": {"kind": "gaussian", "amplitude": 1.0, "sharpness": 10.0,
                  "center": [0.296875, 0.015625]},
            "w": {"kind": "gaussian", "amplitude": 1.0, "sharpness": 10.0,
                  "center": [-0.296875, 0.109375]},
        },
        "output": {"directory": "runs/lyapunov2d", "cadence": 1, "snapshot_every": 0},
        "lyapunov_k": 1.5,
    },
}

SWEEP_PRESETS: dict[str, dict] = {
    "xi_sweep3d": {
        "description": "xi in {0, 5, 10, 20} with chi = 20 on the 3D ball",
        "base": "sphere3d_ar",
        "parameter": "xi",
        "values": [0.0, 5.0, 10.0, 20.0],
        "output": {"directory": "runs/xi_sweep3d"},
    },
}
