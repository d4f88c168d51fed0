"""Generate tests/data/erf_golden.json: erf at 500 reference-scenario arguments, 50 digits.

Arguments are drawn from the beta/gamma values of the truncation scenario
(t = 0.3, cutoffs 0..40, default grid) and the alpha values of the
decoherence scenario (t = 0.2, 0.3, 0.4). Points where erf is not
representable as a double are skipped. Run from the repository root::

    python scripts/make_erf_golden.py
"""

import json
from pathlib import Path

import mpmath
import numpy as np

from qctrans.core import Grid, PhysParams
from qctrans.decoherence import alpha_arguments
from qctrans.filter import beta_arguments, default_k0_values, gamma_arguments

OUT = Path(__file__).resolve().parents[1] / "tests" / "data" / "erf_golden.json"
SEED = 20240611
QUOTA = {"beta": 200, "gamma": 150, "alpha": 150}
LIMIT = 1e300


def candidates():
    p = PhysParams.from_quantum(mass=1.0, hbar=1.0, sigma=1.0, x0=0.0, v0=10.0, d=10.0)
    x = Grid().x[::16]
    pools = {"beta": [], "gamma": [], "alpha": []}
    for k0 in default_k0_values()[1:]:
        pools["beta"].extend(np.concatenate(beta_arguments(x, 0.3, k0, p)))
        pools["gamma"].extend(np.concatenate(gamma_arguments(x, 0.3, k0, p)))
    for t in (0.0, 0.2, 0.3, 0.4):
        pools["alpha"].extend(np.concatenate(alpha_arguments(x, t, p)))
    return {k: np.asarray(v) for k, v in pools.items()}


def main():
    mpmath.mp.dps = 50
    rng = np.random.default_rng(SEED)
    rows = []
    for kind, pool in candidates().items():
        order = rng.permutation(len(pool))
        taken = 0
        for i in order:
            z = complex(pool[i])
            val = mpmath.erf(mpmath.mpc(z.real, z.imag))
            mag = abs(val)
            if not (mag < LIMIT and mag > 1e-300):
                continue
            rows.append({"kind": kind, "re": z.real, "im": z.imag,
                         "erf_re": float(val.real), "erf_im": float(val.imag)})
            taken += 1
            if taken == QUOTA[kind]:
                break
    OUT.parent.mkdir(parents=True, exist_ok=True)
    OUT.write_text(json.dumps({"dps": 50, "seed": SEED, "points": rows}, indent=1) + "\n")
    print(f"wrote {len(rows)} points to {OUT}")


if __name__ == "__main__":
    main()
