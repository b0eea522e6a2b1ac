"""Benchmark the compiled kernel backend against the NumPy fallback.

Usage: python3 benchmarks/bench_kernels.py [--n 100] [--reps 2000]

Times the likelihood/gradient kernels (the optimizer's inner loop) for a
representative family/link pair per response domain, then times a complete
maximum-likelihood fit under each backend in a subprocess (backend selection
happens at import via GLMLAB_PURE_PYTHON).
"""

import argparse
import os
import subprocess
import sys
import time

import numpy as np

sys.path.insert(0, os.path.join(os.path.dirname(__file__), "..", "src"))

from glmlab.kernels import _compiled, _pure  # noqa: E402

CASES = (
    ("beta + logit", _pure.FAM_BETA, _pure.LINK_LOGIT, "unit"),
    ("kumaraswamy + cloglog", _pure.FAM_KUMARASWAMY, _pure.LINK_CLOGLOG,
     "unit"),
    ("gamma + log", _pure.FAM_GAMMA, _pure.LINK_LOG, "positive"),
    ("weibull + softplus", _pure.FAM_WEIBULL, _pure.LINK_SOFTPLUS,
     "positive"),
    ("normal + identity", _pure.FAM_NORMAL, _pure.LINK_IDENTITY, "real"),
)

FIT_SNIPPET = """
import time
from glmlab.dgp import config_for, generate
from glmlab.fitting import ModelSpec, fit
data = generate(config_for("beta", "logit", "symmetric", "positive"), 99)
spec = ModelSpec("beta", "logit", "x+z1+z2")
fit(spec, data)                            # warm up
t0 = time.perf_counter()
for _ in range({reps}):
    fit(spec, data)
print((time.perf_counter() - t0) / {reps})
"""


def time_kernel(module, fam, lid, y, X, theta, reps):
    module.nll_and_grad(fam, lid, y, X, theta)       # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        module.nll_and_grad(fam, lid, y, X, theta)
    return (time.perf_counter() - t0) / reps


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--n", type=int, default=100)
    parser.add_argument("--reps", type=int, default=2000)
    parser.add_argument("--fit-reps", type=int, default=200)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    X = np.column_stack([np.ones(args.n), rng.normal(size=(args.n, 3))])
    theta = np.array([0.2, 0.1, -0.3, 0.15, 0.0])

    print(f"nll_and_grad, n={args.n}, {args.reps} calls each "
          f"(times in microseconds):")
    print(f"{'case':>24s} {'numpy':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, fam, lid, domain in CASES:
        if domain == "unit":
            y = rng.uniform(0.02, 0.98, args.n)
        elif domain == "positive":
            y = rng.gamma(2.0, 1.5, args.n)
        else:
            y = rng.normal(0.0, 1.0, args.n)
        tp = time_kernel(_pure, fam, lid, y, X, theta, args.reps)
        tc = time_kernel(_compiled, fam, lid, y, X, theta, args.reps)
        print(f"{name:>24s} {tp * 1e6:>9.1f}u {tc * 1e6:>9.1f}u "
              f"{tp / tc:>7.1f}x")

    print(f"\nend-to-end fit_mle (beta + logit, {args.fit_reps} fits):")
    snippet = FIT_SNIPPET.format(reps=args.fit_reps)
    for label, env_val in (("numpy", "1"), ("compiled", "0")):
        env = dict(os.environ, GLMLAB_PURE_PYTHON=env_val,
                   PYTHONPATH=os.pathsep.join(
                       [os.path.join(os.path.dirname(__file__), "..", "src"),
                        os.environ.get("PYTHONPATH", "")]))
        out = subprocess.run([sys.executable, "-c", snippet], env=env,
                             capture_output=True, text=True, check=True)
        per_fit = float(out.stdout.strip().splitlines()[-1])
        print(f"  {label:>9s}: {per_fit * 1e3:.2f} ms per fit")


if __name__ == "__main__":
    main()
