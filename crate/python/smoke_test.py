"""Smoke test for the qpea extension module.

Build first (see README), then run with the built module on PYTHONPATH:

    PYTHONPATH=target/py python3 python/smoke_test.py
"""

import math
import os
import tempfile

import qpea


def close(a, b, tol):
    assert abs(a - b) <= tol, f"{a} != {b} (tol {tol})"


def main():
    m = 3
    n = 2**m - 1

    holevo = qpea.FourierLoss("holevo", n)
    close(holevo.l0, 2.0, 1e-15)
    close(holevo.coefficient(1), -1.0, 1e-15)

    uniform = qpea.RegisterState.uniform(m)
    close(qpea.risk_uniform(m, holevo).risk, 2.0 / 2**m, 1e-15)
    close(qpea.uniform_named_risk(m, "holevo").risk, 2.0 / 2**m, 1e-12)

    best = qpea.RegisterState.optimal(m, holevo)
    target = 2 - 2 * math.cos(math.pi / (n + 2))
    close(qpea.risk_of_state(best, holevo).risk, target, 1e-12)
    close(qpea.risk_of_state(best, holevo, path="matrix").risk, target, 1e-12)
    value, vector = qpea.min_eigenpair(holevo, m)
    close(holevo.l0 + value, target, 1e-12)
    assert len(vector) == 2**m

    omega, risk0 = qpea.optimize_omega(m, holevo)
    close(omega, math.pi / (n + 2), 1e-8)
    close(risk0, target, 1e-12)

    absolute = qpea.FourierLoss("absolute", n)
    oracle = qpea.risk_bruteforce_oracle(uniform, "absolute", lam=0.01)
    close(oracle.risk, qpea.risk_of_state(uniform, absolute, lam=0.01).risk, 1e-9)

    close(qpea.baseline_risk("heisenberg", n, "squared"), 1.0 / n**2, 1e-15)

    multi = qpea.exact_multi_risk(best, 1, holevo)
    close(multi.risk, target, 1e-10)
    mc = qpea.mc_multi_risk(best, 2, qpea.FourierLoss("holevo", 2 * n), samples=20000, seed=1)
    exact = qpea.exact_multi_risk(best, 2, qpea.FourierLoss("holevo", 2 * n))
    assert abs(mc.risk - exact.risk) <= 4 * mc.stderr, (mc, exact)

    theta = qpea.bayes_estimate(uniform, [2], holevo)
    close(theta, 2 * math.pi * 2 / 2**m, 1e-8)
    dens = qpea.posterior_density(uniform, [2, 2], [2 * math.pi * k / 512 for k in range(512)])
    close(sum(dens) * 2 * math.pi / 512, 1.0, 1e-9)

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "state.csv")
        best.to_csv(path)
        again = qpea.RegisterState.from_csv(path)
        assert again.amplitudes == best.amplitudes

    for bad in (lambda: qpea.RegisterState.uniform(0), lambda: qpea.risk_uniform(m, holevo, lam=1.0)):
        try:
            bad()
        except ValueError:
            pass
        else:
            raise AssertionError("expected ValueError")

    print(f"qpea {qpea.__version__}: smoke test passed")


if __name__ == "__main__":
    main()
