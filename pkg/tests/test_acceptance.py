"""Acceptance criteria, one test per criterion.

Each test prints a single ``[PASS]``/``[FAIL]`` line with the measured value
and the tolerance it was held to, then asserts. Run directly with
``python3 tests/test_acceptance.py`` to get just the summary lines.
"""

import json
import math
import subprocess
import sys
import time
from contextlib import nullcontext
from pathlib import Path

import numpy as np

from qrelay.channels import (
    QuantumChannel,
    apply_channel,
    interaction_relay,
    make_channel,
    random_channel,
    random_relay_channel,
    swap_unitary,
)
from qrelay.entropics import (
    coherent_information,
    conditional_entropy,
    von_neumann_entropy,
)
from qrelay.fqsw import DecouplingConfig, decoupled_state, ghz_state, monte_carlo
from qrelay.linalg import (
    SubsystemShape,
    partial_trace,
    permute,
    random_density,
    random_pure_state,
    tensor,
)
from qrelay.optimize import OptimizerConfig, channel_coherent_information, maximize
from qrelay.rates import (
    RatePoint,
    RateReport,
    check_rate_point,
    decoupling_exponents,
    evaluate_state_rates,
    superdense_classical_rate,
)


def shape(**dims):
    return SubsystemShape.of(**dims)


def hashing_value(p):
    q = 0.75 * p
    h = -q * math.log2(q) - (1 - q) * math.log2(1 - q)
    return 1.0 - h - q * math.log2(3.0)


def report(capsys, number, ok, detail):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {detail}"
    with capsys.disabled() if capsys is not None else nullcontext():
        print(line, flush=True)
    return ok


# -- 1. entropic identities ------------------------------------------------------


def criterion_1():
    start = time.perf_counter()
    worst = 0.0
    for seed in range(200):
        rng = np.random.default_rng(seed)
        da, db, dd = (int(x) for x in rng.integers(2, 5, size=3))
        rho = random_density(shape(A=da), seed)
        sig = random_density(shape(B=db), seed + 10_000)
        h = von_neumann_entropy(rho)
        worst = max(worst, -h, h - math.log2(da))
        worst = max(worst, abs(von_neumann_entropy(tensor(rho, sig))
                               - h - von_neumann_entropy(sig)))
        pure_ab = random_pure_state(shape(A=da, B=db), seed + 20_000)
        worst = max(worst, abs(von_neumann_entropy(partial_trace(pure_ab, "A"))
                               - von_neumann_entropy(partial_trace(pure_ab, "B"))))
        sigma = random_pure_state(shape(A1=da, A=db, D=dd), seed + 30_000)
        worst = max(worst, abs(conditional_entropy(sigma, "A1", "D")
                               - coherent_information(sigma, "A1", "A")))
        ch = random_channel(db, int(rng.integers(2, 5)), int(rng.integers(2, 5)), seed + 40_000)
        omega = apply_channel(ch, sigma, "A")
        worst = max(worst, coherent_information(omega, "A1", "B")
                    - coherent_information(sigma, "A1", "A"))
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-8 and elapsed < 10.0
    return ok, f"200 states, worst violation {worst:.2e} (tol 1e-8), {elapsed:.2f} s (< 10 s)"


# -- 2. FQSW decoupling inequality -------------------------------------------------


def criterion_2():
    start = time.perf_counter()
    configs = [
        ("haar 4,2,2", random_pure_state(shape(A=4, B=2, C=2), 101), 2),
        ("ghz 4,4,4", ghz_state(4, 4, 4), 2),
        ("decoupled 4,8,2", decoupled_state(4, 2), 2),
        ("haar 8,4,2", random_pure_state(shape(A=8, B=4, C=2), 102), 2),
        ("haar 8,2,4", random_pure_state(shape(A=8, B=2, C=4), 103), 4),
    ]
    parts = []
    ok = True
    for name, psi, a1 in configs:
        a = psi.shape.dim("A")
        res = monte_carlo(DecouplingConfig(psi, a1, a // a1, trials=1000, seed=7))
        ok &= res.bound_satisfied
        if name.startswith("decoupled"):
            ok &= res.lhs_mean < 1e-10
        parts.append(f"{name}: {res.lhs_mean:.3g} <= {res.rhs_bound:.3g}+3*{res.lhs_stderr:.2g}")
    elapsed = time.perf_counter() - start
    ok &= elapsed < 60.0
    return ok, "; ".join(parts) + f"; {elapsed:.1f} s (< 60 s)"


# -- 3. zero-rate exponents reduce to the unassisted condition ----------------------


def criterion_3():
    mismatches = 0
    for seed in range(100):
        rng = np.random.default_rng(seed)
        dims = {"A": 2, "D": int(rng.integers(1, 3)), "B": 2, "E": int(rng.integers(1, 3))}
        ch = random_relay_channel(dims, int(rng.integers(2, 5)), seed)
        sigma = random_pure_state(shape(A1=int(rng.integers(1, 4)), A=2, D=dims["D"]), seed + 500)
        rep = evaluate_state_rates(ch, sigma)
        q = float(rng.uniform(0.0, 1.0))
        exps = decoupling_exponents(rep, RatePoint(Q=q), delta=0.0)
        if exps.all_feasible != (q < min(rep.coh_a1_B, rep.coh_a1_E)):
            mismatches += 1
    return mismatches == 0, f"{mismatches} mismatches in 100 (channel, state, Q) triples (exact)"


# -- 4. direct-transmission and zero-rate recoveries ---------------------------------


def _induced_link(ch, psi_d):
    dims = ch.dims
    k = ch.kraus.reshape(ch.num_kraus, dims["B"], dims["E"], dims["A"], dims["D"])
    fed = np.einsum("kbead,d->kbea", k, psi_d.data)
    kraus = fed.transpose(0, 2, 1, 3).reshape(-1, dims["B"], dims["A"])
    return QuantumChannel(kraus, shape(A=dims["A"]), shape(B=dims["B"]))


def criterion_4():
    worst = 0.0
    zero_rate_ok = True
    for seed in range(20):
        ch = random_relay_channel({"A": 2, "D": 2, "B": 2, "E": 2}, 1 + seed % 3, seed)
        phi = random_pure_state(shape(A1=2, A=2), seed + 1)
        psi_d = random_pure_state(shape(D=2), seed + 2)
        rep = evaluate_state_rates(ch, tensor(phi, psi_d))
        omega = apply_channel(_induced_link(ch, psi_d), phi, "A")
        worst = max(worst, abs(rep.coh_a1_B - coherent_information(omega, "A1", "B")))

        xi = random_pure_state(shape(A1=2, D=2), seed + 3)
        sigma = permute(tensor(random_pure_state(shape(A=2), seed + 4), xi), ("A1", "A", "D"))
        rep_b = evaluate_state_rates(ch, sigma)
        zero_rate_ok &= rep_b.h_a1_given_d <= 1e-12
        for q in (1e-9, 1e-3, 0.25, 1.0):
            zero_rate_ok &= not check_rate_point(rep_b, RatePoint(Q=q)).feasible
    ok = worst <= 1e-8 and zero_rate_ok
    return ok, (f"(a) worst |I(A1>B) - I_c(direct link)| = {worst:.2e} (tol 1e-8); "
                f"(b) H(A1|D) <= 0 and infeasible for Q > 0: {zero_rate_ok}")


# -- 5. closed-form channel coherent information --------------------------------------


def criterion_5():
    start = time.perf_counter()
    cfg = OptimizerConfig()
    errs = []
    for p in (0.0, 0.1, 0.25, 0.4):
        val = channel_coherent_information(make_channel("erasure", {"d": 2, "p": p}), cfg)
        errs.append(("erasure", p, abs(val - (1 - 2 * p))))
    for p in (0.05, 0.1):
        val = channel_coherent_information(make_channel("depolarizing", {"d": 2, "p": p}), cfg)
        errs.append(("depolarizing", p, abs(val - hashing_value(p))))
    elapsed = time.perf_counter() - start
    worst = max(e for _, _, e in errs)
    ok = worst <= 1e-3 and elapsed < 120.0
    detail = ", ".join(f"{k}({p}) err {e:.1e}" for k, p, e in errs)
    return ok, f"{detail} (tol 1e-3); {elapsed:.1f} s (< 120 s)"


# -- 6. noiseless entanglement-assisted optimum ---------------------------------------


def criterion_6():
    idq = make_channel("identity", {"d": 2})
    relay = interaction_relay(swap_unitary(2), idq, idq)
    res = maximize("ea_df", relay, OptimizerConfig())
    sd = superdense_classical_rate(res.best_report)
    ok = res.objective_value >= 1 - 1e-3 and sd >= 2 - 2e-3
    return ok, (f"ea_df optimum {res.objective_value:.9f} (>= 0.999), "
                f"superdense rate {sd:.9f} (>= 1.998)")


# -- 7. CLI determinism -----------------------------------------------------------------

CLI_CONFIGS = {
    "rates": {"command": "rates", "seed": 3, "state": {"family": "random"},
              "channel": {"kind": "partial_swap", "params": {"theta": 0.7, "p": 0.1}}},
    "optimize": {"command": "optimize", "seed": 3, "objective": "ea_df",
                 "channel": {"kind": "partial_swap", "params": {"theta": 1.2, "p": 0.05}},
                 "optimizer": {"restarts": 2, "max_evals": 500}},
    "feasible": {"command": "feasible", "channel": {"kind": "depolarizing", "params": {"p": 0.1}},
                 "rate_point": {"Q": 0.2, "L_B": 0.5, "L_B_hat": 0.25}},
    "sweep": {"command": "sweep", "channel": {"kind": "depolarizing", "params": {"p": 0.0}},
              "sweep": {"param": "p", "start": 0, "stop": 1, "steps": 11}},
    "fqsw": {"command": "fqsw", "seed": 3,
             "fqsw": {"state": {"family": "haar", "dims": [4, 2, 2]}, "a1_dim": 2, "trials": 200}},
}


def criterion_7(workdir: Path):
    identical = []
    for name, cfg in CLI_CONFIGS.items():
        cfg_path = workdir / f"{name}.json"
        cfg_path.write_text(json.dumps(cfg))
        blobs = []
        for run in range(2):
            out = workdir / f"{name}_{run}.out"
            proc = subprocess.run([sys.executable, "-m", "qrelay", "--config", str(cfg_path),
                                   "--out", str(out)], capture_output=True, check=False)
            if proc.returncode != 0:
                blobs.append(None)
                continue
            files = sorted(p for p in workdir.glob(f"{name}_{run}.*"))
            blobs.append([p.read_bytes() for p in files])
        identical.append(blobs[0] is not None and blobs[0] == blobs[1])
    ok = all(identical)
    summary = ", ".join(f"{n}={'same' if s else 'DIFF'}" for n, s in zip(CLI_CONFIGS, identical))
    return ok, f"byte-identical reruns: {summary}"


# -- 8. slack sensitivities ------------------------------------------------------------


def criterion_8():
    # Dyadic values keep every sum exact, so zero tolerance is meaningful.
    rep = RateReport.from_quantities(0.75, 0.5, 1.25, 2.0, 0.5)
    base_pt = RatePoint(Q=0.125, L_B=0.5, L_B_hat=0.25)
    step = 0.25

    def slacks(pt):
        f = check_rate_point(rep, pt)
        return np.array([f.slack1, f.slack2, f.slack3])

    base = slacks(base_pt)
    d_lb = (slacks(RatePoint(Q=0.125, L_B=0.5 + step, L_B_hat=0.25)) - base) / step
    d_lbh = (slacks(RatePoint(Q=0.125, L_B=0.5, L_B_hat=0.25 + step)) - base) / step
    coeffs = [(float(d_lb[i]), float(d_lbh[i])) for i in range(3)]
    expected = [(-1.0, 1.0), (-1.0, -1.0), (1.0, -1.0)]
    ok = coeffs == expected
    return ok, f"(dL_B, dL_B_hat) coefficients {coeffs} vs {expected} (step 0.25, tol 0)"


# -- pytest entry points -----------------------------------------------------------------


def _check(capsys, number, result):
    ok, detail = result
    report(capsys, number, ok, detail)
    assert ok, detail


def test_criterion_1_entropic_identities(capsys):
    _check(capsys, 1, criterion_1())


def test_criterion_2_fqsw_bound(capsys):
    _check(capsys, 2, criterion_2())


def test_criterion_3_zero_rate_exponents(capsys):
    _check(capsys, 3, criterion_3())


def test_criterion_4_recoveries(capsys):
    _check(capsys, 4, criterion_4())


def test_criterion_5_closed_form_coherent_information(capsys):
    _check(capsys, 5, criterion_5())


def test_criterion_6_noiseless_assisted_optimum(capsys):
    _check(capsys, 6, criterion_6())


def test_criterion_7_cli_determinism(capsys, tmp_path):
    _check(capsys, 7, criterion_7(tmp_path))


def test_criterion_8_slack_linearity(capsys):
    _check(capsys, 8, criterion_8())


if __name__ == "__main__":
    import tempfile

    results = []
    with tempfile.TemporaryDirectory() as tmp:
        for n, fn in enumerate([criterion_1, criterion_2, criterion_3, criterion_4, criterion_5,
                                criterion_6, lambda: criterion_7(Path(tmp)), criterion_8], start=1):
            ok, detail = fn()
            results.append(report(None, n, ok, detail))
    sys.exit(0 if all(results) else 1)
