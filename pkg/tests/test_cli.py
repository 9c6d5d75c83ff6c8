import csv
import io
import itertools
import json
import subprocess
import sys

import pytest

from qrelay.cli import (
    EXIT_CONFIG,
    EXIT_NUMERIC,
    EXIT_OK,
    SWEEP_COLUMNS,
    ConfigError,
    RunConfig,
    main,
    run,
    trials_path,
    validate,
)

DIRECT = {"kind": "interaction", "params": {"unitary": "swap",
                                            "noise_B": {"kind": "identity", "params": {"d": 2}},
                                            "noise_E": {"kind": "identity", "params": {"d": 2}}}}
LEAKY = {"name": "leaky", "kraus": [[[[1, 0], [0, 0]], [[0, 0], [0.999, 0]]]],
         "input_dims": [2, 1], "output_dims": [2, 1]}


def write(tmp_path, name, obj):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def run_cfg(d):
    out, err = io.StringIO(), io.StringIO()
    code = run(RunConfig.from_dict(d), stdout=out, stderr=err)
    return code, out.getvalue(), err.getvalue()


class TestRates:
    def test_noiseless_direct_link(self):
        code, out, _ = run_cfg({"command": "rates", "channel": DIRECT,
                                "state": {"family": "maxent_a1a"}})
        assert code == EXIT_OK
        rep = json.loads(out)["report"]
        assert rep["q_ea_df"] == pytest.approx(1.0, abs=1e-12)

    def test_named_direct_link_flag(self, tmp_path):
        out = tmp_path / "r.json"
        assert main(["rates", "--channel", "identity", "--out", str(out)]) == EXIT_OK
        assert json.loads(out.read_text())["report"]["q_ea_df"] == pytest.approx(1.0, abs=1e-12)

    @pytest.mark.parametrize("family", ["maxent_a1a", "maxent_a1d", "product", "random"])
    def test_state_families(self, family):
        code, out, _ = run_cfg({"command": "rates", "channel": {"kind": "partial_swap",
                                                                 "params": {"theta": 0.4, "p": 0.1}},
                                "state": {"family": family, "seed": 5}})
        assert code == EXIT_OK
        rep = json.loads(out)["report"]
        if family == "maxent_a1d":
            assert rep["h_a1_given_d"] == pytest.approx(-1.0, abs=1e-12)

    def test_explicit_amplitudes(self):
        # (|0>|0> + i|1>|1>)/sqrt2 on A1 A, with D in |0>.
        amps = [[0.0, 0.0]] * 8
        amps[0] = [2**-0.5, 0.0]
        amps[6] = [0.0, 2**-0.5]
        code, out, _ = run_cfg({"command": "rates", "channel": DIRECT,
                                "state": {"amplitudes": amps, "dims": [2, 2, 2]}})
        assert code == EXIT_OK
        assert json.loads(out)["report"]["coh_a1_B"] == pytest.approx(1.0, abs=1e-12)


class TestFeasible:
    def test_rates_round_trip_exact(self, tmp_path):
        rates_out = tmp_path / "rates.json"
        base = {"channel": {"kind": "partial_swap", "params": {"theta": 1.0, "p": 0.05}},
                "state": {"family": "random", "seed": 3}}
        assert run(RunConfig.from_dict(dict(base, command="rates", out=str(rates_out)))) == 0
        pt = {"Q": 0.1, "L_B": 0.3, "L_B_hat": 0.2, "L_E": 0.05}
        cfg = write(tmp_path, "f.json", {"command": "feasible", "rate_point": pt})
        via_file = tmp_path / "via.json"
        assert main(["--config", cfg, "--report", str(rates_out), "--out", str(via_file)]) == 0
        combined = tmp_path / "combined.json"
        assert run(RunConfig.from_dict(dict(base, command="feasible", rate_point=pt,
                                            out=str(combined)))) == 0
        a = json.loads(via_file.read_text())
        b = json.loads(combined.read_text())
        assert a["feasibility"] == b["feasibility"]
        assert a["exponents"] == b["exponents"]

    def test_delta_flag(self, tmp_path):
        cfg = write(tmp_path, "f.json", {"command": "feasible", "channel": DIRECT,
                                         "rate_point": {"Q": 0.0}})
        out = tmp_path / "o.json"
        assert main(["--config", cfg, "--delta", "0.5", "--out", str(out)]) == 0
        exps = json.loads(out.read_text())["exponents"]
        assert exps["delta"] == 0.5
        assert exps["feasible"] == [True, False, True]


class TestSweep:
    def test_depolarizing(self, tmp_path):
        cfg = write(tmp_path, "s.json", {"command": "sweep", "state": {"family": "maxent_a1a"},
                                         "sweep": {"param": "p", "start": 0, "stop": 1, "steps": 11}})
        out = tmp_path / "s.csv"
        assert main(["--config", cfg, "--channel", "depolarizing", "--out", str(out)]) == 0
        rows = list(csv.reader(out.read_text().splitlines()))
        assert tuple(rows[0]) == SWEEP_COLUMNS
        assert len(rows) == 12
        q = [float(r[-1]) for r in rows[1:]]
        assert all(a >= b for a, b in itertools.pairwise(q))
        assert q[0] == pytest.approx(1.0, abs=1e-12)
        assert q[-1] == pytest.approx(0.0, abs=1e-12)
        # Every numeric field carries at least 12 significant digits.
        for r in rows[1:]:
            for field in r:
                mant = field.split("e")[0].replace("-", "").replace(".", "").lstrip("0")
                assert len(mant) >= 12 or set(field.split("e")[0]) <= set("0.-")

    def test_nested_param(self):
        code, out, _ = run_cfg({
            "command": "sweep",
            "channel": {"kind": "interaction", "params": {
                "unitary": "swap", "noise_B": {"kind": "erasure", "params": {"d": 2, "p": 0}},
                "noise_E": {"kind": "identity", "params": {"d": 2}}}},
            "sweep": {"param": "noise_B.params.p", "start": 0.0, "stop": 0.4, "steps": 3}})
        assert code == 0
        rows = list(csv.reader(out.splitlines()))
        assert float(rows[3][3]) == pytest.approx(1 - 2 * 0.4, abs=1e-12)


class TestFqsw:
    def test_decoupled(self, tmp_path):
        cfg = write(tmp_path, "q.json", {"command": "fqsw", "fqsw": {
            "state": {"family": "decoupled", "dims": [4, 8, 2]}, "a1_dim": 2}})
        out = tmp_path / "fq.json"
        assert main(["--config", cfg, "--trials", "200", "--out", str(out)]) == 0
        res = json.loads(out.read_text())
        assert res["lhs_mean"] < 1e-10
        assert res["bound_satisfied"] is True
        assert res["trials"] == 200
        lines = trials_path(out).read_text().splitlines()
        assert lines[0] == "trial_index,lhs_value"
        assert len(lines) == 201

    def test_haar(self):
        code, out, _ = run_cfg({"command": "fqsw", "seed": 4, "fqsw": {
            "state": {"family": "haar", "dims": [4, 2, 2]}, "a2_dim": 2, "trials": 300}})
        assert code == 0
        assert json.loads(out)["bound_satisfied"]

    def test_flags(self, tmp_path):
        out = tmp_path / "f.json"
        code = main(["fqsw", "--a1-dim", "2", "--trials", "50", "--out", str(out)])
        assert code == 0
        res = json.loads(out.read_text())
        assert (res["a1_dim"], res["trials"]) == (2, 50)
        assert len(trials_path(out).read_text().splitlines()) == 51


class TestOptimize:
    def test_flags(self, tmp_path):
        out = tmp_path / "o.json"
        code = main(["optimize", "--channel", "identity", "--objective", "ea_df", "--restarts", "2",
                     "--a1-dim", "2", "--seed", "5", "--out", str(out)])
        assert code == 0
        res = json.loads(out.read_text())
        assert res["optimizer"]["restarts"] == 2
        assert res["optimizer"]["seed"] == 5
        assert len(res["state"]["amplitudes"]) == 8
        assert res["objective_value"] > 0.99


class TestValidate:
    def test_valid(self):
        assert validate(RunConfig.from_dict({"command": "rates", "channel": DIRECT})) == []

    def test_leaky_kraus(self):
        diags = validate(RunConfig.from_dict({"command": "rates", "channel": LEAKY}))
        assert len(diags) == 1
        assert "leaky" in diags[0]

    def test_single_step_sweep(self):
        diags = validate(RunConfig.from_dict({
            "command": "sweep", "channel": {"kind": "depolarizing", "params": {"p": 0.1}},
            "sweep": {"param": "p", "start": 0, "stop": 1, "steps": 1}}))
        assert len(diags) == 1
        assert "steps" in diags[0]

    def test_missing_pieces(self):
        assert validate(RunConfig.from_dict({"command": "rates"}))
        assert validate(RunConfig.from_dict({"command": "explode"}))
        assert validate(RunConfig.from_dict({"command": "fqsw", "fqsw": {"a1_dim": 3}}))
        assert validate(RunConfig.from_dict({"command": "optimize", "channel": DIRECT,
                                             "objective": "best"}))

    def test_unknown_keys(self):
        with pytest.raises(ConfigError, match="chanel"):
            RunConfig.from_dict({"command": "rates", "chanel": DIRECT})


class TestExitCodes:
    def test_unknown_channel(self, capsys):
        assert main(["rates", "--channel", "wormhole"]) == EXIT_CONFIG
        err = capsys.readouterr().err.strip().splitlines()
        assert len(err) == 1 and "wormhole" in err[0]

    def test_malformed_kraus(self, tmp_path, capsys):
        cfg = write(tmp_path, "k.json", {"command": "rates", "channel": {"kraus": [1, 2, 3]}})
        assert main(["--config", cfg]) == EXIT_CONFIG
        assert len(capsys.readouterr().err.strip().splitlines()) == 1

    def test_dimension_mismatch(self, tmp_path):
        cfg = write(tmp_path, "d.json", {"command": "rates", "channel": DIRECT, "state": {
            "amplitudes": [[1, 0], [0, 0]], "dims": [1, 2, 1]}})
        assert main(["--config", cfg]) == EXIT_CONFIG

    def test_bad_json(self, tmp_path):
        p = tmp_path / "bad.json"
        p.write_text("{not json")
        assert main(["--config", str(p), "rates"]) == EXIT_CONFIG

    def test_numeric_domain(self, capsys):
        assert main(["rates", "--channel", "depolarizing", "--p", "nan"]) == EXIT_NUMERIC
        assert "numeric" in capsys.readouterr().err

    def test_subprocess_entry_point(self, tmp_path):
        proc = subprocess.run([sys.executable, "-m", "qrelay", "rates", "--channel", "nowhere"],
                              capture_output=True, text=True, check=False)
        assert proc.returncode == EXIT_CONFIG
        assert proc.stderr.count("\n") == 1


COMMAND_CONFIGS = {
    "rates": {"command": "rates", "channel": {"kind": "partial_swap", "params": {"theta": 0.5, "p": 0.1}},
              "state": {"family": "random"}, "seed": 9},
    "optimize": {"command": "optimize", "channel": DIRECT, "objective": "ea_df",
                 "optimizer": {"restarts": 2, "max_evals": 400}, "seed": 9},
    "feasible": {"command": "feasible", "channel": DIRECT, "rate_point": {"Q": 0.25}},
    "sweep": {"command": "sweep", "channel": {"kind": "erasure", "params": {"p": 0}},
              "sweep": {"param": "p", "start": 0, "stop": 0.5, "steps": 4}},
    "fqsw": {"command": "fqsw", "seed": 9, "fqsw": {"state": {"family": "haar", "dims": [4, 2, 2]},
                                                    "a1_dim": 2, "trials": 100}},
}


@pytest.mark.parametrize("command", sorted(COMMAND_CONFIGS))
def test_byte_identical_outputs(command, tmp_path):
    cfg = write(tmp_path, "c.json", COMMAND_CONFIGS[command])
    blobs = []
    for i in range(2):
        out = tmp_path / f"out{i}.dat"
        assert main(["--config", cfg, "--out", str(out)]) == 0
        files = [out.read_bytes()]
        if trials_path(out).exists():
            files.append(trials_path(out).read_bytes())
        blobs.append(files)
    assert blobs[0] == blobs[1]
