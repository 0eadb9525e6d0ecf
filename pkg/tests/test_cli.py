import json
import os
import subprocess
import sys

import pytest

from mlus.cli import EXIT_IO, EXIT_OK, EXIT_REJECT, EXIT_USAGE, main
from mlus.scheme import Signature

CMD = [sys.executable, "-m", "mlus"]


@pytest.fixture(scope="module")
def keys(tmp_path_factory):
    d = tmp_path_factory.mktemp("cli")
    prefix = str(d / "k")
    assert main(["keygen", "--set", "T0", "--out", prefix, "--seed", "01"]) == EXIT_OK
    sig = str(d / "s.mlsig")
    assert main(["sign", "--pk", prefix + ".mlpk", "--sk", prefix + ".mlsk", "--message", "hello",
                 "--out", sig, "--seed", "02"]) == EXIT_OK
    forged = Signature.from_bytes(open(sig, "rb").read())
    forged = forged.replace(sigma3=(forged.sigma3 + 1) % forged.params.q)
    bad = str(d / "bad.mlsig")
    open(bad, "wb").write(forged.to_bytes())
    return d, prefix + ".mlpk", prefix + ".mlsk", sig, bad


def test_keygen_deterministic_under_seed(tmp_path):
    for name in ("a", "b"):
        assert main(["keygen", "--set", "T0", "--out", str(tmp_path / name), "--seed", "abcd"]) == EXIT_OK
    for ext in (".mlpk", ".mlsk"):
        assert (tmp_path / ("a" + ext)).read_bytes() == (tmp_path / ("b" + ext)).read_bytes()


def test_verify_static(keys, capsys):
    d, pk, sk, sig, bad = keys
    assert main(["verify-static", "--pk", pk, "--sig", sig, "--message", "hello", "--json"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out)["result"] == "ok"
    # sigma3 is not judged statically
    assert main(["verify-static", "--pk", pk, "--sig", bad, "--message", "hello"]) == EXIT_OK


def test_sign_pipeline_through_stdout(keys):
    d, pk, sk, *_ = keys
    signed = subprocess.run(CMD + ["sign", "--pk", pk, "--sk", sk, "--message", "x"], capture_output=True)
    assert signed.returncode == 0
    ver = subprocess.run(CMD + ["verify-static", "--pk", pk, "--sig", "-", "--message", "x"],
                         input=signed.stdout, capture_output=True)
    assert ver.returncode == 0 and ver.stdout.strip() == b"ok"


def test_exit_codes(keys, tmp_path):
    d, pk, sk, sig, bad = keys
    assert main(["nonsense"]) == EXIT_USAGE
    assert main(["keygen", "--set", "ZZ", "--out", "x"]) == EXIT_USAGE
    assert main(["verify-static", "--pk", str(tmp_path / "missing"), "--sig", sig, "--message", "m"]) == EXIT_IO
    broken = tmp_path / "broken.mlpk"
    data = bytearray(open(pk, "rb").read())
    data[100] ^= 1
    broken.write_bytes(bytes(data))
    assert main(["verify-static", "--pk", str(broken), "--sig", sig, "--message", "m"]) == EXIT_IO
    assert main(["verify-static", "--pk", pk, "--sig", sig]) == EXIT_USAGE
    assert main(["verify-static", "--pk", pk, "--sig", sig, "--message", "other"]) == EXIT_OK
    assert main(["confirm", "--role", "verifier", "--pk", pk, "--pipe", "--rounds", "0",
                 "--sig", sig, "--message", "m"]) == EXIT_USAGE


def test_params_show_json(capsys):
    assert main(["params", "show", "--set", "I", "--json"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert d["n"] == 1024 and d["l"] == 1 and d["q"] == 1073707009
    assert main(["params", "--json"]) == EXIT_OK
    assert set(json.loads(capsys.readouterr().out)) >= {"T0", "I", "II", "III", "IV", "V"}


def test_sizes_json(capsys):
    assert main(["sizes", "--set", "V", "--json"]) == EXIT_OK
    d = json.loads(capsys.readouterr().out)
    assert d["compare"]["sigma"]["reference_kib"] == 170


def _pipe_session(mode, pk, sk, sig, msg="hello"):
    env = dict(os.environ, MLUS_SEED="0a")
    signer = subprocess.Popen(CMD + [mode, "--role", "signer", "--pk", pk, "--sk", sk, "--pipe"],
                              stdin=subprocess.PIPE, stdout=subprocess.PIPE, stderr=subprocess.PIPE, env=env)
    verifier = subprocess.Popen(CMD + [mode, "--role", "verifier", "--pk", pk, "--sig", sig, "--message", msg,
                                       "--pipe", "--json"],
                                stdin=signer.stdout, stdout=signer.stdin, stderr=subprocess.PIPE, env=env)
    signer.stdin.close()
    signer.stdout.close()
    _, verr = verifier.communicate(timeout=120)
    signer.wait(timeout=30)
    signer.stderr.close()
    return verifier.returncode, json.loads(verr.decode().strip().splitlines()[-1])


def test_pipe_confirm(keys):
    d, pk, sk, sig, bad = keys
    code, report = _pipe_session("confirm", pk, sk, sig)
    assert code == EXIT_OK and report["verdict"] == "Confirmed" and report["expected"] == "Confirmed"


def test_pipe_disavow_forged(keys):
    d, pk, sk, sig, bad = keys
    code, report = _pipe_session("disavow", pk, sk, bad)
    assert code == EXIT_OK and report["verdict"] == "Disavowed"
    code, report = _pipe_session("confirm", pk, sk, bad)
    assert code == EXIT_REJECT


def test_tcp_confirm(keys):
    d, pk, sk, sig, bad = keys
    signer = subprocess.Popen(CMD + ["confirm", "--role", "signer", "--pk", pk, "--sk", sk,
                                     "--listen", "127.0.0.1:0", "--seed", "03"],
                              stderr=subprocess.PIPE, text=True)
    line = signer.stderr.readline()
    port = line.strip().rsplit(":", 1)[1]
    ver = subprocess.run(CMD + ["confirm", "--role", "verifier", "--pk", pk, "--sig", sig, "--message", "hello",
                                "--connect", f"127.0.0.1:{port}", "--json", "--seed", "04"],
                         capture_output=True, text=True, timeout=120)
    signer.wait(timeout=30)
    signer.stderr.close()
    assert ver.returncode == 0 and json.loads(ver.stdout)["verdict"] == "Confirmed"
