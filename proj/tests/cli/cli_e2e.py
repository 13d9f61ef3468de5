#!/usr/bin/env python3
# End-to-end run of the command-line tools on loopback: casd, four gatewayd,
# one camsim camera, then audit and bench against the results.
import json
import os
import shutil
import signal
import socket
import subprocess
import sys
import tempfile
import time

BIN = sys.argv[1]
failures = []


def tool(name):
    return os.path.join(BIN, name)


def check(cond, what):
    print(("ok   " if cond else "FAIL ") + what, flush=True)
    if not cond:
        failures.append(what)


def run(*args, **kw):
    return subprocess.run([str(a) for a in args], capture_output=True, text=True, timeout=kw.pop("timeout", 120), **kw)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def start(args, tag):
    p = subprocess.Popen([str(a) for a in args], stdout=subprocess.PIPE, stderr=subprocess.STDOUT, text=True)
    line = p.stdout.readline()
    if "listening on" not in line:
        p.kill()
        raise RuntimeError(f"{tag} did not start: {line!r}")
    return p, line.split("listening on")[1].strip()


def stop(p):
    p.send_signal(signal.SIGTERM)
    try:
        return p.wait(timeout=20)
    except subprocess.TimeoutExpired:
        p.kill()
        return -1


def main():
    work = tempfile.mkdtemp(prefix="vidledger-cli-")
    procs = []
    try:
        keys = []
        for i in range(4):
            r = run(tool("keygen"), "--out", f"{work}/g{i}.seed", "--seed-hex", f"{i + 1:02x}" * 32)
            check(r.returncode == 0 and len(r.stdout.strip()) == 64, f"keygen gateway {i}")
            keys.append(r.stdout.strip())
        r = run(tool("keygen"), "--out", f"{work}/cam.seed", "--seed-hex", "aa" * 32)
        cam = r.stdout.strip()
        check(run(tool("keygen"), "--show", f"{work}/cam.seed").stdout.strip() == cam, "keygen --show")

        casd, store_ep = start([tool("casd"), "--root", f"{work}/store", "--listen", "127.0.0.1:0"], "casd")
        procs.append(casd)

        ports = [free_port() for _ in range(4)]
        for i in range(4):
            with open(f"{work}/g{i}.conf", "w") as f:
                f.write(f"identity = g{i}.seed\nstore = {store_ep}\nconsensus_timeout_ms = 1500\n")
                f.write(f"announce_interval_ms = 200\nmetrics_csv = g{i}.csv\nledger_file = g{i}.vlg\n")
                for j in range(4):
                    f.write(f"peer = {keys[j]} 127.0.0.1:{ports[j]}\n")
        for i in range(4):
            p, _ = start([tool("gatewayd"), "--config", f"{work}/g{i}.conf", "--listen", f"127.0.0.1:{ports[i]}",
                          "--log-level", "warn"], f"gatewayd {i}")
            procs.append(p)

        r = run(tool("camsim"), "--gateway", f"127.0.0.1:{ports[0]}", "--identity", f"{work}/cam.seed",
                "--chunks", 5, "--payload-bytes", 4096, timeout=120)
        receipts = r.stdout.split()
        check(r.returncode == 0 and receipts[0::2] == ["0", "1", "2", "3", "4"], "camsim receipts 0..4")

        # Let replicas settle, then stop the gateways so their ledger files are complete.
        sizes = []
        for _ in range(100):
            sizes = [os.path.getsize(f"{work}/g{i}.vlg") if os.path.exists(f"{work}/g{i}.vlg") else 0 for i in range(4)]
            if len(set(sizes)) == 1 and sizes[0] > 0:
                break
            time.sleep(0.1)
        for p in procs[1:]:
            check(stop(p) == 0, "gatewayd clean shutdown")
        check(len(set(sizes)) == 1, f"replica ledger files agree {sizes}")
        with open(f"{work}/g0.csv") as f:
            rows = f.read().strip().splitlines()
        check(len(rows) == 6 and rows[0].startswith("camera,seq,"), "metrics csv has 5 rows")

        ledger = f"{work}/g3.vlg"
        r = run(tool("audit"), "verify-chain", "--ledger", ledger)
        check(r.returncode == 0 and "verdict: CLEAN" in r.stdout, "verify-chain CLEAN on a replica")
        r = run(tool("audit"), "verify-video", "--ledger", ledger, "--store", store_ep, "--device", cam,
                "--format", "json")
        rep = json.loads(r.stdout) if r.returncode == 0 else {}
        check(rep.get("verdict") == "CLEAN" and rep["summary"]["fail"] == 0, "verify-video CLEAN over casd")

        r = run(tool("audit"), "export-json", "--ledger", ledger, "--out", f"{work}/ledger.json")
        check(r.returncode == 0, "export-json")
        r = run(tool("audit"), "verify-chain", "--ledger", f"{work}/ledger.json", "--format", "json")
        check(r.returncode == 0 and json.loads(r.stdout)["verdict"] == "CLEAN", "verify-chain on JSON export")

        check(stop(casd) == 0, "casd clean shutdown")
        procs = []

        # Unreachable store: INCOMPLETE.
        r = run(tool("audit"), "verify-video", "--ledger", ledger, "--store", store_ep, "--device", cam)
        check(r.returncode == 2, f"store down gives exit 2 (got {r.returncode})")

        # Tamper with the chunk at sequence 2 in a copy of the store.
        shutil.copytree(f"{work}/store", f"{work}/store2")
        doc = json.load(open(f"{work}/ledger.json"))
        blocks = doc["blocks"]
        txs = blocks[0]["transactions"]
        target = txs[2]["storage_address"]
        path = os.path.join(f"{work}/store2", target[:2], target)
        with open(path, "r+b") as f:
            f.seek(60)
            b = f.read(1)
            f.seek(60)
            f.write(bytes([b[0] ^ 0x01]))
        r = run(tool("audit"), "verify-video", "--ledger", ledger, "--store", f"{work}/store2", "--device", cam,
                "--format", "json")
        rep = json.loads(r.stdout) if r.stdout else {}
        check(r.returncode == 1 and rep.get("failing_sequences") == [2], "tampered chunk gives exit 1 at seq 2")

        missing = txs[4]["storage_address"]
        os.remove(os.path.join(f"{work}/store", missing[:2], missing))
        r = run(tool("audit"), "verify-video", "--ledger", ledger, "--store", f"{work}/store", "--device", cam,
                "--format", "json")
        rep = json.loads(r.stdout) if r.stdout else {}
        check(r.returncode == 2 and rep.get("missing_sequences") == [4], "deleted chunk gives exit 2 at seq 4")

        with open(f"{work}/junk.vlg", "wb") as f:
            f.write(b"not a ledger")
        check(run(tool("audit"), "verify-chain", "--ledger", f"{work}/junk.vlg").returncode == 3, "bad file exit 3")
        check(run(tool("audit")).returncode == 3, "usage error exit 3")
        r = run(tool("audit"), "verify-video", "--ledger", ledger, "--store", f"{work}/store", "--device", "zz")
        check(r.returncode == 3, "bad device exit 3")

        # bench: tiny plan, CSV, plot, summary.
        with open(f"{work}/plan.json", "w") as f:
            json.dump({"camera_counts": [1, 2], "chunks_per_camera": 5, "payload_bytes": 4096,
                       "store": "inproc"}, f)
        r = run(tool("bench"), "run", "--plan", f"{work}/plan.json", "--out", f"{work}/r.csv", "--quiet",
                timeout=300)
        check(r.returncode == 0, "bench run")
        lines = open(f"{work}/r.csv").read().strip().splitlines()
        check(lines[0] == "camera_count,txn_count,mean_ms,median_ms,p95_ms,extract_ms,store_ms,sign_ms,append_ms",
              "bench csv header")
        check([l.split(",")[:2] for l in lines[1:]] == [["1", "5"], ["2", "10"]], "bench txn counts")
        r = run(tool("bench"), "plot", "--in", f"{work}/r.csv", "--out", f"{work}/r.svg")
        check(r.returncode == 0 and open(f"{work}/r.svg").read().startswith("<svg"), "bench plot")
        r = run(tool("bench"), "summarize", "--in", f"{work}/r.csv", "--baseline", 1)
        check(r.returncode == 0 and r.stdout.strip() != "", "bench summarize")
        check(run(tool("bench"), "summarize", "--in", f"{work}/r.csv", "--baseline", 8).returncode != 0,
              "missing baseline is an error")
        with open(f"{work}/bad.json", "w") as f:
            f.write('{"chunks_per_camera": 0}')
        check(run(tool("bench"), "run", "--plan", f"{work}/bad.json", "--out", f"{work}/x.csv").returncode != 0,
              "zero chunks rejected")
    finally:
        for p in procs:
            p.kill()
        shutil.rmtree(work, ignore_errors=True)

    print(f"{len(failures)} failure(s)")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
