"""End-to-end tests of the drive command-line tool.

Usage: python3 test_cli.py DRIVE_BINARY SOURCE_DIR
"""
import csv
import io
import os
import pathlib
import socket
import subprocess
import sys
import tempfile
import time
import unittest

DRIVE = None
SOURCE = None

EXIT_OK, EXIT_NETWORK, EXIT_BAD_INPUT, EXIT_UNREACHABLE, EXIT_USAGE = 0, 2, 3, 4, 64


def drive(*args, timeout=120, env=None):
    full_env = dict(os.environ)
    full_env.pop("DRIVE_SEED", None)
    full_env.pop("DRIVE_BROKER_ADDR", None)
    full_env.update(env or {})
    return subprocess.run([DRIVE, *map(str, args)], capture_output=True, text=True, timeout=timeout, env=full_env)


def free_port():
    with socket.socket() as s:
        s.bind(("127.0.0.1", 0))
        return s.getsockname()[1]


def write_ppm(path, width, height, value):
    path.write_bytes(b"P6\n%d %d\n255\n" % (width, height) + bytes([value % 256, 7, 200]) * (width * height))


def wait_for_port(port, deadline=10.0):
    end = time.monotonic() + deadline
    while time.monotonic() < end:
        try:
            with socket.create_connection(("127.0.0.1", port), timeout=0.2):
                return
        except OSError:
            time.sleep(0.05)
    raise TimeoutError(f"nothing listening on {port}")


class Usage(unittest.TestCase):
    def test_help_for_every_subcommand(self):
        for sub in ["", "run", "replay", "bench", "eval", "sample", "worker-mock"]:
            with self.subTest(sub=sub):
                r = drive(*([sub] if sub else []), "--help")
                self.assertEqual(r.returncode, EXIT_OK, r.stderr)
                self.assertIn("Usage", r.stdout)

    def test_unknown_flag_is_a_usage_error(self):
        r = drive("bench", "--no-such-flag")
        self.assertEqual(r.returncode, EXIT_USAGE)

    def test_missing_subcommand_is_a_usage_error(self):
        self.assertEqual(drive().returncode, EXIT_USAGE)

    def test_bad_resolution_is_a_usage_error(self):
        self.assertEqual(drive("bench", "--resolution", "640by480").returncode, EXIT_USAGE)

    def test_missing_track_names_the_path(self):
        missing = "/nonexistent/track.json"
        r = drive("run", "--track", missing, "--frames", "1", "--broker-port", "0", "--console-port", "-1")
        self.assertEqual(r.returncode, EXIT_BAD_INPUT)
        self.assertIn(missing, r.stderr)

    def test_missing_manifest_names_the_path(self):
        missing = "/nonexistent/manifest.tsv"
        r = drive("replay", "--manifest", missing, "--lockstep")
        self.assertEqual(r.returncode, EXIT_BAD_INPUT)
        self.assertIn(missing, r.stderr)


class Sample(unittest.TestCase):
    def test_k_of_n_is_uniform(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            lines = []
            for i in range(10):
                write_ppm(tmp / f"f{i}.ppm", 4, 4, i)
                lines.append(f"f{i}.ppm\t{i * 100}\n")
            (tmp / "manifest.tsv").write_text("".join(lines))
            r = drive("sample", "--manifest", tmp / "manifest.tsv", "-k", 5, "--out", tmp / "out")
            self.assertEqual(r.returncode, EXIT_OK, r.stderr)
            picked = [line.split("\t")[0] for line in (tmp / "out" / "manifest.tsv").read_text().splitlines()]
            self.assertEqual(picked, ["f0.ppm", "f2.ppm", "f4.ppm", "f6.ppm", "f8.ppm"])
            for name in picked:
                self.assertEqual((tmp / "out" / name).read_bytes(), (tmp / name).read_bytes())

    def test_k_larger_than_n_is_rejected(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            write_ppm(tmp / "a.ppm", 4, 4, 1)
            (tmp / "manifest.tsv").write_text("a.ppm\t0\n")
            r = drive("sample", "--manifest", tmp / "manifest.tsv", "-k", 3, "--out", tmp / "out")
            self.assertEqual(r.returncode, EXIT_BAD_INPUT)


class Eval(unittest.TestCase):
    def fixture(self):
        return SOURCE / "tests" / "fixtures" / "eval"

    def test_matches_golden_report(self):
        with tempfile.TemporaryDirectory() as tmp:
            out = pathlib.Path(tmp) / "report.csv"
            r = drive("eval", "--sessions", self.fixture() / "sessions", "--racing-line",
                      self.fixture() / "racing_line.json", "--out", out)
            self.assertEqual(r.returncode, EXIT_OK, r.stderr)
            got = list(csv.DictReader(io.StringIO(out.read_text())))
            want = list(csv.DictReader(io.StringIO((self.fixture() / "expected.csv").read_text())))
            self.assertEqual([(g["condition"], g["metric"]) for g in got],
                             [(w["condition"], w["metric"]) for w in want])
            for g, w in zip(got, want):
                for field in ("mean", "std"):
                    # Both sides print 6 decimals; allow one unit of rounding.
                    self.assertAlmostEqual(float(g[field]), float(w[field]), delta=1.5e-6,
                                           msg=f"{g['condition']} {g['metric']} {field}")

    def test_incomplete_session_is_named(self):
        with tempfile.TemporaryDirectory() as tmp:
            sessions = pathlib.Path(tmp)
            src = (self.fixture() / "sessions" / "A_01.csv").read_text().splitlines(keepends=True)
            (sessions / "A_07.csv").write_text("".join(src[:200]))
            r = drive("eval", "--sessions", sessions, "--racing-line", self.fixture() / "racing_line.json")
            self.assertEqual(r.returncode, EXIT_BAD_INPUT)
            self.assertIn("A_07", r.stderr)


class Bench(unittest.TestCase):
    def test_zero_frames(self):
        r = drive("bench", "--frames", 0)
        self.assertEqual(r.returncode, EXIT_OK, r.stderr)
        self.assertIn('"frames_out": 0', r.stdout)

    def test_unreachable_remote(self):
        r = drive("bench", "--frames", 5, "--stylizer", "remote", "--worker", f"127.0.0.1:{free_port()}")
        self.assertEqual(r.returncode, EXIT_UNREACHABLE)


class DeterministicRun(unittest.TestCase):
    SCRIPT = "t_ms,steer,throttle,brake\n0,0,1,0\n800,0.2,0.6,0\n1600,-0.1,0.4,0\n"

    def run_once(self, tmp, tag, *extra, env=None):
        digest = tmp / f"{tag}.digest"
        r = drive("run", "--frames", 24, "--lockstep", "--resolution", "320x240",
                  "--broker-port", 0, "--console-port", -1, "--control-script", tmp / "script.csv",
                  "--digest-out", digest, "--trajectory", tmp / f"{tag}.csv", *extra, env=env)
        self.assertEqual(r.returncode, EXIT_OK, r.stderr)
        text = digest.read_text()
        self.assertEqual(len(text.splitlines()), 24)
        return text

    def test_same_seed_same_digests(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            (tmp / "script.csv").write_text(self.SCRIPT)
            first = self.run_once(tmp, "a", "--seed", 7)
            self.assertEqual(first, self.run_once(tmp, "b", "--seed", 7))
            self.assertEqual((tmp / "a.csv").read_text(), (tmp / "b.csv").read_text())
            self.assertNotEqual(first, self.run_once(tmp, "c", "--seed", 8))

    def test_env_seed_applies_and_flag_wins(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            (tmp / "script.csv").write_text(self.SCRIPT)
            flag = self.run_once(tmp, "a", "--seed", 7)
            self.assertEqual(flag, self.run_once(tmp, "b", env={"DRIVE_SEED": "7"}))
            self.assertEqual(flag, self.run_once(tmp, "c", "--seed", 7, env={"DRIVE_SEED": "99"}))

    def test_remote_worker_matches_in_process_mock(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            (tmp / "script.csv").write_text(self.SCRIPT)
            local = self.run_once(tmp, "local", "--seed", 7)
            port = free_port()
            worker = subprocess.Popen([DRIVE, "worker-mock", "--listen", f"127.0.0.1:{port}"],
                                      stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
            try:
                wait_for_port(port)
                remote = self.run_once(tmp, "remote", "--seed", 7, "--worker", f"127.0.0.1:{port}")
            finally:
                worker.terminate()
                worker.wait(timeout=10)
            self.assertEqual(local, remote)


class Replay(unittest.TestCase):
    def test_out_dir_preserves_order_and_size(self):
        with tempfile.TemporaryDirectory() as tmp:
            tmp = pathlib.Path(tmp)
            lines = []
            for i in range(6):
                write_ppm(tmp / f"in{i}.ppm", 128, 96, 40 * i)
                lines.append(f"in{i}.ppm\t{i * 33_000_000}\n")
            (tmp / "manifest.tsv").write_text("".join(lines))
            r = drive("replay", "--manifest", tmp / "manifest.tsv", "--lockstep", "--resolution", "64x64",
                      "--out-dir", tmp / "out")
            self.assertEqual(r.returncode, EXIT_OK, r.stderr)
            entries = (tmp / "out" / "manifest.tsv").read_text().splitlines()
            self.assertEqual(len(entries), 6)
            for entry in entries:
                data = (tmp / "out" / entry.split("\t")[0]).read_bytes()
                self.assertTrue(data.startswith(b"P6\n64 64\n255\n"), data[:20])

    def test_port_in_use(self):
        port = free_port()
        with socket.socket() as s:
            s.bind(("127.0.0.1", port))
            s.listen()
            with tempfile.TemporaryDirectory() as tmp:
                tmp = pathlib.Path(tmp)
                write_ppm(tmp / "a.ppm", 64, 64, 1)
                (tmp / "manifest.tsv").write_text("a.ppm\t0\n")
                r = drive("replay", "--manifest", tmp / "manifest.tsv", "--publish", "--broker-port", port,
                          "--console-port", -1)
                self.assertEqual(r.returncode, EXIT_NETWORK, r.stderr)


if __name__ == "__main__":
    DRIVE = sys.argv[1]
    SOURCE = pathlib.Path(sys.argv[2])
    unittest.main(argv=[sys.argv[0], "-v", *sys.argv[3:]])
