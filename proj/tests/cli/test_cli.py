#!/usr/bin/env python3
"""End-to-end checks of the asyncsynth CLI: exit codes and JSON output shapes."""

import argparse
import json
import os
import subprocess
import sys
import tempfile
import unittest
from pathlib import Path

import jsonschema

ARGS = None

ILL_FORMED = {"wf_await_after_loop", "wf_await_in_branch"}


def run(*argv, env=None):
    full_env = dict(os.environ)
    full_env.pop("ASYNCSYNTH_BUDGET", None)
    if env:
        full_env.update(env)
    return subprocess.run([ARGS.cli, *argv], capture_output=True, text=True, env=full_env, timeout=120)


def schema(name):
    return json.loads((Path(ARGS.schemas) / f"{name}.schema.json").read_text())


def corpus(name):
    return str(Path(ARGS.corpus) / f"{name}.tal")


def well_formed_files():
    return sorted(p for p in Path(ARGS.corpus).glob("*.tal") if p.stem not in ILL_FORMED)


class Shapes(unittest.TestCase):
    def check(self, argv, schema_name, codes=(0,)):
        r = run(*argv)
        self.assertIn(r.returncode, codes, f"{argv}: {r.stderr}")
        jsonschema.validate(json.loads(r.stdout), schema(schema_name))
        return r

    def test_parse(self):
        for f in Path(ARGS.corpus).glob("*.tal"):
            with self.subTest(f.stem):
                r = self.check(["parse", "--json", str(f)], "parse", (0, 1))
                ok = json.loads(r.stdout)["ok"]
                self.assertEqual(ok, f.stem not in ILL_FORMED)
                self.assertEqual(r.returncode, 0 if ok else 1)

    def test_run_races_weakest_summaries(self):
        for f in well_formed_files():
            with self.subTest(f.stem):
                self.check(["run", "--json", str(f)], "run")
                self.check(["races", "--json", str(f)], "races", (0, 1))
                self.check(["mt-races", "--json", str(f)], "races", (0, 1))
                self.check(["weakest", "--json", str(f)], "weakest")
                self.check(["summaries", "--json", str(f)], "summaries")

    def test_maxrel(self):
        for f in well_formed_files():
            with self.subTest(f.stem):
                for mode in ("precise", "dataflow"):
                    self.check(["maxrel", "--json", "--mode", mode, str(f)], "maxrel")
                self.check(["mt-maxrel", "--json", str(f)], "maxrel")

    def test_enumerate_lines(self):
        s = schema("enumerate")
        for name in ("rdfile_sync", "two_threads", "branch_repair", "guarded_write"):
            for cmd in ("enumerate", "mt-enumerate"):
                with self.subTest(name=name, cmd=cmd):
                    r = run(cmd, "--json", corpus(name))
                    self.assertEqual(r.returncode, 0, r.stderr)
                    lines = r.stdout.splitlines()
                    self.assertTrue(lines)
                    for i, line in enumerate(lines):
                        rec = json.loads(line)
                        jsonschema.validate(rec, s)
                        self.assertEqual(rec["index"], i)
                        self.assertEqual(rec["metrics"]["work"],
                                         rec["metrics"]["oracle_calls"] + rec["metrics"]["predecessors"])

    def test_dump_lines(self):
        s = schema("action")
        r = run("run", "--dump", corpus("read_then_increment"))
        self.assertEqual(r.returncode, 0, r.stderr)
        execs = set()
        for line in r.stdout.splitlines():
            rec = json.loads(line)
            jsonschema.validate(rec, s)
            execs.add(rec["exec"])
        self.assertEqual(execs, set(range(len(execs))))
        self.assertGreater(len(execs), 1)


class Results(unittest.TestCase):
    def test_lattice(self):
        r = run("enumerate", "--json", "--mode", "precise", corpus("rdfile_sync"))
        vecs = sorted(tuple(json.loads(l)["distance_vector"]) for l in r.stdout.splitlines())
        self.assertEqual(vecs, [(0, 0), (0, 1), (1, 0), (1, 1)])
        w = json.loads(run("weakest", "--json", corpus("rdfile_sync")).stdout)
        self.assertEqual(w["distance_vector"], [2, 1])

    def test_limit(self):
        r = run("enumerate", "--json", "--limit", "1", corpus("rdfile_sync"))
        self.assertEqual(r.returncode, 0)
        self.assertEqual(len(r.stdout.splitlines()), 1)

    def test_race_report(self):
        races = json.loads(run("races", "--json", corpus("increment_racy")).stdout)
        self.assertEqual([(d["var"], d["first_stmt"], d["second_stmt"]) for d in races], [("x", "m1:2", "Main:1")])
        self.assertEqual(json.loads(run("races", "--json", corpus("increment_sound")).stdout), [])

    def test_dataflow_divergence(self):
        precise = json.loads(run("maxrel", "--json", corpus("guarded_write")).stdout)
        sharp = json.loads(run("maxrel", "--json", "--mode", "dataflow", corpus("guarded_write")).stdout)
        self.assertEqual(precise["distance_vector"], [0, 1, 2])
        self.assertEqual(sharp["distance_vector"], [0, 1, 1])

    def test_text_output(self):
        r = run("weakest", corpus("rdfile_sync"))
        self.assertEqual(r.returncode, 0)
        self.assertTrue(r.stdout.startswith("distance (2,1)"))


class ExitCodes(unittest.TestCase):
    def test_findings(self):
        self.assertEqual(run("races", corpus("increment_racy")).returncode, 1)
        self.assertEqual(run("races", corpus("increment_sound")).returncode, 0)
        self.assertEqual(run("mt-races", corpus("start_join")).returncode, 1)
        self.assertEqual(run("parse", corpus("wf_await_in_branch")).returncode, 1)
        self.assertEqual(run("maxrel", corpus("wf_await_after_loop")).returncode, 1)

    def test_usage_and_io(self):
        self.assertEqual(run().returncode, 2)
        self.assertEqual(run("races").returncode, 2)
        self.assertEqual(run("maxrel", "--mode", "fast", corpus("minimal")).returncode, 2)
        r = run("parse", "/nonexistent/file.tal")
        self.assertEqual(r.returncode, 2)
        self.assertIn("cannot read", r.stderr)

    def test_syntax_error_position(self):
        with tempfile.NamedTemporaryFile("w", suffix=".tal", delete=False) as f:
            f.write("globals x;\nmethod Main {\n  x := ;\n}\n")
        try:
            r = run("parse", f.name)
            self.assertEqual(r.returncode, 2)
            self.assertIn(f"{f.name}:3:", r.stderr)
            self.assertIn("syntax-error", r.stderr)
        finally:
            os.unlink(f.name)

    def test_budget(self):
        self.assertEqual(run("run", "--max-states", "1", corpus("two_threads")).returncode, 3)
        self.assertEqual(run("run", corpus("two_threads"), env={"ASYNCSYNTH_BUDGET": "1"}).returncode, 3)
        r = run("run", "--max-states", "1000000", corpus("two_threads"), env={"ASYNCSYNTH_BUDGET": "1"})
        self.assertEqual(r.returncode, 0)

    def test_init_and_domain(self):
        r = run("run", "--json", "--init", "x=5", corpus("minimal"))
        self.assertEqual(r.returncode, 0, r.stderr)
        self.assertEqual(run("run", "--init", "nope=1", corpus("minimal")).returncode, 2)
        r = run("run", "--json", "--domain", "3,5", corpus("rdfile_sync"))
        self.assertEqual(r.returncode, 0, r.stderr)


if __name__ == "__main__":
    parser = argparse.ArgumentParser()
    parser.add_argument("--cli", required=True)
    parser.add_argument("--corpus", required=True)
    parser.add_argument("--schemas", required=True)
    ARGS, rest = parser.parse_known_args()
    unittest.main(argv=[sys.argv[0], *rest], verbosity=2)
