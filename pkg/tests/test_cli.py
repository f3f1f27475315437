#!/usr/bin/env python3
"""
CLI Test Suite
==============
End-to-end runs of the ``cwcodes`` subcommands with captured output.
"""

import io
import json
import os
import sys
import tempfile
import unittest
from pathlib import Path
from unittest.mock import patch

# Add src directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from cwcodes.cli import build_parser, config_from_args, main
from cwcodes.core_codes import read_code
from cwcodes.designs import intersection_size, read_design


def run_cli(*argv):
    """Run main() and return (exit status, stdout)"""
    with patch('sys.stdout', new_callable=io.StringIO) as out:
        status = main(list(argv))
    return status, out.getvalue()


def tamper(path: Path) -> None:
    """Append a copy of the first word with one nonzero symbol changed"""
    lines = path.read_text().splitlines()
    body = [line for line in lines if not line.startswith('#')]
    q = int(body[0].split()[3])
    symbols = [int(x) for x in body[1].split()]
    i = next(j for j, s in enumerate(symbols) if s)
    symbols[i] = symbols[i] % (q - 1) + 1
    lines.append(' '.join(map(str, symbols)))
    path.write_text('\n'.join(lines) + '\n')


class TestParser(unittest.TestCase):
    """Test argument handling"""

    def test_defaults_from_config(self):
        """Test that seed and budget fall back to the configuration"""
        args = build_parser().parse_args(['bound', '7', '4', '3', '3'])
        config = config_from_args(args)
        self.assertEqual((config.n, config.d, config.w, config.q), (7, 4, 3, 3))
        self.assertEqual(config.seed, 0)
        self.assertGreaterEqual(config.budget, 1)

    def test_search_disjoint_options(self):
        """Test family options"""
        args = build_parser().parse_args(['search-disjoint', '--family', 'sts', '--n', '9', '--s', '2',
                                          '--separation', '3'])
        config = config_from_args(args)
        self.assertEqual((config.family, config.n, config.s, config.separation), ('sts', 9, 2, 3))

    def test_negative_seed(self):
        """Test that a negative seed is a parameter error"""
        status, _ = run_cli('bound', '7', '4', '3', '3', '--seed', '-1')
        self.assertEqual(status, 2)

    def test_zero_budget_and_workers(self):
        """Test that explicit zero budget or workers is a parameter error"""
        status, _ = run_cli('construct', '7', '4', '3', '3', '--budget', '0')
        self.assertEqual(status, 2)
        status, _ = run_cli('bound', '7', '4', '3', '3', '--workers', '0')
        self.assertEqual(status, 2)


class TestConstructAndVerify(unittest.TestCase):
    """Test construct, verify and exit statuses"""

    def test_construct_then_verify(self):
        """Test that a written code verifies and a tampered one fails"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "code_7_4_3_4.txt"
            status, out = run_cli('construct', '7', '4', '3', '4', '--out', str(path))
            self.assertEqual(status, 0)
            self.assertTrue(out.startswith("# seed=0 "))
            code = read_code(path)
            self.assertEqual(len(code), 21)
            self.assertTrue(path.read_text().startswith("7 4 3 4\n"))
            self.assertIn("provenance:", out)

            status, out = run_cli('verify', str(path))
            self.assertEqual(status, 0)
            self.assertIn("valid=True", out)

            tamper(path)
            status, out = run_cli('verify', str(path), '--format', 'json')
            self.assertEqual(status, 1)
            document = json.loads(out)
            self.assertFalse(document["report"]["valid"])
            self.assertEqual(document["report"]["actual_min_distance"], 1)

    def test_construct_json_words(self):
        """Test that JSON output without --out carries the words"""
        status, out = run_cli('construct', '9', '4', '3', '3', '--format', 'json', '--seed', '4')
        self.assertEqual(status, 0)
        document = json.loads(out)
        self.assertEqual(document["run"]["seed"], 4)
        self.assertEqual(document["size"], 24)
        self.assertTrue(document["optimal"])
        self.assertEqual(len(document["words"]), 24)

    def test_output_is_reproducible(self):
        """Test byte-identical output for the same seed"""
        first = run_cli('construct', '10', '4', '3', '3', '--seed', '11')
        second = run_cli('construct', '10', '4', '3', '3', '--seed', '11')
        self.assertEqual(first, second)
        self.assertEqual(first[0], 0)

    def test_bad_parameters(self):
        """Test exit status 2 for w > n"""
        status, _ = run_cli('construct', '3', '4', '5', '3')
        self.assertEqual(status, 2)

    def test_missing_file(self):
        """Test exit status 2 for an unreadable code file"""
        with tempfile.TemporaryDirectory() as tmp:
            status, _ = run_cli('verify', str(Path(tmp) / "absent.txt"))
        self.assertEqual(status, 2)

    def test_malformed_file(self):
        """Test exit status 2 for a malformed code file"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "bad.txt"
            path.write_text("3 2 2 2\n1 1\n")
            status, _ = run_cli('verify', str(path))
        self.assertEqual(status, 2)

    def test_duplicated_word(self):
        """Test exit status 2 for a file repeating a word"""
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "dup.txt"
            path.write_text("7 4 3 2\n1 1 1 0 0 0 0\n1 1 1 0 0 0 0\n")
            status, _ = run_cli('verify', str(path))
        self.assertEqual(status, 2)

    def test_explicit_t_too_small_for_alphabet(self):
        """Test exit status 2 when --t leaves fewer than q - 1 disjoint packings"""
        status, _ = run_cli('construct', '9', '5', '4', '4', '--t', '2')
        self.assertEqual(status, 2)


class TestBound(unittest.TestCase):
    """Test the bound subcommand"""

    def test_exact_13_6_4(self):
        """Test the JSON report for A_5(13,6,4)"""
        status, out = run_cli('bound', '13', '6', '4', '5', '--format', 'json')
        self.assertEqual(status, 0)
        document = json.loads(out)
        self.assertEqual(document["exact"]["value"], 52)
        self.assertEqual(document["best_upper"], 52)
        self.assertEqual(document["run"]["command"], "bound")

    def test_text_report(self):
        """Test the text bracket line"""
        status, out = run_cli('bound', '11', '4', '3', '4')
        self.assertEqual(status, 0)
        self.assertIn("best: 51 <= A <= 55", out)

    def test_with_construction(self):
        """Test that --construct raises the lower bound"""
        status, out = run_cli('bound', '9', '4', '3', '4', '--construct', '--format', 'json')
        self.assertEqual(status, 0)
        self.assertEqual(json.loads(out)["best_lower"], 36)

    def test_invalid_distance(self):
        """Test exit status 2 for d = 0"""
        status, _ = run_cli('bound', '5', '0', '2', '3')
        self.assertEqual(status, 2)


class TestTable(unittest.TestCase):
    """Test the table subcommand"""

    def test_n43_rows(self):
        """Test one row per (n, q) cell"""
        status, out = run_cli('table', '--kind', 'n43', '--n-min', '6', '--n-max', '8',
                              '--q-min', '2', '--q-max', '3', '--format', 'json')
        self.assertEqual(status, 0)
        rows = json.loads(out)["rows"]
        self.assertEqual(len(rows), 6)
        self.assertEqual({(r["n"], r["q"]): r["exact"] for r in rows}[(7, 3)], 14)

    def test_u_correction(self):
        """Test the correction column"""
        status, out = run_cli('table', '--kind', 'u-correction', '--n-min', '10', '--n-max', '11',
                              '--q-min', '3', '--q-max', '3', '--format', 'json')
        self.assertEqual(status, 0)
        rows = json.loads(out)["rows"]
        self.assertEqual([r["correction"] for r in rows], ["4", "2/3"])

    def test_13_6_4_text(self):
        """Test that undetermined cells print as brackets"""
        status, out = run_cli('table', '--kind', '13-6-4', '--q-min', '6', '--q-max', '7')
        self.assertEqual(status, 0)
        self.assertIn("65", out)
        self.assertIn("[", out)

    def test_bad_range(self):
        """Test exit status 2 for an empty range"""
        status, _ = run_cli('table', '--n-min', '9', '--n-max', '5')
        self.assertEqual(status, 2)


class TestSearchDisjoint(unittest.TestCase):
    """Test the search-disjoint subcommand"""

    def test_two_sts_9(self):
        """Test two disjoint STS(9) written to a directory"""
        with tempfile.TemporaryDirectory() as tmp:
            status, out = run_cli('search-disjoint', '--family', 'sts', '--n', '9', '--s', '2',
                                  '--out', tmp, '--format', 'json')
            self.assertEqual(status, 0)
            self.assertEqual(json.loads(out)["result"]["copies"], 2)
            a, _ = read_design(Path(tmp) / "copy_0.design")
            b, _ = read_design(Path(tmp) / "copy_1.design")
        self.assertEqual(len(a), 12)
        self.assertEqual(intersection_size(a, b), 0)

    def test_too_many_copies(self):
        """Test that more copies than C(n,k) allows is rejected"""
        status, _ = run_cli('search-disjoint', '--family', 'sts', '--n', '7', '--s', '6')
        self.assertEqual(status, 2)

    def test_budget_exhausted(self):
        """Test exit status 3 when three Fano planes are requested"""
        status, _ = run_cli('search-disjoint', '--family', 'sts', '--n', '7', '--s', '3',
                            '--budget', '2000')
        self.assertEqual(status, 3)

    def test_missing_n(self):
        """Test that the STS family needs --n"""
        status, _ = run_cli('search-disjoint', '--family', 'sts', '--s', '2')
        self.assertEqual(status, 2)


if __name__ == "__main__":
    unittest.main()
