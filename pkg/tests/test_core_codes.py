#!/usr/bin/env python3
"""
Core Codes Test Suite
=====================
Words, codes, set systems, verification kernels, the code file format and
the brute-force optimality oracle.
"""

import os
import sys
import tempfile
import unittest
from math import comb
from pathlib import Path
from unittest.mock import patch

import numpy as np

# Add src directory to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'src'))

from cwcodes.config import load_config
from cwcodes.core_codes import (
    UNDEFINED,
    Code,
    CodeParams,
    SetSystem,
    Word,
    all_weight_words,
    brute_force_max,
    code_to_system,
    conflict_pairs,
    format_code,
    hamming_distance,
    packing_code_convert,
    parse_code,
    read_code,
    system_to_code,
    verify_code,
    write_code,
)
from cwcodes.errors import FormatError, ParameterError, SearchBudgetExhausted

CYCLIC_7_Q4 = ("0000121", "0033001", "0020302")


def words_from(strings, q):
    return [Word(tuple(int(c) for c in s), q) for s in strings]


def cyclic_shifts(strings):
    return [s[i:] + s[:i] for s in strings for i in range(len(s))]


class TestWord(unittest.TestCase):
    """Test words and Hamming distance"""

    def test_weight_and_support(self):
        """Test support, weight and sparse view of a word"""
        word = Word((0, 2, 0, 1), 3)
        self.assertEqual(word.support, (1, 3))
        self.assertEqual(word.weight, 2)
        self.assertEqual(word.sparse(), ((1, 3), (2, 1)))
        self.assertEqual(str(word), "0201")

    def test_from_support(self):
        """Test building a word from a block and a symbol"""
        word = Word.from_support(5, (0, 3), 2, 4)
        self.assertEqual(word.symbols, (2, 0, 0, 2, 0))

    def test_symbol_out_of_range(self):
        """Test that symbols outside the alphabet are rejected"""
        with self.assertRaises(ParameterError):
            Word((0, 3), 3)
        with self.assertRaises(ParameterError):
            Word((0, 1), 1)

    def test_hamming_distance(self):
        """Test Hamming distance and length mismatch"""
        self.assertEqual(hamming_distance(Word((1, 1, 0), 2), Word((0, 1, 1), 2)), 2)
        with self.assertRaises(ParameterError):
            hamming_distance(Word((1,), 2), Word((1, 0), 2))

    def test_hamming_distance_sparse_supports(self):
        """Test q-ary distances for overlapping and disjoint supports"""
        u = Word((0, 2, 0, 1, 0, 0, 3), 4)
        v = Word((1, 2, 0, 3, 0, 0, 0), 4)
        self.assertEqual(hamming_distance(u, v), 3)
        self.assertEqual(hamming_distance(u, u), 0)
        self.assertEqual(hamming_distance(Word((1, 1, 0, 0), 2), Word((0, 0, 1, 1), 2)), 4)
        x, y = Word((0, 0, 0, 5, 0), 6), Word((0, 0, 0, 0, 5), 6)
        self.assertEqual(hamming_distance(x, y), sum(a != b for a, b in zip(x.symbols, y.symbols)))


class TestCode(unittest.TestCase):
    """Test code containers"""

    def test_words_sorted_and_deduplicated(self):
        """Test that a code stores sorted unique words"""
        code = Code.build(words_from(["011", "110", "011"], 2), 3, 2, 2, 2)
        self.assertEqual(len(code), 2)
        self.assertEqual([str(w) for w in code], ["011", "110"])

    def test_empty_code_rejected(self):
        """Test that codes must be nonempty"""
        with self.assertRaises(ParameterError):
            Code.build([], 3, 2, 2, 2)

    def test_length_mismatch_rejected(self):
        """Test that words must match the declared length"""
        with self.assertRaises(ParameterError):
            Code.build(words_from(["011"], 2), 4, 2, 2, 2)

    def test_from_array(self):
        """Test building a code from a numpy array"""
        code = Code.from_array(np.array([[1, 2, 0], [0, 1, 1]]), 2, 2, 3)
        self.assertEqual(code.params, CodeParams(3, 2, 2, 3))
        self.assertEqual(code.array.shape, (2, 3))


class TestSetSystem(unittest.TestCase):
    """Test set systems"""

    def test_blocks_normalized(self):
        """Test that blocks are sorted internally and overall"""
        system = SetSystem(4, ((2, 0, 1), (3, 1, 0)))
        self.assertEqual(system.blocks, ((0, 1, 2), (0, 1, 3)))
        self.assertTrue(system.is_uniform([3]))

    def test_invalid_blocks(self):
        """Test repeated points, out-of-range points and duplicate blocks"""
        with self.assertRaises(ParameterError):
            SetSystem(4, ((0, 0, 1),))
        with self.assertRaises(ParameterError):
            SetSystem(3, ((0, 1, 3),))
        with self.assertRaises(ParameterError):
            SetSystem(4, ((0, 1, 2), (2, 1, 0)))


class TestVerification(unittest.TestCase):
    """Test exact verification"""

    def test_cyclic_length_7_code_valid(self):
        """Test the 21 cyclic shifts at (7,4,3)_4"""
        code = Code.build(words_from(cyclic_shifts(CYCLIC_7_Q4), 4), 7, 4, 3, 4)
        report = verify_code(code)
        self.assertEqual(len(code), 21)
        self.assertTrue(report.valid)
        self.assertGreaterEqual(report.actual_min_distance, 4)

    def test_tampered_code_reports_pair(self):
        """Test that a word too close to another is reported"""
        strings = cyclic_shifts(CYCLIC_7_Q4) + ["0000122"]
        code = Code.build(words_from(strings, 4), 7, 4, 3, 4)
        report = verify_code(code)
        self.assertFalse(report.valid)
        self.assertEqual(report.actual_min_distance, 1)
        pairs = {(str(u), str(v)) for u, v, _ in report.distance_violations}
        self.assertIn(("0000121", "0000122"), pairs)

    def test_weight_violation(self):
        """Test that a word of the wrong weight is reported"""
        code = Code.build(words_from(["1100", "1110"], 2), 4, 1, 2, 2)
        report = verify_code(code)
        self.assertFalse(report.valid)
        self.assertEqual(report.weight_violation_count, 1)
        self.assertEqual(str(report.weight_violations[0]), "1110")

    def test_single_word_distance_undefined(self):
        """Test that a one-word code has undefined minimum distance"""
        report = verify_code(Code.build(words_from(["110"], 2), 3, 9, 2, 2))
        self.assertTrue(report.valid)
        self.assertEqual(report.actual_min_distance, UNDEFINED)

    def test_sparse_kernel_matches_dense(self):
        """Test that the sparse kernel produces the same report"""
        rng = np.random.default_rng(7)
        words = all_weight_words(8, 3, 3)
        picked = words[rng.choice(len(words), size=60, replace=False)]
        code = Code.from_array(picked, 4, 3, 3)
        dense = verify_code(code)
        with patch.object(load_config(), 'DENSE_VERIFY_LIMIT', 1):
            sparse = verify_code(code)
        self.assertEqual(dense.to_dict(), sparse.to_dict())
        self.assertFalse(dense.valid)

    def test_workers_do_not_change_report(self):
        """Test that threaded verification gives the same report"""
        words = all_weight_words(7, 3, 3)
        code = Code.from_array(words[::5], 3, 3, 3)
        self.assertEqual(verify_code(code, workers=1).to_dict(),
                         verify_code(code, workers=4).to_dict())

    def test_conflict_pairs(self):
        """Test listing of pairs closer than d"""
        arr = np.array([[1, 1, 0, 0], [1, 0, 1, 0], [0, 0, 1, 1]])
        pairs = conflict_pairs(arr, 4, 2, 2)
        self.assertEqual(pairs.tolist(), [[0, 1, 2], [1, 2, 2]])


class TestPackingCodeConversion(unittest.TestCase):
    """Test the packing/code correspondence"""

    def test_fano_plane_distance_4(self):
        """Test that the blocks of STS(7) form a (7,4,3)_2 code"""
        fano = SetSystem(7, tuple((i, (i + 1) % 7, (i + 3) % 7) for i in range(7)))
        code = system_to_code(fano)
        self.assertEqual(code.params, CodeParams(7, 4, 3, 2))
        self.assertTrue(verify_code(code).valid)
        self.assertEqual(code_to_system(code), fano)

    def test_dispatch(self):
        """Test packing_code_convert in both directions"""
        system = SetSystem(4, ((0, 1), (2, 3)))
        code = packing_code_convert(system)
        self.assertEqual(code.params.d, 4)
        self.assertEqual(packing_code_convert(code), system)
        with self.assertRaises(ParameterError):
            packing_code_convert("not a design")

    def test_non_binary_rejected(self):
        """Test that q-ary codes have no set system"""
        with self.assertRaises(ParameterError):
            code_to_system(Code.build(words_from(["120"], 3), 3, 2, 2, 3))


class TestCodeFileFormat(unittest.TestCase):
    """Test reading and writing code files"""

    def test_write_and_read(self):
        """Test that a written file is exactly the header and word lines"""
        code = Code.build(words_from(["1200", "0012"], 3), 4, 4, 2, 3)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / "code.txt"
            write_code(code, path)
            self.assertEqual(path.read_text(), "4 4 2 3\n0 0 1 2\n1 2 0 0\n")
            loaded = read_code(path)
        self.assertEqual(loaded.words, code.words)
        self.assertEqual(loaded.params, code.params)

    def test_format(self):
        """Test the header and word lines"""
        code = Code.build(words_from(["110"], 2), 3, 2, 2, 2)
        self.assertEqual(format_code(code), "3 2 2 2\n1 1 0\n")

    def test_parse_errors_carry_line(self):
        """Test that parse errors name the offending line"""
        with self.assertRaises(FormatError) as ctx:
            parse_code("3 2 2 2\n1 1 0\n1 1\n")
        self.assertEqual(ctx.exception.line, 3)
        with self.assertRaises(FormatError) as ctx:
            parse_code("# comment\n3 2 two 2\n")
        self.assertEqual(ctx.exception.line, 2)
        with self.assertRaises(FormatError):
            parse_code("3 2 2 3\n1 3 0\n")
        with self.assertRaises(FormatError):
            parse_code("3 2 2 2\n")
        with self.assertRaises(FormatError):
            parse_code("")

    def test_repeated_word_rejected(self):
        """Test that a duplicated word is a format error on its second line"""
        with self.assertRaises(FormatError) as ctx:
            parse_code("7 4 3 2\n1 1 1 0 0 0 0\n0 0 1 1 1 0 0\n1 1 1 0 0 0 0\n")
        self.assertEqual(ctx.exception.line, 4)
        self.assertIn("line 2", str(ctx.exception))

    def test_comment_lines_skipped(self):
        """Test that leading comment lines are accepted on input"""
        code = parse_code("# built elsewhere\n3 2 2 2\n1 1 0\n")
        self.assertEqual(len(code), 1)


class TestBruteForce(unittest.TestCase):
    """Test the clique-search oracle"""

    def test_all_weight_words(self):
        """Test the enumeration of the Johnson space"""
        words = all_weight_words(5, 2, 3)
        self.assertEqual(len(words), comb(5, 2) * 4)
        self.assertTrue(((words != 0).sum(axis=1) == 2).all())

    def test_small_optimal_values(self):
        """Test a few known maxima"""
        self.assertEqual(brute_force_max(5, 4, 3, 3)[0], 5)
        self.assertEqual(brute_force_max(4, 4, 3, 3)[0], 2)
        self.assertEqual(brute_force_max(4, 3, 2, 3)[0], 4)
        self.assertEqual(brute_force_max(7, 4, 3, 2)[0], 7)

    def test_witness_verifies(self):
        """Test that the returned witness is a valid code"""
        size, witness = brute_force_max(6, 3, 2, 3)
        self.assertEqual(size, len(witness))
        self.assertTrue(verify_code(witness).valid)

    def test_weight_exceeds_length(self):
        """Test the empty case"""
        self.assertEqual(brute_force_max(2, 2, 3, 2), (0, None))

    def test_too_large(self):
        """Test the vertex limit"""
        with patch.object(load_config(), 'BRUTE_FORCE_VERTEX_LIMIT', 10):
            with self.assertRaises(ParameterError):
                brute_force_max(6, 4, 3, 2)

    def test_budget_exhausted_keeps_partial(self):
        """Test that running out of nodes returns the best clique so far"""
        with self.assertRaises(SearchBudgetExhausted) as ctx:
            brute_force_max(7, 4, 3, 3, search_budget=3)
        self.assertIsInstance(ctx.exception.partial, Code)
        self.assertTrue(verify_code(ctx.exception.partial).valid)


if __name__ == "__main__":
    unittest.main()
