import hashlib
import math

import numpy as np
import pytest

from freeshift import (FiniteQuotient, FreeAbelianQuotient, FreeKillQuotient,
                       GeometricPotential, ValidationError, load_config,
                       save_potential_csv)

MINIMAL = """\
[model]
d = 2

[zeta]
ratios = 0.25
"""


def _write(tmp_path, text, name="run.ini"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


class TestMinimal:
    def test_defaults(self, tmp_path):
        cfg = load_config(_write(tmp_path, MINIMAL))
        assert cfg.d == 2
        assert cfg.quotient is None
        assert cfg.psi.values.max() == 0.0 == cfg.psi.values.min()
        assert isinstance(cfg.zeta, GeometricPotential)
        assert cfg.zeta.value((0,)) == pytest.approx(math.log(0.25))
        assert cfg.betas[0] == -4.0 and cfg.betas[-1] == 4.0
        assert len(cfg.betas) == 161
        assert cfg.alpha_count == 161
        assert cfg.n_max == 40 and cfg.gibbs_len == 8
        assert cfg.tol_eigen == 1e-13 and cfg.tol_bisection == 1e-10
        assert cfg.seed == 0
        assert cfg.describe_quotient() == "none"

    def test_hash_is_of_raw_bytes(self, tmp_path):
        path = _write(tmp_path, MINIMAL)
        cfg = load_config(path)
        want = hashlib.sha256(MINIMAL.encode()).hexdigest()
        assert cfg.config_hash == want
        # any byte change, even a comment, changes the hash
        cfg2 = load_config(_write(tmp_path, MINIMAL + "# note\n", "b.ini"))
        assert cfg2.config_hash != want

    def test_missing_file(self, tmp_path):
        with pytest.raises(ValidationError, match="not found"):
            load_config(str(tmp_path / "nope.ini"))


class TestValidation:
    def test_unknown_section_and_key(self, tmp_path):
        with pytest.raises(ValidationError, match="unknown config section"):
            load_config(_write(tmp_path, MINIMAL + "[extra]\nx = 1\n"))
        with pytest.raises(ValidationError, match="unknown key"):
            load_config(_write(tmp_path,
                               "[model]\nd = 2\nrank = 3\n\n"
                               "[zeta]\nratios = 0.25\n"))

    def test_required_fields(self, tmp_path):
        with pytest.raises(ValidationError, match=r"\[zeta\]"):
            load_config(_write(tmp_path, "[model]\nd = 2\n"))
        with pytest.raises(ValidationError, match="model"):
            load_config(_write(tmp_path, "[zeta]\nratios = 0.25\n"))

    def test_zeta_exactly_one_source(self, tmp_path):
        text = "[model]\nd = 2\n\n[zeta]\nratios = 0.25\nconstant = -1\n"
        with pytest.raises(ValidationError, match="exactly one"):
            load_config(_write(tmp_path, text))

    def test_zeta_constant_sign(self, tmp_path):
        text = "[model]\nd = 2\n\n[zeta]\nconstant = 0.5\n"
        with pytest.raises(ValidationError, match="< 0"):
            load_config(_write(tmp_path, text))

    def test_bad_grid(self, tmp_path):
        text = MINIMAL + "[grid]\nbeta_min = 2\nbeta_max = -2\n"
        with pytest.raises(ValidationError, match="beta"):
            load_config(_write(tmp_path, text))

    def test_bad_budget(self, tmp_path):
        text = MINIMAL + "[budgets]\nn_max = 0\n"
        with pytest.raises(ValidationError, match="n_max"):
            load_config(_write(tmp_path, text))


class TestPotentialForms:
    def test_ratio_broadcast_forms(self, tmp_path):
        one = load_config(_write(tmp_path, MINIMAL, "a.ini"))
        per_gen = load_config(_write(
            tmp_path, "[model]\nd = 2\n\n[zeta]\nratios = 0.25, 0.25\n",
            "b.ini"))
        full = load_config(_write(
            tmp_path,
            "[model]\nd = 2\n\n[zeta]\nratios = 0.25,0.25,0.25,0.25\n",
            "c.ini"))
        assert np.array_equal(one.zeta.values, per_gen.zeta.values)
        assert np.array_equal(one.zeta.values, full.zeta.values)

    def test_psi_letters_broadcast(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[psi]\nletters = -0.3, -0.5\n"))
        assert list(cfg.psi.values) == [-0.3, -0.3, -0.5, -0.5]

    def test_file_reference_relative_to_config(self, tmp_path):
        from freeshift import Potential
        sub = tmp_path / "sub"
        sub.mkdir()
        pot = Potential.from_letter_values(2, [-1.0, -1.0, -0.5, -0.5])
        save_potential_csv(pot, str(sub / "psi.csv"))
        cfg = load_config(_write(sub, MINIMAL + "[psi]\nfile = psi.csv\n"))
        assert np.allclose(cfg.psi.values, pot.values)

    def test_zeta_file_enforces_negativity(self, tmp_path):
        from freeshift import Potential
        pot = Potential.from_letter_values(2, [0.5, -1.0, -1.0, -1.0])
        save_potential_csv(pot, str(tmp_path / "z.csv"))
        text = "[model]\nd = 2\n\n[zeta]\nfile = z.csv\n"
        with pytest.raises(ValidationError, match="negative"):
            load_config(_write(tmp_path, text))


class TestQuotientForms:
    def test_none_type(self, tmp_path):
        cfg = load_config(_write(tmp_path, MINIMAL + "[quotient]\n"
                                                     "type = none\n"))
        assert cfg.quotient is None

    def test_abelian(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[quotient]\ntype = abelian\nrank = 2\n"
                                "vectors = 1,0; 0,1\n"))
        assert isinstance(cfg.quotient, FreeAbelianQuotient)
        assert cfg.quotient.eval_word((0, 2)) == (1, 1)

    def test_freekill_is_one_based(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[quotient]\ntype = freekill\nkilled = 2\n"))
        assert isinstance(cfg.quotient, FreeKillQuotient)
        assert cfg.quotient.letter_image(2) == ()   # g2 killed
        with pytest.raises(ValidationError, match="1-based"):
            load_config(_write(
                tmp_path,
                MINIMAL + "[quotient]\ntype = freekill\nkilled = 0\n",
                "bad.ini"))

    def test_finite_from_table_file(self, tmp_path):
        (tmp_path / "z2.table").write_text("2 0\n0 1\n1 0\n")
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[quotient]\ntype = finite\nfile = z2.table\n"
                                "images = 1, 1\n"))
        assert isinstance(cfg.quotient, FiniteQuotient)
        assert cfg.quotient.eval_word((0, 2)) == 0

    def test_unknown_type(self, tmp_path):
        with pytest.raises(ValidationError, match="unknown quotient type"):
            load_config(_write(
                tmp_path, MINIMAL + "[quotient]\ntype = wreath\n"))


class TestGridAndOutput:
    def test_grid_values(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[grid]\nbeta_min = -1\nbeta_max = 1\n"
                                "beta_step = 0.5\nalpha_count = 9\n"))
        assert np.allclose(cfg.betas, [-1, -0.5, 0, 0.5, 1])
        assert cfg.alpha_count == 9

    def test_output_dir_resolves_relative(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, MINIMAL + "[output]\ndirectory = results\n"))
        assert cfg.out_dir == str(tmp_path / "results")

    def test_inline_comments(self, tmp_path):
        cfg = load_config(_write(
            tmp_path, "[model]\nd = 2  # rank\n\n[zeta]\nratios = 0.25\n"))
        assert cfg.d == 2
