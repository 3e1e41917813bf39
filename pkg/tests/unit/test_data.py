"""Unit tests for price, OR-Library and generated data."""

import shutil
import tempfile
from pathlib import Path

import numpy as np
import pytest

from dcaport.data.builder import (
    InstanceConfig,
    build_instance,
    required_return_rule,
    single_asset_net_returns,
)
from dcaport.data.generator import generate_instance, random_moments
from dcaport.data.orlib import load_orlib, parse_orlib
from dcaport.data.prices import MomentEstimate, estimate_moments, load_prices
from dcaport.model.instance import validate_instance
from dcaport.utils.config import Config
from dcaport.utils.exceptions import (
    ConfigurationError,
    DataFormatError,
    ValidationError,
)

ORLIB_TEXT = """3
0.01 0.1
0.02 0.2
0.03 0.3
1 1 1.0
1 2 0.5
1 3 0.0
2 2 1.0
2 3 -0.5
3 3 1.0
"""


class TestPrices:
    """Test cases for price loading and moment estimation."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def _write(self, text: str) -> Path:
        path = Path(self.temp_dir) / "prices.csv"
        path.write_text(text)
        return path

    def test_load_and_estimate(self):
        """Test simple returns and the unbiased covariance."""
        path = self._write("A,B\n100,50\n110,50\n99,55\n")
        series = load_prices(path)
        assert series.asset_ids == ('A', 'B')
        assert series.T == 3
        m = estimate_moments(series)
        returns = np.array([[0.1, 0.0], [-0.1, 0.1]])
        assert m.T_used == 2
        assert np.allclose(m.r, returns.mean(axis=0))
        assert np.allclose(m.Q, np.cov(returns.T, ddof=1))
        assert np.array_equal(m.Q, m.Q.T)

    def test_missing_price(self):
        """Test that a blank cell rejects the file with its location."""
        path = self._write("A,B\n100,50\n110,\n99,55\n")
        with pytest.raises(DataFormatError) as excinfo:
            load_prices(path)
        assert excinfo.value.line == 3
        assert excinfo.value.column == 2

    def test_non_positive_price(self):
        """Test rejection of zero prices."""
        path = self._write("A,B\n100,50\n0,51\n99,55\n")
        with pytest.raises(DataFormatError, match="non-positive"):
            load_prices(path)

    def test_unparseable_price(self):
        """Test rejection of text cells."""
        path = self._write("A,B\n100,50\nabc,51\n99,55\n")
        with pytest.raises(DataFormatError, match="cannot parse"):
            load_prices(path)

    def test_too_few_rows(self):
        """Test the minimum number of periods."""
        path = self._write("A,B\n100,50\n110,50\n")
        with pytest.raises(DataFormatError, match="T >= 3"):
            load_prices(path)

    def test_empty_file(self):
        """Test an empty price file."""
        with pytest.raises(DataFormatError):
            load_prices(self._write(""))


class TestOrlib:
    """Test cases for the OR-Library parser."""

    def setup_method(self):
        """Set up test fixtures."""
        self.temp_dir = tempfile.mkdtemp()

    def teardown_method(self):
        """Clean up test fixtures."""
        shutil.rmtree(self.temp_dir, ignore_errors=True)

    def test_parse(self):
        """Test covariance assembly from correlations."""
        m = parse_orlib(ORLIB_TEXT)
        assert m.n == 3
        assert np.allclose(m.r, [0.01, 0.02, 0.03])
        assert m.Q[0, 0] == pytest.approx(0.01)
        assert m.Q[0, 1] == pytest.approx(0.5 * 0.1 * 0.2)
        assert m.Q[1, 2] == pytest.approx(-0.5 * 0.2 * 0.3)
        assert np.array_equal(m.Q, m.Q.T)

    def test_load_from_file(self):
        """Test reading the same layout from disk."""
        path = Path(self.temp_dir) / "port1.txt"
        path.write_text(ORLIB_TEXT)
        assert np.allclose(load_orlib(path).Q, parse_orlib(ORLIB_TEXT).Q)

    def test_lower_triangle_rejected(self):
        """Test rejection of i > j entries."""
        text = ORLIB_TEXT.replace("2 3 -0.5", "3 2 -0.5")
        with pytest.raises(DataFormatError, match="below the diagonal"):
            parse_orlib(text)

    def test_duplicate_entry(self):
        """Test rejection of repeated pairs."""
        text = ORLIB_TEXT.replace("1 3 0.0", "1 2 0.0")
        with pytest.raises(DataFormatError, match="duplicate"):
            parse_orlib(text)

    def test_correlation_out_of_range(self):
        """Test the correlation range check."""
        text = ORLIB_TEXT.replace("1 2 0.5", "1 2 1.5")
        with pytest.raises(DataFormatError, match="outside"):
            parse_orlib(text)

    def test_wrong_entry_count(self):
        """Test truncated files."""
        text = '\n'.join(ORLIB_TEXT.splitlines()[:-1])
        with pytest.raises(DataFormatError, match="correlation entries"):
            parse_orlib(text)

    def test_empty(self):
        """Test an empty file."""
        with pytest.raises(DataFormatError):
            parse_orlib("   \n")


class TestBuilder:
    """Test cases for instance assembly and the R-rule."""

    def setup_method(self):
        """Set up test fixtures."""
        self.moments = MomentEstimate(
            r=np.array([0.01, 0.02, 0.03]),
            Q=np.diag([0.01, 0.02, 0.03]),
            asset_ids=('X', 'Y', 'Z'),
        )

    def test_defaults(self):
        """Test experiment defaults and the equal-weight benchmark."""
        inst = build_instance(self.moments, InstanceConfig(card=2))
        assert np.allclose(inst.a, 0.05)
        assert np.allclose(inst.b, 1.0)
        assert np.allclose(inst.c_b, 0.001)
        assert np.allclose(inst.x_bar, 1.0 / 3.0)
        assert np.allclose(inst.P, 0.0)
        assert inst.asset_ids == ('X', 'Y', 'Z')
        assert validate_instance(inst).is_valid

    def test_r_rule_midpoint(self):
        """Test R halfway between the worst and best single-asset return."""
        inst = build_instance(self.moments, InstanceConfig(card=2))
        net = single_asset_net_returns(inst.r, inst.x_bar, inst.c_b,
                                       inst.c_s, inst.P)
        assert inst.R == pytest.approx((net.min() + net.max()) / 2.0)

    def test_r_rule_cost_free_pair(self):
        """Test the midpoint rule on two assets without costs or benchmark."""
        moments = MomentEstimate(r=np.array([0.0, 0.1]),
                                 Q=np.diag([1.0, 4.0]), asset_ids=('A', 'B'))
        inst = build_instance(moments, InstanceConfig(
            card=1, c_b=0.0, c_s=0.0, x_bar=np.zeros(2)))
        assert inst.R == pytest.approx(0.05, abs=1e-15)

    def test_r_rule_fractions(self):
        """Test the ends of the fraction range."""
        r = self.moments.r
        zeros = np.zeros(3)
        ones = np.ones(3)
        lo = required_return_rule(r, zeros, ones, zeros, zeros, zeros,
                                  zeros, 0.0)
        hi = required_return_rule(r, zeros, ones, zeros, zeros, zeros,
                                  zeros, 1.0)
        assert lo == pytest.approx(0.01)
        assert hi == pytest.approx(0.03)

    def test_single_asset_costs(self):
        """Test trading costs of moving to one asset."""
        net = single_asset_net_returns(
            np.array([0.1, 0.2]), np.zeros(2), np.full(2, 0.01),
            np.full(2, 0.02), np.array([0.5, 0.5]))
        assert net[0] == pytest.approx(0.1 - 0.01 * 0.5 - 0.02 * 0.5)
        assert net[1] == pytest.approx(0.2 - 0.01 * 0.5 - 0.02 * 0.5)

    def test_r_rule_undefined(self):
        """Test the R-rule when no asset can be held."""
        with pytest.raises(ValidationError):
            required_return_rule(np.ones(2), np.full(2, 0.6),
                                 np.full(2, 0.5), np.zeros(2), np.zeros(2),
                                 np.zeros(2), np.zeros(2))

    def test_explicit_R(self):
        """Test that an explicit R wins over the rule."""
        inst = build_instance(self.moments, InstanceConfig(card=1, R=0.0))
        assert inst.R == 0.0

    def test_invalid_build(self):
        """Test that unusable instances are rejected."""
        with pytest.raises(ValidationError):
            build_instance(self.moments, InstanceConfig(card=1, R=1.0))

    def test_config_validation(self):
        """Test settings validation."""
        with pytest.raises(ConfigurationError):
            InstanceConfig(card=1, r_rule_fraction=1.5)
        with pytest.raises(ConfigurationError):
            InstanceConfig(card=1, card_mode='any')

    def test_from_config(self):
        """Test reading the instance section."""
        config = Config()
        config.set('instance.a', 0.1)
        cfg = InstanceConfig.from_config(config, 2, r_rule_fraction=0.25)
        assert cfg.card == 2
        assert cfg.a == 0.1
        assert cfg.r_rule_fraction == 0.25


class TestGenerator:
    """Test cases for seeded random instances."""

    def test_deterministic(self):
        """Test that a seed fixes the instance."""
        first = generate_instance(10, seed=7)
        second = generate_instance(10, seed=7)
        assert np.array_equal(first.Q, second.Q)
        assert np.array_equal(first.r, second.r)
        assert first.R == second.R
        assert not np.array_equal(first.r, generate_instance(10, 8).r)

    def test_defaults(self):
        """Test the default cardinality and validity."""
        inst = generate_instance(10, seed=1)
        assert inst.card == 5
        assert validate_instance(inst).is_valid
        assert generate_instance(3, seed=1).card == 3
        assert generate_instance(1, seed=1, card=4).card == 1

    def test_positive_definite(self):
        """Test that the factor model covariance is positive definite."""
        m = random_moments(12, seed=2)
        assert np.linalg.eigvalsh(m.Q)[0] > 0.0

    def test_invalid_n(self):
        """Test rejection of an empty universe."""
        with pytest.raises(ValidationError):
            generate_instance(0, seed=1)
