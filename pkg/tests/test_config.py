"""Tests for experiment configuration parsing."""

import math

import pytest

from wac_lab.config import (
    SUITES,
    THREADS_ENV,
    DunfordConfig,
    ExperimentConfig,
    load_config,
    parse_config,
)
from wac_lab.exceptions import ConfigurationException

FULL_CONFIG = """
[run]
suite = certify, sum-converge
seed = 42
out = results
tol = 1e-9
threads = 2
instances = 3
log_level = info

[instance]
construction = perturbed_exact
k = 2
n = 4
spectral_scale = 1.5
anticommutator_target = 0.25

[certify]
mode = legacy
lambda_grid = 1, 10, 100

[sum]
mu = 2.0
lambda_grid = 10, 100
mu_grid = 1, 2

[square_sum]
epsilon_grid = 0.1, 1
samples = 50

[dunford]
lambda_grid = 10
nodes = 64
theta_steps = 8

[kk]
kappa = 0.5
nodes = 100
mu_grid = 1
"""


class TestDefaults:
    """Test the default configuration."""

    def test_empty_text(self):
        """Test that an empty file gives the defaults."""
        config = parse_config("")
        assert config.run.suite == ("identities",)
        assert config.run.seed == 0
        assert config.run.tol == 1e-10
        assert config.instance.construction == "clifford_tensor"

    def test_dunford_theta_grid(self):
        """Test the theta grid k * pi / steps."""
        grid = DunfordConfig(theta_steps=4).theta_grid
        assert grid == pytest.approx((math.pi / 4, math.pi / 2, 3 * math.pi / 4))

    def test_generator_spec(self):
        """Test that the instance section builds a generator recipe."""
        spec = ExperimentConfig().instance.generator_spec(9)
        assert spec.seed == 9
        assert spec.dim == 4


class TestParseConfig:
    """Test parsing every section."""

    def test_full_config(self, monkeypatch):
        """Test that every key is read."""
        monkeypatch.delenv(THREADS_ENV, raising=False)
        config = parse_config(FULL_CONFIG)
        assert config.run.suite == ("certify", "sum-converge")
        assert config.run.seed == 42
        assert config.run.threads == 2
        assert config.run.instances == 3
        assert config.run.log_level == "INFO"
        assert config.instance.k == 2
        assert config.instance.anticommutator_target == 0.25
        assert config.certify.mode == "legacy"
        assert config.certify.lambda_grid == (1.0, 10.0, 100.0)
        assert config.sum.mu == 2.0
        assert config.square_sum.samples == 50
        assert config.dunford.nodes == 64
        assert config.kk.kappa == 0.5

    def test_threads_environment(self, monkeypatch):
        """Test that the environment overrides the configured thread count."""
        monkeypatch.setenv(THREADS_ENV, "4")
        assert parse_config(FULL_CONFIG).run.threads == 4

    def test_bad_threads_environment(self, monkeypatch):
        """Test that a malformed thread count is refused."""
        monkeypatch.setenv(THREADS_ENV, "many")
        with pytest.raises(ConfigurationException, match="Malformed thread count"):
            parse_config("")

    def test_to_dict(self):
        """Test the serialized configuration sections."""
        data = parse_config(FULL_CONFIG).to_dict()
        assert set(data) == {
            "run",
            "instance",
            "certify",
            "sum",
            "square_sum",
            "dunford",
            "kk",
        }
        assert data["run"]["suite"] == ["certify", "sum-converge"]

    def test_relative_matrix_paths(self, tmp_path):
        """Test that matrix paths resolve against the file's directory."""
        text = "[instance]\nconstruction = user_matrix\nmatrix_s = S.json\nmatrix_t = T.json\n"
        config = parse_config(text, source=tmp_path / "experiment.ini")
        assert config.instance.matrix_s == str((tmp_path / "S.json").resolve())


class TestInvalidConfig:
    """Test configuration errors."""

    @pytest.mark.parametrize(
        "text,message",
        [
            ("[run]\nsuite =\n", "Suite list is empty"),
            ("[run]\nsuite = certify, bogus\n", "Unknown suite"),
            ("[run]\nseed = abc\n", "Malformed value"),
            ("[run]\nseed = -1\n", "Seed must be"),
            ("[run]\ninstances = 0\n", "instances must be >= 1"),
            ("[run]\ntol = 0\n", "tol must be positive"),
            ("[run]\nlog_level = loud\n", "Unknown log level"),
            ("[instance]\nconstruction = random\n", "Unknown construction"),
            ("[instance]\nn = 0\n", "Invalid instance recipe"),
            ("[certify]\nmode = fast\n", "Unknown objective mode"),
            ("[certify]\nlambda_grid = 1, x\n", "Malformed value"),
            ("[dunford]\ntheta_steps = 1\n", "theta_steps"),
            ("not an ini file", "Cannot parse configuration"),
        ],
    )
    def test_invalid(self, text, message):
        """Test that each malformed configuration is refused."""
        with pytest.raises(ConfigurationException, match=message):
            parse_config(text)

    def test_missing_file(self, tmp_path):
        """Test that an unreadable file is a configuration error."""
        with pytest.raises(ConfigurationException, match="Cannot read configuration"):
            load_config(tmp_path / "missing.ini")


class TestOverrides:
    """Test command-line overrides."""

    def test_overrides(self):
        """Test seed, out, tol and suite overrides."""
        config = ExperimentConfig().with_overrides(seed=7, out="x", tol=1e-6, suite=("dunford",))
        assert config.run.seed == 7
        assert config.run.out == "x"
        assert config.run.tol == 1e-6
        assert config.run.suite == ("dunford",)

    def test_none_keeps_values(self):
        """Test that None leaves the configured values."""
        config = parse_config("[run]\nseed = 5\n").with_overrides()
        assert config.run.seed == 5

    def test_seed_out_of_range(self):
        """Test that a seed beyond 64 bits is refused."""
        with pytest.raises(ConfigurationException, match="Seed"):
            ExperimentConfig().with_overrides(seed=2**64)

    def test_load_config(self, tmp_path):
        """Test reading a file from disk."""
        path = tmp_path / "experiment.ini"
        path.write_text("[run]\nsuite = certify\n", encoding="utf-8")
        config = load_config(path)
        assert config.run.suite == ("certify",)
        assert config.source == str(path)


def test_suite_names():
    """Test the suite list."""
    assert "identities" in SUITES
    assert len(SUITES) == 7
