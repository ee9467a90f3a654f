"""
Tests for configuration loading, coercion and schema validation
"""
import pytest

from config.settings import Config
from core.exceptions import ConfigurationError
from utils.validators import validate_grid, validate_statistical_size


class TestConfig:
    """Packaged defaults, user overlays, overrides and snapshots"""

    def test_packaged_defaults(self):
        general = Config().get_general_config()
        assert general['seed'] == 20240521
        assert general['threads'] == 1
        assert general['paths'] == 10000
        assert general['horizon'] == 1.0

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigurationError):
            Config(str(tmp_path / 'missing.ini'))

    def test_user_file_overrides_single_keys(self, tmp_path):
        path = tmp_path / 'levysim.ini'
        path.write_text("[general]\nseed = 3\n")
        general = Config(str(path)).get_general_config()
        assert general['seed'] == 3
        assert general['paths'] == 10000

    def test_set_values_are_validated_like_file_values(self, make_config):
        config = make_config()
        config.set('general', 'threads', 3)
        config.set('general', 'out', 'elsewhere')
        general = config.get_general_config()
        assert general['threads'] == 3
        assert general['out'] == 'elsewhere'

    def test_set_bad_value(self, make_config):
        config = make_config()
        config.set('general', 'threads', 'many')
        with pytest.raises(ConfigurationError):
            config.get_general_config()

    def test_bad_type_in_general(self, make_config):
        config = make_config("[general]\npaths = lots\n")
        with pytest.raises(ConfigurationError):
            config.get_general_config()

    def test_unknown_general_key(self, make_config):
        config = make_config("[general]\ncolour = blue\n")
        with pytest.raises(ConfigurationError, match='colour'):
            config.get_general_config()

    def test_bad_logging_level(self, make_config):
        with pytest.raises(ConfigurationError):
            make_config("[logging]\nlevel = LOUD\n").get_logging_config()

    def test_check_sections(self, make_config):
        config = make_config("[coupling-gapp]\npaths = 10\n")
        with pytest.raises(ConfigurationError, match='coupling-gapp'):
            config.check_sections(['coupling-gap'])

    def test_set_and_save(self, tmp_path):
        config = Config()
        config.set('general', 'seed', 11)
        config.set('coupling-gap', 'eps0_grid', [0.4, 0.2])
        path = tmp_path / 'saved' / 'levysim.ini'
        config.save_config(str(path))
        reloaded = Config(str(path), load_defaults=False)
        assert reloaded.get_section('general')['seed'] == '11'
        assert reloaded.get_section('coupling-gap')['eps0_grid'] == '0.4, 0.2'


class TestExperimentConfig:
    """Per-experiment sections validated against the plugin schemas"""

    def test_run_keys_are_inherited_from_general(self, manager):
        experiment = manager("[general]\nchunk = 500\n").get_experiment('coupling-gap')
        assert experiment.config['chunk'] == 500
        assert experiment.config['paths'] == 100000
        assert experiment.config['assertions'] is True
        assert experiment.config['dump'] is False

    def test_grids_are_coerced(self, manager):
        experiment = manager().get_experiment('euler-baseline')
        assert experiment.config['n_grid'] == [16, 32, 64, 128, 256, 512]
        assert experiment.config['horizon_check'] is True

    def test_unknown_key(self, manager):
        experiments = manager("[coupling-gap]\nwobble = 1\n")
        with pytest.raises(ConfigurationError, match='wobble'):
            experiments.get_experiment('coupling-gap')

    def test_out_of_range_value(self, manager):
        experiments = manager("[neglect-vs-gauss]\nalphas = 2.5\n")
        with pytest.raises(ConfigurationError):
            experiments.get_experiment('neglect-vs-gauss')

    def test_bad_boolean(self, manager):
        experiments = manager("[scheme-rate]\nnull_check = maybe\n")
        with pytest.raises(ConfigurationError):
            experiments.get_experiment('scheme-rate')


class TestValidators:

    @pytest.mark.parametrize("grid", [[1, 2, 3], [0.2, 0.1, 0.05], [7]])
    def test_monotone_grids(self, grid):
        assert validate_grid('g', grid)

    @pytest.mark.parametrize("grid", [[], [1, 3, 2], [2, 2, 4]])
    def test_bad_grids(self, grid):
        with pytest.raises(ConfigurationError):
            validate_grid('g', grid)

    def test_statistical_size(self):
        assert validate_statistical_size(1000)
        with pytest.raises(ConfigurationError, match='assertions = false'):
            validate_statistical_size(999)
