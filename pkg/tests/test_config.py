"""
Tests for the options API.
"""

from pathlib import Path

import pytest

from mvqc_scope.backend import FileBackend, InMemoryBackend
from mvqc_scope.config import (
    ConfigKey,
    configure_backend,
    get_option,
    load_config_file,
    option_context,
    parse_config_text,
    reset_option,
    resolve,
    set_option,
)


class TestOptions:
    def test_defaults(self):
        assert get_option(ConfigKey.IMAGING_T_DARK) == 128
        assert get_option("imaging.offset1") == 20
        assert get_option("imaging.offset2") == 40
        assert get_option(ConfigKey.QUADTREE_ORDER) == "zorder"
        assert get_option(ConfigKey.MOMENTS_NORMALIZED) is False
        assert get_option(ConfigKey.CLASSIFY_FUZZIFIER) == 2.0
        assert get_option(ConfigKey.CLASSIFY_EPS) == 1e-5
        assert get_option(ConfigKey.CLASSIFY_MAX_ITER) == 1000
        assert get_option(ConfigKey.EVAL_IRIS_IMPOSTERS) == "first"
        assert get_option(ConfigKey.RECORDS_BACKEND) == "memory"

    def test_set_and_reset(self):
        set_option(ConfigKey.IMAGING_T_DARK, 60)
        assert get_option(ConfigKey.IMAGING_T_DARK) == 60

        reset_option(ConfigKey.IMAGING_T_DARK)
        assert get_option(ConfigKey.IMAGING_T_DARK) == 128

    def test_reset_all(self):
        set_option("quadtree.order", "rowmajor")
        set_option("classify.knn_slack", 0.5)
        reset_option()
        assert get_option("quadtree.order") == "zorder"
        assert get_option("classify.knn_slack") == 0.0

    def test_unknown_key(self):
        with pytest.raises(KeyError):
            set_option("imaging.gamma", 1.0)
        with pytest.raises(KeyError):
            get_option("imaging.gamma")
        with pytest.raises(TypeError):
            get_option(42)

    @pytest.mark.parametrize(
        "key, value",
        [
            (ConfigKey.IMAGING_T_DARK, 256),
            (ConfigKey.IMAGING_T_DARK, True),
            (ConfigKey.IMAGING_OFFSET1, -1),
            (ConfigKey.QUADTREE_ORDER, "hilbert"),
            (ConfigKey.MOMENTS_NORMALIZED, 1),
            (ConfigKey.CLASSIFY_FUZZIFIER, 1.0),
            (ConfigKey.CLASSIFY_EPS, 0),
            (ConfigKey.CLASSIFY_MAX_ITER, 0),
            (ConfigKey.EVAL_IRIS_IMPOSTERS, "some"),
            (ConfigKey.RECORDS_BACKEND, "sqlite"),
        ],
    )
    def test_invalid_values(self, key, value):
        with pytest.raises(ValueError):
            set_option(key, value)

    def test_option_context_restores(self):
        with option_context((ConfigKey.QUADTREE_ORDER, "rowmajor"), ("imaging.t_dark", 50)):
            assert get_option(ConfigKey.QUADTREE_ORDER) == "rowmajor"
            assert get_option(ConfigKey.IMAGING_T_DARK) == 50
        assert get_option(ConfigKey.QUADTREE_ORDER) == "zorder"
        assert get_option(ConfigKey.IMAGING_T_DARK) == 128

    def test_option_context_restores_on_error(self):
        with pytest.raises(RuntimeError):
            with option_context((ConfigKey.CLASSIFY_EPS, 0.1)):
                raise RuntimeError("boom")
        assert get_option(ConfigKey.CLASSIFY_EPS) == 1e-5

    def test_resolve(self):
        assert resolve(ConfigKey.IMAGING_OFFSET2, None) == 40
        assert resolve(ConfigKey.IMAGING_OFFSET2, 12) == 12
        assert resolve(ConfigKey.MOMENTS_NORMALIZED, False) is False


class TestConfigFile:
    def test_parse_coerces_types(self):
        values = parse_config_text(
            "# iris run\n"
            "imaging.t_dark = 90\n"
            "\n"
            "moments.normalized = yes   # trailing comment\n"
            "classify.fuzzifier = 2.5\n"
            "quadtree.order = rowmajor\n"
        )
        assert values == {
            "imaging.t_dark": 90,
            "moments.normalized": True,
            "classify.fuzzifier": 2.5,
            "quadtree.order": "rowmajor",
        }

    def test_parse_errors(self):
        with pytest.raises(ValueError, match="line 1"):
            parse_config_text("imaging.t_dark 90")
        with pytest.raises(KeyError):
            parse_config_text("imaging.unknown = 1")
        with pytest.raises(ValueError, match="line 2"):
            parse_config_text("imaging.t_dark = 1\nmoments.normalized = maybe")

    def test_load_applies_options(self, tmp_path):
        path = tmp_path / "mvqc.conf"
        path.write_text("imaging.offset1 = 6\nimaging.offset2 = 12\n", encoding="utf-8")

        applied = load_config_file(path)

        assert applied == {"imaging.offset1": 6, "imaging.offset2": 12}
        assert get_option(ConfigKey.IMAGING_OFFSET1) == 6
        assert get_option(ConfigKey.IMAGING_OFFSET2) == 12

    def test_load_validates(self, tmp_path):
        path = tmp_path / "mvqc.conf"
        path.write_text("imaging.t_dark = 300\n", encoding="utf-8")
        with pytest.raises(ValueError):
            load_config_file(path)


class TestConfigureBackend:
    def test_memory_backend(self):
        assert isinstance(configure_backend(), InMemoryBackend)

    def test_file_backend(self, tmp_path):
        target = tmp_path / "records.jsonl"
        with option_context(
            (ConfigKey.RECORDS_BACKEND, "file"),
            (ConfigKey.RECORDS_FILE_PATH, str(target)),
            (ConfigKey.RECORDS_FILE_BUFFER_SIZE, 3),
        ):
            backend = configure_backend()

        assert isinstance(backend, FileBackend)
        assert backend.filepath == Path(target)
        assert backend._buffer_size == 3
