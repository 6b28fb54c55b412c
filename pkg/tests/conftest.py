import sys

import pytest

from hapsim.config import channel_profile, load_config, terminal_model


@pytest.fixture(scope="session")
def cfg():
    return load_config()


@pytest.fixture(scope="session")
def profiles(cfg):
    return {name: channel_profile(cfg, name) for name in ("dense-urban", "urban", "suburban-rural")}


@pytest.fixture(scope="session")
def handheld(cfg):
    return terminal_model(cfg, "S")


@pytest.fixture(scope="session")
def vsat(cfg):
    return terminal_model(cfg, "Ka")


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
