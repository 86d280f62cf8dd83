import pytest

import patchscore as ps


@pytest.fixture(scope="session")
def design_path():
    return ps.fixture_path("reglk_wrapper.sv")


@pytest.fixture(scope="session")
def options_path():
    return ps.fixture_path("options_table2.json")


@pytest.fixture(scope="session")
def cwe_path():
    return ps.fixture_path("cwe_fixture.json")


@pytest.fixture(scope="session")
def module(design_path):
    return ps.parse_source(design_path.read_text(encoding="utf-8"))


@pytest.fixture(scope="session")
def model(module):
    return ps.elaborate(module)


@pytest.fixture(scope="session")
def options(options_path):
    return ps.load_patch_configs(str(options_path))


@pytest.fixture(scope="session")
def options_by_name(options):
    return {c.name: c for c in options}


@pytest.fixture(scope="session")
def cwes(cwe_path):
    return ps.load_cwe_requirements(str(cwe_path))
