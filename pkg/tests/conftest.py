import pytest

from Relata.experiment import ExperimentGeometry, Model, SimulationConfig

FIG2_YAML = """\
geometry:
  L: 4000.0
  delta_t: 4.0e-12
  V: 100.0
angles:
  alpha_deg: 45.0
  beta_deg: -45.0
model: qm
trials: 20000
seed: 7
"""


@pytest.fixture
def before_before_geometry():
    """V = 100 m/s, L = 4 km, δt = 4 ps: both impacts are before events."""
    return ExperimentGeometry.from_total_length(4000.0, 4e-12, V=100.0)


@pytest.fixture
def before_nonbefore_geometry():
    return ExperimentGeometry.from_total_length(4000.0, 5e-12, V=100.0)


@pytest.fixture
def make_config(before_before_geometry):
    def _make(**changes):
        defaults = dict(
            geometry=before_before_geometry,
            alpha_deg=45.0,
            beta_deg=-45.0,
            model=Model.QM,
            trials=10_000,
            seed=12345,
        )
        defaults.update(changes)
        return SimulationConfig(**defaults)
    return _make


@pytest.fixture
def fig2_config_file(tmp_path):
    path = tmp_path / "fig2.yaml"
    path.write_text(FIG2_YAML, encoding="utf-8")
    return path
