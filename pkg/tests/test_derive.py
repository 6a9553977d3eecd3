"""The packaged calibration file must equal a fresh oracle run byte for byte."""

from __future__ import annotations

import pytest

from switchmlsi import calibration, derive


@pytest.fixture(scope="module")
def fresh():
    return derive.derive()


def test_calibration_file_has_not_drifted(fresh):
    assert derive.default_path().read_text() == derive.dumps(fresh)


def test_constants_consistent(fresh):
    c = fresh["constants"]
    assert c["comparison_C"]["value"] == 2 * c["telescope_C"]["value"]
    assert c["flat_entropy_ratio_max"]["value"] <= c["flat_entropy_ratio_max"]["proof_bound"]
    assert c["dirichlet_contraction_max"]["measured"] >= 1.0 - 1e-12
    lo, hi = c["mlsi_witness_band"]["value"]
    assert lo < hi


def test_derived_values(fresh):
    d = fresh["derived"]
    assert d["simple_counts_d2"] == {"4": 90, "5": 2040, "6": 67950}
    assert d["multi_counts_d2"] == {"4": 282, "5": 6210, "6": 202410}
    assert d["simple_mass_n4_d2"] == "4/7"
    assert d["configuration_support_n4_d2"] == 282


def test_loader_reads_packaged_values(fresh):
    for name in ("telescope_C", "comparison_C", "dirichlet_contraction_max", "entropy_preservation_min"):
        assert calibration.constant(name) == fresh["constants"][name]["value"]
    assert calibration.band("mlsi_witness_band") == tuple(fresh["constants"]["mlsi_witness_band"]["value"])
