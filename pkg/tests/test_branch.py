import numpy as np

from groundsound.branch import branch_safety_scan
from groundsound.materials import halfspace_from_constants


def test_scan_clean_for_supported_poisson():
    for nu in (0.0, 0.1, 0.25, 0.26):
        hs = halfspace_from_constants(nu, 1e9, 1000.0)
        rep = branch_safety_scan(hs, [0.05, 0.1], np.geomspace(1e-4, 10, 40), np.linspace(-20, 40, 200))
        assert rep.supported and rep.ok, (nu, rep.violations)
        assert rep.points_checked > 0


def test_scan_refuses_complex_roots():
    hs = halfspace_from_constants(0.35, 1e9, 1000.0)
    rep = branch_safety_scan(hs, [0.1], [1.0], [0.0])
    assert not rep.supported
    assert not rep.ok
    assert rep.points_checked == 0
