import math

import mpmath as mp
import numpy as np
import pytest

from nlsetransport.bethe import (BetheError, ModeRoot, bethe_residual, bound_parents,
                                 bound_state_spectrum, classify, continue_root, free_state,
                                 resonance_kappas, seed_bound, seed_free, single_particle_roots,
                                 two_particle_roots, write_modes_csv)

D = 30.0
RES = (math.pi / D) ** 2


def mp_pair(k1, k2, kappa, d):
    """Polish a pair with mpmath at 40 digits on the exponential form (independent oracle)."""
    mp.mp.dps = 40
    ik = mp.mpc(0, kappa)

    def eqs(a, b):
        return [mp.exp(2j * x * d) * (x - 1) ** 2 * (x - y - ik) * (x + y - ik)
                - (x + 1) ** 2 * (x - y + ik) * (x + y + ik) for x, y in ((a, b), (b, a))]

    r = mp.findroot(eqs, (mp.mpc(k1), mp.mpc(k2)))
    return complex(r[0]), complex(r[1])


def test_single_particle_first_root():
    k = single_particle_roots(D, 1)[0]
    assert abs(k.real - math.pi / D) / (math.pi / D) < 0.05 and k.imag < 0
    mp.mp.dps = 40
    ref = mp.findroot(lambda x: mp.exp(2j * x * D) * (x - 1) ** 2 - (x + 1) ** 2, mp.mpc(k))
    assert abs(k - complex(ref)) < 1e-12


def test_single_particle_large_d():
    """Re k - n pi/d vanishes at least as fast as 1/d (in fact ~ 1/d^3, k ~ n pi/(d + 2i))."""
    devs = [(math.pi / d - single_particle_roots(d, 1)[0].real) for d in (250.0, 500.0, 1000.0)]
    assert all(x > 0 for x in devs)
    assert devs[0] / devs[1] > 2 and devs[1] / devs[2] > 2
    for d in (250.0, 1000.0):
        k = single_particle_roots(d, 3)
        for n in (1, 2, 3):
            assert k[n - 1] == pytest.approx(n * math.pi / (d + 2j), rel=1e-4)


def test_single_particle_empty():
    assert single_particle_roots(D, 0) == []


def test_weak_interaction_reproduces_free_pair():
    sp = single_particle_roots(D, 2)
    r = free_state(D, 1, 2, 1e-6)
    assert abs(r.k1 - sp[0]) < 1e-4 and abs(r.k2 - sp[1]) < 1e-4
    r = two_particle_roots(D, 1e-6, seed_free(D, 1, 2))
    assert abs(r.k1 - sp[0]) < 1e-4 and abs(r.k2 - sp[1]) < 1e-4


def test_roots_agree_with_high_precision_oracle():
    for root in bound_state_spectrum(D, -1 / 6, 3) + [free_state(D, 1, 2, 0.3)]:
        a, b = mp_pair(root.k1, root.k2, root.kappa, D)
        assert max(abs(a - root.k1), abs(b - root.k2)) < 1e-10


def test_bound_leading_order_shape():
    r = bound_state_spectrum(D, -1 / 6, 1)[0]
    kappa = -1 / 6
    assert r.branch == "bound" and classify(r.k1, r.k2, kappa) == "bound"
    hi, lo = sorted((r.k1, r.k2), key=lambda k: k.imag)[::-1]
    assert hi.imag == pytest.approx(abs(kappa) / 2, rel=0.1)
    assert -lo.imag == pytest.approx(abs(kappa) / 2, rel=0.15)
    assert abs(hi.real - lo.real) < 1e-2 * hi.real
    assert 0 < hi.real < math.pi / D


def test_fermionization_under_strong_repulsion():
    sp = single_particle_roots(D, 2)
    errs = []
    for kd in (15.0, 30.0, 60.0):
        r = free_state(D, 1, 1, kd / D)
        assert r.branch == "free"
        errs.append(max(abs(r.k1.real - sp[0].real) / sp[0].real,
                        abs(r.k2.real - sp[1].real) / sp[1].real))
    assert errs[1] < 0.1
    assert errs[0] > errs[1] > errs[2]
    r = free_state(D, 1, 1, 1.0)
    assert abs(r.k1.real - math.pi / D) < 0.1 * math.pi / D
    assert abs(r.k2.real - 2 * math.pi / D) < 0.1 * 2 * math.pi / D


def test_spectrum_properties():
    roots = bound_state_spectrum(D, -1 / 6, 4)
    assert [r.label for r in roots] == [1, 2, 3, 4]
    for r in roots:
        assert r.residual < 1e-10 and r.converged
        assert r.energy.imag < 0
        assert r.k1.real <= r.k2.real + 1e-9
        assert bethe_residual(r.k2, r.k1, r.kappa, D) == pytest.approx(r.residual, abs=1e-14)
        assert not r.duplicate


def test_weak_attraction_energy_limit():
    """As kappa -> 0- branch n tends to the free pair energy (n1^2 + n2^2)(pi/d)^2, up to the
    radiative shift of the single-particle roots."""
    for n in (1, 2, 3):
        r = bound_state_spectrum(D, -1e-6 / D, n)[-1]
        n1, n2 = bound_parents(n)
        sp = single_particle_roots(D, n2)
        assert r.energy.real == pytest.approx((sp[n1 - 1] ** 2 + sp[n2 - 1] ** 2).real, rel=1e-4)
        assert r.energy.real == pytest.approx((n1**2 + n2**2) * RES, rel=0.05)


@pytest.mark.xfail(strict=True, reason="no labelling of the bound branches gives Re E within 15% "
                   "of 0.073841 at d=30, kappa=-1/6 (closest: 0.0615)")
def test_second_bound_energy_vs_large_d_formula():
    target = 2 * (2 * math.pi / 30) ** 2 - (1 / 6) ** 2 / 2
    roots = bound_state_spectrum(D, -1 / 6, 3)
    assert any(abs(r.energy.real - target) / target < 0.15 for r in roots[1:2])


def test_exchange_symmetry_of_equations():
    r = bound_state_spectrum(D, -0.1, 2)[1]
    assert bethe_residual(r.k2, r.k1, r.kappa, D) < 1e-10


def test_continuation_round_trip():
    start = bound_state_spectrum(D, -1e-3 / D, 2)[1]
    there = continue_root(start, -5 / D)
    back = continue_root(there, start.kappa)
    assert np.max(np.abs(back.k - start.k)) < 1e-8


def test_duplicate_flag_and_spurious_rejection():
    r = bound_state_spectrum(D, -0.1, 1)[0]
    again = two_particle_roots(D, r.kappa, r, known=[r])
    assert again.duplicate
    with pytest.raises(BetheError) as err:
        two_particle_roots(D, -0.1, ModeRoot(0.1 + 0j, 0.1 + 0j, -0.1, D, "bound", 1))
    assert err.value.last is not None


def test_bound_requires_attraction():
    with pytest.raises(ValueError):
        bound_state_spectrum(D, 0.1, 2)
    with pytest.raises(ValueError):
        seed_bound(D, 1, 0.2)


def test_resonances_bracket_second_branch():
    found = resonance_kappas(D, RES, [1, 2, 3], (-8 / D, -1e-6 / D))
    assert [n for n, _ in found] == [2]
    kstar = found[0][1]
    assert 3.5 <= -kstar * D <= 6.5
    e = continue_root(bound_state_spectrum(D, -1e-3 / D, 2)[1], kstar).energy.real
    assert abs(e / 2 - RES) < 1e-8


def test_resonances_empty_range():
    assert resonance_kappas(D, RES, [], (-0.2, -0.01)) == []


def test_modes_csv(tmp_path):
    roots = bound_state_spectrum(D, -0.1, 2) + [free_state(D, 1, 2, -0.01)]
    write_modes_csv(tmp_path / "m.csv", roots)
    lines = (tmp_path / "m.csv").read_text().splitlines()
    assert lines[0] == "n,kappa,re_k1,im_k1,re_k2,im_k2,re_E,im_E,branch,residual"
    assert lines[1].startswith("1,") and lines[3].startswith("1-2,")
    write_modes_csv(tmp_path / "e.csv", [])
    assert (tmp_path / "e.csv").read_text().count("\n") == 1


def test_large_d_bound_pairs_tend_to_half_integer_momenta():
    """At d=200 the splitting is +-i|kappa|/2 within 5%, while Re k d/pi moves towards n/2 as
    |kappa| d grows (a bound pair behaves as one particle of mass 2m)."""
    d = 200.0
    gaps = {}
    for kd in (-5.0, -10.0):
        for r in bound_state_spectrum(d, kd / d, 3):
            up, dn = sorted((r.k1, r.k2), key=lambda k: -k.imag)
            assert up.imag == pytest.approx(abs(kd / d) / 2, rel=0.05)
            assert -dn.imag == pytest.approx(abs(kd / d) / 2, rel=0.05)
            gaps.setdefault(r.label, []).append(abs(up.real * d / math.pi - r.label / 2))
    assert all(g[1] < g[0] for g in gaps.values())
